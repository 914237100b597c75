"""Per-step and per-trajectory convergence metrics.

A trajectory is summarized by three scalar series: the Frobenius step
``delta_k = ||P_{k+1} - P_k||_F``, the maximal entrywise step
``e_k = max_ij |P_{k+1}(i,j) - P_k(i,j)|``, and the one-step contraction
ratio ``rho_k = delta_{k+1} / delta_k`` (defined only when ``delta_k > 0``).
The two norms are equivalent up to the factor n (``e <= delta <= n*e``), so
they track the same decay.  Derived per-trajectory quantities are the
convergence time (first index after which every recorded Frobenius step is
below a tolerance) and the total variation (sum of all Frobenius steps).

Everything here is a pure computation over immutable records; traces may be
evaluated in parallel per trial.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import MatrixState, SignPattern
from .errors import DimensionMismatchError

__all__ = [
    "Termination",
    "StepRecord",
    "TrajectoryTrace",
    "frobenius_step",
    "entrywise_step",
    "contraction_ratio",
    "convergence_time",
    "total_variation",
    "kahan_sum",
    "audit_trace",
]


class Termination(enum.Enum):
    """Why a trajectory stopped recording."""

    TOLERANCE_MET = "tolerance_met"
    SAFEGUARD_LIMIT = "safeguard_limit"
    DEGENERATE = "degenerate"


@dataclass(frozen=True, slots=True)
class StepRecord:
    """Metrics of the transition from iterate k to iterate k+1.

    ``rho`` is ``delta_{k+1}/delta_k``; it is None on the last recorded step
    (no successor yet) and whenever ``delta_k`` is zero (ratio undefined).
    """

    k: int
    delta: float
    e_step: float
    rho: float | None = None


@dataclass(frozen=True)
class TrajectoryTrace:
    """Scalar record of one trajectory; never stores matrices.

    ``seed`` is the trial's substream base seed.  ``t_conv_1e6`` and
    ``t_conv_1e12`` are the convergence times at the two report tolerances;
    ``v_total`` is the compensated sum of all recorded Frobenius steps.
    """

    n: int
    trial_id: int
    seed: int
    steps: tuple[StepRecord, ...]
    t_conv_1e6: int | None
    t_conv_1e12: int | None
    v_total: float
    terminated_by: Termination
    pattern: SignPattern | None
    resample_count: int

    @property
    def deltas(self) -> tuple[float, ...]:
        return tuple(s.delta for s in self.steps)

    @property
    def stop_index(self) -> int | None:
        """Index at which the entrywise stopping rule fired (None otherwise).

        Recorded alongside the Frobenius-based convergence times because the
        two stopping notions differ; this one is simply the last step index
        of a tolerance-met trace.
        """
        if self.terminated_by is Termination.TOLERANCE_MET and self.steps:
            return self.steps[-1].k
        return None


def frobenius_step(P: MatrixState, Q: MatrixState) -> float:
    """Frobenius norm of Q - P; zero iff the iterates are identical."""
    if P.n != Q.n:
        raise DimensionMismatchError(f"orders differ: {P.n} vs {Q.n}")
    D = Q.entries - P.entries
    return float(np.sqrt(np.einsum("ij,ij->", D, D)))


def entrywise_step(P: MatrixState, Q: MatrixState) -> float:
    """Largest absolute entry of Q - P."""
    if P.n != Q.n:
        raise DimensionMismatchError(f"orders differ: {P.n} vs {Q.n}")
    return float(np.abs(Q.entries - P.entries).max())


def contraction_ratio(delta_k: float, delta_next: float) -> float | None:
    """``delta_next / delta_k`` when ``delta_k > 0``; None when it is zero
    (the ratio is undefined there)."""
    if delta_k < 0 or delta_next < 0:
        raise ValueError("step sizes are nonnegative")
    if delta_k == 0.0:
        return None
    return delta_next / delta_k


def _t_conv(deltas, epsilon: float, terminated_by: Termination) -> int | None:
    if not deltas:
        # Only a degenerate abort before the first update produces an empty
        # record; no convergence statement can be made.
        return None
    last_at_or_above = None
    for j, d in enumerate(deltas):
        if d >= epsilon:
            last_at_or_above = j
    if last_at_or_above is None:
        return 0
    t = last_at_or_above + 1
    if t == len(deltas) and terminated_by is not Termination.TOLERANCE_MET:
        # The run was cut off with the step still at/above epsilon: the
        # "every later step below epsilon" clause never became checkable.
        return None
    return t


def convergence_time(trace: TrajectoryTrace, epsilon: float) -> int | None:
    """Smallest k with every *recorded* delta_j < epsilon for j >= k.

    Because the run stops once its stopping rule fires, the quantifier runs
    over the recorded horizon; a trace cut off by the safeguard with its
    final delta still >= epsilon has no convergence time.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return _t_conv(trace.deltas, epsilon, trace.terminated_by)


def kahan_sum(values) -> float:
    """Compensated summation; thousands of tiny terms near 1e-12 would be
    absorbed by a naive running sum."""
    total = 0.0
    carry = 0.0
    for v in values:
        y = v - carry
        t = total + y
        carry = (t - total) - y
        total = t
    return total


def total_variation(trace: TrajectoryTrace) -> float:
    """Sum of all recorded Frobenius steps (compensated)."""
    return kahan_sum(trace.deltas)


def audit_trace(trace: TrajectoryTrace) -> list[str]:
    """Check every definitional invariant of a recorded trace.

    Returns a list of violation descriptions (empty when the trace is
    clean): exact norm equivalence ``e_k <= delta_k <= n * e_k`` at every
    step, rho reconstruction ``rho_k * delta_k = delta_{k+1}`` to 1e-12
    relative, v_total consistency to 1e-12 relative, finiteness, and the
    monotone tail below each recorded convergence time.
    """
    bad: list[str] = []
    n = trace.n
    steps = trace.steps
    for i, s in enumerate(steps):
        if not (math.isfinite(s.delta) and math.isfinite(s.e_step)):
            bad.append(f"step {s.k}: non-finite metrics")
            continue
        if not (s.e_step <= s.delta <= n * s.e_step):
            bad.append(
                f"step {s.k}: norm equivalence violated "
                f"(e={s.e_step!r}, delta={s.delta!r}, n*e={n * s.e_step!r})"
            )
        is_last = i == len(steps) - 1
        if s.rho is None:
            if not is_last and s.delta > 0:
                bad.append(f"step {s.k}: rho missing with positive delta and a successor")
        else:
            if is_last:
                bad.append(f"step {s.k}: rho present on the last step")
            elif s.delta == 0.0:
                bad.append(f"step {s.k}: rho present with delta == 0")
            else:
                nxt = steps[i + 1].delta
                if abs(s.rho * s.delta - nxt) > 1e-12 * max(nxt, s.delta, 1e-300):
                    bad.append(f"step {s.k}: rho*delta != next delta")
    v = kahan_sum(s.delta for s in steps)
    if not math.isfinite(trace.v_total):
        bad.append("v_total is not finite")
    elif abs(trace.v_total - v) > 1e-12 * max(abs(v), 1.0):
        bad.append(f"v_total {trace.v_total!r} != recomputed {v!r}")
    for eps, t in ((1e-6, trace.t_conv_1e6), (1e-12, trace.t_conv_1e12)):
        if t is not None and any(s.delta >= eps for s in steps[t:]):
            bad.append(f"t_conv({eps:g}) = {t} has a later step >= {eps:g}")
    return bad
