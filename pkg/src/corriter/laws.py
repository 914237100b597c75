"""Cross-trial aggregation and the four empirical-regularity checks.

The checks quantify, against reference values measured over thousand-trial
runs per dimension:

I.   the first update contracts the Frobenius step in every trial, with a
     median ratio that shrinks roughly like n^(-1/2);
II.  step sizes decay quasi-monotonically with bounded overshoots and a
     finite total variation whose median grows linearly in n;
III. the binned median of the step ratio against the step size collapses
     onto one dimension-independent curve;
IV.  iteration counts to any fixed tolerance stay bounded in n.

Each check is a pure function from outcomes to a LawReport whose pass flag
is determined solely by its metrics against the configured thresholds; all
threshold values are echoed into the report for audit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .diagnostics import Termination, TrajectoryTrace
from .errors import EmptySampleError, InsufficientDataError, NonPositiveDeltaError

__all__ = [
    "QuantileSummary",
    "BinnedBin",
    "BinnedCurve",
    "EcdfCurve",
    "LawThresholds",
    "DEFAULT_THRESHOLDS",
    "LawReport",
    "summarize",
    "ecdf",
    "binned_contraction_curve",
    "collapse_deviation",
    "collect_pairs",
    "first_step_ratio",
    "max_overshoot",
    "verify_law1",
    "verify_law2",
    "verify_law3",
    "verify_law4",
]


# ---------------------------------------------------------------------------
# Summaries
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuantileSummary:
    count: int
    min: float
    q05: float
    q25: float
    median: float
    q75: float
    q90: float
    q95: float
    q99: float
    max: float
    mean: float
    stddev: float

    def as_row(self) -> tuple:
        return (
            self.count, self.min, self.q05, self.q25, self.median, self.q75,
            self.q90, self.q95, self.q99, self.max, self.mean, self.stddev,
        )


def summarize(values: Iterable[float]) -> QuantileSummary:
    """Order statistics (linear interpolation between closest ranks), mean,
    and standard deviation with the N-1 divisor."""
    a = np.asarray(list(values), dtype=np.float64)
    if a.size == 0:
        raise EmptySampleError("summarize() needs a nonempty sample")
    a = np.sort(a)  # exact permutation invariance (summation order fixed)
    qs = np.quantile(a, [0.05, 0.25, 0.5, 0.75, 0.90, 0.95, 0.99], method="linear")
    return QuantileSummary(
        count=int(a.size),
        min=float(a.min()),
        q05=float(qs[0]),
        q25=float(qs[1]),
        median=float(qs[2]),
        q75=float(qs[3]),
        q90=float(qs[4]),
        q95=float(qs[5]),
        q99=float(qs[6]),
        max=float(a.max()),
        mean=float(a.mean()),
        stddev=float(a.std(ddof=1)) if a.size > 1 else 0.0,
    )


@dataclass(frozen=True)
class EcdfCurve:
    """Right-continuous empirical distribution function of integer samples."""

    support: tuple[int, ...]
    values: tuple[float, ...]

    def evaluate(self, k: float) -> float:
        idx = np.searchsorted(self.support, k, side="right")
        return 0.0 if idx == 0 else self.values[idx - 1]


def ecdf(samples: Iterable[int]) -> EcdfCurve:
    """F(k) = (#samples <= k) / N on the sorted unique support."""
    data = sorted(samples)
    if not data:
        raise EmptySampleError("ecdf() needs a nonempty sample")
    n = len(data)
    support: list[int] = []
    values: list[float] = []
    for i, x in enumerate(data, start=1):
        x = int(x)
        if support and support[-1] == x:
            values[-1] = i / n
        else:
            support.append(x)
            values.append(i / n)
    return EcdfCurve(support=tuple(support), values=tuple(values))


# ---------------------------------------------------------------------------
# Binned step-ratio curve
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BinnedBin:
    index: int
    lo: float
    hi: float
    delta_median: float
    rho_median: float
    rho_p10: float
    rho_p90: float
    count: int


@dataclass(frozen=True)
class BinnedCurve:
    """Log-binned medians of (delta, rho) pairs; sparse bins are dropped but
    counted so that retained + dropped = total."""

    bins: tuple[BinnedBin, ...]
    bin_edges: tuple[float, ...]
    dropped_count: int
    total_count: int

    def by_index(self) -> dict[int, BinnedBin]:
        return {b.index: b for b in self.bins}


def _log_edges(lo: float, hi: float, num_bins: int) -> np.ndarray:
    if hi <= lo:
        hi = float(np.nextafter(lo, np.inf))
    edges = np.logspace(math.log10(lo), math.log10(hi), num_bins + 1)
    edges[0] = lo
    edges[-1] = hi
    return edges


def binned_contraction_curve(
    pairs: Sequence[tuple[float, float]],
    num_bins: int = 24,
    min_bin_count: int = 20,
    *,
    edges: Sequence[float] | None = None,
) -> BinnedCurve:
    """Per-bin medians of the step ratio over log10-uniform step-size bins.

    Pairs are (delta, rho) observations pooled over trials; bin edges span
    [min delta, max delta] unless given explicitly (per-dimension curves are
    compared on the pooled curve's edges).  Bins holding fewer than
    ``min_bin_count`` pairs are dropped.
    """
    arr = np.asarray(pairs, dtype=np.float64)
    if arr.size == 0:
        raise EmptySampleError("binned_contraction_curve() needs pairs")
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("pairs must be (delta, rho) 2-tuples")
    deltas = arr[:, 0]
    rhos = arr[:, 1]
    if np.any(deltas <= 0.0):
        raise NonPositiveDeltaError("log binning requires every delta > 0")
    if edges is None:
        edge_arr = _log_edges(float(deltas.min()), float(deltas.max()), num_bins)
    else:
        edge_arr = np.asarray(edges, dtype=np.float64)
        if edge_arr.ndim != 1 or edge_arr.size < 2 or np.any(np.diff(edge_arr) <= 0):
            raise ValueError("edges must be strictly increasing with >= 2 entries")
    nbins = edge_arr.size - 1
    idx = np.clip(np.searchsorted(edge_arr, deltas, side="right") - 1, 0, nbins - 1)
    # Pairs outside explicit edges are not binned at all.
    in_range = (deltas >= edge_arr[0]) & (deltas <= edge_arr[-1])
    bins: list[BinnedBin] = []
    retained = 0
    total_in_range = int(in_range.sum())
    for b in range(nbins):
        mask = in_range & (idx == b)
        count = int(mask.sum())
        if count < min_bin_count:
            continue
        r = rhos[mask]
        p10, med, p90 = np.quantile(r, [0.10, 0.50, 0.90], method="linear")
        bins.append(
            BinnedBin(
                index=b,
                lo=float(edge_arr[b]),
                hi=float(edge_arr[b + 1]),
                delta_median=float(np.median(deltas[mask])),
                rho_median=float(med),
                rho_p10=float(p10),
                rho_p90=float(p90),
                count=count,
            )
        )
        retained += count
    return BinnedCurve(
        bins=tuple(bins),
        bin_edges=tuple(float(e) for e in edge_arr),
        dropped_count=total_in_range - retained,
        total_count=total_in_range,
    )


def collapse_deviation(curve: BinnedCurve, reference: BinnedCurve) -> float | None:
    """Largest |median rho| gap over bins retained by both curves (curves
    must share edges); None when no bin is shared."""
    ref = reference.by_index()
    devs = [
        abs(b.rho_median - ref[b.index].rho_median)
        for b in curve.bins
        if b.index in ref
    ]
    return max(devs) if devs else None


# ---------------------------------------------------------------------------
# Shared extraction helpers
# ---------------------------------------------------------------------------


def _traces(outcomes: Iterable) -> list[TrajectoryTrace]:
    return [getattr(o, "trace", o) for o in outcomes]


def _by_dim(traces: Sequence[TrajectoryTrace]) -> dict[int, list[TrajectoryTrace]]:
    groups: dict[int, list[TrajectoryTrace]] = {}
    for tr in traces:
        groups.setdefault(tr.n, []).append(tr)
    return dict(sorted(groups.items()))


def first_step_ratio(trace: TrajectoryTrace) -> float | None:
    """rho_0 = delta_1 / delta_0, when both steps were recorded."""
    if trace.steps and trace.steps[0].rho is not None:
        return trace.steps[0].rho
    return None


def max_overshoot(trace: TrajectoryTrace) -> float | None:
    """sup of rho_k over k >= 1 (None when no such ratio was recorded)."""
    rhos = [s.rho for s in trace.steps[1:] if s.rho is not None]
    return max(rhos) if rhos else None


def collect_pairs(
    traces: Iterable[TrajectoryTrace], min_k: int = 0
) -> list[tuple[float, float]]:
    """All recorded (delta_k, rho_k) observations with k >= min_k."""
    pairs: list[tuple[float, float]] = []
    for tr in _traces(traces):
        for s in tr.steps:
            if s.k >= min_k and s.rho is not None:
                pairs.append((s.delta, s.rho))
    return pairs


def _lstsq_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    dx = x - x.mean()
    return float(np.dot(dx, y - y.mean()) / np.dot(dx, dx))


def _require(traces: Sequence[TrajectoryTrace], min_dims: int, min_trials: int) -> dict:
    groups = _by_dim(traces)
    eligible = {n: g for n, g in groups.items() if len(g) >= min_trials}
    if len(eligible) < min_dims:
        raise InsufficientDataError(
            f"need >= {min_dims} dimensions with >= {min_trials} trials each, "
            f"got {[(n, len(g)) for n, g in groups.items()]}"
        )
    return eligible


# ---------------------------------------------------------------------------
# Thresholds
# ---------------------------------------------------------------------------


def _table_rho0() -> dict[int, float]:
    return {3: 0.29, 12: 0.24, 50: 0.15, 150: 0.10, 2000: 0.03}


def _table_vinf() -> dict[int, float]:
    return {3: 4.5, 100: 217.0, 600: 1360.0, 2000: 4580.0}


def _table_tmax() -> dict[int, int]:
    return {
        3: 15, 6: 21, 7: 22, 9: 19, 12: 21, 16: 22, 23: 23, 30: 23, 40: 24,
        50: 24, 55: 24, 69: 25, 80: 25, 100: 25, 150: 26, 250: 26, 350: 27,
        600: 27, 1054: 28, 1600: 28, 1700: 28, 2000: 28,
    }


@dataclass(frozen=True)
class LawThresholds:
    """Single configuration block for every law check; tolerance choices are
    artifact decisions, kept in one overridable place."""

    min_dims: int = 2
    min_trials: int = 30
    # Check I: first-step contraction
    law1_reference_medians: Mapping[int, float] = field(default_factory=_table_rho0)
    law1_median_atol: float = 0.05
    law1_slope_window: tuple[float, float] = (-0.65, -0.35)
    law1_slope_min_n: int = 12
    # Check II: decay and total variation
    law2_reference_medians: Mapping[int, float] = field(default_factory=_table_vinf)
    law2_median_rtol: float = 0.15
    law2_vinf_slope_window: tuple[float, float] = (1.8, 2.8)
    law2_enforce_overshoot_decay: bool = False
    # Check III: binned ratio-curve collapse
    law3_max_collapse_dev: float = 0.10
    law3_small_bin_window: tuple[float, float] = (0.9, 1.1)
    law3_large_bin_max: float = 0.5
    law3_min_dims: int = 3
    law3_min_decade_span: float = 10.0
    num_bins: int = 24
    min_bin_count: int = 20
    # Check IV: bounded iteration counts
    law4_reference_max: Mapping[int, int] = field(default_factory=_table_tmax)
    law4_max_slack: int = 3
    law4_global_max: int = 31
    law4_trend_slack: float = 5.0  # fitted growth per decade of n

    def echo(self, law_id: str) -> dict:
        prefix = {"I": "law1", "II": "law2", "III": "law3", "IV": "law4"}[law_id]
        out: dict = {"min_dims": self.min_dims, "min_trials": self.min_trials}
        if law_id == "III":
            out.update(num_bins=self.num_bins, min_bin_count=self.min_bin_count)
        for name in self.__dataclass_fields__:
            if name.startswith(prefix):
                value = getattr(self, name)
                if isinstance(value, Mapping):
                    value = dict(value)
                out[name] = value
        return out


DEFAULT_THRESHOLDS = LawThresholds()


@dataclass(frozen=True)
class LawReport:
    law_id: str
    passed: bool
    metrics: dict[str, float]
    details: str
    thresholds: dict

    def as_dict(self) -> dict:
        return {
            "law_id": self.law_id,
            "pass": self.passed,
            "metrics": dict(self.metrics),
            "details": self.details,
            "thresholds": self.thresholds,
        }


# ---------------------------------------------------------------------------
# Check I: universal first-step contraction
# ---------------------------------------------------------------------------


def verify_law1(outcomes: Iterable, thresholds: LawThresholds = DEFAULT_THRESHOLDS) -> LawReport:
    """First-step ratios are < 1 in every trial, per-n medians match the
    reference table, and the median shrinks with n at a rate compatible
    with n^(-1/2)."""
    groups = _require(_traces(outcomes), thresholds.min_dims, thresholds.min_trials)
    metrics: dict[str, float] = {}
    lines: list[str] = []
    ok = True

    medians: dict[int, float] = {}
    for n, traces in groups.items():
        rho0 = [r for r in map(first_step_ratio, traces) if r is not None]
        if not rho0:
            raise InsufficientDataError(f"no first-step ratios recorded at n={n}")
        frac = float(np.mean([r < 1.0 for r in rho0]))
        med = float(np.median(rho0))
        medians[n] = med
        metrics[f"frac_rho0_lt1_n{n}"] = frac
        metrics[f"median_rho0_n{n}"] = med
        line_ok = frac == 1.0
        ref = thresholds.law1_reference_medians.get(n)
        if ref is not None:
            line_ok &= abs(med - ref) <= thresholds.law1_median_atol
            lines.append(
                f"n={n}: median rho0={med:.4f} (reference {ref:.2f} "
                f"+-{thresholds.law1_median_atol}), frac<1={frac:.4f}"
            )
        else:
            lines.append(f"n={n}: median rho0={med:.4f}, frac<1={frac:.4f}")
        ok &= line_ok

    fit = {n: m for n, m in medians.items() if n >= thresholds.law1_slope_min_n}
    if len(fit) >= 2:
        slope = _lstsq_slope(
            [math.log(n) for n in fit], [math.log(m) for m in fit.values()]
        )
        metrics["slope_log_median_rho0"] = slope
        lo, hi = thresholds.law1_slope_window
        ok &= lo <= slope <= hi
        lines.append(
            f"log-log slope of median rho0 over n>={thresholds.law1_slope_min_n}: "
            f"{slope:.4f} (window [{lo}, {hi}])"
        )
    else:
        # Metric omitted rather than set to NaN: NaN breaks report equality
        # and strict JSON.
        lines.append(
            f"slope not fitted: fewer than two dimensions >= {thresholds.law1_slope_min_n}"
        )

    return LawReport("I", bool(ok), metrics, "\n".join(lines), thresholds.echo("I"))


# ---------------------------------------------------------------------------
# Check II: quasi-monotone decay, finite total variation
# ---------------------------------------------------------------------------


def _overshoot_thirds(traces: Sequence[TrajectoryTrace]) -> tuple[float, float, float]:
    """Median excess (rho-1 | rho>1, k>=1) pooled by relative trajectory
    thirds; NaN for an empty band."""
    bands: tuple[list[float], list[float], list[float]] = ([], [], [])
    for tr in traces:
        K = len(tr.steps)
        if K < 2:
            continue
        for s in tr.steps:
            if s.k >= 1 and s.rho is not None and s.rho > 1.0:
                bands[min(2, 3 * s.k // K)].append(s.rho - 1.0)
    return tuple(float(np.median(b)) if b else float("nan") for b in bands)  # type: ignore[return-value]


def verify_law2(outcomes: Iterable, thresholds: LawThresholds = DEFAULT_THRESHOLDS) -> LawReport:
    """Every trajectory has finite total variation, per-n medians match the
    reference table, and the median grows linearly in n (fitted slope within
    the window).  The overshoot-decay proxy is measured and flagged; it
    gates the outcome only when explicitly enforced."""
    groups = _require(_traces(outcomes), thresholds.min_dims, thresholds.min_trials)
    metrics: dict[str, float] = {}
    lines: list[str] = []
    ok = True

    medians: dict[int, float] = {}
    for n, traces in groups.items():
        v = np.asarray([tr.v_total for tr in traces])
        # A truncated non-converged trajectory does not witness a finite
        # total variation: only tolerance-met runs count toward the fraction.
        finite = float(
            np.mean(
                [
                    math.isfinite(tr.v_total)
                    and tr.terminated_by is Termination.TOLERANCE_MET
                    for tr in traces
                ]
            )
        )
        med = float(np.median(v))
        medians[n] = med
        metrics[f"frac_finite_vinf_n{n}"] = finite
        metrics[f"median_vinf_n{n}"] = med
        metrics[f"q95_vinf_n{n}"] = float(np.quantile(v, 0.95))
        metrics[f"max_vinf_n{n}"] = float(v.max())
        over = [m for m in map(max_overshoot, traces) if m is not None]
        if over:
            metrics[f"median_max_overshoot_n{n}"] = float(np.median(over))
        ok &= finite == 1.0
        ref = thresholds.law2_reference_medians.get(n)
        if ref is not None:
            rel = abs(med - ref) / ref
            ok &= rel <= thresholds.law2_median_rtol
            lines.append(
                f"n={n}: median V={med:.4g} (reference {ref:g} "
                f"+-{thresholds.law2_median_rtol:.0%}), finite fraction {finite:.4f}"
            )
        else:
            lines.append(f"n={n}: median V={med:.4g}, finite fraction {finite:.4f}")

    if len(medians) >= 2:
        slope = _lstsq_slope(list(medians), list(medians.values()))
        metrics["vinf_slope_per_n"] = slope
        lo, hi = thresholds.law2_vinf_slope_window
        ok &= lo <= slope <= hi
        lines.append(f"median V growth per unit n: {slope:.4f} (window [{lo}, {hi}])")

    thirds = _overshoot_thirds(_traces(outcomes))
    for i, v in enumerate(thirds, start=1):
        if not math.isnan(v):
            metrics[f"overshoot_third{i}_median_excess"] = v
    present = [v for v in thirds if not math.isnan(v)]
    decay_ok = all(a >= b for a, b in zip(present, present[1:]))
    metrics["overshoot_decay_ok"] = float(decay_ok)
    lines.append(
        "overshoot excess medians by trajectory thirds: "
        + ", ".join("nan" if math.isnan(v) else f"{v:.4f}" for v in thirds)
        + f" -> nonincreasing={decay_ok} (measured and flagged"
        + (", enforced)" if thresholds.law2_enforce_overshoot_decay else ", not enforced)")
    )
    if thresholds.law2_enforce_overshoot_decay:
        ok &= decay_ok

    return LawReport("II", bool(ok), metrics, "\n".join(lines), thresholds.echo("II"))


# ---------------------------------------------------------------------------
# Check III: dimension-independent binned ratio curve
# ---------------------------------------------------------------------------


def verify_law3(outcomes: Iterable, thresholds: LawThresholds = DEFAULT_THRESHOLDS) -> LawReport:
    """Per-n binned median ratio curves against the pooled curve (shared
    edges): the curves must nearly coincide, the pooled median must approach
    1 at the smallest retained step sizes, and must show strong contraction
    at the largest."""
    traces = _traces(outcomes)
    groups = _by_dim(traces)
    dims = sorted(groups)
    if len(dims) < thresholds.law3_min_dims or (
        dims and dims[-1] < thresholds.law3_min_decade_span * dims[0]
    ):
        raise InsufficientDataError(
            f"need >= {thresholds.law3_min_dims} dimensions spanning a factor "
            f">= {thresholds.law3_min_decade_span} in n, got {dims}"
        )
    pooled_pairs = collect_pairs(traces)
    if not pooled_pairs:
        raise InsufficientDataError("no (delta, rho) pairs recorded")
    pooled = binned_contraction_curve(
        pooled_pairs, thresholds.num_bins, thresholds.min_bin_count
    )
    if not pooled.bins:
        raise InsufficientDataError("every pooled bin fell below min_bin_count")

    metrics: dict[str, float] = {}
    lines: list[str] = []

    max_dev = 0.0
    for n, group in groups.items():
        per_n = binned_contraction_curve(
            collect_pairs(group),
            thresholds.num_bins,
            thresholds.min_bin_count,
            edges=pooled.bin_edges,
        )
        dev = collapse_deviation(per_n, pooled)
        if dev is not None:
            metrics[f"collapse_dev_n{n}"] = dev
            max_dev = max(max_dev, dev)
            lines.append(f"n={n}: max |median rho - pooled| over shared bins = {dev:.4f}")
    metrics["max_collapse_dev"] = max_dev

    small = pooled.bins[0]
    large = pooled.bins[-1]
    metrics["pooled_small_bin_rho_median"] = small.rho_median
    metrics["pooled_small_bin_delta_median"] = small.delta_median
    metrics["pooled_large_bin_rho_median"] = large.rho_median
    metrics["pooled_large_bin_delta_median"] = large.delta_median

    lo, hi = thresholds.law3_small_bin_window
    dev_ok = max_dev <= thresholds.law3_max_collapse_dev
    small_ok = lo <= small.rho_median <= hi
    large_ok = large.rho_median < thresholds.law3_large_bin_max
    lines.append(
        f"cross-n deviation {max_dev:.4f} (<= {thresholds.law3_max_collapse_dev}): "
        f"{'ok' if dev_ok else 'FAIL'}"
    )
    lines.append(
        f"pooled median rho at smallest retained bin (delta~{small.delta_median:.3e}): "
        f"{small.rho_median:.4f} (window [{lo}, {hi}]): {'ok' if small_ok else 'FAIL'}"
    )
    lines.append(
        f"pooled median rho at largest retained bin (delta~{large.delta_median:.3e}): "
        f"{large.rho_median:.4f} (< {thresholds.law3_large_bin_max}): "
        f"{'ok' if large_ok else 'FAIL'}"
    )
    lines.append(
        f"bins retained {len(pooled.bins)}, pairs binned {pooled.total_count}, "
        f"dropped {pooled.dropped_count} (count < {thresholds.min_bin_count})"
    )

    ok = dev_ok and small_ok and large_ok
    return LawReport("III", bool(ok), metrics, "\n".join(lines), thresholds.echo("III"))


# ---------------------------------------------------------------------------
# Check IV: bounded iteration counts
# ---------------------------------------------------------------------------


def verify_law4(outcomes: Iterable, thresholds: LawThresholds = DEFAULT_THRESHOLDS) -> LawReport:
    """Max iteration counts stay within the per-n reference bounds (+slack)
    and globally; medians and upper quantiles show no growth trend beyond
    the allowed slack per decade of n."""
    groups = _require(_traces(outcomes), thresholds.min_dims, thresholds.min_trials)
    metrics: dict[str, float] = {}
    lines: list[str] = []
    ok = True

    med: dict[int, float] = {}
    q95: dict[int, float] = {}
    global_max = 0
    for n, traces in groups.items():
        ts = [tr.t_conv_1e12 for tr in traces if tr.t_conv_1e12 is not None]
        unresolved = len(traces) - len(ts)
        if not ts:
            raise InsufficientDataError(f"no convergence times at n={n}")
        arr = np.asarray(ts, dtype=np.float64)
        med[n] = float(np.median(arr))
        q95[n] = float(np.quantile(arr, 0.95))
        t_max = int(arr.max())
        global_max = max(global_max, t_max)
        metrics[f"t_median_n{n}"] = med[n]
        metrics[f"t_q95_n{n}"] = q95[n]
        metrics[f"t_max_n{n}"] = float(t_max)
        metrics[f"t_unresolved_n{n}"] = float(unresolved)
        ref = thresholds.law4_reference_max.get(n)
        if ref is not None:
            bound = ref + thresholds.law4_max_slack
            line_ok = t_max <= bound and unresolved == 0
            ok &= line_ok
            lines.append(
                f"n={n}: T median={med[n]:.0f} q95={q95[n]:.0f} max={t_max} "
                f"(reference {ref}+{thresholds.law4_max_slack}): "
                f"{'ok' if line_ok else 'FAIL'}"
            )
        else:
            ok &= unresolved == 0
            lines.append(f"n={n}: T median={med[n]:.0f} q95={q95[n]:.0f} max={t_max}")

    metrics["t_global_max"] = float(global_max)
    ok &= global_max <= thresholds.law4_global_max
    lines.append(f"global max T = {global_max} (<= {thresholds.law4_global_max})")

    if len(med) >= 2:
        logn = [math.log10(n) for n in med]
        med_slope = _lstsq_slope(logn, list(med.values()))
        q95_slope = _lstsq_slope(logn, list(q95.values()))
        metrics["t_median_trend_per_decade"] = med_slope
        metrics["t_q95_trend_per_decade"] = q95_slope
        metrics["t_median_range"] = max(med.values()) - min(med.values())
        metrics["t_q95_range"] = max(q95.values()) - min(q95.values())
        trend_ok = (
            med_slope <= thresholds.law4_trend_slack
            and q95_slope <= thresholds.law4_trend_slack
        )
        ok &= trend_ok
        lines.append(
            f"fitted growth per decade of n: median {med_slope:.3f}, q95 {q95_slope:.3f} "
            f"(<= {thresholds.law4_trend_slack}): {'ok' if trend_ok else 'FAIL'}; "
            f"raw ranges: median {metrics['t_median_range']:.1f}, "
            f"q95 {metrics['t_q95_range']:.1f}"
        )

    return LawReport("IV", bool(ok), metrics, "\n".join(lines), thresholds.echo("IV"))
