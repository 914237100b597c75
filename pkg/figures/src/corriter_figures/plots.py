"""Figure builders: one function per kind, each returning a Figure.

All statistics come from the CSV files; nothing is recomputed here beyond
grouping rows.  Style is fixed so rendering is deterministic.
"""

from __future__ import annotations

import math
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .csvio import CurveBand, TraceStep, dims_of

_CYCLE = plt.cm.viridis


def _colors(count: int):
    if count == 1:
        return [_CYCLE(0.3)]
    return [_CYCLE(0.15 + 0.7 * i / (count - 1)) for i in range(count)]


def _panel_grid(num: int):
    cols = min(3, num)
    rows = math.ceil(num / cols)
    fig, axes = plt.subplots(
        rows, cols, figsize=(4.2 * cols, 3.2 * rows), squeeze=False, layout="constrained"
    )
    flat = [ax for row in axes for ax in row]
    for ax in flat[num:]:
        ax.set_visible(False)
    return fig, flat[:num]


def _by_trial(steps: list[TraceStep], n: int) -> dict[int, list[TraceStep]]:
    trials: dict[int, list[TraceStep]] = defaultdict(list)
    for s in steps:
        if s.n == n:
            trials[s.trial_id].append(s)
    return {t: sorted(v, key=lambda s: s.k) for t, v in sorted(trials.items())}


def decay_figure(steps: list[TraceStep], log_x=False, log_y=True):
    """Per-dimension step-size decay: thin per-trial curves plus the mean
    over trials still active at each iteration."""
    dims = dims_of(steps)
    fig, axes = _panel_grid(len(dims))
    for ax, n, color in zip(axes, dims, _colors(len(dims))):
        trials = _by_trial(steps, n)
        sums: dict[int, float] = defaultdict(float)
        counts: dict[int, int] = defaultdict(int)
        for rec in trials.values():
            ks = [s.k for s in rec]
            ds = [s.delta for s in rec]
            ax.plot(ks, ds, color=color, alpha=0.12, linewidth=0.6)
            for k, d in zip(ks, ds):
                sums[k] += d
                counts[k] += 1
        ks = sorted(sums)
        ax.plot(ks, [sums[k] / counts[k] for k in ks], color="black", linewidth=1.6,
                label="mean over active trials")
        if log_y:
            ax.set_yscale("log")
        if log_x:
            ax.set_xscale("log")
        ax.set_title(f"n = {n}")
        ax.set_xlabel("iteration k")
        ax.set_ylabel("step size")
        ax.legend(loc="upper right", fontsize=7)
    return fig


def scatter_figure(steps: list[TraceStep], log_x=True, log_y=False):
    """Step ratio against step size, one point per iterate with k >= 1."""
    dims = dims_of(steps)
    fig, axes = _panel_grid(len(dims))
    for ax, n, color in zip(axes, dims, _colors(len(dims))):
        xs = [s.delta for s in steps if s.n == n and s.k >= 1 and s.rho is not None]
        ys = [s.rho for s in steps if s.n == n and s.k >= 1 and s.rho is not None]
        ax.scatter(xs, ys, s=4, color=color, alpha=0.35, linewidths=0)
        ax.axhline(1.0, color="gray", linestyle="--", linewidth=0.8)
        if log_x:
            ax.set_xscale("log")
        if log_y:
            ax.set_yscale("log")
        ax.set_title(f"n = {n}")
        ax.set_xlabel("step size")
        ax.set_ylabel("step ratio")
    return fig


def ribbon_figure(bands: list[CurveBand], log_x=True, log_y=False):
    """Binned median step ratio with a 10th-90th percentile ribbon; one
    curve per scope, the pooled scope drawn on top."""
    scopes = sorted({b.scope for b in bands}, key=lambda s: (s == "pooled", s))
    fig, ax = plt.subplots(figsize=(6.4, 4.2), layout="constrained")
    colors = _colors(len(scopes))
    for scope, color in zip(scopes, colors):
        rows = sorted((b for b in bands if b.scope == scope), key=lambda b: b.delta_median)
        x = [b.delta_median for b in rows]
        med = [b.rho_median for b in rows]
        lo = [b.rho_p10 for b in rows]
        hi = [b.rho_p90 for b in rows]
        pooled = scope == "pooled"
        ax.fill_between(x, lo, hi, color="black" if pooled else color, alpha=0.15,
                        linewidth=0)
        ax.plot(x, med, color="black" if pooled else color,
                linewidth=2.0 if pooled else 1.2, label=scope)
    ax.axhline(1.0, color="gray", linestyle="--", linewidth=0.8)
    if log_x:
        ax.set_xscale("log")
    if log_y:
        ax.set_yscale("log")
    ax.set_xlabel("binned step size (median)")
    ax.set_ylabel("step ratio (median, 10-90% band)")
    ax.legend(fontsize=7)
    return fig


def _whisker_box(ax, groups: dict[int, list[float]], ylabel: str):
    dims = sorted(groups)
    ax.boxplot(
        [groups[n] for n in dims],
        tick_labels=[str(n) for n in dims],
        whis=(5, 95),
        showfliers=True,
        flierprops={"marker": ".", "markersize": 3, "alpha": 0.5},
    )
    ax.set_xlabel("matrix order n")
    ax.set_ylabel(ylabel)


def boxplot_rho_figure(steps: list[TraceStep], log_x=False, log_y=False):
    """Per-dimension distribution of all step ratios (5-95% whiskers)."""
    groups: dict[int, list[float]] = defaultdict(list)
    for s in steps:
        if s.rho is not None:
            groups[s.n].append(s.rho)
    fig, ax = plt.subplots(figsize=(6.4, 4.2), layout="constrained")
    _whisker_box(ax, groups, "step ratio")
    ax.axhline(1.0, color="gray", linestyle="--", linewidth=0.8)
    if log_y:
        ax.set_yscale("log")
    return fig


def _per_trial_scalar(steps: list[TraceStep], attr: str) -> dict[int, list[float]]:
    seen: dict[tuple[int, int], float] = {}
    for s in steps:
        value = getattr(s, attr)
        if value is not None:
            seen[(s.n, s.trial_id)] = float(value)
    groups: dict[int, list[float]] = defaultdict(list)
    for (n, _), value in sorted(seen.items()):
        groups[n].append(value)
    return groups


def boxplot_vtot_figure(steps: list[TraceStep], log_x=False, log_y=True):
    """Per-dimension total variation over trials."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2), layout="constrained")
    _whisker_box(ax, _per_trial_scalar(steps, "v_total"), "total variation")
    if log_y:
        ax.set_yscale("log")
    return fig


def boxplot_iters_figure(steps: list[TraceStep], log_x=False, log_y=False):
    """Per-dimension convergence-time distribution (1e-12 tolerance)."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2), layout="constrained")
    _whisker_box(ax, _per_trial_scalar(steps, "t_conv_1e12"), "iterations to 1e-12")
    if log_y:
        ax.set_yscale("log")
    return fig


def mean_sigma_figure(steps: list[TraceStep], log_x=True, log_y=False):
    """Mean iteration count with +-1 sd error bars, by dimension."""
    groups = _per_trial_scalar(steps, "t_conv_1e12")
    dims = sorted(groups)
    means = [float(np.mean(groups[n])) for n in dims]
    sds = [float(np.std(groups[n], ddof=1)) if len(groups[n]) > 1 else 0.0 for n in dims]
    fig, ax = plt.subplots(figsize=(6.4, 4.2), layout="constrained")
    ax.errorbar(dims, means, yerr=sds, marker="o", capsize=3, color=_CYCLE(0.4))
    if log_x:
        ax.set_xscale("log")
    if log_y:
        ax.set_yscale("log")
    ax.set_xlabel("matrix order n")
    ax.set_ylabel("iterations to 1e-12 (mean ± sd)")
    return fig


def ecdf_figure(steps: list[TraceStep], log_x=False, log_y=False):
    """Empirical distribution of convergence times, one curve per n."""
    groups = _per_trial_scalar(steps, "t_conv_1e12")
    dims = sorted(groups)
    fig, ax = plt.subplots(figsize=(6.4, 4.2), layout="constrained")
    for n, color in zip(dims, _colors(len(dims))):
        data = sorted(groups[n])
        xs = [0.0] + data
        ys = [0.0] + [(i + 1) / len(data) for i in range(len(data))]
        ax.step(xs, ys, where="post", color=color, label=f"n = {n}")
    ax.axhline(0.9, color="gray", linestyle="--", linewidth=0.8)
    if log_x:
        ax.set_xscale("log")
    if log_y:
        ax.set_yscale("log")
    ax.set_xlabel("iterations k")
    ax.set_ylabel("fraction of trials converged by k")
    ax.legend(fontsize=7)
    return fig


def first_step_median_figure(steps: list[TraceStep], log_x=True, log_y=False):
    """Median first-step ratio against dimension with an IQR band."""
    by_trial: dict[tuple[int, int], float] = {}
    for s in steps:
        if s.k == 0 and s.rho is not None:
            by_trial[(s.n, s.trial_id)] = s.rho
    groups: dict[int, list[float]] = defaultdict(list)
    for (n, _), rho in sorted(by_trial.items()):
        groups[n].append(rho)
    dims = sorted(groups)
    med = [float(np.median(groups[n])) for n in dims]
    q25 = [float(np.quantile(groups[n], 0.25)) for n in dims]
    q75 = [float(np.quantile(groups[n], 0.75)) for n in dims]
    fig, ax = plt.subplots(figsize=(6.4, 4.2), layout="constrained")
    ax.fill_between(dims, q25, q75, color=_CYCLE(0.4), alpha=0.2, linewidth=0,
                    label="interquartile range")
    ax.plot(dims, med, marker="o", color=_CYCLE(0.4), label="median first-step ratio")
    if log_x:
        ax.set_xscale("log")
    if log_y:
        ax.set_yscale("log")
    ax.set_xlabel("matrix order n")
    ax.set_ylabel("first-step ratio")
    ax.legend(fontsize=7)
    return fig
