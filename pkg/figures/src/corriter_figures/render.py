"""Figure specs and rendering: pure functions of the input CSVs.

Every kind reads exactly the files it declares, builds one figure, and
writes one image with fixed style, DPI, and metadata, so re-rendering
unchanged inputs yields identical raster content.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from . import plots
from .csvio import read_curves, read_traces
from .errors import FiguresError

# kind -> (builder, input file, default log_x, default log_y)
_KINDS = {
    "decay": (plots.decay_figure, "traces.csv", False, True),
    "scatter": (plots.scatter_figure, "traces.csv", True, False),
    "ribbon": (plots.ribbon_figure, "curves.csv", True, False),
    "boxplot_rho": (plots.boxplot_rho_figure, "traces.csv", False, False),
    "boxplot_vtot": (plots.boxplot_vtot_figure, "traces.csv", False, True),
    "boxplot_iters": (plots.boxplot_iters_figure, "traces.csv", False, False),
    "mean_sigma": (plots.mean_sigma_figure, "traces.csv", True, False),
    "ecdf": (plots.ecdf_figure, "traces.csv", False, False),
    "first_step_median": (plots.first_step_median_figure, "traces.csv", True, False),
}

KINDS = tuple(_KINDS)

_DPI = 120
_METADATA = {"Software": "corriter-figures"}


@dataclass(frozen=True)
class FigureSpec:
    """What to draw, from which inputs, to which file."""

    kind: str
    results_dir: Path
    output: Path
    log_x: bool | None = None  # None: the kind's default
    log_y: bool | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise FiguresError(f"unknown figure kind {self.kind!r}; choose from {KINDS}")


def default_spec(kind: str, results_dir: str | Path, out_dir: str | Path) -> FigureSpec:
    return FigureSpec(
        kind=kind,
        results_dir=Path(results_dir),
        output=Path(out_dir) / f"{kind}.png",
    )


def build_figure(spec: FigureSpec):
    """Load the spec's inputs and return the built Figure (not yet saved)."""
    builder, input_name, def_log_x, def_log_y = _KINDS[spec.kind]
    path = spec.results_dir / input_name
    data = read_curves(path) if input_name == "curves.csv" else read_traces(path)
    log_x = def_log_x if spec.log_x is None else spec.log_x
    log_y = def_log_y if spec.log_y is None else spec.log_y
    return builder(data, log_x=log_x, log_y=log_y)


def render(spec: FigureSpec) -> Path:
    """Render one figure; nothing is written if the inputs are rejected."""
    fig = build_figure(spec)
    try:
        spec.output.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(spec.output, dpi=_DPI, metadata=_METADATA)
    finally:
        plt.close(fig)
    return spec.output


def render_all(
    results_dir: str | Path,
    out_dir: str | Path,
    kinds: tuple[str, ...] | None = None,
) -> tuple[dict[str, Path], dict[str, str]]:
    """Render every requested kind; one failure does not stop the rest.

    Returns (rendered paths by kind, error messages by kind).
    """
    rendered: dict[str, Path] = {}
    errors: dict[str, str] = {}
    for kind in kinds or KINDS:
        spec = default_spec(kind, results_dir, out_dir)
        try:
            rendered[kind] = render(spec)
        except FiguresError as exc:
            errors[kind] = f"{type(exc).__name__}: {exc}"
    return rendered, errors
