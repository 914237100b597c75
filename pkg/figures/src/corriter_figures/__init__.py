"""corriter-figures: plots from corriter CSV results, nothing recomputed."""

__version__ = "0.1.0"

from .csvio import read_curves, read_summary, read_traces  # noqa: F401
from .errors import (  # noqa: F401
    FiguresError,
    MissingColumnError,
    MissingInputError,
    SchemaMismatchError,
)
from .render import KINDS, FigureSpec, build_figure, default_spec, render, render_all  # noqa: F401
