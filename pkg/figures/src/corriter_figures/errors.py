"""Errors raised by the figure layer."""


class FiguresError(Exception):
    """Base class."""


class SchemaMismatchError(FiguresError, ValueError):
    """A CSV input has unknown columns, no rows, or a broken layout."""


class MissingColumnError(FiguresError, ValueError):
    """A CSV input lacks a column this figure kind requires."""


class MissingInputError(FiguresError, FileNotFoundError):
    """A required input file is absent."""
