"""Figure renderer for the phonon-contrast CSV outputs (presentation only)."""

from .render import render
from .spec import FigureSpec, SchemaError, spec_from_json

__version__ = "0.1.0"
