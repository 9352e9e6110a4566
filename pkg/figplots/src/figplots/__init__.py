"""Figure regeneration from kerrcomb's emitted CSV/JSON files."""

__version__ = "0.1.0"

from .io import EmptyInputError, MissingColumnError, TimeSeries, load_timeseries, load_wigner
from .render import PLOT_KINDS, PlotJob, render
