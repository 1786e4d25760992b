"""Figure scripts for cascade-qsd CSV outputs.

This package is deliberately decoupled from the simulator: it consumes only
the documented CSV files (RESULT and long-format sweep schemas) and writes
static images, so either side can be developed or replaced independently.
"""

from cascade_qsd_plots.csvdata import CsvTable, read_table
from cascade_qsd_plots.figures import PlotSpec, plot_heatmap, plot_lines

__version__ = "0.1.0"

__all__ = ["CsvTable", "PlotSpec", "plot_heatmap", "plot_lines", "read_table"]
