"""Static figure rendering for edgemem analysis tables.

Consumes only the CSV files written by ``edgemem analyze``; the simulation
package is never imported.
"""

__version__ = "0.1.0"

from edgemem_plots.render import FigureSpec, render
