"""urywidth: numerical certification toolkit for Urysohn-width constructions.

Modules mirror the pipeline: ``complexes`` (simplicial machinery),
``width`` (widths of maps and covers), ``localjoin`` (colored triangulations
of R^n and the join map), ``foliation`` (graph-valued foliations and their
interpolation), ``waist`` (inductive skeletal construction and constants),
``bundlemetric`` (the perturbed-projection bundle metric), ``instances``
(demo surfaces), ``cli`` (driver).

Hot kernels run under numba by default; set URYWIDTH_DISABLE_NUMBA=1 for
the pure-numpy path (benchmarks/bench_kernels.py compares both).
"""

__version__ = "0.1.0"

from . import bundlemetric, complexes, foliation, instances, localjoin, waist, width  # noqa: F401,E402
