"""Whitney, quasihyperbolic and Poincare analyses of planar domains."""

import json as _json

from ._core import (
    Domain,
    InvariantError,
    PreconditionError,
    WhitneyDecomposition,
    __version__,
    beta_version,
    box_count_dimension,
    disk_minus_fractal,
    fractal_box_count,
    l_shape,
    neumann_q_solvable,
    poincare_predicate,
    qhbc_fit,
    read_domain,
    threshold_p0,
    unit_square,
    whitney_decompose,
)
from ._core import run_pipeline as _run_pipeline


def run_pipeline(config, out):
    """Run every enabled stage into `out`; returns the summary as a dict."""
    return _json.loads(_run_pipeline({k: str(v).lower() if isinstance(v, bool) else str(v)
                                      for k, v in config.items()}, str(out)))


__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
