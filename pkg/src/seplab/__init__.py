"""seplab: separability-probability laboratory for bipartite density matrices.

Exact rational analytics, numerical quadrature and (quasi-)Monte Carlo
sampling of random density matrices, built so that each pipeline can check
the others.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    DimensionMismatch,
    DomainError,
    InvalidConfig,
    InvalidSpec,
    NonConvergence,
    NonHermitian,
    SeplabError,
    StreamExhausted,
    Unsupported,
)
