"""Interactive-score engine.

Compiles temporal scenarios to timed concurrent-constraint (ntcc) processes,
executes them one discrete time unit at a time, and model-checks bounded
temporal properties against all allowed environments.
"""

__version__ = "0.1.0"

from .store import (  # noqa: F401
    And,
    Atom,
    Constraint,
    FALSE,
    LinExpr,
    Or,
    Store,
    TRUE,
    VarDecl,
    negate,
    parse_constraint,
    var,
)
