"""disclab: exact discrepancy-function analysis of binary digital nets.

Constructs digital (t, n, d)-nets of order sigma over F2, evaluates the
discrepancy function and its exact dyadic Haar expansion, and computes
or bounds L_p, BMO, and exponential-Orlicz norms at desk scale.
"""

from .dyadic import (
    DyadicBox,
    DyadicIndex,
    DyadicRational,
    box_of,
    enumerate_shapes,
    haar_eval,
)
from .errors import DomainError, ParseError, ResourceLimitError
from .gf2net import (
    DigitalNetSpec,
    F2Matrix,
    PointSet,
    box_point_counts,
    digital_points,
    interlace,
    minimal_t,
    read_matrices,
    read_point_set,
    verify_net_order,
    write_matrices,
    write_point_set,
)

__version__ = "0.1.0"
