"""Sharp concentration bounds for martingales and functions of independent inputs."""

from .dists import (
    BinomSum,
    CenteredPoisson,
    Dist,
    DistError,
    DivergentMoment,
    Empirical,
    Gaussian,
    Lattice,
    MGFDiverges,
    ParseError,
    TwoPoint,
    UnsupportedOrder,
    Weibull,
    convolve_iid,
    parse_dist,
)
from .optim import BadBracket, MinimizeResult, NoDescent, find_root_monotone, minimize_convex
from .bounds import (
    AZUMA5_CAP,
    BadTail,
    BoundResult,
    CrossCheckError,
    EmptyInput,
    MajorantFn,
    OPTIMALITY_CAP,
    XNotInSupport,
    azuma_bentkus5,
    bentkus,
    chernoff,
    fan_chernoff,
    freedman_bentkus_binom,
    freedman_bentkus_poisson,
    fuk_nagaev_threshold,
    log_concave_majorant,
    optimality_factor_check,
    poisson_majorant_bound,
    q_alpha,
    winsorized_freedman,
)

__version__ = "0.1.0"
