"""sesid: identification of self-excited systems from input/output records.

Fits discrete-time, time-delayed Lur'e models with continuous piecewise-linear
feedback by two-stage linear least squares, and ships the discrete- and
continuous-time truth-system simulators and spectral validation tools needed
to generate and check data.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND as kernel_backend  # noqa: F401
from .analysis import (  # noqa: F401
    PsdEstimate,
    add_noise,
    dominant_frequency,
    frequency_response,
    phase_portrait,
    psd,
)
from .cpl import (  # noqa: F401
    CplFunction,
    eta,
    eta_many,
    evaluate,
    evaluate_many,
    interval_index,
    sample_from_function,
)
from .ctsim import (  # noqa: F401
    CttdlSystem,
    OdeSystem,
    Trajectory,
    integrate_dde,
    integrate_ode,
    lotka_volterra,
    piecewise_constant_input,
    sample,
    van_der_pol,
    washout_realization,
)
from .estimator import (  # noqa: F401
    DegenerateFit,
    IdentifiedModel,
    RegressionProblem,
    ThetaTilde,
    build_regression,
    finalize_constant,
    finalize_general,
    identify,
    prop1_minimizer,
    solve_theta_tilde,
)
from .lure import (  # noqa: F401
    DttdlModel,
    SignalRecord,
    SimulationDiverged,
    init_constant,
    init_gaussian,
    scale_equivalence_check,
    simulate,
)
