"""Accelerated stochastic cubic-regularized Newton and tensor methods.

Certified-subproblem second/third-order optimizers for convex problems with
stochastic or inexact derivatives, a restarted strongly-convex variant, an SGD
baseline, and a CLI benchmark harness.
"""

from . import harness
from .ascn import RunResult, Schedule2, run, schedule_at
from .errors import (
    ConfigError,
    CubicNewtonError,
    Degenerate,
    DimensionMismatch,
    EmptyDataset,
    MonotonicityViolation,
    NoConvergence,
    NonAscendingIndex,
    NonFinite,
    ParseError,
    SizeExceeded,
    UnsupportedOrder,
    ZeroDirection,
)
from .estimating import EstimatorState
from .oracles import (
    AdditiveNoiseOracle,
    BatchSpec,
    ExactOracle,
    MinibatchOracle,
    NoiseSpec,
    OracleOutput,
    delta2_along,
)
from .problems import (
    LogisticProblem,
    QuadraticProblem,
    SmoothnessConstants,
    constants,
    evaluate,
    make_random_quadratic,
    make_synthetic_logistic,
    reference_minimum,
)
from .restarts import EpochRecord, RestartPlan, epoch_length, run_restarted
from .sgd import SgdConfig, run_sgd
from .subsolver import SubsolveResult, solve_cubic, solve_tensor
from .taylor_model import CubicModel, TensorModel, model_grad, model_value
from .tensor import ScheduleP, run_tensor, schedule_p_at

__version__ = "0.1.0"
