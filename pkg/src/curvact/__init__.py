"""Curvature-tunable activations, exact loss-Hessian diagonals for small
fully-connected nets, ell-infinity attacks, and sweep tooling that ties
activation curvature to adversarial robustness and sharpness."""

from .activations import (
    ActivationSpec,
    CurvatureProfile,
    SubgradientWarning,
    alpha_for_curvature,
    d1,
    d2,
    elu,
    gelu,
    leaky_relu,
    max_abs_d2,
    mish,
    rct_af,
    relu,
    softplus,
    swish,
    value,
)
from .attacks import (
    AttackConfig,
    adversarial_loss,
    clean_accuracy,
    fgsm,
    pgd,
    pgd_batch,
    robust_accuracy,
)
from .data import Dataset, GeneratorSpec, circles, gaussian_blobs, make_dataset, two_moons
from .errors import (
    CapacityError,
    CurvactError,
    ResultsFormatError,
    SingularityError,
    TrainingDivergedError,
    UnsupportedActivationError,
)
from .hessian import (
    HessianDiagReport,
    dataset_diag_norm,
    hessian_diag_exact,
    hessian_diag_fd,
    hessian_diag_paths,
    normalized_diag_norm,
    write_report_csv,
)
from .network import (
    Network,
    backprop_deltas,
    flat_params,
    forward,
    forward_batch,
    grad_input,
    grad_params,
    init_network,
    load_network,
    loss,
    mean_loss,
    replace_params,
    save_network,
)
from .svg import ChartSpec, Series, render_chart, write_chart
from .training import (
    SweepConfig,
    SweepResult,
    TrainConfig,
    TrainingHistory,
    default_sweep_config,
    read_sweep_results,
    run_sweep,
    train_network,
)

__version__ = "0.1.0"

__all__ = [
    "ActivationSpec",
    "AttackConfig",
    "CapacityError",
    "ChartSpec",
    "CurvactError",
    "CurvatureProfile",
    "Dataset",
    "GeneratorSpec",
    "HessianDiagReport",
    "Network",
    "ResultsFormatError",
    "Series",
    "SingularityError",
    "SubgradientWarning",
    "SweepConfig",
    "SweepResult",
    "TrainConfig",
    "TrainingDivergedError",
    "TrainingHistory",
    "UnsupportedActivationError",
    "adversarial_loss",
    "alpha_for_curvature",
    "backprop_deltas",
    "circles",
    "clean_accuracy",
    "d1",
    "d2",
    "dataset_diag_norm",
    "default_sweep_config",
    "elu",
    "fgsm",
    "flat_params",
    "forward",
    "forward_batch",
    "gaussian_blobs",
    "gelu",
    "grad_input",
    "grad_params",
    "hessian_diag_exact",
    "hessian_diag_fd",
    "hessian_diag_paths",
    "init_network",
    "leaky_relu",
    "load_network",
    "loss",
    "make_dataset",
    "max_abs_d2",
    "mean_loss",
    "mish",
    "normalized_diag_norm",
    "pgd",
    "pgd_batch",
    "rct_af",
    "read_sweep_results",
    "relu",
    "render_chart",
    "replace_params",
    "robust_accuracy",
    "run_sweep",
    "save_network",
    "softplus",
    "swish",
    "train_network",
    "two_moons",
    "value",
    "write_chart",
    "write_report_csv",
]
