"""Shallow ReLU networks for horizon classifiers: boundary-regularity norm
estimation, constructive approximation by neuron subsampling, and a
sample-complexity experiment harness."""

from .geometry import (
    EmptySliceError,
    ball_volume,
    lift_to_sphere,
    lift_weight,
    orthonormal_frame,
    sample_hyperplane_slice,
    sample_unit_ball,
    sample_unit_sphere,
    sphere_area,
    unlift_from_sphere,
)
from .radon import (
    NORM_KINDS,
    BoundaryFunction,
    DegenerateNormError,
    NormEstimationSettings,
    RadonGrid,
    barron_norm_proxy,
    boundary_norm,
    normalize_boundary,
    radon_transform,
    ramp_filter,
    rbv2_norm,
    rtv2_estimate,
    scaled_boundary,
    second_differences,
    sup_norms,
    tv2_1d,
)
from .networks import (
    ArchitectureBudget,
    LayeredNet,
    NetworkAudit,
    ShallowNet,
    audit_network,
    compose_horizon_net,
    default_transition_width,
    eval_layered,
    eval_shallow,
    heaviside_surrogate,
    net_from_json,
    net_to_json,
    relu,
    shallow_to_layered,
    size_architecture,
)
from .approx import (
    DiscreteRadonMeasure,
    IntegralRepFunction,
    TubeQuery,
    audit_rep_bounds,
    change_of_variables_check,
    disagreement_measure,
    fit_rate,
    jordan_split,
    random_atomic_measure,
    rep_norm_bound,
    subsample_to_shallow,
    sup_error,
    tube_mass,
)
from .training import (
    AdamState,
    HorizonErmClassifier,
    LabeledSample,
    TrainReport,
    TrainingSettings,
    adam_step,
    clamp01,
    clamped_output,
    hinge_empirical_risk,
    hinge_gradient,
    init_adam,
    project_weights,
    train_erm,
    zero_one_risk,
)
from .config import (
    ApproxRateSettings,
    ConfigError,
    ExperimentConfig,
    HorizonApproxSettings,
    as_dict,
    validate_config,
    write_resolved_config,
)
from .bench import (
    CellFailure,
    CellResult,
    ExperimentResult,
    HorizonClassifier,
    base_family,
    label_points,
    make_dataset,
    run_cell,
    run_experiment,
    slab_sampler,
    split_train_test,
    stable_seed,
    train_cell,
)

__version__ = "0.1.0"
