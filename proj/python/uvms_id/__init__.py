"""Online identification of underwater vehicle-manipulator dynamics."""

from ._uvms_id import (
    ConfigError,
    DataError,
    Estimator,
    EstimatorConfig,
    Model,
    State,
    StateError,
    channel_names,
    confidence_interval,
    feasibility_report,
    forward_dynamics,
    inverse_dynamics,
    metrics,
    parameter_names,
    perturb_parameters,
    reference_model,
    regressor,
    simulate,
)


def state_at(data, k):
    """State of record k of a dict returned by simulate()."""
    return State(
        data["eta"][k], data["nu"][k], data["nu_dot"][k],
        data["mu"][k], data["mu_dot"][k], data["mu_ddot"][k],
    )


__all__ = [name for name in dir() if not name.startswith("_")]
