"""Multi-type TASEP: queueing construction, exact stationary laws and checks."""

from .core import (
    HOLE,
    BoundaryError,
    Counts,
    InfeasibleError,
    MtasepError,
    ResourceError,
    RingConfig,
    ShapeError,
    WindowConfig,
    class_counts,
    config_from_json,
    config_to_json,
    swap_adjacent,
)
from .exact import (
    WeightedDistribution,
    common_denominator,
    is_minimal_state,
    reflect_reverse,
    stationary_weights,
    tv_distance,
    verify_balance,
    verify_minimal_weights,
)
from .multiline import (
    MultiLineConfig,
    MultiTypeConfig,
    assign_classes_ring,
    assign_classes_window,
    bell_cascade,
    commutation_check,
    forward_jump,
    forward_map,
    reverse_cascade,
    reverse_jump,
    reverse_map,
)
from .queueing import (
    QueueState,
    collapse_ring,
    departure_ring,
    departure_ring_recurrence,
    departure_window,
    queue_lengths_ring,
    queue_lengths_window,
    service_process,
    step_queue,
    strip_unused_services,
)
from .simulate import (
    EmpiricalDistribution,
    Trace,
    gillespie_multiline,
    gillespie_tasep,
    make_rng,
    sample_stationary_ring,
    sample_stationary_window,
)

__version__ = "0.1.0"
