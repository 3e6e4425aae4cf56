"""spatcast: signal phase and timing prediction engine.

Fits empirical phase-duration distributions from dual-ring controller logs
(real or simulated), predicts residual phase times under several loss
functions, evaluates prediction error versus elapsed time, and streams
broadcastable SPaT messages as NDJSON.
"""

from .cycles import (
    DEFAULT_TOLERANCE_S,
    DURATION_KEY,
    PHASE_RING,
    PHASES,
    RING_SEQUENCE,
    CycleRecord,
    CycleTable,
    PhaseEvent,
    day_number,
    ingest_events,
    read_cycle_csv,
    read_event_csv,
    stratify,
    window,
    write_cycle_csv,
    write_event_csv,
)
from .distributions import EmpiricalDist, JointSamples, fit, fit_joint
from .errors import (
    BarrierViolation,
    EmptyCondition,
    EmptyGrid,
    EmptyInput,
    EmptyStratum,
    InfeasiblePlan,
    MixedStrata,
    NonpositiveWeight,
    OutOfOrderEvent,
    RingSequenceViolation,
    SinkClosed,
    SpatError,
)
from .evaluate import (
    ErrorCurve,
    compare,
    loss_curve,
    mae_curve,
    mse_curve,
    write_comparison_csv,
    write_distribution_csv,
    write_plot_data,
)
from .messages import SpatMessage, compose, fit_message_dists, stream
from .predict import (
    DEFAULT_HOLD_S,
    AsymmetricLoss,
    Confidence,
    Expectation,
    Prediction,
    ScheduleEntry,
    next_green_start,
    predict,
    predict_asymmetric,
    predict_confidence,
    predict_expectation,
    predict_schedule,
    predict_sum_joint,
    predict_sum_marginal,
)
from .simulate import (
    DemandProfile,
    SimulationConfig,
    TimingPlan,
    emit_events,
    format_config,
    load_config,
    parse_config,
    peaked_demand,
    ring1_durations,
    simulate,
)

__version__ = "0.1.0"
