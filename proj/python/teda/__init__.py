"""Pipelined action-chunking inference: scheduler, simulator and int16
tensor compression. The heavy lifting lives in the _teda extension."""

from _teda import (  # noqa: F401
    DerivedSchedule,
    InfeasibleScheduleError,
    Mode,
    Policy,
    QuantizedTensor,
    SchedulerConfig,
    Tensor,
    TimingModel,
    accuracy_ratio,
    callable_policy,
    compare,
    dequantize,
    derive_schedule,
    ensemble_weights,
    oracle_trajectory,
    quantize,
    read_tensor_file,
    run_episode,
    scripted_sine_policy,
    simulate,
    unify_shape,
    weighted_apply,
    write_quantized_file,
    write_tensor_file,
)

__all__ = [
    "DerivedSchedule",
    "InfeasibleScheduleError",
    "Mode",
    "Policy",
    "QuantizedTensor",
    "SchedulerConfig",
    "Tensor",
    "TimingModel",
    "accuracy_ratio",
    "callable_policy",
    "compare",
    "dequantize",
    "derive_schedule",
    "ensemble_weights",
    "oracle_trajectory",
    "quantize",
    "read_tensor_file",
    "run_episode",
    "scripted_sine_policy",
    "simulate",
    "unify_shape",
    "weighted_apply",
    "write_quantized_file",
    "write_tensor_file",
]
