from .checkpoint import (load_network, load_networks, resolve_checkpoint_dir,
                         save_checkpoint, save_network, write_best_pointer)
from .compute import ComputeReport, compute_report, flop_estimate, measure_throughput
from .logio import BASE_COLUMNS, CYCLE_COLUMNS, TrainLogWriter
from .trainer import (TrainerConfig, TrainState, average_gradients, init_state,
                      load_checkpoint, should_stop, train, train_step)

__all__ = [
    "BASE_COLUMNS", "CYCLE_COLUMNS", "ComputeReport", "TrainLogWriter",
    "TrainState", "TrainerConfig", "average_gradients", "compute_report",
    "flop_estimate", "init_state", "load_checkpoint", "load_network",
    "load_networks", "measure_throughput", "resolve_checkpoint_dir", "save_checkpoint",
    "save_network", "should_stop", "train", "train_step", "write_best_pointer",
]
