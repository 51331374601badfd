"""Line-delimited training log.

Base columns: ``step,d_loss_opt,d_loss_sar,gan_loss,l1_loss,total_t_loss``.
Cycle refinement appends ``cycle_loss_sar,cycle_loss_opt``.  Epoch
summaries are comment lines so the numeric body stays parseable.
"""

from __future__ import annotations

from pathlib import Path

BASE_COLUMNS = ("step", "d_loss_opt", "d_loss_sar", "gan_loss",
                "l1_loss", "total_t_loss")
CYCLE_COLUMNS = BASE_COLUMNS + ("cycle_loss_sar", "cycle_loss_opt")


class TrainLogWriter:
    def __init__(self, path, columns=BASE_COLUMNS):
        self.path = Path(path)
        self.columns = columns
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "w")
        self._fh.write(",".join(columns) + "\n")

    def step(self, step, bundle, extra=()):
        fields = [str(step)] + [f"{v:.6g}" for v in bundle.values()]
        fields += [f"{v:.6g}" for v in extra]
        self._fh.write(",".join(fields) + "\n")
        self._fh.flush()

    def epoch_summary(self, epoch, mean_total, note=""):
        suffix = f" {note}" if note else ""
        self._fh.write(f"# epoch {epoch} mean_total_t_loss={mean_total:.6g}{suffix}\n")
        self._fh.flush()

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
