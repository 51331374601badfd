"""Batch streaming over a dataset manifest.

An epoch visits every sample of the split exactly once in a
shuffled order; the order is reshuffled between epochs.  All
randomness flows through one generator so runs are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError, ValidationError


@dataclass
class Batch:
    sar: np.ndarray        # (N, H, W, C_s) float32 in [-1, 1]
    optical: np.ndarray    # (N, H, W, 3)
    patch_ids: list


def load_pair(manifest, entry):
    sar = np.load(manifest.resolve(entry.sar_path))
    opt = np.load(manifest.resolve(entry.opt_path))
    for name, arr in (("sar", sar), ("optical", opt)):
        if arr.ndim != 3:
            raise DataError(f"{name} patch {entry.patch_id} is not HxWxC")
    return sar.astype(np.float32, copy=False), opt.astype(np.float32, copy=False)


def iter_epoch(manifest, split, batch_size, rng, drop_last=False):
    """Yield Batches covering the split exactly once."""
    entries = manifest.split_entries(split)
    if not entries:
        raise ValidationError(f"split {split!r} is empty")
    if batch_size < 1:
        raise ValidationError("batch_size must be >= 1")
    order = rng.permutation(len(entries))
    for start in range(0, len(entries), batch_size):
        chunk = order[start:start + batch_size]
        if drop_last and len(chunk) < batch_size:
            return
        pairs = [load_pair(manifest, entries[i]) for i in chunk]
        yield Batch(
            sar=np.stack([p[0] for p in pairs]),
            optical=np.stack([p[1] for p in pairs]),
            patch_ids=[entries[i].patch_id for i in chunk])


def batches(manifest, split, batch_size, seed=0, max_epochs=None, drop_last=False):
    """Epoch-reshuffled stream; yields (epoch_index, Batch)."""
    rng = np.random.default_rng(seed)
    epoch = 0
    while max_epochs is None or epoch < max_epochs:
        for batch in iter_epoch(manifest, split, batch_size, rng, drop_last):
            yield epoch, batch
        epoch += 1
