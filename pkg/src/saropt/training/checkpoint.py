"""Checkpoint persistence.

Each network is one ``.npz`` archive: parameters and buffers keyed by
their slash-separated module path, plus ``__config__`` (JSON of the
architecture config), ``__kind__`` and ``__version__`` fields.  A
training checkpoint directory holds the four network archives, the
optimiser archives, and ``trainstate.json`` with scalars and the
bit-exact RNG state:

    <ckpt_root>/epoch_<k>/translator_a.npz ... trainstate.json
    <ckpt_root>/BEST                # pointer record, e.g. "epoch_3"
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np

from ..errors import DataError
from ..models import (DiscriminatorConfig, PatchDiscriminator, Translator,
                      TranslatorConfig)

FORMAT_VERSION = "1"

NETWORK_FILES = {
    "translator_a": "translator_a.npz",
    "translator_b": "translator_b.npz",
    "discriminator_a": "discriminator_a.npz",
    "discriminator_b": "discriminator_b.npz",
}
OPTIMIZER_FILES = {
    "translators": "optimizer_translators.npz",
    "disc_a": "optimizer_disc_a.npz",
    "disc_b": "optimizer_disc_b.npz",
}
STATE_FILE = "trainstate.json"
BEST_POINTER = "BEST"


def save_network(path, net, kind):
    arrays = dict(net.state_dict())
    cfg = dataclasses.asdict(net.config)
    arrays["__config__"] = np.array(json.dumps(cfg))
    arrays["__kind__"] = np.array(kind)
    arrays["__version__"] = np.array(FORMAT_VERSION)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    np.savez(path, **arrays)


def load_network(path):
    path = Path(path)
    if not path.exists():
        raise DataError(f"network archive not found: {path}")
    with np.load(path, allow_pickle=False) as npz:
        arrays = {k: npz[k] for k in npz.files}
    kind = str(arrays.pop("__kind__"))
    str(arrays.pop("__version__"))
    cfg = json.loads(str(arrays.pop("__config__")))
    if kind == "translator":
        net = Translator(TranslatorConfig(**cfg))
    elif kind == "discriminator":
        cfg["channel_schedule"] = tuple(cfg["channel_schedule"])
        cfg["stride_schedule"] = tuple(cfg["stride_schedule"])
        net = PatchDiscriminator(DiscriminatorConfig(**cfg))
    else:
        raise DataError(f"unknown network kind {kind!r} in {path}")
    net.load_state_dict(arrays)
    return net


def save_checkpoint(ckpt_dir, state):
    """Write all networks, optimisers, and scalar state into ``ckpt_dir``."""
    ckpt_dir = Path(ckpt_dir)
    ckpt_dir.mkdir(parents=True, exist_ok=True)
    kinds = {"translator_a": "translator", "translator_b": "translator",
             "discriminator_a": "discriminator", "discriminator_b": "discriminator"}
    for name, fname in NETWORK_FILES.items():
        save_network(ckpt_dir / fname, state.nets[name], kinds[name])
    for name, fname in OPTIMIZER_FILES.items():
        np.savez(ckpt_dir / fname, **state.optimizers[name].state_dict())
    meta = {
        "epoch": state.epoch,
        "global_step": state.global_step,
        "best_loss": state.best_loss,
        "epochs_since_improvement": state.epochs_since_improvement,
        "rng_state": state.rng.bit_generator.state,
        "trainer_config": dataclasses.asdict(state.config),
    }
    (ckpt_dir / STATE_FILE).write_text(json.dumps(meta, indent=2))
    return ckpt_dir


def write_best_pointer(ckpt_root, epoch_dir_name):
    (Path(ckpt_root) / BEST_POINTER).write_text(epoch_dir_name + "\n")


def resolve_checkpoint_dir(path):
    """Accept an epoch directory directly, or a root with a BEST pointer."""
    path = Path(path)
    if (path / STATE_FILE).exists() or (path / NETWORK_FILES["translator_a"]).exists():
        return path
    pointer = path / BEST_POINTER
    if pointer.exists():
        return path / pointer.read_text().strip()
    raise DataError(f"no checkpoint found at {path}")


def load_networks(ckpt_dir):
    """Load just the four networks from a checkpoint directory."""
    ckpt_dir = resolve_checkpoint_dir(ckpt_dir)
    return {name: load_network(ckpt_dir / fname)
            for name, fname in NETWORK_FILES.items()}
