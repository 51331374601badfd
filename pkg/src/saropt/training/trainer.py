"""Supervised adversarial training loop.

One step alternates a forward pass with a backward pass: both
translators synthesize their fake images, both critics are updated on
their own log-losses (against detached fakes), then both translators
are updated jointly on the hybrid objective.  With several replicas,
each replica runs forward/backward on its own batch and the mean
gradient drives a single optimiser update; replica 0 is canonical for
batch-norm running statistics so N replicas fed identical batches
reproduce single-replica training exactly.

Early stopping watches the epoch mean of the translator objective:
training halts once it has failed to improve for ``patience`` epochs
in a row.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ConfigError, NumericalError, ValidationError
from ..losses import (DEFAULT_BETA, LossBundle, d_loss, gan_loss_translators,
                      l1_loss, translator_loss)
from ..models import (DiscriminatorConfig, TranslatorConfig,
                      build_discriminator, build_translator)
from ..nn.autograd import Tensor
from ..nn.optim import Adam
from .checkpoint import (NETWORK_FILES, OPTIMIZER_FILES, STATE_FILE,
                         load_network, resolve_checkpoint_dir, save_checkpoint,
                         write_best_pointer)
from .logio import TrainLogWriter


@dataclass(frozen=True)
class TrainerConfig:
    learning_rate: float = 2e-4
    adam_beta1: float = 0.5
    adam_beta2: float = 0.999
    batch_size: int = 1
    beta: float = DEFAULT_BETA
    num_replicas: int = 1          # the reference runs used 4
    early_stop_patience: int = 4
    max_epochs: int = 200
    seed: int = 0

    def validate(self):
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.batch_size < 1 or self.num_replicas < 1:
            raise ConfigError("batch_size and num_replicas must be >= 1")
        if self.early_stop_patience < 1:
            raise ConfigError("early_stop_patience must be >= 1")
        if not (0 <= self.adam_beta1 < 1 and 0 <= self.adam_beta2 < 1):
            raise ConfigError("adam betas must lie in [0, 1)")
        return self


@dataclass
class TrainState:
    config: TrainerConfig
    nets: dict                     # translator_a/b, discriminator_a/b
    optimizers: dict               # translators, disc_a, disc_b
    rng: np.random.Generator
    epoch: int = 0
    global_step: int = 0
    best_loss: float = float("inf")
    epochs_since_improvement: int = 0


def init_state(config: TrainerConfig, translator_config: TranslatorConfig,
               discriminator_template: DiscriminatorConfig = None) -> TrainState:
    """Build the four networks and their optimisers from one seed.

    ``translator_config`` describes the SAR->OPT direction; the
    OPT->SAR translator swaps its channel counts.  Critic A judges
    optical images, critic B judges SAR images.
    """
    config.validate()
    translator_config.validate()
    if discriminator_template is None:
        discriminator_template = DiscriminatorConfig()
    seeds = np.random.SeedSequence(config.seed).spawn(5)
    cfg_a = translator_config
    cfg_b = dataclasses.replace(translator_config,
                                in_channels=cfg_a.out_channels,
                                out_channels=cfg_a.in_channels)
    disc_a_cfg = dataclasses.replace(discriminator_template,
                                     in_channels=cfg_a.out_channels)
    disc_b_cfg = dataclasses.replace(discriminator_template,
                                     in_channels=cfg_a.in_channels)
    nets = {
        "translator_a": build_translator(cfg_a, seeds[0]),
        "translator_b": build_translator(cfg_b, seeds[1]),
        "discriminator_a": build_discriminator(disc_a_cfg, seeds[2]),
        "discriminator_b": build_discriminator(disc_b_cfg, seeds[3]),
    }
    translator_params = dict(nets["translator_a"].named_parameters("translator_a/"))
    translator_params.update(nets["translator_b"].named_parameters("translator_b/"))
    adam = dict(lr=config.learning_rate, beta1=config.adam_beta1,
                beta2=config.adam_beta2)
    optimizers = {
        "translators": Adam(translator_params, **adam),
        "disc_a": Adam(dict(nets["discriminator_a"].named_parameters()), **adam),
        "disc_b": Adam(dict(nets["discriminator_b"].named_parameters()), **adam),
    }
    rng = np.random.default_rng(seeds[4])
    return TrainState(config=config, nets=nets, optimizers=optimizers, rng=rng)


def load_checkpoint(ckpt_dir) -> TrainState:
    """Rebuild a full TrainState (networks, optimisers, RNG) from disk."""
    import json

    ckpt_dir = resolve_checkpoint_dir(ckpt_dir)
    meta = json.loads((ckpt_dir / STATE_FILE).read_text())
    config = TrainerConfig(**meta["trainer_config"])
    nets = {name: load_network(ckpt_dir / fname)
            for name, fname in NETWORK_FILES.items()}
    translator_params = dict(nets["translator_a"].named_parameters("translator_a/"))
    translator_params.update(nets["translator_b"].named_parameters("translator_b/"))
    adam = dict(lr=config.learning_rate, beta1=config.adam_beta1,
                beta2=config.adam_beta2)
    optimizers = {
        "translators": Adam(translator_params, **adam),
        "disc_a": Adam(dict(nets["discriminator_a"].named_parameters()), **adam),
        "disc_b": Adam(dict(nets["discriminator_b"].named_parameters()), **adam),
    }
    for name, fname in OPTIMIZER_FILES.items():
        with np.load(ckpt_dir / fname) as npz:
            optimizers[name].load_state_dict({k: npz[k] for k in npz.files})
    rng = np.random.default_rng(0)
    rng.bit_generator.state = meta["rng_state"]
    return TrainState(config=config, nets=nets, optimizers=optimizers, rng=rng,
                      epoch=meta["epoch"], global_step=meta["global_step"],
                      best_loss=meta["best_loss"],
                      epochs_since_improvement=meta["epochs_since_improvement"])


def average_gradients(per_replica_grads):
    """Element-wise arithmetic mean of per-replica gradient dicts."""
    if not per_replica_grads:
        raise ValidationError("no gradients to average")
    keys = set(per_replica_grads[0])
    for grads in per_replica_grads[1:]:
        if set(grads) != keys:
            raise ValidationError("replicas disagree on parameter names")
    out = {}
    for k in keys:
        shapes = {g[k].shape for g in per_replica_grads}
        if len(shapes) != 1:
            raise ValidationError(f"gradient shape mismatch for {k}: {shapes}")
        out[k] = sum(g[k] for g in per_replica_grads) / len(per_replica_grads)
    return out


def _to_nchw(arr):
    return Tensor(np.transpose(np.asarray(arr, dtype=np.float32), (0, 3, 1, 2)))


def _zero_all(nets):
    for net in nets.values():
        net.zero_grad()


def _collect(params):
    return {k: p.grad.copy() for k, p in params.items() if p.grad is not None}


def _assign(params, grads):
    for k, p in params.items():
        p.grad = grads[k].copy() if k in grads else None


def train_step(state: TrainState, replica_batches) -> LossBundle:
    """One optimisation step over ``num_replicas`` batches.

    Returns the loss bundle averaged across replicas.  Raises
    NumericalError (with the offending values attached) on any
    non-finite loss.
    """
    if not isinstance(replica_batches, (list, tuple)):
        replica_batches = [replica_batches]
    cfg = state.config
    t_a, t_b = state.nets["translator_a"], state.nets["translator_b"]
    d_a, d_b = state.nets["discriminator_a"], state.nets["discriminator_b"]
    opt_t = state.optimizers["translators"]
    opt_da, opt_db = state.optimizers["disc_a"], state.optimizers["disc_b"]
    da_params = dict(d_a.named_parameters())
    db_params = dict(d_b.named_parameters())

    fakes, reals = [], []
    da_grads, db_grads = [], []
    d_losses = []
    # phase 1: forwards + critic gradients (critics see detached fakes)
    for idx, batch in enumerate(replica_batches):
        for net in state.nets.values():
            net.set_update_running_stats(idx == 0)
        sar, opt = _to_nchw(batch.sar), _to_nchw(batch.optical)
        fake_opt = t_a(sar)
        fake_sar = t_b(opt)
        loss_da = d_loss(d_a(opt), d_a(fake_opt.detach()))
        loss_db = d_loss(d_b(sar), d_b(fake_sar.detach()))
        _zero_all(state.nets)
        loss_da.backward()
        loss_db.backward()
        da_grads.append(_collect(da_params))
        db_grads.append(_collect(db_params))
        d_losses.append((loss_da.item(), loss_db.item()))
        fakes.append((fake_opt, fake_sar))
        reals.append((sar, opt))

    _zero_all(state.nets)
    _assign(da_params, average_gradients(da_grads))
    _assign(db_params, average_gradients(db_grads))
    opt_da.step()
    opt_db.step()

    # phase 2: translator gradients against the updated critics
    t_grads, t_losses = [], []
    for idx, (fake_opt, fake_sar) in enumerate(fakes):
        for net in state.nets.values():
            net.set_update_running_stats(idx == 0)
        sar, opt = reals[idx]
        gan = gan_loss_translators(d_a(fake_opt), d_b(fake_sar))
        l1 = l1_loss(opt, fake_opt) + l1_loss(sar, fake_sar)
        total = translator_loss(gan, l1, cfg.beta)
        _zero_all(state.nets)
        total.backward()
        t_grads.append(_collect(opt_t.params))
        t_losses.append((gan.item(), l1.item()))

    _zero_all(state.nets)
    _assign(opt_t.params, average_gradients(t_grads))
    opt_t.step()
    _zero_all(state.nets)
    for net in state.nets.values():
        net.set_update_running_stats(True)

    n = len(replica_batches)
    bundle = LossBundle.from_components(
        d_loss_opt=sum(v[0] for v in d_losses) / n,
        d_loss_sar=sum(v[1] for v in d_losses) / n,
        gan_loss=sum(v[0] for v in t_losses) / n,
        l1_loss=sum(v[1] for v in t_losses) / n,
        beta=cfg.beta)
    if not all(np.isfinite(v) for v in bundle.values()):
        raise NumericalError(f"non-finite loss at step {state.global_step}: {bundle}")
    state.global_step += 1
    return bundle


def _replica_groups(batch_iter, num_replicas):
    group = []
    for batch in batch_iter:
        group.append(batch)
        if len(group) == num_replicas:
            yield group
            group = []
    if group:
        yield group


def train(config: TrainerConfig, manifest, translator_config: TranslatorConfig,
          discriminator_template=None, out_dir=None, state=None,
          log_writer=None):
    """Run epochs with reshuffling until early stop or ``max_epochs``.

    Returns ``(state, history)`` where history holds one record per
    epoch.  With ``out_dir`` set, writes per-epoch checkpoints, a BEST
    pointer, and the training log.
    """
    from ..data.loader import iter_epoch  # local import to avoid cycles

    config.validate()
    if state is None:
        state = init_state(config, translator_config, discriminator_template)
    out_dir = Path(out_dir) if out_dir else None
    own_log = False
    if log_writer is None and out_dir is not None:
        log_writer = TrainLogWriter(out_dir / "training_log.csv")
        own_log = True

    history = []
    try:
        while state.epoch < config.max_epochs:
            totals = []
            stream = iter_epoch(manifest, "train", config.batch_size, state.rng)
            for group in _replica_groups(stream, config.num_replicas):
                try:
                    bundle = train_step(state, group)
                except NumericalError as err:
                    if out_dir is not None:
                        snap = save_checkpoint(
                            out_dir / f"diagnostic_step{state.global_step}", state)
                        err.snapshot_path = str(snap)
                    raise
                totals.append(bundle.total_t_loss)
                if log_writer is not None:
                    log_writer.step(state.global_step, bundle)
            state.epoch += 1
            epoch_mean = float(np.mean(totals))
            improved = epoch_mean < state.best_loss
            if improved:
                state.best_loss = epoch_mean
                state.epochs_since_improvement = 0
            else:
                state.epochs_since_improvement += 1
            history.append({"epoch": state.epoch, "mean_total_t_loss": epoch_mean,
                            "improved": improved})
            if log_writer is not None:
                log_writer.epoch_summary(state.epoch, epoch_mean,
                                         "improved" if improved else "no-improvement")
            if out_dir is not None:
                name = f"epoch_{state.epoch}"
                save_checkpoint(out_dir / name, state)
                if improved:
                    write_best_pointer(out_dir, name)
            if state.epochs_since_improvement >= config.early_stop_patience:
                break
    finally:
        if own_log:
            log_writer.close()
    return state, history


def should_stop(loss_sequence, patience):
    """Early-stop oracle over a finished list of epoch losses.

    Returns the 1-based epoch after which training stops, or None if
    the sequence never trips the patience rule.
    """
    best = float("inf")
    since = 0
    for i, loss in enumerate(loss_sequence, start=1):
        if loss < best:
            best = loss
            since = 0
        else:
            since += 1
        if since >= patience:
            return i
    return None
