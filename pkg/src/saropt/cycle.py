"""Unsupervised refinement with cycle-consistency loops.

Starting from supervised-pretrained translators, unpaired images are
pushed around two loops:

    loop 1:  sar -> T_A -> fake_opt -> T_B -> cyclic_sar
    loop 2:  opt -> T_B -> fake_sar -> T_A -> cyclic_opt

The cyclic image is compared pixel-by-pixel with its source while the
intermediate fake feeds the matching critic.  The two loops alternate
by step: loop 1 (updating T_A/T_B and critic A) on the first step and
every second step after, loop 2 (updating T_A/T_B and critic B) in
between.  No pairing between the SAR and optical batches ever enters
a gradient: each loop reads only one modality's batch, and the other
batch serves the critic purely as a set of real examples.

Training from scratch without the supervised stage is unsupported by
design: refinement requires a pretrained checkpoint.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .losses import LossBundle, d_loss, gan_loss_translators, l1_loss, translator_loss
from .nn import no_grad
from .nn.optim import Adam
from .training.trainer import (TrainerConfig, TrainState, _assign, _collect,
                               _to_nchw, _zero_all, average_gradients)


@dataclass(frozen=True)
class CycleConfig:
    trainer: TrainerConfig = TrainerConfig()
    cycle_weight: float = 20.0        # reuses the supervised L1 weight
    n_unpaired: int = 8               # opposite-modality exemplar count
    reinit_discriminators: bool = False

    def validate(self):
        self.trainer.validate()
        if self.cycle_weight < 0:
            raise ValidationError("cycle_weight must be >= 0")
        if self.n_unpaired < 1:
            raise ValidationError("n_unpaired must be >= 1")
        return self


@dataclass(frozen=True)
class CycleLosses:
    d_loss: float            # active critic's loss this step
    gan_loss: float
    cycle_loss_sar: float    # loop-1 L1(sar, cyclic_sar)
    cycle_loss_opt: float    # loop-2 L1(opt, cyclic_opt)
    total_t_loss: float
    loop: int                # 1 or 2

    def as_bundle(self) -> LossBundle:
        d_opt = self.d_loss if self.loop == 1 else float("nan")
        d_sar = self.d_loss if self.loop == 2 else float("nan")
        cycle = self.cycle_loss_sar if self.loop == 1 else self.cycle_loss_opt
        return LossBundle(d_loss_opt=d_opt, d_loss_sar=d_sar,
                          gan_loss=self.gan_loss, l1_loss=cycle,
                          beta=float("nan"), total_t_loss=self.total_t_loss)


def make_cycle_state(nets, config: CycleConfig) -> TrainState:
    """Wrap pretrained networks in optimisers for cycle training."""
    config.validate()
    tcfg = config.trainer
    if config.reinit_discriminators:
        from .models import build_discriminator
        seeds = np.random.SeedSequence(tcfg.seed).spawn(2)
        nets = dict(nets)
        nets["discriminator_a"] = build_discriminator(
            nets["discriminator_a"].config, seeds[0])
        nets["discriminator_b"] = build_discriminator(
            nets["discriminator_b"].config, seeds[1])
    translator_params = dict(nets["translator_a"].named_parameters("translator_a/"))
    translator_params.update(nets["translator_b"].named_parameters("translator_b/"))
    adam = dict(lr=tcfg.learning_rate, beta1=tcfg.adam_beta1, beta2=tcfg.adam_beta2)
    optimizers = {
        "translators": Adam(translator_params, **adam),
        "disc_a": Adam(dict(nets["discriminator_a"].named_parameters()), **adam),
        "disc_b": Adam(dict(nets["discriminator_b"].named_parameters()), **adam),
    }
    rng = np.random.default_rng(np.random.SeedSequence(tcfg.seed).spawn(3)[2])
    return TrainState(config=tcfg, nets=nets, optimizers=optimizers, rng=rng)


def _cycle_l1(t_first, t_second, batch_nchw):
    """L1 between a batch and its image after the round trip."""
    return l1_loss(batch_nchw, t_second(t_first(batch_nchw)))


def cycle_step(state: TrainState, sar_batch, opt_batch,
               cycle_weight=20.0) -> CycleLosses:
    """One alternating unpaired step over replica batch lists.

    ``sar_batch`` / ``opt_batch`` are loader arrays (N, H, W, C) or
    lists of them (one per replica).  The loop parity comes from
    ``state.global_step``.
    """
    if not isinstance(sar_batch, (list, tuple)):
        sar_batch = [sar_batch]
    if not isinstance(opt_batch, (list, tuple)):
        opt_batch = [opt_batch]
    if len(sar_batch) != len(opt_batch):
        raise ValidationError("replica counts differ between modalities")
    t_a, t_b = state.nets["translator_a"], state.nets["translator_b"]
    d_a, d_b = state.nets["discriminator_a"], state.nets["discriminator_b"]
    loop = 1 if state.global_step % 2 == 0 else 2
    critic = d_a if loop == 1 else d_b
    critic_name = "disc_a" if loop == 1 else "disc_b"
    critic_params = dict(critic.named_parameters())
    opt_t = state.optimizers["translators"]

    d_grads, t_grads = [], []
    d_vals, gan_vals, cyc_act_vals, cyc_other_vals = [], [], [], []
    graphs = []
    for idx in range(len(sar_batch)):
        for net in state.nets.values():
            net.set_update_running_stats(idx == 0)
        sar = _to_nchw(sar_batch[idx])
        opt = _to_nchw(opt_batch[idx])
        if loop == 1:
            fake = t_a(sar)                  # fake optical
            cyc = t_b(fake)                  # cyclic SAR
            real_for_critic = opt
            cyc_ref = sar
        else:
            fake = t_b(opt)                  # fake SAR
            cyc = t_a(fake)                  # cyclic optical
            real_for_critic = sar
            cyc_ref = opt
        loss_d = d_loss(critic(real_for_critic), critic(fake.detach()))
        _zero_all(state.nets)
        loss_d.backward()
        d_grads.append(_collect(critic_params))
        d_vals.append(loss_d.item())
        graphs.append((fake, cyc, cyc_ref, sar, opt))

    _zero_all(state.nets)
    _assign(critic_params, average_gradients(d_grads))
    state.optimizers[critic_name].step()

    for idx, (fake, cyc, cyc_ref, sar, opt) in enumerate(graphs):
        for net in state.nets.values():
            net.set_update_running_stats(idx == 0)
        gan = gan_loss_translators(critic(fake))
        cyc_l1 = l1_loss(cyc_ref, cyc)
        total = translator_loss(gan, cyc_l1, cycle_weight)
        _zero_all(state.nets)
        total.backward()
        t_grads.append(_collect(opt_t.params))
        gan_vals.append(gan.item())
        cyc_act_vals.append(cyc_l1.item())
        with no_grad():
            if loop == 1:
                other = _cycle_l1(t_b, t_a, opt)   # loop-2 value, logged only
            else:
                other = _cycle_l1(t_a, t_b, sar)   # loop-1 value, logged only
        cyc_other_vals.append(other.item())

    _zero_all(state.nets)
    _assign(opt_t.params, average_gradients(t_grads))
    opt_t.step()
    _zero_all(state.nets)
    for net in state.nets.values():
        net.set_update_running_stats(True)

    n = len(sar_batch)
    gan_mean = sum(gan_vals) / n
    act = sum(cyc_act_vals) / n
    other = sum(cyc_other_vals) / n
    state.global_step += 1
    return CycleLosses(
        d_loss=sum(d_vals) / n,
        gan_loss=gan_mean,
        cycle_loss_sar=act if loop == 1 else other,
        cycle_loss_opt=other if loop == 1 else act,
        total_t_loss=gan_mean + cycle_weight * act,
        loop=loop)


def measure_cycle_loss(nets, sar_images, opt_images):
    """Eval-mode mean cycle L1 for both loops (no updates)."""
    t_a, t_b = nets["translator_a"], nets["translator_b"]
    was_training = t_a.training
    t_a.eval(), t_b.eval()
    with no_grad():
        sar = _to_nchw(np.stack(list(sar_images)))
        opt = _to_nchw(np.stack(list(opt_images)))
        loss_sar = _cycle_l1(t_a, t_b, sar).item()
        loss_opt = _cycle_l1(t_b, t_a, opt).item()
    if was_training:
        t_a.train(), t_b.train()
    return {"cycle_loss_sar": loss_sar, "cycle_loss_opt": loss_opt}


def cycle_train(state: TrainState, test_images, exemplars, config: CycleConfig,
                test_modality="sar", log_writer=None):
    """Cycle-train to early stop; an epoch traverses the test set once.

    ``test_images``: N arrays (H, W, C) of the modality being refined;
    ``exemplars``: n arrays of the opposite modality, recycled as
    needed.  Returns per-epoch history.
    """
    config.validate()
    tcfg = config.trainer
    if len(test_images) == 0:
        raise ValidationError("test image set is empty")
    if len(exemplars) == 0:
        raise ValidationError("exemplar set is empty")
    best = float("inf")
    since = 0
    history = []
    for epoch in range(tcfg.max_epochs):
        order = state.rng.permutation(len(test_images))
        ex_order = state.rng.permutation(len(exemplars))
        totals = []
        bs = tcfg.batch_size
        for start in range(0, len(order), bs):
            idx = order[start:start + bs]
            ex_idx = [ex_order[(start + j) % len(exemplars)] for j in range(len(idx))]
            test_arr = np.stack([test_images[i] for i in idx])
            ex_arr = np.stack([exemplars[i] for i in ex_idx])
            if test_modality == "sar":
                losses = cycle_step(state, test_arr, ex_arr, config.cycle_weight)
            else:
                losses = cycle_step(state, ex_arr, test_arr, config.cycle_weight)
            totals.append(losses.total_t_loss)
            if log_writer is not None:
                log_writer.step(state.global_step, losses.as_bundle(),
                                extra=(losses.cycle_loss_sar, losses.cycle_loss_opt))
        mean_total = float(np.mean(totals))
        improved = mean_total < best
        if improved:
            best = mean_total
            since = 0
        else:
            since += 1
        history.append({"epoch": epoch + 1, "mean_total_t_loss": mean_total,
                        "improved": improved})
        if log_writer is not None:
            log_writer.epoch_summary(epoch + 1, mean_total)
        if since >= tcfg.early_stop_patience:
            break
    return history


def refine_unpaired(config: CycleConfig, nets, test_images, exemplars,
                    test_modality="sar", log_writer=None):
    """One direction of the refinement procedure.

    Cycle-trains on the unpaired sets until early stop, then
    translates every test image with the refined translator in
    inference mode.  Returns (state, history, translations) where
    translations is a list of (H, W, C_out) arrays aligned with
    ``test_images``.
    """
    state = make_cycle_state(nets, config)
    history = cycle_train(state, test_images, exemplars, config,
                          test_modality=test_modality, log_writer=log_writer)
    translator = state.nets["translator_a" if test_modality == "sar" else "translator_b"]
    translator.eval()
    outputs = []
    with no_grad():
        for img in test_images:
            y = translator(_to_nchw(img[None]))
            outputs.append(np.transpose(y.data[0], (1, 2, 0)))
    translator.train()
    return state, history, outputs
