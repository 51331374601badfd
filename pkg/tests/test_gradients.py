"""Whole-network gradient checks against central finite differences.

Tiny configs (base width 2, two scales, 16x16 inputs) in float64 keep
the parameter count small enough to difference every scalar.
"""

import numpy as np
import pytest

from conftest import TINY_DISCRIMINATOR, TINY_TRANSLATOR, max_relative_error
from saropt.losses import d_loss, gan_loss_translators, l1_loss, translator_loss
from saropt.models.discriminator import PatchDiscriminator
from saropt.models.translator import Translator
from saropt.nn.autograd import Tensor

REL_TOL = 1e-3
# 1e-5 steps straddle leaky-ReLU / L1 kinks (pre-activation density near
# zero is high at init); 1e-6 stays inside the linear pieces while well
# above the f64 cancellation floor.
FD_STEP = 1e-6


def build_f64(kind, seed):
    rng = np.random.default_rng(seed)
    if kind == "translator":
        net = Translator(TINY_TRANSLATOR, rng=rng, dtype=np.float64)
    else:
        net = PatchDiscriminator(TINY_DISCRIMINATOR, rng=rng, dtype=np.float64)
    net.set_update_running_stats(False)  # FD re-evaluates forward many times
    return net


def check_all_params(net, loss_fn):
    """Backprop once, then central-difference every parameter."""
    net.zero_grad()
    loss_fn().backward()
    worst = 0.0
    for name, p in net.named_parameters():
        analytic = p.grad.copy() if p.grad is not None else np.zeros_like(p.data)
        numeric = np.zeros_like(p.data)
        flat, nflat = p.data.reshape(-1), numeric.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + FD_STEP
            lp = loss_fn().item()
            flat[i] = orig - FD_STEP
            lm = loss_fn().item()
            flat[i] = orig
            nflat[i] = (lp - lm) / (2 * FD_STEP)
        err = max_relative_error(analytic, numeric)
        worst = max(worst, err)
        assert err < REL_TOL, f"{name}: rel err {err:.2e}"
    return worst


@pytest.fixture(scope="module")
def tiny_inputs():
    rng = np.random.default_rng(0)
    sar = Tensor(rng.uniform(-0.8, 0.8, (1, 1, 16, 16)))
    opt = Tensor(rng.uniform(-0.8, 0.8, (1, 3, 16, 16)))
    return sar, opt


def test_critic_loss_gradients_match_finite_differences(tiny_inputs):
    _, opt = tiny_inputs
    rng = np.random.default_rng(1)
    fake = Tensor(rng.uniform(-0.8, 0.8, (1, 3, 16, 16)))
    disc = build_f64("discriminator", seed=2)

    def loss():
        return d_loss(disc(opt), disc(fake))

    worst = check_all_params(disc, loss)
    assert worst < REL_TOL


def test_translator_loss_gradients_match_finite_differences(tiny_inputs):
    sar, opt = tiny_inputs
    translator = build_f64("translator", seed=3)
    disc = build_f64("discriminator", seed=4)

    def loss():
        fake_opt = translator(sar)
        gan = gan_loss_translators(disc(fake_opt))
        return translator_loss(gan, l1_loss(opt, fake_opt), beta=20.0)

    worst = check_all_params(translator, loss)
    assert worst < REL_TOL
