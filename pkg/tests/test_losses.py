"""Loss semantics against element-wise oracles and stated limits."""

import math

import numpy as np
import pytest

from saropt.errors import ValidationError
from saropt.losses import (LossBundle, PROB_EPS, d_loss, gan_loss_translators,
                           l1_loss, translator_loss)
from saropt.nn.autograd import Tensor

LN2 = math.log(2.0)


def _clamped_log(v):
    return math.log(min(max(v, PROB_EPS), 1.0 - PROB_EPS))


def d_loss_oracle(real, fake):
    r = [-_clamped_log(v) for v in real.ravel()]
    f = [-_clamped_log(1.0 - v) for v in fake.ravel()]
    return sum(r) / len(r) + sum(f) / len(f)


def test_uninformative_maps_give_two_ln_two():
    half = np.full((32, 32), 0.5)
    assert np.isclose(d_loss(half, half).item(), 2 * LN2)
    assert np.isclose(gan_loss_translators(half, half).item(), 2 * LN2)


def test_perfect_discriminator_limit_is_zero():
    ones = np.ones((8, 8))
    zeros = np.zeros((8, 8))
    assert d_loss(ones, zeros).item() < 1e-5
    assert np.isfinite(d_loss(ones, zeros).item())  # clamping holds at saturation


def test_fully_fooled_translator_loss_is_zero():
    assert gan_loss_translators(np.ones((4, 4)), np.ones((4, 4))).item() < 1e-5


def test_single_direction_degenerates_to_one_term():
    m = np.full((4, 4), 0.25)
    both = gan_loss_translators(m, m).item()
    single = gan_loss_translators(fake_map_opt=m).item()
    assert np.isclose(single, both / 2)
    assert np.isclose(single, -math.log(0.25))
    with pytest.raises(ValidationError):
        gan_loss_translators()


def test_d_loss_matches_elementwise_oracle():
    rng = np.random.default_rng(0)
    for _ in range(100):
        shape = tuple(rng.integers(2, 9, size=2))
        real = rng.uniform(0.01, 0.99, shape)
        fake = rng.uniform(0.01, 0.99, shape)
        assert np.isclose(d_loss(real, fake).item(),
                          d_loss_oracle(real, fake), rtol=1e-6)


def test_l1_trivial_and_oracle():
    a = np.zeros((5, 5))
    assert l1_loss(a, a).item() == 0.0
    assert np.isclose(l1_loss(a, a + 0.5).item(), 0.5)
    rng = np.random.default_rng(1)
    for _ in range(100):
        x = rng.normal(size=(3, 4))
        y = rng.normal(size=(3, 4))
        want = float(np.abs(x - y).mean())
        assert np.isclose(l1_loss(x, y).item(), want, rtol=1e-7)


def test_shape_mismatch_rejected():
    with pytest.raises(ValidationError):
        d_loss(np.full((2, 2), 0.5), np.full((3, 3), 0.5))
    with pytest.raises(ValidationError):
        l1_loss(np.zeros((2, 2)), np.zeros((2, 3)))


def test_bundle_total_is_exact():
    b = LossBundle.from_components(1.0, 1.1, gan_loss=1.0, l1_loss=0.1, beta=20.0)
    assert b.total_t_loss == b.gan_loss + b.beta * b.l1_loss
    assert b.total_t_loss == 3.0
    zero_beta = LossBundle.from_components(0, 0, gan_loss=0.7, l1_loss=9.0, beta=0.0)
    assert zero_beta.total_t_loss == 0.7  # adversarial-only ablation


def test_translator_loss_linear_in_beta():
    gan = Tensor(np.asarray(1.25))
    l1 = Tensor(np.asarray(0.4))
    values = [translator_loss(gan, l1, beta).item() for beta in (0.0, 10.0, 20.0)]
    assert np.isclose(values[0], 1.25)
    assert np.isclose(values[2] - values[1], values[1] - values[0])


def test_mean_reduction_is_resolution_invariant():
    for size in (8, 16, 64):
        m = np.full((size, size), 0.3)
        assert np.isclose(d_loss(m, m).item(),
                          d_loss(np.full((4, 4), 0.3), np.full((4, 4), 0.3)).item())


def test_directional_monotonicity():
    base = np.full((6, 6), 0.5)
    # d_loss falls as real -> 1 and fake -> 0
    assert d_loss(np.full((6, 6), 0.9), base).item() < d_loss(base, base).item()
    assert d_loss(base, np.full((6, 6), 0.1)).item() < d_loss(base, base).item()
    # gan loss falls as fakes -> 1
    assert (gan_loss_translators(np.full((6, 6), 0.9), base).item()
            < gan_loss_translators(base, base).item())


def test_losses_nonnegative_and_finite_on_extremes():
    for v in (0.0, 1e-12, 0.5, 1.0 - 1e-12, 1.0):
        m = np.full((3, 3), v)
        for val in (d_loss(m, m).item(), gan_loss_translators(m, m).item()):
            assert np.isfinite(val) and val >= 0.0
