"""Training objectives.

The critic minimises a binary log-loss over its probability maps; the
translators minimise the non-saturating adversarial term (drive the
critic's score on synthesized images towards 1) plus a weighted L1
reconstruction term:

    L(D) = -mean log D(x) - mean log(1 - D(T(z)))
    L_GAN(T) = -sum_i mean log D_i(T_i(z))
    L(T) = L_GAN(T) + beta * L_L1(T)

Expectations are realised as means over every map/pixel element, which
keeps beta scale-stable across patch and map sizes.  Probabilities are
clamped to [eps, 1-eps] so saturated critics cannot produce infinities.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ValidationError
from .nn import functional as F
from .nn.autograd import Tensor, as_tensor

PROB_EPS = 1e-7
DEFAULT_BETA = 20.0


@dataclass(frozen=True)
class LossBundle:
    """Per-step scalar record of every loss component."""
    d_loss_opt: float
    d_loss_sar: float
    gan_loss: float
    l1_loss: float
    beta: float
    total_t_loss: float

    @classmethod
    def from_components(cls, d_loss_opt, d_loss_sar, gan_loss, l1_loss,
                        beta=DEFAULT_BETA):
        gan_loss = float(gan_loss)
        l1_loss = float(l1_loss)
        return cls(d_loss_opt=float(d_loss_opt), d_loss_sar=float(d_loss_sar),
                   gan_loss=gan_loss, l1_loss=l1_loss, beta=float(beta),
                   total_t_loss=gan_loss + float(beta) * l1_loss)

    def values(self):
        return (self.d_loss_opt, self.d_loss_sar, self.gan_loss,
                self.l1_loss, self.total_t_loss)


def _neg_mean_log(prob_map) -> Tensor:
    p = F.clamp(as_tensor(prob_map), PROB_EPS, 1.0 - PROB_EPS)
    return F.scale(F.mean(F.log(p)), -1.0)


def d_loss(real_map, fake_map) -> Tensor:
    """Critic log-loss: real towards 1, fake towards 0."""
    real_map, fake_map = as_tensor(real_map), as_tensor(fake_map)
    if real_map.shape != fake_map.shape:
        raise ValidationError(
            f"probability maps differ in shape: {real_map.shape} vs {fake_map.shape}")
    return F.add(_neg_mean_log(real_map), _neg_mean_log(F.one_minus(fake_map)))


def gan_loss_translators(fake_map_opt=None, fake_map_sar=None) -> Tensor:
    """Adversarial translator loss summed over the available directions."""
    terms = [_neg_mean_log(m) for m in (fake_map_opt, fake_map_sar)
             if m is not None]
    if not terms:
        raise ValidationError("at least one fake probability map is required")
    total = terms[0]
    for t in terms[1:]:
        total = F.add(total, t)
    return total


def l1_loss(true_img, translated_img) -> Tensor:
    """Mean absolute difference per element."""
    true_img, translated_img = as_tensor(true_img), as_tensor(translated_img)
    if true_img.shape != translated_img.shape:
        raise ValidationError(
            f"image shapes differ: {true_img.shape} vs {translated_img.shape}")
    return F.mean(F.absolute(F.sub(true_img, translated_img)))


def translator_loss(gan_term, l1_term, beta=DEFAULT_BETA) -> Tensor:
    """Hybrid objective L(T) = L_GAN + beta * L_L1 (graph-preserving)."""
    return F.add(as_tensor(gan_term), F.scale(as_tensor(l1_term), beta))
