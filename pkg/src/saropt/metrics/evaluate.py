"""Batch evaluation: FID over embedded sample sets plus PSNR/SSIM.

The sampling protocol mirrors the reference procedure: draw a fixed
number of test pairs, compute FID, repeat, and average (subsampling
is skipped when the requested count exceeds what is available).
Reports are written both human-readable and as key=value lines.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ValidationError
from ..nn import no_grad
from ..nn.autograd import Tensor
from .quality import psnr, ssim
from .stats import frechet_distance, gaussian_stats


@dataclass
class MetricReport:
    direction: str            # "sar2opt" | "opt2sar"
    fid: float
    psnr_mean: float
    ssim_mean: float
    n_samples: int
    embedder_id: str
    dataset_id: str = ""
    fid_repeats: int = 1
    fid_samples: int = 0
    rank_warning: bool = False
    notes: list = field(default_factory=list)

    def to_kv(self) -> str:
        lines = [
            f"direction={self.direction}",
            f"fid={self.fid:.4f}",
            f"psnr_mean={self.psnr_mean:.4f}",
            f"ssim_mean={self.ssim_mean:.4f}",
            f"n_samples={self.n_samples}",
            f"fid_repeats={self.fid_repeats}",
            f"fid_samples={self.fid_samples}",
            f"embedder={self.embedder_id}",
            f"dataset={self.dataset_id}",
            f"rank_warning={str(self.rank_warning).lower()}",
        ]
        lines += [f"note={n}" for n in self.notes]
        return "\n".join(lines) + "\n"

    def format(self) -> str:
        head = f"[{self.direction}] dataset={self.dataset_id or '-'}"
        body = (f"  FID {self.fid:.4f}  PSNR {self.psnr_mean:.4f} dB  "
                f"SSIM {self.ssim_mean:.4f}  (n={self.n_samples}, "
                f"embedder {self.embedder_id})")
        warn = "  WARNING: sample count <= embedding dim (rank-deficient covariance)" \
            if self.rank_warning else ""
        notes = "".join(f"\n  note: {n}" for n in self.notes)
        return head + "\n" + body + warn + notes


def fid(real_images, fake_images, embedder):
    """Fréchet distance between embedded sample sets.

    Returns (value, info) where info carries the sample counts and the
    rank-deficiency flag (raised when n <= embedder dim).
    """
    if len(real_images) == 0 or len(fake_images) == 0:
        raise ValidationError("image sets must be nonempty")
    real_vecs = embedder.embed(real_images)
    fake_vecs = embedder.embed(fake_images)
    s_real = gaussian_stats(real_vecs)
    s_fake = gaussian_stats(fake_vecs)
    value = frechet_distance(s_real, s_fake)
    info = {
        "n_real": s_real.n,
        "n_fake": s_fake.n,
        "rank_warning": s_real.rank_deficient or s_fake.rank_deficient,
    }
    return value, info


def fid_protocol(real_images, fake_images, embedder, samples=None, repeats=1,
                 seed=0):
    """Repeat FID over random subsamples and average."""
    n = min(len(real_images), len(fake_images))
    take = n if samples is None else min(samples, n)
    rng = np.random.default_rng(seed)
    values, warn = [], False
    for _ in range(max(repeats, 1)):
        if take < n:
            idx = rng.choice(n, size=take, replace=False)
        else:
            idx = np.arange(n)
        value, info = fid([real_images[i] for i in idx],
                          [fake_images[i] for i in idx], embedder)
        values.append(value)
        warn = warn or info["rank_warning"]
    return float(np.mean(values)), take, warn


def _translate_all(net, images):
    net.eval()
    out = []
    with no_grad():
        for img in images:
            x = np.transpose(np.asarray(img, dtype=np.float32)[None], (0, 3, 1, 2))
            y = net(Tensor(x))
            out.append(np.transpose(y.data[0], (1, 2, 0)))
    return out


def evaluate(nets, manifest, embedder, split="test", samples=None, repeats=1,
             seed=0, dataset_id=""):
    """Translate the split both directions and score the results.

    Returns (report_sar2opt, report_opt2sar).
    """
    from ..data.loader import load_pair

    entries = manifest.split_entries(split)
    if not entries:
        raise ValidationError(f"split {split!r} is empty")
    if len(entries) < 2:
        raise ValidationError(
            f"split {split!r} has {len(entries)} sample; the distribution "
            f"metric needs at least 2 (prepare a larger raster or lower "
            f"test_fraction)")
    sar_imgs, opt_imgs = [], []
    for e in entries:
        s, o = load_pair(manifest, e)
        sar_imgs.append(s)
        opt_imgs.append(o)
    fake_opt = _translate_all(nets["translator_a"], sar_imgs)
    fake_sar = _translate_all(nets["translator_b"], opt_imgs)

    reports = []
    for direction, real, fake in (("sar2opt", opt_imgs, fake_opt),
                                  ("opt2sar", sar_imgs, fake_sar)):
        value, take, warn = fid_protocol(real, fake, embedder,
                                         samples=samples, repeats=repeats,
                                         seed=seed)
        psnrs = [psnr(r, f) for r, f in zip(real, fake)]
        ssims = [ssim(r, f) for r, f in zip(real, fake)]
        reports.append(MetricReport(
            direction=direction, fid=value,
            psnr_mean=float(np.mean(psnrs)), ssim_mean=float(np.mean(ssims)),
            n_samples=len(real), embedder_id=embedder.identity,
            dataset_id=dataset_id, fid_repeats=repeats, fid_samples=take,
            rank_warning=warn))
    return tuple(reports)


def write_report(report: MetricReport, out_dir):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"metrics_{report.direction}.txt").write_text(report.format() + "\n")
    (out_dir / f"metrics_{report.direction}.kv").write_text(report.to_kv())


def summary_table(reports) -> str:
    """Aligned comparison table over both directions."""
    lines = [f"{'direction':<10}{'SSIM':>10}{'PSNR':>10}{'FID':>12}"]
    for r in reports:
        lines.append(f"{r.direction:<10}{r.ssim_mean:>10.4f}"
                     f"{r.psnr_mean:>10.4f}{r.fid:>12.4f}")
    return "\n".join(lines)
