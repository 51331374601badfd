"""Command-line surface: prepare / train / translate / evaluate / refine.

Exit codes: 0 success, 2 configuration error, 3 data error,
4 numerical failure during training or evaluation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import (CONFIG_FILENAME, RunConfig, apply_overrides, load_config)
from .cycle import CycleConfig, refine_unpaired
from .data import (load_manifest, normalize_channels, optical_to_unit,
                   pair_and_split, pauli_rgb, read_raster, run_despeckle, tile,
                   write_raster)
from .data.pauli import ScatteringMatrix
from .data.raster import RasterImage
from .errors import (ConfigError, DataError, NumericalError, ValidationError)
from .metrics import evaluate, load_embedder, summary_table, write_report
from .metrics.embedder import RandomProjectionEmbedder
from .models import DiscriminatorConfig, TranslatorConfig
from .nn import no_grad
from .nn.autograd import Tensor
from .training import (TrainerConfig, compute_report, load_checkpoint,
                       load_networks, save_checkpoint, train)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


# ---------------------------------------------------------------------------
# shared plumbing
# ---------------------------------------------------------------------------

def _resolve_config(args, keys) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    overrides = {k: getattr(args, k, None) for k in keys}
    return apply_overrides(cfg, overrides)


def _trainer_config(cfg: RunConfig) -> TrainerConfig:
    return TrainerConfig(
        learning_rate=cfg.learning_rate, adam_beta1=cfg.adam_beta1,
        adam_beta2=cfg.adam_beta2, batch_size=cfg.batch_size, beta=cfg.beta,
        num_replicas=cfg.num_replicas,
        early_stop_patience=cfg.early_stop_patience,
        max_epochs=cfg.max_epochs, seed=cfg.seed).validate()


def _translator_config(cfg: RunConfig) -> TranslatorConfig:
    return TranslatorConfig(
        in_channels=cfg.in_channels, out_channels=cfg.out_channels,
        base_feature_maps=cfg.base_feature_maps, num_scales=cfg.num_scales,
        input_size=cfg.input_size).validate()


def _load_scattering(path) -> ScatteringMatrix:
    path = Path(path)
    if path.suffix != ".npz":
        raise DataError("quad-pol input must be an .npz with hh/hv/vh/vv arrays")
    with np.load(path) as npz:
        missing = {"hh", "hv", "vh", "vv"} - set(npz.files)
        if missing:
            raise DataError(f"quad-pol archive missing channels: {sorted(missing)}")
        return ScatteringMatrix(s_hh=npz["hh"], s_hv=npz["hv"],
                                s_vh=npz["vh"], s_vv=npz["vv"])


def _load_patch_dir(path):
    path = Path(path)
    files = sorted(path.glob("*.npy"))
    if not files:
        raise DataError(f"no .npy patches in {path}")
    return [np.load(f).astype(np.float32) for f in files], files


def _get_embedder(cfg: RunConfig, notes):
    try:
        return load_embedder(cfg.embedder)
    except (ConfigError, DataError) as err:
        fallback = RandomProjectionEmbedder()
        msg = (f"requested embedder {cfg.embedder!r} unavailable ({err}); "
               f"falling back to {fallback.identity}")
        print(f"WARNING: {msg}", file=sys.stderr)
        notes.append(msg)
        return fallback


# ---------------------------------------------------------------------------
# prepare
# ---------------------------------------------------------------------------

def cmd_prepare(args) -> int:
    cfg = _resolve_config(args, ("sar", "opt", "out_dir", "pol", "patch_size",
                                 "test_fraction", "norm_lambda", "despeckle_cmd",
                                 "seed"))
    if not cfg.sar or not cfg.opt:
        raise ConfigError("prepare needs --sar and --opt rasters")
    out = cfg.resolved_out_dir()
    out.mkdir(parents=True, exist_ok=True)

    if cfg.pol == "quad":
        sar_raster, _ = pauli_rgb(_load_scattering(cfg.sar), lam=cfg.norm_lambda,
                                  source_tag=Path(cfg.sar).stem)
    elif cfg.pol == "single":
        raw = read_raster(cfg.sar)
        raw = run_despeckle(raw, cfg.despeckle_cmd)
        pixels, _ = normalize_channels(raw.pixels, lam=cfg.norm_lambda)
        sar_raster = RasterImage(pixels, source_tag=raw.source_tag)
    else:
        raise ConfigError(f"pol must be 'single' or 'quad', got {cfg.pol!r}")

    opt_raw = read_raster(cfg.opt)
    opt_pixels = np.clip(optical_to_unit(opt_raw.pixels), -1.0, 1.0)
    if opt_pixels.shape[2] != 3:
        raise DataError(f"optical raster must have 3 channels, "
                        f"got {opt_pixels.shape[2]}")
    opt_raster = RasterImage(opt_pixels, source_tag=opt_raw.source_tag)
    if (sar_raster.height, sar_raster.width) != (opt_raster.height, opt_raster.width):
        raise DataError("SAR and optical rasters differ in size; "
                        "inputs must be co-registered on the same grid")

    sar_tiles = tile(sar_raster, cfg.patch_size)
    opt_tiles = tile(opt_raster, cfg.patch_size)
    manifest = pair_and_split(sar_tiles, opt_tiles,
                              test_fraction=cfg.test_fraction, seed=cfg.seed)
    patches = out / "patches"
    patches.mkdir(exist_ok=True)
    opt_by_coord = {(t.row, t.col): t for t in opt_tiles}
    for entry, s_tile in zip(manifest.entries, sar_tiles):
        if entry.patch_id != s_tile.patch_id:
            raise DataError("internal pairing order mismatch")
        o_tile = opt_by_coord[(s_tile.row, s_tile.col)]
        np.save(out / entry.sar_path, s_tile.pixels.astype(np.float32))
        np.save(out / entry.opt_path, o_tile.pixels.astype(np.float32))
    manifest.root = out
    manifest.save(out / "manifest.txt")
    cfg.save(out / CONFIG_FILENAME)
    counts = manifest.counts
    print(f"prepared {len(manifest.entries)} pairs "
          f"(train={counts['train']} test={counts['test']}) -> {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# train
# ---------------------------------------------------------------------------

def cmd_train(args) -> int:
    cfg = _resolve_config(args, ("out_dir", "learning_rate", "batch_size",
                                 "beta", "num_replicas", "early_stop_patience",
                                 "max_epochs", "seed", "base_feature_maps",
                                 "num_scales", "disc_channels"))
    manifest = load_manifest(args.manifest)
    out = cfg.resolved_out_dir()
    out.mkdir(parents=True, exist_ok=True)

    # infer channel counts and patch size from the stored patches
    from .data.loader import load_pair
    sample_sar, sample_opt = load_pair(manifest, manifest.entries[0])
    cfg = apply_overrides(cfg, {
        "in_channels": sample_sar.shape[2],
        "out_channels": sample_opt.shape[2],
        "input_size": sample_sar.shape[0],
    })

    trainer_cfg = _trainer_config(cfg)
    translator_cfg = _translator_config(cfg)
    disc_template = DiscriminatorConfig(channel_schedule=cfg.disc_schedule())
    state = load_checkpoint(args.resume) if args.resume else None
    cfg.save(out / CONFIG_FILENAME)

    state, history = train(trainer_cfg, manifest, translator_cfg,
                           discriminator_template=disc_template,
                           out_dir=out, state=state)
    report = compute_report(
        [state.nets["translator_a"], state.nets["translator_b"]],
        [state.nets["discriminator_a"], state.nets["discriminator_b"]],
        image_size=cfg.input_size, num_replicas=trainer_cfg.num_replicas)
    (out / "compute_report.txt").write_text(report.format() + "\n")
    (out / "compute_report.json").write_text(json.dumps(report.to_dict(), indent=2))
    print(report.format())
    print(f"trained {state.epoch} epoch(s), best mean translator loss "
          f"{state.best_loss:.6g}; checkpoints in {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# translate
# ---------------------------------------------------------------------------

def _pad_to_multiple(arr, multiple):
    h, w = arr.shape[:2]
    ph = (-h) % multiple
    pw = (-w) % multiple
    if ph == 0 and pw == 0:
        return arr, (0, 0)
    padded = np.pad(arr, ((0, ph), (0, pw), (0, 0)), mode="reflect")
    return padded, (ph, pw)


def cmd_translate(args) -> int:
    cfg = _resolve_config(args, ("out_dir", "norm_lambda"))
    nets = load_networks(args.checkpoint)
    net = nets["translator_a" if args.direction == "sar2opt" else "translator_b"]
    raster = read_raster(args.input)
    pixels = raster.pixels
    if args.normalize:
        if args.direction == "sar2opt":
            pixels, _ = normalize_channels(pixels, lam=cfg.norm_lambda)
        else:
            pixels = np.clip(optical_to_unit(pixels), -1.0, 1.0)
    if pixels.min() < -1.001 or pixels.max() > 1.001:
        raise ValidationError(
            f"input values in [{pixels.min():.3g}, {pixels.max():.3g}] exceed "
            f"[-1, 1]; pass --normalize for raw rasters")
    if pixels.shape[2] != net.config.in_channels:
        raise ValidationError(
            f"input has {pixels.shape[2]} channels but the "
            f"{args.direction} translator expects {net.config.in_channels}")
    divisor = net.config.divisor
    trimmed = (0, 0)
    if args.pad:
        pixels, trimmed = _pad_to_multiple(pixels, divisor)
    net.eval()
    with no_grad():
        x = np.transpose(pixels[None], (0, 3, 1, 2)).astype(np.float32)
        y = net(Tensor(x))
    out_img = np.transpose(y.data[0], (1, 2, 0))
    if trimmed != (0, 0):
        h = out_img.shape[0] - trimmed[0]
        w = out_img.shape[1] - trimmed[1]
        out_img = out_img[:h, :w]
    out_base = Path(args.output)
    out_base.parent.mkdir(parents=True, exist_ok=True)
    write_raster(out_base.with_suffix(".npy"), out_img)
    write_raster(out_base.with_suffix(".png"), out_img)
    print(f"translated {args.input} ({args.direction}) -> "
          f"{out_base.with_suffix('.npy')} [+ .png preview], "
          f"shape {out_img.shape}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------

def cmd_evaluate(args) -> int:
    cfg = _resolve_config(args, ("out_dir", "embedder", "eval_samples",
                                 "eval_repeats", "seed"))
    manifest = load_manifest(args.manifest)
    nets = load_networks(args.checkpoint)
    out = cfg.resolved_out_dir()
    out.mkdir(parents=True, exist_ok=True)
    notes = []
    embedder = _get_embedder(cfg, notes)
    samples = cfg.eval_samples or None
    reports = evaluate(nets, manifest, embedder, split=args.split,
                       samples=samples, repeats=cfg.eval_repeats,
                       seed=cfg.seed, dataset_id=str(args.manifest))
    for r in reports:
        r.notes.extend(notes)
        write_report(r, out)
    cfg.save(out / CONFIG_FILENAME)
    print(summary_table(reports))
    for r in reports:
        if r.rank_warning:
            print(f"WARNING [{r.direction}]: sample count <= embedder dim; "
                  f"covariance rank-deficient", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# refine
# ---------------------------------------------------------------------------

def cmd_refine(args) -> int:
    cfg = _resolve_config(args, ("out_dir", "cycle_weight", "n_unpaired",
                                 "reinit_discriminators", "max_epochs",
                                 "early_stop_patience", "batch_size",
                                 "learning_rate", "seed", "embedder",
                                 "eval_samples", "eval_repeats"))
    out = cfg.resolved_out_dir()
    out.mkdir(parents=True, exist_ok=True)
    nets = load_networks(args.pretrained)   # hard error when missing
    sar_pool, _ = _load_patch_dir(args.sar_dir)
    opt_pool, _ = _load_patch_dir(args.opt_dir)
    cycle_cfg = CycleConfig(trainer=_trainer_config(cfg),
                            cycle_weight=cfg.cycle_weight,
                            n_unpaired=cfg.n_unpaired,
                            reinit_discriminators=cfg.reinit_discriminators)
    rng = np.random.default_rng(cfg.seed)

    notes = []
    before_reports = after_reports = None
    manifest = load_manifest(args.manifest) if args.manifest else None
    embedder = _get_embedder(cfg, notes) if manifest else None
    samples = cfg.eval_samples or None
    if manifest is not None:
        before_reports = evaluate(nets, manifest, embedder,
                                  samples=samples, repeats=cfg.eval_repeats,
                                  seed=cfg.seed, dataset_id=str(args.manifest))

    def pick_exemplars(pool):
        n = min(cfg.n_unpaired, len(pool))
        idx = rng.choice(len(pool), size=n, replace=False)
        return [pool[i] for i in idx]

    from .training.logio import CYCLE_COLUMNS, TrainLogWriter
    with TrainLogWriter(out / "cycle_log.csv", CYCLE_COLUMNS) as log:
        # direction 1: refine on the SAR pool against optical exemplars
        state, hist_sar, out_opt = refine_unpaired(
            cycle_cfg, nets, sar_pool, pick_exemplars(opt_pool),
            test_modality="sar", log_writer=log)
        # direction 2: continue with the optical pool against SAR exemplars
        state, hist_opt, out_sar = refine_unpaired(
            cycle_cfg, state.nets, opt_pool, pick_exemplars(sar_pool),
            test_modality="opt", log_writer=log)

    for sub, images in (("translated_opt", out_opt), ("translated_sar", out_sar)):
        d = out / sub
        d.mkdir(exist_ok=True)
        for i, img in enumerate(images):
            write_raster(d / f"{i:05d}.npy", img)
    refined_dir = save_checkpoint(out / "refined", state)

    if manifest is not None:
        after_reports = evaluate(state.nets, manifest, embedder,
                                 samples=samples, repeats=cfg.eval_repeats,
                                 seed=cfg.seed, dataset_id=str(args.manifest))
        rows = [f"{'':<12}{'supervised':>14}{'+unsupervised':>16}"]
        for b, a in zip(before_reports, after_reports):
            label = "optical" if b.direction == "sar2opt" else "SAR"
            rows.append(f"{label:<12}{b.fid:>14.4f}{a.fid:>16.4f}")
        table = "\n".join(rows)
        (out / "refine_fid_table.txt").write_text(table + "\n")
        for r in before_reports:
            r.notes.extend(notes + ["stage=supervised"])
            write_report(r, out / "before")
        for r in after_reports:
            r.notes.extend(notes + ["stage=unsupervised-refined"])
            write_report(r, out / "after")
        print(table)
    cfg.save(out / CONFIG_FILENAME)
    print(f"refined checkpoint -> {refined_dir} "
          f"({len(hist_sar)} + {len(hist_opt)} epochs)")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="saropt",
        description="Reciprocal SAR/optical image translation")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--out-dir", dest="out_dir")
        p.add_argument("--seed", type=int)

    p = sub.add_parser("prepare", help="tile, normalise, pair and split rasters")
    add_common(p)
    p.add_argument("--sar", help="SAR raster (amplitude) or quad-pol .npz")
    p.add_argument("--opt", help="optical raster, values 0-255")
    p.add_argument("--pol", choices=("single", "quad"))
    p.add_argument("--patch-size", dest="patch_size", type=int)
    p.add_argument("--test-fraction", dest="test_fraction", type=float)
    p.add_argument("--norm-lambda", dest="norm_lambda", type=float)
    p.add_argument("--despeckle-cmd", dest="despeckle_cmd")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("train", help="supervised adversarial training")
    add_common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--resume", help="checkpoint dir to continue from")
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--replicas", dest="num_replicas", type=int)
    p.add_argument("--patience", dest="early_stop_patience", type=int)
    p.add_argument("--max-epochs", dest="max_epochs", type=int)
    p.add_argument("--base-feature-maps", dest="base_feature_maps", type=int)
    p.add_argument("--num-scales", dest="num_scales", type=int)
    p.add_argument("--disc-channels", dest="disc_channels")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("translate", help="run a checkpoint on a raster")
    add_common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True, help="output path base")
    p.add_argument("--direction", choices=("sar2opt", "opt2sar"),
                   default="sar2opt")
    p.add_argument("--normalize", action="store_true",
                   help="apply amplitude/optical normalisation to raw inputs")
    p.add_argument("--pad", action="store_true",
                   help="reflect-pad to the required multiple and crop back")
    p.add_argument("--norm-lambda", dest="norm_lambda", type=float)
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("evaluate", help="FID/PSNR/SSIM over a test split")
    add_common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--split", default="test")
    p.add_argument("--embedder")
    p.add_argument("--samples", dest="eval_samples", type=int)
    p.add_argument("--repeats", dest="eval_repeats", type=int)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("refine", help="unpaired cycle refinement of a checkpoint")
    add_common(p)
    p.add_argument("--pretrained", required=True,
                   help="supervised checkpoint to start from (required; "
                        "training from scratch is unsupported)")
    p.add_argument("--sar-dir", required=True, help="directory of SAR .npy patches")
    p.add_argument("--opt-dir", required=True, help="directory of optical .npy patches")
    p.add_argument("--manifest", help="paired test manifest for before/after scores")
    p.add_argument("--cycle-weight", dest="cycle_weight", type=float)
    p.add_argument("--n-unpaired", dest="n_unpaired", type=int)
    p.add_argument("--max-epochs", dest="max_epochs", type=int)
    p.add_argument("--patience", dest="early_stop_patience", type=int)
    p.add_argument("--embedder")
    p.set_defaults(func=cmd_refine)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValidationError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as err:
        print(f"data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        if err.snapshot_path:
            print(f"diagnostic snapshot: {err.snapshot_path}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
