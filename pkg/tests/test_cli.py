"""CLI surface: wiring, idempotence, exit codes, file contracts."""

import shutil
import sys

import numpy as np
import pytest

from saropt.cli import main
from saropt.data import load_manifest


@pytest.fixture(scope="module")
def rasters(tmp_path_factory):
    root = tmp_path_factory.mktemp("rasters")
    rng = np.random.default_rng(0)
    sar = rng.gamma(2.0, 50.0, (64, 96)).astype(np.float32)
    sar[:4, :4] = 0.0  # zero padding region
    opt = rng.uniform(0, 255, (64, 96, 3)).astype(np.float32)
    np.save(root / "sar.npy", sar)
    np.save(root / "opt.npy", opt)
    quad = {k: (rng.normal(size=(64, 96)) + 1j * rng.normal(size=(64, 96)))
            for k in ("hh", "hv", "vh", "vv")}
    np.savez(root / "quad.npz", **quad)
    return root


@pytest.fixture(scope="module")
def prepared(rasters, tmp_path_factory):
    out = tmp_path_factory.mktemp("prep") / "data"
    rc = main(["prepare", "--sar", str(rasters / "sar.npy"),
               "--opt", str(rasters / "opt.npy"), "--out-dir", str(out),
               "--patch-size", "16", "--seed", "7"])
    assert rc == 0
    return out


@pytest.fixture(scope="module")
def trained(prepared, tmp_path_factory):
    out = tmp_path_factory.mktemp("train") / "run"
    rc = main(["train", "--manifest", str(prepared / "manifest.txt"),
               "--out-dir", str(out), "--max-epochs", "1",
               "--base-feature-maps", "2", "--num-scales", "2",
               "--disc-channels", "4,8,8,8,1", "--seed", "0"])
    assert rc == 0
    return out


def test_prepare_splits_and_persists_config(prepared):
    manifest = load_manifest(prepared / "manifest.txt")
    counts = manifest.counts
    assert counts["train"] + counts["test"] == 24  # 4x6 grid of 16px tiles
    assert counts["test"] == round(24 * 0.2)
    assert (prepared / "run_config.cfg").exists()
    patch = np.load(prepared / manifest.entries[0].sar_path)
    assert patch.dtype == np.float32
    assert patch.shape == (16, 16, 1)
    assert patch.min() >= -1.0 and patch.max() <= 1.0


def test_prepare_is_idempotent(rasters, tmp_path):
    args = lambda out: ["prepare", "--sar", str(rasters / "sar.npy"),
                        "--opt", str(rasters / "opt.npy"), "--out-dir", out,
                        "--patch-size", "16", "--seed", "7"]
    assert main(args(str(tmp_path / "a"))) == 0
    assert main(args(str(tmp_path / "b"))) == 0
    a = (tmp_path / "a" / "manifest.txt").read_text()
    b = (tmp_path / "b" / "manifest.txt").read_text()
    assert a == b


def test_prepare_quad_pol_produces_three_channel_sar(rasters, tmp_path):
    out = tmp_path / "quadprep"
    rc = main(["prepare", "--sar", str(rasters / "quad.npz"),
               "--opt", str(rasters / "opt.npy"), "--out-dir", str(out),
               "--pol", "quad", "--patch-size", "16", "--seed", "1"])
    assert rc == 0
    manifest = load_manifest(out / "manifest.txt")
    patch = np.load(out / manifest.entries[0].sar_path)
    assert patch.shape == (16, 16, 3)


def test_despeckle_hook_runs_external_command(rasters, tmp_path):
    out = tmp_path / "despeckled"
    hook = (f"{sys.executable} -c \"import numpy,sys; "
            f"a=numpy.load('{{input}}'); numpy.save('{{output}}', a*0+7.0)\"")
    rc = main(["prepare", "--sar", str(rasters / "sar.npy"),
               "--opt", str(rasters / "opt.npy"), "--out-dir", str(out),
               "--patch-size", "16", "--despeckle-cmd", hook])
    assert rc == 0
    manifest = load_manifest(out / "manifest.txt")
    patch = np.load(out / manifest.entries[0].sar_path)
    # constant-7 image normalises to a constant value everywhere
    assert np.allclose(patch, patch.reshape(-1)[0])


def test_train_writes_checkpoints_log_and_report(trained):
    assert (trained / "epoch_1" / "translator_a.npz").exists()
    assert (trained / "BEST").read_text().strip() == "epoch_1"
    assert (trained / "training_log.csv").exists()
    assert (trained / "compute_report.json").exists()
    assert (trained / "run_config.cfg").exists()


def test_translate_roundtrip(prepared, trained, tmp_path):
    manifest = load_manifest(prepared / "manifest.txt")
    src = prepared / manifest.entries[0].sar_path
    out_base = tmp_path / "out" / "translated"
    rc = main(["translate", "--checkpoint", str(trained), "--input", str(src),
               "--output", str(out_base), "--direction", "sar2opt"])
    assert rc == 0
    img = np.load(out_base.with_suffix(".npy"))
    assert img.shape == (16, 16, 3)
    assert np.abs(img).max() <= 1.0
    assert out_base.with_suffix(".png").exists()


def test_translate_reverse_direction(prepared, trained, tmp_path):
    manifest = load_manifest(prepared / "manifest.txt")
    src = prepared / manifest.entries[0].opt_path
    out_base = tmp_path / "rev"
    rc = main(["translate", "--checkpoint", str(trained), "--input", str(src),
               "--output", str(out_base), "--direction", "opt2sar"])
    assert rc == 0
    assert np.load(out_base.with_suffix(".npy")).shape == (16, 16, 1)


def test_translate_indivisible_input_fails_with_guidance(trained, tmp_path, capsys):
    bad = tmp_path / "bad.npy"
    np.save(bad, np.zeros((18, 16, 1), dtype=np.float32))
    rc = main(["translate", "--checkpoint", str(trained), "--input", str(bad),
               "--output", str(tmp_path / "x")])
    assert rc == 2
    assert "multiple of 4" in capsys.readouterr().err
    # --pad makes the same input work, restoring the original extent
    rc = main(["translate", "--checkpoint", str(trained), "--input", str(bad),
               "--output", str(tmp_path / "x"), "--pad"])
    assert rc == 0
    assert np.load(tmp_path / "x.npy").shape == (18, 16, 3)


def test_translate_larger_raster_fully_convolutional(trained, tmp_path):
    big = tmp_path / "big.npy"
    np.save(big, np.random.default_rng(0).uniform(
        -1, 1, (32, 32, 1)).astype(np.float32))
    rc = main(["translate", "--checkpoint", str(trained), "--input", str(big),
               "--output", str(tmp_path / "big_out")])
    assert rc == 0
    assert np.load(tmp_path / "big_out.npy").shape == (32, 32, 3)


def test_evaluate_writes_reports_and_summary(prepared, trained, tmp_path, capsys):
    out = tmp_path / "eval"
    rc = main(["evaluate", "--checkpoint", str(trained),
               "--manifest", str(prepared / "manifest.txt"),
               "--out-dir", str(out), "--embedder", "random:4:0",
               "--repeats", "2"])
    assert rc == 0
    captured = capsys.readouterr().out
    assert "sar2opt" in captured and "opt2sar" in captured
    assert (out / "metrics_sar2opt.kv").exists()
    assert (out / "metrics_opt2sar.txt").exists()


def test_evaluate_falls_back_to_test_embedder(prepared, trained, tmp_path, capsys):
    rc = main(["evaluate", "--checkpoint", str(trained),
               "--manifest", str(prepared / "manifest.txt"),
               "--out-dir", str(tmp_path / "e2"),
               "--embedder", str(tmp_path / "missing.npz")])
    assert rc == 0
    assert "falling back" in capsys.readouterr().err
    kv = (tmp_path / "e2" / "metrics_sar2opt.kv").read_text()
    assert "note=" in kv and "unavailable" in kv


def test_refine_end_to_end(prepared, trained, tmp_path, capsys):
    upaired = tmp_path / "pools"
    (upaired / "sar").mkdir(parents=True)
    (upaired / "opt").mkdir()
    manifest = load_manifest(prepared / "manifest.txt")
    for i, e in enumerate(manifest.split_entries("train")[:5]):
        shutil.copy(prepared / e.sar_path, upaired / "sar" / f"{i}.npy")
        shutil.copy(prepared / e.opt_path, upaired / "opt" / f"{i}.npy")
    out = tmp_path / "refine"
    rc = main(["refine", "--pretrained", str(trained),
               "--sar-dir", str(upaired / "sar"), "--opt-dir", str(upaired / "opt"),
               "--manifest", str(prepared / "manifest.txt"),
               "--out-dir", str(out), "--max-epochs", "1",
               "--embedder", "random:4:0"])
    assert rc == 0
    assert (out / "refined" / "translator_a.npz").exists()
    assert (out / "refine_fid_table.txt").exists()
    table = capsys.readouterr().out
    assert "supervised" in table and "+unsupervised" in table
    assert (out / "before" / "metrics_sar2opt.kv").exists()
    assert (out / "after" / "metrics_sar2opt.kv").exists()
    assert len(list((out / "translated_opt").glob("*.npy"))) == 5
    log_head = (out / "cycle_log.csv").read_text().splitlines()[0]
    assert log_head.endswith("cycle_loss_sar,cycle_loss_opt")


def test_refine_requires_pretrained_checkpoint(tmp_path, capsys):
    (tmp_path / "sar").mkdir()
    (tmp_path / "opt").mkdir()
    np.save(tmp_path / "sar" / "0.npy", np.zeros((16, 16, 1), dtype=np.float32))
    np.save(tmp_path / "opt" / "0.npy", np.zeros((16, 16, 3), dtype=np.float32))
    rc = main(["refine", "--pretrained", str(tmp_path / "nope"),
               "--sar-dir", str(tmp_path / "sar"),
               "--opt-dir", str(tmp_path / "opt"),
               "--out-dir", str(tmp_path / "o")])
    assert rc == 3


def test_exit_codes_for_bad_inputs(tmp_path, rasters):
    # missing raster -> data error
    assert main(["prepare", "--sar", str(tmp_path / "nothing.npy"),
                 "--opt", str(rasters / "opt.npy"),
                 "--out-dir", str(tmp_path / "x")]) == 3
    # missing required inputs -> config error
    assert main(["prepare", "--out-dir", str(tmp_path / "y")]) == 2
    # bad pol value from a config file -> config error
    bad_cfg = tmp_path / "bad.cfg"
    bad_cfg.write_text("pol = dual\n")
    assert main(["prepare", "--config", str(bad_cfg),
                 "--sar", str(rasters / "sar.npy"),
                 "--opt", str(rasters / "opt.npy"),
                 "--out-dir", str(tmp_path / "z")]) == 2
    # unknown config key -> config error
    bad_key = tmp_path / "badkey.cfg"
    bad_key.write_text("no_such_option = 1\n")
    assert main(["prepare", "--config", str(bad_key),
                 "--sar", str(rasters / "sar.npy"),
                 "--opt", str(rasters / "opt.npy"),
                 "--out-dir", str(tmp_path / "zz")]) == 2


def test_output_root_env_override(rasters, tmp_path, monkeypatch):
    monkeypatch.setenv("SAROPT_OUTPUT_ROOT", str(tmp_path / "root"))
    rc = main(["prepare", "--sar", str(rasters / "sar.npy"),
               "--opt", str(rasters / "opt.npy"), "--out-dir", "rel_out",
               "--patch-size", "16"])
    assert rc == 0
    assert (tmp_path / "root" / "rel_out" / "manifest.txt").exists()


def test_config_file_with_flag_overrides(rasters, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("patch_size = 16\nseed = 3\n# comment\n")
    out = tmp_path / "cfgout"
    rc = main(["prepare", "--config", str(cfg), "--sar", str(rasters / "sar.npy"),
               "--opt", str(rasters / "opt.npy"), "--out-dir", str(out),
               "--seed", "9"])
    assert rc == 0
    saved = (out / "run_config.cfg").read_text()
    assert "seed = 9" in saved          # flag wins
    assert "patch_size = 16" in saved   # file value kept
