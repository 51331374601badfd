"""Dataset manifest: pairing, deterministic splitting, persistence.

Manifest text format (documented contract):

    # saropt-manifest v1
    # seed=<int>
    # counts train=<int> test=<int>
    patch_id,sar_path,opt_path,split
    <id>,<relative sar .npy>,<relative opt .npy>,train|test
    ...

Paths are stored relative to the manifest file.  Patches themselves
are single .npy files, (H, W, C) float32 in [-1, 1].
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import DataError, PairingError, ValidationError

TEST_FRACTION = 0.2


@dataclass(frozen=True)
class ManifestEntry:
    patch_id: str
    sar_path: str
    opt_path: str
    split: str


@dataclass
class DatasetManifest:
    entries: list
    seed: int
    root: Path = Path(".")

    def split_entries(self, split):
        return [e for e in self.entries if e.split == split]

    @property
    def counts(self):
        return {s: len(self.split_entries(s)) for s in ("train", "test")}

    def resolve(self, relpath) -> Path:
        return Path(self.root) / relpath

    def save(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        counts = self.counts
        with open(path, "w") as fh:
            fh.write("# saropt-manifest v1\n")
            fh.write(f"# seed={self.seed}\n")
            fh.write(f"# counts train={counts['train']} test={counts['test']}\n")
            fh.write("patch_id,sar_path,opt_path,split\n")
            for e in self.entries:
                fh.write(f"{e.patch_id},{e.sar_path},{e.opt_path},{e.split}\n")
        return path


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    if not path.exists():
        raise DataError(f"manifest not found: {path}")
    seed = 0
    entries = []
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    body = []
    for ln in lines:
        if ln.startswith("# seed="):
            seed = int(ln.split("=", 1)[1])
        elif ln.startswith("#") or not ln.strip():
            continue
        else:
            body.append(ln)
    if not body or body[0].split(",") != ["patch_id", "sar_path", "opt_path", "split"]:
        raise DataError(f"malformed manifest header in {path}")
    for ln in body[1:]:
        pid, sar, opt, split = ln.split(",")
        if split not in ("train", "test"):
            raise DataError(f"bad split tag {split!r} in {path}")
        entries.append(ManifestEntry(pid, sar, opt, split))
    return DatasetManifest(entries=entries, seed=seed, root=path.parent)


def pair_and_split(sar_tiles, opt_tiles, test_fraction=TEST_FRACTION, seed=0,
                   path_of=None) -> DatasetManifest:
    """Pair tiles on identical grid coordinates and split 80/20.

    ``sar_tiles`` / ``opt_tiles`` are sequences of objects with
    ``row``, ``col`` and ``patch_id`` attributes.  ``path_of(tile,
    modality)`` maps a tile to its stored patch path; defaults to
    ``patches/<patch_id>_<modality>.npy``.
    """
    if not 0.0 <= test_fraction < 1.0:
        raise ValidationError(f"test_fraction must be in [0, 1), got {test_fraction}")
    sar_by_coord = {(t.row, t.col): t for t in sar_tiles}
    opt_by_coord = {(t.row, t.col): t for t in opt_tiles}
    only_sar = sorted(set(sar_by_coord) - set(opt_by_coord))
    only_opt = sorted(set(opt_by_coord) - set(sar_by_coord))
    if only_sar or only_opt:
        bad = ([sar_by_coord[c].patch_id for c in only_sar]
               + [opt_by_coord[c].patch_id for c in only_opt])
        raise PairingError(
            f"tile sets cover different coordinates ({len(bad)} unmatched)",
            offending_ids=bad)
    if path_of is None:
        def path_of(t, modality):
            return f"patches/{t.patch_id}_{modality}.npy"

    coords = sorted(sar_by_coord)
    n = len(coords)
    if n == 0:
        raise ValidationError("no tiles to pair")
    n_test = int(round(n * test_fraction))
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    test_idx = set(order[:n_test].tolist())
    entries = []
    for i, coord in enumerate(coords):
        s, o = sar_by_coord[coord], opt_by_coord[coord]
        entries.append(ManifestEntry(
            patch_id=s.patch_id,
            sar_path=path_of(s, "sar"),
            opt_path=path_of(o, "opt"),
            split="test" if i in test_idx else "train"))
    return DatasetManifest(entries=entries, seed=seed)
