from .loader import Batch, batches, iter_epoch, load_pair
from .manifest import (DatasetManifest, ManifestEntry, load_manifest,
                       pair_and_split)
from .normalize import (DEFAULT_LAMBDA, NormalizationParams, normalize_channels,
                        normalize_sar)
from .pauli import (PauliComponents, ScatteringMatrix, pauli_components,
                    pauli_intensities, pauli_rgb)
from .raster import (RasterImage, optical_to_unit, read_raster, run_despeckle,
                     unit_to_uint8, write_raster)
from .tiling import PATCH_SIZE, Tile, tile, untile

__all__ = [
    "Batch", "DatasetManifest", "DEFAULT_LAMBDA", "ManifestEntry",
    "NormalizationParams", "PATCH_SIZE", "PauliComponents", "RasterImage",
    "ScatteringMatrix", "Tile", "batches", "iter_epoch", "load_manifest",
    "load_pair", "normalize_channels", "normalize_sar", "optical_to_unit",
    "pair_and_split", "pauli_components", "pauli_intensities", "pauli_rgb",
    "read_raster", "run_despeckle", "tile", "unit_to_uint8", "untile",
    "write_raster",
]
