from .embedder import (LinearNpzEmbedder, RandomProjectionEmbedder,
                       adapt_channels, load_embedder, resize_bilinear)
from .evaluate import (MetricReport, evaluate, fid, fid_protocol, summary_table,
                       write_report)
from .quality import PSNR_CAP_DB, gaussian_window, psnr, ssim
from .stats import GaussianStats, frechet_distance, gaussian_stats, sqrtm_psd

__all__ = [
    "GaussianStats", "LinearNpzEmbedder", "MetricReport", "PSNR_CAP_DB",
    "RandomProjectionEmbedder", "adapt_channels", "evaluate", "fid",
    "fid_protocol", "frechet_distance", "gaussian_stats", "gaussian_window",
    "load_embedder", "psnr", "resize_bilinear", "sqrtm_psd", "ssim",
    "summary_table", "write_report",
]
