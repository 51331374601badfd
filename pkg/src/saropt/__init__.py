"""saropt: reciprocal SAR/optical image translation.

Adversarially trained encoder-decoder translators with cascaded
residual connections, plus the data preparation, cycle-consistent
unpaired refinement, and FID/PSNR/SSIM evaluation around them.
"""

__version__ = "0.1.0"
