from .imageio import read_pfm, read_pgm, write_pfm, write_pgm
from .metrics import psnr, ssim
from .ops import Psf, blur_map, d2_map, degrade, empirical_snr, tv_map, unvec, vec
from .wavelet import default_levels, wavelet_map, wavelet_synthesis

__all__ = [
    "Psf", "blur_map", "d2_map", "default_levels", "degrade", "empirical_snr",
    "psnr", "read_pfm", "read_pgm", "ssim", "tv_map", "unvec", "vec",
    "wavelet_map", "wavelet_synthesis", "write_pfm", "write_pgm",
]
