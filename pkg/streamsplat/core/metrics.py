import math

import numpy as np
from scipy import ndimage

from streamsplat.core.errors import InvariantError

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _pair(a: np.ndarray, b: np.ndarray) -> tuple:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise InvariantError(f"images differ in shape: {a.shape} vs {b.shape}")

    return a, b


def psnr(a: np.ndarray, b: np.ndarray, data_range: float = 1.0) -> float:
    """
    Peak signal to noise ratio in dB. Identical images give +inf.
    """
    a, b = _pair(a, b)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf

    return 10.0 * math.log10(data_range * data_range / mse)


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    x = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    g /= g.sum()
    return np.outer(g, g)


def ssim(a: np.ndarray, b: np.ndarray, data_range: float = 1.0) -> float:
    """
    Structural similarity with an 11x11 Gaussian window (sigma 1.5), zero padded filtering,
    averaged over pixels and channels.
    """
    a, b = _pair(a, b)
    if a.ndim == 2:
        a, b = a[..., None], b[..., None]

    window = gaussian_window()
    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2

    def blur(x: np.ndarray) -> np.ndarray:
        return ndimage.correlate(x, window, mode="constant", cval=0.0)

    values = []
    for channel in range(a.shape[-1]):
        x, y = a[..., channel], b[..., channel]
        mu_x, mu_y = blur(x), blur(y)
        var_x = blur(x * x) - mu_x * mu_x
        var_y = blur(y * y) - mu_y * mu_y
        cov = blur(x * y) - mu_x * mu_y
        numerator = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
        denominator = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
        values.append(numerator / denominator)

    return float(np.mean(values))


def c_ratio(removed: int, total: int) -> float:
    """
    Fraction of Gaussians removed by compression, 0 when nothing was counted.
    """
    if removed < 0 or total < 0 or removed > total:
        raise InvariantError(f"cannot compute compression ratio of {removed} out of {total}")

    return removed / total if total else 0.0


def format_ratio(ratio: float) -> str:
    return f"{100.0 * ratio:.2f}%"


def format_db(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.2f}"
