"""
Straightforward reference implementations the optimized code is checked against.
"""
from typing import List, Sequence

import numpy as np
from scipy.stats import qmc

from streamsplat.core.obb import OrientedBoundingBox
from streamsplat.core.splatting import ALPHA_MIN, COVARIANCE_BLUR, Splat2D

MIN_TRANSMITTANCE = 1e-4


def naive_render(
    width: int, height: int, splats: Sequence[Splat2D], background: Sequence[float] = (0.0, 0.0, 0.0)
) -> np.ndarray:
    """
    Front-to-back compositing, one splat at a time over the whole image, without tiles or culling.
    """
    ordered = sorted(splats, key=lambda s: (s.depth, s.source_id))
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    rgb = np.zeros((height, width, 3))
    transmittance = np.ones((height, width))

    for s in ordered:
        cov = np.asarray(s.cov2d, dtype=np.float64) + COVARIANCE_BLUR * np.eye(2)
        inv = np.linalg.inv(cov)
        dx, dy = xs - s.mean2d[0], ys - s.mean2d[1]
        power = -0.5 * (inv[0, 0] * dx * dx + 2.0 * inv[0, 1] * dx * dy + inv[1, 1] * dy * dy)
        alpha = s.alpha * np.exp(np.minimum(power, 0.0))
        active = (alpha > ALPHA_MIN) & (transmittance >= MIN_TRANSMITTANCE)
        weight = np.where(active, alpha * transmittance, 0.0)
        rgb += weight[..., None] * np.asarray(s.color)
        transmittance = np.where(active, transmittance * (1.0 - alpha), transmittance)

    rgb += transmittance[..., None] * np.asarray(background, dtype=np.float64)
    return np.clip(rgb, 0.0, 1.0)


def brute_nearest(alphas: Sequence[float], tau: float) -> int:
    for i, alpha in enumerate(alphas):
        if alpha > tau:
            return i
    return -1


def brute_most_contributive(alphas: Sequence[float]) -> int:
    best, best_weight = -1, 0.0
    transmittance = 1.0
    for i, alpha in enumerate(alphas):
        weight = alpha * transmittance
        if weight > best_weight:
            best, best_weight = i, weight
        transmittance *= 1.0 - alpha
    return best


def monte_carlo_intersection(
    a: OrientedBoundingBox, b: OrientedBoundingBox, samples: int, rng: np.random.Generator
) -> float:
    local = rng.uniform(-1.0, 1.0, size=(samples, 3)) * a.half_extents
    points = a.center + local @ a.axes.T
    return a.volume * float(np.mean(b.contains(points)))


def random_box(rng: np.random.Generator, spread: float = 1.0) -> OrientedBoundingBox:
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return OrientedBoundingBox(rng.uniform(-spread, spread, size=3), q, rng.uniform(0.2, 1.5, size=3))


def loop_l_rgb(rendered: Sequence[np.ndarray], target: Sequence[np.ndarray]) -> float:
    total = 0.0
    for a, b in zip(rendered, target):
        h, w, c = a.shape
        view = 0.0
        for y in range(h):
            for x in range(w):
                for k in range(c):
                    view += abs(float(a[y, x, k]) - float(b[y, x, k]))
        total += view / (h * w * c)
    return total


def loop_l_xyz(pred_mu: np.ndarray, gt_mu: np.ndarray) -> float:
    total = 0.0
    for p, g in zip(pred_mu, gt_mu):
        total += sum(abs(float(p[k]) - float(g[k])) for k in range(3))
    return total / len(pred_mu)


def loop_l_sigma(pred_vech: np.ndarray, gt_vech: np.ndarray) -> float:
    total = 0.0
    for p, g in zip(pred_vech, gt_vech):
        total += sum(abs(float(p[k]) - float(g[k])) for k in range(6)) / 6.0
    return total / len(pred_vech)


def loop_weighted_bce(pred: np.ndarray, gt: np.ndarray, lambda_pos: float, lambda_neg: float, eps: float) -> float:
    values: List[float] = []
    for p, y in zip(np.ravel(pred), np.ravel(gt)):
        p = min(max(float(p), eps), 1.0 - eps)
        if y > 0.5:
            values.append(-lambda_pos * float(np.log(p)))
        else:
            values.append(-lambda_neg * float(np.log(1.0 - p)))
    return sum(values) / len(values)


def unit_cube_points(log2_samples: int, seed: int) -> np.ndarray:
    """
    Scrambled Sobol points in [0, 1)^3, reusable for any number of boxes.
    """
    return qmc.Sobol(d=3, scramble=True, seed=seed).random_base2(m=log2_samples)


def quasi_monte_carlo_intersection(
    a: OrientedBoundingBox, b: OrientedBoundingBox, unit_points: np.ndarray
) -> float:
    """
    Like monte_carlo_intersection, but with low discrepancy points mapped into `a`.
    """
    local = (2.0 * unit_points - 1.0) * a.half_extents
    points = a.center + local @ a.axes.T
    return a.volume * float(np.mean(b.contains(points)))
