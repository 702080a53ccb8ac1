"""
Scoring functions for the photometric, geometric and mask terms of the streaming objective.
They are evaluated numerically, without gradients.
"""
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from streamsplat.core.errors import ConfigurationError, InvariantError
from streamsplat.core.gaussian import Gaussian, GaussianArrays, covariance_of, vech
from streamsplat.core.gir import GaussianImage, GaussianSource, as_arrays

BCE_EPSILON = 1e-7
REDUCTIONS = ("mean", "sum")

Images = Union[np.ndarray, Sequence[np.ndarray]]


@dataclass(frozen=True)
class LossWeights:
    lambda_sigma: float = 0.5
    lambda_pos: float = 2.0
    lambda_neg: float = 1.0

    def __post_init__(self) -> None:
        if not self.lambda_sigma > 0:
            raise InvariantError(f"lambda_sigma must be positive, got {self.lambda_sigma}")

        if not self.lambda_pos > self.lambda_neg > 0:
            raise InvariantError(
                f"need lambda_pos > lambda_neg > 0, got lambda_pos={self.lambda_pos}, lambda_neg={self.lambda_neg}"
            )


def _views(images: Images) -> np.ndarray:
    array = np.asarray(images, dtype=np.float64)
    return array[None] if array.ndim == 3 else array


def l_rgb(rendered: Images, target: Images, reduction: str = "mean") -> float:
    """
    L1 photometric loss summed over views. With "mean" each view contributes its mean absolute
    per-channel difference, with "sum" its raw sum.
    """
    if reduction not in REDUCTIONS:
        raise ConfigurationError(f"unknown reduction '{reduction}'")

    a, b = _views(rendered), _views(target)
    if a.shape != b.shape:
        raise InvariantError(f"rendered images {a.shape} and targets {b.shape} differ in shape")

    per_view = np.abs(a - b).reshape(a.shape[0], -1)
    if reduction == "sum":
        return float(per_view.sum())

    return float(per_view.mean(axis=1).sum()) if per_view.size else 0.0


@dataclass(frozen=True, eq=False)
class MatchedGaussians:
    """
    Positions (V, 3) and covariance upper triangles (V, 6) of matched Gaussians, row i of the
    prediction corresponding to row i of the target.
    """

    mu: np.ndarray
    vech: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "mu", np.asarray(self.mu, dtype=np.float64).reshape(-1, 3))
        object.__setattr__(self, "vech", np.asarray(self.vech, dtype=np.float64).reshape(-1, 6))
        if self.mu.shape[0] != self.vech.shape[0]:
            raise InvariantError("positions and covariances of matched Gaussians differ in count")

    def __len__(self) -> int:
        return int(self.mu.shape[0])

    @staticmethod
    def from_gaussians(gaussians: Sequence[Gaussian]) -> "MatchedGaussians":
        if not gaussians:
            return MatchedGaussians(np.zeros((0, 3)), np.zeros((0, 6)))

        return MatchedGaussians(
            np.array([g.mu for g in gaussians]),
            np.array([vech(covariance_of(g)) for g in gaussians]),
        )


def _check_matched(pred: MatchedGaussians, gt: MatchedGaussians) -> None:
    if len(pred) != len(gt):
        raise InvariantError(f"cannot compare {len(pred)} predicted with {len(gt)} target Gaussians")


def l_xyz(pred: MatchedGaussians, gt: MatchedGaussians) -> float:
    _check_matched(pred, gt)
    if not len(pred):
        return 0.0

    return float(np.abs(pred.mu - gt.mu).sum(axis=1).mean())


def l_sigma(pred: MatchedGaussians, gt: MatchedGaussians) -> float:
    _check_matched(pred, gt)
    if not len(pred):
        return 0.0

    return float(np.abs(pred.vech - gt.vech).mean(axis=1).mean())


def l_geo(pred: MatchedGaussians, gt: MatchedGaussians, weights: LossWeights = LossWeights()) -> float:
    return l_xyz(pred, gt) + weights.lambda_sigma * l_sigma(pred, gt)


def weighted_bce(
    pred: np.ndarray, gt: np.ndarray, lambda_pos: float, lambda_neg: float, eps: float = BCE_EPSILON
) -> float:
    """
    Mean binary cross entropy where positives (gt = 1) are weighted with lambda_pos and
    negatives with lambda_neg. Predictions are clamped to [eps, 1 - eps].
    """
    p = np.clip(np.asarray(pred, dtype=np.float64), eps, 1.0 - eps)
    y = np.asarray(gt, dtype=np.float64)
    if p.shape != y.shape:
        raise InvariantError(f"mask prediction {p.shape} and target {y.shape} differ in shape")

    if not p.size:
        return 0.0

    bce = -(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))
    weight = np.where(y > 0.5, lambda_pos, lambda_neg)
    return float(np.mean(weight * bce))


def l_mask(pred_mask: np.ndarray, gt_mask: np.ndarray, weights: LossWeights = LossWeights()) -> float:
    """
    Weighted mask loss. `pred_mask` is the predicted probability that a pixel's history Gaussian
    is redundant, `gt_mask` is 1 at redundant pixels.
    """
    return weighted_bce(pred_mask, gt_mask, weights.lambda_pos, weights.lambda_neg)


@dataclass(frozen=True)
class LossParts:
    rgb: float = 0.0
    geo: float = 0.0
    mask: float = 0.0


def l_total(parts: LossParts) -> float:
    return parts.rgb + parts.geo + parts.mask


def match_gir_pixels(
    pred_gir: GaussianImage,
    pred_source: GaussianSource,
    gt_gir: GaussianImage,
    gt_source: GaussianSource,
    camera_rotation: Optional[np.ndarray] = None,
) -> Tuple[MatchedGaussians, MatchedGaussians]:
    """
    Pairs the Gaussians selected at the same pixel of a predicted and a target image.
    Only pixels that are covered in both images are matched. Covariances are compared in
    world space unless `camera_rotation` is given.
    """
    if pred_gir.id_map.shape != gt_gir.id_map.shape:
        raise ConfigurationError("predicted and target Gaussian images differ in size")

    both = pred_gir.valid & gt_gir.valid
    return (
        _matched(pred_gir.id_map[both], as_arrays(pred_source), camera_rotation),
        _matched(gt_gir.id_map[both], as_arrays(gt_source), camera_rotation),
    )


def _matched(ids: np.ndarray, source: GaussianArrays, rotation: Optional[np.ndarray]) -> MatchedGaussians:
    positions = source.index_of(ids)
    if np.any(positions < 0):
        missing = int(ids[np.flatnonzero(positions < 0)[0]])
        raise InvariantError(f"Gaussian {missing} referenced by the image is not in its source")

    chosen = source.take(positions)
    sigma = chosen.covariances()
    if rotation is not None:
        sigma = np.einsum("ij,njk,lk->nil", rotation, sigma, rotation)

    return MatchedGaussians(chosen.mu, vech(sigma))


def gir_geometry_loss(
    pred_gir: GaussianImage,
    pred_source: GaussianSource,
    gt_gir: GaussianImage,
    gt_source: GaussianSource,
    weights: LossWeights = LossWeights(),
) -> float:
    pred, gt = match_gir_pixels(pred_gir, pred_source, gt_gir, gt_source)
    return l_geo(pred, gt, weights)
