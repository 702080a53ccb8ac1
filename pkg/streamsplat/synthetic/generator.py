from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from streamsplat.core.camera import CameraModel
from streamsplat.core.errors import SpecError
from streamsplat.core.gaussian import GaussianArrays
from streamsplat.core.gir import build_gir_most_contributive
from streamsplat.core.pipeline import EvalView, FrameInput
from streamsplat.core.pixelmap import PixelGaussians
from streamsplat.core.rasterizer import Rasterizer
from streamsplat.core.splatting import project_arrays
from streamsplat.core.store import GlobalGaussianStore
from streamsplat.synthetic.spec import SyntheticSceneSpec
from streamsplat.synthetic.trajectories import eval_positions, frame_positions, trajectory_cameras

MAX_SAMPLING_ATTEMPTS = 1000


@dataclass(frozen=True, eq=False)
class SyntheticScene:
    """
    Ground truth Gaussians (ids and origins are their indices: base Gaussians first, then the
    injected duplicates), the base index each duplicate was copied from, and the frames and
    eval views rendered from it.
    """

    spec: SyntheticSceneSpec
    gaussians: GaussianArrays
    duplicate_of: np.ndarray
    frames: List[FrameInput]
    eval_views: List[EvalView]

    @property
    def base_count(self) -> int:
        return self.spec.gaussian_count


def _positions(rng: np.random.Generator, spec: SyntheticSceneSpec) -> np.ndarray:
    """
    Uniform positions in the scene cube, no two closer than `min_separation`.
    """
    half = spec.extent / 2.0
    accepted = np.zeros((spec.gaussian_count, 3))
    for i in range(spec.gaussian_count):
        for _ in range(MAX_SAMPLING_ATTEMPTS):
            p = rng.uniform(-half, half, size=3)
            if i == 0 or np.min(np.linalg.norm(accepted[:i] - p, axis=1)) >= spec.min_separation:
                accepted[i] = p
                break
        else:
            raise SpecError(f"cannot place {spec.gaussian_count} Gaussians {spec.min_separation} apart")

    return accepted


def _rotations(rng: np.random.Generator, count: int) -> np.ndarray:
    q = rng.normal(size=(count, 4))
    norms = np.linalg.norm(q, axis=1, keepdims=True)
    q = q / np.where(norms > 0, norms, 1.0)
    q[norms[:, 0] == 0] = (1.0, 0.0, 0.0, 0.0)
    return q


def sample_gaussians(
    spec: SyntheticSceneSpec, rng: Optional[np.random.Generator] = None
) -> Tuple[GaussianArrays, np.ndarray]:
    """
    Base Gaussians followed by `spec.duplicate_count` jittered copies of randomly chosen ones.
    Also returns the base index of every copy.
    """
    rng = rng or np.random.default_rng(spec.seed)
    n = spec.gaussian_count
    mu = _positions(rng, spec)
    scale = rng.uniform(*spec.scale_range, size=(n, 3))
    rotation = _rotations(rng, n)
    color = rng.uniform(0.0, 1.0, size=(n, 3))
    alpha = rng.uniform(*spec.alpha_range, size=n)

    duplicate_of = np.sort(rng.choice(n, size=spec.duplicate_count, replace=False)) if n else np.zeros(0, int)
    jitter = rng.normal(0.0, spec.duplicate_jitter, size=(len(duplicate_of), 3))

    total = n + len(duplicate_of)
    gaussians = GaussianArrays(
        ids=np.arange(total, dtype=np.int64),
        mu=np.concatenate([mu, mu[duplicate_of] + jitter]),
        scale=np.concatenate([scale, scale[duplicate_of]]),
        rotation=np.concatenate([rotation, rotation[duplicate_of]]),
        color=np.concatenate([color, color[duplicate_of]]),
        alpha=np.concatenate([alpha, alpha[duplicate_of]]),
        origin=np.arange(total, dtype=np.int64),
    )
    return gaussians, duplicate_of.astype(np.int64)


def candidates_from_scene(
    gaussians: GaussianArrays, camera: CameraModel, rasterizer: Optional[Rasterizer] = None
) -> PixelGaussians:
    """
    Per-pixel candidates of one frame: every Gaussian that is the most contributive one at
    some pixel of the view becomes a candidate at the pixel where its opacity is highest
    (the first such pixel in row-major order on ties). Candidates keep their source index
    as origin.
    """
    gir = build_gir_most_contributive(gaussians, camera, rasterizer)
    valid = gir.valid.reshape(-1)
    pixels = np.flatnonzero(valid)
    ids = gir.id_map.reshape(-1)[pixels]
    alpha = gir.alpha.reshape(-1)[pixels].astype(np.float64)

    order = np.lexsort((pixels, -alpha, ids))
    _, first = np.unique(ids[order], return_index=True)
    chosen_pixels = pixels[order][first]
    chosen = gaussians.take(gaussians.index_of(ids[order][first]))

    width, height = camera.width, camera.height
    candidates = []
    for k, flat in enumerate(chosen_pixels.tolist()):
        candidates.append(((flat % width, flat // width), chosen.gaussian(k).unassigned()))

    return PixelGaussians.from_candidates(width, height, candidates)


def generate_synthetic(spec: SyntheticSceneSpec, rasterizer: Optional[Rasterizer] = None) -> SyntheticScene:
    """
    Samples the scene and renders frames and eval views. All randomness comes from one
    generator seeded with `spec.seed`.
    """
    rasterizer = rasterizer or Rasterizer()
    rng = np.random.default_rng(spec.seed)
    gaussians, duplicate_of = sample_gaussians(spec, rng)

    def render(camera: CameraModel) -> np.ndarray:
        return rasterizer.render(camera, project_arrays(camera, gaussians)).rgb

    frames = [
        FrameInput(camera, candidates_from_scene(gaussians, camera, rasterizer), render(camera))
        for camera in trajectory_cameras(spec, frame_positions(spec))
    ]
    eval_views = [
        EvalView(camera, render(camera), f"view_{j:03d}")
        for j, camera in enumerate(trajectory_cameras(spec, eval_positions(spec)))
    ]

    return SyntheticScene(spec, gaussians, duplicate_of, frames, eval_views)


def duplicate_survivors(store: GlobalGaussianStore, scene: SyntheticScene) -> int:
    """
    Number of surplus live copies among the injected duplicate pairs: for every pair of a base
    Gaussian and its duplicate, the live Gaussians originating from either of them beyond the first.
    """
    if not len(scene.duplicate_of):
        return 0

    origins = store.snapshot().origin
    counts = np.bincount(origins[origins >= 0], minlength=len(scene.gaussians))
    n = scene.base_count
    pair_counts = counts[scene.duplicate_of] + counts[n : n + len(scene.duplicate_of)]
    return int(np.maximum(pair_counts - 1, 0).sum())
