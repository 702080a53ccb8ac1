from streamsplat.synthetic.generator import (
    SyntheticScene,
    candidates_from_scene,
    duplicate_survivors,
    generate_synthetic,
    sample_gaussians,
)
from streamsplat.synthetic.spec import SyntheticSceneSpec, spec_from_mapping
from streamsplat.synthetic.trajectories import linear_trajectory, orbit_trajectory
