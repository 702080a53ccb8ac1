import posixpath

from streamsplat.core.filesystem import Filesystem
from streamsplat.formats.cameras import save_camera
from streamsplat.formats.documents import write_document
from streamsplat.formats.images import save_png
from streamsplat.formats.manifest import FrameEntry, SequenceManifest, ViewEntry, save_manifest
from streamsplat.formats.ply import save_frame_gaussians, save_scene
from streamsplat.synthetic.generator import SyntheticScene
from streamsplat.synthetic.spec import spec_to_mapping

MANIFEST = "manifest.yaml"


def write_sequence(scene: SyntheticScene, fs: Filesystem, out_dir: str) -> SequenceManifest:
    """
    Writes the scene as a sequence directory:

        manifest.yaml, spec.yaml, scene.ply
        frames/frame_NNN.yaml|.png|.ply   camera, ground truth image, candidates
        eval/view_NNN.yaml|.png           held out cameras and images
    """
    fs.makedirs(out_dir)

    def path(*parts: str) -> str:
        return posixpath.join(out_dir, *parts)

    write_document(fs, path("spec.yaml"), spec_to_mapping(scene.spec))
    save_scene(fs, path("scene.ply"), scene.gaussians.gaussians())

    frames = []
    for index, frame in enumerate(scene.frames):
        stem = path("frames", f"frame_{index:03d}")
        save_camera(fs, stem + ".yaml", frame.camera)
        save_frame_gaussians(fs, stem + ".ply", frame.current)
        image = None
        if frame.image is not None:
            image = stem + ".png"
            save_png(fs, image, frame.image)
        frames.append(FrameEntry(camera=stem + ".yaml", image=image, gaussians=stem + ".ply"))

    views = []
    for view in scene.eval_views:
        stem = path("eval", view.name)
        save_camera(fs, stem + ".yaml", view.camera)
        image = None
        if view.image is not None:
            image = stem + ".png"
            save_png(fs, image, view.image)
        views.append(ViewEntry(camera=stem + ".yaml", image=image, name=view.name))

    manifest = SequenceManifest(path(MANIFEST), frames, views, scene=path("scene.ply"))
    save_manifest(fs, manifest)
    return manifest
