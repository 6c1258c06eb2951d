from src.repository.checkpoint import Checkpoint, save_checkpoint, load_checkpoint
from src.repository.manifest import load_manifest, write_manifest
from src.repository.images import decode_image, decode_mask, encode_image
from src.repository.artifacts import ArtifactStore, write_json, read_json

__all__ = [
    "Checkpoint",
    "save_checkpoint",
    "load_checkpoint",
    "load_manifest",
    "write_manifest",
    "decode_image",
    "decode_mask",
    "encode_image",
    "ArtifactStore",
    "write_json",
    "read_json"
]
