from .blob import BlobBackend, BlobConfig, blob_confidence
from .errors import SidecarError
from .export import detections_to_line, export_detections, iter_frames

__all__ = [
    "BlobBackend",
    "BlobConfig",
    "SidecarError",
    "blob_confidence",
    "detections_to_line",
    "export_detections",
    "iter_frames",
]
