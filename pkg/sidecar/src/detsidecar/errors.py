class SidecarError(Exception):
    """Unreadable input, missing weights, or an empty frame source."""
