from .base import FeatureMap, apply_window, extract_gray, to_gray
from .cn import CNTable, extract_cn, load_cn_table
from .flow import FlowField, flow_energy, flow_to_motion_image, horn_schunck_flow
from .fmap import (
    BadMagicError,
    FmapError,
    FmapHeader,
    FrameIndexError,
    TruncatedFileError,
    UnsupportedVersionError,
    load_fmap,
    read_fmap_header,
    write_fmap,
)
from .hog import extract_hog
from .patch import sample_patch

__all__ = [
    "FeatureMap",
    "apply_window",
    "extract_gray",
    "to_gray",
    "CNTable",
    "extract_cn",
    "load_cn_table",
    "FlowField",
    "flow_energy",
    "flow_to_motion_image",
    "horn_schunck_flow",
    "FmapError",
    "BadMagicError",
    "UnsupportedVersionError",
    "TruncatedFileError",
    "FrameIndexError",
    "FmapHeader",
    "read_fmap_header",
    "write_fmap",
    "load_fmap",
    "extract_hog",
    "sample_patch",
]
