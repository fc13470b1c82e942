"""Blind video watermarking with a 3D Haar wavelet and spread-spectrum chips."""
from .detector import DetectionTrace, calibrate_null, detect, filter_frames, make_editing_scenario
from .distortion import DistortionSpec, apply
from .io import load_clip, save_clip
from .metrics import bit_accuracy, mssim, psnr, tpsnr
from .spread import Message, WatermarkKey, embed, embed_video, extract, extract_video, gen_key, load_key, save_key
from .video import ColorSpace, VideoClip
from .wavelet import dwt3_forward, dwt3_inverse

__version__ = "0.1.0"

__all__ = [
    "ColorSpace",
    "DetectionTrace",
    "DistortionSpec",
    "Message",
    "VideoClip",
    "WatermarkKey",
    "apply",
    "bit_accuracy",
    "calibrate_null",
    "detect",
    "dwt3_forward",
    "dwt3_inverse",
    "embed",
    "embed_video",
    "extract",
    "extract_video",
    "filter_frames",
    "gen_key",
    "load_clip",
    "load_key",
    "make_editing_scenario",
    "mssim",
    "psnr",
    "save_clip",
    "save_key",
    "tpsnr",
]
