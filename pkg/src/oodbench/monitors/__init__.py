"""Safety monitors behind a common fit/detect interface."""

from .base import (
    MONITORS,
    AlwaysMonitor,
    Monitor,
    NeverMonitor,
    OdinMonitor,
    OOBMonitor,
    RandomMonitor,
    ReconMonitor,
    SleepMonitor,
    load_monitor,
    make_monitor,
    save_monitor,
)
from .clustering import elbow_k, kmeans
from .odin import OdinState, fit_odin, odin_confidence, odin_detect
from .oob import BoxAbstraction, OOBConfig, fit_oob, oob_detect
from .recon import ReconConfig, ReconState, fit_recon, recon_detect
from .reduction import isomap2, pca2, project

__all__ = [
    "MONITORS",
    "AlwaysMonitor",
    "BoxAbstraction",
    "Monitor",
    "NeverMonitor",
    "OOBConfig",
    "OOBMonitor",
    "OdinMonitor",
    "OdinState",
    "RandomMonitor",
    "ReconConfig",
    "ReconMonitor",
    "ReconState",
    "SleepMonitor",
    "elbow_k",
    "fit_odin",
    "fit_oob",
    "fit_recon",
    "isomap2",
    "kmeans",
    "load_monitor",
    "make_monitor",
    "odin_confidence",
    "odin_detect",
    "oob_detect",
    "pca2",
    "project",
    "recon_detect",
    "save_monitor",
]
