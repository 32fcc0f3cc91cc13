"""Configuration-space singularities of the Delta parallel manipulator."""

__version__ = "0.1.0"

from .catalog import closed_form_point, full_catalog, rank_deficiency_search
from .classification import KinematicClass, classify
from .linalg import DEFAULT_TOL, ToleranceConfig
from .mechanism import ParameterSet, PlatformPose, build_crank_slider, build_delta, lift_pose
from .symmetry import ELEMENTS, GroupElement, act, representation
from .witness import certify, coincidence_pattern, crank_slider_witness, witness_paths

__all__ = [
    "DEFAULT_TOL",
    "ELEMENTS",
    "GroupElement",
    "KinematicClass",
    "ParameterSet",
    "PlatformPose",
    "ToleranceConfig",
    "act",
    "build_crank_slider",
    "build_delta",
    "certify",
    "classify",
    "closed_form_point",
    "coincidence_pattern",
    "crank_slider_witness",
    "full_catalog",
    "lift_pose",
    "rank_deficiency_search",
    "representation",
    "witness_paths",
]
