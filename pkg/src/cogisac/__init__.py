"""cogisac: cognitive ISAC simulation engine.

Reinforcement-learning-aided integrated sensing and communication at desk
scale: UPA radar geometry, heavy-tailed 2D AR clutter, Wald-type CFAR
detection with single-snapshot covariance estimation, the three-stage
waveform-optimization pipeline, a SARSA agent, and two non-learning
baselines, driven by declarative scenarios.
"""

__version__ = "0.1.0"

from .upa import UpaConfig, SpatialGrid, make_grid, steering, effective_channel
from .detector import DetectorConfig, DetectionFrame, detect_frame, threshold, marcum_q1
from .scenarios import ScenarioSpec, TargetSpec, scenario_library
from .simkit import run_episode, run_monte_carlo

__all__ = [
    "UpaConfig",
    "SpatialGrid",
    "make_grid",
    "steering",
    "effective_channel",
    "DetectorConfig",
    "DetectionFrame",
    "detect_frame",
    "threshold",
    "marcum_q1",
    "ScenarioSpec",
    "TargetSpec",
    "scenario_library",
    "run_episode",
    "run_monte_carlo",
]
