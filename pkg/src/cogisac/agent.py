"""SARSA learning loop pieces and the two non-learning baselines.

The state is the (clipped) detection count plus one; the action index j
selects the top-j bins ranked by the Wald statistic, which feed the
covariance design stage. Action selection follows a quasi epsilon-greedy
policy with target recovery: when the detection count drops, the greedy
action of the previous state is forced; otherwise exploration is restricted
to actions covering at least the current count.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .detector import DetectionFrame, marcum_q1
from .upa import SpatialGrid, UpaConfig, steering_matrix
from .waveform import design_covariance, isotropic_covariance


@dataclass
class QTable:
    """Tabular state-action values, (T~ + 1) states by (T~ + 1) actions."""

    t_max: int
    learning_rate: float = 0.8
    discount: float = 0.8
    epsilon: float = 0.5
    values: np.ndarray = field(default=None)

    def __post_init__(self):
        for name in ("learning_rate", "discount", "epsilon"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.values is None:
            self.values = np.zeros((self.t_max + 1, self.t_max + 1))

    def row(self, state: int) -> np.ndarray:
        """Action values of a 1-based state."""
        return self.values[state - 1]


@dataclass(frozen=True)
class AgentState:
    """1-based state s = clipped detection count + 1."""

    s: int
    count: int


@dataclass(frozen=True)
class ActionSelection:
    """Chosen action index j and the top-j bin indices it resolves to."""

    j: int
    bin_set: tuple[int, ...]


def extract_state(frame: DetectionFrame, t_max: int) -> AgentState:
    """Map the detection count to the agent state, saturating at t_max."""
    count = min(frame.count, t_max)
    return AgentState(s=count + 1, count=count)


def select_action(
    q: QTable,
    s_prev: AgentState,
    s_next: AgentState,
    frame: DetectionFrame,
    rng: np.random.Generator,
) -> ActionSelection:
    """Quasi epsilon-greedy with target recovery.

    Count decreased: greedy on the previous state's row (recovery).
    Otherwise: with probability epsilon a uniform action among those covering
    at least the current count, else greedy on the new state's row.
    """
    if s_next.count < s_prev.count:
        j = int(np.argmax(q.row(s_prev.s)))
    elif rng.random() < q.epsilon:
        j = int(rng.integers(s_next.count, q.t_max + 1))
    else:
        j = int(np.argmax(q.row(s_next.s)))
    return ActionSelection(j=j, bin_set=tuple(int(m) for m in frame.top_bins(j)))


def compute_reward(frame: DetectionFrame, eta: float | None = None, target_set=None) -> float:
    """Sum of asymptotic detection probabilities over the surrogate target set
    minus the sum over its complement.

    By default the surrogate set is the thresholded bins of the frame; an
    oracle set (true target bins) can be injected for validation.
    """
    eta = frame.eta if eta is None else eta
    in_target = np.zeros(frame.n_bins, dtype=bool)
    if target_set is None:
        in_target[:] = frame.decisions
    else:
        in_target[np.asarray(list(target_set), dtype=int)] = True
    pd = marcum_q1(np.sqrt(frame.kappa()), np.sqrt(eta))
    return float(pd[in_target].sum() - pd[~in_target].sum())


def sarsa_update(
    q: QTable, s: AgentState, a: int, reward: float, s_next: AgentState, a_next: int
) -> QTable:
    """One on-policy temporal-difference update; touches exactly one cell."""
    cur = q.values[s.s - 1, a]
    target = reward + q.discount * q.values[s_next.s - 1, a_next]
    q.values[s.s - 1, a] = cur + q.learning_rate * (target - cur)
    return q


def design_steering_matrix(upa: UpaConfig, grid: SpatialGrid) -> np.ndarray:
    """Per-bin steering vectors in the beampattern frame, shape (M, N_t).

    The covariance design maximizes quadratic forms a^H R a, while the echo
    propagates through a_t^T X; the vector that makes the designed beam
    physically illuminate a bin is therefore the conjugated transmit
    steering. All bin-to-covariance paths go through this matrix.
    """
    return np.conj(steering_matrix(upa, grid, "tx"))


def act_to_covariance(
    selection: ActionSelection,
    design_steerings: np.ndarray,
    p_t: float,
) -> np.ndarray:
    """Resolve an action to a transmit covariance.

    j >= 1 designs the rank-one covariance over the selected bins' steering
    vectors (rows of `design_steerings`); the empty action falls back to the
    isotropic covariance so every action stays executable.
    """
    n_t = design_steerings.shape[1]
    if selection.j == 0 or not selection.bin_set:
        return isotropic_covariance(n_t, p_t)
    return design_covariance([design_steerings[m] for m in selection.bin_set], p_t)


def nrl_policy(frame: DetectionFrame, t_max: int) -> ActionSelection:
    """Adaptive non-learning baseline: always beam at the thresholded bins."""
    j = min(frame.count, t_max)
    return ActionSelection(j=j, bin_set=tuple(int(m) for m in frame.top_bins(j)))


def orthogonal_policy() -> ActionSelection:
    """Static baseline: the empty action, resolving to the isotropic covariance."""
    return ActionSelection(j=0, bin_set=())
