"""Continuous planar reef-monitoring environment.

A kinematic AUV moves under a constant water current over a field of 500
bottom-dwelling organisms (125 per type).  A perfect detector reports
per-step counts of organisms within range, bucketed by body-frame quadrant
and type; rewards pay for first-time detections of interesting types and
punish leaving the search area.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import REEF_ORGANISM_TYPES, StepOutcome, TaskSpec, ValidationError

REEF_ACTIONS = ("forward", "turn_right", "turn_left", "backward", "noop")
FORWARD, TURN_RIGHT, TURN_LEFT, BACKWARD, NOOP = range(5)

# Quadrant-major detector layout: [FR, FL, BR, BL] x [red, blue, green, black].
QUADRANTS = ("FR", "FL", "BR", "BL")
N_DETECTOR_BINS = len(QUADRANTS) * len(REEF_ORGANISM_TYPES)

ORGANISMS_PER_TYPE = 125

REEF_STATE_DIM = 2 + 2 + 2 + 1 + 4 + N_DETECTOR_BINS + N_DETECTOR_BINS  # 43

TRAJECTORY_HEADER = ("t,x,y,theta,vx,vy,action,reward,"
                     "p_red,p_blue,p_green,p_black")


@dataclass(frozen=True)
class ReefConfig:
    """Kinematics, detector, reward, and normalization knobs.

    The AUV model is a first-order velocity relaxation toward the commanded
    body-frame thrust plus the water current, stepped at 2 Hz.
    """

    dt: float = 0.5                   # s per control step (2 Hz)
    command_speed: float = 1.0        # m/s thrust command magnitude
    turn_rate_deg: float = 30.0       # deg/s yaw rate of turn actions
    velocity_mix: float = 0.7         # v' = mix*v + (1-mix)*(thrust+current)
    detection_radius: float = 2.5     # m, detector range
    boundary_radius: float = 10.0     # m, failure distance from start
    horizon: int = 600                # control steps per episode
    reward_success: float = 1000.0
    reward_fail: float = -1000.0
    reward_new: float = 1.0           # per normalized interesting detection
    reward_penalty: float = 0.1       # per-step movement regularizer
    placement_radius_min: float = 2.0
    placement_radius_max: float = 9.0
    velocity_scale: float = 2.0       # state normalization divisor for v
    count_scale: float = 10.0         # state normalization divisor for l, n

    def __post_init__(self) -> None:
        for name in ("dt", "command_speed", "detection_radius", "boundary_radius",
                     "velocity_scale", "count_scale"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"reef config {name} must be positive")
        if not 0.0 <= self.velocity_mix < 1.0:
            raise ValidationError("velocity_mix must be in [0, 1)")
        if self.horizon < 1:
            raise ValidationError("horizon must be at least 1")


@dataclass
class OrganismField:
    """Positions, types, and discovery latches of all organisms."""

    positions: np.ndarray            # (N, 2) float64
    types: np.ndarray                # (N,) int64 in [0, 4)
    discovered: np.ndarray           # (N,) bool, monotone false -> true

    def undiscovered_per_type(self) -> np.ndarray:
        counts = np.zeros(4, dtype=np.int64)
        np.add.at(counts, self.types[~self.discovered], 1)
        return counts


@dataclass
class ReefState:
    """AUV pose/velocity plus detector and progress summaries.

    ``heading`` is the unit vector (cos, sin) of the yaw angle; ``remaining``
    is the per-type fraction of organisms still undiscovered; ``local`` and
    ``local_new`` are the quadrant-major detector count vectors.
    """

    position: np.ndarray             # (2,) m
    heading: np.ndarray              # (2,) unit vector
    velocity: np.ndarray             # (2,) m/s
    elapsed: float                   # s
    remaining: np.ndarray            # (4,) in [0, 1]
    local: np.ndarray                # (16,) counts
    local_new: np.ndarray            # (16,) counts


@dataclass
class StepOutcome:
    next_state: ReefState
    reward: float
    terminated: bool
    truncated: bool
    info: dict = field(default_factory=dict)


def sample_organisms(rng: np.random.Generator, config: ReefConfig) -> OrganismField:
    """Place 125 organisms per type, area-uniform in per-type 90-degree
    annular sectors around the start position."""
    r_min2 = config.placement_radius_min ** 2
    r_max2 = config.placement_radius_max ** 2
    positions = np.empty((4 * ORGANISMS_PER_TYPE, 2), dtype=np.float64)
    types = np.empty(4 * ORGANISMS_PER_TYPE, dtype=np.int64)
    for t in range(4):
        base = t * ORGANISMS_PER_TYPE
        angles = rng.uniform(t * math.pi / 2, (t + 1) * math.pi / 2,
                             size=ORGANISMS_PER_TYPE)
        radii = np.sqrt(rng.uniform(r_min2, r_max2, size=ORGANISMS_PER_TYPE))
        positions[base:base + ORGANISMS_PER_TYPE, 0] = radii * np.cos(angles)
        positions[base:base + ORGANISMS_PER_TYPE, 1] = radii * np.sin(angles)
        types[base:base + ORGANISMS_PER_TYPE] = t
    discovered = np.zeros(4 * ORGANISMS_PER_TYPE, dtype=bool)
    return OrganismField(positions=positions, types=types, discovered=discovered)


def thrust_command(action: int, heading: np.ndarray, command_speed: float) -> np.ndarray:
    """Body-frame thrust mapped to the world frame.

    Turns keep forward thrust on (the vehicle steers, it does not rotate in
    place); noop coasts.
    """
    if action in (FORWARD, TURN_RIGHT, TURN_LEFT):
        return command_speed * heading
    if action == BACKWARD:
        return -command_speed * heading
    return np.zeros(2, dtype=np.float64)


def apply_dynamics(
    state: ReefState,
    action: int,
    current: np.ndarray,
    dt: float,
    config: ReefConfig,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """First-order velocity relaxation and yaw update.

    v' = mix*v + (1-mix)*(thrust(action, heading) + current), thrust taken
    along the pre-update heading; x' = x + v'*dt.
    """
    if not dt > 0:
        raise ValidationError("dt must be positive")
    mix = config.velocity_mix
    thrust = thrust_command(action, state.heading, config.command_speed)
    velocity = mix * state.velocity + (1.0 - mix) * (thrust + current)
    position = state.position + velocity * dt

    heading = state.heading
    if action in (TURN_RIGHT, TURN_LEFT):
        dtheta = math.radians(config.turn_rate_deg) * dt
        if action == TURN_RIGHT:
            dtheta = -dtheta
        c, s = math.cos(dtheta), math.sin(dtheta)
        heading = np.array([c * heading[0] - s * heading[1],
                            s * heading[0] + c * heading[1]])
    return position, heading, velocity


def detect(
    position: np.ndarray,
    heading: np.ndarray,
    organisms: OrganismField,
    detection_radius: float,
    mark: bool = True,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Detector oracle: count organisms within range per (quadrant, type).

    Quadrants are taken in the body frame (forward axis = heading, left
    axis = heading rotated +90 deg): front means a non-negative forward
    component, right a non-positive left component.  ``local`` counts all
    in-range organisms, ``local_new`` only first-time discoveries, which
    are then latched as discovered when ``mark`` is set.
    """
    if not detection_radius > 0:
        raise ValidationError("detection radius must be positive")
    offsets = organisms.positions - position
    dist2 = offsets[:, 0] ** 2 + offsets[:, 1] ** 2
    in_range = dist2 < detection_radius ** 2

    fwd = offsets[:, 0] * heading[0] + offsets[:, 1] * heading[1]
    # left axis = heading rotated +90deg = (-heading_y, heading_x)
    left = -offsets[:, 0] * heading[1] + offsets[:, 1] * heading[0]
    quadrant = np.where(fwd >= 0.0,
                        np.where(left <= 0.0, 0, 1),
                        np.where(left <= 0.0, 2, 3))
    bins = quadrant * 4 + organisms.types

    local = np.bincount(bins[in_range], minlength=N_DETECTOR_BINS).astype(np.float64)
    new_mask = in_range & ~organisms.discovered
    local_new = np.bincount(bins[new_mask], minlength=N_DETECTOR_BINS).astype(np.float64)
    new_ids = np.flatnonzero(new_mask)
    if mark:
        organisms.discovered[new_mask] = True
    return local, local_new, new_ids


def new_detections_per_type(local_new: np.ndarray) -> np.ndarray:
    """Sum the quadrant-major 16-vector down to per-type counts."""
    return local_new.reshape(len(QUADRANTS), len(REEF_ORGANISM_TYPES)).sum(axis=0)


def reward(
    prev: ReefState,
    nxt: ReefState,
    local_new: np.ndarray,
    task: TaskSpec,
    start_position: np.ndarray,
    config: ReefConfig,
) -> float:
    """Context-dependent reward for one transition.

    Success (all interesting types fully discovered) pays +1000 and is
    checked before the boundary failure of -1000; ordinary steps pay the
    interesting-detection count normalized by the number of interesting
    types, minus the per-step movement regularizer.
    """
    flags = np.asarray(task.interest_flags, dtype=np.float64)
    if float(nxt.remaining @ flags) == 0.0:
        return config.reward_success
    offset = nxt.position - start_position
    if math.hypot(offset[0], offset[1]) >= config.boundary_radius:
        return config.reward_fail
    interesting_new = float(new_detections_per_type(local_new) @ flags)
    return interesting_new / float(flags.sum()) * config.reward_new - config.reward_penalty


def state_vector(state: ReefState, config: ReefConfig) -> np.ndarray:
    """Fixed-layout 43-vector with per-feature affine normalization.

    Blocks: position/boundary_radius, heading, velocity/velocity_scale,
    elapsed/(horizon*dt), remaining fractions, counts/count_scale.
    """
    out = np.empty(REEF_STATE_DIM, dtype=np.float64)
    out[0:2] = state.position / config.boundary_radius
    out[2:4] = state.heading
    out[4:6] = state.velocity / config.velocity_scale
    out[6] = state.elapsed / (config.horizon * config.dt)
    out[7:11] = state.remaining
    out[11:27] = state.local / config.count_scale
    out[27:43] = state.local_new / config.count_scale
    return out


class ReefEnv:
    """One reef episode at a time; independent instances are isolated."""

    n_actions = len(REEF_ACTIONS)

    def __init__(self, config: ReefConfig | None = None):
        self.config = config or ReefConfig()
        self.task: TaskSpec | None = None
        self.organisms: OrganismField | None = None
        self.state: ReefState | None = None
        self.start_position = np.zeros(2, dtype=np.float64)
        self._steps = 0
        self._done = False

    @property
    def done(self) -> bool:
        return self._done

    def reset(self, task: TaskSpec, seed: int) -> ReefState:
        """Start an episode: fresh organism layout, AUV at the origin.

        Nothing counts as discovered at reset; the first detector pass
        happens on the first step.
        """
        if task.family != "reef":
            raise ValidationError(f"reef env cannot run task family {task.family!r}")
        rng = np.random.default_rng(seed)
        self.task = task
        self.organisms = sample_organisms(rng, self.config)
        self.state = ReefState(
            position=np.zeros(2, dtype=np.float64),
            heading=np.array([1.0, 0.0]),
            velocity=np.zeros(2, dtype=np.float64),
            elapsed=0.0,
            remaining=np.ones(4, dtype=np.float64),
            local=np.zeros(N_DETECTOR_BINS, dtype=np.float64),
            local_new=np.zeros(N_DETECTOR_BINS, dtype=np.float64),
        )
        self._steps = 0
        self._done = False
        return self.state

    def step(self, action: int) -> StepOutcome:
        if self.state is None or self.task is None or self.organisms is None:
            raise RuntimeError("step called before reset")
        if self._done:
            raise RuntimeError("episode finished; call reset")
        if not 0 <= action < self.n_actions:
            raise ValidationError(f"invalid reef action index {action}")
        cfg = self.config
        prev = self.state
        current = np.asarray(self.task.current[:2], dtype=np.float64)
        position, heading, velocity = apply_dynamics(prev, action, current, cfg.dt, cfg)
        local, local_new, _ = detect(position, heading, self.organisms,
                                     cfg.detection_radius)
        remaining = self.organisms.undiscovered_per_type() / ORGANISMS_PER_TYPE
        nxt = ReefState(
            position=position,
            heading=heading,
            velocity=velocity,
            elapsed=prev.elapsed + cfg.dt,
            remaining=remaining.astype(np.float64),
            local=local,
            local_new=local_new,
        )
        r = reward(prev, nxt, local_new, self.task, self.start_position, cfg)
        self._steps += 1

        flags = np.asarray(self.task.interest_flags, dtype=np.float64)
        success = float(nxt.remaining @ flags) == 0.0
        offset = nxt.position - self.start_position
        failure = (not success) and math.hypot(offset[0], offset[1]) >= cfg.boundary_radius
        terminated = success or failure
        truncated = (not terminated) and self._steps >= cfg.horizon
        self.state = nxt
        self._done = terminated or truncated
        return StepOutcome(
            next_state=nxt,
            reward=r,
            terminated=terminated,
            truncated=truncated,
            info={
                "success": success,
                "failure": failure,
                "new_detections_per_type": new_detections_per_type(local_new),
            },
        )


def trajectory_row(state: ReefState, action: int, reward_value: float) -> str:
    """One CSV record per step, matching TRAJECTORY_HEADER."""
    theta = math.atan2(state.heading[1], state.heading[0])
    fields = [state.elapsed, state.position[0], state.position[1], theta,
              state.velocity[0], state.velocity[1]]
    cells = [repr(float(v)) for v in fields]
    cells.append(str(action))
    cells.append(repr(float(reward_value)))
    cells.extend(repr(float(p)) for p in state.remaining)
    return ",".join(cells)
