"""Domain types, context encoding, task catalogs, and seed derivation.

Two task families share one context-indexed MDP interface:

* ``reef`` -- continuous planar AUV search under a constant water current,
  with a 4-bit organism-interest flag vector.
* ``grid`` -- discrete gridworld with a 6-way color one-hot context.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

REEF_ORGANISM_TYPES = ("red", "blue", "green", "black")
GRID_COLORS = ("red", "blue", "green", "yellow", "purple", "grey")

GRID_TRAIN_COLORS = ("red", "green", "yellow", "grey")
GRID_TEST_COLORS = ("blue", "purple")

# World frame: +x = east, +y = north, z up.  Planar dynamics keep z at 0.
_SQ2 = 1.0 / math.sqrt(2.0)
REEF_TRAIN_DIRECTIONS = (
    ("north", (0.0, 1.0)),
    ("east", (1.0, 0.0)),
    ("south", (0.0, -1.0)),
    ("west", (-1.0, 0.0)),
    ("none", (0.0, 0.0)),
)
REEF_TEST_DIRECTIONS = (
    ("northeast", (_SQ2, _SQ2)),
    ("southeast", (_SQ2, -_SQ2)),
    ("northwest", (-_SQ2, _SQ2)),
    ("southwest", (-_SQ2, -_SQ2)),
)


class ValidationError(ValueError):
    """Raised for malformed tasks, configs, or vector layouts."""


@dataclass(frozen=True)
class TaskSpec:
    """One MDP of the contextual family, identified by its context.

    ``current`` is a world-frame 3-vector in m/s (z pinned to 0 by the
    planar dynamics); ``interest_flags`` is a 4-bit vector for reef tasks
    and a 6-way color one-hot for grid tasks.
    """

    family: str
    name: str
    current: tuple[float, float, float]
    interest_flags: tuple[int, ...]
    split: str

    def __post_init__(self) -> None:
        if self.family not in ("reef", "grid"):
            raise ValidationError(f"unknown task family: {self.family!r}")
        if self.split not in ("train", "test"):
            raise ValidationError(f"unknown split: {self.split!r}")
        if len(self.current) != 3:
            raise ValidationError("current must be a 3-vector")
        if any(f not in (0, 1) for f in self.interest_flags):
            raise ValidationError("interest flags must be 0/1")
        if self.family == "reef":
            if len(self.interest_flags) != 4:
                raise ValidationError("reef tasks use 4 interest flags")
            if not any(self.interest_flags):
                raise ValidationError("reef tasks need at least one interesting type")
            if self.current[2] != 0.0:
                raise ValidationError("planar dynamics require zero vertical current")
        else:
            if len(self.interest_flags) != 6:
                raise ValidationError("grid tasks use 6 color flags")
            if sum(self.interest_flags) != 1:
                raise ValidationError("grid color flags must be one-hot")
            if any(c != 0.0 for c in self.current):
                raise ValidationError("grid tasks have no current")

    @property
    def color_index(self) -> int:
        """Target color index for grid tasks."""
        if self.family != "grid":
            raise ValidationError("color_index is defined for grid tasks only")
        return self.interest_flags.index(1)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "name": self.name,
            "current": list(self.current),
            "interest_flags": list(self.interest_flags),
            "split": self.split,
        }

    @staticmethod
    def from_dict(d: dict) -> "TaskSpec":
        return TaskSpec(
            family=d["family"],
            name=d["name"],
            current=tuple(float(c) for c in d["current"]),
            interest_flags=tuple(int(f) for f in d["interest_flags"]),
            split=d["split"],
        )


@dataclass(frozen=True)
class TaskCatalog:
    """Train/test task split for one family."""

    family: str
    train: tuple[TaskSpec, ...]
    test: tuple[TaskSpec, ...]

    def tasks(self, split: str) -> tuple[TaskSpec, ...]:
        if split == "train":
            return self.train
        if split == "test":
            return self.test
        raise ValidationError(f"unknown split: {split!r}")


def context_vector(task: TaskSpec) -> np.ndarray:
    """Encode a task as the policy-facing context vector.

    Reef layout is (current_x, current_y, current_z, red, blue, green,
    black); grid tasks map to the one-hot of their color index.
    """
    if task.family == "reef":
        return np.array(list(task.current) + list(task.interest_flags), dtype=np.float64)
    return np.array(task.interest_flags, dtype=np.float64)


def context_dim(family: str) -> int:
    return 7 if family == "reef" else 6


def _reef_task(name: str, direction: tuple[float, float], magnitude: float,
               flags: tuple[int, ...], split: str) -> TaskSpec:
    current = (direction[0] * magnitude, direction[1] * magnitude, 0.0)
    return TaskSpec(family="reef", name=name, current=current,
                    interest_flags=flags, split=split)


def build_catalog(family: str, current_magnitude: float = 0.2) -> TaskCatalog:
    """Build the fixed train/test task catalog for a family.

    Reef: 5 training current directions x 4 single-type flags (20 tasks);
    4 diagonal test currents x 4 single-type flags plus the all-types
    no-current task (17 tasks).  Diagonal currents are unit directions
    scaled to ``current_magnitude``.  Grid: 4 train / 2 test colors.
    """
    if family == "grid":
        train = tuple(
            TaskSpec(family="grid", name=f"grid-{c}", current=(0.0, 0.0, 0.0),
                     interest_flags=tuple(int(c == g) for g in GRID_COLORS),
                     split="train")
            for c in GRID_TRAIN_COLORS
        )
        test = tuple(
            TaskSpec(family="grid", name=f"grid-{c}", current=(0.0, 0.0, 0.0),
                     interest_flags=tuple(int(c == g) for g in GRID_COLORS),
                     split="test")
            for c in GRID_TEST_COLORS
        )
        return TaskCatalog(family="grid", train=train, test=test)
    if family != "reef":
        raise ValidationError(f"unknown task family: {family!r}")
    if not current_magnitude > 0:
        raise ValidationError("current magnitude must be positive")

    single_flags = [tuple(int(i == j) for j in range(4)) for i in range(4)]
    train = tuple(
        _reef_task(f"reef-{dname}-{tname}", direction, current_magnitude, flags, "train")
        for dname, direction in REEF_TRAIN_DIRECTIONS
        for tname, flags in zip(REEF_ORGANISM_TYPES, single_flags)
    )
    test = [
        _reef_task(f"reef-{dname}-{tname}", direction, current_magnitude, flags, "test")
        for dname, direction in REEF_TEST_DIRECTIONS
        for tname, flags in zip(REEF_ORGANISM_TYPES, single_flags)
    ]
    test.append(_reef_task("reef-none-all", (0.0, 0.0), current_magnitude,
                           (1, 1, 1, 1), "test"))
    return TaskCatalog(family="reef", train=train, test=tuple(test))


@dataclass
class StepOutcome:
    """Result of one environment transition.

    ``terminated`` marks success or failure (bootstrapping stops there);
    ``truncated`` marks the horizon.  They are never both set: termination
    wins when both conditions land on the same transition.
    """

    next_state: object
    reward: float
    terminated: bool
    truncated: bool
    info: dict = field(default_factory=dict)


def derive_seed(master_seed: int, stream_tag: str, index: int) -> int:
    """Derive an independent, collision-resistant child seed.

    Hash-based so that environment, network-init, and exploration streams
    never alias across (master_seed, tag, index) triples or platforms.
    """
    payload = f"{master_seed}:{stream_tag}:{index}".encode()
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:8], "little")
