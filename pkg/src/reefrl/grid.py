"""Discrete gridworld family: six color tasks on fixed or random layouts.

The agent walks a walled grid holding five organisms of each color.  It
must move next to every organism of the task's color; walking into a wall
or a wrong-colored organism ends the episode with a collision penalty.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import GRID_COLORS, TaskSpec, ValidationError

GRID_ACTIONS = ("forward", "turn_right", "turn_left")
G_FORWARD, G_TURN_RIGHT, G_TURN_LEFT = range(3)

HEADINGS = ("N", "E", "S", "W")
HEADING_DELTAS = ((0, -1), (1, 0), (0, 1), (-1, 0))  # (dcol, drow); row 0 is north

ORGANISMS_PER_COLOR = 5

# Cell codes in the observation one-hot: empty, wall, then the six colors.
CELL_EMPTY, CELL_WALL = 0, 1
N_CELL_CODES = 2 + len(GRID_COLORS)

GRID_TRAJECTORY_HEADER = ("t,col,row,heading,action,reward,"
                          + ",".join(f"remaining_{c}" for c in GRID_COLORS))


@dataclass(frozen=True)
class GridConfig:
    width: int = 12
    height: int = 12
    view_size: int = 5               # egocentric window edge (odd)
    horizon: int = 400
    reward_found: float = 1.0
    reward_complete: float = 100.0
    reward_collide: float = -100.0
    reward_step_penalty: float = 0.01
    start_cell: tuple[int, int] = (1, 1)
    start_heading: int = 1           # east, facing inward from the corner

    def __post_init__(self) -> None:
        if self.width < 4 or self.height < 4:
            raise ValidationError("grid must be at least 4x4")
        if self.view_size % 2 != 1 or self.view_size < 1:
            raise ValidationError("view_size must be odd and positive")
        if self.horizon < 1:
            raise ValidationError("horizon must be at least 1")

    @property
    def observation_dim(self) -> int:
        return self.view_size * self.view_size * N_CELL_CODES + len(HEADINGS) + 1


# Built-in fixed layout for the default 12x12 grid: five organisms per
# color, each inside the color's random-mode area, none on the start cell.
FIXED_LAYOUT_CELLS: dict[str, tuple[tuple[int, int], ...]] = {
    "red": ((2, 2), (4, 1), (3, 3), (5, 2), (1, 3)),
    "blue": ((7, 1), (9, 2), (6, 3), (8, 3), (10, 1)),
    "green": ((1, 5), (3, 4), (4, 6), (2, 6), (5, 5)),
    "yellow": ((7, 4), (9, 5), (6, 6), (10, 4), (8, 6)),
    "purple": ((2, 8), (4, 7), (1, 10), (3, 9), (5, 10)),
    "grey": ((7, 8), (9, 7), (6, 10), (10, 9), (8, 8)),
}


@dataclass(frozen=True)
class GridLayout:
    width: int
    height: int
    organisms: tuple[tuple[tuple[int, int], int], ...]   # ((col, row), color)
    mode: str
    color_areas: dict[int, tuple[tuple[int, int], ...]] = field(default_factory=dict)

    def is_wall(self, cell: tuple[int, int]) -> bool:
        col, row = cell
        return (col <= 0 or row <= 0
                or col >= self.width - 1 or row >= self.height - 1)


@dataclass
class GridState:
    cell: tuple[int, int]
    heading: int
    collected: np.ndarray            # (6,) counts per color
    observation: np.ndarray          # flattened window + heading + remaining


def color_areas(config: GridConfig) -> dict[int, tuple[tuple[int, int], ...]]:
    """Partition the interior into six rectangles, one per color.

    Two columns of areas by three rows; the start cell is excluded so no
    layout can bury the agent.
    """
    inner_w = config.width - 2
    inner_h = config.height - 2
    col_split = 1 + inner_w // 2
    row_thirds = [1, 1 + inner_h // 3, 1 + (2 * inner_h) // 3, config.height - 1]
    areas: dict[int, tuple[tuple[int, int], ...]] = {}
    for idx in range(len(GRID_COLORS)):
        band = idx // 2
        left_half = idx % 2 == 0
        cols = range(1, col_split) if left_half else range(col_split, config.width - 1)
        rows = range(row_thirds[band], row_thirds[band + 1])
        cells = tuple((c, r) for r in rows for c in cols
                      if (c, r) != config.start_cell)
        if len(cells) < ORGANISMS_PER_COLOR:
            raise ValidationError(
                f"color area for {GRID_COLORS[idx]} holds {len(cells)} cells, "
                f"needs {ORGANISMS_PER_COLOR}"
            )
        areas[idx] = cells
    return areas


def sample_layout(mode: str, seed: int, config: GridConfig) -> GridLayout:
    """Fixed mode returns the built-in layout regardless of seed; random
    mode draws five cells per color uniformly without replacement from the
    color's area."""
    areas = color_areas(config)
    if mode == "fixed":
        if (config.width, config.height) != (12, 12):
            raise ValidationError("the built-in fixed layout requires a 12x12 grid")
        organisms = tuple(
            (cell, color)
            for color, name in enumerate(GRID_COLORS)
            for cell in FIXED_LAYOUT_CELLS[name]
        )
        return GridLayout(width=config.width, height=config.height,
                          organisms=organisms, mode="fixed", color_areas=areas)
    if mode != "random":
        raise ValidationError(f"unknown layout mode: {mode!r}")
    rng = np.random.default_rng(seed)
    organisms: list[tuple[tuple[int, int], int]] = []
    taken: set[tuple[int, int]] = set()
    for color in range(len(GRID_COLORS)):
        free = [cell for cell in areas[color] if cell not in taken]
        if len(free) < ORGANISMS_PER_COLOR:
            raise ValidationError(
                f"color area for {GRID_COLORS[color]} too crowded to host "
                f"{ORGANISMS_PER_COLOR} organisms"
            )
        picks = rng.choice(len(free), size=ORGANISMS_PER_COLOR, replace=False)
        for k in sorted(int(i) for i in picks):
            organisms.append((free[k], color))
            taken.add(free[k])
    return GridLayout(width=config.width, height=config.height,
                      organisms=tuple(organisms), mode="random", color_areas=areas)


def state_vector(state: GridState) -> np.ndarray:
    """The grid state vector is the egocentric observation itself."""
    return state.observation.copy()


class GridEnv:
    """One gridworld episode at a time."""

    n_actions = len(GRID_ACTIONS)

    def __init__(self, config: GridConfig | None = None, mode: str = "fixed"):
        self.config = config or GridConfig()
        if mode not in ("fixed", "random"):
            raise ValidationError(f"unknown layout mode: {mode!r}")
        self.mode = mode
        self.task: TaskSpec | None = None
        self.layout: GridLayout | None = None
        self.state: GridState | None = None
        self._codes: np.ndarray | None = None     # (width, height) cell codes
        self._cell_to_organism: dict[tuple[int, int], int] = {}
        self._organism_collected: np.ndarray | None = None
        self._steps = 0
        self._done = False

    @property
    def done(self) -> bool:
        return self._done

    def reset(self, task: TaskSpec, seed: int) -> GridState:
        if task.family != "grid":
            raise ValidationError(f"grid env cannot run task family {task.family!r}")
        cfg = self.config
        self.task = task
        self.layout = sample_layout(self.mode, seed, cfg)

        codes = np.full((cfg.width, cfg.height), CELL_EMPTY, dtype=np.int8)
        codes[0, :] = CELL_WALL
        codes[-1, :] = CELL_WALL
        codes[:, 0] = CELL_WALL
        codes[:, -1] = CELL_WALL
        self._cell_to_organism = {}
        for idx, (cell, color) in enumerate(self.layout.organisms):
            codes[cell[0], cell[1]] = 2 + color
            self._cell_to_organism[cell] = idx
        self._codes = codes
        self._organism_collected = np.zeros(len(self.layout.organisms), dtype=bool)

        self._steps = 0
        self._done = False
        self.state = GridState(
            cell=cfg.start_cell,
            heading=cfg.start_heading,
            collected=np.zeros(len(GRID_COLORS), dtype=np.int64),
            observation=np.empty(0),
        )
        self.state.observation = self._observe(self.state)
        return self.state

    def _observe(self, state: GridState) -> np.ndarray:
        """Forward-facing view window, one-hot per cell, plus heading
        one-hot and the remaining fraction of the task's color."""
        cfg = self.config
        view = cfg.view_size
        half = view // 2
        fwd = HEADING_DELTAS[state.heading]
        right = HEADING_DELTAS[(state.heading + 1) % 4]
        codes = self._codes
        obs = np.zeros(cfg.observation_dim, dtype=np.float64)
        col0, row0 = state.cell
        k = 0
        for depth in range(view):
            for lat in range(-half, half + 1):
                c = col0 + fwd[0] * depth + right[0] * lat
                r = row0 + fwd[1] * depth + right[1] * lat
                if 0 <= c < cfg.width and 0 <= r < cfg.height:
                    code = codes[c, r]
                else:
                    code = CELL_WALL
                obs[k * N_CELL_CODES + code] = 1.0
                k += 1
        base = view * view * N_CELL_CODES
        obs[base + state.heading] = 1.0
        target = self.task.color_index
        obs[base + len(HEADINGS)] = (
            (ORGANISMS_PER_COLOR - state.collected[target]) / ORGANISMS_PER_COLOR
        )
        return obs

    def _collect_adjacent(self, cell: tuple[int, int], collected: np.ndarray) -> int:
        """Latch every uncollected task-color organism orthogonally adjacent
        to the cell; returns how many were collected."""
        target = self.task.color_index
        found = 0
        for dc, dr in HEADING_DELTAS:
            neighbor = (cell[0] + dc, cell[1] + dr)
            idx = self._cell_to_organism.get(neighbor)
            if idx is None or self._organism_collected[idx]:
                continue
            if self.layout.organisms[idx][1] != target:
                continue
            self._organism_collected[idx] = True
            collected[target] += 1
            found += 1
        return found

    def step(self, action: int) -> StepOutcome:
        if self.state is None or self.task is None:
            raise RuntimeError("step called before reset")
        if self._done:
            raise RuntimeError("episode finished; call reset")
        if not 0 <= action < self.n_actions:
            raise ValidationError(f"invalid grid action index {action}")
        cfg = self.config
        state = self.state
        target = self.task.color_index

        cell = state.cell
        heading = state.heading
        collected = state.collected.copy()
        reward = 0.0
        terminated = False
        collision = False
        found = 0

        if action == G_TURN_RIGHT:
            heading = (heading + 1) % 4
        elif action == G_TURN_LEFT:
            heading = (heading - 1) % 4
        else:
            dc, dr = HEADING_DELTAS[heading]
            ahead = (cell[0] + dc, cell[1] + dr)
            code = self._codes[ahead[0], ahead[1]]
            if code == CELL_WALL or (code >= 2 and code - 2 != target):
                reward = cfg.reward_collide
                terminated = True
                collision = True
            else:
                if code == CELL_EMPTY:
                    cell = ahead
                # Task-color organism cells block movement without penalty;
                # collection below still sees the organism as adjacent.
                found = self._collect_adjacent(cell, collected)
                reward = found * cfg.reward_found
                if collected[target] == ORGANISMS_PER_COLOR:
                    reward += cfg.reward_complete
                    terminated = True

        if not collision:
            reward -= cfg.reward_step_penalty

        self._steps += 1
        truncated = (not terminated) and self._steps >= cfg.horizon
        success = bool(collected[target] == ORGANISMS_PER_COLOR)

        nxt = GridState(cell=cell, heading=heading, collected=collected,
                        observation=np.empty(0))
        self.state = nxt
        nxt.observation = self._observe(nxt)
        self._done = terminated or truncated
        return StepOutcome(
            next_state=nxt,
            reward=reward,
            terminated=terminated,
            truncated=truncated,
            info={"success": success, "failure": collision,
                  "collected_this_step": found},
        )

    def render_ascii(self) -> str:
        """One character per cell: walls '#', empty '.', organisms by color
        letter (uppercase once collected), agent by its heading arrow."""
        if self.state is None:
            raise RuntimeError("render called before reset")
        letters = "rbgype"
        arrows = "^>v<"
        rows = []
        for row in range(self.config.height):
            chars = []
            for col in range(self.config.width):
                cell = (col, row)
                if cell == self.state.cell:
                    chars.append(arrows[self.state.heading])
                    continue
                code = self._codes[col, row]
                if code == CELL_WALL:
                    chars.append("#")
                elif code == CELL_EMPTY:
                    chars.append(".")
                else:
                    letter = letters[code - 2]
                    idx = self._cell_to_organism[cell]
                    chars.append(letter.upper() if self._organism_collected[idx]
                                 else letter)
            rows.append("".join(chars))
        return "\n".join(rows)


def trajectory_row(state: GridState, action: int, reward_value: float,
                   elapsed_steps: int) -> str:
    """One CSV record per step, matching GRID_TRAJECTORY_HEADER."""
    remaining = [(ORGANISMS_PER_COLOR - int(c)) / ORGANISMS_PER_COLOR
                 for c in state.collected]
    cells = [str(elapsed_steps), str(state.cell[0]), str(state.cell[1]),
             HEADINGS[state.heading], str(action), repr(float(reward_value))]
    cells.extend(repr(float(r)) for r in remaining)
    return ",".join(cells)


from .reef import StepOutcome  # noqa: E402  (shared step-outcome record)
