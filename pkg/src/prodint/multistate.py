"""Exact law of a finitely supported multi-state process.

A ``PathSpace`` is a weighted finite set of right-continuous piecewise
constant trajectories on states 1..d over a window (0, tau].  Because the
support is finite, every quantity of interest -- occupation probabilities,
transition probabilities under all four endpoint conventions, expected
transition counts, expected status indicators, cumulative hazards -- is a
finite sum that can be evaluated exactly.  The path space therefore acts
as the brute-force oracle against which both the interval-function
calculus and the empirical estimators are checked.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .interval_functions import AdditiveIF, BoundCheck, GeneralIF, product_integral
from .intervals import Interval

Side = Literal["right", "left"]


@dataclass(frozen=True)
class StatePath:
    """One trajectory: an initial state and a sorted tuple of (time, to_state).

    The path value is right-continuous; the left limit at t=0 is defined to
    equal the time-0 value.
    """

    initial_state: int
    jumps: tuple[tuple[float, int], ...] = ()

    def __post_init__(self) -> None:
        if self.initial_state < 1:
            raise ValueError("states are numbered from 1")
        jumps = tuple((float(t), int(s)) for t, s in self.jumps)
        previous_time = 0.0
        previous_state = self.initial_state
        for t, s in jumps:
            if t <= previous_time:
                raise ValueError("jump times must be strictly increasing and positive")
            if s == previous_state:
                raise ValueError("consecutive states must differ")
            if s < 1:
                raise ValueError("states are numbered from 1")
            previous_time, previous_state = t, s
        object.__setattr__(self, "jumps", jumps)

    def state_at(self, t: float) -> int:
        state = self.initial_state
        for time, to in self.jumps:
            if time <= t:
                state = to
            else:
                break
        return state

    def state_before(self, t: float) -> int:
        state = self.initial_state
        for time, to in self.jumps:
            if time < t:
                state = to
            else:
                break
        return state

    def jump_at(self, t: float) -> tuple[int, int] | None:
        """The (from_state, to_state) of a jump exactly at ``t``, if any."""
        state = self.initial_state
        for time, to in self.jumps:
            if time == t:
                return state, to
            if time > t:
                break
            state = to
        return None

    def count_transitions(self, j: int, k: int, a: Interval) -> int:
        state = self.initial_state
        count = 0
        for time, to in self.jumps:
            if state == j and to == k and a.contains(time):
                count += 1
            state = to
        return count

    @property
    def max_state(self) -> int:
        return max((s for _, s in self.jumps), default=self.initial_state)


@dataclass(frozen=True)
class ExtinctionBoundary:
    time: float
    exit_mass: float
    ok: bool


@dataclass(frozen=True)
class ExtinctionReport:
    """Where a state's occupation hits zero, and the exit mass spent there.

    On a finite path space the occupation can only vanish through a jump
    time at which every remaining occupant leaves, so each boundary must
    carry total instantaneous exit hazard 1.
    """

    state: int
    boundaries: tuple[ExtinctionBoundary, ...]

    @property
    def has_extinction(self) -> bool:
        return bool(self.boundaries)

    @property
    def ok(self) -> bool:
        return all(b.ok for b in self.boundaries)


@dataclass(frozen=True)
class PathSpace:
    """Finite weighted set of trajectories; weights sum to one."""

    dim: int
    tau: float
    paths: tuple[tuple[StatePath, float], ...]
    grid: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dimension must be at least 1")
        paths = tuple((p, float(w)) for p, w in self.paths)
        if not paths:
            raise ValueError("a path space needs at least one path")
        total = 0.0
        for path, weight in paths:
            if weight <= 0:
                raise ValueError("path weights must be positive")
            total += weight
            if path.max_state > self.dim or path.initial_state > self.dim:
                raise ValueError("path visits a state beyond the dimension")
            if path.jumps and path.jumps[-1][0] > self.tau:
                raise ValueError("jump times must not exceed the horizon")
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"path weights sum to {total!r}, not 1")
        grid = tuple(sorted(float(t) for t in self.grid))
        if not grid:
            grid = self.event_times_of(paths)
        else:
            for earlier, later in zip(grid, grid[1:]):
                if not earlier < later:
                    raise ValueError("grid times must be strictly increasing")
            if grid and (grid[0] <= 0 or grid[-1] > self.tau):
                raise ValueError("grid times must lie in (0, tau]")
            declared = set(grid)
            realized = set(self.event_times_of(paths))
            if not realized <= declared:
                raise ValueError("every jump time must lie on the declared grid")
        object.__setattr__(self, "paths", paths)
        object.__setattr__(self, "grid", grid)

    @staticmethod
    def event_times_of(paths) -> tuple[float, ...]:
        return tuple(sorted({t for path, _ in paths for t, _ in path.jumps}))

    @property
    def event_times(self) -> tuple[float, ...]:
        """Times at which some path actually jumps."""
        return self.event_times_of(self.paths)

    # -- occupation and transition probabilities --------------------------

    def occupation(self, j: int, t: float, side: Side = "right") -> float:
        """P(state = j) at time t (right value) or just before t (left)."""
        total = 0.0
        for path, weight in self.paths:
            state = path.state_at(t) if side == "right" else path.state_before(t)
            if state == j:
                total += weight
        return total

    def occupation_vector(self, t: float, side: Side = "right") -> np.ndarray:
        return np.array([self.occupation(j, t, side) for j in range(1, self.dim + 1)])

    def _statuses(self, path: StatePath, a: Interval) -> tuple[int, int]:
        left = path.state_before(a.lo) if a.lo_closed else path.state_at(a.lo)
        right = path.state_at(a.hi) if a.hi_closed else path.state_before(a.hi)
        return left, right

    def transition(self, j: int, k: int, a: Interval) -> float:
        """Conditional transition probability of ``a`` under its endpoint shape.

        A closed left endpoint conditions on the state just before a.lo, an
        open one on the state at a.lo; a closed right endpoint evaluates
        the state at a.hi, an open one the state just before.  When the
        conditioning probability is zero the value is 1 if j == k else 0.
        """
        conditioning = 0.0
        joint = 0.0
        for path, weight in self.paths:
            left, right = self._statuses(path, a)
            if left == j:
                conditioning += weight
                if right == k:
                    joint += weight
        if conditioning == 0.0:
            return 1.0 if j == k else 0.0
        return joint / conditioning

    def transition_matrix(self, a: Interval) -> np.ndarray:
        out = np.empty((self.dim, self.dim))
        for j in range(1, self.dim + 1):
            for k in range(1, self.dim + 1):
                out[j - 1, k - 1] = self.transition(j, k, a)
        return out

    def transition_if(self) -> GeneralIF:
        """The transition matrix as an interval function."""
        return GeneralIF(self.dim, self.transition_matrix, support=self.event_times)

    def transition_deviation_if(self) -> GeneralIF:
        """Transition matrix minus the identity, as an interval function."""
        eye = np.eye(self.dim)
        return GeneralIF(
            self.dim, lambda a: self.transition_matrix(a) - eye, support=self.event_times
        )

    # -- expected counting and status measures ----------------------------

    def counting_mean(self, j: int, k: int, a: Interval) -> float:
        """Expected number of direct j -> k transitions in ``a``."""
        if k == j:
            raise ValueError("counting means are defined for k != j")
        return sum(w * path.count_transitions(j, k, a) for path, w in self.paths)

    def counting_mean_if(self, j: int, k: int) -> AdditiveIF:
        """The expected-count measure of j -> k as a scalar additive function."""
        if k == j:
            raise ValueError("counting means are defined for k != j")
        atoms = []
        for u in self.event_times:
            mass = 0.0
            for path, w in self.paths:
                jump = path.jump_at(u)
                if jump == (j, k):
                    mass += w
            if mass != 0.0:
                atoms.append((u, [[mass]]))
        return AdditiveIF(1, tuple(atoms))

    def indicator_mean(self, j: int, k: int, a: Interval) -> float:
        """Probability of status j at the left of ``a`` and k at its right.

        Same endpoint conventions as ``transition`` but unconditional, so
        on a singleton this equals the expected count of the instantaneous
        direct transition.
        """
        if k == j:
            raise ValueError("indicator means are defined for k != j")
        total = 0.0
        for path, weight in self.paths:
            left, right = self._statuses(path, a)
            if left == j and right == k:
                total += weight
        return total

    def indicator_mean_if(self, j: int, k: int) -> GeneralIF:
        if k == j:
            raise ValueError("indicator means are defined for k != j")
        return GeneralIF(
            1, lambda a: np.array([[self.indicator_mean(j, k, a)]]), support=self.event_times
        )

    # -- hazards -----------------------------------------------------------

    def jump_mass(self, u: float) -> np.ndarray:
        mass = np.zeros((self.dim, self.dim))
        for path, w in self.paths:
            jump = path.jump_at(u)
            if jump is not None:
                mass[jump[0] - 1, jump[1] - 1] += w
        return mass

    def hazard_matrix(self) -> "HazardMatrixIF":
        """Cumulative transition hazard: atom mass / occupation just before.

        Pure-jump for a finite path space.  Off-diagonal entry (j, k) at a
        jump time is the expected j -> k mass there divided by the
        occupation of j just before; the diagonal carries minus the row
        sum.
        """
        atoms = []
        for u in self.event_times:
            mass = self.jump_mass(u)
            at_risk = self.occupation_vector(u, side="left")
            step = np.zeros((self.dim, self.dim))
            for j in range(self.dim):
                row = mass[j]
                if not row.any():
                    continue
                if at_risk[j] <= 0.0:
                    raise ValueError(
                        f"inconsistent path space: transition mass out of state {j + 1} "
                        f"at time {u} with zero occupation just before"
                    )
                step[j] = row / at_risk[j]
                step[j, j] = -step[j].sum()
            if step.any():
                atoms.append((u, step))
        return HazardMatrixIF(self.dim, tuple(atoms))

    def exit_hazard(self, j: int) -> AdditiveIF:
        """Total hazard of leaving state j, as a scalar additive function."""
        atoms = []
        for u in self.event_times:
            mass = self.jump_mass(u)[j - 1]
            total = mass.sum()
            if total != 0.0:
                before = self.occupation(j, u, side="left")
                atoms.append((u, [[total / before]]))
        return AdditiveIF(1, tuple(atoms))

    # -- identities and structural checks ----------------------------------

    def iterated_product(self, s: float, t: float, cuts=()) -> np.ndarray:
        """Occupation row at ``s`` pushed forward through half-open cells.

        Multiplies the occupation vector at ``s`` by the transition matrix
        of (t_{i-1}, t_i] for the cut sequence s < ... < t.  With no cuts
        this is a single push through (s, t]; with s == t it is the
        occupation vector itself.
        """
        if s > t:
            raise ValueError("need s <= t")
        cuts = tuple(float(c) for c in cuts)
        for earlier, later in zip(cuts, cuts[1:]):
            if not earlier < later:
                raise ValueError("cuts must be strictly increasing")
        for c in cuts:
            if not s <= c <= t:
                raise ValueError(f"cut {c} outside [{s}, {t}]")
        points = [s] + [c for c in cuts if s < c < t] + [t] if t > s else [s]
        result = self.occupation_vector(s)
        for lo, hi in zip(points, points[1:]):
            result = result @ self.transition_matrix(Interval.open_closed(lo, hi))
        return result

    def occupation_lower_bound(self, j: int, s: float, t: float) -> BoundCheck:
        """Occupation at ``t`` against the survival-style floor from ``s``.

        The floor is the occupation at ``s`` times the product integral of
        ``1 - exit hazard`` over (s, t]; it is attained exactly when the
        state gains no mass on the way.
        """
        if s > t:
            raise ValueError("need s <= t")
        lhs = self.occupation(j, t)
        start = self.occupation(j, s)
        survival = 1.0
        if t > s:
            survival = product_integral(
                self.exit_hazard(j).scale(-1.0), Interval.open_closed(s, t)
            )[0, 0]
        rhs = start * survival
        return BoundCheck(lhs, rhs, lhs >= rhs - 1e-12)

    def extinction_report(self, j: int) -> ExtinctionReport:
        """Scan for times where state j's occupation drops to exactly zero."""
        boundaries = []
        for u in self.event_times:
            before = self.occupation(j, u, side="left")
            after = self.occupation(j, u)
            if before > 0.0 and after == 0.0:
                exit_mass = self.jump_mass(u)[j - 1].sum() / before
                boundaries.append(ExtinctionBoundary(u, exit_mass, abs(exit_mass - 1.0) <= 1e-12))
        return ExtinctionReport(j, tuple(boundaries))

    # -- serialization ------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "d": self.dim,
            "tau": self.tau,
            "grid": list(self.grid),
            "paths": [
                {"init": p.initial_state, "jumps": [[t, s] for t, s in p.jumps], "w": w}
                for p, w in self.paths
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "PathSpace":
        paths = tuple(
            (StatePath(entry["init"], tuple((t, s) for t, s in entry["jumps"])), entry["w"])
            for entry in data["paths"]
        )
        return cls(int(data["d"]), float(data["tau"]), paths, tuple(data.get("grid", ())))


@dataclass(frozen=True)
class HazardMatrixIF(AdditiveIF):
    """Additive hazard matrix: nonnegative off-diagonals, zero row sums.

    Pure-jump by construction; each atom's off-diagonal row mass is at most
    one (a state cannot expect to leave more than once instantaneously).
    """

    def __post_init__(self) -> None:
        super().__post_init__()
        if self.density:
            raise ValueError("hazard matrices from finite path spaces are pure-jump")
        for t, step in self.atoms:
            off = step.copy()
            np.fill_diagonal(off, 0.0)
            if (off < 0.0).any():
                raise ValueError(f"negative off-diagonal hazard at {t}")
            row_exit = off.sum(axis=1)
            if (row_exit > 1.0 + 1e-12).any():
                raise ValueError(f"instantaneous exit mass above 1 at {t}")
            if np.abs(step.sum(axis=1)).max() > 1e-12:
                raise ValueError(f"hazard rows must sum to zero at {t}")


def save_pathspace(ps: PathSpace, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(ps.to_json_dict(), handle, indent=2)
        handle.write("\n")


def load_pathspace(path) -> PathSpace:
    with open(path, "r", encoding="utf-8") as handle:
        return PathSpace.from_json_dict(json.load(handle))
