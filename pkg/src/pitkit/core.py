"""Shared domain types for the parallel-in-time solvers.

Time partitions, state snapshots, propagator specifications and iteration
traces.  Everything here is an immutable value object so that propagators
stay pure functions and sweeps can run concurrently without locks.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Union

import numpy as np


class ConfigError(Exception):
    """A run configuration is inconsistent or violates a scheme precondition."""


class NumericalError(Exception):
    """A solver produced an unusable result (singular system, non-finite values)."""


class SingularSystemError(NumericalError):
    """Tridiagonal elimination hit a zero pivot."""


# --------------------------------------------------------------------------
# state layouts


@dataclass(frozen=True)
class GridLayout:
    """Finite-difference layout.  Only unknowns are stored: a Dirichlet grid
    keeps interior points, a Neumann grid keeps every point including the
    boundary ones.  ``components`` > 1 stacks several fields of ``n_points``
    values each (used by the first-order wave system).
    """

    n_points: int
    dx: float
    bc: str
    components: int = 1

    def __post_init__(self):
        if self.n_points < 1:
            raise ValueError(f"n_points must be positive, got {self.n_points}")
        if self.dx <= 0.0:
            raise ValueError(f"dx must be positive, got {self.dx}")
        if self.components < 1:
            raise ValueError(f"components must be positive, got {self.components}")

    @property
    def size(self) -> int:
        return self.n_points * self.components


@dataclass(frozen=True)
class ModeLayout:
    """Spectral layout: coefficients of an eigenbasis on (0, length).

    ``sine`` stores modes 1..m_max, ``cosine`` stores modes 0..m_max (the
    constant mode is index 0 of the coefficient vector).
    """

    m_max: int
    basis: str
    length: float

    def __post_init__(self):
        if self.basis not in ("sine", "cosine"):
            raise ValueError(f"unknown basis {self.basis!r}")
        if self.m_max < 1:
            raise ValueError(f"m_max must be positive, got {self.m_max}")
        if self.length <= 0.0:
            raise ValueError(f"length must be positive, got {self.length}")

    @property
    def size(self) -> int:
        return self.m_max if self.basis == "sine" else self.m_max + 1


Layout = Union[GridLayout, ModeLayout]


@dataclass(frozen=True)
class StateVector:
    """One solution snapshot: a layout plus a read-only value array."""

    layout: Layout
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.layout.size,):
            raise ValueError(
                f"layout expects {self.layout.size} values, got shape {values.shape}"
            )
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def with_values(self, values: np.ndarray) -> "StateVector":
        return StateVector(self.layout, values)

    def __add__(self, other: "StateVector") -> "StateVector":
        self._check_same_layout(other)
        return StateVector(self.layout, self.values + other.values)

    def __sub__(self, other: "StateVector") -> "StateVector":
        self._check_same_layout(other)
        return StateVector(self.layout, self.values - other.values)

    def scaled(self, factor: float) -> "StateVector":
        return StateVector(self.layout, factor * self.values)

    def _check_same_layout(self, other: "StateVector"):
        if self.layout != other.layout:
            raise ValueError(f"layout mismatch: {self.layout} vs {other.layout}")


def zeros_like(state: StateVector) -> StateVector:
    return StateVector(state.layout, np.zeros(state.layout.size))


# --------------------------------------------------------------------------
# time partition


@dataclass(frozen=True)
class TimePartition:
    """Uniform partition of [t_start, t_end] into n_slices slices.

    Boundaries are computed as t_start + n * span / n_slices, never by
    accumulating increments, so T_n is reproducible bit for bit no matter
    how the partition is traversed.
    """

    t_start: float
    t_end: float
    n_slices: int

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise ValueError(f"need t_end > t_start, got [{self.t_start}, {self.t_end}]")
        if self.n_slices < 1:
            raise ValueError(f"n_slices must be positive, got {self.n_slices}")

    @property
    def delta_t(self) -> float:
        return (self.t_end - self.t_start) / self.n_slices

    def boundary(self, n: int) -> float:
        if not 0 <= n <= self.n_slices:
            raise ValueError(f"boundary index {n} outside 0..{self.n_slices}")
        return self.t_start + (n * (self.t_end - self.t_start)) / self.n_slices

    @property
    def boundaries(self) -> np.ndarray:
        return np.array([self.boundary(n) for n in range(self.n_slices + 1)])

    def slice_bounds(self, n: int) -> tuple[float, float]:
        return self.boundary(n), self.boundary(n + 1)


def make_uniform_partition(t_end: float, n_slices: int, t_start: float = 0.0) -> TimePartition:
    if not t_end > t_start:
        raise ValueError(f"t_end must exceed t_start, got {t_end} <= {t_start}")
    return TimePartition(t_start, t_end, n_slices)


# --------------------------------------------------------------------------
# propagator specification


@dataclass(frozen=True)
class PropagatorSpec:
    """Which model advances a state across one slice, and at what resolution.

    Grid models use ``steps_per_slice`` inner steps; spectral models keep
    ``mode_count`` modes (0 meaning "contributes nothing", which is only
    meaningful for a coarse spec).
    """

    model: object
    role: str
    steps_per_slice: int = 0
    mode_count: int = 0

    def __post_init__(self):
        if self.role not in ("fine", "coarse", "none"):
            raise ValueError(f"unknown role {self.role!r}")
        if self.steps_per_slice < 0:
            raise ValueError("steps_per_slice cannot be negative")
        if self.mode_count < 0:
            raise ValueError("mode_count cannot be negative")
        if self.role == "fine" and self.model is None:
            raise ValueError("fine spec needs a model")


@functools.singledispatch
def propagate_slice(model, spec: PropagatorSpec, state: StateVector,
                    t_from: float, t_to: float) -> StateVector:
    """Advance ``state`` from t_from to t_to with the given model.

    Model modules register concrete implementations; the driver only ever
    calls this entry point.
    """
    raise TypeError(f"no propagator registered for {type(model).__name__}")


# --------------------------------------------------------------------------
# norms


def discrete_l2_norm(state: StateVector) -> float:
    """Discrete L2 norm of a state.

    Grid layout: sqrt(dx * sum(v_i^2)).  Mode layout: the corresponding
    integral norm of the reconstructed function (Parseval), so grid and
    mode representations of the same function measure alike.
    """
    v = state.values
    layout = state.layout
    if isinstance(layout, GridLayout):
        return float(np.sqrt(layout.dx * np.dot(v, v)))
    if layout.basis == "sine":
        return float(np.sqrt(0.5 * layout.length * np.dot(v, v)))
    # cosine: the constant mode integrates to length, the rest to length/2
    return float(np.sqrt(layout.length * v[0] ** 2 + 0.5 * layout.length * np.dot(v[1:], v[1:])))


# --------------------------------------------------------------------------
# iteration traces


@dataclass(frozen=True)
class TraceEntry:
    k: int
    n: int
    error_l2: float
    bound: float | None = None
    wall_time_ms: float = 0.0


@dataclass(frozen=True)
class IterationTrace:
    """Per-(iteration, slice) error record of one parareal run."""

    entries: tuple[TraceEntry, ...]
    metadata: dict = field(default_factory=dict)

    def iterations(self) -> list[int]:
        seen: list[int] = []
        for e in self.entries:
            if e.k not in seen:
                seen.append(e.k)
        return seen

    def errors_at(self, k: int) -> np.ndarray:
        errs = [e.error_l2 for e in self.entries if e.k == k]
        if not errs:
            raise KeyError(f"iteration {k} not recorded")
        return np.array(errs)

    def bound_at(self, k: int) -> float | None:
        for e in self.entries:
            if e.k == k:
                return e.bound
        raise KeyError(f"iteration {k} not recorded")


def sup_error(trace: IterationTrace, k: int) -> float:
    """Largest slice error at iteration k.  Raises KeyError for unknown k."""
    return float(np.max(trace.errors_at(k)))
