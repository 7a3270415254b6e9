"""Advection and wave models used as counterexamples to coarse-free parareal.

Transport remembers: a first-order upwind step at unit CFL is an exact
shift, the wave system below conserves a discrete energy exactly.  Both
leave nothing for a block-Jacobi iteration to contract, which is the
behavior the experiment presets demonstrate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    ConfigError,
    GridLayout,
    PropagatorSpec,
    StateVector,
    propagate_slice,
)
from .heat import SourceTerm, TridiagonalSystem, _ThomasFactor, sample_source


@dataclass(frozen=True)
class AdvectionModel:
    """du/dt + speed * du/dx = f on (0, 1), first-order upwind (speed > 0).

    bc "periodic" wraps the last cell onto the first; "inflow" holds u = 0
    at the left boundary and lets the flow leave on the right.  Unknowns are
    the n_cells values x_j = j*dx (j = 0..n-1 periodic, j = 1..n inflow).
    """

    speed: float = 1.0
    n_cells: int = 128
    bc: str = "periodic"
    source: SourceTerm = SourceTerm.zero()

    def __post_init__(self):
        if self.speed <= 0.0:
            raise ValueError(f"speed must be positive, got {self.speed}")
        if self.n_cells < 2:
            raise ValueError(f"n_cells must be at least 2, got {self.n_cells}")
        if self.bc not in ("periodic", "inflow"):
            raise ValueError(f"unknown bc {self.bc!r}")

    @property
    def dx(self) -> float:
        return 1.0 / self.n_cells

    @property
    def grid_x(self) -> np.ndarray:
        if self.bc == "periodic":
            return np.arange(0, self.n_cells) * self.dx
        return np.arange(1, self.n_cells + 1) * self.dx

    def layout(self) -> GridLayout:
        return GridLayout(self.n_cells, self.dx, self.bc)

    def zero_state(self) -> StateVector:
        return StateVector(self.layout(), np.zeros(self.n_cells))


def advection_step(model: AdvectionModel, state: StateVector, t: float, dt: float) -> StateVector:
    """One upwind step u_j <- u_j - nu*(u_j - u_{j-1}) + dt*f(x_j, t).

    nu = speed*dt/dx must not exceed 1; at nu = 1 the step is an exact
    shift by one cell.
    """
    if state.layout != model.layout():
        raise ValueError(f"state layout {state.layout} does not fit model {model}")
    nu = model.speed * dt / model.dx
    if nu > 1.0 + 1e-12:
        raise ConfigError(f"CFL number {nu:.6g} exceeds 1; shrink dt or the speed")
    u = state.values
    if model.bc == "periodic":
        upstream = np.roll(u, 1)
    else:
        upstream = np.concatenate(([0.0], u[:-1]))
    # convex form so nu = 1 reduces to upstream exactly, with no rounding
    new = (1.0 - nu) * u + nu * upstream
    if not model.source.is_zero:
        new = new + dt * sample_source(model.source, model.grid_x, t)
    return StateVector(state.layout, new)


@dataclass(frozen=True)
class WaveModel:
    """u_tt = u_xx on (0, 1) with u = 0 at both walls, kept as the first-order
    system (u, v) with v = u_t.  States stack the two interior fields, so the
    value array has 2*(n_cells - 1) entries: u first, then v.
    """

    n_cells: int = 128

    def __post_init__(self):
        if self.n_cells < 2:
            raise ValueError(f"n_cells must be at least 2, got {self.n_cells}")

    @property
    def dx(self) -> float:
        return 1.0 / self.n_cells

    @property
    def n_unknowns(self) -> int:
        return self.n_cells - 1

    @property
    def grid_x(self) -> np.ndarray:
        return np.arange(1, self.n_cells) * self.dx

    def layout(self) -> GridLayout:
        return GridLayout(self.n_unknowns, self.dx, "dirichlet", components=2)

    def state_from(self, u: np.ndarray, v: np.ndarray) -> StateVector:
        return StateVector(self.layout(), np.concatenate([u, v]))

    def split(self, state: StateVector) -> tuple[np.ndarray, np.ndarray]:
        n = self.n_unknowns
        return state.values[:n], state.values[n:]

    def laplacian_system(self) -> TridiagonalSystem:
        n = self.n_unknowns
        inv_dx2 = 1.0 / self.dx**2
        return TridiagonalSystem(
            np.full(n - 1, inv_dx2), np.full(n, -2.0 * inv_dx2), np.full(n - 1, inv_dx2)
        )


def wave_energy(model: WaveModel, state: StateVector) -> float:
    """Discrete energy dx*sum(v^2) + sum((u_{j+1}-u_j)^2)/dx over all edges,
    boundary values counted as zero.  Conserved exactly by wave_step."""
    u, v = model.split(state)
    d = np.diff(np.concatenate(([0.0], u, [0.0])))
    return float(model.dx * np.dot(v, v) + np.dot(d, d) / model.dx)


def _wave_factor(model: WaveModel, dt: float) -> tuple[TridiagonalSystem, _ThomasFactor]:
    lap = model.laplacian_system()
    quarter = 0.25 * dt * dt
    implicit = TridiagonalSystem(
        -quarter * lap.sub, 1.0 - quarter * lap.diag, -quarter * lap.sup
    )
    return lap, _ThomasFactor(implicit)


def wave_step(model: WaveModel, state: StateVector, t: float, dt: float) -> StateVector:
    """One trapezoidal step of the first-order system.

    For this linear system the trapezoidal rule coincides with the implicit
    midpoint rule, so the quadratic energy above is conserved to roundoff
    and stepping dt then -dt returns the initial state.
    """
    if state.layout != model.layout():
        raise ValueError(f"state layout {state.layout} does not fit model {model}")
    lap, factor = _wave_factor(model, dt)
    return _wave_substep(model, lap, factor, state, dt)


def _wave_substep(model: WaveModel, lap: TridiagonalSystem, factor: _ThomasFactor,
                  state: StateVector, dt: float) -> StateVector:
    u, v = model.split(state)
    p = u + 0.5 * dt * v
    q = v + 0.5 * dt * lap.matvec(u)
    v_new = factor.solve(q + 0.5 * dt * lap.matvec(p))
    u_new = p + 0.5 * dt * v_new
    return model.state_from(u_new, v_new)


def propagate(model, spec: PropagatorSpec, state: StateVector,
              t_from: float, t_to: float) -> StateVector:
    """Advance across one slice with spec.steps_per_slice inner steps."""
    steps = spec.steps_per_slice
    if steps < 1:
        raise ConfigError(f"{spec.role} propagator needs steps_per_slice >= 1, got {steps}")
    if not t_to > t_from:
        raise ValueError(f"need t_to > t_from, got [{t_from}, {t_to}]")
    span = t_to - t_from
    dt = span / steps
    if isinstance(model, WaveModel):
        if state.layout != model.layout():
            raise ValueError(f"state layout {state.layout} does not fit model {model}")
        lap, factor = _wave_factor(model, dt)
        for _ in range(steps):
            state = _wave_substep(model, lap, factor, state, dt)
        return state
    for i in range(steps):
        t_i = t_from + (i * span) / steps
        state = advection_step(model, state, t_i, dt)
    return state


propagate_slice.register(AdvectionModel, propagate)
propagate_slice.register(WaveModel, propagate)
