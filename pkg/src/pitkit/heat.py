"""Backward Euler heat propagators on the unit interval.

The model is du/dt = u_xx + f on (0, 1) with either homogeneous Dirichlet
or homogeneous Neumann boundaries, discretized with the centered three-point
stencil.  Only unknowns are stored: interior points for Dirichlet, all
points for Neumann.  The implicit solve is a hand-rolled Thomas elimination
so the inner loop has no dependencies beyond numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    ConfigError,
    GridLayout,
    PropagatorSpec,
    SingularSystemError,
    StateVector,
    propagate_slice,
)

# default source used by the experiment presets: a Gaussian bump in space,
# switched on and off by a train of Gaussian pulses in time
PULSE_TIMES = (0.1, 0.6, 1.35, 1.85)


@dataclass(frozen=True)
class SourceTerm:
    """Separable forcing f(x, t) = space_profile(x) * time_profile(t).

    kind "zero" is no forcing, "pulsed_gaussian" is the bump-with-pulses
    default, "modes" is a time-constant sum of sine modes (handy for
    cross-checks against the spectral solver).
    """

    kind: str = "zero"
    amplitude: float = 10.0
    x_center: float = 0.5
    space_decay: float = 100.0
    pulse_times: tuple[float, ...] = PULSE_TIMES
    time_decay: float = 100.0
    mode_coefficients: tuple[tuple[int, float], ...] = ()

    def __post_init__(self):
        if self.kind not in ("zero", "pulsed_gaussian", "modes"):
            raise ValueError(f"unknown source kind {self.kind!r}")

    @classmethod
    def zero(cls) -> "SourceTerm":
        return cls(kind="zero")

    @classmethod
    def pulsed(cls, **overrides) -> "SourceTerm":
        return cls(kind="pulsed_gaussian", **overrides)

    @classmethod
    def modes(cls, coefficients) -> "SourceTerm":
        return cls(kind="modes", mode_coefficients=tuple((int(m), float(a)) for m, a in coefficients))

    def space_profile(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "pulsed_gaussian":
            return self.amplitude * np.exp(-self.space_decay * (x - self.x_center) ** 2)
        out = np.zeros_like(x)
        for m, a in self.mode_coefficients:
            out += a * np.sin(m * math.pi * x)
        return out

    def time_profile(self, t: float) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "pulsed_gaussian":
            return float(sum(math.exp(-self.time_decay * (t - tj) ** 2) for tj in self.pulse_times))
        return 1.0

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero" or (self.kind == "modes" and not self.mode_coefficients)


def sample_source(source: SourceTerm, x: np.ndarray, t: float) -> np.ndarray:
    """Point values f(x, t) on the given coordinates."""
    return source.space_profile(x) * source.time_profile(t)


@dataclass(frozen=True)
class HeatModel:
    """Heat equation on (0, 1) with n_cells uniform cells.

    bc "dirichlet" stores the n_cells - 1 interior unknowns; "neumann"
    stores all n_cells + 1 grid values and closes the boundary rows with a
    ghost-point reflection, i.e. stencil (-2, 2)/dx^2, which keeps constant
    vectors exactly in the kernel of the discrete Laplacian.
    """

    n_cells: int = 128
    bc: str = "dirichlet"
    source: SourceTerm = SourceTerm.zero()

    def __post_init__(self):
        if self.n_cells < 2:
            raise ValueError(f"n_cells must be at least 2, got {self.n_cells}")
        if self.bc not in ("dirichlet", "neumann"):
            raise ValueError(f"unknown bc {self.bc!r}")

    @property
    def dx(self) -> float:
        return 1.0 / self.n_cells

    @property
    def n_unknowns(self) -> int:
        return self.n_cells - 1 if self.bc == "dirichlet" else self.n_cells + 1

    @property
    def grid_x(self) -> np.ndarray:
        if self.bc == "dirichlet":
            return np.arange(1, self.n_cells) * self.dx
        return np.arange(0, self.n_cells + 1) * self.dx

    def layout(self) -> GridLayout:
        return GridLayout(self.n_unknowns, self.dx, self.bc)

    def laplacian(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(sub, diag, sup) bands of the discrete Laplacian acting on unknowns."""
        n = self.n_unknowns
        inv_dx2 = 1.0 / self.dx**2
        sub = np.full(n - 1, inv_dx2)
        diag = np.full(n, -2.0 * inv_dx2)
        sup = np.full(n - 1, inv_dx2)
        if self.bc == "neumann":
            # ghost reflection: u_{-1} = u_1 and u_{n+1} = u_{n-1}
            sup[0] = 2.0 * inv_dx2
            sub[-1] = 2.0 * inv_dx2
        return sub, diag, sup

    def zero_state(self) -> StateVector:
        return StateVector(self.layout(), np.zeros(self.n_unknowns))


def conserved_mean(model: HeatModel, state: StateVector) -> float:
    """Trapezoidal mean of a Neumann state.

    This is the quantity the ghost-point closure conserves exactly under
    Backward Euler with zero source (the closure is the finite-volume
    scheme with half cells at the walls).
    """
    if model.bc != "neumann":
        raise ValueError("conserved_mean applies to Neumann states")
    w = np.ones(model.n_unknowns)
    w[0] = 0.5
    w[-1] = 0.5
    return float(np.dot(w, state.values) / model.n_cells)


# --------------------------------------------------------------------------
# tridiagonal systems


@dataclass(frozen=True)
class TridiagonalSystem:
    """Bands (sub, diag, sup) of sizes n-1, n, n-1."""

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray

    def __post_init__(self):
        sub = np.asarray(self.sub, dtype=float)
        diag = np.asarray(self.diag, dtype=float)
        sup = np.asarray(self.sup, dtype=float)
        n = diag.shape[0]
        if n < 1:
            raise ValueError("empty system")
        if sub.shape != (n - 1,) or sup.shape != (n - 1,):
            raise ValueError(
                f"band sizes must be ({n - 1},), ({n},), ({n - 1},); "
                f"got {sub.shape}, {diag.shape}, {sup.shape}"
            )
        object.__setattr__(self, "sub", sub)
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "sup", sup)

    @property
    def n(self) -> int:
        return self.diag.shape[0]

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.diag * x
        y[:-1] += self.sup * x[1:]
        y[1:] += self.sub * x[:-1]
        return y

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.sub, -1) + np.diag(self.sup, 1)


class _ThomasFactor:
    """Elimination multipliers for repeated solves against one matrix."""

    def __init__(self, system: TridiagonalSystem):
        sub = system.sub.tolist()
        diag = system.diag.tolist()
        sup = system.sup.tolist()
        n = len(diag)
        lower = [0.0] * (n - 1)
        pivot = [0.0] * n
        pivot[0] = diag[0]
        if pivot[0] == 0.0:
            raise SingularSystemError("zero pivot in row 0")
        for i in range(1, n):
            lower[i - 1] = sub[i - 1] / pivot[i - 1]
            pivot[i] = diag[i] - lower[i - 1] * sup[i - 1]
            if pivot[i] == 0.0:
                raise SingularSystemError(f"zero pivot in row {i}")
        self.n = n
        self.lower = lower
        self.pivot = pivot
        self.sup = sup

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        n = self.n
        lower = self.lower
        pivot = self.pivot
        sup = self.sup
        y = np.asarray(rhs, dtype=float).tolist()
        if len(y) != n:
            raise ValueError(f"rhs length {len(y)} does not match system size {n}")
        for i in range(1, n):
            y[i] -= lower[i - 1] * y[i - 1]
        y[n - 1] /= pivot[n - 1]
        for i in range(n - 2, -1, -1):
            y[i] = (y[i] - sup[i] * y[i + 1]) / pivot[i]
        return np.array(y)


def thomas_solve(system: TridiagonalSystem, rhs: np.ndarray) -> np.ndarray:
    """Solve the tridiagonal system by Gaussian elimination without pivoting.

    Intended for diagonally dominant matrices such as I - dt*L, where the
    pivots never fall below the diagonal's dominance margin.  A zero pivot
    raises SingularSystemError.
    """
    return _ThomasFactor(system).solve(rhs)


# --------------------------------------------------------------------------
# time stepping


def implicit_system(model: HeatModel, dt: float) -> TridiagonalSystem:
    """Matrix I - dt*L for one Backward Euler step."""
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    sub, diag, sup = model.laplacian()
    return TridiagonalSystem(-dt * sub, 1.0 - dt * diag, -dt * sup)


def backward_euler_step(model: HeatModel, state: StateVector, t: float, dt: float) -> StateVector:
    """One step of (I - dt*L) u_new = u + dt*f(., t + dt).

    The source is sampled at the step end, which is the consistent choice
    for the implicit scheme.
    """
    _check_layout(model, state)
    factor = _ThomasFactor(implicit_system(model, dt))
    return _step(model, factor, state, t, dt)


def _step(model: HeatModel, factor: _ThomasFactor, state: StateVector,
          t: float, dt: float) -> StateVector:
    rhs = state.values
    if not model.source.is_zero:
        rhs = rhs + dt * sample_source(model.source, model.grid_x, t + dt)
    return StateVector(state.layout, factor.solve(rhs))


def _check_layout(model: HeatModel, state: StateVector):
    if state.layout != model.layout():
        raise ValueError(f"state layout {state.layout} does not fit model {model}")


def propagate(model: HeatModel, spec: PropagatorSpec, state: StateVector,
              t_from: float, t_to: float) -> StateVector:
    """Advance across one slice with spec.steps_per_slice Backward Euler steps.

    Substep times are computed multiplicatively from the slice ends so a
    sweep over adjacent slices hits exactly the same instants as one long
    propagate over their union.
    """
    steps = spec.steps_per_slice
    if steps < 1:
        raise ConfigError(f"{spec.role} propagator needs steps_per_slice >= 1, got {steps}")
    if not t_to > t_from:
        raise ValueError(f"need t_to > t_from, got [{t_from}, {t_to}]")
    _check_layout(model, state)
    span = t_to - t_from
    dt = span / steps
    factor = _ThomasFactor(implicit_system(model, dt))
    for i in range(steps):
        t_i = t_from + (i * span) / steps
        state = _step(model, factor, state, t_i, dt)
    return state


propagate_slice.register(HeatModel, propagate)


def fd_decay_rate(model: HeatModel, m: int) -> float:
    """Eigenvalue mu_m = (2/dx^2) (1 - cos(m*pi*dx)) of -L for mode m.

    Dirichlet eigenvectors are sin(m*pi*x) sampled on the interior grid;
    Neumann eigenvectors are cos(m*pi*x) on the full grid (m = 0 gives the
    constant kernel vector, mu_0 = 0).
    """
    dx = model.dx
    return (2.0 / dx**2) * (1.0 - math.cos(m * math.pi * dx))
