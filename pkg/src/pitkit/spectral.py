"""Eigenmode solver for the heat equation on an interval.

In the sine basis on (0, L) every mode û_m obeys the scalar ODE
dû_m/dt = -(m*pi/L)^2 û_m + f̂_m(t), which this module integrates exactly:
the homogeneous part in closed form and the source convolution by composite
Gauss-Legendre quadrature.  The cosine basis (Neumann analogue) includes the
constant mode m = 0 whose decay rate is zero.

Coefficient arrays are ordered by position: entry j is mode j+1 in the sine
basis and mode j in the cosine basis.  A propagator that keeps ``mode_count``
modes keeps the first ``mode_count`` entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss

from .core import (
    ConfigError,
    GridLayout,
    ModeLayout,
    PropagatorSpec,
    StateVector,
    propagate_slice,
)
from .heat import PULSE_TIMES

_GAUSS_NODES, _GAUSS_WEIGHTS = leggauss(16)


@dataclass(frozen=True)
class ModeSource:
    """Per-mode forcing f̂_m(t) = c_m * time_profile(t).

    kind "zero": no forcing.  "constant": time profile 1.  "pulsed": the
    Gaussian pulse train shared with the grid models.  Coefficients are
    (mode, value) pairs; modes not listed get zero.
    """

    kind: str = "zero"
    coefficients: tuple[tuple[int, float], ...] = ()
    pulse_times: tuple[float, ...] = PULSE_TIMES
    time_decay: float = 100.0

    def __post_init__(self):
        if self.kind not in ("zero", "constant", "pulsed"):
            raise ValueError(f"unknown mode source kind {self.kind!r}")

    @classmethod
    def zero(cls) -> "ModeSource":
        return cls(kind="zero")

    @classmethod
    def constant(cls, coefficients) -> "ModeSource":
        return cls(kind="constant", coefficients=_as_pairs(coefficients))

    @classmethod
    def pulsed(cls, coefficients, **overrides) -> "ModeSource":
        return cls(kind="pulsed", coefficients=_as_pairs(coefficients), **overrides)

    def coefficient(self, m: int) -> float:
        for mode, value in self.coefficients:
            if mode == m:
                return value
        return 0.0

    def time_profile(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.ones_like(t)
        out = np.zeros_like(t)
        if self.kind == "pulsed":
            for tj in self.pulse_times:
                out += np.exp(-self.time_decay * (t - tj) ** 2)
        return out

    def mode_function(self, m: int) -> Optional[Callable[[np.ndarray], np.ndarray]]:
        """Callable f̂_m(t), or None when the mode is unforced."""
        if self.kind == "zero":
            return None
        c = self.coefficient(m)
        if c == 0.0:
            return None
        return lambda t: c * self.time_profile(t)


def _as_pairs(coefficients) -> tuple[tuple[int, float], ...]:
    if isinstance(coefficients, dict):
        items = sorted(coefficients.items())
    else:
        items = list(coefficients)
    return tuple((int(m), float(c)) for m, c in items)


@dataclass(frozen=True)
class SpectralModel:
    """Heat equation in eigenmode form on (0, length)."""

    length: float = math.pi
    basis: str = "sine"
    source: ModeSource = ModeSource.zero()

    def __post_init__(self):
        if self.length <= 0.0:
            raise ValueError(f"length must be positive, got {self.length}")
        if self.basis not in ("sine", "cosine"):
            raise ValueError(f"unknown basis {self.basis!r}")

    def decay_rate(self, m: int) -> float:
        """Rate (m*pi/length)^2 of mode m; m = 0 (cosine constant) gives 0.

        Grouped as (m*(pi/length))^2 so the default length pi yields the
        integer m**2 exactly."""
        return (m * (math.pi / self.length)) ** 2

    def mode_index(self, position: int) -> int:
        return position + 1 if self.basis == "sine" else position

    def mode_indices(self, m_max: int) -> np.ndarray:
        if self.basis == "sine":
            return np.arange(1, m_max + 1)
        return np.arange(0, m_max + 1)

    def layout(self, m_max: int) -> ModeLayout:
        return ModeLayout(m_max, self.basis, self.length)

    def zero_state(self, m_max: int) -> StateVector:
        return StateVector(self.layout(m_max), np.zeros(self.layout(m_max).size))

    def state_from_modes(self, amplitudes: dict[int, float], m_max: int) -> StateVector:
        layout = self.layout(m_max)
        values = np.zeros(layout.size)
        for m, a in amplitudes.items():
            position = m - 1 if self.basis == "sine" else m
            if not 0 <= position < layout.size:
                raise ValueError(f"mode {m} outside the layout with m_max {m_max}")
            values[position] = a
        return StateVector(layout, values)

    def slowest_uncovered_rate(self, covered_modes: int) -> float:
        """Decay rate of the slowest mode a coarse propagator with
        ``covered_modes`` retained modes does not handle."""
        if self.basis == "sine":
            return self.decay_rate(covered_modes + 1)
        return self.decay_rate(covered_modes)


# --------------------------------------------------------------------------
# exact per-mode integration


def source_mode_integral(rate: float, source_fn: Optional[Callable], t_from: float, t_to: float) -> float:
    """Convolution integral of one mode: int_{t_from}^{t_to} f(tau) * exp(-rate*(t_to - tau)) dtau.

    Composite 16-point Gauss-Legendre on fixed panels.  The panel width is
    at most min(0.01, span/8) so the pulse-train sources are resolved, and
    shrinks further for fast-decaying modes so rate*width stays moderate.
    Deterministic: the panel count depends only on (rate, t_from, t_to).
    """
    if rate < 0.0:
        raise ValueError(f"rate must be nonnegative, got {rate}")
    if t_to < t_from:
        raise ValueError(f"need t_to >= t_from, got [{t_from}, {t_to}]")
    if source_fn is None or t_to == t_from:
        return 0.0
    span = t_to - t_from
    n_panels = max(8, math.ceil(span / 0.01), math.ceil(span * rate / 8.0))
    edges = t_from + span * np.arange(n_panels + 1) / n_panels
    half = 0.5 * span / n_panels
    centers = 0.5 * (edges[:-1] + edges[1:])
    # nodes laid out as (panel, gauss point)
    taus = centers[:, None] + half * _GAUSS_NODES[None, :]
    integrand = source_fn(taus) * np.exp(-rate * (t_to - taus))
    return float(half * np.sum(integrand @ _GAUSS_WEIGHTS))


def exact_mode_solution(rate: float, u0: float, source_fn: Optional[Callable],
                        t: float, t_from: float = 0.0) -> float:
    """Mode value at time t given the value u0 at t_from."""
    return u0 * math.exp(-rate * (t - t_from)) + source_mode_integral(rate, source_fn, t_from, t)


def spectral_propagate(model: SpectralModel, spec: PropagatorSpec, state: StateVector,
                       t_from: float, t_to: float) -> StateVector:
    """Advance the first spec.mode_count modes exactly; zero the rest.

    mode_count == 0 returns the zero state, which is how a disabled coarse
    propagator contributes nothing to the parareal correction.
    """
    layout = state.layout
    if not isinstance(layout, ModeLayout) or layout.basis != model.basis or layout.length != model.length:
        raise ValueError(f"state layout {layout} does not fit model {model}")
    if not t_to > t_from:
        raise ValueError(f"need t_to > t_from, got [{t_from}, {t_to}]")
    kept = spec.mode_count
    if kept > layout.size:
        raise ConfigError(f"mode_count {kept} exceeds the state's {layout.size} modes")
    values = np.zeros(layout.size)
    if kept == 0:
        return StateVector(layout, values)
    span = t_to - t_from
    positions = np.arange(kept)
    modes = positions + 1 if model.basis == "sine" else positions
    rates = (modes * math.pi / model.length) ** 2
    values[:kept] = state.values[:kept] * np.exp(-rates * span)
    if model.source.kind != "zero":
        for position in range(kept):
            m = int(modes[position])
            fn = model.source.mode_function(m)
            if fn is not None:
                values[position] += source_mode_integral(rates[position], fn, t_from, t_to)
    return StateVector(layout, values)


propagate_slice.register(SpectralModel, spectral_propagate)


# --------------------------------------------------------------------------
# grid <-> mode transforms (direct sums, O(n * m))


def project_to_modes(state: StateVector, m_max: int) -> StateVector:
    """Expand a grid state in the discrete sine or cosine basis.

    Dirichlet grids map to the sine basis, Neumann grids to the cosine
    basis.  m_max beyond the grid's Nyquist limit raises ValueError.
    """
    layout = state.layout
    if not isinstance(layout, GridLayout) or layout.components != 1:
        raise ValueError("project_to_modes expects a scalar grid state")
    if layout.bc == "dirichlet":
        n_cells = layout.n_points + 1
        if m_max > n_cells - 1:
            raise ValueError(f"m_max {m_max} beyond Nyquist limit {n_cells - 1}")
        length = n_cells * layout.dx
        i = np.arange(1, n_cells)
        m = np.arange(1, m_max + 1)
        basis = np.sin(np.pi * np.outer(m, i) / n_cells)
        coeffs = (2.0 / n_cells) * (basis @ state.values)
        return StateVector(ModeLayout(m_max, "sine", length), coeffs)
    if layout.bc == "neumann":
        n_cells = layout.n_points - 1
        if m_max > n_cells - 1:
            raise ValueError(f"m_max {m_max} beyond Nyquist limit {n_cells - 1}")
        length = n_cells * layout.dx
        i = np.arange(0, n_cells + 1)
        w = np.ones(n_cells + 1)
        w[0] = 0.5
        w[-1] = 0.5
        weighted = w * state.values
        m = np.arange(0, m_max + 1)
        basis = np.cos(np.pi * np.outer(m, i) / n_cells)
        coeffs = (2.0 / n_cells) * (basis @ weighted)
        coeffs[0] *= 0.5
        return StateVector(ModeLayout(m_max, "cosine", length), coeffs)
    raise ValueError(f"no mode basis for bc {layout.bc!r}")


def reconstruct(state: StateVector, grid: GridLayout) -> StateVector:
    """Evaluate a mode state on a grid layout (inverse of project_to_modes
    for band-limited data)."""
    layout = state.layout
    if not isinstance(layout, ModeLayout):
        raise ValueError("reconstruct expects a mode state")
    if layout.basis == "sine":
        if grid.bc != "dirichlet":
            raise ValueError(f"sine modes reconstruct on a dirichlet grid, not {grid.bc!r}")
        n_cells = grid.n_points + 1
        i = np.arange(1, n_cells)
        m = np.arange(1, layout.m_max + 1)
        basis = np.sin(np.pi * np.outer(i, m) / n_cells)
        return StateVector(grid, basis @ state.values)
    if grid.bc != "neumann":
        raise ValueError(f"cosine modes reconstruct on a neumann grid, not {grid.bc!r}")
    n_cells = grid.n_points - 1
    i = np.arange(0, n_cells + 1)
    m = np.arange(0, layout.m_max + 1)
    basis = np.cos(np.pi * np.outer(i, m) / n_cells)
    return StateVector(grid, basis @ state.values)


def parseval_norm(state: StateVector, length: Optional[float] = None) -> float:
    """L2 norm of the function represented by a coefficient vector."""
    layout = state.layout
    if not isinstance(layout, ModeLayout):
        raise ValueError("parseval_norm expects a mode state")
    L = layout.length if length is None else length
    v = state.values
    if layout.basis == "sine":
        return float(np.sqrt(0.5 * L * np.dot(v, v)))
    return float(np.sqrt(L * v[0] ** 2 + 0.5 * L * np.dot(v[1:], v[1:])))


def project_space_profile(profile_fn: Callable, m_max: int, length: float,
                          basis: str = "sine") -> tuple[tuple[int, float], ...]:
    """Sine (or cosine) expansion coefficients of a space profile on (0, length).

    Fixed-panel Gauss-Legendre quadrature, 64 panels of 16 points, which is
    plenty for the smooth bump profiles used by the presets.
    """
    n_panels = 64
    edges = length * np.arange(n_panels + 1) / n_panels
    half = 0.5 * length / n_panels
    centers = 0.5 * (edges[:-1] + edges[1:])
    xs = (centers[:, None] + half * _GAUSS_NODES[None, :]).ravel()
    ws = np.tile(half * _GAUSS_WEIGHTS, n_panels)
    fx = np.asarray(profile_fn(xs), dtype=float)
    pairs = []
    if basis == "sine":
        for m in range(1, m_max + 1):
            c = (2.0 / length) * float(np.dot(ws, fx * np.sin(m * np.pi * xs / length)))
            pairs.append((m, c))
    elif basis == "cosine":
        for m in range(0, m_max + 1):
            scale = 1.0 / length if m == 0 else 2.0 / length
            c = scale * float(np.dot(ws, fx * np.cos(m * np.pi * xs / length)))
            pairs.append((m, c))
    else:
        raise ValueError(f"unknown basis {basis!r}")
    return tuple(pairs)
