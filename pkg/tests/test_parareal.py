import dataclasses
import math

import numpy as np
import pytest

from pitkit.core import ConfigError, PropagatorSpec, StateVector, make_uniform_partition
from pitkit.heat import HeatModel, SourceTerm, implicit_system, sample_source
from pitkit.parareal import (
    PararealConfig,
    initialize_guess,
    parareal_iterate,
    reference_fine_sequential,
    run,
)
from pitkit.presets import build_parareal, experiment_preset
from pitkit.spectral import ModeSource, SpectralModel


def _heat_config(n_slices=6, guess="replicate_u0", coarse=True, **overrides):
    model = HeatModel(n_cells=32, bc="dirichlet", source=SourceTerm.pulsed())
    kwargs = dict(
        partition=make_uniform_partition(3.0, n_slices),
        u0=model.zero_state(),
        fine=PropagatorSpec(model, "fine", steps_per_slice=288 // n_slices),
        coarse=PropagatorSpec(model, "coarse", steps_per_slice=1) if coarse else None,
        max_iterations=n_slices,
        initial_guess=guess,
        tolerance=0.0,
    )
    kwargs.update(overrides)
    return PararealConfig(**kwargs)


def _spectral_config(m_fine=8, m_coarse=0, guess="zero", coefficients=None, **overrides):
    model = SpectralModel()
    amplitudes = coefficients or {m: 1.0 / m for m in range(1, m_fine + 1)}
    kwargs = dict(
        partition=make_uniform_partition(3.0, 6),
        u0=model.state_from_modes(amplitudes, m_fine),
        fine=PropagatorSpec(model, "fine", mode_count=m_fine),
        coarse=PropagatorSpec(model, "coarse", mode_count=m_coarse),
        max_iterations=6,
        initial_guess=guess,
        tolerance=0.0,
    )
    kwargs.update(overrides)
    return PararealConfig(**kwargs)


# -------------------------------------------------------------- exactness


@pytest.mark.parametrize("guess", ["replicate_u0", "zero", "random"])
def test_slice_n_is_exact_after_n_iterations(guess):
    config = _heat_config(guess=guess, coarse=True)
    reference = reference_fine_sequential(config)
    state = initialize_guess(config)
    for k in range(1, config.partition.n_slices + 1):
        state = parareal_iterate(state, config)
        for n in range(k + 1):
            assert np.array_equal(state.values[n].values, reference[n].values), (
                f"slice {n} not exact at iteration {k}"
            )


def test_finite_termination_without_coarse():
    config = _heat_config(guess="replicate_u0", coarse=False)
    reference = reference_fine_sequential(config)
    state = initialize_guess(config)
    for _ in range(config.partition.n_slices):
        state = parareal_iterate(state, config)
    for n, (got, want) in enumerate(zip(state.values, reference)):
        assert np.array_equal(got.values, want.values), f"slice {n} differs"


def test_single_slice_converges_in_one_iteration():
    config = _heat_config(n_slices=1, coarse=False, max_iterations=1)
    reference = reference_fine_sequential(config)
    state = parareal_iterate(initialize_guess(config), config)
    assert np.array_equal(state.values[1].values, reference[1].values)


# ----------------------------------------------- spectral error recurrence


def test_zero_guess_error_contracts_at_slowest_uncovered_rate():
    """Without a coarse propagator and a zero guess the sup error over slice
    boundaries drops by exactly exp(-rate_1 * dT) per iteration, where the
    sup is measured in the mode norm."""
    config = _spectral_config(m_coarse=0, guess="zero",
                              coefficients={1: 1.0, 8: 0.7})
    errors = {}

    def capture(k, values):
        errors[k] = values

    trace = run(config, on_iteration=capture)
    sups = {k: max(trace.errors_at(k)) for k in trace.iterations()}
    a = math.exp(-config.fine.model.decay_rate(1) * config.partition.delta_t)
    for k in range(1, 6):
        assert sups[k] == pytest.approx(a**k * sups[0], rel=1e-12, abs=0.0)


@pytest.mark.parametrize("m_coarse", [1, 3])
def test_covered_modes_exact_from_first_iteration(m_coarse):
    config = _spectral_config(m_coarse=m_coarse, guess="zero",
                              coefficients={1: 1.0, 2: 0.9, 3: 0.8, 4: 0.7, 8: 0.4})
    reference = reference_fine_sequential(config)
    state = parareal_iterate(initialize_guess(config), config)
    for n in range(1, config.partition.n_slices + 1):
        diff = state.values[n].values - reference[n].values
        assert np.array_equal(diff[:m_coarse], np.zeros(m_coarse)), (
            f"covered modes wrong at slice {n}"
        )


def test_bound_attained_when_uncovered_modes_carry_the_error():
    """With a coarse propagator the covered modes drop out after one
    iteration, so initial data on uncovered modes only makes the analytic
    bound exact: every remaining mode contracts at its own rate and the
    slowest one wins the sup."""
    config = _spectral_config(m_coarse=1, guess="zero",
                              coefficients={2: 1.0, 8: 0.7}, max_iterations=5)
    trace = run(config)
    rate = config.fine.model.slowest_uncovered_rate(1)
    sup0 = max(trace.errors_at(0))
    for k in trace.iterations():
        want = math.exp(-rate * k * config.partition.delta_t) * sup0
        assert max(trace.errors_at(k)) == pytest.approx(want, rel=1e-12, abs=0.0)


def test_error_bound_holds_for_random_guess():
    config = _spectral_config(m_coarse=1, guess="random", seed=7)
    trace = run(config)
    model = config.fine.model
    rate = model.slowest_uncovered_rate(1)
    sup0 = max(trace.errors_at(0))
    for k in trace.iterations():
        sup = max(trace.errors_at(k))
        bound = math.exp(-rate * k * config.partition.delta_t) * sup0
        assert sup <= bound + 1e-12, f"bound violated at k={k}"


def test_trace_bound_column_matches_analytic_formula():
    config = _spectral_config(m_coarse=3, guess="zero",
                              coefficients={1: 1.0, 2: 0.9, 3: 0.8, 4: 0.7, 8: 0.4})
    trace = run(config)
    rate = config.fine.model.slowest_uncovered_rate(3)
    sup0 = max(trace.errors_at(0))
    for entry in trace.entries:
        want = math.exp(-rate * entry.k * config.partition.delta_t) * sup0
        assert entry.bound == pytest.approx(want, rel=1e-14, abs=0.0)
        assert entry.error_l2 <= entry.bound + 1e-12


def test_spectral_reference_is_pure_decay_without_source():
    config = _spectral_config(m_coarse=0, coefficients={2: 1.5})
    reference = reference_fine_sequential(config)
    rate = config.fine.model.decay_rate(2)
    for n, state in enumerate(reference):
        t = config.partition.boundaries[n]
        assert state.values[1] == pytest.approx(1.5 * math.exp(-rate * t), rel=1e-13)


# ------------------------------------------------------------ oracle check


def test_heat_iteration_matches_dense_linear_algebra():
    """Replay one full parareal iteration with dense solves and compare."""
    model = HeatModel(n_cells=16, bc="dirichlet", source=SourceTerm.pulsed())
    partition = make_uniform_partition(1.0, 4)
    config = PararealConfig(
        partition=partition,
        u0=model.zero_state(),
        fine=PropagatorSpec(model, "fine", steps_per_slice=8),
        coarse=PropagatorSpec(model, "coarse", steps_per_slice=1),
        max_iterations=3,
        initial_guess="replicate_u0",
        tolerance=0.0,
    )

    def dense_sweep(u, t0, t1, steps):
        dt = (t1 - t0) / steps
        a = implicit_system(model, dt).dense()
        out = np.array(u, dtype=float)
        for i in range(steps):
            t_next = t0 + (i + 1) * (t1 - t0) / steps
            rhs = out + dt * sample_source(model.source, model.grid_x, t_next)
            out = np.linalg.solve(a, rhs)
        return out

    state = initialize_guess(config)
    for _ in range(2):
        old = [v.values for v in state.values]
        state = parareal_iterate(state, config)
        new = [config.u0.values]
        for n in range(4):
            t0, t1 = partition.slice_bounds(n)
            fine = dense_sweep(old[n], t0, t1, 8)
            g_new = dense_sweep(new[n], t0, t1, 1)
            g_old = dense_sweep(old[n], t0, t1, 1)
            new.append(fine + g_new - g_old)
        for n in range(5):
            assert np.max(np.abs(state.values[n].values - new[n])) < 1e-13


# ------------------------------------------------------------- determinism


def test_parallel_and_serial_fine_solves_agree_bitwise():
    config = _heat_config(guess="coarse_sweep")
    t1 = run(config, fine_parallel=True)
    t2 = run(config, fine_parallel=False)
    assert list(t1.iterations()) == list(t2.iterations())
    for k in t1.iterations():
        assert list(t1.errors_at(k)) == list(t2.errors_at(k))


def test_repeated_runs_are_identical():
    config = build_parareal(experiment_preset("heat-dirichlet-N24"))
    t1 = run(config)
    t2 = run(config)
    for k in t1.iterations():
        assert list(t1.errors_at(k)) == list(t2.errors_at(k))


# ---------------------------------------------------------- initial guesses


def test_coarse_sweep_guess_is_sequential_coarse_run():
    config = _heat_config(guess="coarse_sweep")
    state = initialize_guess(config)
    t0, t1 = config.partition.slice_bounds(0)
    from pitkit.core import propagate_slice

    want = propagate_slice(config.coarse.model, config.coarse, config.u0, t0, t1)
    assert np.array_equal(state.values[1].values, want.values)
    assert len(state.values) == config.partition.n_slices + 1


def test_replicate_guess_copies_u0_everywhere():
    model = HeatModel(n_cells=16, bc="neumann", source=SourceTerm.zero())
    u0 = StateVector(model.layout(), np.linspace(0.0, 1.0, 17))
    config = _heat_config(guess="replicate_u0", u0=u0, fine=PropagatorSpec(model, "fine", steps_per_slice=4))
    state = initialize_guess(config)
    for v in state.values:
        assert np.array_equal(v.values, u0.values)


def test_zero_guess_keeps_initial_boundary():
    config = _spectral_config(guess="zero", coefficients={1: 2.0})
    state = initialize_guess(config)
    assert np.array_equal(state.values[0].values, config.u0.values)
    for v in state.values[1:]:
        assert not v.values.any()


def test_random_guess_depends_on_seed():
    c1 = _heat_config(guess="random", seed=1)
    c2 = _heat_config(guess="random", seed=2)
    s1, s1b = initialize_guess(c1), initialize_guess(c1)
    s2 = initialize_guess(c2)
    assert np.array_equal(s1.values[3].values, s1b.values[3].values)
    assert not np.array_equal(s1.values[3].values, s2.values[3].values)


def test_default_guess_follows_coarse_availability():
    assert _heat_config(guess="default", coarse=True).resolved_guess == "coarse_sweep"
    assert _heat_config(guess="default", coarse=False).resolved_guess == "replicate_u0"


# ------------------------------------------------------------- validation


def test_coarse_sweep_without_coarse_rejected():
    with pytest.raises(ConfigError):
        _heat_config(guess="coarse_sweep", coarse=False)


def test_unknown_guess_rejected():
    with pytest.raises(ConfigError):
        _heat_config(guess="smooth")


def test_negative_tolerance_rejected():
    with pytest.raises(ConfigError):
        _heat_config(tolerance=-1.0)


def test_spectral_coarse_must_keep_fewer_modes():
    with pytest.raises(ConfigError):
        _spectral_config(m_fine=4, m_coarse=4)


def test_wrong_role_rejected():
    model = HeatModel(n_cells=16)
    with pytest.raises(ConfigError):
        PararealConfig(
            partition=make_uniform_partition(1.0, 2),
            u0=model.zero_state(),
            fine=PropagatorSpec(model, "coarse", steps_per_slice=2),
        )


def test_early_stop_respects_tolerance():
    config = _spectral_config(guess="zero", coefficients={1: 1.0},
                              m_coarse=0, tolerance=1e-1, max_iterations=6)
    trace = run(config)
    ks = list(trace.iterations())
    assert ks[-1] < 6
    assert max(trace.errors_at(ks[-1])) <= 1e-1
    assert max(trace.errors_at(ks[-2])) > 1e-1


def test_zero_tolerance_disables_early_stop():
    config = _heat_config(guess="coarse_sweep", tolerance=0.0, max_iterations=6)
    trace = run(config)
    assert list(trace.iterations()) == list(range(7))


# ----------------------------------------------------- qualitative behavior


def test_heat_with_coarse_contracts_fast():
    config = build_parareal(experiment_preset("heat-dirichlet-N24"))
    trace = run(config)
    sups = {k: max(trace.errors_at(k)) for k in trace.iterations()}
    for k in range(1, 10):
        assert sups[k + 1] < 0.5 * sups[k]
    assert sups[6] < 1e-3 * sups[1]


def test_heat_without_coarse_stalls():
    base = experiment_preset("heat-neumann-N24")
    config = build_parareal(dataclasses.replace(base, coarse_role="none", iterations=5))
    trace = run(config)
    sups = {k: max(trace.errors_at(k)) for k in trace.iterations()}
    assert sups[5] >= 0.5 * sups[1]


def test_heat_without_coarse_errors_never_grow():
    base = experiment_preset("heat-dirichlet-N6")
    config = build_parareal(dataclasses.replace(base, coarse_role="none", iterations=6))
    trace = run(config)
    sups = [max(trace.errors_at(k)) for k in trace.iterations()]
    for earlier, later in zip(sups, sups[1:]):
        assert later <= earlier * (1.0 + 1e-12)
    assert sups[-1] == 0.0
