import math

import numpy as np
import pytest

from spin_sbs.core.ensemble import (
    CouplingDistribution,
    ExperimentConfig,
    average_series,
    default_time_grid,
    realization_rng,
    run_experiment,
    sample_couplings,
)
from spin_sbs.core.errors import ConfigError, ValidationError
from spin_sbs.core.sbs import ThermalEnvironment, gamma_short_time, macrofraction_fidelity, sz_variance_thermal
from spin_sbs.core.spin import SpinQuantumNumber

J_LIST = tuple(SpinQuantumNumber(n) for n in range(1, 6))


def _small(**changes):
    base = dict(time_grid=np.linspace(0.0, 5.0, 26), realizations=6)
    base.update(changes)
    return ExperimentConfig(**base)


# ----- sampling -----

def test_coupling_distribution_validation():
    for kwargs in (dict(kind="normal"), dict(low=-1.0), dict(low=2.0, high=1.0),
                   dict(high=math.inf), dict(seed=-1), dict(seed=2 ** 64)):
        with pytest.raises(ValidationError):
            CouplingDistribution(**kwargs)


def test_sampling_is_keyed_by_realization():
    dist = CouplingDistribution(seed=42)
    a = sample_couplings(dist, 10, 3)
    np.testing.assert_array_equal(a, sample_couplings(dist, 10, 3))
    assert not np.array_equal(a, sample_couplings(dist, 10, 4))
    assert not np.array_equal(a, sample_couplings(CouplingDistribution(seed=43), 10, 3))
    assert np.all((a >= 0.0) & (a < 10.0))
    assert realization_rng(42, 3).random() == realization_rng(42, 3).random()
    with pytest.raises(ValidationError):
        sample_couplings(dist, 0, 0)
    with pytest.raises(ValidationError):
        sample_couplings(dist, 3, -1)


def test_degenerate_interval_gives_constant_couplings():
    g = sample_couplings(CouplingDistribution(low=2.5, high=2.5), 7, 0)
    np.testing.assert_array_equal(g, 2.5)


def test_uniform_moments():
    n = 100_000
    g = sample_couplings(CouplingDistribution(seed=7), n, 0)
    mean_sigma = math.sqrt(100.0 / 12.0 / n)
    var_sigma = math.sqrt((10.0 ** 4 / 80.0 - (100.0 / 12.0) ** 2) / n)
    assert abs(np.mean(g) - 5.0) < 4 * mean_sigma
    assert abs(np.var(g) - 100.0 / 12.0) < 4 * var_sigma


def test_average_series():
    rng = np.random.default_rng(5)
    a = rng.uniform(size=(13, 3, 40))
    np.testing.assert_allclose(average_series(a), np.mean(a, axis=0), rtol=1e-14)
    np.testing.assert_array_equal(average_series(a), average_series(a[::-1]))
    with pytest.raises(ValidationError):
        average_series(np.zeros((0, 4)))


def test_default_grid():
    t = default_time_grid()
    assert t[0] == 0.0 and t[-1] == 30.0 and t.size == 600


# ----- configuration -----

def test_experiment_defaults():
    cfg = ExperimentConfig()
    assert cfg.j_list == J_LIST
    assert cfg.beta_omega == 0.9
    assert (cfg.m, cfg.m_prime) == (-0.5, 0.5)
    assert cfg.environment_count == 10
    assert cfg.realizations == 100
    assert cfg.coupling.seed == 42
    assert cfg.validate() == []


def test_experiment_validation_collects_problems():
    cfg = _small(m=1.5, fractions=0, realizations=0, beta_omega=-1.0)
    keys = {k for k, _ in cfg.validate()}
    assert {"spin/m", "layout/fractions", "ensemble/realizations", "environment/beta_omega"} <= keys
    with pytest.raises(ConfigError) as err:
        run_experiment(cfg)
    assert len(err.value.problems) >= 4


def test_layout_per_realization():
    cfg = _small(unobserved_size=3, fraction_size=2, fractions=2)
    layout = cfg.layout(4)
    assert layout.n == 7
    assert layout.unobserved == (0, 1, 2)
    assert layout.macrofractions == ((3, 4), (5, 6))
    np.testing.assert_array_equal(layout.couplings, sample_couplings(cfg.coupling, 7, 4))


# ----- runs -----

def test_run_shapes_and_start_values():
    cfg = _small(j_list=J_LIST[:2], fractions=2)
    run = run_experiment(cfg)
    assert run.realization_indices == tuple(range(6))
    assert run.seed == 42
    for j in J_LIST[:2]:
        s = run[j]
        assert s.abs_gamma.shape == (6, 26)
        assert s.fidelity.shape == (6, 2, 26)
        assert s.bound.shape == (6, 26)
        np.testing.assert_allclose(s.abs_gamma[:, 0], 1.0, atol=1e-12)
        np.testing.assert_allclose(s.fidelity[:, :, 0], 1.0, atol=1e-12)
        np.testing.assert_allclose(s.bound[:, 0], 3.0, atol=1e-12)
        assert s.mean_fidelity.shape == (2, 26)


def test_runs_are_reproducible():
    a = run_experiment(_small())
    b = run_experiment(_small())
    c = run_experiment(_small(workers=3))
    for j in J_LIST:
        for name in ("abs_gamma", "fidelity", "bound"):
            np.testing.assert_array_equal(getattr(a[j], name), getattr(b[j], name))
            np.testing.assert_array_equal(getattr(a[j], name), getattr(c[j], name))


def test_halves_average_to_whole():
    whole = run_experiment(_small(realizations=10))
    first = run_experiment(_small(realizations=5))
    second = run_experiment(_small(realizations=5, realization_offset=5))
    assert second.realization_indices == (5, 6, 7, 8, 9)
    for j in J_LIST:
        halves = 0.5 * (first[j].mean_abs_gamma + second[j].mean_abs_gamma)
        np.testing.assert_allclose(halves, whole[j].mean_abs_gamma, atol=1e-12)
        halves = 0.5 * (first[j].mean_fidelity + second[j].mean_fidelity)
        np.testing.assert_allclose(halves, whole[j].mean_fidelity, atol=1e-12)


def test_single_realization_of_constant_couplings():
    cfg = _small(realizations=1, coupling=CouplingDistribution(low=3.0, high=3.0))
    run = run_experiment(cfg)
    j = J_LIST[2]
    np.testing.assert_array_equal(run[j].mean_abs_gamma, run[j].abs_gamma[0])
    env = ThermalEnvironment(j, 0.9)
    expected = abs(env.gamma(3.0, cfg.time_grid, -0.5, 0.5)) ** 5
    np.testing.assert_allclose(run[j].abs_gamma[0], expected, rtol=1e-12, atol=1e-15)


def test_averaged_decay_follows_short_time_form():
    cfg = _small(realizations=20, time_grid=np.array([0.0]))
    beta = cfg.beta_omega
    g2 = np.mean([cfg.layout(i).mean_g2(range(cfg.unobserved_size)) for i in cfg.realization_indices()])
    for j in J_LIST:
        rate = 2.0 * cfg.unobserved_size * g2 * sz_variance_thermal(j, beta)
        t = math.sqrt(0.02 / rate)
        run = run_experiment(_small(realizations=20, time_grid=np.array([t])))
        expected = gamma_short_time(cfg.unobserved_size, g2, 1.0, t, j, beta)
        assert run[j].mean_abs_gamma[0] == pytest.approx(expected, rel=0.02)


@pytest.mark.slow
def test_random_coupling_reference_run():
    cfg = ExperimentConfig()
    run = run_experiment(cfg)
    t = run.time_grid

    # averaged macrofraction fidelity is ordered in j at early times
    early = (t >= 0.5) & (t <= 5.0)
    for a, b in zip(J_LIST, J_LIST[1:]):
        assert np.all(run[b].mean_fidelity[0, early] <= run[a].mean_fidelity[0, early] + 1e-12)

    # averaged decoherence stays small for j >= 1 once it has set in
    late = (t >= 1.0) & (t <= 30.0)
    for j in J_LIST[1:]:
        above = np.mean(run[j].mean_abs_gamma[late] >= 0.2)
        assert above <= 0.05

    # single realizations still show fidelity revivals for the largest spin
    j = J_LIST[-1]
    env = ThermalEnvironment(j, cfg.beta_omega)
    fine = np.linspace(5.0, 30.0, 25001)
    best = max(float(np.max(macrofraction_fidelity(cfg.layout(i), env, 0, cfg.m, cfg.m_prime, fine)))
               for i in cfg.realization_indices())
    assert best > 0.5
