import math

import numpy as np
import pytest

import dnls


def test_hamiltonian_stencil():
    q = dnls.Potential.zero(10)
    u = np.zeros(21, dtype=complex)
    u[10] = 1.0
    hu = dnls.apply_hamiltonian(q, u)
    assert hu[10] == 2.0
    assert hu[9] == -1.0 and hu[11] == -1.0


def test_free_scattering_and_classification():
    q = dnls.Potential.zero(20)
    d = dnls.scattering_data(q, 1.0)
    assert abs(d["T"] - 1.0) < 1e-14
    assert abs(d["R_plus"]) < 1e-14
    g = dnls.classify_genericity(q)
    assert not g["is_generic"]
    assert g["resonant_edges"] == [0, 4]


def test_unitarity_two_site():
    q = dnls.Potential.two_site(30, 0.7, -0.3)
    for theta in np.linspace(0.1, math.pi - 0.1, 17):
        d = dnls.scattering_data(q, theta)
        assert abs(abs(d["T"]) ** 2 + abs(d["R_plus"]) ** 2 - 1.0) < 1e-12


def test_bound_state_and_resolvent():
    q = dnls.Potential.single_site(60, -1.0)
    ev, vecs = dnls.discrete_spectrum(q)
    assert len(ev) == 1
    assert abs(ev[0] - (2 - math.sqrt(5))) < 1e-12
    K = dnls.resolvent_kernel(q, -5.0, 4)
    assert K.shape == (9, 9)
    assert np.allclose(K, K.T)


def test_propagator_matches_free_kernel():
    q = dnls.Potential.zero(8)
    K = dnls.continuous_propagator(q, 1.5)
    for k in range(-8, 9):
        assert abs(K[k + 8, 8] - dnls.free_propagator(1.5, k)) < 1e-12


def test_jost_free():
    m = dnls.jost_m(dnls.Potential.zero(5), "+", 0.7)
    assert np.allclose(m, 1.0)
    with pytest.raises(ValueError):
        dnls.jost_m(dnls.Potential.zero(5), "x", 0.7)


def test_branch_and_decomposition():
    q = dnls.Potential.exponential(96)
    fam = dnls.StandingWaveFamily(q)
    E0, entries = dnls.solve_branch(q, [fam.E0 * 1.01, fam.E0 * 1.1])
    assert abs(E0 - fam.E0) < 1e-12
    for e in entries:
        assert e["converged"]
        assert dnls.standing_wave_residual(q, e["phi"], e["omega"]) < 1e-10
    om = fam.E0 * 1.05
    u = np.exp(0.3j) * fam.phi(om)
    d = fam.decompose(u, om * 1.001, 0.2)
    assert abs(d["omega"] - om) < 1e-10
    assert abs(d["Theta"] - 0.3) < 1e-10


def test_evolution_conserves_norm():
    q = dnls.Potential.exponential(64)
    n = np.arange(-64, 65)
    u0 = np.exp(-n**2 / 8.0).astype(complex)
    times, states, norms = dnls.evolve(q, u0, 5.0)
    assert states.shape == (len(times), 129)
    assert max(abs(x - norms[0]) for x in norms) < 1e-12


def test_hypothesis_error():
    with pytest.raises(dnls.HypothesisError):
        dnls.StandingWaveFamily(dnls.Potential.zero(20))


def test_config_round_trip():
    ini = dnls.default_config()
    assert dnls.normalize_config(ini) == ini
    with pytest.raises(ValueError):
        dnls.normalize_config("[grids]\ntheta_grid_size = 10\n")


def test_short_stability_run():
    fam = dnls.StandingWaveFamily(dnls.Potential.exponential(128))
    r = dnls.stability_run(dnls.Potential.exponential(256), fam, fam.E0 * 1.1, 1e-3, 2.0)
    assert not r["tube_exit"]
    assert r["max_constraint_ratio"] < 1e-9
    assert len(r["times"]) == len(r["omega"])
