"""Energy functionals, current-coupled gradients, and field minimization."""

import numpy as np
import pytest

from fermifield.builders import (
    bump_potential,
    cutoff_ball,
    random_divfree_potential,
)
from fermifield.field_opt import (
    BALL_GRAD,
    GLOBAL_CURL,
    PSI_OUTSIDE,
    EnergyConfig,
    Schedule,
    energy_directional_derivative,
    minimize,
    total_energy,
    variant_ordering_check,
)
from fermifield.grid import GridSpec, divergence
from fermifield.operators import HamiltonianSpec


def test_energy_config_validation():
    with pytest.raises(ValueError):
        EnergyConfig(beta=-1.0)
    with pytest.raises(ValueError):
        EnergyConfig(beta=1.0, variant="nope")
    with pytest.raises(ValueError):
        EnergyConfig(beta=1.0, variant=BALL_GRAD)  # missing R
    with pytest.raises(ValueError):
        EnergyConfig(beta=1.0, variant=BALL_GRAD, r=1.0, R=0.5)


def test_total_energy_parts_add_up(spec3d):
    A = random_divfree_potential(spec3d.grid, seed=1, kmax=2, amplitude=0.2)
    cfg = EnergyConfig(beta=2.0, variant=GLOBAL_CURL)
    E, parts = total_energy(A, spec3d, cfg)
    assert E == pytest.approx(parts["trace"] + parts["beta_field"])
    assert parts["field"] >= 0.0
    assert parts["beta_field"] == pytest.approx(2.0 * parts["field"])


def test_zero_field_energy_has_no_field_part(spec3d):
    cfg = EnergyConfig(beta=5.0, variant=GLOBAL_CURL)
    E, parts = total_energy(None, spec3d, cfg)
    assert parts["field"] == 0.0
    assert E == pytest.approx(parts["trace"])


@pytest.mark.parametrize("flavor,d,N", [("schrodinger", 2, 8), ("pauli", 3, 4)])
def test_gradient_matches_finite_differences(flavor, d, N):
    g = GridSpec(d=d, N=N, L=2.0)
    spec = HamiltonianSpec(grid=g, h=0.6, flavor=flavor,
                           V=bump_potential(g, amplitude=8.0, radius=0.7))
    cfg = EnergyConfig(beta=2.0, variant=GLOBAL_CURL)
    A = random_divfree_potential(g, seed=2, kmax=1, amplitude=0.3)
    a = random_divfree_potential(g, seed=9, kmax=1, amplitude=1.0)
    dd = energy_directional_derivative(A, a, spec, cfg)
    eps = 1e-5
    Ep, _ = total_energy(A + eps * a, spec, cfg)
    Em, _ = total_energy(A - eps * a, spec, cfg)
    fd = (Ep - Em) / (2 * eps)
    assert dd == pytest.approx(fd, rel=1e-5)


def test_psi_outside_gradient_matches_finite_differences(spec3d):
    from dataclasses import replace

    spec = replace(spec3d, psi=cutoff_ball(spec3d.grid, 0.3))
    cfg = EnergyConfig(beta=2.0, variant=PSI_OUTSIDE, r=0.3, R=0.8)
    A = random_divfree_potential(spec.grid, seed=3, kmax=2, amplitude=0.15)
    a = random_divfree_potential(spec.grid, seed=7, kmax=2, amplitude=1.0)
    dd = energy_directional_derivative(A, a, spec, cfg)
    eps = 1e-5
    Ep, _ = total_energy(A + eps * a, spec, cfg)
    Em, _ = total_energy(A - eps * a, spec, cfg)
    fd = (Ep - Em) / (2 * eps)
    assert dd == pytest.approx(fd, rel=1e-6)


def test_minimize_contracts(spec3d):
    cfg = EnergyConfig(beta=2.0, variant=GLOBAL_CURL)
    rep = minimize(None, spec3d, cfg, Schedule(max_iters=3))
    assert all(b <= a + 1e-12 for a, b in zip(rep.energies, rep.energies[1:]))
    assert divergence(rep.final_A).norm(2) < 1e-10
    for j in range(3):
        assert abs(rep.final_A.data[j].mean()) < 1e-12
    base, _ = total_energy(None, spec3d, cfg)
    assert rep.energy <= base + 1e-10


def test_minimize_descends_from_random_start(spec3d):
    cfg = EnergyConfig(beta=2.0, variant=GLOBAL_CURL)
    A0 = random_divfree_potential(spec3d.grid, seed=11, kmax=2, amplitude=0.3)
    rep = minimize(A0, spec3d, cfg, Schedule(max_iters=3))
    assert rep.energy < rep.energies[0]
    assert all(b <= a + 1e-12 for a, b in zip(rep.energies, rep.energies[1:]))


def test_variant_ordering_check_hypothesis():
    g = GridSpec(d=3, N=4, L=2.0)
    spec = HamiltonianSpec(grid=g, h=0.6, V=bump_potential(g, amplitude=8.0))
    with pytest.raises(ValueError):
        variant_ordering_check(spec, 0.5, 0.6, beta=1.0)


def test_variant_ordering_small():
    g = GridSpec(d=3, N=4, L=4.0)
    spec = HamiltonianSpec(grid=g, h=0.6,
                           V=bump_potential(g, amplitude=8.0, radius=1.2))
    A0 = random_divfree_potential(g, seed=0, kmax=1, amplitude=0.2)
    res = variant_ordering_check(spec, 0.5, 1.0, beta=2.0, A0=A0,
                                 schedule=Schedule(max_iters=2))
    assert res["ordering_ok"]
    assert res["E_prime"] <= res["E_ball"] + res["tol_opt"]
    assert res["E_ball"] <= res["E_global"] + res["tol_opt"]
