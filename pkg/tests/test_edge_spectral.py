import cmath
import math

import numpy as np
import pytest

from engine.edge_spectral import (DEFAULT_CLASS_GRID, a_derivative_at_branch, a_function, a_values,
                                  b_function, check_csrelations, check_intqcc, dirichlet_eigenvalues,
                                  dtn_matrix, edge_data, genericity_check, genericity_holds,
                                  same_asymmetry_class, transfer_matrix)
from engine.errors import NotABranchPointError, PoleError
from engine.potential import BUILTIN_POTENTIAL_NAMES, Potential, builtin_potential, reflect
from engine.riemann import branch_points
from engine.roots import ComplexRegion


def slab(lam: complex, q: float, h: float) -> np.ndarray:
    """Closed-form Cauchy propagator across a constant-potential piece"""
    k = cmath.sqrt(lam - q)
    if k == 0:
        return np.array([[1.0, h], [0.0, 1.0]], dtype=complex)
    return np.array([[cmath.cos(k * h), cmath.sin(k * h) / k],
                     [-k * cmath.sin(k * h), cmath.cos(k * h)]], dtype=complex)


def step_oracle(lam: complex) -> np.ndarray:
    return slab(lam, 0.0, 0.5) @ slab(lam, 5.0, 0.5)


def test_zero_potential_closed_forms(zero):
    data = edge_data(zero, 0j)
    assert data.c == pytest.approx(1.0, abs=1e-14)
    assert data.s == pytest.approx(1.0, abs=1e-14)
    data = edge_data(zero, complex(math.pi ** 2))
    assert abs(data.s) < 1e-12
    assert data.c == pytest.approx(-1.0, abs=1e-12)


def test_step_matches_two_slab_oracle(step):
    for lam in (1.0, 2.0 + 1.0j, -3.5):
        data = edge_data(step, complex(lam))
        oracle = step_oracle(complex(lam))
        assert data.c == pytest.approx(oracle[0, 0], abs=1e-12)
        assert data.s == pytest.approx(oracle[0, 1], abs=1e-12)
        assert data.c_prime == pytest.approx(oracle[1, 0], abs=1e-12)
        assert data.s_prime == pytest.approx(oracle[1, 1], abs=1e-12)
        assert a_function(step, lam) == pytest.approx(0.5 * (oracle[0, 0] - oracle[1, 1]), abs=1e-12)
        assert b_function(step, lam) == pytest.approx(0.5 * (oracle[0, 0] + oracle[1, 1]), abs=1e-12)


def test_step_asymmetry_is_nonzero(step):
    assert abs(a_function(step, 1.0)) > 1e-2


def test_transfer_matrix_examples(zero, step):
    t = transfer_matrix(zero, math.pi ** 2 / 4)
    assert np.allclose(t, [[0.0, 2.0 / math.pi], [math.pi / 2.0, 0.0]], atol=1e-12)
    t = transfer_matrix(step, 2.0)
    t_reflected = transfer_matrix(reflect(step), 2.0)
    assert np.allclose(t_reflected @ t, np.eye(2), atol=1e-11)


def test_dtn_matrix_examples(zero, step):
    g = dtn_matrix(zero, math.pi ** 2 / 4)
    assert np.allclose(g, (math.pi / 2.0) * np.array([[0.0, 1.0], [1.0, 0.0]]), atol=1e-12)
    with pytest.raises(PoleError):
        dtn_matrix(zero, math.pi ** 2)
    g = dtn_matrix(step, 1.0)
    oracle = step_oracle(1.0)
    assert g[0, 1] == g[1, 0]
    assert g[0, 0] == pytest.approx(-oracle[0, 0] / oracle[0, 1], abs=1e-11)
    assert g[1, 1] == pytest.approx(-oracle[1, 1] / oracle[0, 1], abs=1e-11)


def test_a_function_vanishes_for_symmetric(zero):
    for lam in (0.3, 7.0 + 2.0j, -12.0):
        assert abs(a_function(zero, lam)) < 1e-13
        assert abs(a_function(Potential.constant(3.0), lam)) < 1e-12
    assert b_function(zero, 0.0) == pytest.approx(1.0)
    assert b_function(zero, math.pi ** 2) == pytest.approx(-1.0, abs=1e-12)


def test_a_function_on_grid():
    grid = np.array(DEFAULT_CLASS_GRID)
    for name in ('zero', 'constant', 'well'):
        assert np.max(np.abs(a_values(builtin_potential(name), grid))) < 1e-10
    assert np.max(np.abs(a_values(builtin_potential('step'), grid))) > 1e-2


@pytest.mark.parametrize('name', BUILTIN_POTENTIAL_NAMES)
def test_wronskian_and_determinant(name):
    p = builtin_potential(name)
    rng = np.random.default_rng(7)
    for lam in rng.uniform(-30, 30, 20) + 1j * rng.uniform(-30, 30, 20):
        data = edge_data(p, complex(lam))
        assert data.wronskian_residual < 1e-9
        assert abs(np.linalg.det(data.transfer()) + 1.0) < 1e-9


def test_real_energies_give_real_a(step, trig):
    for p in (step, trig):
        values = a_values(p, np.linspace(-10.0, 60.0, 41))
        assert np.max(np.abs(values.imag)) < 1e-10


def test_reflection_involution(step, trig):
    for p in (step, trig):
        for lam in (1.5, 4.0 - 2.0j):
            a, b = edge_data(p, lam), edge_data(reflect(reflect(p)), lam)
            assert abs(a.c - b.c) < 1e-12 and abs(a.s - b.s) < 1e-12
            assert abs(a.c_prime - b.c_prime) < 1e-12 and abs(a.s_prime - b.s_prime) < 1e-12


def test_slice_refinement_for_table_kinds():
    for name in ('step', 'well', 'ramp', 'constant'):
        p = builtin_potential(name)
        for lam in (3.0, 25.0 + 10.0j, -40.0):
            coarse, fine = edge_data(p, complex(lam), 1024), edge_data(p, complex(lam), 2048)
            for field in ('c', 's', 'c_prime', 's_prime'):
                assert abs(getattr(coarse, field) - getattr(fine, field)) < 1e-8


def test_slice_refinement_for_series(trig):
    # midpoint-frozen smooth potentials converge at second order in the slice width
    for lam in (3.0, 25.0 + 10.0j):
        coarse, fine = edge_data(trig, complex(lam), 1024), edge_data(trig, complex(lam), 2048)
        assert abs(coarse.c - fine.c) < 1e-4
        assert abs(coarse.s - fine.s) < 1e-4


def test_dirichlet_eigenvalues(zero, step):
    roots = dirichlet_eigenvalues(zero, 100.0)
    assert roots == pytest.approx([math.pi ** 2, 4 * math.pi ** 2, 9 * math.pi ** 2], abs=1e-8)
    roots = dirichlet_eigenvalues(Potential.constant(3.0), 100.0)
    assert roots == pytest.approx([3 + math.pi ** 2, 3 + 4 * math.pi ** 2, 3 + 9 * math.pi ** 2], abs=1e-8)
    for root in dirichlet_eigenvalues(step, 100.0):
        assert abs(edge_data(step, complex(root), 2048).s) < 1e-8


def test_same_asymmetry_class(zero, step):
    assert same_asymmetry_class(step, step)
    assert same_asymmetry_class(zero, Potential.constant(3.0))
    assert not same_asymmetry_class(step, reflect(step))
    assert same_asymmetry_class(zero, builtin_potential('well'))


def test_commutator_of_dtn_maps(zero, step):
    constant = Potential.constant(3.0)
    for lam in (2.0, 5.5, 20.3):
        g1, g2 = dtn_matrix(zero, lam), dtn_matrix(constant, lam)
        assert np.linalg.norm(g1 @ g2 - g2 @ g1) < 1e-8
    g1, g2 = dtn_matrix(step, 2.0), dtn_matrix(zero, 2.0)
    assert np.linalg.norm(g1 @ g2 - g2 @ g1) > 1e-3


def test_csrelations(zero, step, trig):
    assert check_csrelations(zero, 2.0).max_residual < 1e-12
    assert check_csrelations(step, 1.0 + 2.0j).max_residual < 1e-9
    assert check_csrelations(trig, -4.0).max_residual < 1e-9


def test_integral_identity(zero, step, trig):
    assert check_intqcc(zero, 3.0) < 1e-12
    assert check_intqcc(step, 1.0) < 1e-6
    assert check_intqcc(trig, -2.0) < 1e-6
    for lam in (1.0, 4.0 + 1.0j, -6.0):
        coarse, fine = check_intqcc(step, lam, 1024), check_intqcc(step, lam, 2048)
        assert coarse < 1e-6
        assert fine <= coarse + 1e-12


@pytest.mark.parametrize('lam', [1.0, 4.0 + 1.0j, -6.0, 12.0])
def test_integral_identity_converges_at_fourth_order(step, lam):
    # Simpson on exact slice data: halving the slice width divides the residual by about 16
    coarse, fine = check_intqcc(step, lam, 32), check_intqcc(step, lam, 64)
    assert coarse > 1e-12
    assert coarse / fine >= 3.5


@pytest.fixture(scope='module')
def step_branch_points():
    region = ComplexRegion(-50.0, 50.0, -50.0, 50.0)
    return branch_points(builtin_potential('step'), region)


def test_branch_derivative_formula(step, step_branch_points):
    assert len(step_branch_points) >= 2
    for bp in step_branch_points[:2]:
        formula, fd = a_derivative_at_branch(step, bp.lambda0)
        assert abs(formula - fd) / abs(fd) < 1e-4


def test_branch_derivative_requires_branch_point(zero):
    for lam in (0.5, 3.0 + 4.0j, -20.0j):
        with pytest.raises(NotABranchPointError):
            a_derivative_at_branch(zero, lam)


def test_genericity_check(zero, step):
    region = ComplexRegion(-50.0, 50.0, -50.0, 50.0)
    assert genericity_check(zero, region) == []
    entries = genericity_check(step, region)
    assert entries
    for lam0, _ in entries:
        assert lam0.imag != 0.0
        assert abs(a_function(step, lam0) ** 2 + 1.0) < 1e-8
    assert genericity_holds(entries)
    assert not genericity_holds([])
