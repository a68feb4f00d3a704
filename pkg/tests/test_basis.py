"""Reduced bases: weighted orthonormality, optimality, block structure.

The projection error of a weighted POD basis on its own training data has
a closed form in the singular values of the weighted snapshot stack; that
identity is the main oracle here.  The block basis is checked for
equivariance with the canonical symplectic matrix.
"""

import numpy as np
import pytest

from topinf import (
    build_heat_model,
    canonical_j,
    estimate_time_derivative,
    exact_reduced_derivative,
    heat_operator,
    projection_error,
    project_snapshots,
    psd_cotangent_lift,
    weighted_pod,
)
from topinf.linalg import cholesky_upper


def random_spd(rng, n, cond=10.0):
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return (q * np.geomspace(1.0, cond, n)) @ q.T


def make_snapshots(rng, n, n_sets=3, n_cols=7):
    return [rng.standard_normal((n, n_cols)) for _ in range(n_sets)]


def test_pod_basis_is_mass_orthonormal():
    rng = np.random.default_rng(501)
    for _ in range(5):
        n, r = 12, 4
        mass = random_spd(rng, n)
        basis = weighted_pod(make_snapshots(rng, n), mass, r)
        assert basis.kind == "pod" and basis.r == r
        gram = basis.u.T @ mass @ basis.u
        np.testing.assert_allclose(gram, np.eye(r), atol=1e-12)


def test_projection_error_matches_singular_value_identity():
    # on the training pool: err^2 == 1 - (sum of leading r sv^2) / (sum of all sv^2)
    rng = np.random.default_rng(502)
    n = 15
    mass = random_spd(rng, n)
    snaps = make_snapshots(rng, n, n_sets=2, n_cols=6)
    for r in (1, 3, 5):
        basis = weighted_pod(snaps, mass, r)
        sv = basis.singular_values
        expected = np.sqrt(1.0 - np.sum(sv[:r] ** 2) / np.sum(sv**2))
        assert abs(projection_error(snaps, basis) - expected) < 1e-10


def test_pod_bases_are_nested():
    rng = np.random.default_rng(503)
    mass = random_spd(rng, 10)
    snaps = make_snapshots(rng, 10)
    full = weighted_pod(snaps, mass, 6)
    for r in (1, 3, 6):
        sub = full.truncate(r)
        np.testing.assert_array_equal(sub.u, full.u[:, :r])
        np.testing.assert_array_equal(sub.singular_values, full.singular_values)
    with pytest.raises(ValueError):
        full.truncate(0)
    with pytest.raises(ValueError):
        full.truncate(7)


def test_pod_signs_are_deterministic():
    rng = np.random.default_rng(504)
    mass = random_spd(rng, 9)
    snaps = make_snapshots(rng, 9)
    a = weighted_pod(snaps, mass, 4)
    b = weighted_pod([s.copy() for s in snaps], mass.copy(), 4)
    np.testing.assert_array_equal(a.u, b.u)
    # convention: the largest-magnitude entry of each weighted mode is positive
    chol = cholesky_upper(mass)
    weighted_modes = chol @ a.u
    for col in range(4):
        lead = np.argmax(np.abs(weighted_modes[:, col]))
        assert weighted_modes[lead, col] > 0.0


def test_pod_rejects_rank_deficient_requests():
    rng = np.random.default_rng(505)
    mass = np.eye(8)
    base = rng.standard_normal((8, 2))
    snaps = [base @ rng.standard_normal((2, 5))]  # rank 2 stack
    with pytest.raises(ValueError, match="rank"):
        weighted_pod(snaps, mass, 3)
    weighted_pod(snaps, mass, 2)  # at the rank is fine


def test_pod_input_validation():
    rng = np.random.default_rng(506)
    with pytest.raises(ValueError):
        weighted_pod([], np.eye(3), 1)
    with pytest.raises(ValueError):
        weighted_pod([rng.standard_normal(4)], np.eye(4), 1)  # not a matrix
    with pytest.raises(ValueError):
        weighted_pod([rng.standard_normal((4, 3))], np.eye(5), 1)  # wrong mass
    with pytest.raises(ValueError):
        weighted_pod([rng.standard_normal((4, 3))], np.eye(4), 0)


def test_block_basis_structure_and_equivariance():
    rng = np.random.default_rng(507)
    n, r = 10, 3
    mass = random_spd(rng, n)
    qs = make_snapshots(rng, n, 2, 6)
    ps = make_snapshots(rng, n, 2, 6)
    basis = psd_cotangent_lift(qs, ps, mass, r)
    assert basis.kind == "psd" and basis.r == r
    np.testing.assert_array_equal(basis.u[:n, :r], basis.u_half)
    np.testing.assert_array_equal(basis.u[n:, r:], basis.u_half)
    np.testing.assert_array_equal(basis.u[:n, r:], np.zeros((n, r)))
    gram = basis.u_half.T @ mass @ basis.u_half
    np.testing.assert_allclose(gram, np.eye(r), atol=1e-12)
    # (U^T M2) J == Jhat (U^T M2) with M2 = blockdiag(mass, mass)
    m2 = np.kron(np.eye(2), mass)
    left = (basis.u.T @ m2) @ canonical_j(n)
    right = canonical_j(r) @ (basis.u.T @ m2)
    np.testing.assert_allclose(left, right, atol=1e-12 * np.max(np.abs(left)))


def test_block_basis_pools_position_and_momentum_data():
    # pooled fit: swapping the roles of the q and p stacks changes nothing
    rng = np.random.default_rng(508)
    mass = random_spd(rng, 8)
    qs = make_snapshots(rng, 8, 1, 5)
    ps = make_snapshots(rng, 8, 1, 5)
    a = psd_cotangent_lift(qs, ps, mass, 3)
    b = psd_cotangent_lift(ps, qs, mass, 3)
    np.testing.assert_allclose(a.u_half, b.u_half, atol=1e-12)


def test_project_and_lift_round_trip_in_span():
    rng = np.random.default_rng(509)
    mass = random_spd(rng, 12)
    basis = weighted_pod(make_snapshots(rng, 12), mass, 5)
    coeffs = rng.standard_normal((5, 4))
    states = basis.lift(coeffs)
    np.testing.assert_allclose(basis.project(states), coeffs, atol=1e-12)
    with pytest.raises(ValueError):
        basis.project(rng.standard_normal((11, 2)))
    with pytest.raises(ValueError):
        basis.lift(rng.standard_normal((4, 2)))


def test_block_project_and_lift_round_trip_in_span():
    rng = np.random.default_rng(510)
    mass = random_spd(rng, 9)
    basis = psd_cotangent_lift(
        make_snapshots(rng, 9), make_snapshots(rng, 9), mass, 4
    )
    coeffs = rng.standard_normal((8, 3))
    states = basis.lift(coeffs)
    assert states.shape == (18, 3)
    np.testing.assert_allclose(basis.project(states), coeffs, atol=1e-12)
    with pytest.raises(ValueError):
        basis.project(rng.standard_normal((9, 2)))
    with pytest.raises(ValueError):
        basis.lift(rng.standard_normal((4, 2)))


def test_project_snapshots_accepts_state_carrying_objects():
    class Holder:
        def __init__(self, states):
            self.states = states

    rng = np.random.default_rng(511)
    mass = random_spd(rng, 6)
    snaps = make_snapshots(rng, 6, 2, 4)
    basis = weighted_pod(snaps, mass, 2)
    from_arrays = project_snapshots(basis, snaps)
    from_objects = project_snapshots(basis, [Holder(s) for s in snaps])
    for a, b in zip(from_arrays, from_objects):
        np.testing.assert_array_equal(a, b)


def test_derivative_stencils_are_exact_on_quadratics():
    dt = 0.05
    t = dt * np.arange(9)
    coeffs = np.array([[1.0, -2.0, 0.5], [0.3, 0.0, -1.0]])
    traj = np.stack([c0 + c1 * t + c2 * t**2 for c0, c1, c2 in coeffs])
    exact = np.stack([c1 + 2.0 * c2 * t for _, c1, c2 in coeffs])
    got = estimate_time_derivative(traj, dt)
    np.testing.assert_allclose(got, exact, atol=1e-12)


def test_derivative_stencils_converge_at_second_order():
    errors = []
    for n in (40, 80):
        dt = 1.0 / n
        t = dt * np.arange(n + 1)
        traj = np.sin(2.0 * t)[None, :]
        got = estimate_time_derivative(traj, dt)
        errors.append(np.max(np.abs(got - 2.0 * np.cos(2.0 * t))))
    assert 3.5 < errors[0] / errors[1] < 4.5


def test_derivative_validation():
    with pytest.raises(ValueError):
        estimate_time_derivative(np.zeros(5), 0.1)
    with pytest.raises(ValueError):
        estimate_time_derivative(np.zeros((2, 2)), 0.1)  # needs 3 points
    with pytest.raises(ValueError):
        estimate_time_derivative(np.zeros((2, 5)), 0.0)


def test_exact_reduced_derivative_applies_projected_generator():
    rng = np.random.default_rng(512)
    model = build_heat_model(20)
    mu = np.array([0.5, 0.2, 0.9])
    a = heat_operator(model, mu)  # mass-carried generator of M qdot = A q
    snaps = [rng.standard_normal((model.n_dof, 6))]
    basis = weighted_pod(snaps, model.mass, 4)
    reduced = basis.project(snaps[0])
    a_hat = basis.u.T @ a @ basis.u
    np.testing.assert_allclose(
        exact_reduced_derivative(basis, a, reduced), a_hat @ reduced, atol=1e-12
    )
    with pytest.raises(ValueError):
        exact_reduced_derivative(basis, a, reduced[:2])
