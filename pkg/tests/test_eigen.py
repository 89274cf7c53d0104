import numpy as np
import pytest

import oracles
from tmfrac.eigen import principal_eigenvalue, rayleigh_quotient
from tmfrac.errors import ConvergenceError
from tmfrac.fracspace import Params, RadialFunction, make_grid

P21 = Params(2.0, 1.0)


@pytest.fixture(scope="module")
def eig21():
    return principal_eigenvalue(P21, make_grid(2048))


def test_bessel_value(eig21):
    ref = oracles.bessel_first_eigenvalue()
    assert abs(eig21.lambda_ / ref - 1) < 3e-3
    # the discretization is in fact much closer than the criterion asks
    assert abs(eig21.lambda_ / ref - 1) < 1e-5


def test_dense_fd_oracle_agrees():
    # an unrelated discretization of the weighted problem at theta = 2
    lam = principal_eigenvalue(Params(2.0, 2.0), make_grid(2048)).lambda_
    assert lam == pytest.approx(oracles.dense_fd_eigenvalue(2.0, N=1200), rel=1e-4)


@pytest.mark.parametrize("R", [0.5, 2.0])
def test_scaling(eig21, R):
    lam = principal_eigenvalue(P21.replace(R=R), make_grid(2048, R)).lambda_
    assert lam == pytest.approx(eig21.lambda_ * R ** -2.0, rel=5e-3)


def test_self_consistency_and_shape(eig21):
    u = eig21.eigenfunction
    assert rayleigh_quotient(u, P21) == pytest.approx(eig21.lambda_, rel=1e-8)
    mass = rayleigh_quotient(u, P21)  # noqa: F841 (quotient well defined)
    assert np.all(u.values >= 0.0)
    assert np.all(np.diff(u.values) <= 1e-14)
    assert u.values[-1] == 0.0
    assert eig21.residual < 1e-6


def test_upper_bound_property():
    g = make_grid(512)
    for prm in (P21, Params(3.0, 2.0)):
        lam = principal_eigenvalue(prm, g).lambda_
        trials = [1.0 - g.nodes]
        rng = np.random.default_rng(3)
        for _ in range(20):
            drops = rng.uniform(0.0, 1.0, g.N - 1) * g.h
            v = np.zeros(g.N)
            v[:-1] = np.cumsum(drops[::-1])[::-1]
            trials.append(v)
        for v in trials:
            assert lam <= rayleigh_quotient(RadialFunction.from_values(g, v), prm) + 1e-10


def test_grid_refinement_cauchy():
    lams = [principal_eigenvalue(P21, make_grid(n)).lambda_ for n in (128, 256, 512, 1024)]
    gaps = [abs(b - a) for a, b in zip(lams, lams[1:])]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


def test_p3_projection_does_not_raise_quotient():
    prm = Params(3.0, 2.0)
    res = principal_eigenvalue(prm, make_grid(512))
    u = res.eigenfunction
    projected = np.sort(np.abs(u.values))[::-1]
    q = rayleigh_quotient(RadialFunction.from_values(u.grid, projected), prm)
    assert q <= res.lambda_ * (1 + 1e-12)
    assert rayleigh_quotient(u, prm) == pytest.approx(res.lambda_, rel=1e-8)


def test_nonconvergence_reports_best():
    with pytest.raises(ConvergenceError) as info:
        principal_eigenvalue(P21, make_grid(256), max_iter=2)
    assert info.value.best is not None
