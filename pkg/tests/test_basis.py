import numpy as np
import pytest

from layerft import basis as bas
from layerft.errors import (
    DegenerateBoundary,
    InvariantViolation,
    OutOfDomain,
    RegularityViolation,
    WrongMode,
)
from layerft.problem import Layer, ProblemConfig, dirichlet

SWEEP = np.linspace(0.1, 20.0, 40)


def max_residual(basis):
    vals = [bas.boundary_residual(basis), bas.dual_boundary_residual(basis)]
    for k in range(1, basis.config.n_interfaces + 1):
        vals.append(bas.junction_residual_primal(basis, k))
        vals.append(bas.junction_residual_dual(basis, k))
    return max(vals)


def test_sine_kernels_exact(load):
    cfg, _ = load("sine")
    xs = np.linspace(0.0, 10.0, 23)
    for lam in (0.3, 1.7, 6.2):
        b = bas.build_basis(cfg, lam)
        u = bas.u_on_layer(b, 0, xs)[:, 0, 0]
        us = bas.u_star_on_layer(b, 0, xs)[:, 0, 0]
        assert np.max(np.abs(u - 2j * np.sin(lam * xs))) <= 1e-12
        assert np.max(np.abs(us + np.sin(lam * xs) / lam)) <= 1e-12


def test_sine_kernel_derivatives_exact(load):
    cfg, _ = load("sine")
    lam = 2.9
    b = bas.build_basis(cfg, lam)
    xs = np.linspace(0.0, 8.0, 17)
    u1 = bas.u_on_layer(b, 0, xs, order=1)[:, 0, 0]
    u2 = bas.u_on_layer(b, 0, xs, order=2)[:, 0, 0]
    s1 = bas.u_star_on_layer(b, 0, xs, order=1)[:, 0, 0]
    s2 = bas.u_star_on_layer(b, 0, xs, order=2)[:, 0, 0]
    assert np.max(np.abs(u1 - 2j * lam * np.cos(lam * xs))) <= 1e-12
    assert np.max(np.abs(u2 + 2j * lam**2 * np.sin(lam * xs))) <= 1e-11
    assert np.max(np.abs(s1 + np.cos(lam * xs))) <= 1e-12
    assert np.max(np.abs(s2 - lam * np.sin(lam * xs))) <= 1e-11


def test_two_layer_transfer_matrix_oracle(load):
    # closed form for ideal contact of two scalar layers, Gamma = 0:
    # value continuity gives C+ + C- = 1, flux continuity gives
    # C+ - C- = a2_2 q_2 / (a2_1 q_1) = a_2/a_1 =: rho.
    cfg, _ = load("twolayer")
    rho = np.sqrt(2.0)
    for lam in (0.4, 1.3, 9.7):
        b = bas.build_basis(cfg, lam)
        cp, cm, dp, dm = b.coefficients(0)
        assert abs(cp[0, 0] - (1 + rho) / 2) <= 1e-12
        assert abs(cm[0, 0] - (1 - rho) / 2) <= 1e-12
        assert abs(dp[0, 0] - (1 - rho) / 2) <= 1e-12
        assert abs(dm[0, 0] - (1 + rho) / 2) <= 1e-12
        # the tail layer is the normalization anchor
        cp2, cm2, dp2, dm2 = b.coefficients(1)
        assert np.allclose([cp2, dm2], [np.eye(1)] * 2) and np.allclose([cm2, dp2], 0)


@pytest.mark.parametrize("name", ["twolayer", "threelayer_r2", "r2diag", "lambda_interface"])
def test_junction_and_boundary_residuals(load, name):
    cfg, _ = load(name)
    worst = max(max_residual(bas.build_basis(cfg, lam)) for lam in SWEEP)
    assert worst <= 1e-11


def test_kernel_second_derivative_vs_finite_difference(load):
    cfg, _ = load("threelayer_r2")
    b = bas.build_basis(cfg, 2.2)
    h = 1e-3
    for m, x0 in ((0, 0.5), (1, 1.6), (2, 3.0)):
        xs = np.array([x0 - h, x0, x0 + h])
        u = bas.u_on_layer(b, m, xs)
        fd = (u[0] - 2 * u[1] + u[2]) / h**2
        exact = bas.u_on_layer(b, m, [x0], order=2)[0]
        assert np.max(np.abs(fd - exact)) <= 1e-5 * max(1.0, np.max(np.abs(exact)))
        us = bas.u_star_on_layer(b, m, xs)
        fds = (us[0] - 2 * us[1] + us[2]) / h**2
        exacts = bas.u_star_on_layer(b, m, [x0], order=2)[0]
        assert np.max(np.abs(fds - exacts)) <= 1e-5 * max(1.0, np.max(np.abs(exacts)))


def test_wavenumber_relation_is_exact(load):
    # a2 q^2 must reproduce lam^2 E + g2 exactly as stored
    cfg, _ = load("threelayer_r2")
    lam = 3.7
    b = bas.build_basis(cfg, lam)
    for ld, layer in zip(b.layers, cfg.layers):
        lhs = layer.a2 @ ld.q2
        assert np.max(np.abs(lhs - (lam**2 * np.eye(2) + layer.g2))) <= 1e-12 * lam**2


def test_singular_interface_raises(load):
    cfg, _ = load("singular")
    with pytest.raises(RegularityViolation) as exc:
        bas.build_basis(cfg, 1.0)
    assert exc.value.junction == 1
    assert exc.value.lam == pytest.approx(1.0)


def test_well_posed_sweep_never_raises(load):
    for name in ("sine", "twolayer", "threelayer_r2", "r2diag", "lambda_interface"):
        cfg, _ = load(name)
        for lam in SWEEP:
            bas.build_basis(cfg, lam)


def test_nonpositive_lambda_rejected(load):
    cfg, _ = load("sine")
    with pytest.raises(InvariantViolation):
        bas.build_basis(cfg, 0.0)
    with pytest.raises(InvariantViolation):
        bas.build_basis(cfg, -2.0)


def test_full_axis_config_rejected(load):
    cfg, _ = load("fullaxis")
    with pytest.raises(WrongMode):
        bas.build_basis(cfg, 1.0)


def test_eval_u_junction_tie_breaks_right(load):
    cfg, _ = load("twolayer")
    b = bas.build_basis(cfg, 1.3)
    from_layer2 = bas.u_on_layer(b, 1, [1.0])[0]
    assert np.allclose(bas.eval_u(b, 1.0), from_layer2, atol=1e-14)
    with pytest.raises(OutOfDomain):
        bas.eval_u(b, -0.1)


def test_neumann_boundary_kernels():
    # free end: u = 2 cos(lam x), u* has -cos structure in the dual slot
    from layerft.problem import neumann

    cfg = ProblemConfig(
        r=1, mode="semi-axis",
        layers=(Layer(left=0.0, right=np.inf, a2=np.eye(1), g2=np.zeros((1, 1))),),
        interfaces=(), boundary=neumann(1),
    )
    lam = 1.9
    b = bas.build_basis(cfg, lam)
    xs = np.linspace(0.0, 5.0, 11)
    u = bas.u_on_layer(b, 0, xs)[:, 0, 0]
    # Phi0 = Psi0 = i lam resp. -i lam: u = e^{ilx}/(il) - e^{-ilx}/(-il) = 2 cos/(il)
    assert np.max(np.abs(u - 2 * np.cos(lam * xs) / (1j * lam))) <= 1e-12
    w0 = bas.w_on_layer(b, 0, [0.0])[0]
    assert np.allclose(w0, b.bnd_row, atol=1e-12)


def test_random_two_layer_configs_stay_regular():
    rng = np.random.default_rng(42)
    for _ in range(25):
        a1, a2 = rng.uniform(0.5, 3.0, size=2)
        from layerft.problem import ideal_contact

        cfg = ProblemConfig(
            r=1, mode="semi-axis",
            layers=(
                Layer(left=0.0, right=1.0, a2=a1 * np.eye(1), g2=np.zeros((1, 1))),
                Layer(left=1.0, right=np.inf, a2=a2 * np.eye(1), g2=np.zeros((1, 1))),
            ),
            interfaces=(ideal_contact(a1 * np.eye(1), a2 * np.eye(1)),),
            boundary=dirichlet(1),
        )
        lam = rng.uniform(0.1, 15.0)
        assert max_residual(bas.build_basis(cfg, lam)) <= 1e-10
