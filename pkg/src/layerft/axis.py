"""Scalar transform pair on the full axis with interior junctions.

Two fundamental families are propagated toward each other:

  * P+ and P- start in the unbounded right layer as exp(+/- i q (x - l_n))
    and are pushed left through the junction conditions (backward sweep);
  * Q- and Q+ start in the unbounded left layer as exp(-/+ i q (x - l_1))
    and are pushed right (forward sweep).

In the right tail layer the connection (Q-, Q+) = (P+, P-) T defines the
2 x 2 matrix T whose entries c2 = T[1,0] and d1 = T[0,1] play the role the
boundary functionals play on the semi-axis: the two kernel branches are

  u(x)  = (P+(x), P-(x))                      (row)
  u*(xi) = (-Q-(xi) / (c2 w_m), -Q+(xi) / (d1 w_m))   (column, layer-wise)

with w_m = 2 i q_m a2_m (A+_m B-_m - A-_m B+_m) built from the P
coefficients of the layer containing xi (a Wronskian, constant within each
layer).  The inversion constant is +1/(pi i); for the homogeneous axis the
pair collapses to the classical Fourier integral identically.

Only scalar problems (r = 1) with spectral-parameter-free junctions are
admitted; the config validation enforces both.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from . import quadrature as quad
from .errors import (
    DegenerateBoundary,
    DimensionMismatch,
    EmptyImage,
    InvariantViolation,
    NonConvergentTail,
    RegularityViolation,
    WrongMode,
)
from .gridfn import LayerSamples, PiecewiseGridFunction, SpectralImage
from .problem import FULL_AXIS
from .transform import _chunks, _n_workers, _normalize_x_points

_FLAGGABLE = (RegularityViolation, DegenerateBoundary)

AXIS_INVERSION_CONSTANT = 1.0 / (math.pi * 1j)


@dataclass
class AxisBasisAtLambda:
    """Scalar full-axis kernel data at one spectral parameter value."""

    lam: float
    config: object
    q: list          # per-layer complex wavenumbers
    a2: list         # per-layer stiffness scalars
    centers: list
    p_plus: list     # per-layer (A, B) of P+ w.r.t. exp(+/- i q (x - center))
    p_minus: list
    q_minus: list
    q_plus: list
    omega: list      # per-layer Wronskian weights
    c2: complex
    d1: complex


def _family_value(coeff, q, center, xs, order=0):
    a, b = coeff
    s = np.asarray(xs, dtype=float) - center
    up = (1j * q) ** order * np.exp(1j * q * s)
    dn = (-1j * q) ** order * np.exp(-1j * q * s)
    return a * up + b * dn


def _w_matrix(q):
    return np.array([[1.0, 1.0], [1j * q, -1j * q]], dtype=complex)


def build_axis_basis(config, lam, rcond_floor=linalg.RCOND_FLOOR):
    """Propagate the four scalar families and connect them in the right tail."""
    if config.mode != FULL_AXIS:
        raise WrongMode("build_axis_basis needs a full-axis problem")
    if lam <= 0:
        raise InvariantViolation(f"spectral parameter must be positive, got {lam}")

    L = config.n_layers
    a2 = [float(np.real(layer.a2[0, 0])) for layer in config.layers]
    g2 = [float(np.real(layer.g2[0, 0])) for layer in config.layers]
    q = [complex(np.sqrt((lam**2 + g) / a)) for a, g in zip(a2, g2)]
    if L == 1:
        centers = [0.0]
    else:
        centers = [config.layers[m].right for m in range(L - 1)] + [config.layers[-2].right]

    def pencil(i, side):
        m = config.interfaces[i].pencil(side, lam)
        if linalg.rcond(m) < rcond_floor:
            raise RegularityViolation(
                f"junction {i + 1}: side-{side} condition block is singular",
                lam=lam, junction=i + 1,
            )
        return m

    # backward sweep for P+/P-
    p_coef = [None] * L
    p_coef[L - 1] = (np.array([1.0, 0.0], dtype=complex), np.array([0.0, 1.0], dtype=complex))
    for i in range(L - 2, -1, -1):
        lk = config.layers[i].right
        s = lk - centers[i + 1]
        qn = q[i + 1]
        wn = np.array(
            [
                [np.exp(1j * qn * s), np.exp(-1j * qn * s)],
                [1j * qn * np.exp(1j * qn * s), -1j * qn * np.exp(-1j * qn * s)],
            ],
            dtype=complex,
        )
        m1 = pencil(i, 1)
        m2 = pencil(i, 2)
        sol = np.linalg.solve(m1, m2 @ wn @ np.column_stack(p_coef[i + 1]))
        coef = np.linalg.solve(_w_matrix(q[i]), sol)   # s = 0 on the left side
        p_coef[i] = (coef[:, 0].copy(), coef[:, 1].copy())

    # forward sweep for Q-/Q+
    q_coef = [None] * L
    q_coef[0] = (np.array([0.0, 1.0], dtype=complex), np.array([1.0, 0.0], dtype=complex))
    for i in range(L - 1):
        lk = config.layers[i].right
        vals = _w_matrix(q[i]) @ np.column_stack(q_coef[i])   # left side, s = 0
        m1 = pencil(i, 1)
        m2 = pencil(i, 2)
        right_vals = np.linalg.solve(m2, m1 @ vals)
        s = lk - centers[i + 1]
        qn = q[i + 1]
        wn = np.array(
            [
                [np.exp(1j * qn * s), np.exp(-1j * qn * s)],
                [1j * qn * np.exp(1j * qn * s), -1j * qn * np.exp(-1j * qn * s)],
            ],
            dtype=complex,
        )
        coef = np.linalg.solve(wn, right_vals)
        q_coef[i + 1] = (coef[:, 0].copy(), coef[:, 1].copy())

    # connection in the right tail layer, evaluated at its center (s = 0)
    wp = _w_matrix(q[L - 1]) @ np.column_stack(p_coef[L - 1])
    wq = _w_matrix(q[L - 1]) @ np.column_stack(q_coef[L - 1])
    t = np.linalg.solve(wp, wq)
    c2, d1 = t[1, 0], t[0, 1]
    scale = max(np.max(np.abs(t)), 1e-300)
    if abs(c2) < 1e-12 * scale or abs(d1) < 1e-12 * scale:
        raise DegenerateBoundary(
            f"kernel connection degenerates at lam = {lam} (c2 = {c2:.3e}, d1 = {d1:.3e})",
            lam=lam,
        )

    omega = [
        2j * q[m] * a2[m] * (p_coef[m][0][0] * p_coef[m][1][1]
                             - p_coef[m][1][0] * p_coef[m][0][1])
        for m in range(L)
    ]
    if any(abs(w) < 1e-300 for w in omega):
        raise DegenerateBoundary(f"degenerate layer Wronskian at lam = {lam}", lam=lam)

    return AxisBasisAtLambda(
        lam=lam,
        config=config,
        q=q,
        a2=a2,
        centers=centers,
        p_plus=[c[0] for c in p_coef],
        p_minus=[c[1] for c in p_coef],
        q_minus=[c[0] for c in q_coef],
        q_plus=[c[1] for c in q_coef],
        omega=omega,
        c2=complex(c2),
        d1=complex(d1),
    )


def axis_u_on_layer(ab, m, xs, order=0):
    """Row kernel (P+(x), P-(x)) on layer m: shape (N, 2)."""
    return np.column_stack(
        [
            _family_value(ab.p_plus[m], ab.q[m], ab.centers[m], xs, order),
            _family_value(ab.p_minus[m], ab.q[m], ab.centers[m], xs, order),
        ]
    )


def axis_u_star_on_layer(ab, m, xs, order=0):
    """Column kernel (-Q-/(c2 w), -Q+/(d1 w)) on layer m: shape (N, 2)."""
    qm = _family_value(ab.q_minus[m], ab.q[m], ab.centers[m], xs, order)
    qp = _family_value(ab.q_plus[m], ab.q[m], ab.centers[m], xs, order)
    return np.column_stack(
        [-qm / (ab.c2 * ab.omega[m]), -qp / (ab.d1 * ab.omega[m])]
    )


def symmetry_defect(ab, xs):
    """Max relative asymmetry of the kernel numerator N(x, xi) on a grid.

    N(x, xi) = -P+(x) Q-(xi)/c2 - P-(x) Q+(xi)/d1 must be symmetric under
    x <-> xi; this is the structural check that the two sweeps connect into
    one integral kernel.
    """
    xs = np.asarray(xs, dtype=float)
    idx = [ab.config.layer_index(float(x)) for x in xs]
    pp = np.array([axis_u_on_layer(ab, m, [x])[0] for m, x in zip(idx, xs)])
    qq = np.array(
        [
            [
                _family_value(ab.q_minus[m], ab.q[m], ab.centers[m], [x])[0],
                _family_value(ab.q_plus[m], ab.q[m], ab.centers[m], [x])[0],
            ]
            for m, x in zip(idx, xs)
        ]
    )
    n = -np.outer(pp[:, 0], qq[:, 0]) / ab.c2 - np.outer(pp[:, 1], qq[:, 1]) / ab.d1
    scale = max(np.max(np.abs(n)), 1e-300)
    return float(np.max(np.abs(n - n.T)) / scale)


def scalar_axis_forward(config, f, spec, lambdas=None, n_workers=None):
    """Two-branch image of a scalar function on the full axis."""
    if config.mode != FULL_AXIS:
        raise WrongMode("scalar_axis_forward needs a full-axis problem; "
                        "use forward_transform on the semi-axis")
    if f.r != 1:
        raise DimensionMismatch("full-axis transform is scalar", block="input")

    canonical = lambdas is None
    if canonical:
        grid = quad.lambda_grid(config, spec)
        lams = grid.nodes
    else:
        lams = np.asarray(lambdas, dtype=float).ravel()
        if lams.size == 0:
            raise EmptyImage("no spectral points requested")
        if np.any(lams <= 0):
            raise InvariantViolation("spectral points must be positive")

    rules = quad.xi_rules(config, spec)
    weighted_f = [
        (ws * f.values_on(m, xs)[:, 0] if xs.size else np.empty(0))
        for m, (xs, ws) in enumerate(rules)
    ]

    values = np.full((lams.size, 2), np.nan, dtype=complex)
    flagged = []

    def do_row(i):
        lam = lams[i]
        try:
            ab = build_axis_basis(config, lam)
        except _FLAGGABLE as exc:
            flagged.append((i, lam, f"{type(exc).__name__}: {exc}"))
            return
        total = np.zeros(2, dtype=complex)
        for m, (xs, _ws) in enumerate(rules):
            if xs.size == 0:
                continue
            ustar = axis_u_star_on_layer(ab, m, xs)
            total += ustar.T @ weighted_f[m]
        values[i] = total

    workers = _n_workers(n_workers)
    if workers == 1:
        for i in range(lams.size):
            do_row(i)
    else:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda rng: [do_row(i) for i in rng], _chunks(lams.size, workers)))

    if flagged and len(flagged) == lams.size:
        raise RegularityViolation(
            f"every spectral point is degenerate; first: {flagged[0][2]}",
            lam=flagged[0][1],
        )

    meta = {"canonical": canonical, "flagged": sorted(flagged)}
    if canonical:
        meta["weights"] = grid.weights
        meta["n_panels"] = grid.n_panels
        meta["order"] = grid.order
    return SpectralImage(lambdas=lams, values=values, meta=meta)


def scalar_axis_inverse(config, image, x_points, spec, n_workers=None):
    """Reconstruct a scalar function on the full axis from its two-branch image."""
    if config.mode != FULL_AXIS:
        raise WrongMode("scalar_axis_inverse needs a full-axis problem; "
                        "use inverse_transform on the semi-axis")
    if image.k != 2:
        raise DimensionMismatch(
            f"full-axis image must have two branches, got {image.k}", block="image"
        )
    grid = quad.lambda_grid(config, spec)
    if image.lambdas.size != grid.nodes.size or not np.allclose(
        image.lambdas, grid.nodes, rtol=1e-9, atol=0.0
    ):
        raise InvariantViolation(
            "image is not sampled on the canonical spectral grid of this problem and "
            "quadrature spec; regenerate it with scalar_axis_forward under the same spec"
        )

    keep = np.all(np.isfinite(image.values.real) & np.isfinite(image.values.imag), axis=1)
    lams = image.lambdas[keep]
    fhat = image.values[keep]
    wlam = grid.weights[keep]
    if lams.size == 0:
        raise EmptyImage("all image rows are flagged")

    per_layer = _normalize_x_points(config, x_points, spec)
    acc = [np.zeros((lams.size, xs.size), dtype=complex) for xs in per_layer]

    def do_row(i):
        ab = build_axis_basis(config, lams[i])
        for m, xs in enumerate(per_layer):
            if xs.size == 0:
                continue
            acc[m][i] = axis_u_on_layer(ab, m, xs) @ fhat[i]

    workers = _n_workers(n_workers)
    if workers == 1:
        for i in range(lams.size):
            do_row(i)
    else:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(lambda rng: [do_row(i) for i in rng], _chunks(lams.size, workers)))

    taus = spec.tau_schedule
    damped = []
    for tau in taus:
        coeff = wlam * lams * np.exp(-tau * lams)
        damped.append([AXIS_INVERSION_CONSTANT * (coeff @ a) for a in acc])

    for a, b_ in zip(damped, damped[1:]):
        gap = max(
            (float(np.max(np.abs(x - y))) if np.size(x) else 0.0) for x, y in zip(a, b_)
        )
        if gap > spec.tail_tolerance:
            raise NonConvergentTail(
                f"successive tau-damped inversion integrals differ by {gap:.3g} "
                f"(> {spec.tail_tolerance})"
            )

    layers_out = []
    tau_err = 0.0
    for m, xs in enumerate(per_layer):
        if xs.size == 0:
            layers_out.append(LayerSamples(x=np.empty(0), values=np.zeros((0, 1), complex)))
            continue
        limit, err = quad.neville_to_zero(taus, [d[m] for d in damped])
        tau_err = max(tau_err, float(np.max(err)) if np.size(err) else 0.0)
        layers_out.append(LayerSamples(x=xs, values=np.asarray(limit).reshape(-1, 1)))

    meta = {
        "tau_error_estimate": tau_err,
        "dropped_rows": np.where(~keep)[0].tolist(),
        "junction_abscissae": [config.left_end] + list(config.junctions),
    }
    return PiecewiseGridFunction(layers=layers_out, traces={}, meta=meta)
