"""Quadrature plumbing: spectral grids, per-layer spatial rules, tail damping.

All integrals use composite Gauss-Legendre panels.  Panel widths are tied to
the worst-case oscillation rate of the integrand so that a fixed polynomial
order per panel keeps the rule in its convergent regime:

  * spectral axis: kernels behave like exp(+/- i lam s x) with |s| bounded by
    s_rate = max_m ||q_m(lam_max)||_2 / lam_max, so panels are capped at a
    quarter oscillation period at x_max;
  * spatial axis: within layer m the kernels oscillate at most at rate
    ||q_m(lam_max)||_2, so panels are capped at half a period there.

The improper spectral integral of the inversion formula is computed with an
exponential damping factor exp(-tau lam) on a decreasing schedule of tau
values and extrapolated to tau = 0 with a Neville table.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import basis as _basis
from .errors import InvariantViolation


@dataclass(frozen=True)
class QuadratureSpec:
    """Resolution knobs shared by the forward and inverse transforms.

    tail_tolerance bounds how much two successive tau-damped inversion
    integrals may disagree before the tail is declared non-convergent; it is
    a catastrophe guard, not an accuracy target.
    """

    lambda_min: float = 1e-4
    lambda_max: float = 40.0
    lambda_steps: int = 2000
    tau_schedule: tuple = (1e-2, 5e-3, 2.5e-3)
    x_max: float = 12.0
    xi_quadrature_order: int = 12
    tail_tolerance: float = 10.0

    def __post_init__(self):
        object.__setattr__(self, "tau_schedule", tuple(float(t) for t in self.tau_schedule))
        self.validate()

    def validate(self):
        if not 0 < self.lambda_min < self.lambda_max:
            raise InvariantViolation(
                f"need 0 < lambda_min < lambda_max, got [{self.lambda_min}, {self.lambda_max}]"
            )
        if self.lambda_steps < 4:
            raise InvariantViolation("lambda_steps must be at least 4")
        if self.x_max <= 0:
            raise InvariantViolation("x_max must be positive")
        if self.xi_quadrature_order < 2:
            raise InvariantViolation("xi_quadrature_order must be at least 2")
        taus = self.tau_schedule
        if len(taus) < 2:
            raise InvariantViolation("tau_schedule needs at least two entries")
        if any(t <= 0 for t in taus) or any(a <= b for a, b in zip(taus, taus[1:])):
            raise InvariantViolation("tau_schedule must be positive and strictly decreasing")
        if self.tail_tolerance <= 0:
            raise InvariantViolation("tail_tolerance must be positive")


@lru_cache(maxsize=64)
def _leggauss(order):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def composite_gauss(a, b, n_panels, order):
    """Nodes and weights of an n_panels-panel Gauss-Legendre rule on [a, b]."""
    if b <= a or n_panels < 1:
        return np.empty(0), np.empty(0)
    xr, wr = _leggauss(order)
    edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])          # (P,)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * xr[None, :]).ravel()
    weights = (half[:, None] * wr[None, :]).ravel()
    return nodes, weights


@dataclass(frozen=True)
class LambdaGrid:
    """Canonical spectral grid for a (config, spec) pair."""

    nodes: np.ndarray
    weights: np.ndarray
    n_panels: int
    order: int

    def __len__(self):
        return self.nodes.size


def oscillation_rate(config, lam_max):
    """max_m ||q_m(lam_max)||_2 — the fastest spatial oscillation at band edge."""
    return max(
        np.linalg.norm(_basis.compute_wavenumber(layer, lam_max), 2)
        for layer in config.layers
    )


def lambda_grid(config, spec):
    """Composite Gauss-Legendre grid over [lambda_min, lambda_max].

    The panel cap pi / (4 x_max s_rate) keeps each panel under a quarter
    period of the worst oscillation exp(i lam s_rate x_max); the per-panel
    order is then chosen so the total node count tracks lambda_steps.
    """
    s_rate = oscillation_rate(config, spec.lambda_max) / spec.lambda_max
    cap = math.pi / (4.0 * spec.x_max * max(s_rate, 1e-12))
    span = spec.lambda_max - spec.lambda_min
    n_panels = max(1, math.ceil(span / cap))
    order = int(min(24, max(2, math.floor(spec.lambda_steps / n_panels + 0.5))))
    nodes, weights = composite_gauss(spec.lambda_min, spec.lambda_max, n_panels, order)
    return LambdaGrid(nodes=nodes, weights=weights, n_panels=n_panels, order=order)


def xi_rules(config, spec):
    """Per-layer spatial rules, clipped to |x| <= x_max.

    Returns a list of (nodes, weights) pairs, one per layer; a layer lying
    entirely beyond the truncation radius gets an empty rule.
    """
    rules = []
    for layer in config.layers:
        rate = np.linalg.norm(_basis.compute_wavenumber(layer, spec.lambda_max), 2)
        a = max(layer.left, -spec.x_max)
        b = min(layer.right, spec.x_max)
        if b <= a:
            rules.append((np.empty(0), np.empty(0)))
            continue
        cap = math.pi / max(rate, 1e-12)
        n_panels = max(1, math.ceil((b - a) / cap))
        rules.append(composite_gauss(a, b, n_panels, spec.xi_quadrature_order))
    return rules


def neville_to_zero(taus, values):
    """Extrapolate samples values[i] ~ F(taus[i]) to tau = 0.

    Returns (limit, err) where err is the elementwise difference between the
    full-table value and the value obtained after dropping the coarsest tau —
    a standard a-posteriori estimate of the extrapolation error.
    """
    taus = np.asarray(taus, dtype=float)
    m = taus.size
    table = [np.asarray(v, dtype=complex) for v in values]
    if m != len(table):
        raise InvariantViolation("tau schedule and value list length mismatch")
    if m == 1:
        return table[0], np.full_like(table[0], np.nan, dtype=float)
    prev_first = None
    col = table
    for j in range(1, m):
        nxt = []
        for i in range(m - j):
            t_lo, t_hi = taus[i + j], taus[i]
            nxt.append((t_lo * col[i] - t_hi * col[i + 1]) / (t_lo - t_hi))
        if len(nxt) == 2:
            prev_first = nxt[1]
        col = nxt
    limit = col[0]
    if prev_first is None:          # m == 2
        prev_first = table[1]
    err = np.abs(limit - prev_first)
    return limit, err
