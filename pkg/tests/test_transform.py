import dataclasses
import os

import numpy as np
import pytest

from layerft import catalog as cat
from layerft import transform as tr
from layerft.errors import (
    DimensionMismatch,
    EmptyImage,
    InvariantViolation,
    RegularityViolation,
    WrongMode,
)
from layerft.gridfn import (
    read_function_csv,
    read_image_csv,
    write_function_csv,
    write_image_csv,
)
from layerft.problem import Interface, Layer, ProblemConfig, dirichlet
from layerft.quadrature import lambda_grid

from conftest import odd_gaussian_deriv, odd_gaussian_function


def test_forward_matches_classical_sine_image(load):
    cfg, spec = load("sine")
    f = odd_gaussian_function()
    img = tr.forward_transform(cfg, f, spec)
    oracle = -np.sqrt(np.pi / 2) * np.exp(-img.lambdas**2 / 2)
    assert np.max(np.abs(img.values[:, 0] - oracle)) <= 1e-12


def test_roundtrip_single_layer(load):
    cfg, spec = load("sine")
    f = odd_gaussian_function()
    rep = tr.roundtrip_report(cfg, f, spec)
    assert rep.l2_total <= 1e-5
    assert rep.n_flagged == 0


def test_inverse_requires_matching_grid(load):
    cfg, spec = load("sine")
    f = odd_gaussian_function()
    img = tr.forward_transform(cfg, f, spec)
    clipped = dataclasses.replace(img, lambdas=img.lambdas[:-1], values=img.values[:-1])
    with pytest.raises(InvariantViolation):
        tr.inverse_transform(cfg, clipped, [np.linspace(0, 5, 8)], spec)


def test_forward_on_explicit_lambda_grid(load):
    cfg, spec = load("sine")
    f = odd_gaussian_function()
    lams = np.array([0.5, 1.0, 2.0, 4.0])
    img = tr.forward_transform(cfg, f, spec, lambdas=lams)
    assert img.meta["canonical"] is False
    oracle = -np.sqrt(np.pi / 2) * np.exp(-(lams**2) / 2)
    assert np.max(np.abs(img.values[:, 0] - oracle)) <= 1e-12
    with pytest.raises(InvariantViolation):
        tr.inverse_transform(cfg, img, [np.linspace(0, 5, 8)], spec)
    with pytest.raises(InvariantViolation):
        tr.forward_transform(cfg, f, spec, lambdas=np.array([-1.0, 2.0]))


def test_lambda_dependent_interface_equals_ideal_contact(load):
    # both value-row sides carry the same (1 + c lam^2) factor, so kernels,
    # corrections, and hence images must coincide with plain ideal contact
    cfg_a, spec = load("twolayer")
    cfg_b, _ = load("lambda_interface")
    prof = cat.make_profile("gauss_bump", center=1.0, width=0.4)
    fa = cat.to_grid_function(prof, cfg_a, spec.x_max)
    fb = cat.to_grid_function(prof, cfg_b, spec.x_max)
    ia = tr.forward_transform(cfg_a, fa, spec)
    ib = tr.forward_transform(cfg_b, fb, spec)
    assert np.array_equal(ia.lambdas, ib.lambdas)
    assert np.max(np.abs(ia.values - ib.values)) <= 1e-11


def test_positive_g2_inverts_on_its_spectral_band():
    # with g2 > 0 the operator's spectrum extends above zero; the transform
    # pair represents exactly the part below it, so inverse(forward(f))
    # equals f minus the classical low-wavenumber band mu in (0, sqrt(g)).
    g = 0.5
    cfg = ProblemConfig(
        r=1, mode="semi-axis",
        layers=(Layer(left=0.0, right=np.inf, a2=np.eye(1), g2=g * np.eye(1)),),
        interfaces=(), boundary=dirichlet(1),
    )
    from layerft.quadrature import QuadratureSpec

    spec = QuadratureSpec()
    f = cat.to_grid_function(cat.make_profile("poly_cutoff", left=2.0, right=5.0), cfg, spec.x_max)
    xs = f.layers[0].x
    vals = f.layers[0].values[:, 0].real
    img = tr.forward_transform(cfg, f, spec)
    recon = tr.inverse_transform(cfg, img, [xs], spec).layers[0].values[:, 0]

    mus = np.linspace(0.0, np.sqrt(g), 2001)
    sine_coef = np.array([np.trapezoid(np.sin(mu * xs) * vals, xs) for mu in mus])
    band = (2 / np.pi) * np.trapezoid(np.sin(np.outer(xs, mus)) * sine_coef, mus, axis=1)
    assert np.max(np.abs(recon - vals)) > 1e-2          # projection alone falls short
    assert np.max(np.abs(recon + band - vals)) <= 1e-4  # band completes it


def test_flagged_rows_are_dropped_by_inverse(load):
    # a value row scaled by (1 - lam^2/4) on both sides degenerates at lam = 2
    cfg_t, spec = load("twolayer")
    blocks = {n: np.zeros((1, 1)) for n in Interface.BLOCK_NAMES}
    blocks.update(
        beta11=np.eye(1), beta12=np.eye(1),
        gamma11=-0.25 * np.eye(1), gamma12=-0.25 * np.eye(1),
        alpha21=np.eye(1), alpha22=2.0 * np.eye(1),
    )
    cfg = dataclasses.replace(cfg_t, interfaces=(Interface(**blocks),))
    f = cat.to_grid_function(cat.make_profile("gauss_bump", center=1.0, width=0.4), cfg, spec.x_max)
    lams = np.array([1.0, 2.0, 3.0, 4.0])
    img = tr.forward_transform(cfg, f, spec, lambdas=lams)
    assert [entry[0] for entry in img.meta["flagged"]] == [1]
    assert "singular" in img.meta["flagged"][0][2]
    assert np.all(np.isnan(img.values[1].real))
    assert not np.any(np.isnan(np.delete(img.values, 1, axis=0).real))


def test_all_flagged_reraises(load):
    cfg, spec = load("singular")
    f = cat.to_grid_function(cat.make_profile("gauss_bump"), cfg, spec.x_max)
    with pytest.raises(RegularityViolation):
        tr.forward_transform(cfg, f, spec)


def test_full_axis_config_rejected_by_semi_axis_transform(load):
    cfg, spec = load("fullaxis")
    f = cat.to_grid_function(cat.make_profile("gauss_bump"), cfg, spec.x_max)
    with pytest.raises(WrongMode):
        tr.forward_transform(cfg, f, spec)


def test_component_count_mismatch_rejected(load):
    cfg, spec = load("r2diag")
    f = cat.to_grid_function(cat.make_profile("gauss_bump"), load("twolayer")[0], spec.x_max)
    with pytest.raises(DimensionMismatch):
        tr.forward_transform(cfg, f, spec)


def test_image_csv_roundtrip(tmp_path, load):
    cfg, spec = load("twolayer")
    f = cat.to_grid_function(cat.make_profile("gauss_bump"), cfg, spec.x_max)
    img = tr.forward_transform(cfg, f, spec, lambdas=np.linspace(0.5, 10, 40))
    path = tmp_path / "img.csv"
    write_image_csv(img, path)
    back = read_image_csv(path)
    assert np.array_equal(back.lambdas, img.lambdas)
    assert np.array_equal(back.values, img.values)


def test_function_csv_roundtrip_preserves_traces(tmp_path, load):
    cfg, spec = load("twolayer")
    f = cat.to_grid_function(cat.make_profile("gauss_bump"), cfg, spec.x_max)
    path = tmp_path / "f.csv"
    write_function_csv(f, path)
    back = read_function_csv(path, cfg)
    assert back.n_layers == f.n_layers
    for m in range(f.n_layers):
        assert np.allclose(back.layers[m].x, f.layers[m].x)
        assert np.allclose(back.layers[m].values, f.layers[m].values)
    for key, arr in f.traces.items():
        assert np.allclose(back.traces[key], arr)


def test_worker_pool_is_deterministic(load):
    cfg, spec = load("twolayer")
    spec = dataclasses.replace(spec, lambda_steps=200, lambda_max=10.0)
    f = cat.to_grid_function(cat.make_profile("gauss_bump"), cfg, spec.x_max)
    serial = tr.forward_transform(cfg, f, spec, n_workers=1)
    pooled = tr.forward_transform(cfg, f, spec, n_workers=4)
    assert np.array_equal(serial.values, pooled.values)


def test_worker_env_variable(load, monkeypatch):
    monkeypatch.setenv("LAYERFT_WORKERS", "3")
    cfg, spec = load("sine")
    spec = dataclasses.replace(spec, lambda_steps=100, lambda_max=8.0)
    f = odd_gaussian_function()
    img = tr.forward_transform(cfg, f, spec)
    oracle = -np.sqrt(np.pi / 2) * np.exp(-img.lambdas**2 / 2)
    assert np.max(np.abs(img.values[:, 0] - oracle)) <= 1e-12


def test_canonical_lambda_grid_shape(load):
    cfg, spec = load("twolayer")
    grid = lambda_grid(cfg, spec)
    assert grid.nodes.size == grid.n_panels * grid.order
    assert np.all(np.diff(grid.nodes) > 0)
    assert grid.nodes[0] > spec.lambda_min - 1e-12
    assert grid.nodes[-1] < spec.lambda_max
    # weights integrate a smooth function accurately on the window
    total = np.sum(grid.weights * np.exp(-grid.nodes))
    assert total == pytest.approx(np.exp(-spec.lambda_min) - np.exp(-spec.lambda_max), abs=1e-9)


def test_decayed_image_requires_nonnegative_time(load):
    cfg, spec = load("sine")
    f = odd_gaussian_function()
    img = tr.forward_transform(cfg, f, spec, lambdas=np.array([1.0, 2.0]))
    with pytest.raises(InvariantViolation):
        img.decayed(-0.1)
    assert img.decayed(0.2).meta["heat_time"] == pytest.approx(0.2)


def test_empty_image_rejected(load):
    cfg, spec = load("sine")
    spec = dataclasses.replace(spec, lambda_steps=100, lambda_max=8.0)
    f = odd_gaussian_function()
    img = tr.forward_transform(cfg, f, spec)
    nan_img = dataclasses.replace(img, values=np.full_like(img.values, np.nan))
    with pytest.raises(EmptyImage):
        tr.inverse_transform(cfg, nan_img, [np.linspace(0, 3, 5)], spec)


def test_inverse_reports_dropped_rows(load):
    cfg, spec = load("sine")
    spec = dataclasses.replace(spec, lambda_steps=150, lambda_max=12.0)
    f = odd_gaussian_function()
    img = tr.forward_transform(cfg, f, spec)
    vals = img.values.copy()
    vals[7] = np.nan
    marked = dataclasses.replace(img, values=vals)
    xs = np.linspace(0.0, 6.0, 61)
    recon = tr.inverse_transform(cfg, marked, [xs], spec)
    assert recon.meta["dropped_rows"] == [7]
    # one dropped quadrature node barely perturbs the reconstruction
    clean = tr.inverse_transform(cfg, img, [xs], spec)
    assert np.max(np.abs(recon.layers[0].values - clean.layers[0].values)) <= 1e-2
