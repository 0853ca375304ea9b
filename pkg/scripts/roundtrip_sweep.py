"""Forward/inverse round-trip error vs. quadrature resolution.

Runs a smooth bump through the transform pair on the bundled two-layer
configs and prints the L2 reconstruction error as the spectral grid is
refined and the damping parameter reduced.  The error decreases
monotonically toward the truncation floor of the spectral band.
"""

import dataclasses
import pathlib
import time

from layerft import catalog as cat
from layerft import transform as tr
from layerft.configio import parse_config

CONFIGS = pathlib.Path(__file__).resolve().parents[1] / "configs"


def refined(spec, factor):
    return dataclasses.replace(
        spec,
        lambda_steps=int(spec.lambda_steps * factor),
        tau_schedule=tuple(t / factor for t in spec.tau_schedule),
    )


def main():
    for name, amps in (("twolayer", None), ("r2diag", [1.0, 0.7])):
        cfg, spec = parse_config(CONFIGS / f"{name}.cfg")
        base = dataclasses.replace(spec, lambda_steps=500)
        f = cat.to_grid_function(
            cat.make_profile("gauss_bump"), cfg, spec.x_max,
            samples_per_layer=201, amplitudes=amps,
        )
        print(f"== {name} (r={cfg.r}, {len(cfg.layers)} layers) ==")
        print(f"{'lambda steps':>14} {'tau_0':>10} {'L2 error':>12} {'wall':>8}")
        for factor in (1, 2, 4):
            sp = refined(base, factor)
            t0 = time.perf_counter()
            rep = tr.roundtrip_report(cfg, f, sp)
            dt = time.perf_counter() - t0
            print(f"{sp.lambda_steps:>14d} {sp.tau_schedule[0]:>10.2e} "
                  f"{rep.l2_total:>12.3e} {dt:>7.1f}s")
        print()


if __name__ == "__main__":
    main()
