#!/usr/bin/env python3
"""The desk-scale twin experiment, plain filter against morphed filter.

A double-vortex truth is observed on a coarse grid with noisy height and
vorticity; an eight-member ensemble started from displaced vortices is
analyzed once by a stochastic EnKF.  The morphed variant first aligns each
member with the observations by tensor morphing, then lets the filter
correct what alignment cannot.  Position error masquerading as amplitude
error is what the morph removes, and the buoyancy field, which the filter
observes only through its correlations, is where that shows up.
"""

import argparse

from liemorph.cli_experiments import (
    emit_outputs,
    preset_config,
    run_experiment,
    validate_config,
)

VARIABLES = ("h", "theta", "v", "omega")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=None,
                    help="emit the morphed run's output files here")
    args = ap.parse_args(argv)

    reports = {}
    for pipeline in ("plain-enkf", "morphed-enkf"):
        raw = preset_config("desk")
        raw["pipeline"] = pipeline
        reports[pipeline] = run_experiment(validate_config(raw))
        print(f"{pipeline}: finished in {reports[pipeline].runtime_seconds:.1f} s")

    print(f"\nposterior ensemble-mean MSE against the truth")
    print(f"{'variable':>10} {'plain':>14} {'morphed':>14} {'change':>9}")
    for var in VARIABLES:
        plain = reports["plain-enkf"].metric("posterior", var, "mean_field_mse")
        morphed = reports["morphed-enkf"].metric("posterior", var, "mean_field_mse")
        change = (morphed - plain) / plain
        print(f"{var:>10} {plain:>14.6e} {morphed:>14.6e} {change:>+9.1%}")

    worst = 0.0
    for _, trace in reports["morphed-enkf"].traces:
        mass = trace.column("mass")
        worst = max(worst, abs(mass[-1] - mass[0]) / abs(mass[0]))
    print(f"\nworst member mass drift across {len(reports['morphed-enkf'].traces)} "
          f"morphs of 500 steps: {worst:.3e}")

    if args.out:
        files = emit_outputs(reports["morphed-enkf"], args.out)
        print(f"wrote {len(files)} files under {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
