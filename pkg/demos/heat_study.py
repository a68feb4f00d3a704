"""Heat problem study: accuracy sweep, then a cautionary tale about stability.

Part 1 runs the default heat experiment (piecewise-constant conductivity
on three subdomains, range 0.1 to 1.0) and prints the error sweep: test
error tracks the projection error down to a fraction of a percent, and
the two unconstrained solvers (normal equations vs. stacked least
squares) agree to floating-point accuracy.

Part 2 widens the conductivity range to 0.01 - 1.0 and reruns.  Nothing
in the least-squares fit enforces dissipativity, and on this harder range
the learned operator picks up eigenvalues with positive real part at some
parameters: trajectories grow where the true solution decays, and the
training error explodes at the larger basis sizes even though the
intrusive (Galerkin) model -- which inherits dissipativity by
construction -- stays at the projection error.  The script measures the
spectral abscissa of both operators to show exactly where the instability
comes from.

Run:  python3 demos/heat_study.py [--out DIR]
"""

import argparse
import dataclasses
from pathlib import Path

import numpy as np

from topinf import (
    ReducedBasis,
    build_heat_model,
    default_config,
    heat_features,
    intrusive_project,
    load_matrix,
    load_tensor,
    mode3_product,
    run_pipeline,
)


def error_table(cfg, manifest):
    print(f"  {'r':>3s} {'method':>10s} {'train':>10s} {'test':>10s} {'projection(test)':>17s}")
    for r in cfg.reduced_dims:
        proj = manifest["projection"][f"r{r}_test"]
        for method in list(cfg.methods) + ["intrusive"]:
            train = manifest["errors"][f"{method}_r{r}_train"]
            test = manifest["errors"][f"{method}_r{r}_test"]
            print(f"  {r:>3d} {method:>10s} {train:>10.3e} {test:>10.3e} {proj:>17.3e}")
    print()


def spectral_abscissa(tensor, params):
    """Largest eigenvalue of the symmetric part of T nu over all samples."""
    worst = -np.inf
    for s in range(params.shape[1]):
        op = mode3_product(tensor, heat_features(params[:, s]))
        worst = max(worst, float(np.max(np.linalg.eigvalsh(0.5 * (op + op.T)))))
    return worst


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="runs/demo_heat", help="artifact directory")
    args = parser.parse_args()
    root = Path(args.out)

    print("Part 1: default conductivity range [0.1, 1.0]")
    print("=" * 70)
    cfg = default_config("heat1d")
    manifest = run_pipeline(cfg, root / "default")
    error_table(cfg, manifest)
    agreements = [manifest["agreement"][f"r{r}"] for r in cfg.reduced_dims]
    print(f"  normal-equations vs least-squares fit distance: worst {max(agreements):.2e}")
    print("  (the two solvers answer the same problem; the stacked form is")
    print("   the numerically careful route, the normal equations the fast one)")
    print()

    print("Part 2: harsh conductivity range [0.01, 1.0]")
    print("=" * 70)
    harsh = dataclasses.replace(cfg, param_lo=0.01)
    manifest = run_pipeline(harsh, root / "harsh")
    error_table(harsh, manifest)
    print("  The learned models now lose badly on the training split at the")
    print("  larger basis sizes while the intrusive model stays put.  The")
    print("  reason is structural, not a solver failure:")
    print()

    model = build_heat_model(harsh.n_elements, harsh.breakpoints)
    u = load_matrix(root / "harsh" / "basis" / "u.tpoi")
    params = load_matrix(root / "harsh" / "params_train.tpoi")
    r = max(harsh.reduced_dims)
    basis = ReducedBasis(u=u[:, :r], weight=model.mass, kind="pod")
    reference = intrusive_project(-model.stiffness, basis).tensor
    learned = load_tensor(root / "harsh" / "operators" / f"tensor_lstsq_r{r}.tpoi")
    print(f"  largest eigenvalue of the symmetric part of the reduced operator")
    print(f"  across the training parameters, at r = {r}:")
    print(f"    intrusive (Galerkin) model: {spectral_abscissa(reference, params):+.3e}")
    print(f"    learned model:              {spectral_abscissa(learned, params):+.3e}")
    print()
    print("  A Galerkin projection of a dissipative operator is dissipative;")
    print("  every trajectory of the intrusive model decays monotonically in")
    print("  the mass norm.  The unconstrained fit inherits no such property:")
    print("  a positive eigenvalue makes some reduced trajectories grow where")
    print("  the full model decays, which is exactly the training-error blowup")
    print("  in the table.  The wave study (demos/wave_energy_study.py) shows")
    print("  the constructive counterpart: constraining the fit to the")
    print("  structure the physics dictates removes this failure mode.")


if __name__ == "__main__":
    main()
