"""Wave problem study: what constraining the fit to canonical form buys.

The wave experiment learns a reduced model of a linear wave equation in
canonical Hamiltonian form.  Three reduced models run side by side:

* ``intrusive``  -- Galerkin projection onto a cotangent-lift basis,
  which keeps the canonical block structure exactly;
* ``symmetric``  -- operator inference with the symmetry constraint on
  both learned blocks, so the fitted model is again Hamiltonian;
* ``lstsq``      -- plain unconstrained operator inference.

All three are integrated with the implicit midpoint rule, which
conserves every quadratic invariant of a linear system -- so any energy
drift is the model's fault, not the integrator's.  The script prints the
pooled position errors, the worst relative energy drift of each model,
and a time series showing the unconstrained fit's energy wandering off
while the structured fits hold it to roundoff.

Run:  python3 demos/wave_energy_study.py [--out DIR]
"""

import argparse
from pathlib import Path

import numpy as np

from topinf import default_config, load_matrix, load_tensor, run_pipeline


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="runs/demo_wave", help="artifact directory")
    args = parser.parse_args()
    root = Path(args.out)

    cfg = default_config("wave1d")
    print("running the default wave experiment "
          f"({cfg.n_train} train / {cfg.n_test} test samples, "
          f"{cfg.n_times - 1} midpoint steps)...")
    manifest = run_pipeline(cfg, root)
    print()

    labels = list(cfg.methods) + ["intrusive"]
    print("pooled relative L2 error of the position block (test split):")
    print(f"  {'r':>3s} " + " ".join(f"{label:>12s}" for label in labels)
          + f" {'projection':>12s}")
    for r in cfg.reduced_dims:
        row = [manifest["errors"][f"{label}_r{r}_test"] for label in labels]
        proj = manifest["projection"][f"r{r}_test"]
        print(f"  {r:>3d} " + " ".join(f"{v:>12.3e}" for v in row) + f" {proj:>12.3e}")
    print()
    floor = manifest["projection"][f"r{max(cfg.reduced_dims)}_test"]
    print("  Position errors decay slowly with r -- wave dynamics are poorly")
    print("  captured by a small global linear basis (the projection floor")
    print(f"  itself is still {100 * floor:.0f}% at r = {max(cfg.reduced_dims)} "
          "on the held-out samples), so")
    print("  accuracy is not the headline here.  Conservation is:")
    print()

    print("worst relative energy drift over all samples and steps:")
    print(f"  {'r':>3s} " + " ".join(f"{label:>12s}" for label in labels))
    for r in cfg.reduced_dims:
        row = [manifest["drift_max"][f"{label}_r{r}"] for label in labels]
        print(f"  {r:>3d} " + " ".join(f"{v:>12.3e}" for v in row))
    print()
    print("  Each model is scored against its own quadratic energy (the")
    print("  unconstrained fit through the symmetric part of its operators,")
    print("  which defines the same quadratic form).  The structured fits sit")
    print("  at integrator roundoff; the unconstrained fit does not define a")
    print("  conserved energy at all, and the midpoint rule faithfully")
    print("  reports that.")
    print()

    r = max(cfg.reduced_dims)
    lines = (root / "report" / f"drift_r{r}.csv").read_text().splitlines()
    header = lines[0].split(",")
    table = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    print(f"energy drift on the first test sample at r = {r} "
          "(absolute, every 100th step):")
    print("  " + " ".join(f"{name:>12s}" for name in header))
    for k in range(0, table.shape[0], 100):
        print("  " + " ".join(f"{v:>12.3e}" for v in table[k]))
    print()

    t1 = load_tensor(root / "operators" / f"t1_symmetric_r{r}.tpoi")
    a2 = load_matrix(root / "operators" / f"a2_symmetric_r{r}.tpoi")
    t1_dev = np.max(np.abs(t1 - t1.transpose(1, 0, 2)))
    a2_dev = np.max(np.abs(a2 - a2.T))
    t1_free = load_tensor(root / "operators" / f"t1_lstsq_r{r}.tpoi")
    free_dev = np.max(np.abs(t1_free - t1_free.transpose(1, 0, 2))) / np.max(
        np.abs(t1_free)
    )
    print("why: the constrained solver returns exactly symmetric blocks")
    print(f"  symmetric fit:      max |T1 - T1^T| = {t1_dev:.1e},"
          f"  max |A2 - A2^T| = {a2_dev:.1e}")
    print(f"  unconstrained fit:  relative asymmetry of T1 = {free_dev:.1e}")
    print()
    print("  A symmetric position block turns the learned system back into")
    print("  canonical form y' = J grad H(y); the midpoint rule then")
    print("  conserves H exactly up to roundoff.  The asymmetric part of the")
    print("  unconstrained fit is pure closure error: it costs conservation")
    print("  outright, and at the largest basis it degrades the plain error")
    print("  as well (compare the lstsq and symmetric columns at r = 10).")
    print()
    print(f"full tables: {root / 'report' / 'summary.txt'}")


if __name__ == "__main__":
    main()
