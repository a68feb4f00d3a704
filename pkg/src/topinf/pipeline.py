"""End-to-end experiment pipeline with file-based stages.

The pipeline decomposes into five stages, each of which reads its inputs
from an artifact directory and writes its outputs back to it, so stages
can run in one process (:func:`run_pipeline`) or as separate invocations:

1. ``simulate_fom``   -- sample parameters, integrate the full model;
2. ``build_basis``    -- reduced basis from the training snapshots;
3. ``infer``          -- reduced trajectories, derivative data, operator fits;
4. ``simulate_rom``   -- integrate learned and intrusive reduced models;
5. ``evaluate``       -- error/energy metrics, CSV tables, text summary.

Artifacts use the binary format of :mod:`topinf.storage`; tables are CSV
with shortest round-trip float formatting.  Reruns with the same
configuration and seed produce byte-identical numeric artifacts
(``manifest.json`` records wall-clock timings and is exempt).

Randomness: all sampling derives from the configured seed through the
Philox 4x64 counter-based generator, keyed by ``(seed, stream)`` with
stream 0 for training parameters and stream 1 for test parameters.

Parameter sweeps run through a thread map whose width is capped by the
``TPOI_THREADS`` environment variable (unset/empty means sequential,
``0`` means one thread per CPU); results are collected in input order, so
the artifacts do not depend on the thread count.
"""

from __future__ import annotations

import dataclasses
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .basis import (
    ReducedBasis,
    estimate_time_derivative,
    exact_reduced_derivative,
    project_snapshots,
    psd_cotangent_lift,
    weighted_pod,
)
from .config import ExperimentConfig
from .errors import NumericError
from .heat import (
    build_heat_model,
    heat_features,
    heat_initial_state,
    heat_operator,
    sample_conductivities,
)
from .inference import InferenceData, infer_lstsq, infer_normal, infer_symmetric
from .linalg import lstsq_min_norm
from .metrics import hamiltonian_drift, projection_error, relative_l2
from .rom import (
    RomModel,
    Trajectory,
    block_operator,
    crank_nicolson,
    implicit_midpoint,
    intrusive_project,
    project_matrix,
    reduced_hamiltonian,
    symmetric_part,
)
from .storage import load_matrix, save_matrix, load_tensor, save_tensor
from .tensors import mode3_product
from .wave import (
    build_wave_model,
    sample_wave_speeds,
    wave_full_operator,
    wave_initial_state,
    wave_mass_form_operator,
    wave_stiffness,
)

__all__ = [
    "run_pipeline",
    "simulate_fom",
    "build_basis",
    "infer",
    "simulate_rom",
    "evaluate",
    "thread_count",
    "parallel_map",
    "make_rng",
    "STAGES",
]

INTRUSIVE = "intrusive"

_TRAIN_STREAM = 0
_TEST_STREAM = 1


# ----------------------------------------------------------------------
# deterministic randomness and parallel sweeps


def make_rng(seed: int, stream: int) -> np.random.Generator:
    """Philox 4x64 generator keyed by ``(seed, stream)``."""
    key = np.array([seed, stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def thread_count() -> int:
    """Width of the parallel parameter map, from ``TPOI_THREADS``.

    Unset or empty means 1 (sequential); ``0`` means one thread per CPU.
    """
    raw = os.environ.get("TPOI_THREADS", "").strip()
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"TPOI_THREADS must be an integer, got {raw!r}") from exc
    if value < 0:
        raise ValueError(f"TPOI_THREADS must be non-negative, got {value}")
    if value == 0:
        return os.cpu_count() or 1
    return value


def parallel_map(fn, items) -> list:
    """Map preserving input order, threaded when :func:`thread_count` > 1."""
    items = list(items)
    width = min(thread_count(), len(items)) if items else 0
    if width <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=width) as pool:
        return list(pool.map(fn, items))


# ----------------------------------------------------------------------
# shared helpers


def _build_model(cfg: ExperimentConfig):
    if cfg.problem == "heat1d":
        return build_heat_model(cfg.n_elements, cfg.breakpoints)
    return build_wave_model(cfg.n_elements, cfg.breakpoints)


def _draw_parameters(cfg: ExperimentConfig, count: int, stream: int) -> np.ndarray:
    rng = make_rng(cfg.seed, stream)
    if cfg.sampling == "log_uniform":
        return sample_conductivities(rng, count, cfg.n_subdomains, cfg.param_lo, cfg.param_hi)
    return sample_wave_speeds(rng, count, cfg.n_subdomains, cfg.param_lo, cfg.param_hi)


def _splits(cfg: ExperimentConfig) -> list[tuple[str, int]]:
    out = [("train", cfg.n_train)]
    if cfg.n_test > 0:
        out.append(("test", cfg.n_test))
    return out


def _fom_path(outdir: Path, split: str, i: int) -> Path:
    return outdir / "fom" / f"{split}_{i:03d}.tpoi"


def _rom_dir(outdir: Path, label: str, r: int) -> Path:
    return outdir / "rom" / f"{label}_r{r}"


def _load_params(outdir: Path, split: str) -> np.ndarray:
    return load_matrix(outdir / f"params_{split}.tpoi")


def _load_fom(cfg: ExperimentConfig, outdir: Path, split: str) -> list[np.ndarray]:
    count = cfg.n_train if split == "train" else cfg.n_test
    return [load_matrix(_fom_path(outdir, split, i)) for i in range(count)]


def _load_basis(cfg: ExperimentConfig, outdir: Path, model) -> ReducedBasis:
    u = load_matrix(outdir / "basis" / "u.tpoi")
    svals = load_matrix(outdir / "basis" / "svals.tpoi").ravel()
    if cfg.problem == "wave1d":
        half = load_matrix(outdir / "basis" / "u_half.tpoi")
        return ReducedBasis(u=u, weight=model.mass_w, kind="psd", u_half=half,
                            singular_values=svals)
    return ReducedBasis(u=u, weight=model.mass, kind="pod", singular_values=svals)


def _heat_intrusive(model, b: ReducedBasis) -> RomModel:
    """Galerkin projection of the (negated, dissipative) stiffness tensor."""
    return intrusive_project(-model.stiffness, b)


def _wave_intrusive_a1(model, b: ReducedBasis, mu: np.ndarray) -> np.ndarray:
    """Per-sample projected position block ``Uw^T K(mu) Uw``."""
    return project_matrix(wave_stiffness(model, mu), b.u_half)


def _wave_affine_reference(model, b: ReducedBasis, params: np.ndarray) -> np.ndarray:
    """Least-squares affine-in-``mu^2`` fit of the projected position blocks.

    This is the intrusive reference for the learned position tensor; when
    the full-order operator is exactly affine in ``mu^2`` (one subdomain)
    the fit reproduces it exactly.
    """
    r = b.r
    ns = params.shape[1]
    theta = (params**2).T  # (Ns, p)
    targets = np.empty((ns, r * r))
    for s in range(ns):
        targets[s] = _wave_intrusive_a1(model, b, params[:, s]).ravel()
    coeffs, _, _ = lstsq_min_norm(theta, targets)
    return np.moveaxis(coeffs.reshape(params.shape[0], r, r), 0, 2)


def _rel_dist(a: np.ndarray, ref: np.ndarray) -> float:
    scale = float(np.sqrt(np.sum(ref**2)))
    if scale == 0.0:
        return float(np.sqrt(np.sum(a**2)))
    return float(np.sqrt(np.sum((a - ref) ** 2)) / scale)


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


# ----------------------------------------------------------------------
# manifest


def _manifest_path(outdir: Path) -> Path:
    return outdir / "manifest.json"


def _load_manifest(outdir: Path) -> dict:
    path = _manifest_path(outdir)
    if path.exists():
        return json.loads(path.read_text())
    return {
        "package_version": __version__,
        "config": {},
        "stages": {},
        "inference": {},
        "recovery": {},
        "agreement": {},
        "errors": {},
        "projection": {},
        "drift_max": {},
        "divergences": [],
    }


def _save_manifest(outdir: Path, manifest: dict) -> None:
    _manifest_path(outdir).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _record_stage(cfg: ExperimentConfig, outdir: Path, name: str, seconds: float,
                  updates: dict | None = None) -> None:
    manifest = _load_manifest(outdir)
    manifest["package_version"] = __version__
    manifest["config"] = {
        k: list(v) if isinstance(v, tuple) else v
        for k, v in dataclasses.asdict(cfg).items()
    }
    manifest["stages"][name] = seconds
    for key, value in (updates or {}).items():
        if isinstance(value, dict):
            manifest.setdefault(key, {}).update(value)
        elif isinstance(value, list):
            manifest.setdefault(key, [])
            manifest[key].extend(v for v in value if v not in manifest[key])
        else:
            manifest[key] = value
    _save_manifest(outdir, manifest)


# ----------------------------------------------------------------------
# stage 1: full-order simulation


def simulate_fom(cfg: ExperimentConfig, outdir) -> None:
    """Sample parameters and integrate the full-order model for each."""
    cfg = cfg.validate()
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "fom").mkdir(exist_ok=True)
    started = time.perf_counter()

    model = _build_model(cfg)
    if cfg.problem == "heat1d":
        x0 = heat_initial_state(model)
    else:
        x0 = wave_initial_state(model)

    for split, count in _splits(cfg):
        params = _draw_parameters(cfg, count, _TRAIN_STREAM if split == "train" else _TEST_STREAM)
        save_matrix(outdir / f"params_{split}.tpoi", params)

        def _run(i: int, params=params) -> Trajectory:
            mu = params[:, i]
            if cfg.problem == "heat1d":
                return crank_nicolson(
                    heat_operator(model, mu), x0, cfg.dt, cfg.n_times, mass=model.mass,
                    t0=cfg.t0,
                )
            return implicit_midpoint(
                wave_full_operator(model, mu), x0, cfg.dt, cfg.n_times, t0=cfg.t0
            )

        trajectories = parallel_map(_run, range(count))
        for i, traj in enumerate(trajectories):
            if traj.diverged:
                raise NumericError(
                    f"full-order run {split}/{i} diverged at step {traj.first_bad_step}"
                )
            save_matrix(_fom_path(outdir, split, i), traj.states)

    _record_stage(cfg, outdir, "simulate_fom", time.perf_counter() - started)


# ----------------------------------------------------------------------
# stage 2: reduced basis


def build_basis(cfg: ExperimentConfig, outdir) -> None:
    """Build the reduced basis of the largest requested size from training data."""
    cfg = cfg.validate()
    outdir = Path(outdir)
    (outdir / "basis").mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()

    model = _build_model(cfg)
    train = _load_fom(cfg, outdir, "train")
    r_max = max(cfg.reduced_dims)
    if cfg.problem == "heat1d":
        b = weighted_pod(train, model.mass, r_max)
    else:
        n = model.n_w
        b = psd_cotangent_lift(
            [q[:n] for q in train], [q[n:] for q in train], model.mass_w, r_max
        )
        save_matrix(outdir / "basis" / "u_half.tpoi", b.u_half)
    save_matrix(outdir / "basis" / "u.tpoi", b.u)
    save_matrix(outdir / "basis" / "svals.tpoi", b.singular_values[None, :])

    _record_stage(cfg, outdir, "build_basis", time.perf_counter() - started)


# ----------------------------------------------------------------------
# stage 3: operator inference


def _reduced_and_derivatives(cfg, model, b, params, snapshots):
    reduced = project_snapshots(b, snapshots)
    if cfg.derivative == "finite_difference":
        derivs = [estimate_time_derivative(red, cfg.dt) for red in reduced]
    elif cfg.problem == "heat1d":
        tensor = _heat_intrusive(model, b).tensor
        derivs = [
            mode3_product(tensor, heat_features(params[:, s])) @ reduced[s]
            for s in range(len(reduced))
        ]
    else:
        derivs = [
            exact_reduced_derivative(b, wave_mass_form_operator(model, params[:, s]), reduced[s])
            for s in range(len(reduced))
        ]
    return reduced, derivs


def _fit(method: str, data: InferenceData):
    if method == "normal":
        return infer_normal(data)
    if method == "lstsq":
        return infer_lstsq(data)
    return infer_symmetric(data)


def infer(cfg: ExperimentConfig, outdir) -> None:
    """Fit reduced operators for every requested size and method."""
    cfg = cfg.validate()
    outdir = Path(outdir)
    (outdir / "operators").mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()

    model = _build_model(cfg)
    params = _load_params(outdir, "train")
    snapshots = _load_fom(cfg, outdir, "train")
    basis_full = _load_basis(cfg, outdir, model)

    diagnostics: dict[str, dict] = {}
    recovery: dict[str, float] = {}
    agreement: dict[str, float] = {}

    for r in cfg.reduced_dims:
        b = basis_full.truncate(r)
        reduced, derivs = _reduced_and_derivatives(cfg, model, b, params, snapshots)
        fits: dict[str, np.ndarray] = {}

        if cfg.problem == "heat1d":
            features = np.column_stack([heat_features(params[:, s]) for s in range(params.shape[1])])
            data = InferenceData(
                nus=features,
                ys=np.stack(reduced, axis=2),
                zs=np.stack(derivs, axis=2),
            )
            for method in cfg.methods:
                result = _fit(method, data)
                save_tensor(outdir / "operators" / f"tensor_{method}_r{r}.tpoi", result.tensor)
                fits[method] = result.tensor
                diagnostics[f"{method}_r{r}"] = {
                    "cond": result.cond,
                    "residual": result.residual,
                    "stationarity": result.stationarity,
                }
            if cfg.derivative == "exact":
                reference = _heat_intrusive(model, b).tensor
                for method, tensor in fits.items():
                    recovery[f"{method}_r{r}"] = _rel_dist(tensor, reference)
        else:
            qs = np.stack([red[:r] for red in reduced], axis=2)
            ps = np.stack([red[r:] for red in reduced], axis=2)
            qdots = np.stack([d[:r] for d in derivs], axis=2)
            pdots = np.stack([d[r:] for d in derivs], axis=2)
            t1_data = InferenceData(nus=params**2, ys=qs, zs=-pdots)
            a2_data = InferenceData(
                nus=np.ones((1, params.shape[1])), ys=ps, zs=qdots
            )
            for method in cfg.methods:
                t1_fit = _fit(method, t1_data)
                a2_fit = _fit(method, a2_data)
                save_tensor(outdir / "operators" / f"t1_{method}_r{r}.tpoi", t1_fit.tensor)
                save_matrix(outdir / "operators" / f"a2_{method}_r{r}.tpoi",
                            a2_fit.tensor[:, :, 0])
                fits[method] = t1_fit.tensor
                diagnostics[f"{method}_r{r}_t1"] = {
                    "cond": t1_fit.cond,
                    "residual": t1_fit.residual,
                    "stationarity": t1_fit.stationarity,
                }
                diagnostics[f"{method}_r{r}_a2"] = {
                    "cond": a2_fit.cond,
                    "residual": a2_fit.residual,
                    "stationarity": a2_fit.stationarity,
                }
            if cfg.derivative == "exact":
                reference = _wave_affine_reference(model, b, params)
                for method, tensor in fits.items():
                    recovery[f"{method}_r{r}"] = _rel_dist(tensor, reference)

        if "normal" in fits and "lstsq" in fits:
            agreement[f"r{r}"] = _rel_dist(fits["normal"], fits["lstsq"])

    _record_stage(
        cfg, outdir, "infer", time.perf_counter() - started,
        updates={"inference": diagnostics, "recovery": recovery, "agreement": agreement},
    )


# ----------------------------------------------------------------------
# stage 4: reduced-order simulation


def _rom_labels(cfg: ExperimentConfig) -> list[str]:
    return list(cfg.methods) + [INTRUSIVE]


def _rom_operator_builder(cfg, model, b, outdir, label: str, r: int):
    """Per-(label, r) factory mapping a parameter vector to the reduced generator.

    Stored operators are loaded once here, outside the parameter sweep.
    """
    if cfg.problem == "heat1d":
        if label == INTRUSIVE:
            tensor = _heat_intrusive(model, b).tensor
        else:
            tensor = load_tensor(outdir / "operators" / f"tensor_{label}_r{r}.tpoi")
        return lambda mu: mode3_product(tensor, heat_features(mu))
    if label == INTRUSIVE:
        def build(mu: np.ndarray) -> np.ndarray:
            op = np.zeros((2 * r, 2 * r))
            op[:r, r:] = np.eye(r)
            op[r:, :r] = -_wave_intrusive_a1(model, b, mu)
            return op

        return build
    t1 = load_tensor(outdir / "operators" / f"t1_{label}_r{r}.tpoi")
    a2 = load_matrix(outdir / "operators" / f"a2_{label}_r{r}.tpoi")
    return lambda mu: block_operator(t1, a2, mu)


def simulate_rom(cfg: ExperimentConfig, outdir) -> None:
    """Integrate every reduced model for every parameter sample."""
    cfg = cfg.validate()
    outdir = Path(outdir)
    started = time.perf_counter()

    model = _build_model(cfg)
    basis_full = _load_basis(cfg, outdir, model)
    if cfg.problem == "heat1d":
        x0 = heat_initial_state(model)
    else:
        x0 = wave_initial_state(model)

    divergences: list[str] = []
    for r in cfg.reduced_dims:
        b = basis_full.truncate(r)
        red0 = b.project(x0)
        for label in _rom_labels(cfg):
            target = _rom_dir(outdir, label, r)
            target.mkdir(parents=True, exist_ok=True)
            operator_at = _rom_operator_builder(cfg, model, b, outdir, label, r)
            for split, count in _splits(cfg):
                params = _load_params(outdir, split)

                def _run(i: int, params=params, operator_at=operator_at) -> Trajectory:
                    op = operator_at(params[:, i])
                    if cfg.problem == "heat1d":
                        return crank_nicolson(op, red0, cfg.dt, cfg.n_times, t0=cfg.t0)
                    return implicit_midpoint(op, red0, cfg.dt, cfg.n_times, t0=cfg.t0)

                for i, traj in enumerate(parallel_map(_run, range(count))):
                    if traj.diverged:
                        divergences.append(
                            f"{label}_r{r}/{split}_{i:03d} at step {traj.first_bad_step}"
                        )
                        continue
                    save_matrix(target / f"{split}_{i:03d}.tpoi", traj.states)

    _record_stage(cfg, outdir, "simulate_rom", time.perf_counter() - started,
                  updates={"divergences": divergences})


# ----------------------------------------------------------------------
# stage 5: evaluation


def _drift_model_builder(cfg, model, b, outdir, label: str, r: int):
    """Per-(label, r) factory mapping a parameter to (energy model, contraction).

    Each reduced run is scored against its own quadratic energy: the
    intrusive model evaluates its per-sample position block directly (with
    a unit contraction weight, since the block already contains the
    parameter), the symmetry-constrained fit carries exact flags, and
    unconstrained fits are scored through their symmetric part, which
    defines the same quadratic form.
    """
    if label == INTRUSIVE:
        def build(mu: np.ndarray) -> tuple[RomModel, np.ndarray]:
            a1 = _wave_intrusive_a1(model, b, mu)
            energy_model = RomModel(
                kind="block_hamiltonian",
                t1=a1[:, :, None],
                a2=np.eye(r),
                t1_structure="symmetric",
                a2_structure="symmetric",
            )
            return energy_model, np.ones(1)

        return build
    t1 = load_tensor(outdir / "operators" / f"t1_{label}_r{r}.tpoi")
    a2 = load_matrix(outdir / "operators" / f"a2_{label}_r{r}.tpoi")
    learned = RomModel(kind="block_hamiltonian", t1=t1, a2=a2)
    if label == "symmetric":
        learned = dataclasses.replace(
            learned, t1_structure="symmetric", a2_structure="symmetric"
        )
    else:
        learned = symmetric_part(learned)
    return lambda mu: (learned, mu)


def evaluate(cfg: ExperimentConfig, outdir) -> None:
    """Compute error tables, energy-drift series, and the text summary."""
    cfg = cfg.validate()
    outdir = Path(outdir)
    report_dir = outdir / "report"
    report_dir.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()

    model = _build_model(cfg)
    basis_full = _load_basis(cfg, outdir, model)
    manifest = _load_manifest(outdir)
    divergences = set(d.split(" at step")[0] for d in manifest.get("divergences", []))

    fom: dict[str, list[np.ndarray]] = {
        split: _load_fom(cfg, outdir, split) for split, _ in _splits(cfg)
    }
    params: dict[str, np.ndarray] = {
        split: _load_params(outdir, split) for split, _ in _splits(cfg)
    }

    error_rows: list[list] = []
    error_map: dict[str, float] = {}
    projection_map: dict[str, float] = {}
    drift_max: dict[str, float] = {}

    for r in cfg.reduced_dims:
        b = basis_full.truncate(r)
        proj: dict[str, float] = {}
        for split, _ in _splits(cfg):
            if cfg.problem == "heat1d":
                proj[split] = projection_error(fom[split], b)
            else:
                # wave errors are scored on the position block only
                n = model.n_w
                positions = [states[:n] for states in fom[split]]
                recons = [
                    b.u_half @ (b.u_half.T @ (model.mass_w @ q)) for q in positions
                ]
                proj[split] = relative_l2(positions, recons, model.mass_w)
            projection_map[f"r{r}_{split}"] = proj[split]

        for label in _rom_labels(cfg):
            drift_peak = 0.0
            drift_at = (
                _drift_model_builder(cfg, model, b, outdir, label, r)
                if cfg.problem == "wave1d"
                else None
            )
            for split, count in _splits(cfg):
                refs: list[np.ndarray] = []
                cands: list[np.ndarray] = []
                for i in range(count):
                    if f"{label}_r{r}/{split}_{i:03d}" in divergences:
                        continue
                    red = load_matrix(_rom_dir(outdir, label, r) / f"{split}_{i:03d}.tpoi")
                    lifted = b.lift(red)
                    if cfg.problem == "heat1d":
                        refs.append(fom[split][i])
                        cands.append(lifted)
                    else:
                        n = model.n_w
                        refs.append(fom[split][i][:n])
                        cands.append(lifted[:n])
                        dmodel, nu = drift_at(params[split][:, i])
                        drift = hamiltonian_drift(dmodel, nu, red)
                        h0 = abs(reduced_hamiltonian(dmodel, nu, red[:, 0]))
                        rel = float(np.max(drift))
                        if h0 > 0.0:
                            rel /= h0
                        drift_peak = max(drift_peak, rel)
                if not refs:
                    value = float("inf")
                else:
                    mass = model.mass if cfg.problem == "heat1d" else model.mass_w
                    value = relative_l2(refs, cands, mass)
                error_rows.append([split, r, label, value, proj[split]])
                error_map[f"{label}_r{r}_{split}"] = value
            if cfg.problem == "wave1d":
                drift_max[f"{label}_r{r}"] = drift_peak

        if cfg.problem == "wave1d":
            _write_drift_series(cfg, model, b, outdir, report_dir, params, r)

    _write_csv(
        report_dir / "errors.csv",
        ["split", "r", "method", "relative_l2", "projection_error"],
        error_rows,
    )
    _write_summary(cfg, report_dir, manifest, error_rows, drift_max)

    _record_stage(
        cfg, outdir, "evaluate", time.perf_counter() - started,
        updates={"errors": error_map, "projection": projection_map, "drift_max": drift_max},
    )


def _write_drift_series(cfg, model, b, outdir, report_dir, params, r: int) -> None:
    """One showcase drift series per model at the first held-out sample."""
    split = "test" if cfg.n_test > 0 else "train"
    mu = params[split][:, 0]
    labels = _rom_labels(cfg)
    columns: dict[str, np.ndarray] = {}
    times = None
    for label in labels:
        path = _rom_dir(outdir, label, r) / f"{split}_000.tpoi"
        if not path.exists():
            continue
        red = load_matrix(path)
        dmodel, nu = _drift_model_builder(cfg, model, b, outdir, label, r)(mu)
        columns[label] = hamiltonian_drift(dmodel, nu, red)
        if times is None:
            times = cfg.t0 + cfg.dt * np.arange(red.shape[1])
    if times is None:
        return
    header = ["time"] + list(columns.keys())
    rows = [
        [float(times[k])] + [float(columns[label][k]) for label in columns]
        for k in range(len(times))
    ]
    _write_csv(report_dir / f"drift_r{r}.csv", header, rows)


def _write_summary(cfg, report_dir, manifest, error_rows, drift_max) -> None:
    from .config import format_config

    lines: list[str] = []
    lines.append("experiment summary")
    lines.append("==================")
    lines.append("")
    lines.append("configuration:")
    for line in format_config(cfg).rstrip("\n").splitlines():
        lines.append("  " + line)
    lines.append("")
    lines.append("relative L2 errors (pooled per split; mass-weighted):")
    lines.append("  split,r,method,relative_l2,projection_error")
    for row in error_rows:
        lines.append("  " + ",".join(_fmt(v) for v in row))
    if drift_max:
        lines.append("")
        lines.append("max relative energy drift over all samples:")
        for key in sorted(drift_max):
            lines.append(f"  {key}: {_fmt(drift_max[key])}")
        lines.append("  (unconstrained fits are scored with the symmetric part")
        lines.append("   of their learned operators, which defines the same")
        lines.append("   quadratic energy)")
    if manifest.get("recovery"):
        lines.append("")
        lines.append("operator recovery vs. intrusive reference (exact derivatives):")
        for key in sorted(manifest["recovery"]):
            lines.append(f"  {key}: {_fmt(manifest['recovery'][key])}")
    if manifest.get("agreement"):
        lines.append("")
        lines.append("normal-equations vs. least-squares tensor distance:")
        for key in sorted(manifest["agreement"]):
            lines.append(f"  {key}: {_fmt(manifest['agreement'][key])}")
    divs = manifest.get("divergences", [])
    lines.append("")
    lines.append(f"diverged reduced runs: {len(divs)}")
    for d in divs:
        lines.append(f"  {d}")
    (report_dir / "summary.txt").write_text("\n".join(lines) + "\n")


# ----------------------------------------------------------------------
# full pipeline

STAGES = (
    ("simulate_fom", simulate_fom),
    ("build_basis", build_basis),
    ("infer", infer),
    ("simulate_rom", simulate_rom),
    ("evaluate", evaluate),
)


def run_pipeline(cfg: ExperimentConfig, outdir=None) -> dict:
    """Run all five stages in order; returns the final manifest dict."""
    from .config import format_config

    cfg = cfg.validate()
    outdir = Path(outdir if outdir is not None else cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config.cfg").write_text(format_config(cfg))
    for _, stage in STAGES:
        stage(cfg, outdir)
    return _load_manifest(outdir)
