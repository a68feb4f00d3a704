"""Learning affine parametric reduced operators from trajectory data.

Given reduced snapshots ``Y_s`` (r x Nt), their time derivatives ``Z_s``,
and per-sample feature vectors ``nu_s`` (p entries), the inference problem
is the least squares fit of an order-3 operator tensor ``T`` (r x r x p):

    minimize  L(T) = 1/2 sum_s || Z_s - X_s (T nu_s) Y_s ||_F^2,

where the optional left factors ``X_s`` default to the identity.  Three
solvers are provided:

* :func:`infer_normal` assembles the dense normal-equations system for the
  partially vectorized unknown and solves it symmetrically;
* :func:`infer_lstsq` solves the equivalent tall least-squares problem
  row-block by row-block via the SVD (minimum-norm on rank deficiency);
* :func:`infer_symmetric` imposes the constraint ``(T nu)^T = +/- (T nu)``
  exactly, via the stationarity system of the constrained problem built
  from Kronecker products; use it with symmetric left factors (identity)
  or with the canonical symplectic matrix for Hamiltonian systems.

The two unconstrained solvers minimize the same objective; their system
matrices satisfy ``D^T D = B`` exactly, so they agree to solver precision
whenever the problem has a unique minimizer.  Uniqueness is equivalent to
the feature matrix (samples x p) and the merged snapshot stack both having
full column rank; :func:`uniqueness_check` reports both ranks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import tensors
from .errors import NonUniqueSolutionError, ResourceLimitError
from .linalg import lstsq_min_norm, solve_sym

__all__ = [
    "InferenceData",
    "InferredTensor",
    "UniquenessReport",
    "uniqueness_check",
    "assemble_normal_system",
    "assemble_lstsq_system",
    "infer_normal",
    "infer_lstsq",
    "infer_symmetric",
    "objective",
    "objective_gradient",
]

#: Relative singular-value cutoff for the uniqueness rank checks.
UNIQUENESS_RANK_RTOL = 1e-10

#: Default cap on the number of unknowns ``r*r*p`` in the symmetric solver.
SYMMETRIC_UNKNOWN_CAP = 20_000


@dataclass(frozen=True)
class InferenceData:
    """Training data for operator inference.

    Attributes
    ----------
    nus : ndarray, shape (p, Ns)
        Feature vectors, one column per training sample.
    ys : ndarray, shape (r, Nt, Ns)
        Reduced state trajectories stacked along the last axis.
    zs : ndarray, shape (m, Nt, Ns)
        Time-derivative trajectories; ``m == r`` unless left factors with
        ``m`` rows are supplied.
    xs : ndarray or None, shape (m, r, Ns)
        Optional per-sample left factors (identity when omitted).
    """

    nus: np.ndarray
    ys: np.ndarray
    zs: np.ndarray
    xs: np.ndarray | None = None

    def __post_init__(self):
        nus = np.asarray(self.nus, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        zs = np.asarray(self.zs, dtype=float)
        xs = None if self.xs is None else np.asarray(self.xs, dtype=float)
        if nus.ndim != 2:
            raise ValueError(f"nus must be (p, Ns), got ndim={nus.ndim}")
        if ys.ndim != 3 or zs.ndim != 3:
            raise ValueError("ys and zs must be order-3 (state, time, sample) arrays")
        ns = nus.shape[1]
        if ys.shape[2] != ns or zs.shape[2] != ns:
            raise ValueError(
                f"sample counts disagree: nus has {ns}, ys has {ys.shape[2]}, "
                f"zs has {zs.shape[2]}"
            )
        if zs.shape[1] != ys.shape[1]:
            raise ValueError(
                f"time counts disagree: ys has {ys.shape[1]}, zs has {zs.shape[1]}"
            )
        if xs is None:
            if zs.shape[0] != ys.shape[0]:
                raise ValueError(
                    "without left factors, zs must have the same state dimension as ys"
                )
        else:
            if xs.ndim != 3 or xs.shape[2] != ns:
                raise ValueError("xs must be (m, r, Ns)")
            if xs.shape[1] != ys.shape[0]:
                raise ValueError(
                    f"left factors act on dimension {xs.shape[1]}, states have {ys.shape[0]}"
                )
            if xs.shape[0] != zs.shape[0]:
                raise ValueError(
                    f"left factors produce dimension {xs.shape[0]}, zs has {zs.shape[0]}"
                )
        for name, arr in (("nus", nus), ("ys", ys), ("zs", zs), ("xs", xs)):
            if arr is not None and not np.all(np.isfinite(arr)):
                raise ValueError(f"non-finite entries in {name}")
        object.__setattr__(self, "nus", nus)
        object.__setattr__(self, "ys", ys)
        object.__setattr__(self, "zs", zs)
        object.__setattr__(self, "xs", xs)

    @property
    def r(self) -> int:
        return self.ys.shape[0]

    @property
    def p(self) -> int:
        return self.nus.shape[0]

    @property
    def n_samples(self) -> int:
        return self.nus.shape[1]

    @property
    def n_times(self) -> int:
        return self.ys.shape[1]

    def left_factors(self) -> np.ndarray:
        """The ``(m, r, Ns)`` left-factor stack, materializing identities."""
        if self.xs is not None:
            return self.xs
        eye = np.eye(self.r)
        return np.repeat(eye[:, :, None], self.n_samples, axis=2)


@dataclass(frozen=True)
class UniquenessReport:
    """Rank diagnostics for the unconstrained inference problem."""

    unique: bool
    feature_rank: int
    feature_required: int
    snapshot_rank: int
    snapshot_required: int

    def __str__(self) -> str:
        return (
            f"unique={self.unique} "
            f"(features {self.feature_rank}/{self.feature_required}, "
            f"snapshots {self.snapshot_rank}/{self.snapshot_required})"
        )


@dataclass(frozen=True)
class InferredTensor:
    """An inferred operator tensor with solver diagnostics.

    Attributes
    ----------
    tensor : ndarray, shape (r, r, p)
        The learned operator slices.
    method : str
        ``"normal"``, ``"lstsq"``, or ``"symmetric"``.
    structure : str
        ``"generic"``, ``"symmetric"``, or ``"skew"``.
    cond : float
        Condition estimate of the solved system (squared-data scale for
        the normal and symmetric routes; singular-value ratio for lstsq).
    residual : float
        Objective value ``L`` at the solution.
    stationarity : float
        Frobenius norm of the (structure-projected) objective gradient at
        the solution; near zero for an exact stationary point.
    rank_deficient : bool
        True when the least-squares route detected column-rank deficiency
        and returned the minimum-norm solution.
    """

    tensor: np.ndarray
    method: str
    structure: str
    cond: float
    residual: float
    stationarity: float
    rank_deficient: bool = False
    details: dict = field(default_factory=dict)


def uniqueness_check(data: InferenceData) -> UniquenessReport:
    """Rank test for uniqueness of the unconstrained minimizer.

    The fit has a unique solution exactly when the feature matrix
    (one row per sample) has full column rank ``p`` and the merged
    snapshot stack (time-sample rows by state columns) has full column
    rank ``r``.  Ranks are counted from singular values above
    ``UNIQUENESS_RANK_RTOL`` times the largest.
    """
    theta = data.nus.T  # (Ns, p)
    ymat = tensors.cvec(data.ys, 1, 2).T  # (Nt * Ns, r)

    def _rank(a: np.ndarray) -> int:
        sv = np.linalg.svd(a, compute_uv=False)
        if sv.size == 0 or sv[0] == 0.0:
            return 0
        return int(np.count_nonzero(sv > UNIQUENESS_RANK_RTOL * sv[0]))

    feature_rank = _rank(theta)
    snapshot_rank = _rank(ymat)
    return UniquenessReport(
        unique=(feature_rank == data.p and snapshot_rank == data.r),
        feature_rank=feature_rank,
        feature_required=data.p,
        snapshot_rank=snapshot_rank,
        snapshot_required=data.r,
    )


def assemble_normal_system(data: InferenceData) -> tuple[np.ndarray, np.ndarray]:
    """Dense normal-equations pair ``(B, C)`` for the unconstrained fit.

    ``B`` is ``(r*p, r*p)`` symmetric positive semidefinite and ``C`` is
    ``(r, r*p)``; the merged unknown ``cvec(T, 1, 2)`` solves
    ``cvec(T, 1, 2) @ B = C``.  Left factors are not supported here (the
    unconstrained routes fit the plain operator).
    """
    if data.xs is not None:
        raise ValueError("left factors are only supported by the symmetric solver")
    nus, ys, zs = data.nus, data.ys, data.zs
    gram = np.einsum("xs,ias,jas,ys->xijy", nus, ys, ys, nus)
    bhat = tensors.cvec(tensors.rvec(gram, 0, 1), 1, 2)
    cross = np.einsum("ias,jas,xs->ijx", zs, ys, nus)
    chat = tensors.cvec(cross, 1, 2)
    return bhat, chat


def assemble_lstsq_system(data: InferenceData) -> tuple[np.ndarray, np.ndarray]:
    """Tall least-squares pair ``(D, R)`` for the unconstrained fit.

    ``D`` is ``(Nt*Ns, r*p)`` and ``R`` is ``(r, Nt*Ns)``; row ``i`` of the
    merged unknown solves ``D @ row_i ~= R[i]``.  Satisfies
    ``D.T @ D == B`` from :func:`assemble_normal_system` exactly.
    """
    if data.xs is not None:
        raise ValueError("left factors are only supported by the symmetric solver")
    k = np.einsum("ias,xs->iaxs", data.ys, data.nus)
    d = tensors.cvec(tensors.cvec(k, 0, 2), 1, 2).T
    rstack = tensors.cvec(data.zs, 1, 2)
    return d, rstack


def _diagnostics(tensor: np.ndarray, data: InferenceData, structure: str) -> tuple[float, float]:
    resid = objective(tensor, data)
    grad = objective_gradient(tensor, data)
    if structure == "symmetric":
        grad = 0.5 * (grad + grad.transpose(1, 0, 2))
    elif structure == "skew":
        grad = 0.5 * (grad - grad.transpose(1, 0, 2))
    return resid, float(np.sqrt(np.sum(grad**2)))


def infer_normal(data: InferenceData) -> InferredTensor:
    """Unconstrained fit via the dense normal equations.

    Raises
    ------
    NonUniqueSolutionError
        If the rank conditions for a unique minimizer fail; the exception
        carries the :class:`UniquenessReport`.
    """
    report = uniqueness_check(data)
    if not report.unique:
        raise NonUniqueSolutionError(
            f"inference problem has no unique solution: {report}", report=report
        )
    bhat, chat = assemble_normal_system(data)
    sol, cond = solve_sym(bhat, chat.T)
    tensor = tensors.cmat(sol.T, 1, 2, (data.r, data.p))
    resid, stat = _diagnostics(tensor, data, "generic")
    return InferredTensor(
        tensor=tensor,
        method="normal",
        structure="generic",
        cond=cond,
        residual=resid,
        stationarity=stat,
    )


def infer_lstsq(data: InferenceData) -> InferredTensor:
    """Unconstrained fit via SVD least squares (minimum-norm on deficiency)."""
    d, rstack = assemble_lstsq_system(data)
    sol, rank, sv = lstsq_min_norm(d, rstack.T)
    tensor = tensors.cmat(sol.T, 1, 2, (data.r, data.p))
    rank_deficient = rank < d.shape[1]
    if sv.size and sv[-1] > 0.0 and not rank_deficient:
        cond = float(sv[0] / sv[-1])
    else:
        cond = float("inf")
    resid, stat = _diagnostics(tensor, data, "generic")
    return InferredTensor(
        tensor=tensor,
        method="lstsq",
        structure="generic",
        cond=cond,
        residual=resid,
        stationarity=stat,
        rank_deficient=rank_deficient,
        details={"rank": rank, "columns": d.shape[1]},
    )


def infer_symmetric(
    data: InferenceData,
    skew: bool = False,
    max_unknowns: int = SYMMETRIC_UNKNOWN_CAP,
) -> InferredTensor:
    """Structure-constrained fit: every slice of ``T`` is (skew-)symmetric.

    Solves the stationarity system of the constrained least squares

        minimize L(T)  subject to  T[:, :, x].T == sign * T[:, :, x],

    with ``sign = -1`` for ``skew=True`` and ``+1`` otherwise.  The system
    couples all entries of ``T`` through Kronecker products of the
    per-sample Grams, so its size is ``(r*r*p)^2``; a resource guard
    refuses problems with more than ``max_unknowns`` unknowns.  The output
    is symmetrized (or skew-symmetrized) exactly after the solve.
    """
    r, p = data.r, data.p
    unknowns = r * r * p
    if unknowns > max_unknowns:
        raise ResourceLimitError(
            f"symmetric inference needs {unknowns} unknowns "
            f"(dense system {unknowns}x{unknowns}); cap is {max_unknowns}"
        )
    sign = -1.0 if skew else 1.0
    xs = data.left_factors()
    ys, zs, nus = data.ys, data.zs, data.nus

    xtx = np.einsum("kis,kjs->ijs", xs, xs)
    yyt = np.einsum("iks,jks->ijs", ys, ys)
    nnt = np.einsum("xs,ys->xys", nus, nus)
    big = np.einsum("xys,ijs,kls->xyijkl", nnt, xtx, yyt)
    big = big + big.transpose(0, 1, 4, 5, 2, 3)  # Kronecker-sum symmetrization
    # rows group (x, i, k) and columns group (y, j, l), row-major within groups
    bhat = big.transpose(0, 2, 4, 1, 3, 5).reshape(unknowns, unknowns)

    cross = np.einsum("kis,kas,jas,xs->ijx", xs, zs, ys, nus)
    cross = cross + sign * cross.transpose(1, 0, 2)
    chat = cross.ravel(order="F")

    sol, cond = solve_sym(bhat, chat)
    tensor = sol.reshape((r, r, p), order="F")
    tensor = 0.5 * (tensor + sign * tensor.transpose(1, 0, 2))
    structure = "skew" if skew else "symmetric"
    resid, stat = _diagnostics(tensor, data, structure)
    return InferredTensor(
        tensor=tensor,
        method="symmetric",
        structure=structure,
        cond=cond,
        residual=resid,
        stationarity=stat,
    )


def _predictions(tensor: np.ndarray, data: InferenceData) -> np.ndarray:
    ops = np.einsum("ijx,xs->ijs", tensor, data.nus)
    if data.xs is None:
        return np.einsum("ijs,jas->ias", ops, data.ys)
    return np.einsum("mis,ijs,jas->mas", data.xs, ops, data.ys)


def objective(tensor: np.ndarray, data: InferenceData) -> float:
    """Objective value ``1/2 sum_s ||Z_s - X_s (T nu_s) Y_s||_F^2``."""
    tensor = np.asarray(tensor, dtype=float)
    if tensor.shape != (data.r, data.r, data.p):
        raise ValueError(
            f"tensor must have shape {(data.r, data.r, data.p)}, got {tensor.shape}"
        )
    diff = _predictions(tensor, data) - data.zs
    return 0.5 * float(np.sum(diff**2))


def objective_gradient(tensor: np.ndarray, data: InferenceData) -> np.ndarray:
    """Gradient of :func:`objective` with respect to the tensor entries.

    Equals ``sum_s X_s^T [X_s (T nu_s) Y_s - Z_s] Y_s^T (x) nu_s`` where
    ``(x)`` appends the feature axis.
    """
    tensor = np.asarray(tensor, dtype=float)
    if tensor.shape != (data.r, data.r, data.p):
        raise ValueError(
            f"tensor must have shape {(data.r, data.r, data.p)}, got {tensor.shape}"
        )
    diff = _predictions(tensor, data) - data.zs
    if data.xs is None:
        return np.einsum("ias,jas,xs->ijx", diff, data.ys, data.nus)
    return np.einsum("mis,mas,jas,xs->ijx", data.xs, diff, data.ys, data.nus)
