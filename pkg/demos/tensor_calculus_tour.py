"""A guided tour of the tensor calculus behind parametric operator inference.

The library learns a constant order-3 tensor T (r x r x p) such that the
matrix T nu, obtained by contracting the last axis against a feature
vector nu, acts as the system operator for every parameter.  Fitting T by
least squares is only practical because a handful of identities turn
tensor expressions into ordinary matrix algebra; this script walks
through each of them numerically and then assembles the normal equations
of a tiny inference problem twice -- once by hand with Kronecker
products, once with the library -- and checks that both give the same
fitted tensor.

Run:  python3 demos/tensor_calculus_tour.py
"""

import numpy as np

from topinf import (
    InferenceData,
    assemble_normal_system,
    cvec,
    double_contract,
    frobenius,
    infer_normal,
    mode3_product,
    outer,
    rvec,
    swap_axes,
)

rng = np.random.default_rng(42)


def show(title, value):
    print(f"  {title:<58s} {value:.3e}")


def rel(a, b):
    return np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300)


print("1. Partial vectorization: merging two tensor axes into one")
print("-" * 70)
t = rng.standard_normal((2, 3, 4))
print(f"  cvec merges axes of a {t.shape} tensor column-wise (first index")
print(f"  fastest): cvec(t, 1, 2) has shape {cvec(t, 1, 2).shape};")
print(f"  rvec merges row-wise (second index fastest): shape {rvec(t, 1, 2).shape}.")
a = rng.standard_normal((3, 5))
show("cvec of a matrix == Fortran-order ravel, max diff", rel(cvec(a, 0, 1), a.ravel(order="F")))
show("rvec of a matrix == C-order ravel, max diff", rel(rvec(a, 0, 1), a.ravel(order="C")))
show(
    "swapping the axes exchanges the two merges, max diff",
    rel(rvec(swap_axes(t, 0, 2), 0, 2), cvec(t, 0, 2)),
)
u, v = rng.standard_normal(3), rng.standard_normal(4)
show(
    "cvec of a rank-one outer product == Kronecker product",
    rel(cvec(outer(u, v), 0, 1), np.kron(v, u)),
)
print()

print("2. Adjunction identities for the trace inner product")
print("-" * 70)
m, n, k, p = 4, 3, 5, 2
a = rng.standard_normal((m, n))
b = rng.standard_normal((n, k))
c = rng.standard_normal((m, k))
show("<AB, C> == <A, C B^T>  (move a factor across)", rel(frobenius(a @ b, c), frobenius(a, c @ b.T)))
t = rng.standard_normal((m, n, p))
nu = rng.standard_normal(p)
w = rng.standard_normal((m, n))
show(
    "<T nu, W> == <T, W (x) nu>  (features move outside)",
    rel(frobenius(mode3_product(t, nu), w), frobenius(t, outer(w, nu))),
)
print("  These two lines are the whole derivation of the least-squares")
print("  gradient: differentiating  1/2 || (T nu) Y - Z ||^2  in T and")
print("  moving factors across the inner product leaves a linear system")
print("  in T alone.")
print()

print("3. The stationarity condition as a double contraction")
print("-" * 70)
bmat = rng.standard_normal((n, k))
lhs = outer(mode3_product(t, nu) @ bmat, nu)
rhs = double_contract(t, outer(nu, outer(bmat, nu)))
show("(T nu) B (x) nu == T : (nu (x) B (x) nu)", rel(lhs, rhs))
x = rng.standard_normal((p, n, 6, p))
lhs = cvec(double_contract(t, x), 1, 2)
rhs = cvec(t, 1, 2) @ rvec(cvec(x, 2, 3), 0, 1)
show("vectorized double contraction == matrix product", rel(lhs, rhs))
print("  Chaining the two: the optimality condition for T is a single")
print("  matrix equation for the partial vectorization cvec(T, 1, 2).")
print()

print("4. Iterated vectorization produces Kronecker products")
print("-" * 70)
show(
    "kron(A, B) == rvec(rvec(A (x) B, 1, 3), 0, 2)",
    rel(np.kron(a, bmat), rvec(rvec(outer(a, bmat), 1, 3), 0, 2)),
)
print()

print("5. Normal equations, by hand and by library")
print("-" * 70)
r, p, nt, ns = 3, 2, 6, 5
nus = rng.standard_normal((p, ns))
ys = rng.standard_normal((r, nt, ns))
truth = rng.standard_normal((r, r, p))
zs = np.stack(
    [mode3_product(truth, nus[:, s]) @ ys[:, :, s] for s in range(ns)], axis=2
)
zs += 0.05 * rng.standard_normal(zs.shape)
data = InferenceData(nus=nus, ys=ys, zs=zs)

# by hand: stack Kronecker blocks sample by sample
b_hand = sum(
    np.kron(np.outer(nus[:, s], nus[:, s]), ys[:, :, s] @ ys[:, :, s].T)
    for s in range(ns)
)
c_hand = sum(
    np.kron(nus[:, s][None, :], zs[:, :, s] @ ys[:, :, s].T) for s in range(ns)
)
merged = np.linalg.solve(b_hand, c_hand.T).T
t_hand = np.stack([merged[:, x * r : (x + 1) * r] for x in range(p)], axis=2)

# by library: assembled without ever forming a Kronecker product
b_lib, c_lib = assemble_normal_system(data)
result = infer_normal(data)

show("normal matrix, hand Kronecker sum vs library", rel(b_lib, b_hand))
show("right-hand side, hand vs library", rel(c_lib, c_hand))
show("fitted tensor, hand solve vs infer_normal", rel(result.tensor, t_hand))
show("fitted tensor vs planted truth (noise floor)", rel(result.tensor, truth))
print()
print(f"  conditioning of the normal system: {result.cond:.2e}")
print(f"  residual at the optimum:           {result.residual:.3e}")
print()
print("Every identity above also runs as a randomized property test in")
print("tests/test_tensors.py; this script only narrates them.")
