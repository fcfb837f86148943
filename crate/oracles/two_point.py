"""Brute-force numpy oracle for the two-point desk values.

Recomputes, independently of the Rust code:
  * dim of the represented one-forms, two-forms and junk for the two-point triple
  * the curvature of the Grassmann connection on p = diag(b2, 1 - b2)
  * the C^1 / C^2 norms of b2
  * the n = 3 junk example (diagonal algebra, generic odd D)

Run: python3 oracles/two_point.py
"""
import itertools

import numpy as np
from scipy.linalg import null_space

TOL = 1e-9


def comm(a, b):
    return a @ b - b @ a


def rank_of(mats):
    if not mats:
        return 0
    v = np.array([m.reshape(-1) for m in mats]).T
    s = np.linalg.svd(v, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > TOL * s[0]))


def forms_dims(basis, d_op):
    d = len(basis)
    one = [bk @ comm(d_op, bj) for bk in basis for bj in basis]
    two = [bk @ comm(d_op, bi) @ comm(d_op, bj) for bk in basis for bi in basis for bj in basis]
    # kernel of c -> (sum c b_i b_j, sum c b_i [D, b_j])
    cols = []
    for i, j in itertools.product(range(d), range(d)):
        col = np.concatenate([(basis[i] @ basis[j]).reshape(-1),
                              (basis[i] @ comm(d_op, basis[j])).reshape(-1)])
        cols.append(col)
    lmat = np.array(cols).T
    ker = null_space(lmat, rcond=TOL)
    d2 = d_op @ d_op
    junk = []
    for k in range(ker.shape[1]):
        c = ker[:, k].reshape(d, d)
        junk.append(sum(c[i, j] * basis[i] @ comm(d2, basis[j])
                        for i in range(d) for j in range(d)))
    return rank_of(one), rank_of(two), rank_of(junk)


def two_point():
    b1 = np.eye(2, dtype=complex)
    b2 = np.diag([1.0, 0.0]).astype(complex)
    d_op = np.array([[0, 1], [1, 0]], dtype=complex)
    print("two-point dims (one, two, junk):", forms_dims([b1, b2], d_op))

    pi1 = np.block([[b2, np.zeros((2, 2))], [comm(d_op, b2), b2]])
    print("c1_norm(b2) =", repr(np.linalg.norm(pi1, 2)))
    res = np.linalg.inv(d_op + 1j * np.eye(2))
    d2 = d_op @ d_op

    def pi2(a):
        return np.block([[(d_op + 1j * np.eye(2)) @ a @ res, np.zeros((2, 2))],
                         [comm(d2, a) @ res, a]])
    c2 = max(np.linalg.norm(pi1, 2), np.linalg.norm(pi2(b2), 2),
             np.linalg.norm(pi2(b2.conj().T), 2))
    print("c2_norm(b2) =", repr(c2))

    # projective module p = diag(b2, 1 - b2), Gamma = diag(1, -1)
    gam = np.diag([1.0, -1.0])
    p = np.zeros((4, 4), dtype=complex)
    p[0:2, 0:2] = b2
    p[2:4, 2:4] = np.eye(2) - b2
    dt = np.kron(gam, d_op)
    m = p @ dt @ p
    n = p @ np.kron(np.eye(2), d2) @ p
    r = m @ m - n
    print("R diag =", np.real(np.diag(r)), "offdiag max =",
          np.abs(r - np.diag(np.diag(r))).max())
    print("||R|| =", np.linalg.norm(r, 2))
    formula = p @ comm(dt, p) @ comm(dt, p) @ p
    print("formula route residual =", np.linalg.norm(r - formula))


def three_point_junk():
    gam = np.diag([1.0, 1.0, -1.0])
    basis = [np.eye(3, dtype=complex),
             np.diag([1.0, 0.0, 0.0]).astype(complex),
             np.diag([0.0, 1.0, 0.0]).astype(complex)]
    # generic odd self-adjoint D for gamma = diag(1,1,-1): only (0,2),(1,2) blocks
    d_op = np.zeros((3, 3), dtype=complex)
    d_op[0, 2] = 0.7 + 0.2j
    d_op[1, 2] = -0.4 + 0.9j
    d_op = d_op + d_op.conj().T
    assert np.allclose(gam @ d_op @ gam, -d_op)
    print("three-point dims (one, two, junk):", forms_dims(basis, d_op))


if __name__ == "__main__":
    two_point()
    three_point_junk()
