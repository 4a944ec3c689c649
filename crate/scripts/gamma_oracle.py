"""Independent high-level model of the amplitude-bound LMIs.

Builds the filter, augmented plant, supply matrix, terminal cost and
hyperdominance constraints directly with cvxpy expressions and solves with
an off-the-shelf conic solver. Used once to pin regression baselines for the
Rust pipeline; it shares no code with the crate.

usage: python3 scripts/gamma_oracle.py L nu nutilde {terminal|hard} [solver]
"""
import sys

import cvxpy as cp
import numpy as np

A = np.array([
    [0.1, 1, 0, 0, 0],
    [-0.24, 0.1, -0.54, -0.35, 0.84],
    [0, 0, 0.54, -0.24, 0.59],
    [0, 0, 0, 0.54, 1],
    [0, 0, 0, -0.56, 0.54],
])
B = np.array([[0], [0], [0], [0], [1.04]])
C = np.array([[-0.08, -0.17, 0.13, 0.09, -0.21]])
CE = np.array([[2, 1.3, -1, -1.3, 1.3]])
EPS = 1e-8


def jordan(nu):
    a = np.zeros((nu, nu))
    for i in range(nu - 1):
        a[i, i + 1] = 1.0
    b = np.zeros((nu, 1))
    if nu > 0:
        b[nu - 1, 0] = 1.0
    return a, b


def gamma_star(L, nu, nut, mode, solver="CLARABEL"):
    n = 5
    D = np.array([[-1.0 / L]])
    an, bn = jordan(nu)
    at, bt = jordan(nut)
    npsi = nu + nut
    apsi = np.zeros((npsi, npsi))
    apsi[:nu, :nu] = an
    apsi[nu:, nu:] = at
    bpsi = np.zeros((npsi, 2))
    bpsi[:nu, 0:1] = bn
    bpsi[nu:, 1:2] = bt
    cpsi = np.vstack([np.eye(npsi), np.zeros((2, npsi))])
    dpsi = np.vstack([np.zeros((npsi, 2)), np.eye(2)])
    c0 = np.vstack([C, np.zeros((1, n))])
    d1 = np.vstack([D, np.ones((1, 1))])
    acal = np.block([[apsi, bpsi @ c0], [np.zeros((n, npsi)), A]])
    bcal = np.vstack([bpsi @ d1, B])
    ccal = np.hstack([cpsi, dpsi @ c0])
    dcal = dpsi @ d1
    neta = npsi + n

    lam = cp.Variable(nu + 1)
    lamt = cp.Variable(nut + 1)
    X = cp.Variable((neta, neta), symmetric=True)
    H = cp.Variable((1, 1), symmetric=True)
    gamma = cp.Variable()
    if mode == "terminal" and nu > 0 and nut > 0:
        E = cp.Variable((nut, nu))
    else:
        E = np.zeros((nut, nu))

    # psi_k has transfer 1 - z^-k: output row -e_{nu-k+1}
    def crow(k, m):
        row = np.zeros((1, m))
        row[0, m - k] = -1.0
        return row

    dim_v = npsi + 2
    iz, iw = npsi, npsi + 1

    def sym_unit(i, j):
        u = np.zeros((dim_v, dim_v))
        u[i, j] += 1.0
        u[j, i] += 1.0
        return u

    Pm = (cp.sum(lam) + cp.sum(lamt)) * sym_unit(iz, iw)
    for k in range(1, nu + 1):
        Pm = Pm - lam[k] * sym_unit(iw, nu - k)
    for k in range(1, nut + 1):
        Pm = Pm - lamt[k] * sym_unit(iz, nu + nut - k)

    lhs_a = np.vstack([np.hstack([acal, bcal]), np.hstack([np.eye(neta), np.zeros((neta, 1))])])
    outer = np.hstack([ccal, dcal])
    zero = np.zeros((neta, neta))
    mid = cp.bmat([[X, zero], [zero, -X]])
    lmi1 = lhs_a.T @ mid @ lhs_a + outer.T @ Pm @ outer
    lmi1 = (lmi1 + lmi1.T) / 2

    xpsi = X[:npsi, :npsi]
    W = X[:npsi, npsi:]
    Xp = X[npsi:, npsi:]
    if npsi > 0:
        if isinstance(E, np.ndarray):
            Z = np.zeros((npsi, npsi))
        else:
            Z = cp.bmat([[np.zeros((nu, nu)), E.T], [E, np.zeros((nut, nut))]])
        coup = cp.bmat([
            [H, np.zeros((1, npsi)), CE],
            [np.zeros((npsi, 1)), xpsi + Z, W],
            [CE.T, W.T, Xp],
        ])
    else:
        coup = cp.bmat([[H, CE], [CE.T, Xp]])
    coup = (coup + coup.T) / 2

    # hyperdominance of M_T0
    T0 = nu + nut + 1

    def lifted_tap(k, m, T):
        # lifted Toeplitz of the scalar filter psi_{k,m} from its realization
        a, b = jordan(m)
        c = crow(k, m) if k > 0 else np.zeros((1, m))
        D_T = np.zeros((T, T))
        for i in range(T):
            D_T[i, i] = 1.0
            for j in range(i):
                D_T[i, j] = (c @ np.linalg.matrix_power(a, i - j - 1) @ b)[0, 0]
        return D_T

    def lifted_b(m, T):
        a, b = jordan(m)
        Bt = np.zeros((m, T))
        for j in range(T):
            Bt[:, j:j + 1] = np.linalg.matrix_power(a, T - 1 - j) @ b
        return Bt

    M = 0
    for k in range(nu + 1):
        M = M + lam[k] * lifted_tap(k, nu, T0)
    for k in range(nut + 1):
        M = M + lamt[k] * lifted_tap(k, nut, T0).T
    if not isinstance(E, np.ndarray):
        Bl = lifted_b(nu, T0)
        Bt = lifted_b(nut, T0)
        M = M - Bt.T @ E @ Bl
    cons = [lmi1 << -EPS * np.eye(neta + 1), coup >> EPS * np.eye(coup.shape[0]),
            H << (gamma - EPS) * np.eye(1), Xp << gamma * np.eye(n) - EPS * np.eye(n)]
    for i in range(T0):
        for j in range(T0):
            if i != j:
                cons.append(M[i, j] <= 0)
        cons.append(cp.sum(M[i, :]) >= 0)
        cons.append(cp.sum(M[:, i]) >= 0)
    prob = cp.Problem(cp.Minimize(gamma), cons)
    kwargs = {}
    if solver == "CLARABEL":
        kwargs = dict(tol_gap_abs=1e-10, tol_gap_rel=1e-10, tol_feas=1e-10, max_iter=500)
    prob.solve(solver=solver, **kwargs)
    return prob.status, gamma.value


if __name__ == "__main__":
    L = float(sys.argv[1])
    nu = int(sys.argv[2])
    nut = int(sys.argv[3])
    mode = sys.argv[4]
    solver = sys.argv[5] if len(sys.argv) > 5 else "CLARABEL"
    status, g = gamma_star(L, nu, nut, mode, solver)
    print(f"{L} {nu} {nut} {mode} {status} {g!r}")
