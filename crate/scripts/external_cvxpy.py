"""External conic backend for `iqc --solver external`.

Reads a problem in the crate's text format on stdin (followed by a
`tol <gap> <feas> <max_iter>` line), solves it with cvxpy, and prints

    status optimal|infeasible|unbounded|numerical-limit
    iterations <k>
    x ...
    y ...
    z ...

usage (config): command = ["python3", "scripts/external_cvxpy.py", "CLARABEL"]
"""
import sys

import cvxpy as cp
import numpy as np


def parse(text):
    n = m = p = 0
    linear, psd = 0, []
    c = g = h = a = b = None
    tol = (1e-8, 1e-8, 200)
    for raw in text.splitlines():
        t = raw.split("#")[0].split()
        if not t:
            continue
        k = t[0]
        if k == "conic":
            n, m, p = map(int, t[1:4])
            c, h, b = np.zeros(n), np.zeros(m), np.zeros(p)
            g, a = np.zeros((m, n)), np.zeros((p, n))
        elif k == "cones":
            linear, psd = int(t[1]), [int(v) for v in t[2:]]
        elif k in ("c", "h", "b"):
            {"c": c, "h": h, "b": b}[k][int(t[1])] = float(t[2])
        elif k in ("g", "a"):
            {"g": g, "a": a}[k][int(t[1]), int(t[2])] = float(t[3])
        elif k == "tol":
            tol = (float(t[1]), float(t[2]), int(t[3]))
    return c, g, h, a, b, linear, psd, tol


def svec_index(k):
    """(i, j, scale) per svec entry: column-major lower triangle, sqrt(2) off the diagonal."""
    out = []
    for j in range(k):
        for i in range(j, k):
            out.append((i, j, 1.0 if i == j else np.sqrt(2.0)))
    return out


def main():
    c, g, h, a, b, linear, psd, tol = parse(sys.stdin.read())
    solver = sys.argv[1] if len(sys.argv) > 1 else "CLARABEL"
    n = c.size
    x = cp.Variable(n)
    cons, blocks = [], []
    if linear:
        lin = h[:linear] - g[:linear] @ x >= 0
        cons.append(lin)
    row = linear
    for k in psd:
        idx = svec_index(k)
        s = cp.Variable((k, k), symmetric=True)
        rows = slice(row, row + len(idx))
        sv = cp.hstack([s[i, j] * sc for i, j, sc in idx])
        eq = sv == h[rows] - g[rows] @ x
        cons += [eq, s >> 0]
        blocks.append(eq)
        row += len(idx)
    eqs = None
    if b.size:
        eqs = a @ x == b
        cons.append(eqs)
    prob = cp.Problem(cp.Minimize(c @ x), cons)
    try:
        prob.solve(solver=solver)
    except cp.error.SolverError as e:
        print(f"status numerical-limit\niterations 0\n# {e}")
        return
    st = prob.status
    status = {
        cp.OPTIMAL: "optimal",
        cp.INFEASIBLE: "infeasible",
        cp.UNBOUNDED: "unbounded",
    }.get(st, "numerical-limit")
    iters = prob.solver_stats.num_iters or 0
    print(f"status {status}")
    print(f"iterations {iters}")
    if status != "optimal":
        return
    z = np.zeros(h.size)
    if linear:
        z[:linear] = cons[0].dual_value
    row = linear
    for k, eq in zip(psd, blocks):
        m = k * (k + 1) // 2
        z[row:row + m] = np.asarray(eq.dual_value).ravel()
        row += m
    y = np.asarray(eqs.dual_value).ravel() if eqs is not None else np.zeros(0)
    fmt = lambda v: " ".join(repr(float(t)) for t in v)
    print("x " + fmt(x.value))
    print("y " + fmt(y))
    print("z " + fmt(z))


if __name__ == "__main__":
    main()
