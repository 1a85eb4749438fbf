"""Benchmark: compiled vs pure-Python block Gauss-Seidel sweep, plus a
full multigrid solve with each backend.

Run:  python3 benchmarks/bench_kernels.py [--cells-exponent 2]
"""

import argparse
import time

import numpy as np

from dwrflow import _kernels_py, euler
from dwrflow.assembly import assemble_jacobian
from dwrflow.gmg import GmgHierarchy, _diag_blocks, gmg_solve
from dwrflow.leafmesh import CellField, LeafMesh
from dwrflow.meshgen import builtin_channel_bump

try:
    from dwrflow import _kernels
except ImportError:
    _kernels = None

FS = euler.FreestreamSpec(mach=0.5, attack_angle=0.02, p_inf=1.0, rho_inf=1.4)


def setup(refine):
    rng = np.random.default_rng(0)
    tree = builtin_channel_bump(8, 4, 0.05).uniform_refine(refine)
    mesh = LeafMesh(tree)
    u = CellField(mesh, FS.state() * (1 + 0.03 * rng.uniform(-1, 1, (mesh.n_cells, 4))))
    J = assemble_jacobian(mesh, u, FS, alpha=1.0)
    A = J.matrix
    A.sort_indices()
    dinv = np.linalg.inv(_diag_blocks(A))
    b = rng.normal(size=(mesh.n_cells, 4, 1))
    return mesh, J, A, dinv, b


def time_sweeps(impl, A, dinv, b, repeats):
    x = np.zeros_like(b)
    t0 = time.perf_counter()
    for _ in range(repeats):
        impl.bgs_sweep(A.indptr, A.indices, A.data, dinv, x, b, False)
    return time.perf_counter() - t0


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cells-exponent", type=int, default=2,
                    help="uniform refinements of the 64-cell base mesh")
    ap.add_argument("--sweeps", type=int, default=50)
    args = ap.parse_args()

    mesh, J, A, dinv, b = setup(args.cells_exponent)
    print(f"mesh: {mesh.n_cells} cells, {A.nnz} nonzeros")

    rows = []
    t_py = time_sweeps(_kernels_py, A, dinv, b, args.sweeps)
    rows.append(("python", t_py))
    if _kernels is not None:
        t_cy = time_sweeps(_kernels, A, dinv, b, args.sweeps)
        rows.append(("compiled", t_cy))

    print(f"\n{args.sweeps} block-GS sweeps:")
    for name, t in rows:
        print(f"  {name:9s} {t * 1e3:9.2f} ms  ({t / args.sweeps * 1e6:8.1f} us/sweep)")
    if _kernels is not None:
        print(f"  speedup   {t_py / t_cy:9.1f}x")

    # whole-solver comparison via the backend selection hook
    import importlib

    import dwrflow.gmg as gmgmod
    import dwrflow.kernels as kmod

    h = GmgHierarchy(mesh)
    rhs = b.reshape(-1, 1)

    def run():
        t0 = time.perf_counter()
        gmg_solve(J, rhs, h, tol=1e-8)
        return time.perf_counter() - t0

    print("\nfull gmg_solve:")
    for backend in ("python", "compiled") if _kernels is not None else ("python",):
        import os
        if backend == "python":
            os.environ["DWRFLOW_PURE_PYTHON"] = "1"
        else:
            os.environ.pop("DWRFLOW_PURE_PYTHON", None)
        importlib.reload(kmod)
        gmgmod.bgs_sweep = kmod.bgs_sweep
        print(f"  {backend:9s} {run() * 1e3:9.2f} ms")
    importlib.reload(kmod)
    gmgmod.bgs_sweep = kmod.bgs_sweep


if __name__ == "__main__":
    main()
