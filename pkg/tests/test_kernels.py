import numpy as np
import pytest

from dwrflow import _kernels_py, euler
from dwrflow.assembly import assemble_jacobian
from dwrflow.gmg import _diag_blocks
from dwrflow.leafmesh import CellField, LeafMesh
from dwrflow.meshgen import builtin_channel_bump

try:
    from dwrflow import _kernels
    HAVE_COMPILED = True
except ImportError:
    HAVE_COMPILED = False

FS = euler.FreestreamSpec(mach=0.5, attack_angle=0.1, p_inf=1.0, rho_inf=1.4)


def make_system(k_rhs=2, seed=3):
    rng = np.random.default_rng(seed)
    mesh = LeafMesh(builtin_channel_bump(8, 5, 0.05))
    u = CellField(mesh, FS.state() * (1 + 0.05 * rng.uniform(-1, 1, (mesh.n_cells, 4))))
    A = assemble_jacobian(mesh, u, FS, alpha=1.0).matrix
    A.sort_indices()
    dinv = np.linalg.inv(_diag_blocks(A))
    b = rng.normal(size=(mesh.n_cells, 4, k_rhs))
    x0 = rng.normal(size=(mesh.n_cells, 4, k_rhs))
    return A, dinv, b, x0


@pytest.mark.skipif(not HAVE_COMPILED, reason="compiled kernels not built")
class TestBackendEquivalence:
    @pytest.mark.parametrize("reverse", [False, True])
    @pytest.mark.parametrize("k_rhs", [1, 3])
    def test_sweep_matches_python(self, reverse, k_rhs):
        A, dinv, b, x0 = make_system(k_rhs=k_rhs)
        xc = np.ascontiguousarray(x0.copy())
        xp = np.ascontiguousarray(x0.copy())
        for _ in range(3):
            _kernels.bgs_sweep(A.indptr, A.indices, A.data, dinv, xc, b, reverse)
            _kernels_py.bgs_sweep(A.indptr, A.indices, A.data, dinv, xp, b, reverse)
        scale = np.abs(xp).max()
        assert np.abs(xc - xp).max() < 1e-12 * scale

    def test_sweep_reduces_residual(self):
        A, dinv, b, x0 = make_system(k_rhs=1)
        x = np.zeros_like(x0)
        n = x.shape[0]
        r0 = np.linalg.norm(b.reshape(4 * n) - A @ x.reshape(4 * n))
        for _ in range(5):
            _kernels.bgs_sweep(A.indptr, A.indices, A.data, dinv, x, b, False)
        r1 = np.linalg.norm(b.reshape(4 * n) - A @ x.reshape(4 * n))
        assert r1 < 0.5 * r0


def test_python_fallback_selected_by_env(tmp_path):
    import subprocess
    import sys
    code = ("import dwrflow.kernels as k; print(k.BACKEND)")
    env_on = {"DWRFLOW_PURE_PYTHON": "1"}
    import os
    env = os.environ.copy()
    env.update(env_on)
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True)
    assert out.stdout.strip() == "python"
