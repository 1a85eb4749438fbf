import numpy as np
import pytest

from dwrflow import euler
from dwrflow.errors import NonphysicalState

from conftest import random_normals, random_states


def fd_flux_jacobians(uL, uR, n, gamma=1.4):
    """Central finite differences of the LF flux with the dissipation
    coefficient frozen at the base states (the Jacobian's convention)."""
    lam0 = euler.dissipation_speed(uL, uR, n, gamma)
    JL = np.empty((4, 4))
    JR = np.empty((4, 4))
    for k in range(4):
        e = np.zeros(4)
        e[k] = 1e-7 * (1.0 + abs(uL[k]))
        JL[:, k] = (euler.lax_friedrichs_flux(uL + e, uR, n, gamma, lam=lam0)
                    - euler.lax_friedrichs_flux(uL - e, uR, n, gamma, lam=lam0)) / (2 * e[k])
        e[k] = 1e-7 * (1.0 + abs(uR[k]))
        JR[:, k] = (euler.lax_friedrichs_flux(uL, uR + e, n, gamma, lam=lam0)
                    - euler.lax_friedrichs_flux(uL, uR - e, n, gamma, lam=lam0)) / (2 * e[k])
    return JL, JR


class TestPressure:
    def test_hand_values(self):
        assert euler.pressure(np.array([1.0, 0.0, 0.0, 2.5])) == pytest.approx(1.0)
        assert euler.pressure(np.array([1.0, 1.0, 0.0, 2.5])) == pytest.approx(0.8)
        assert euler.pressure(np.array([1.0, 0.0, 0.0, 0.1])) == pytest.approx(0.04)

    def test_nonphysical(self):
        with pytest.raises(NonphysicalState):
            euler.pressure(np.array([1.0, 3.0, 0.0, 2.5]))  # E - KE < 0
        with pytest.raises(NonphysicalState):
            euler.pressure(np.array([-1.0, 0.0, 0.0, 2.5]))

    def test_batch_reports_cell(self):
        u = random_states(np.random.default_rng(0), 5)
        u[3, 3] = 0.0
        with pytest.raises(NonphysicalState) as exc:
            euler.pressure(u)
        assert exc.value.cell == 3


class TestPhysicalFlux:
    def test_stagnant(self):
        F = euler.physical_flux(np.array([1.0, 0.0, 0.0, 2.5]))
        assert np.allclose(F, [[0, 0], [1, 0], [0, 1], [0, 0]])

    def test_hand_value(self):
        # p = 0.8; the y-flux of y-momentum carries the pressure term
        F = euler.physical_flux(np.array([1.0, 1.0, 0.0, 2.5]))
        assert np.allclose(F, [[1, 0], [1.8, 0], [0, 0.8], [3.3, 0]])

    def test_normal_contraction_is_linear(self, rng):
        u = random_states(rng, 30)
        n = random_normals(rng, 30)
        F = euler.physical_flux(u)
        assert np.allclose(np.einsum("cij,cj->ci", F, n), euler.normal_flux(u, n))
        assert np.allclose(euler.normal_flux(u, -n), -euler.normal_flux(u, n))

    def test_rotational_covariance(self, rng):
        # rotating velocity and normal together rotates the momentum flux
        u = random_states(rng, 50)
        n = random_normals(rng, 50)
        th = rng.uniform(0, 2 * np.pi, 50)
        ct, st = np.cos(th), np.sin(th)
        ur = u.copy()
        ur[:, 1] = ct * u[:, 1] - st * u[:, 2]
        ur[:, 2] = st * u[:, 1] + ct * u[:, 2]
        nr = np.column_stack([ct * n[:, 0] - st * n[:, 1], st * n[:, 0] + ct * n[:, 1]])
        H = euler.normal_flux(u, n)
        Hr = euler.normal_flux(ur, nr)
        assert np.allclose(Hr[:, 0], H[:, 0], atol=1e-12)
        assert np.allclose(Hr[:, 3], H[:, 3], atol=1e-12)
        assert np.allclose(Hr[:, 1], ct * H[:, 1] - st * H[:, 2], atol=1e-12)
        assert np.allclose(Hr[:, 2], st * H[:, 1] + ct * H[:, 2], atol=1e-12)


class TestWaveSpeed:
    def test_hand_values(self):
        s = euler.max_wave_speed(np.array([1.0, 0.0, 0.0, 2.5]), np.array([1.0, 0.0]))
        assert s == pytest.approx(np.sqrt(1.4), rel=1e-12)
        s = euler.max_wave_speed(np.array([1.0, 1.0, 0.0, 2.5]), np.array([0.0, 1.0]))
        assert s == pytest.approx(np.sqrt(1.4 * 0.8), rel=1e-12)

    def test_isotropy_at_rest(self, rng):
        u = np.array([1.0, 0.0, 0.0, 2.5])
        for n in random_normals(rng, 10):
            assert euler.max_wave_speed(u, n) == pytest.approx(np.sqrt(1.4), rel=1e-14)


class TestLaxFriedrichs:
    def test_consistency_stagnant(self):
        u = np.array([1.0, 0.0, 0.0, 2.5])
        H = euler.lax_friedrichs_flux(u, u, np.array([1.0, 0.0]))
        assert np.allclose(H, [0, 1, 0, 0], atol=1e-15)

    def test_consistency_random(self, rng):
        u = random_states(rng, 10_000)
        n = random_normals(rng, 10_000)
        H = euler.lax_friedrichs_flux(u, u, n)
        F = euler.normal_flux(u, n)
        scale = 1.0 + np.abs(F).max()
        assert np.abs(H - F).max() < 1e-14 * scale

    def test_antisymmetry(self, rng):
        uL = random_states(rng, 200)
        uR = random_states(rng, 200)
        n = random_normals(rng, 200)
        H1 = euler.lax_friedrichs_flux(uL, uR, n)
        H2 = euler.lax_friedrichs_flux(uR, uL, -n)
        assert np.abs(H1 + H2).max() < 1e-13

    def test_hand_value(self):
        uL = np.array([1.0, 0.0, 0.0, 2.5])
        uR = np.array([1.0, 1.0, 0.0, 2.5])
        H = euler.lax_friedrichs_flux(uL, uR, np.array([1.0, 0.0]))
        # lam = max(|vnL|,|vnR|) + max(cL,cR) = 1 + sqrt(1.4)
        lam = 1.0 + np.sqrt(1.4)
        assert np.allclose(H, [0.5, 1.4 - lam / 2, 0.0, 1.65], rtol=1e-12)
        assert H[1] == pytest.approx(0.308392, abs=1e-6)


class TestFluxJacobians:
    def test_vs_finite_differences(self, rng):
        uL = random_states(rng, 100)
        uR = random_states(rng, 100)
        n = random_normals(rng, 100)
        for i in range(100):
            JL, JR = euler.flux_jacobians(uL[i], uR[i], n[i])
            FL, FR = fd_flux_jacobians(uL[i], uR[i], n[i])
            scale = np.linalg.norm(FL) + np.linalg.norm(FR)
            assert np.linalg.norm(JL - FL) / scale < 1e-6
            assert np.linalg.norm(JR - FR) / scale < 1e-6

    def test_dissipation_split_at_rest(self):
        u = np.array([1.0, 0.0, 0.0, 2.5])
        n = np.array([0.6, 0.8])
        JL, JR = euler.flux_jacobians(u, u, n)
        lam = euler.dissipation_speed(u, u, n)
        assert np.allclose(JL - JR, lam * np.eye(4), atol=1e-14)

    def test_central_term_sum(self, rng):
        # JL + JR equals the Jacobian of the central average alone
        uL = random_states(rng, 20)
        uR = random_states(rng, 20)
        n = random_normals(rng, 20)
        for i in range(20):
            JL, JR = euler.flux_jacobians(uL[i], uR[i], n[i])
            central = np.zeros((4, 4))
            for k in range(4):
                e = np.zeros(4)
                e[k] = 1e-7 * (1.0 + abs(uL[i][k]))
                dp = 0.5 * (euler.normal_flux(uL[i] + e, n[i]) - euler.normal_flux(uL[i] - e, n[i]))
                central[:, k] = dp / (2 * e[k])
                e[k] = 1e-7 * (1.0 + abs(uR[i][k]))
                dq = 0.5 * (euler.normal_flux(uR[i] + e, n[i]) - euler.normal_flux(uR[i] - e, n[i]))
                central[:, k] += dq / (2 * e[k])
            assert np.linalg.norm(JL + JR - central) / (1 + np.linalg.norm(central)) < 1e-6


class TestWallGhost:
    def test_tangential_fixed_point(self):
        u = np.array([1.0, 0.0, 0.7, 2.9])
        assert np.allclose(euler.wall_ghost(u, np.array([1.0, 0.0])), u)

    def test_normal_negation(self):
        g = euler.wall_ghost(np.array([1.0, 1.0, 0.0, 2.5]), np.array([1.0, 0.0]))
        assert np.allclose(g, [1.0, -1.0, 0.0, 2.5])

    def test_involution(self, rng):
        u = random_states(rng, 50)
        n = random_normals(rng, 50)
        assert np.allclose(euler.wall_ghost(euler.wall_ghost(u, n), n), u, atol=1e-14)

    def test_jacobian_is_exact(self, rng):
        u = random_states(rng, 5)
        n = random_normals(rng, 5)
        for i in range(5):
            G = euler.wall_ghost_jacobian(n[i])
            fd = np.empty((4, 4))
            for k in range(4):
                e = np.zeros(4)
                e[k] = 1e-7
                fd[:, k] = (euler.wall_ghost(u[i] + e, n[i]) - euler.wall_ghost(u[i] - e, n[i])) / 2e-7
            assert np.allclose(G, fd, atol=1e-6)


class TestFarfieldGhost:
    FS = euler.FreestreamSpec(mach=0.5, attack_angle=0.1, p_inf=1.0, rho_inf=1.4)

    def test_freestream_fixed_point(self, rng):
        u = self.FS.state()
        for n in random_normals(rng, 10):
            assert np.allclose(euler.farfield_ghost(u, n, self.FS), u, rtol=1e-12, atol=1e-13)

    def test_supersonic_outflow_keeps_interior(self):
        fs = self.FS
        u = euler._conservative(np.array(1.0), np.array(3.0), np.array(0.0), np.array(1.0), 1.4)
        g = euler.farfield_ghost(u, np.array([1.0, 0.0]), fs)
        assert np.allclose(g, u)

    def test_supersonic_inflow_imposes_freestream(self):
        fs = self.FS
        u = euler._conservative(np.array(1.0), np.array(3.0), np.array(0.0), np.array(1.0), 1.4)
        g = euler.farfield_ghost(u, np.array([-1.0, 0.0]), fs)
        assert np.allclose(g, fs.state())

    @pytest.mark.parametrize("vn", [0.3, -0.3])
    def test_jacobian_vs_fd(self, vn):
        # states well inside the subsonic branches, away from regime switches
        fs = self.FS
        u = euler._conservative(np.array(1.2), np.array(vn), np.array(0.15), np.array(1.1), 1.4)
        n = np.array([1.0, 0.0])
        G = euler.farfield_ghost_jacobian(u, n, fs)
        fd = np.empty((4, 4))
        for k in range(4):
            e = np.zeros(4)
            e[k] = 1e-7 * (1 + abs(u[k]))
            fd[:, k] = (euler.farfield_ghost(u + e, n, fs)
                        - euler.farfield_ghost(u - e, n, fs)) / (2 * e[k])
        assert np.linalg.norm(G - fd) / (1 + np.linalg.norm(fd)) < 1e-6

    def test_ghost_states_are_valid(self, rng):
        fs = self.FS
        u = random_states(rng, 200, vmax=1.5)
        n = random_normals(rng, 200)
        g = euler.farfield_ghost(u, n, fs)
        assert np.all(g[:, 0] > 0)
        euler.pressure(g)  # raises if invalid
