import math

import numpy as np
import pytest

from pftsim import (
    BOSON,
    DenseOperator,
    DressingSpec,
    ModeIndex,
    PolynomialFunction,
    build_hopping,
    dress,
    dressed_transfer_check,
    enumerate_basis,
    function_transfer_check,
    lz_dressing_unitary,
    magnetic_number,
    quasi_L,
    random_unitary,
)

T0 = math.pi


def total_component(dims, component):
    n = len(dims)
    return sum(quasi_L(dims, a, component).operator.matrix for a in range(n))


class TestDress:
    def test_identity_dressing(self):
        h = DenseOperator(np.diag([1.0, 2.0, 3.0]).astype(complex), role="hermitian")
        out = dress(h, np.eye(3))
        assert out.matrix == pytest.approx(h.matrix)
        assert out.role == "hermitian"

    def test_spectrum_preserved(self):
        h = build_hopping(enumerate_basis((3,), BOSON, False, 2))
        w = random_unitary(h.dim, seed=9)
        dressed = dress(h, w)
        assert np.sort(np.linalg.eigvalsh(dressed.matrix)) == pytest.approx(
            np.sort(np.linalg.eigvalsh(h.matrix)), abs=1e-10)

    @pytest.mark.parametrize("dims", [(2,), (4,), (2, 3), (3, 3), (2, 2, 2), (4, 5)])
    def test_lz_rotation_closed_form(self, dims):
        theta = 0.7
        hx = total_component(dims, "x")
        hy = total_component(dims, "y")
        w = lz_dressing_unitary(dims, theta)
        dressed = dress(np.asarray(hx), w).matrix
        assert np.abs(dressed - (np.cos(theta) * hx + np.sin(theta) * hy)).max() <= 1e-10

    def test_rejects_non_unitary(self):
        with pytest.raises(ValueError):
            dress(np.eye(2), 2 * np.eye(2))

    def test_rejects_dim_mismatch(self):
        with pytest.raises(ValueError):
            dress(np.eye(2), np.eye(3))


class TestLzDressingUnitary:
    def test_zero_angle_identity(self):
        assert lz_dressing_unitary((3, 3), 0.0).matrix == pytest.approx(np.eye(9))

    def test_single_particle_phases(self):
        theta = 0.4
        dims = (3, 4)
        w = lz_dressing_unitary(dims, theta).matrix
        from pftsim import as_dims
        d = as_dims(dims)
        for flat, site in enumerate(d.sites()):
            msum = float(magnetic_number(site[0], 3) + magnetic_number(site[1], 4))
            assert w[flat, flat] == pytest.approx(np.exp(-1j * theta * msum))

    def test_vacuum_amplitude_unchanged(self):
        basis = enumerate_basis((2, 2), BOSON, False, 0)
        w = lz_dressing_unitary(basis, 1.3).matrix
        assert w == pytest.approx(np.ones((1, 1)))

    def test_fock_sector_diagonal(self):
        basis = enumerate_basis((2,), BOSON, False, 2)
        w = lz_dressing_unitary(basis, 0.9).matrix
        # state (2, 0) has both particles at m = -1/2
        idx = basis.index_of((2, 0))
        assert w[idx, idx] == pytest.approx(np.exp(-1j * 0.9 * (-1.0)))


class TestConjugationIdentity:
    def test_dressed_evolution_equals_conjugated(self):
        basis = enumerate_basis((2, 3), BOSON, False, 2)
        h = build_hopping(basis, Js=(1.0, 1.0))
        w = random_unitary(h.dim, seed=17).matrix
        hp = dress(h, w).matrix
        for t in (0.5, 1.7):
            wh, vh = np.linalg.eigh(hp)
            u_dressed = (vh * np.exp(-1j * t * wh)) @ vh.conj().T
            w0, v0 = np.linalg.eigh(h.matrix)
            u_bare = (v0 * np.exp(-1j * t * w0)) @ v0.conj().T
            assert np.abs(u_dressed - w @ u_bare @ w.conj().T).max() <= 1e-10


class TestDressedTransfer:
    def test_identity_dressing_reduces_to_plain_check(self):
        f = PolynomialFunction.linear()
        anchors = [ModeIndex((1, 1))]
        spec = DressingSpec.generic(np.eye(6))
        rep = dressed_transfer_check((2, 3), spec, f, anchors, T0)
        plain = function_transfer_check((2, 3), BOSON, f, anchors, T0)
        assert rep.fidelity == pytest.approx(plain.fidelity, abs=1e-12)
        assert rep.phase == pytest.approx(plain.phase, abs=1e-9)

    def test_lz_dressing_transfers_perfectly(self):
        rep = dressed_transfer_check((3, 3), DressingSpec.lz(0.7),
                                     PolynomialFunction.linear(), [ModeIndex((1, 1))], T0)
        assert rep.fidelity >= 1 - 1e-8
        # fitted phase and the quoted 2D closed-form phase reported side by side
        assert abs(rep.phase) == pytest.approx(1.0)
        assert rep.stated_phase == pytest.approx(np.exp(-1j * 7 * 0.7))

    def test_lz_dressing_degree_two(self):
        f = PolynomialFunction(((0.5, ()), (0.6, (1,)), (0.4, (2,))))
        rep = dressed_transfer_check((3, 3), DressingSpec.lz(0.7), f,
                                     [ModeIndex((1, 1))], T0)
        assert rep.fidelity >= 1 - 1e-8
        assert rep.residual <= 1e-8

    @pytest.mark.parametrize("seed", [101, 202, 303])
    def test_random_unitary_preserves_fidelity_at_any_time(self, seed):
        f = PolynomialFunction.linear()
        anchors = [ModeIndex((1, 1))]
        spec = DressingSpec.generic(random_unitary(8, seed))
        for t in (0.4, 1.1, T0):
            dressed = dressed_transfer_check((2, 4), spec, f, anchors, t)
            plain = function_transfer_check((2, 4), BOSON, f, anchors, t)
            assert abs(dressed.fidelity - plain.fidelity) <= 1e-10

    def test_random_unitary_lifted_to_pair_sector(self):
        # degree-2 polynomial forces the one-body-generator lift
        f = PolynomialFunction(((0.8, (1,)), (0.6, (2,))))
        spec = DressingSpec.generic(random_unitary(4, seed=7))
        dressed = dressed_transfer_check((2, 2), spec, f, [ModeIndex((1, 1))], T0)
        plain = function_transfer_check((2, 2), BOSON, f, [ModeIndex((1, 1))], T0)
        assert abs(dressed.fidelity - plain.fidelity) <= 1e-10
        assert dressed.fidelity >= 1 - 1e-8

    def test_stated_phase_absent_off_2d(self):
        rep = dressed_transfer_check((4,), DressingSpec.lz(0.3),
                                     PolynomialFunction.linear(), [ModeIndex((1,))], T0)
        assert rep.stated_phase is None

    def test_generic_spec_validates_unitarity(self):
        with pytest.raises(ValueError):
            DressingSpec.generic(np.array([[1.0, 1.0], [0.0, 1.0]]))


class TestRandomUnitary:
    def test_deterministic(self):
        a = random_unitary(5, seed=3).matrix
        b = random_unitary(5, seed=3).matrix
        assert a == pytest.approx(b)

    def test_unitary(self):
        u = random_unitary(7, seed=12).matrix
        assert np.abs(u.conj().T @ u - np.eye(7)).max() <= 1e-12
