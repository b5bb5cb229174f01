import math

import numpy as np
import pytest

from pftsim import (
    BOSON,
    FERMION,
    HARDCORE,
    SPIN_DOWN,
    SPIN_UP,
    CouplingProfile,
    DegenerateFunctionError,
    FockVector,
    LatticeError,
    ModeIndex,
    MultiSectorState,
    PolynomialFunction,
    UnsupportedSizeError,
    apply_annihilation,
    apply_creation,
    build_hopping,
    build_onsite_repulsion,
    build_quasi_L_fock,
    build_total_spin,
    commutator_norm,
    entangled_transfer_check,
    enumerate_basis,
    evolve_fock,
    fit_transfer,
    function_transfer_check,
    hardcore_equivalence_check,
    lattice_hamiltonian,
    mirror_arrival_phase,
    no_init_transfer_check,
    quasi_L,
    qubit_transfer_check,
    state_from_function,
)

T0 = math.pi


def corner(dims):
    return ModeIndex((1,) * len(dims))


def arrival(dims):
    phase = 1 + 0j
    for e in dims:
        phase *= mirror_arrival_phase(e)
    return phase


class TestBasisEnumeration:
    def test_vacuum_sector(self):
        basis = enumerate_basis((3, 3), BOSON, False, 0)
        assert basis.dim == 1
        assert basis.state_at(0) == (0,) * 9

    def test_boson_counting(self):
        assert enumerate_basis((2, 2), BOSON, False, 2).dim == 10  # C(5, 2)

    def test_spinful_fermion_counting(self):
        assert enumerate_basis((2,), FERMION, True, 2).dim == 6  # C(4, 2)

    def test_descending_lexicographic_order(self):
        basis = enumerate_basis((2,), BOSON, False, 2)
        assert [basis.state_at(i) for i in range(3)] == [(2, 0), (1, 1), (0, 2)]

    def test_single_particle_order_matches_sites(self):
        basis = enumerate_basis((2, 2), BOSON, False, 1)
        assert [basis.state_at(i).index(1) for i in range(4)] == [0, 1, 2, 3]

    def test_fermion_occupancies_bounded(self):
        basis = enumerate_basis((3,), FERMION, False, 2)
        assert basis.dim == 3
        assert basis.occupancies.max() == 1

    def test_mode_positions_up_before_down(self):
        basis = enumerate_basis((2, 2), FERMION, True, 1)
        up = basis.mode_position(ModeIndex((1, 2), SPIN_UP))
        down = basis.mode_position(ModeIndex((1, 2), SPIN_DOWN))
        assert down == up + 1

    def test_dimension_cap(self):
        with pytest.raises(UnsupportedSizeError):
            enumerate_basis((25, 25), BOSON, False, 4)

    def test_unknown_statistics(self):
        with pytest.raises(ValueError):
            enumerate_basis((2,), "anyon", False, 1)


class TestLadderOperators:
    def test_boson_enhancement(self):
        _, factor = apply_creation((1, 0), 0, BOSON)
        assert factor == pytest.approx(math.sqrt(2))

    def test_fermion_parity_sign(self):
        occ, factor = apply_creation((1, 0), 1, FERMION)
        assert occ == (1, 1)
        assert factor == -1.0

    def test_fermion_pauli_blocking(self):
        _, factor = apply_creation((1, 0), 0, FERMION)
        assert factor == 0.0

    def test_hardcore_blocking(self):
        _, factor = apply_creation((0, 1), 1, HARDCORE)
        assert factor == 0.0
        _, factor = apply_creation((0, 0), 1, HARDCORE)
        assert factor == 1.0

    def test_annihilation_roundtrip(self):
        occ, up = apply_creation((0, 1, 0), 0, BOSON)
        back, down = apply_annihilation(occ, 0, BOSON)
        assert back == (0, 1, 0)
        assert up * down == pytest.approx(1.0)


class TestHoppingBuilder:
    @pytest.mark.parametrize("stat", [BOSON, FERMION, HARDCORE])
    def test_single_particle_sector_equivalence(self, stat):
        dims = (3, 3)
        basis = enumerate_basis(dims, stat, False, 1)
        h = build_hopping(basis, Js=(1.0, 1.0)).matrix
        assert np.abs(h - lattice_hamiltonian(dims, (1.0, 1.0)).matrix).max() <= 1e-14

    def test_two_boson_chain_matrix(self):
        basis = enumerate_basis((2,), BOSON, False, 2)
        h = build_hopping(basis, Js=(1.0,)).matrix
        off = math.sqrt(2) / 2  # sqrt(2) enhancement times the engineered C = 1/2
        expected = np.array([[0, -off, 0], [-off, 0, -off], [0, -off, 0]])
        assert h.real == pytest.approx(expected)
        assert np.abs(h.imag).max() == 0

    def test_vacuum_sector_is_zero(self):
        basis = enumerate_basis((3, 3), BOSON, False, 0)
        assert build_hopping(basis).matrix == pytest.approx(np.zeros((1, 1)))

    def test_non_palindromic_profile_equivalence(self):
        # pins the mode<->site correspondence, not just palindrome-invariant parts
        prof = CouplingProfile(axis=0, J=1.0, values=np.array([1.0, 2.0]))
        basis = enumerate_basis((3,), BOSON, False, 1)
        h = build_hopping(basis, profiles=[prof]).matrix
        from pftsim import chain_hamiltonian_from_profile
        assert np.abs(h - chain_hamiltonian_from_profile(prof).matrix).max() <= 1e-14

    def test_spinful_single_particle_blocks(self):
        dims = (2, 3)
        basis = enumerate_basis(dims, FERMION, True, 1)
        h = build_hopping(basis, Js=(1.0, 1.0)).matrix
        single = lattice_hamiltonian(dims, (1.0, 1.0)).matrix
        assert h[0::2, 0::2] == pytest.approx(single)  # spin-up block
        assert h[1::2, 1::2] == pytest.approx(single)  # spin-down block
        assert np.abs(h[0::2, 1::2]).max() == 0  # no spin flips

    def test_hermitian(self):
        basis = enumerate_basis((2, 2), FERMION, False, 2)
        h = build_hopping(basis).matrix
        assert np.abs(h - h.conj().T).max() <= 1e-14


class TestQuasiLFock:
    @pytest.mark.parametrize("component", ["x", "y", "z"])
    def test_single_particle_sector_matches_dense(self, component):
        dims = (3, 2)
        basis = enumerate_basis(dims, BOSON, False, 1)
        for axis in (0, 1):
            lf = build_quasi_L_fock(basis, axis, component).matrix
            ld = quasi_L(dims, axis, component).operator.matrix
            assert np.abs(lf - ld).max() <= 1e-14

    @pytest.mark.parametrize("stat", [BOSON, FERMION])
    @pytest.mark.parametrize("n", [2, 3])
    def test_cross_axis_commutators_vanish(self, stat, n):
        basis = enumerate_basis((3, 3), stat, False, n)
        worst = max(
            commutator_norm(build_quasi_L_fock(basis, 0, c1),
                            build_quasi_L_fock(basis, 1, c2))
            for c1 in "xyz" for c2 in "xyz")
        assert worst <= 1e-12

    def test_hardcore_commutator_regression(self):
        # Pauli-substitution counterexample: frozen value measured on 2x2, n=2
        basis = enumerate_basis((2, 2), HARDCORE, False, 2)
        worst = max(
            commutator_norm(build_quasi_L_fock(basis, 0, c1),
                            build_quasi_L_fock(basis, 1, c2))
            for c1 in "xyz" for c2 in "xyz")
        assert worst == pytest.approx(0.5, abs=1e-12)
        assert worst >= 0.1

    def test_same_axis_su2_in_sector(self):
        basis = enumerate_basis((3,), BOSON, False, 2)
        lx = build_quasi_L_fock(basis, 0, "x").matrix
        ly = build_quasi_L_fock(basis, 0, "y").matrix
        lz = build_quasi_L_fock(basis, 0, "z").matrix
        assert np.abs(lx @ ly - ly @ lx - 1j * lz).max() <= 1e-12


class TestOnsiteRepulsion:
    def test_single_particle_sector_annihilated(self):
        basis = enumerate_basis((3, 3), BOSON, False, 1)
        assert np.abs(build_onsite_repulsion(basis, 7.0).matrix).max() == 0

    def test_double_occupancy_energy(self):
        basis = enumerate_basis((2,), BOSON, False, 2)
        h = build_onsite_repulsion(basis, 3.0).matrix
        idx = basis.index_of((0, 2))
        assert h[idx, idx] == pytest.approx(6.0)  # n(n-1) = 2 times strength

    def test_vacuum_zero(self):
        basis = enumerate_basis((2, 2), BOSON, False, 0)
        assert build_onsite_repulsion(basis, 5.0).matrix == pytest.approx(np.zeros((1, 1)))

    def test_rejects_non_bosonic(self):
        basis = enumerate_basis((2,), FERMION, False, 1)
        with pytest.raises(ValueError):
            build_onsite_repulsion(basis, 1.0)


class TestTotalSpin:
    def test_z_eigenvalue_on_up_particle(self):
        basis = enumerate_basis((2, 2), FERMION, True, 1)
        sz = build_total_spin(basis, "z").matrix
        pos = basis.mode_position(ModeIndex((1, 1), SPIN_UP))
        occ = [0] * basis.n_modes
        occ[pos] = 1
        idx = basis.index_of(tuple(occ))
        assert sz[idx, idx] == pytest.approx(0.5)

    def test_su2_algebra(self):
        basis = enumerate_basis((2, 2), FERMION, True, 2)
        sx = build_total_spin(basis, "x").matrix
        sy = build_total_spin(basis, "y").matrix
        sz = build_total_spin(basis, "z").matrix
        assert np.abs(sx @ sy - sy @ sx - 1j * sz).max() <= 1e-12

    def test_commutes_with_quasi_L(self):
        basis = enumerate_basis((2, 2), FERMION, True, 2)
        worst = max(
            commutator_norm(build_total_spin(basis, cs),
                            build_quasi_L_fock(basis, axis, cl))
            for cs in "xyz" for axis in (0, 1) for cl in "xyz")
        assert worst <= 1e-12

    def test_rejects_spinless(self):
        basis = enumerate_basis((2,), FERMION, False, 1)
        with pytest.raises(ValueError):
            build_total_spin(basis, "z")


class TestStateFromFunction:
    def test_linear_gives_basis_state(self):
        state = state_from_function((2, 2), BOSON, PolynomialFunction.linear(),
                                    [ModeIndex((1, 1))])
        assert set(state.sectors) == {1}
        vec = state.sectors[1]
        assert abs(vec.amplitudes[vec.basis.index_of((1, 0, 0, 0))]) == pytest.approx(1.0)

    def test_vacuum_plus_pair(self):
        # 1 + x^2/sqrt(2) puts equal weight on vacuum and double occupation
        f = PolynomialFunction(((1.0, ()), (1.0 / math.sqrt(2), (2,))))
        state = state_from_function((2,), BOSON, f, [ModeIndex((1,))])
        assert set(state.sectors) == {0, 2}
        assert state.sectors[0].norm() == pytest.approx(1 / math.sqrt(2))
        assert state.sectors[2].norm() == pytest.approx(1 / math.sqrt(2))

    def test_fermionic_square_degenerate(self):
        f = PolynomialFunction(((1.0, (2,)),))
        with pytest.raises(DegenerateFunctionError):
            state_from_function((2,), FERMION, f, [ModeIndex((1,))])

    def test_general_onsite_fermion_state(self):
        f = PolynomialFunction(((0.5, ()), (0.5, (1,)), (0.5, (0, 1)), (0.5, (1, 1))))
        anchors = [ModeIndex((1, 1), SPIN_UP), ModeIndex((1, 1), SPIN_DOWN)]
        state = state_from_function((2, 2), FERMION, f, anchors, spinful=True)
        assert set(state.sectors) == {0, 1, 2}
        assert state.norm() == pytest.approx(1.0)

    def test_missing_anchor(self):
        with pytest.raises(ValueError):
            state_from_function((2,), BOSON, PolynomialFunction.linear(), [])


class TestEvolveFock:
    def test_zero_time_identity(self):
        basis = enumerate_basis((3,), BOSON, False, 2)
        vec = FockVector(basis, np.eye(basis.dim)[2].astype(complex))
        out = evolve_fock(vec, build_hopping(basis), 0.0)
        assert out.amplitudes == pytest.approx(vec.amplitudes)

    def test_norm_preserved(self):
        basis = enumerate_basis((2, 3), FERMION, False, 2)
        rng = np.random.default_rng(5)
        amps = rng.normal(size=basis.dim) + 1j * rng.normal(size=basis.dim)
        vec = FockVector(basis, amps / np.linalg.norm(amps))
        out = evolve_fock(vec, build_hopping(basis), 2.7)
        assert out.norm() == pytest.approx(1.0, abs=1e-10)

    def test_single_particle_mirror(self):
        basis = enumerate_basis((3,), BOSON, False, 1)
        vec = FockVector(basis, np.array([1, 0, 0], dtype=complex))
        out = evolve_fock(vec, build_hopping(basis, Js=(1.0,)), T0)
        assert abs(out.amplitudes[2]) == pytest.approx(1.0, abs=1e-12)

    def test_rejects_nonhermitian(self):
        basis = enumerate_basis((2,), BOSON, False, 1)
        vec = FockVector(basis, np.array([1, 0], dtype=complex))
        with pytest.raises(ValueError):
            evolve_fock(vec, np.array([[0, 1], [0, 0]]), 1.0)

    def test_dim_mismatch(self):
        basis = enumerate_basis((2,), BOSON, False, 1)
        vec = FockVector(basis, np.array([1, 0], dtype=complex))
        with pytest.raises(ValueError):
            evolve_fock(vec, np.eye(3), 1.0)

    def test_dense_cap(self):
        basis = enumerate_basis((2, 2), BOSON, True, 8)  # C(15, 8) = 6435
        vec = FockVector(basis, np.zeros(basis.dim, dtype=complex))
        with pytest.raises(UnsupportedSizeError):
            evolve_fock(vec, np.zeros((1, 1)), 1.0)


class TestFitTransfer:
    def test_geometric_phases_recovered(self):
        basis0 = enumerate_basis((2,), BOSON, False, 0)
        basis1 = enumerate_basis((2,), BOSON, False, 1)
        basis2 = enumerate_basis((2,), BOSON, False, 2)
        w = np.sqrt(np.array([0.2, 0.3, 0.5]))
        target = MultiSectorState({
            0: FockVector(basis0, np.array([w[0]], dtype=complex)),
            1: FockVector(basis1, w[1] * np.array([1, 0], dtype=complex)),
            2: FockVector(basis2, w[2] * np.array([1, 0, 0], dtype=complex)),
        })
        rho = np.exp(0.4j)
        evolved = MultiSectorState({
            n: FockVector(v.basis, rho ** n * v.amplitudes)
            for n, v in target.sectors.items()})
        report = fit_transfer(target, evolved)
        assert report.fidelity == pytest.approx(1.0)
        assert report.phase == pytest.approx(rho)
        assert report.residual <= 1e-12

    def test_missing_sector_lowers_fidelity(self):
        basis1 = enumerate_basis((2,), BOSON, False, 1)
        target = MultiSectorState({1: FockVector(basis1, np.array([1, 0], dtype=complex))})
        evolved = MultiSectorState({1: FockVector(basis1, np.array([0, 1], dtype=complex))})
        assert fit_transfer(target, evolved).fidelity == pytest.approx(0.0)


class TestFunctionTransfer:
    @pytest.mark.parametrize("dims", [(2, 2), (3, 3), (2, 4), (4, 4)])
    def test_linear_transfers_perfectly(self, dims):
        rep = function_transfer_check(dims, BOSON, PolynomialFunction.linear(),
                                      [corner(dims)], T0)
        assert rep.fidelity >= 1 - 1e-9
        assert rep.phase == pytest.approx(arrival(dims), abs=1e-9)

    def test_quadratic_sector_phases(self):
        f = PolynomialFunction(((0.55, ()), (0.4, (1,)), (0.2 + 0.15j, (2,))))
        rep = function_transfer_check((3, 3), BOSON, f, [corner((3, 3))], T0)
        assert rep.fidelity >= 1 - 1e-8
        assert rep.residual <= 1e-8
        expected = arrival((3, 3))
        assert rep.sector_phases[2] == pytest.approx(expected ** 2, abs=1e-9)

    @pytest.mark.parametrize("dims", [(2,), (3,), (4,), (2, 3), (3, 3), (4, 2), (2, 2, 2)])
    def test_degree_three_transfers_perfectly(self, dims):
        f = PolynomialFunction(((0.5, ()), (0.5, (1,)), (0.3, (2,)), (0.2, (3,))))
        rep = function_transfer_check(dims, BOSON, f, [corner(dims)], T0)
        assert rep.fidelity >= 1 - 1e-8
        assert rep.residual <= 1e-8
        assert rep.phase == pytest.approx(arrival(dims), abs=1e-8)

    def test_multivariable_function(self):
        f = PolynomialFunction(((0.6, (1, 0)), (0.8, (0, 1))))
        rep = function_transfer_check((3, 3), BOSON, f,
                                      [ModeIndex((1, 1)), ModeIndex((1, 2))], T0)
        assert rep.fidelity >= 1 - 1e-9

    def test_halfway_time_regression(self):
        # frozen from the eigendecomposition evolution itself
        f = PolynomialFunction(((0.55, ()), (0.4, (1,)), (0.2 + 0.15j, (2,))))
        rep = function_transfer_check((3, 3), BOSON, f, [corner((3, 3))], T0 / 2)
        assert rep.fidelity == pytest.approx(0.596276595744681, abs=1e-12)
        assert rep.fidelity < 1.0

    def test_uniform_coupling_control_fails(self):
        # engineered profile is necessary: best uniform-chain fidelity stays low
        from pftsim.verify import uniform_chain_best_fidelity
        best, best_t = uniform_chain_best_fidelity(5, 1.0)
        assert best == pytest.approx(0.9707668826845792, abs=1e-9)
        assert best < 0.999
        uniform = CouplingProfile(axis=0, J=1.0, values=np.ones(4))
        rep = function_transfer_check((5,), BOSON, PolynomialFunction.linear(),
                                      [ModeIndex((1,))], best_t, profiles=[uniform])
        assert rep.fidelity == pytest.approx(best, abs=1e-9)
        assert rep.fidelity < 0.999

    def test_fermion_linear(self):
        rep = function_transfer_check((2, 3), FERMION, PolynomialFunction.linear(),
                                      [corner((2, 3))], T0)
        assert rep.fidelity >= 1 - 1e-9


class TestNoInitialization:
    def test_vacuum_interior_reduces_to_function_transfer(self):
        g = PolynomialFunction(((1.0, ()),))
        rep = no_init_transfer_check((3, 3), BOSON, PolynomialFunction.linear(),
                                     [ModeIndex((1, 1))], g, [], T0)
        direct = function_transfer_check((3, 3), BOSON, PolynomialFunction.linear(),
                                         [ModeIndex((1, 1))], T0)
        assert rep.fidelity == pytest.approx(direct.fidelity, abs=1e-12)

    def test_linear_interior(self):
        rep = no_init_transfer_check((3, 3), BOSON, PolynomialFunction.linear(),
                                     [ModeIndex((1, 1))], PolynomialFunction.linear(),
                                     [ModeIndex((2, 1))], T0)
        assert rep.fidelity >= 1 - 1e-8

    def test_quadratic_center_interior(self):
        g = PolynomialFunction(((1.0, (2,)),))
        rep = no_init_transfer_check((3, 3), BOSON, PolynomialFunction.linear(),
                                     [ModeIndex((1, 1))], g, [ModeIndex((2, 2))], T0)
        assert rep.fidelity >= 1 - 1e-8

    def test_overlapping_supports_rejected(self):
        with pytest.raises(ValueError):
            no_init_transfer_check((3, 3), BOSON, PolynomialFunction.linear(),
                                   [ModeIndex((1, 1))], PolynomialFunction.linear(),
                                   [ModeIndex((1, 1))], T0)


class TestQubitTransfer:
    def test_vacuum_component_trivial(self):
        rep = qubit_transfer_check((2, 2), (1.0, 0.0, 0.0, 0.0), (1, 1), T0)
        assert rep.fidelity == pytest.approx(1.0)

    def test_spin_qubit_on_2x3(self):
        rep = qubit_transfer_check((2, 3), (0.0, 0.6, 0.8, 0.0), (1, 1), T0)
        assert rep.fidelity >= 1 - 1e-8

    def test_general_state_on_2x2(self):
        amps = np.array([0.3 + 0.4j, -0.5, 0.2 - 0.1j, 0.55])
        amps = amps / np.linalg.norm(amps)
        rep = qubit_transfer_check((2, 2), amps, (1, 1), T0)
        assert rep.fidelity >= 1 - 1e-8
        assert rep.residual <= 1e-8

    def test_interior_source(self):
        rep = qubit_transfer_check((2, 3), (0.0, 1.0, 0.0, 0.0), (1, 2), T0)
        assert rep.fidelity >= 1 - 1e-8

    def test_unnormalized_rejected(self):
        with pytest.raises(ValueError):
            qubit_transfer_check((2, 2), (1.0, 1.0, 0.0, 0.0), (1, 1), T0)

    def test_global_spin_rotation_invariance(self):
        theta = 0.9
        base = np.array([0.6, 0.8])
        rotated = np.array([[np.cos(theta), -np.sin(theta)],
                            [np.sin(theta), np.cos(theta)]]) @ base
        rep1 = qubit_transfer_check((2, 2), (0.0, base[0], base[1], 0.0), (1, 1), T0)
        rep2 = qubit_transfer_check((2, 2), (0.0, rotated[0], rotated[1], 0.0), (1, 1), T0)
        assert rep1.fidelity == pytest.approx(rep2.fidelity, abs=1e-10)


class TestEntangledTransfer:
    def test_product_case(self):
        rep = entangled_transfer_check((2, 3), 1.0, 0.0, T0)
        assert rep.fidelity >= 1 - 1e-8

    def test_bell_pair_on_2x3(self):
        rep = entangled_transfer_check((2, 3), 1 / math.sqrt(2), 1 / math.sqrt(2), T0)
        assert rep.fidelity >= 1 - 1e-8

    def test_asymmetric_pair_on_2x2(self):
        rep = entangled_transfer_check((2, 2), 0.5, math.sqrt(3) / 2, T0)
        assert rep.fidelity >= 1 - 1e-8

    def test_needs_second_axis(self):
        with pytest.raises(LatticeError):
            entangled_transfer_check((4,), 1.0, 0.0, T0)

    def test_unnormalized_rejected(self):
        with pytest.raises(ValueError):
            entangled_transfer_check((2, 3), 1.0, 1.0, T0)


class TestHardcoreEquivalence:
    def test_vacuum_only(self):
        rep = hardcoree = hardcore_equivalence_check((2, 2), T0, alpha=1.0, beta=0.0)
        assert rep.fidelity == pytest.approx(1.0)
        assert rep.max_deviation == 0.0

    def test_full_excitation_strong_repulsion(self):
        rep = hardcore_equivalence_check((3, 3), T0, alpha=0.0, beta=1.0,
                                         strengths=(0.0, 50.0))
        assert rep.fidelity >= 1 - 1e-8
        assert rep.max_deviation <= 1e-10

    def test_superposition(self):
        amp = 1 / math.sqrt(2)
        rep = hardcore_equivalence_check((2, 2), T0, alpha=amp, beta=amp,
                                         strengths=(0.0, 10.0))
        assert rep.fidelity >= 1 - 1e-8
        assert rep.max_deviation <= 1e-10

    def test_unnormalized_rejected(self):
        with pytest.raises(ValueError):
            hardcore_equivalence_check((2, 2), T0, alpha=1.0, beta=1.0)


class TestPolynomialFunction:
    def test_product_shifts_variables(self):
        f = PolynomialFunction(((2.0, (1,)),))
        g = PolynomialFunction(((3.0, (2,)),))
        fg = f.product(g)
        assert fg.terms == ((6.0 + 0j, (1, 2)),)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            PolynomialFunction(())

    def test_negative_power_rejected(self):
        with pytest.raises(ValueError):
            PolynomialFunction(((1.0, (-1,)),))
