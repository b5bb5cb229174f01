"""One-shot verification suite: each acceptance check as a callable criterion.

Every criterion returns a CriterionResult with deterministic numeric
details, so the artifact written by the command-line ``verify`` run is
byte-identical across repeated runs.  Wall-clock limits are enforced in
the pass flag but never written into the details.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .lattice import CouplingProfile, as_dims, i_power, mirror_site, signature
from .wigner import wigner_d_levels, wigner_d_oracle, wigner_d_sum
from .dynamics import (
    chain_hamiltonian_from_profile,
    commutator_norm,
    lattice_hamiltonian,
    mirror_arrival_phase,
    mirror_permutation,
    propagator_analytic,
    propagator_analytic_1d,
    propagator_numeric,
    quasi_L,
    transfer_amplitude,
)
from .fock import (
    BOSON,
    FERMION,
    HARDCORE,
    ModeIndex,
    PolynomialFunction,
    build_quasi_L_fock,
    build_total_spin,
    entangled_transfer_check,
    enumerate_basis,
    function_transfer_check,
    hardcore_equivalence_check,
    no_init_transfer_check,
    qubit_transfer_check,
)
from .dressing import (
    DressingSpec,
    dress,
    dressed_transfer_check,
    lz_dressing_unitary,
    random_unitary,
)

T0 = np.pi  # transfer time at J = 1


@dataclass(frozen=True)
class CriterionResult:
    index: int
    name: str
    passed: bool
    details: dict

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.index:2d}  {self.name}"


def _corner_mode(dims):
    return ModeIndex((1,) * as_dims(dims).n_axes)


def criterion_1_1d_transfer() -> CriterionResult:
    start = time.perf_counter()
    worst_modulus = 0.0
    worst_spread = 0.0
    worst_vs_expected = 0.0
    for M in range(2, 21):
        u = propagator_analytic_1d(M, 1.0, T0).matrix
        arrivals = np.array([u[M - j, j - 1] for j in range(1, M + 1)])
        worst_modulus = max(worst_modulus, float(np.abs(np.abs(arrivals) - 1.0).max()))
        worst_spread = max(worst_spread, float(np.abs(arrivals - arrivals[0]).max()))
        worst_vs_expected = max(worst_vs_expected,
                                float(abs(arrivals[0] - mirror_arrival_phase(M))))
    elapsed = time.perf_counter() - start
    ok = worst_modulus <= 1e-10 and worst_spread <= 1e-10 and worst_vs_expected <= 1e-10
    return CriterionResult(1, "1d-perfect-transfer", ok and elapsed < 1.0, {
        "worst_modulus_error": worst_modulus,
        "worst_phase_spread": worst_spread,
        "worst_phase_vs_convention": worst_vs_expected,
        "runtime_ok": float(elapsed < 1.0),
    })


def _mirror_pattern_errors(dims, u):
    perm = mirror_permutation(dims)
    mag = np.abs(u)
    off = float((mag * (1.0 - perm)).max())
    on = float(np.abs(mag[perm == 1.0] - 1.0).max())
    return off, on


def criterion_2_2d_mirror() -> CriterionResult:
    start = time.perf_counter()
    worst_off = worst_on = worst_oracle = worst_phase = 0.0
    for M in range(2, 9):
        for N in range(2, 9):
            dims = (M, N)
            u = propagator_analytic(dims, (1.0, 1.0), T0).matrix
            off, on = _mirror_pattern_errors(dims, u)
            worst_off, worst_on = max(worst_off, off), max(worst_on, on)
            expected = mirror_arrival_phase(M) * mirror_arrival_phase(N)
            d = as_dims(dims)
            arrivals = np.array([u[d.flat_index(mirror_site(s, d)), d.flat_index(s)]
                                 for s in d.sites()])
            worst_phase = max(worst_phase, float(np.abs(arrivals - expected).max()))
            h = lattice_hamiltonian(dims, (1.0, 1.0))
            for t in (0.7, T0):
                ua = propagator_analytic(dims, (1.0, 1.0), t).matrix
                un = propagator_numeric(h, t).matrix
                worst_oracle = max(worst_oracle, float(np.abs(ua - un).max()))
    elapsed = time.perf_counter() - start
    ok = (worst_off <= 1e-10 and worst_on <= 1e-10 and worst_oracle <= 1e-9
          and worst_phase <= 1e-10)
    return CriterionResult(2, "2d-mirror-law", ok and elapsed < 10.0, {
        "worst_off_mirror": worst_off,
        "worst_mirror_modulus_error": worst_on,
        "worst_analytic_vs_numeric": worst_oracle,
        "worst_phase_law_error": worst_phase,
        "runtime_ok": float(elapsed < 10.0),
    })


def criterion_3_3d_mirror() -> CriterionResult:
    start = time.perf_counter()
    worst_modulus = worst_phase = worst_off = 0.0
    for dims in ((2, 2, 2), (3, 3, 3), (2, 3, 4)):
        d = as_dims(dims)
        corner = (1, 1, 1)
        amp = transfer_amplitude(d, (1.0, 1.0, 1.0), corner, mirror_site(corner, d), T0)
        worst_modulus = max(worst_modulus, abs(abs(amp) - 1.0))
        expected = np.prod([mirror_arrival_phase(e) for e in d.extents])
        worst_phase = max(worst_phase, abs(amp - expected))
        u = propagator_analytic(d, (1.0,) * 3, T0).matrix
        off, on = _mirror_pattern_errors(d, u)
        worst_off = max(worst_off, off, on)
    elapsed = time.perf_counter() - start
    ok = worst_modulus <= 1e-10 and worst_phase <= 1e-10 and worst_off <= 1e-10
    return CriterionResult(3, "3d-mirror-law", ok and elapsed < 5.0, {
        "worst_modulus_error": float(worst_modulus),
        "worst_phase_vs_signatures": float(worst_phase),
        "worst_pattern_error": float(worst_off),
        "runtime_ok": float(elapsed < 5.0),
    })


def criterion_4_signature_interference() -> CriterionResult:
    prod_55 = signature(5) * signature(5)
    prod_22 = signature(2) * signature(2)
    ok = prod_55 == 1 + 0j and prod_22 == -1 + 0j
    return CriterionResult(4, "signature-interference", ok, {
        "product_5x5_re": prod_55.real, "product_5x5_im": prod_55.imag,
        "product_2x2_re": prod_22.real, "product_2x2_im": prod_22.imag,
    })


def criterion_5_commutation() -> CriterionResult:
    lattices = ((2, 2), (2, 3), (3, 3))
    comps = "xyz"
    worst_vanishing = 0.0
    for dims in lattices:
        for c1 in comps:
            for c2 in comps:
                worst_vanishing = max(worst_vanishing, commutator_norm(
                    quasi_L(dims, 0, c1).operator, quasi_L(dims, 1, c2).operator))
    for stat in (BOSON, FERMION):
        for dims in lattices:
            basis = enumerate_basis(dims, stat, False, 2)
            for c1 in comps:
                for c2 in comps:
                    worst_vanishing = max(worst_vanishing, commutator_norm(
                        build_quasi_L_fock(basis, 0, c1), build_quasi_L_fock(basis, 1, c2)))
    basis = enumerate_basis((2, 2), HARDCORE, False, 2)
    hardcore_norm = max(commutator_norm(build_quasi_L_fock(basis, 0, c1),
                                        build_quasi_L_fock(basis, 1, c2))
                        for c1 in comps for c2 in comps)
    ok = worst_vanishing <= 1e-12 and hardcore_norm >= 0.1
    return CriterionResult(5, "commutation-structure", ok, {
        "worst_vanishing_commutator": worst_vanishing,
        "hardcore_commutator_norm": hardcore_norm,
    })


def criterion_6_wigner() -> CriterionResult:
    start = time.perf_counter()
    betas = [0.1 * k for k in range(63)]
    worst_sum = worst_primary = worst_orth = 0.0
    for beta in betas:
        for two_l, mat in wigner_d_levels(60, beta):
            worst_orth = max(worst_orth, float(
                np.abs(mat.T @ mat - np.eye(two_l + 1)).max()))
            if two_l <= 40:
                oracle = wigner_d_oracle(two_l, beta).matrix
                worst_primary = max(worst_primary, float(np.abs(mat - oracle).max()))
                worst_sum = max(worst_sum, float(
                    np.abs(wigner_d_sum(two_l, beta).matrix - oracle).max()))
    worst_comp = 0.0
    for two_l in (1, 2, 3, 5, 10, 21, 40):
        for b1, b2 in ((0.3, 0.9), (1.1, 2.2), (0.25, -1.7)):
            d1 = next(m for l, m in wigner_d_levels(two_l, b1) if l == two_l)
            d2 = next(m for l, m in wigner_d_levels(two_l, b2) if l == two_l)
            d12 = next(m for l, m in wigner_d_levels(two_l, b1 + b2) if l == two_l)
            worst_comp = max(worst_comp, float(np.abs(d1 @ d2 - d12).max()))
    worst_spinor = 0.0
    for two_l, mat in wigner_d_levels(40, 2 * np.pi):
        worst_spinor = max(worst_spinor, float(
            np.abs(mat - (-1.0) ** two_l * np.eye(two_l + 1)).max()))
    elapsed = time.perf_counter() - start
    ok = (worst_sum <= 1e-10 and worst_primary <= 1e-10 and worst_orth <= 1e-12
          and worst_comp <= 1e-10 and worst_spinor <= 1e-12)
    return CriterionResult(6, "wigner-d-correctness", ok and elapsed < 10.0, {
        "worst_sum_vs_oracle": worst_sum,
        "worst_primary_vs_oracle": worst_primary,
        "worst_orthogonality": worst_orth,
        "worst_composition": worst_comp,
        "worst_full_turn_sign": worst_spinor,
        "runtime_ok": float(elapsed < 10.0),
    })


def uniform_chain_best_fidelity(M: int, J: float = 1.0, n_grid: int = 20001):
    """Best end-to-end amplitude modulus of a uniform chain over (0, 2pi/J]."""
    profile = CouplingProfile(axis=0, J=float(J), values=np.full(M - 1, float(J)))
    h = chain_hamiltonian_from_profile(profile).matrix
    w, v = np.linalg.eigh(h)
    weights = v[M - 1, :] * v[0, :]

    def amp(t):
        return abs((weights * np.exp(-1j * t * w)).sum())

    ts = np.linspace(0.0, 2 * np.pi / abs(J), n_grid)[1:]
    amps = np.abs((weights[None, :] * np.exp(-1j * np.outer(ts, w))).sum(axis=1))
    k = int(np.argmax(amps))
    lo = ts[max(k - 1, 0)]
    hi = ts[min(k + 1, len(ts) - 1)]
    res = minimize_scalar(lambda t: -amp(t), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    best_t = float(res.x)
    return max(float(-res.fun), float(amps[k])), best_t


def criterion_7_function_transfer() -> CriterionResult:
    f = PolynomialFunction(((0.55, ()), (0.4, (1,)), (0.2 + 0.15j, (2,))))
    rep = function_transfer_check((3, 3), BOSON, f, [_corner_mode((3, 3))], T0)
    best, best_t = uniform_chain_best_fidelity(5, 1.0)
    uniform = CouplingProfile(axis=0, J=1.0, values=np.full(4, 1.0))
    rep_ctrl = function_transfer_check((5,), BOSON, PolynomialFunction.linear(),
                                       [ModeIndex((1,))], best_t, profiles=[uniform])
    ok = (rep.fidelity >= 1.0 - 1e-8 and rep.residual <= 1e-8
          and best < 0.999 and rep_ctrl.fidelity < 0.999)
    return CriterionResult(7, "function-transfer", ok, {
        "engineered_fidelity": rep.fidelity,
        "engineered_phase_residual": rep.residual,
        "uniform_best_fidelity": best,
        "uniform_best_time": best_t,
        "uniform_fock_fidelity": rep_ctrl.fidelity,
    })


def criterion_8_no_initialization() -> CriterionResult:
    f = PolynomialFunction.linear()
    configs = [
        ("vacuum-interior", PolynomialFunction(((1.0, ()),)), []),
        ("linear-interior", PolynomialFunction.linear(), [ModeIndex((2, 1))]),
        ("quadratic-center", PolynomialFunction(((1.0, (2,)),)), [ModeIndex((2, 2))]),
    ]
    details = {}
    worst = 1.0
    for name, g, g_anchors in configs:
        rep = no_init_transfer_check((3, 3), BOSON, f, [ModeIndex((1, 1))],
                                     g, g_anchors, T0)
        details[f"fidelity_{name}"] = rep.fidelity
        details[f"residual_{name}"] = rep.residual
        worst = min(worst, rep.fidelity)
    return CriterionResult(8, "no-initialization", worst >= 1.0 - 1e-8, details)


def criterion_9_hardcore_equivalence() -> CriterionResult:
    strengths = (0.0, 10.0, 50.0)
    r1 = hardcore_equivalence_check((3, 3), T0, alpha=0.0, beta=1.0, strengths=strengths)
    amp = 1 / np.sqrt(2)
    r2 = hardcore_equivalence_check((2, 2), T0, alpha=amp, beta=amp, strengths=strengths)
    ok = (max(r1.max_deviation, r2.max_deviation) <= 1e-10
          and min(r1.fidelity, r2.fidelity) >= 1.0 - 1e-8)
    return CriterionResult(9, "hardcore-equivalence", ok, {
        "worst_state_deviation": max(r1.max_deviation, r2.max_deviation),
        "fidelity_3x3": r1.fidelity,
        "fidelity_2x2": r2.fidelity,
    })


def criterion_10_spin_transfer() -> CriterionResult:
    start = time.perf_counter()
    qubit_23 = qubit_transfer_check((2, 3), (0.0, 0.6, 0.8, 0.0), (1, 1), T0)
    amps = np.array([0.3 + 0.4j, -0.5, 0.2 - 0.1j, 0.55])
    amps = amps / np.linalg.norm(amps)
    qubit_22 = qubit_transfer_check((2, 2), amps, (1, 1), T0)
    ent_23 = entangled_transfer_check((2, 3), 1 / np.sqrt(2), 1 / np.sqrt(2), T0)
    ent_22 = entangled_transfer_check((2, 2), 0.5, np.sqrt(3) / 2, T0)
    worst_comm = 0.0
    for n in (1, 2):
        basis = enumerate_basis((2, 2), FERMION, True, n)
        for comp_s in "xyz":
            s = build_total_spin(basis, comp_s)
            for axis in (0, 1):
                for comp_l in "xyz":
                    worst_comm = max(worst_comm, commutator_norm(
                        s, build_quasi_L_fock(basis, axis, comp_l)))
    elapsed = time.perf_counter() - start
    worst_fid = min(qubit_23.fidelity, qubit_22.fidelity, ent_23.fidelity, ent_22.fidelity)
    ok = worst_fid >= 1.0 - 1e-8 and worst_comm <= 1e-12
    return CriterionResult(10, "spin-qubit-transfer", ok and elapsed < 30.0, {
        "fidelity_qubit_2x3": qubit_23.fidelity,
        "fidelity_qubit_2x2": qubit_22.fidelity,
        "fidelity_entangled_2x3": ent_23.fidelity,
        "fidelity_entangled_2x2": ent_22.fidelity,
        "worst_spin_L_commutator": worst_comm,
        "runtime_ok": float(elapsed < 30.0),
    })


def _all_dims_up_to(extent_lo, extent_hi):
    for m in range(extent_lo, extent_hi + 1):
        yield (m,)
    for m in range(extent_lo, extent_hi + 1):
        for n in range(extent_lo, extent_hi + 1):
            yield (m, n)
    for m in range(extent_lo, extent_hi + 1):
        for n in range(extent_lo, extent_hi + 1):
            for k in range(extent_lo, extent_hi + 1):
                yield (m, n, k)


def criterion_11_dressing() -> CriterionResult:
    theta = 0.7
    worst_closed = 0.0
    for dims in _all_dims_up_to(2, 6):
        d = as_dims(dims)
        hx = sum(quasi_L(d, a, "x").operator.matrix for a in range(d.n_axes))
        hy = sum(quasi_L(d, a, "y").operator.matrix for a in range(d.n_axes))
        w = lz_dressing_unitary(d, theta)
        dressed = dress(np.asarray(hx), w).matrix
        worst_closed = max(worst_closed, float(
            np.abs(dressed - (np.cos(theta) * hx + np.sin(theta) * hy)).max()))
    f = PolynomialFunction.linear()
    anchors = [ModeIndex((1, 1))]
    worst_equal = 0.0
    for seed in (101, 102, 103, 104, 105):
        spec = DressingSpec.generic(random_unitary(8, seed))
        for t in (0.4, 1.1, T0):
            dressed = dressed_transfer_check((2, 4), spec, f, anchors, t, Js=(1.0, 1.0))
            undressed = function_transfer_check((2, 4), BOSON, f, anchors, t, Js=(1.0, 1.0))
            worst_equal = max(worst_equal, abs(dressed.fidelity - undressed.fidelity))
    lz_rep = dressed_transfer_check((3, 3), DressingSpec.lz(theta), f, anchors, T0)
    ok = worst_closed <= 1e-10 and worst_equal <= 1e-10 and lz_rep.fidelity >= 1 - 1e-8
    return CriterionResult(11, "dressing-family", ok, {
        "worst_lz_closed_form": worst_closed,
        "worst_dressed_vs_undressed": worst_equal,
        "lz_fidelity_3x3": lz_rep.fidelity,
        "lz_fitted_phase_re": lz_rep.phase.real,
        "lz_fitted_phase_im": lz_rep.phase.imag,
        "lz_stated_phase_re": lz_rep.stated_phase.real,
        "lz_stated_phase_im": lz_rep.stated_phase.imag,
    })


CRITERIA = (
    criterion_1_1d_transfer,
    criterion_2_2d_mirror,
    criterion_3_3d_mirror,
    criterion_4_signature_interference,
    criterion_5_commutation,
    criterion_6_wigner,
    criterion_7_function_transfer,
    criterion_8_no_initialization,
    criterion_9_hardcore_equivalence,
    criterion_10_spin_transfer,
    criterion_11_dressing,
)


def run_all(echo=None) -> list[CriterionResult]:
    """Run every criterion, optionally echoing one line per result."""
    results = []
    for crit in CRITERIA:
        result = crit()
        results.append(result)
        if echo is not None:
            echo(result.line())
    return results
