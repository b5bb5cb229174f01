"""Exact dynamics in fixed-particle-number Fock sectors.

Statistics: ``boson``, ``fermion`` (spinless or spin-1/2), and ``hardcore``
(occupancy-capped bosons without exchange signs, i.e. the Pauli raising
operator substitution).

Canonical mode order: sites in flattening order, spin-up before spin-down
within a site.  Fermionic signs come from exact occupancy-parity counting
in that order; no Jordan-Wigner string is ever attached, which is what
keeps the construction valid in two and three dimensions.  Mixed-degree
states (e.g. a + b*x) are held as direct sums over number sectors, which
the hopping Hamiltonian never couples.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from .lattice import (
    LatticeDims,
    LatticeError,
    UnsupportedSizeError,
    as_dims,
    coupling_profile,
    magnetic_number,
    mirror_site,
)
from .dynamics import (
    DenseOperator,
    HERMITIAN_TOL,
    _resolve_profiles,
    as_matrix,
)

BOSON = "boson"
FERMION = "fermion"
HARDCORE = "hardcore"
_STATISTICS = (BOSON, FERMION, HARDCORE)

SPIN_UP = "up"
SPIN_DOWN = "down"

MAX_BASIS_DIM = 200_000
MAX_EIGH_DIM = 4000

OccupationState = tuple  # occupancy per mode, canonical order


class DegenerateFunctionError(ValueError):
    """The operator polynomial annihilates the vacuum entirely."""


@dataclass(frozen=True)
class ModeIndex:
    """One creation-operator slot: a site plus an optional spin label."""

    site: tuple
    spin: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "site", tuple(int(c) for c in self.site))
        if self.spin not in (None, SPIN_UP, SPIN_DOWN):
            raise ValueError(f"spin must be None, {SPIN_UP!r} or {SPIN_DOWN!r}")

    def mirrored(self, dims) -> "ModeIndex":
        return ModeIndex(site=mirror_site(self.site, dims), spin=self.spin)


@dataclass(frozen=True, eq=False)
class FockBasis:
    """Deterministic fixed-number basis, occupancies in descending lex order.

    Descending order fills the earliest modes first, so the n = 1 sector
    coincides with the single-particle site ordering (basis state k puts
    the particle in mode k).
    """

    dims: LatticeDims
    statistics: str
    spinful: bool
    n_total: int
    occupancies: np.ndarray = field(repr=False)
    _tuples: tuple = field(repr=False)
    _index: dict = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self._tuples)

    @property
    def n_modes(self) -> int:
        return self.occupancies.shape[1]

    def state_at(self, i: int) -> OccupationState:
        return self._tuples[i]

    def index_of(self, occ) -> int:
        return self._index[tuple(occ)]

    def mode_position(self, mode: ModeIndex) -> int:
        if (mode.spin is not None) != self.spinful:
            raise ValueError(
                f"mode {mode} has spin={mode.spin!r} but basis spinful={self.spinful}")
        flat = self.dims.flat_index(mode.site)
        if not self.spinful:
            return flat
        return 2 * flat + (0 if mode.spin == SPIN_UP else 1)

    def modes(self) -> list[ModeIndex]:
        out = []
        for site in self.dims.sites():
            if self.spinful:
                out.append(ModeIndex(site, SPIN_UP))
                out.append(ModeIndex(site, SPIN_DOWN))
            else:
                out.append(ModeIndex(site))
        return out


def _sector_dimension(n_modes: int, statistics: str, n_total: int) -> int:
    if statistics == BOSON:
        return comb(n_modes + n_total - 1, n_total) if n_total >= 0 else 0
    return comb(n_modes, n_total)


@lru_cache(maxsize=None)
def _enumerate_cached(extents: tuple, statistics: str, spinful: bool, n_total: int) -> FockBasis:
    dims = LatticeDims(extents)
    n_modes = dims.n_sites * (2 if spinful else 1)
    cap = n_total if statistics == BOSON else 1
    expected = _sector_dimension(n_modes, statistics, n_total)
    if expected > MAX_BASIS_DIM:
        raise UnsupportedSizeError(
            f"sector dimension {expected} exceeds the cap {MAX_BASIS_DIM}")

    states: list[tuple] = []
    occ = [0] * n_modes

    def fill(pos: int, left: int):
        if pos == n_modes - 1:
            if left <= cap:
                occ[pos] = left
                states.append(tuple(occ))
                occ[pos] = 0
            return
        for k in range(min(cap, left), -1, -1):
            occ[pos] = k
            fill(pos + 1, left - k)
        occ[pos] = 0

    if n_modes == 0:
        if n_total == 0:
            states.append(())
    else:
        fill(0, n_total)
    if len(states) != expected:
        raise AssertionError(f"basis enumeration produced {len(states)}, expected {expected}")
    arr = np.array(states, dtype=np.int16).reshape(len(states), n_modes)
    return FockBasis(dims=dims, statistics=statistics, spinful=spinful, n_total=n_total,
                     occupancies=arr, _tuples=tuple(states),
                     _index={s: i for i, s in enumerate(states)})


def enumerate_basis(dims, statistics: str, spinful: bool, n_total: int) -> FockBasis:
    """Fixed-number basis over the lattice's modes, ascending lex order."""
    if statistics not in _STATISTICS:
        raise ValueError(f"statistics must be one of {_STATISTICS}, got {statistics!r}")
    if n_total < 0:
        raise ValueError(f"particle number must be >= 0, got {n_total}")
    return _enumerate_cached(as_dims(dims).extents, statistics, bool(spinful), int(n_total))


def apply_creation(occ, mode: int, statistics: str):
    """Apply a creation operator at canonical mode position ``mode``.

    Returns (new occupancies, amplitude factor); factor 0 flags an
    annihilated state (Pauli blocking).
    """
    occ = tuple(occ)
    n = occ[mode]
    if statistics == BOSON:
        factor = np.sqrt(n + 1.0)
    elif statistics == FERMION:
        if n:
            return occ, 0.0
        factor = -1.0 if (sum(occ[:mode]) % 2) else 1.0
    elif statistics == HARDCORE:
        if n:
            return occ, 0.0
        factor = 1.0
    else:
        raise ValueError(f"unknown statistics {statistics!r}")
    return occ[:mode] + (n + 1,) + occ[mode + 1:], factor


def apply_annihilation(occ, mode: int, statistics: str):
    occ = tuple(occ)
    n = occ[mode]
    if n == 0:
        return occ, 0.0
    if statistics == BOSON:
        factor = np.sqrt(float(n))
    elif statistics == FERMION:
        factor = -1.0 if (sum(occ[:mode]) % 2) else 1.0
    elif statistics == HARDCORE:
        factor = 1.0
    else:
        raise ValueError(f"unknown statistics {statistics!r}")
    return occ[:mode] + (n - 1,) + occ[mode + 1:], factor


def build_one_body(basis: FockBasis, coeff: np.ndarray) -> DenseOperator:
    """Second-quantize sum_ab coeff[a,b] * c_a^dag c_b in the sector."""
    coeff = np.asarray(coeff, dtype=complex)
    if coeff.shape != (basis.n_modes, basis.n_modes):
        raise ValueError(f"coefficient matrix must be {basis.n_modes} square")
    dim = basis.dim
    out = np.zeros((dim, dim), dtype=complex)
    # diagonal part: number operators
    out[np.arange(dim), np.arange(dim)] = basis.occupancies @ np.diag(coeff)
    pairs = [(a, b) for a in range(basis.n_modes) for b in range(basis.n_modes)
             if a != b and coeff[a, b] != 0]
    fermionic = basis.statistics == FERMION
    for col, occ in enumerate(basis._tuples):
        for a, b in pairs:
            nb = occ[b]
            if nb == 0:
                continue
            na = occ[a]
            if basis.statistics == BOSON:
                factor = np.sqrt(nb * (na + 1.0))
            elif na:  # fermion or hardcore with target occupied
                continue
            elif fermionic:
                sign_b = sum(occ[:b])
                sign_a = sum(occ[:a]) - (1 if a > b else 0)
                factor = -1.0 if (sign_a + sign_b) % 2 else 1.0
            else:
                factor = 1.0
            new = list(occ)
            new[b] -= 1
            new[a] += 1
            out[basis._index[tuple(new)], col] += coeff[a, b] * factor
    role = "hermitian" if np.abs(coeff - coeff.conj().T).max() <= HERMITIAN_TOL else "general"
    return DenseOperator(out, role=role)


def _bond_list(dims: LatticeDims, axis: int):
    """Directed bonds (site, neighbor, j) along one axis, j the axis coordinate."""
    for site in dims.sites():
        j = site[axis]
        if j < dims.extents[axis]:
            neighbor = site[:axis] + (j + 1,) + site[axis + 1:]
            yield site, neighbor, j


def _spin_positions(basis: FockBasis, site) -> list[int]:
    if basis.spinful:
        return [basis.mode_position(ModeIndex(site, SPIN_UP)),
                basis.mode_position(ModeIndex(site, SPIN_DOWN))]
    return [basis.mode_position(ModeIndex(site))]


def build_hopping(basis: FockBasis, Js=None, profiles=None) -> DenseOperator:
    """Nearest-neighbor hopping -sum J_a C_j (c^dag c + h.c.), spin independent."""
    dims = basis.dims
    profs = _resolve_profiles(dims, Js, profiles)
    coeff = np.zeros((basis.n_modes, basis.n_modes), dtype=complex)
    for axis, prof in enumerate(profs):
        for site, neighbor, j in _bond_list(dims, axis):
            w = prof.values[j - 1]
            for m1, m2 in zip(_spin_positions(basis, site), _spin_positions(basis, neighbor)):
                coeff[m1, m2] -= w
                coeff[m2, m1] -= w
    return build_one_body(basis, coeff)


def build_quasi_L_fock(basis: FockBasis, axis: int, component: str) -> DenseOperator:
    """Second-quantized quasi-angular-momentum component for one axis."""
    dims = basis.dims
    if not 0 <= axis < dims.n_axes:
        raise LatticeError(f"axis {axis} outside 0..{dims.n_axes - 1}")
    coeff = np.zeros((basis.n_modes, basis.n_modes), dtype=complex)
    if component == "z":
        for site in dims.sites():
            m = float(magnetic_number(site[axis], dims.extents[axis]))
            for pos in _spin_positions(basis, site):
                coeff[pos, pos] += m
    elif component in ("x", "y"):
        c = coupling_profile(dims.extents[axis], 1.0).values
        for site, neighbor, j in _bond_list(dims, axis):
            w = c[j - 1]
            for m1, m2 in zip(_spin_positions(basis, site), _spin_positions(basis, neighbor)):
                if component == "x":
                    coeff[m1, m2] += w
                    coeff[m2, m1] += w
                else:
                    coeff[m1, m2] += 1j * w
                    coeff[m2, m1] -= 1j * w
    else:
        raise ValueError(f"component must be x, y or z, got {component!r}")
    return build_one_body(basis, coeff)


def build_onsite_repulsion(basis: FockBasis, strength: float) -> DenseOperator:
    """Diagonal strength * sum_sites n(n-1); bosonic bases only."""
    if basis.statistics != BOSON:
        raise ValueError("on-site repulsion is defined for bosonic bases only")
    occ = basis.occupancies.astype(float)
    if basis.spinful:
        occ = occ[:, 0::2] + occ[:, 1::2]
    diag = strength * (occ * (occ - 1.0)).sum(axis=1)
    return DenseOperator(np.diag(diag.astype(complex)), role="hermitian")


def build_total_spin(basis: FockBasis, component: str) -> DenseOperator:
    """Total spin component summed over sites; requires a spinful basis."""
    if not basis.spinful:
        raise ValueError("total spin needs a spinful basis")
    coeff = np.zeros((basis.n_modes, basis.n_modes), dtype=complex)
    for site in basis.dims.sites():
        u = basis.mode_position(ModeIndex(site, SPIN_UP))
        d = basis.mode_position(ModeIndex(site, SPIN_DOWN))
        if component == "x":
            coeff[u, d] += 0.5
            coeff[d, u] += 0.5
        elif component == "y":
            coeff[u, d] += -0.5j
            coeff[d, u] += 0.5j
        elif component == "z":
            coeff[u, u] += 0.5
            coeff[d, d] -= 0.5
        else:
            raise ValueError(f"component must be x, y or z, got {component!r}")
    return build_one_body(basis, coeff)


@dataclass(frozen=True)
class PolynomialFunction:
    """Operator polynomial: terms (coefficient, powers-per-variable).

    Variables are abstract slots bound to concrete modes when the
    polynomial is applied; within a monomial the lower slot is the
    leftmost operator factor.
    """

    terms: tuple

    def __post_init__(self):
        terms = tuple((complex(c), tuple(int(p) for p in powers))
                      for c, powers in self.terms)
        if not terms:
            raise ValueError("polynomial needs at least one term")
        for _, powers in terms:
            if any(p < 0 for p in powers):
                raise ValueError("powers must be nonnegative")
        object.__setattr__(self, "terms", terms)

    @property
    def n_vars(self) -> int:
        return max((len(p) for _, p in self.terms), default=0)

    def degrees(self) -> set[int]:
        return {sum(p) for _, p in self.terms}

    def product(self, other: "PolynomialFunction") -> "PolynomialFunction":
        """f*g over disjoint variable sets; g's variables are appended after f's."""
        shift = self.n_vars
        combined = []
        for cf, pf in self.terms:
            pf = pf + (0,) * (shift - len(pf))
            for cg, pg in other.terms:
                combined.append((cf * cg, pf + pg))
        return PolynomialFunction(tuple(combined))

    @classmethod
    def linear(cls, coeff: complex = 1.0) -> "PolynomialFunction":
        return cls(((coeff, (1,)),))


@dataclass(frozen=True)
class FockVector:
    basis: FockBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=complex)
        if v.shape != (self.basis.dim,):
            raise ValueError(f"need {self.basis.dim} amplitudes, got {v.shape}")
        object.__setattr__(self, "amplitudes", v)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class MultiSectorState:
    """Direct sum of fixed-number components, keyed by particle number."""

    sectors: dict

    def norm(self) -> float:
        return float(np.sqrt(sum(v.norm() ** 2 for v in self.sectors.values())))

    def normalized(self) -> "MultiSectorState":
        n = self.norm()
        if n == 0:
            raise DegenerateFunctionError("cannot normalize the zero state")
        return MultiSectorState(
            {k: FockVector(v.basis, v.amplitudes / n) for k, v in self.sectors.items()})


def state_from_function(dims, statistics: str, f: PolynomialFunction, anchors,
                        spinful: bool = False) -> MultiSectorState:
    """Apply the polynomial in the given creation operators to the vacuum.

    ``anchors`` binds variable slot i to anchors[i]; the result is
    normalized across all touched number sectors.
    """
    d = as_dims(dims)
    anchors = list(anchors)
    if len(anchors) < f.n_vars:
        raise ValueError(f"polynomial has {f.n_vars} variables, got {len(anchors)} anchors")
    sectors: dict[int, np.ndarray] = {}
    bases: dict[int, FockBasis] = {}
    for coeff, powers in f.terms:
        n = sum(powers)
        if n not in bases:
            bases[n] = enumerate_basis(d, statistics, spinful, n)
            sectors[n] = np.zeros(bases[n].dim, dtype=complex)
        basis = bases[n]
        occ = (0,) * basis.n_modes
        amp = coeff
        # rightmost operator factor acts first
        for var in reversed(range(len(powers))):
            pos = basis.mode_position(anchors[var])
            for _ in range(powers[var]):
                occ, factor = apply_creation(occ, pos, statistics)
                amp *= factor
                if amp == 0:
                    break
            if amp == 0:
                break
        if amp != 0:
            sectors[n][basis.index_of(occ)] += amp
    total = np.sqrt(sum(float(np.vdot(v, v).real) for v in sectors.values()))
    if total < 1e-12:
        raise DegenerateFunctionError("polynomial annihilates the vacuum")
    return MultiSectorState(
        {n: FockVector(bases[n], v / total) for n, v in sectors.items()})


def evolve_fock(state: FockVector, H, t: float) -> FockVector:
    """exp(-iHt) |state> by dense Hermitian eigendecomposition."""
    if state.basis.dim > MAX_EIGH_DIM:
        raise UnsupportedSizeError(
            f"dense eigensolve capped at {MAX_EIGH_DIM}, got {state.basis.dim}")
    h = as_matrix(H)
    if h.shape[0] != state.basis.dim:
        raise ValueError(f"operator dim {h.shape[0]} != basis dim {state.basis.dim}")
    if np.abs(h - h.conj().T).max() > HERMITIAN_TOL:
        raise ValueError("evolution needs a hermitian generator")
    w, v = np.linalg.eigh(h)
    return FockVector(state.basis,
                      (v * np.exp(-1j * t * w)) @ (v.conj().T @ state.amplitudes))


def _evolve_sectors(state: MultiSectorState, t: float, Js=None, profiles=None,
                    extra=None) -> MultiSectorState:
    out = {}
    for n, vec in state.sectors.items():
        h = build_hopping(vec.basis, Js, profiles).matrix
        if extra is not None:
            h = h + extra(vec.basis)
        out[n] = evolve_fock(vec, h, t)
    return MultiSectorState(out)


@dataclass(frozen=True)
class TransferReport:
    """Outcome of a phase-fitted transfer comparison.

    ``fidelity`` maximizes the overlap with one free unit phase per number
    sector; ``phase`` is the fitted per-particle phase and ``residual`` the
    worst deviation of the sector phases from phase**n.
    """

    fidelity: float
    phase: complex
    residual: float
    sector_phases: dict


def fit_transfer(target: MultiSectorState, evolved: MultiSectorState) -> TransferReport:
    overlaps = {}
    for n, vec in evolved.sectors.items():
        if n in target.sectors:
            overlaps[n] = complex(np.vdot(target.sectors[n].amplitudes, vec.amplitudes))
        else:
            overlaps[n] = 0.0 + 0.0j
    fidelity = float(sum(abs(o) for o in overlaps.values()))
    phases = {n: o / abs(o) for n, o in overlaps.items() if abs(o) > 1e-12}
    nonzero = sorted(n for n in phases if n > 0)
    if not nonzero:
        return TransferReport(fidelity=fidelity, phase=1.0 + 0.0j, residual=0.0,
                              sector_phases=phases)
    n0 = nonzero[0]
    base = phases[n0] ** (1.0 / n0)
    best_phase, best_residual = base, float("inf")
    for k in range(n0):
        cand = base * cmath.exp(2j * cmath.pi * k / n0)
        residual = max(abs(phases[n] - cand ** n) for n in phases)
        if residual < best_residual:
            best_phase, best_residual = cand, residual
    return TransferReport(fidelity=fidelity, phase=best_phase, residual=best_residual,
                          sector_phases=phases)


def function_transfer_check(dims, statistics: str, f: PolynomialFunction, anchors,
                            t: float, Js=None, profiles=None,
                            spinful: bool = False) -> TransferReport:
    """Evolve f(anchors)|0> and compare with f at the mirrored anchors."""
    d = as_dims(dims)
    d.require_transfer_extents()
    anchors = list(anchors)
    initial = state_from_function(d, statistics, f, anchors, spinful)
    target = state_from_function(d, statistics, f,
                                 [m.mirrored(d) for m in anchors], spinful)
    evolved = _evolve_sectors(initial, t, Js, profiles)
    return fit_transfer(target, evolved)


def no_init_transfer_check(dims, statistics: str, f: PolynomialFunction, f_anchors,
                           g: PolynomialFunction, g_anchors, t: float,
                           Js=None, spinful: bool = False) -> TransferReport:
    """Transfer of f with arbitrary occupied interior content g; supports must be disjoint."""
    d = as_dims(dims)
    basis0 = enumerate_basis(d, statistics, spinful, 0)
    f_pos = {basis0.mode_position(m) for m in f_anchors}
    g_pos = {basis0.mode_position(m) for m in g_anchors}
    if f_pos & g_pos:
        raise ValueError("function and interior supports overlap")
    combined = f.product(g)
    return function_transfer_check(d, statistics, combined,
                                   list(f_anchors) + list(g_anchors), t, Js,
                                   spinful=spinful)


def qubit_transfer_check(dims, amplitudes, source, t: float, Js=None) -> TransferReport:
    """Transfer of the general on-site state a + b*up^dag + c*down^dag + d*up^dag*down^dag."""
    a, b, c, dd = (complex(x) for x in amplitudes)
    norm = abs(a) ** 2 + abs(b) ** 2 + abs(c) ** 2 + abs(dd) ** 2
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"on-site amplitudes must be normalized, got |.|^2 = {norm}")
    f = PolynomialFunction(((a, ()), (b, (1,)), (c, (0, 1)), (dd, (1, 1))))
    d = as_dims(dims)
    anchors = [ModeIndex(d.check_site(source), SPIN_UP),
               ModeIndex(d.check_site(source), SPIN_DOWN)]
    return function_transfer_check(d, FERMION, f, anchors, t, Js, spinful=True)


def entangled_transfer_check(dims, beta, gamma, t: float, Js=None) -> TransferReport:
    """Transfer of beta|00> + gamma|11> encoded on the two sites (1,1) and (1,2)."""
    d = as_dims(dims)
    if d.n_axes < 2 or d.extents[1] < 2:
        raise LatticeError("entangled-pair transfer needs a second axis of extent >= 2")
    beta, gamma = complex(beta), complex(gamma)
    if abs(abs(beta) ** 2 + abs(gamma) ** 2 - 1.0) > 1e-9:
        raise ValueError("pair amplitudes must be normalized")
    first = (1,) * d.n_axes
    second = first[:1] + (2,) + first[2:]
    f = PolynomialFunction(((beta, (1, 0, 1, 0)), (gamma, (0, 1, 0, 1))))
    anchors = [ModeIndex(first, SPIN_UP), ModeIndex(first, SPIN_DOWN),
               ModeIndex(second, SPIN_UP), ModeIndex(second, SPIN_DOWN)]
    return function_transfer_check(d, FERMION, f, anchors, t, Js, spinful=True)


@dataclass(frozen=True)
class HardcoreEquivalenceReport:
    fidelity: float
    max_deviation: float
    report: TransferReport


def hardcore_equivalence_check(dims, t: float, alpha=0.0, beta=1.0,
                               strengths=(0.0, 10.0, 50.0), Js=None) -> HardcoreEquivalenceReport:
    """On-site repulsion of any strength acts as zero on <=1-occupancy states.

    Evolves alpha|0> + beta*b(1,1)^dag|0> with the repulsion added at each
    strength, reports the worst amplitude deviation from the strength-0
    evolution and the (phase-fitted) fidelity of transfer to the mirror.
    """
    d = as_dims(dims)
    d.require_transfer_extents()
    alpha, beta = complex(alpha), complex(beta)
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1.0) > 1e-9:
        raise ValueError("superposition amplitudes must be normalized")
    f = PolynomialFunction(((alpha, ()), (beta, (1,))))
    corner = (1,) * d.n_axes
    initial = state_from_function(d, BOSON, f, [ModeIndex(corner)])
    target = state_from_function(d, BOSON, f, [ModeIndex(mirror_site(corner, d))])
    evolutions = []
    for s in strengths:
        extra = (lambda basis, s=s: build_onsite_repulsion(basis, s).matrix)
        evolutions.append(_evolve_sectors(initial, t, Js, extra=extra))
    baseline = _evolve_sectors(initial, t, Js)
    deviation = 0.0
    worst_fid = None
    for ev in evolutions:
        for n, vec in ev.sectors.items():
            deviation = max(deviation, float(
                np.abs(vec.amplitudes - baseline.sectors[n].amplitudes).max()))
        rep = fit_transfer(target, ev)
        if worst_fid is None or rep.fidelity < worst_fid.fidelity:
            worst_fid = rep
    return HardcoreEquivalenceReport(fidelity=worst_fid.fidelity,
                                     max_deviation=deviation, report=worst_fid)
