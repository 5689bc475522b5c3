"""Unramified genuine characters, their reducibility data and the
pairing-side dimension formulas for the constituents of I(chi).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
import sympy

from .covering import ModuliSpace, Orbit, lattice_coords
from .kltheory import ClassFunction, induce, inner_product, kl_data, sign
from .rootdata import Root, all_subsets


class CharacterError(ValueError):
    """Raised when a requested character cannot be constructed."""


class NotCellUnion(RuntimeError):
    """W_Gamma is not a union of right cells."""


# ---------------------------------------------------------------------------
# character values and characters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CharValue:
    """q^{q_exp} * exp(2 pi i * phase), phase taken mod 1."""

    q_exp: Fraction
    phase: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "q_exp", Fraction(self.q_exp))
        object.__setattr__(self, "phase", Fraction(self.phase) % 1)

    def __mul__(self, other: "CharValue") -> "CharValue":
        return CharValue(self.q_exp + other.q_exp, self.phase + other.phase)

    def __pow__(self, k: int) -> "CharValue":
        return CharValue(self.q_exp * k, self.phase * k)

    def inverse(self) -> "CharValue":
        return self ** -1

    def is_one(self) -> bool:
        return self.q_exp == 0 and self.phase == 0

    def __str__(self) -> str:
        s = f"q^{self.q_exp}"
        return s if self.phase == 0 else f"{s}*e(2pi i {self.phase})"

    def numeric(self, q: float) -> complex:
        return complex(q ** float(self.q_exp) * np.exp(2j * np.pi * float(self.phase)))


ONE = CharValue(Fraction(0))
Q_INV = CharValue(Fraction(-1))
Q_VAL = CharValue(Fraction(1))


@dataclass(frozen=True)
class GenuineCharacter:
    """Homomorphism Y_{Q,n} -> values, given on the echelon basis of Y_{Q,n}."""

    moduli: ModuliSpace
    values: tuple[CharValue, ...]

    def __post_init__(self):
        if len(self.values) != len(self.moduli.H):
            raise CharacterError(f"expected {len(self.moduli.H)} basis values, got {len(self.values)}")

    def __call__(self, z: Sequence[int]) -> CharValue:
        c = lattice_coords(z, self.moduli.H)
        out = ONE
        for ci, v in zip(c, self.values):
            out = out * v ** ci
        return out

    def act(self, w: int) -> "GenuineCharacter":
        """^w chi (z) = chi(w^{-1} z)."""
        W = self.moduli.W
        winv = W[W.inverse(w)]
        return GenuineCharacter(self.moduli, tuple(self(winv.act(h)) for h in self.moduli.H))

    def at_coroot(self, beta: Root) -> CharValue:
        """chi(n_beta beta^vee)."""
        return self(self.moduli.cov.scaled_coroot(beta))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GenuineCharacter) and other.values == self.values \
            and other.moduli is self.moduli

    def __hash__(self) -> int:
        return hash(self.values)

    def flat(self) -> "GenuineCharacter":
        """chi^flat = ^{w_G} chi."""
        return self.act(self.moduli.W.longest)

    def q_exponents(self) -> tuple[Fraction, ...]:
        return tuple(v.q_exp for v in self.values)


def character_from_values(m: ModuliSpace, values: Iterable) -> GenuineCharacter:
    vals = []
    for v in values:
        if isinstance(v, CharValue):
            vals.append(v)
        elif isinstance(v, dict):
            vals.append(CharValue(Fraction(v.get("q_exp", 0)), Fraction(v.get("phase", 0))))
        else:
            vals.append(CharValue(Fraction(v[0]), Fraction(v[1])))
    return GenuineCharacter(m, tuple(vals))


def phi_chi(chi: GenuineCharacter) -> list[Root]:
    """Roots beta with chi(n_beta beta^vee) = q^{-1} exactly."""
    return [b for b in chi.moduli.datum.all_roots if chi.at_coroot(b) == Q_INV]


def is_regular(chi: GenuineCharacter) -> bool:
    W = chi.moduli.W
    reg = all(chi.act(w) != chi for w in range(len(W)) if w != W.identity)
    if reg:
        # a derived consequence, asserted as a consistency check
        assert all(not chi.at_coroot(b).is_one() for b in chi.moduli.datum.all_roots)
    return reg


def _primes(start: int):
    p = start
    while True:
        if all(p % d for d in range(2, int(p ** 0.5) + 1)):
            yield p
        p += 1


def exceptional_character(m: ModuliSpace, phi0: Iterable[int], denominator: int = 7,
                          max_tries: int = 50) -> GenuineCharacter:
    """A regular character with Phi(chi) equal to the given simple roots (0-based indices).

    The q-exponent of chi(n_alpha alpha^vee) is -1 on the chosen simple roots;
    the other simple roots and any remaining directions of Y_{Q,n} get distinct
    primes over ``denominator``.  Phases are zero.
    """
    datum = m.datum
    phi0 = sorted(set(phi0))
    if any(i < 0 or i >= datum.rank for i in phi0):
        raise CharacterError(f"simple root indices out of range: {phi0}")
    H = m.H
    rows = [lattice_coords(m.cov.scaled_coroot(datum.simple_root(i)), H) for i in range(datum.rank)]
    N = sympy.Matrix(rows)
    # complete to a square nonsingular system with unit rows
    d = len(H)
    for j in range(d):
        if N.rank() == d:
            break
        cand = N.col_join(sympy.Matrix([[int(k == j) for k in range(d)]]))
        if cand.rank() > N.rank():
            N = cand
    if N.rank() != d or N.shape[0] != d:
        raise CharacterError("internal: the simple n_alpha alpha^vee are not independent")
    primes = _primes(11)
    for _ in range(max_tries):
        targets = []
        for i in range(d):
            if i < datum.rank and i in phi0:
                targets.append(Fraction(-1))
            else:
                targets.append(Fraction(next(primes), denominator))
        sol = N.LUsolve(sympy.Matrix([sympy.Rational(t.numerator, t.denominator) for t in targets]))
        vals = tuple(CharValue(Fraction(int(sympy.fraction(v)[0]), int(sympy.fraction(v)[1])))
                     for v in sol)
        chi = GenuineCharacter(m, vals)
        got = sorted(b.index for b in phi_chi(chi))
        want = sorted(datum.simple_root(i).index for i in phi0)
        if got == want and is_regular(chi):
            return chi
    raise CharacterError("could not find a generic regular character")


# ---------------------------------------------------------------------------
# constituents
# ---------------------------------------------------------------------------

@dataclass
class Constituent:
    S: frozenset[int]                 # indices (Root.index) of S_Gamma inside Phi(chi)
    W_Gamma: tuple[int, ...]
    W_op: tuple[int, ...]
    label: str
    is_plus: bool
    is_minus: bool
    sigma: ClassFunction | None = None

    def __repr__(self) -> str:
        return f"Constituent({self.label}, |W_Gamma|={len(self.W_Gamma)})"


def _S_of(chi_roots: Sequence[Root], W, w: int) -> frozenset[int]:
    winv = W[W.inverse(w)]
    datum = W.datum
    return frozenset(b.index for b in chi_roots if not datum.is_positive_coroot(winv.act(b.coroot)))


def constituents(chi: GenuineCharacter, attach_sigma: bool = True) -> list[Constituent]:
    """One entry per nonempty W_Gamma, ordered by |S| then by root index."""
    m = chi.moduli
    W = m.W
    roots = phi_chi(chi)
    groups: dict[frozenset[int], list[int]] = {}
    for w in range(len(W)):
        groups.setdefault(_S_of(roots, W, w), []).append(w)
    simple_idx = {m.datum.simple_root(i).index: i for i in range(m.datum.rank)}
    in_delta = all(b.index in simple_idx for b in roots)
    kl = kl_data(W) if attach_sigma and in_delta else None
    out = []
    wG = W.longest
    plus_S = _S_of(roots, W, W.identity)
    minus_S = _S_of(roots, W, wG)
    for S in sorted(groups, key=lambda s: (len(s), sorted(s))):
        WG = tuple(groups[S])
        op = tuple(sorted(W.mul(w, wG) for w in WG))
        if S == plus_S:
            label = "Gamma+"
        elif S == minus_S:
            label = "Gamma-"
        else:
            label = "S={" + ",".join(_root_label(m, i, simple_idx) for i in sorted(S)) + "}"
        c = Constituent(S, WG, op, label, S == plus_S, S == minus_S)
        if kl is not None:
            c.sigma = sigma_gamma(kl, WG, label)
        out.append(c)
    return out


def _root_label(m: ModuliSpace, idx: int, simple_idx: dict[int, int]) -> str:
    if idx in simple_idx:
        return f"a{simple_idx[idx] + 1}"
    return f"r{idx}"


def sigma_gamma(kl, W_Gamma: Sequence[int], label: str = "") -> ClassFunction:
    members = set(W_Gamma)
    total = None
    covered = set()
    for cell in kl.right_cells:
        inside = members.intersection(cell)
        if not inside:
            continue
        if len(inside) != len(cell):
            raise NotCellUnion(f"W_Gamma for {label} is not a union of right cells")
        rep = kl.cell_representation(cell)
        total = rep if total is None else total + rep
        covered |= inside
    if covered != members:
        raise NotCellUnion(f"W_Gamma for {label} is not covered by right cells")
    return total.renamed(f"sigma[{label}]")


def constituent_by_S(cons: Sequence[Constituent], S: Iterable[int]) -> Constituent:
    S = frozenset(S)
    return next(c for c in cons if c.S == S)


def parabolic_plus(chi: GenuineCharacter, S_simple: Iterable[int]) -> tuple[int, ...]:
    """W_{Gamma_S^natural} = w_S * R_S for S given by simple-root indices."""
    W = chi.moduli.W
    S = list(S_simple)
    wS = W.parabolic_longest(S)
    return tuple(sorted(W.mul(wS, r) for r in W.minimal_coset_reps(S)))


# ---------------------------------------------------------------------------
# dimensions
# ---------------------------------------------------------------------------

def sigma_x(m: ModuliSpace, orbit: Orbit | None = None) -> ClassFunction:
    """Permutation character of W on X_{Q,n} (or on a single orbit)."""
    vals = m.permutation_character(orbit)
    name = "sigma_X" if orbit is None else f"sigma_X^{orbit.representative}"
    return ClassFunction(m.W, tuple(range(len(m.W))), tuple(Fraction(v) for v in vals), name)


@dataclass
class DimResult:
    value: int
    status: str


def whittaker_dim(gamma: Constituent, m: ModuliSpace, orbit: Orbit | None = None) -> DimResult:
    """<sigma_X^y, sigma_Gamma> with a status flag."""
    if gamma.sigma is None:
        raise NotCellUnion("sigma_Gamma is only attached when Phi(chi) lies in Delta")
    val = inner_product(sigma_x(m, orbit), gamma.sigma)
    if val.denominator != 1 or val < 0:
        raise RuntimeError(f"pairing is not a nonnegative integer: {val}")
    if orbit is None:
        status = "theorem-backed" if m.is_persistent() else "conjecture"
    elif gamma.is_plus or gamma.is_minus or (orbit.singleton and orbit.persistent):
        status = "theorem-backed" if orbit.persistent else "conjecture"
    else:
        status = "verified-by-scattering"
    return DimResult(int(val), status)


def whittaker_dim_total(gamma: Constituent, m: ModuliSpace) -> int:
    total = sum(whittaker_dim(gamma, m, o).value for o in m.orbits())
    direct = whittaker_dim(gamma, m).value
    if total != direct:
        raise RuntimeError("orbit decomposition of sigma_X is inconsistent")
    return direct


def coarse_dim(chi: GenuineCharacter, S: Iterable[int], orbit: Orbit | None = None) -> int:
    """Inclusion-exclusion over S <= S' <= Phi(chi) of <sigma_X^y, Ind_{W(S')} eps>.

    ``S`` is given by Root indices and Phi(chi) must consist of simple roots.
    """
    m = chi.moduli
    W = m.W
    roots = phi_chi(chi)
    simple_idx = {m.datum.simple_root(i).index: i for i in range(m.datum.rank)}
    if not all(b.index in simple_idx for b in roots):
        raise NotCellUnion("the inclusion-exclusion formula needs Phi(chi) inside Delta")
    S = frozenset(S)
    full = sorted(b.index for b in roots)
    sx = sigma_x(m, orbit)
    total = Fraction(0)
    for Sp in all_subsets(full):
        if not S <= set(Sp):
            continue
        simp = [simple_idx[i] for i in Sp]
        ind = induce(sign(W, simp), simp)
        total += (-1) ** (len(Sp) - len(S)) * inner_product(sx, ind)
    if total.denominator != 1:
        raise RuntimeError("inclusion-exclusion gave a non-integer")
    return int(total)


def f_helper(d: int) -> int:
    """1 for odd d and 4 for even d."""
    return 1 if d % 2 else 4


def asymptotic_ratio(dim: int, moduli_size: int, W_order: int, sigma_degree: int) -> Fraction:
    """dim / ((|X| / |W|) * dim sigma_Gamma)."""
    return Fraction(dim) / (Fraction(moduli_size, W_order) * sigma_degree)


# ---------------------------------------------------------------------------
# Gindikin-Karpelevich coefficients and predicates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GKCoefficient:
    """prod over factors x of (1 - q^{-1} x) / (1 - x)."""

    factors: tuple[CharValue, ...]

    @property
    def is_zero(self) -> bool:
        return any(x == Q_VAL for x in self.factors)

    @property
    def has_pole(self) -> bool:
        return any(x.is_one() for x in self.factors)

    def value(self, q: float = 9.0) -> complex:
        out = 1 + 0j
        for x in self.factors:
            v = x.numeric(q)
            out *= (1 - v / q) / (1 - v)
        return out

    def sympy(self, q=None):
        q = q if q is not None else sympy.Symbol("q", positive=True)
        out = sympy.Integer(1)
        for x in self.factors:
            v = q ** sympy.Rational(x.q_exp.numerator, x.q_exp.denominator) * \
                sympy.exp(2 * sympy.pi * sympy.I * sympy.Rational(x.phase.numerator, x.phase.denominator))
            out *= (1 - v / q) / (1 - v)
        return out


def inversion_set(W, w: int) -> list[Root]:
    """Phi_w = {alpha > 0 : w(alpha) < 0}."""
    el = W[w]
    datum = W.datum
    return [b for b in datum.positive_roots if not datum.is_positive_coroot(el.act(b.coroot))]


def gk_coefficient(w: int, chi: GenuineCharacter) -> GKCoefficient:
    W = chi.moduli.W
    c = GKCoefficient(tuple(chi.at_coroot(b) for b in inversion_set(W, w)))
    if c.has_pole:
        raise CharacterError("Gindikin-Karpelevich pole: the character is not regular")
    return c


def two_side_factors(w: int, chi: GenuineCharacter) -> tuple[CharValue, ...]:
    """chi(n_alpha w(alpha^vee)) for alpha > 0; a factor equal to q kills the product."""
    m = chi.moduli
    el = m.W[w]
    return tuple(chi(el.act(m.cov.scaled_coroot(b))) for b in m.datum.positive_roots)


def two_side_vanishes(w: int, chi: GenuineCharacter) -> bool:
    """Whether prod_{alpha > 0} (1 - q^{-1} chi(n_alpha w(alpha^vee))) is zero."""
    return any(x == Q_VAL for x in two_side_factors(w, chi))


def meets_negative_chamber(w: int, chi: GenuineCharacter) -> bool:
    """Phi(chi)^vee meets w(Phi_-^vee)."""
    W = chi.moduli.W
    return bool(_S_of(phi_chi(chi), W, w))


def jacquet_sets(chi: GenuineCharacter, w1: int, w2: int) -> tuple[list[int], list[int]]:
    """(W^T, W - W^T) for T spanning Hom(I(^{w1^-1}chi), I(^{w2^-1}chi))."""
    m = chi.moduli
    W = m.W
    datum = m.datum

    def side(w, b):
        return 1 if datum.is_positive_coroot(W[W.inverse(w)].act(b.coroot)) else -1

    roots = phi_chi(chi)
    walls = [b for b in roots if side(w1, b) * side(w2, b) < 0]
    WT = [w for w in range(len(W)) if any(side(w1, b) * side(w, b) > 0 for b in walls)]
    rest = [w for w in range(len(W)) if w not in set(WT)]
    return WT, rest


@dataclass
class Predicates:
    square_integrable: bool
    tempered: bool
    unramified: bool


def constituent_predicates(gamma: Constituent, chi: GenuineCharacter) -> Predicates:
    m = chi.moduli
    roots = phi_chi(chi)
    sq = len(roots) == m.datum.rank and gamma.is_plus
    # q-exponent of chi must vanish on {y in Y_{Q,n} : <y, alpha> = 0 for alpha in Phi(chi)}
    H = m.H
    if roots:
        A = sympy.Matrix([[b.pair(h) for b in roots] for h in H]).T
        ker = A.nullspace()
    else:
        ker = [sympy.Matrix([int(i == j) for i in range(len(H))]) for j in range(len(H))]
    unitary = True
    for v in ker:
        e = sum((sympy.Rational(val.q_exp.numerator, val.q_exp.denominator) * v[i]
                 for i, val in enumerate(chi.values)), sympy.Integer(0))
        if e != 0:
            unitary = False
    return Predicates(sq, gamma.is_plus and unitary, gamma.is_minus)


def orbit_count(m: ModuliSpace, simple: Iterable[int]) -> int:
    """Number of W(S)-orbits on X_{Q,n}."""
    return len(m.orbits(simple))


def free_orbit_count(m: ModuliSpace) -> int:
    return sum(1 for o in m.orbits() if o.free)
