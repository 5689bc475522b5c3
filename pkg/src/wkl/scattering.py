"""Scattering matrices of intertwining operators on Whittaker functionals.

Gauss sums are handled formally: ``GaussMonomial`` carries a sign, a power
of q, a power of xi, a root-of-unity phase and a multiset of g(k) factors,
and ``canonicalize`` applies the relations

    g(k) = -q^{-1}                for n | k,
    g(k) g(n - k) = xi^k q^{-1}   for 0 < k < n.

Matrices are built over an arithmetic backend: ``ExactBackend`` works in a
rational function field in t = q^{1/L} and one indeterminate per residue
pair, ``NumericBackend`` instantiates q and random unit phases, and
``SymbolicBackend`` produces sympy expressions for display.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
import sympy
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

from .covering import ModuliSpace, Orbit
from .whittaker import CharValue, Constituent, GenuineCharacter, CharacterError


class NotPersistent(RuntimeError):
    """The d-function does not descend to the orbit."""


class UnstableRank(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Gauss monomials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaussMonomial:
    """sign * q^q_exp * xi^xi_exp * e(phase) * prod g(k)^e."""

    sign: int = 1
    q_exp: Fraction = Fraction(0)
    xi_exp: int = 0
    phase: Fraction = Fraction(0)
    g: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "q_exp", Fraction(self.q_exp))
        object.__setattr__(self, "phase", Fraction(self.phase) % 1)
        object.__setattr__(self, "xi_exp", self.xi_exp % 2)
        if self.sign not in (-1, 0, 1):
            raise ValueError("sign must be -1, 0 or 1")

    @classmethod
    def gauss(cls, k: int, e: int = 1) -> "GaussMonomial":
        return cls(g=((k, e),))

    @classmethod
    def from_value(cls, v: CharValue) -> "GaussMonomial":
        return cls(q_exp=v.q_exp, phase=v.phase)

    @classmethod
    def xi_power(cls, e: int) -> "GaussMonomial":
        return cls(xi_exp=e)

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    def __mul__(self, other: "GaussMonomial") -> "GaussMonomial":
        if self.is_zero or other.is_zero:
            return ZERO
        g: dict[int, int] = {}
        for k, e in self.g + other.g:
            g[k] = g.get(k, 0) + e
        return GaussMonomial(self.sign * other.sign, self.q_exp + other.q_exp,
                             self.xi_exp + other.xi_exp, self.phase + other.phase,
                             tuple(sorted((k, e) for k, e in g.items() if e)))

    def __pow__(self, m: int) -> "GaussMonomial":
        if self.is_zero:
            if m < 0:
                raise ZeroDivisionError("zero monomial")
            return ONE if m == 0 else ZERO
        return GaussMonomial(self.sign ** (m % 2) if self.sign == -1 else 1, self.q_exp * m,
                             self.xi_exp * m, self.phase * m,
                             tuple((k, e * m) for k, e in self.g if e * m))

    def inverse(self) -> "GaussMonomial":
        return self ** -1

    def __neg__(self) -> "GaussMonomial":
        return GaussMonomial(-self.sign, self.q_exp, self.xi_exp, self.phase, self.g)

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        if self.q_exp:
            parts.append(f"q^{self.q_exp}")
        if self.xi_exp:
            parts.append("xi")
        if self.phase:
            parts.append(f"e({self.phase})")
        for k, e in self.g:
            parts.append(f"g({k})" + (f"^{e}" if e != 1 else ""))
        body = "*".join(parts) or "1"
        return ("-" if self.sign < 0 else "") + body


ONE = GaussMonomial()
ZERO = GaussMonomial(sign=0)


def canonicalize(m: GaussMonomial, n: int) -> GaussMonomial:
    """Normal form: g-keys in 1..n-1, at most one key per pair {k, n-k},
    nonnegative exponents, exponent 0 or 1 on k = n/2, xi dropped for odd n."""
    if m.is_zero:
        return ZERO
    sign, q_exp, xi_exp = m.sign, m.q_exp, m.xi_exp
    acc: dict[int, int] = {}
    for k, e in m.g:
        r = k % n
        if r == 0:
            if e % 2:
                sign = -sign
            q_exp -= e
        else:
            acc[r] = acc.get(r, 0) + e
    out: dict[int, int] = {}
    for k in range(1, n // 2 + 1):
        if 2 * k == n:
            a, b = divmod(acc.get(k, 0), 2)
            # g(h)^2 = xi^h q^{-1}
            xi_exp += a * k
            q_exp -= a
            if b:
                out[k] = 1
            continue
        ek, ec = acc.get(k, 0), acc.get(n - k, 0)
        # g(n-k)^ec = (xi^k q^{-1})^ec g(k)^{-ec}
        xi_exp += k * ec
        q_exp -= ec
        net = ek - ec
        if net > 0:
            out[k] = net
        elif net < 0:
            # g(k)^{-m} = g(n-k)^m xi^{km} q^m
            out[n - k] = -net
            xi_exp += k * -net
            q_exp += -net
    if n % 2:
        xi_exp = 0
    return GaussMonomial(sign, q_exp, xi_exp, m.phase,
                         tuple(sorted((k, e) for k, e in out.items() if e)))


# ---------------------------------------------------------------------------
# arithmetic backends
# ---------------------------------------------------------------------------

class Backend:
    n: int
    xi: int

    def mono(self, m: GaussMonomial):
        raise NotImplementedError

    @property
    def zero(self):
        return self.mono(ZERO)

    @property
    def one(self):
        return self.mono(ONE)

    def is_zero(self, a) -> bool:
        return a == self.zero


def _half(n: int) -> int | None:
    return n // 2 if n % 2 == 0 else None


class ExactBackend(Backend):
    """Rational functions over Q(zeta) in t = q^{1/L} and u_k = g(k) for 2k < n.

    g(n/2) is the constant half_sign * sqrt(xi^{n/2}) * t^{-L/2}.
    """

    def __init__(self, n: int, xi: int = 1, L: int = 2, phase_order: int = 1, half_sign: int = 1):
        if L % 2:
            raise ValueError("L must be even")
        self.n, self.xi, self.L, self.half_sign = n, xi, L, half_sign
        h = _half(n)
        need_i = h is not None and xi == -1 and h % 2 == 1
        N = math.lcm(phase_order, 4 if need_i else 1)
        self.N = N
        if N <= 2:
            base = QQ
            self._zeta = None
        else:
            zeta = sympy.I if N == 4 else sympy.exp(2 * sympy.pi * sympy.I / N)
            base = QQ.algebraic_field(zeta)
            self._zeta = base.from_sympy(zeta)
        self.t = sympy.Symbol("t")
        self.keys = [k for k in range(1, n) if 2 * k < n]
        self.u = {k: sympy.Symbol(f"u{k}") for k in self.keys}
        self.K = base.frac_field(self.t, *[self.u[k] for k in self.keys])
        gens = self.K.gens
        self._t = gens[0]
        self._u = {k: gens[i + 1] for i, k in enumerate(self.keys)}
        if self._zeta is not None:
            self._zeta = self.K.convert(self._zeta, base)
        elif N == 2:
            self._zeta = self.K.convert(-1)
        sq = self.K.one
        if need_i:
            sq = self._zeta ** (N // 4)
        self._ghalf = self.K.convert(half_sign) * sq * self._t ** (-(L // 2)) if h is not None else None

    def mono(self, m: GaussMonomial):
        K = self.K
        if m.is_zero:
            return K.zero
        m = canonicalize(m, self.n)
        e = m.q_exp * self.L
        if e.denominator != 1:
            raise ValueError(f"q-exponent {m.q_exp} needs a finer root of q than 1/{self.L}")
        out = K.convert(m.sign * self.xi ** m.xi_exp) * self._t ** int(e)
        if m.phase:
            p = m.phase * self.N
            if p.denominator != 1 or self._zeta is None:
                raise ValueError(f"phase {m.phase} is not a power of the chosen root of unity")
            out = out * self._zeta ** int(p)
        for k, ex in m.g:
            if 2 * k == self.n:
                out = out * self._ghalf ** ex
            elif 2 * k < self.n:
                out = out * self._u[k] ** ex
            else:
                out = out * (K.convert(self.xi ** ((self.n - k) % 2)) * self._t ** (-self.L)
                             / self._u[self.n - k]) ** ex
        return out

    def rank(self, rows: Sequence[Sequence]) -> int:
        if not rows or not rows[0]:
            return 0
        return DomainMatrix([list(r) for r in rows], (len(rows), len(rows[0])), self.K).rank()

    def to_sympy(self, a):
        return self.K.to_sympy(a)


class NumericBackend(Backend):
    """q a fixed number, g(k) = q^{-1/2} e^{i theta_k} with random theta."""

    def __init__(self, n: int, xi: int = 1, q: float = 9.0, seed: int = 0):
        self.n, self.xi, self.q = n, xi, float(q)
        rng = np.random.default_rng(seed)
        self.g = {}
        for k in range(1, n):
            if 2 * k < n:
                self.g[k] = self.q ** -0.5 * np.exp(2j * np.pi * rng.random())
        for k in range(1, n):
            if 2 * k > n:
                self.g[k] = xi ** ((n - k) % 2) / self.q / self.g[n - k]
        h = _half(n)
        if h is not None:
            sign = 1 if rng.random() < 0.5 else -1
            sq = 1 if xi ** h == 1 else 1j
            self.g[h] = sign * sq * self.q ** -0.5

    def mono(self, m: GaussMonomial) -> complex:
        if m.is_zero:
            return 0j
        m = canonicalize(m, self.n)
        out = complex(m.sign * self.xi ** m.xi_exp) * self.q ** float(m.q_exp)
        if m.phase:
            out *= np.exp(2j * np.pi * float(m.phase))
        for k, e in m.g:
            out *= self.g[k] ** e
        return out

    def is_zero(self, a) -> bool:
        return a == 0

    def rank(self, rows: Sequence[Sequence[complex]], tol: float = 1e-8,
             scale: float | None = None) -> tuple[int, bool]:
        return gauss_rank(np.array(rows, dtype=complex), tol, scale)


class SymbolicBackend(Backend):
    """sympy expressions in q, xi and g_k (k < n/2, plus g_{n/2}) for display."""

    def __init__(self, n: int, xi: int | None = None):
        self.n, self.xi = n, xi
        self.q = sympy.Symbol("q", positive=True)
        self.xis = sympy.Symbol("xi") if xi is None else sympy.Integer(xi)
        self.g = {k: sympy.Symbol(f"g{k}") for k in range(1, n) if 2 * k <= n}

    def mono(self, m: GaussMonomial):
        if m.is_zero:
            return sympy.Integer(0)
        m = canonicalize(m, self.n)
        out = m.sign * self.xis ** m.xi_exp * self.q ** sympy.Rational(m.q_exp.numerator, m.q_exp.denominator)
        if m.phase:
            out *= sympy.exp(2 * sympy.pi * sympy.I * sympy.Rational(m.phase.numerator, m.phase.denominator))
        for k, e in m.g:
            if 2 * k <= self.n:
                out *= self.g[k] ** e
            else:
                out *= (self.xis ** ((self.n - k) % 2) / (self.q * self.g[self.n - k])) ** e
        return out

    def tidy(self, expr):
        expr = sympy.expand(expr)
        h = _half(self.n)
        if h is not None:
            expr = expr.subs(self.g[h] ** 2, self.xis ** h / self.q)
        return sympy.factor(sympy.expand(expr))


def gauss_rank(A: np.ndarray, tol: float = 1e-8, scale: float | None = None) -> tuple[int, bool]:
    """Rank by Gaussian elimination with partial pivoting.

    A pivot is accepted when its modulus exceeds ``tol * scale``; ``scale``
    defaults to the largest entry but should be the size of the terms that
    were summed to form the matrix, so that cancelled entries read as zero.
    The second value flags pivots that were rejected while still being well
    above round-off.
    """
    A = np.array(A, dtype=complex)
    if A.size == 0:
        return 0, False
    if scale is None:
        scale = np.abs(A).max()
    if scale == 0:
        return 0, False
    rows, cols = A.shape
    r = 0
    unstable = False
    for c in range(cols):
        if r == rows:
            break
        p = r + int(np.argmax(np.abs(A[r:, c])))
        mag = abs(A[p, c])
        if mag <= tol * scale:
            if mag > 1e-12 * scale:
                unstable = True
            continue
        A[[r, p]] = A[[p, r]]
        A[r + 1:] -= np.outer(A[r + 1:, c] / A[r, c], A[r])
        r += 1
    if r < rows:
        rest = np.abs(A[r:]).max() if A[r:].size else 0.0
        if tol * scale >= rest > 1e-12 * scale:
            unstable = True
    return r, unstable


# ---------------------------------------------------------------------------
# transversals and scattering matrices
# ---------------------------------------------------------------------------

class Transversal:
    """An ordered set of representatives of X_{Q,n} in Y."""

    def __init__(self, m: ModuliSpace, reps: Sequence[Sequence[int]] | None = None):
        self.m = m
        self.reps = [tuple(int(v) for v in r) for r in (m.reps if reps is None else reps)]
        self._pos = {}
        for i, r in enumerate(self.reps):
            key = m.reduce(r)
            if key in self._pos:
                raise ValueError("representatives are not distinct modulo Y_{Q,n}")
            self._pos[key] = i
        if len(self._pos) != len(m):
            raise ValueError("representatives do not cover X_{Q,n}")

    def __len__(self) -> int:
        return len(self.reps)

    def locate(self, v: Sequence[int]) -> tuple[int, tuple[int, ...]]:
        i = self._pos[self.m.reduce(v)]
        return i, tuple(int(a) - b for a, b in zip(v, self.reps[i]))

    def indices(self, orbit: Orbit) -> list[int]:
        return [self._pos[self.m.reduce(y)] for y in orbit.elements]


def _mat_zero(B: Backend, r: int, c: int):
    z = B.zero
    return [[z for _ in range(c)] for _ in range(r)]


def matmul(B: Backend, X, Y):
    Z = _mat_zero(B, len(X), len(Y[0]))
    for i, row in enumerate(X):
        for k, a in enumerate(row):
            if B.is_zero(a):
                continue
            Yk = Y[k]
            Zi = Z[i]
            for j, b in enumerate(Yk):
                if not B.is_zero(b):
                    Zi[j] = Zi[j] + a * b
    return Z


def identity(B: Backend, size: int):
    M = _mat_zero(B, size, size)
    for i in range(size):
        M[i][i] = B.one
    return M


def tau_parts(chi: GenuineCharacter, i: int, y: Sequence[int], T: Transversal):
    """Rank-one data at the column with lattice representative y.

    Returns (k, x, row, mono): tau^1 sits on the diagonal with
    (1 - q^{-1}) x^k / (1 - x), tau^2 sits at ``row`` with monomial ``mono``.
    """
    m = chi.moduli
    cov = m.cov
    alpha = m.datum.simple_root(i)
    na = cov.n_alpha(alpha)
    x = chi.at_coroot(alpha)
    if x.is_one():
        raise CharacterError("tau^1 denominator vanishes: the character is not regular")
    pair = alpha.pair(y)
    k = -((-pair) // na)
    s = m.W.gen(i)
    row, z = T.locate(m.twisted(s, y))
    yr = pair - 1
    r = T.reps[row]
    wchi_z = chi(m.W[s].act(z))
    mono = (GaussMonomial.xi_power(cov.Dform(r, z))
            * GaussMonomial.from_value(wchi_z)
            * GaussMonomial.xi_power(yr * cov.Dform(y, alpha.coroot))
            * GaussMonomial.gauss(yr * cov.Q(alpha.coroot)))
    return k, x, row, canonicalize(mono, cov.n)


def tau_rank_one(B: Backend, chi: GenuineCharacter, i: int, row: int, col: int,
                 T: Transversal | None = None):
    """The single entry tau(w_alpha, chi, s_{y1}, s_y)."""
    T = T or Transversal(chi.moduli)
    k, x, r2, mono = tau_parts(chi, i, T.reps[col], T)
    out = B.zero
    if row == col:
        X = GaussMonomial.from_value(x)
        out = out + (B.one - B.mono(GaussMonomial(q_exp=-1))) * B.mono(X ** k) / (B.one - B.mono(X))
    if row == r2:
        out = out + B.mono(mono)
    return out


def rank_one_matrix(B: Backend, chi: GenuineCharacter, i: int, T: Transversal | None = None):
    T = T or Transversal(chi.moduli)
    size = len(T)
    M = _mat_zero(B, size, size)
    X = GaussMonomial.from_value(chi.at_coroot(chi.moduli.datum.simple_root(i)))
    geo = (B.one - B.mono(GaussMonomial(q_exp=-1))) / (B.one - B.mono(X))
    for col, y in enumerate(T.reps):
        k, _, row, mono = tau_parts(chi, i, y, T)
        M[col][col] = M[col][col] + geo * B.mono(X ** k)
        M[row][col] = M[row][col] + B.mono(mono)
    return M


def scattering_matrix(B: Backend, w: int, chi: GenuineCharacter, T: Transversal | None = None,
                      word: Sequence[int] | None = None, magnitude: bool = False):
    """Matrix of T(w, chi)^*: rows are target classes, columns source classes.

    For w = s_{i_1} ... s_{i_k} this is the product over j of the rank-one
    matrices at the character ^{s_{i_{j+1}} ... s_{i_k}} chi.
    """
    m = chi.moduli
    W = m.W
    T = T or Transversal(m)
    word = tuple(W[w].word if word is None else word)
    if W.from_word(word) != w or len(word) != W.length(w):
        raise ValueError("word is not a reduced word of w")
    chars = []
    cur = chi
    for i in reversed(word):
        chars.append(cur)
        cur = cur.act(W.gen(i))
    chars.reverse()
    M = identity(B, len(T))
    mag = np.eye(len(T))
    for i, c in zip(word, chars):
        R = rank_one_matrix(B, c, i, T)
        M = matmul(B, M, R)
        if magnitude:
            mag = mag @ np.abs(np.array(R, dtype=complex))
    return (M, mag) if magnitude else M


def block(M, idx: Sequence[int]):
    return [[M[i][j] for j in idx] for i in idx]


def off_block_zero(B: Backend, M, groups: Sequence[Sequence[int]]) -> bool:
    where = {}
    for g, idx in enumerate(groups):
        for i in idx:
            where[i] = g
    return all(B.is_zero(M[i][j]) for i in range(len(M)) for j in range(len(M))
               if where[i] != where[j])


# ---------------------------------------------------------------------------
# ranks
# ---------------------------------------------------------------------------

@dataclass
class RankResult:
    rank: int
    status: str            # "exact", "stable", "unstable", "sign-dependent"
    votes: tuple[int, ...] = ()


def _char_scales(chi: GenuineCharacter) -> tuple[int, int]:
    L = 2
    N = 1
    for v in chi.values:
        L = math.lcm(L, v.q_exp.denominator)
        N = math.lcm(N, v.phase.denominator)
    return L, N


def exact_backends(chi: GenuineCharacter) -> list[ExactBackend]:
    cov = chi.moduli.cov
    L, N = _char_scales(chi)
    signs = (1, -1) if cov.n % 2 == 0 else (1,)
    return [ExactBackend(cov.n, cov.xi, L, N, s) for s in signs]


def numeric_backends(chi: GenuineCharacter, q: float = 9.0, seeds: int = 5) -> list[NumericBackend]:
    cov = chi.moduli.cov
    return [NumericBackend(cov.n, cov.xi, q, s) for s in range(seeds)]


def operator_rank(chi: GenuineCharacter, w: int, orbit: Orbit | None = None, mode: str = "exact",
                  q: float = 9.0, seeds: int = 5, T: Transversal | None = None) -> RankResult:
    """Rank of T(w, chi)^*, restricted to an orbit block when given."""
    T = T or Transversal(chi.moduli)
    idx = list(range(len(T))) if orbit is None else T.indices(orbit)
    if mode == "exact":
        ranks = []
        for B in exact_backends(chi):
            ranks.append(B.rank(block(scattering_matrix(B, w, chi, T), idx)))
        status = "exact" if len(set(ranks)) == 1 else "sign-dependent"
        return RankResult(max(ranks), status, tuple(ranks))
    if mode == "numeric":
        votes = []
        flagged = False
        for B in numeric_backends(chi, q, seeds):
            M, mag = scattering_matrix(B, w, chi, T, magnitude=True)
            sub = np.array(block(mag.tolist(), idx))
            r, bad = B.rank(block(M, idx), scale=float(sub.max()) if sub.size else 0.0)
            votes.append(r)
            flagged |= bad
        best = max(set(votes), key=lambda r: (votes.count(r), -r))
        status = "stable" if len(set(votes)) == 1 and not flagged else "unstable"
        return RankResult(best, status, tuple(votes))
    raise ValueError(f"unknown mode {mode!r}")


def image_operator(gamma: Constituent, chi: GenuineCharacter, w: int | None = None,
                   w1: int | None = None) -> tuple[int, GenuineCharacter]:
    """(u, chi') with Im T(u, chi') = pi_Gamma: u = w^{-1} w1, chi' = ^{w1^{-1}} chi."""
    W = chi.moduli.W
    w = gamma.W_Gamma[0] if w is None else w
    w1 = W.mul(w, W.longest) if w1 is None else w1
    if w not in gamma.W_Gamma or w1 not in gamma.W_op:
        raise ValueError("w must lie in W_Gamma and w1 in W_Gamma w_G")
    return W.mul(W.inverse(w), w1), chi.act(W.inverse(w1))


def constituent_rank(gamma: Constituent, chi: GenuineCharacter, orbit: Orbit | None = None,
                     mode: str = "exact", w: int | None = None, w1: int | None = None,
                     **kw) -> RankResult:
    u, c = image_operator(gamma, chi, w, w1)
    return operator_rank(c, u, orbit, mode, **kw)


# ---------------------------------------------------------------------------
# d-function and the Steinberg vector
# ---------------------------------------------------------------------------

def d_simple(m: ModuliSpace, i: int, y: Sequence[int]) -> GaussMonomial:
    cov = m.cov
    alpha = m.datum.simple_root(i)
    na = cov.n_alpha(alpha)
    pair = alpha.pair(y)
    k = -((-pair) // na)
    yr = pair - 1
    mono = (GaussMonomial(sign=-1, q_exp=-k)
            * GaussMonomial.xi_power(yr * cov.Dform(y, alpha.coroot))
            * GaussMonomial.gauss(yr * cov.Q(alpha.coroot), -1))
    return canonicalize(mono, cov.n)


def d_function(m: ModuliSpace, w: int, y: Sequence[int], word: Sequence[int] | None = None) -> GaussMonomial:
    """d(w, y) = prod_j d(w_{i_j}, w_{i_{j-1}} ... w_{i_1}[y]) for w = w_{i_k} ... w_{i_1}."""
    W = m.W
    word = tuple(W[w].word if word is None else word)
    if W.from_word(word) != w:
        raise ValueError("word does not represent w")
    out = ONE
    cur = tuple(y)
    for i in reversed(word):
        out = out * d_simple(m, i, cur)
        cur = m.twisted(W.gen(i), cur)
    return canonicalize(out, m.cov.n)


def d_braid_consistent(m: ModuliSpace, y: Sequence[int]) -> bool:
    """All reduced words give the same d(w, y), and d is a cocycle for all pairs."""
    W = m.W
    n = m.cov.n
    vals = {}
    for w in range(len(W)):
        words = W.reduced_words(w)
        ds = {d_function(m, w, y, wd) for wd in words}
        if len(ds) != 1:
            return False
        vals[w] = ds.pop()
    for w1 in range(len(W)):
        for w2 in range(len(W)):
            lhs = d_function(m, W.mul(w1, w2), y)
            rhs = canonicalize(d_function(m, w1, m.twisted(w2, y)) * vals[w2], n)
            if lhs != rhs:
                return False
    return True


def covariance(m: ModuliSpace, chi: GenuineCharacter, r: Sequence[int], z: Sequence[int]) -> GaussMonomial:
    """xi^{D(r, z)} chi(z)."""
    return GaussMonomial.xi_power(m.cov.Dform(r, z)) * GaussMonomial.from_value(chi(z))


def two_c_check(chi_flat: GenuineCharacter, r: Sequence[int], i: int,
                T: Transversal | None = None) -> bool:
    """Class-level form of d(w_a, w_a[y]) d(w_a, y) = 1 at the representative r."""
    m = chi_flat.moduli
    n = m.cov.n
    T = T or Transversal(m)
    s = m.W.gen(i)
    row, z1 = T.locate(m.twisted(s, r))
    r1 = T.reps[row]
    if row == T.locate(r)[0] and tuple(r1) == tuple(r):
        lhs = d_simple(m, i, r)
        rhs = covariance(m, chi_flat, r, z1)
    else:
        z2 = tuple(-v for v in m.W[s].act(z1))
        lhs = d_simple(m, i, r1) * d_simple(m, i, r)
        rhs = covariance(m, chi_flat, r, z2) * covariance(m, chi_flat, r1, z1)
    return canonicalize(lhs, n) == canonicalize(rhs, n)


def steinberg_basis(chi: GenuineCharacter, orbit: Orbit, T: Transversal | None = None) -> dict[int, GaussMonomial]:
    """Coefficients c on the orbit (transversal index -> monomial) with c(rep) = 1.

    Propagates c(s_{r'}) = d(w_a, r) c(s_r) / (xi^{D(r', z)} chi_flat(z)) along
    simple reflections, where w_a[r] = r' + z, and raises NotPersistent when
    two paths disagree.
    """
    m = chi.moduli
    n = m.cov.n
    T = T or Transversal(m)
    flat = chi.flat()
    start = T.locate(orbit.representative)[0]
    c = {start: ONE}
    queue = deque([start])
    while queue:
        j = queue.popleft()
        r = T.reps[j]
        for i in range(m.datum.rank):
            row, z = T.locate(m.twisted(m.W.gen(i), r))
            pred = canonicalize(d_simple(m, i, r) * c[j] * covariance(m, flat, T.reps[row], z).inverse(), n)
            if row in c:
                if c[row] != pred:
                    raise NotPersistent(f"orbit of {orbit.representative} is not persistent")
            else:
                c[row] = pred
                queue.append(row)
    return c


def steinberg_kernel_check(chi: GenuineCharacter, orbit: Orbit, B: Backend,
                           T: Transversal | None = None) -> bool:
    """c^T M(w_a, ^{w_a} chi_flat) = 0 on the orbit block for every simple a."""
    m = chi.moduli
    T = T or Transversal(m)
    c = steinberg_basis(chi, orbit, T)
    flat = chi.flat()
    idx = T.indices(orbit)
    vec = [B.mono(c[j]) for j in idx]
    for i in range(m.datum.rank):
        M = block(rank_one_matrix(B, flat.act(m.W.gen(i)), i, T), idx)
        for col in range(len(idx)):
            s = B.zero
            for a, row in zip(vec, M):
                s = s + a * row[col]
            if not B.is_zero(s):
                return False
    return True


def theta_kernel_dim(chi: GenuineCharacter, orbit: Orbit, B: Backend | None = None,
                     T: Transversal | None = None) -> int:
    """dim of the joint left kernel of M(w_a, ^{w_a} chi)_O over simple a."""
    m = chi.moduli
    T = T or Transversal(m)
    B = B or exact_backends(chi)[0]
    idx = T.indices(orbit)
    blocks = [block(rank_one_matrix(B, chi.act(m.W.gen(i)), i, T), idx) for i in range(m.datum.rank)]
    wide = [sum((blk[r] for blk in blocks), []) for r in range(len(idx))]
    rank = B.rank(wide)
    if isinstance(rank, tuple):
        rank = rank[0]
    return len(idx) - rank


def change_transversal(B: Backend, M, T_old: Transversal, T_new: Transversal,
                       chi_src: GenuineCharacter, chi_tgt: GenuineCharacter):
    """Entries of the same operator on new representatives of the same classes.

    With s_{r + z} = xi^{D(r, z)} s_r s_z and the rule
    tau(g z, g' z') = chi_tgt(z)^{-1} tau(g, g') chi_src(z').
    """
    m = T_old.m
    n = m.cov.n
    size = len(T_old)
    shift = []
    for i in range(size):
        j, z = T_old.locate(T_new.reps[i])
        if j != i:
            raise ValueError("transversals must list the classes in the same order")
        shift.append(z)
    out = _mat_zero(B, size, size)
    for i in range(size):
        row_f = canonicalize(GaussMonomial.xi_power(m.cov.Dform(T_old.reps[i], shift[i]))
                             * GaussMonomial.from_value(chi_tgt(shift[i])).inverse(), n)
        for j in range(size):
            if B.is_zero(M[i][j]):
                continue
            col_f = canonicalize(GaussMonomial.xi_power(m.cov.Dform(T_old.reps[j], shift[j]))
                                 * GaussMonomial.from_value(chi_src(shift[j])), n)
            out[i][j] = M[i][j] * B.mono(row_f) * B.mono(col_f)
    return out


def composition_product(B: Backend, chi: GenuineCharacter, i: int, T: Transversal | None = None):
    """M(w_a, chi) M(w_a, ^{w_a} chi): the matrix of T(w_a, chi) o T(w_a, ^{w_a} chi) dualised."""
    T = T or Transversal(chi.moduli)
    return matmul(B, rank_one_matrix(B, chi, i, T),
                  rank_one_matrix(B, chi.act(chi.moduli.W.gen(i)), i, T))


def gk_element(B: Backend, coeff) -> object:
    """A Gindikin-Karpelevich coefficient as a backend element."""
    out = B.one
    qinv = B.mono(GaussMonomial(q_exp=-1))
    for x in coeff.factors:
        X = B.mono(GaussMonomial.from_value(x))
        out = out * (B.one - qinv * X) / (B.one - X)
    return out
