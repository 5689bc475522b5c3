"""Covering data (Q, D, n), the lattices Y_{Q,n} and Y_{Q,n}^{sc}, the finite
moduli space X_{Q,n} = Y / Y_{Q,n} with its twisted Weyl action, orbit
classification and the dual root datum.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import sympy

from .rootdata import RootDatum, RootDatumError, build_root_datum

Vector = tuple[int, ...]


class CoveringError(ValueError):
    """Raised for invalid covering data (e.g. Q not Weyl-invariant)."""


# ---------------------------------------------------------------------------
# integer lattice utilities
# ---------------------------------------------------------------------------

def hermite_rows(M: Sequence[Sequence[int]]) -> list[list[int]]:
    """Row-style Hermite normal form: a row echelon basis of the row lattice.

    Pivots are positive and entries above each pivot are reduced into
    ``[0, pivot)``.  Zero rows are dropped.
    """
    rows = [list(map(int, r)) for r in M if any(int(v) for v in r)]
    if not rows:
        return []
    ncols = len(rows[0])
    out: list[list[int]] = []
    col = 0
    while rows and col < ncols:
        nz = [r for r in rows if r[col] != 0]
        if not nz:
            col += 1
            continue
        # Euclid on column `col` among the active rows.
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            piv = nz[0]
            for r in nz[1:]:
                q = r[col] // piv[col]
                for j in range(ncols):
                    r[j] -= q * piv[j]
            rows = [r for r in rows if any(r)]
            nz = [r for r in rows if r[col] != 0]
        piv = nz[0]
        rows.remove(piv)
        if piv[col] < 0:
            piv = [-v for v in piv]
        out.append(piv)
        col += 1
    # reduce entries above pivots
    for i, r in enumerate(out):
        c = next(j for j, v in enumerate(r) if v)
        for k in range(i):
            q = out[k][c] // r[c]
            if q:
                out[k] = [a - q * b for a, b in zip(out[k], r)]
    return out


def reduce_mod(y: Sequence[int], H: Sequence[Sequence[int]]) -> Vector:
    """Reduce ``y`` by the echelon basis ``H``; pivot coordinates land in [0, pivot)."""
    y = list(map(int, y))
    for r in H:
        c = next(j for j, v in enumerate(r) if v)
        q = y[c] // r[c]
        if q:
            y = [a - q * b for a, b in zip(y, r)]
    return tuple(y)


def in_lattice(y: Sequence[int], H: Sequence[Sequence[int]]) -> bool:
    return not any(reduce_mod(y, H))


def lattice_coords(y: Sequence[int], H: Sequence[Sequence[int]]) -> list[int]:
    """Integer coordinates of ``y`` on the echelon basis ``H`` (must be a member)."""
    y = list(map(int, y))
    coeffs = []
    for r in H:
        c = next(j for j, v in enumerate(r) if v)
        if y[c] % r[c]:
            raise ValueError("vector is not in the lattice")
        q = y[c] // r[c]
        coeffs.append(q)
        y = [a - q * b for a, b in zip(y, r)]
    if any(y):
        raise ValueError("vector is not in the lattice")
    return coeffs


def smith_normal_form(M: Sequence[Sequence[int]]):
    """Return (U, S, V) with U @ M @ V = S diagonal, U and V unimodular."""
    A = [list(map(int, r)) for r in M]
    m, n = len(A), len(A[0]) if A else 0
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(X, i, j):
        X[i], X[j] = X[j], X[i]

    def swap_cols(X, i, j):
        for row in X:
            row[i], row[j] = row[j], row[i]

    t = 0
    while t < min(m, n):
        entries = [(abs(A[i][j]), i, j) for i in range(t, m) for j in range(t, n) if A[i][j]]
        if not entries:
            break
        _, i, j = min(entries)
        swap_rows(A, t, i)
        swap_rows(U, t, i)
        swap_cols(A, t, j)
        swap_cols(V, t, j)
        done = False
        while not done:
            done = True
            for i in range(t + 1, m):
                q = A[i][t] // A[t][t]
                if q:
                    A[i] = [a - q * b for a, b in zip(A[i], A[t])]
                    U[i] = [a - q * b for a, b in zip(U[i], U[t])]
                if A[i][t]:
                    swap_rows(A, t, i)
                    swap_rows(U, t, i)
                    done = False
            for j in range(t + 1, n):
                q = A[t][j] // A[t][t]
                if q:
                    for row in A:
                        row[j] -= q * row[t]
                    for row in V:
                        row[j] -= q * row[t]
                if A[t][j]:
                    swap_cols(A, t, j)
                    swap_cols(V, t, j)
                    done = False
            if done:
                # divisibility: pivot must divide the remaining block
                bad = [(i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                       if A[i][j] % A[t][t]]
                if bad:
                    i, _ = bad[0]
                    A[t] = [a + b for a, b in zip(A[t], A[i])]
                    U[t] = [a + b for a, b in zip(U[t], U[i])]
                    done = False
        if A[t][t] < 0:
            A[t] = [-a for a in A[t]]
            U[t] = [-a for a in U[t]]
        t += 1
    return U, A, V


def kernel_mod(M: Sequence[Sequence[int]], n: int) -> list[list[int]]:
    """Echelon basis of {c in Z^k : M c = 0 mod n} for an integer m x k matrix M."""
    k = len(M[0])
    _, S, V = smith_normal_form(M)
    gens = []
    for j in range(k):
        s = S[j][j] if j < len(S) else 0
        step = n // math.gcd(n, s) if s else 1
        gens.append([step * V[i][j] for i in range(k)])
    return hermite_rows(gens)


# ---------------------------------------------------------------------------
# covering datum
# ---------------------------------------------------------------------------

@dataclass
class CoveringDatum:
    """A degree-n covering given by a Weyl-invariant quadratic form Q on Y."""

    datum: RootDatum
    B: np.ndarray          # symmetric Gram matrix of B_Q on the Y-basis
    n: int
    xi: int = 1
    D: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.B = np.asarray(self.B, dtype=np.int64)
        if self.n < 1:
            raise CoveringError("covering degree n must be positive")
        if self.B.shape != (self.datum.dim, self.datum.dim) or not np.array_equal(self.B, self.B.T):
            raise CoveringError("B_Q must be a symmetric matrix on the Y-basis")
        if np.any(np.diag(self.B) % 2):
            raise CoveringError("B_Q must have even diagonal so that Q is integral")
        for s in self.datum.simple_reflections:
            if not np.array_equal(s.T @ self.B @ s, self.B):
                raise CoveringError("Q is not Weyl-invariant")
        if self.xi not in (1, -1):
            raise CoveringError("xi must be +1 or -1")
        if self.n % 2 == 1 and self.xi != 1:
            raise CoveringError("xi must equal 1 for odd n")
        if self.D is None:
            D = np.triu(self.B, 1) + np.diag(np.diag(self.B) // 2)
            self.D = D
        self.D = np.asarray(self.D, dtype=np.int64)
        if not np.array_equal(self.D + self.D.T, self.B):
            raise CoveringError("bisector D must satisfy D + D^T = B_Q")

    # -- quadratic data -------------------------------------------------
    def Q(self, y: Sequence[int]) -> int:
        v = np.asarray(y, dtype=np.int64)
        return int(v @ self.B @ v) // 2

    def BQ(self, y1: Sequence[int], y2: Sequence[int]) -> int:
        return int(np.asarray(y1, dtype=np.int64) @ self.B @ np.asarray(y2, dtype=np.int64))

    def Dform(self, y1: Sequence[int], y2: Sequence[int]) -> int:
        return int(np.asarray(y1, dtype=np.int64) @ self.D @ np.asarray(y2, dtype=np.int64))

    def Q_coroot(self, beta) -> int:
        return self.Q(beta.coroot)

    def n_alpha(self, beta) -> int:
        """n_alpha = n / gcd(n, Q(alpha^vee))."""
        return self.n // math.gcd(self.n, self.Q(beta.coroot))

    def scaled_coroot(self, beta) -> Vector:
        m = self.n_alpha(beta)
        return tuple(m * v for v in beta.coroot)

    # -- lattices -------------------------------------------------------
    @cached_property
    def YQn(self) -> list[list[int]]:
        """Echelon basis of Y_{Q,n} = {y : B_Q(y, Y) in nZ}."""
        return kernel_mod(self.B.tolist(), self.n)

    @cached_property
    def YQn_sc(self) -> list[list[int]]:
        """Echelon basis of the span of {n_alpha alpha^vee}."""
        gens = [list(self.scaled_coroot(self.datum.simple_root(i))) for i in range(self.datum.rank)]
        return hermite_rows(gens)

    @cached_property
    def Ysc(self) -> list[list[int]]:
        return hermite_rows(self.datum.coroots.tolist())

    def derive_lattices(self) -> tuple[list[list[int]], list[list[int]]]:
        for v in self.YQn_sc:
            if not in_lattice(v, self.YQn):
                raise CoveringError("internal: Y_{Q,n}^{sc} is not inside Y_{Q,n}")
        return self.YQn, self.YQn_sc

    def is_saturated(self) -> bool:
        """Y_{Q,n} meets the coroot lattice exactly in Y_{Q,n}^{sc}."""
        C = self.datum.coroots  # rows
        # c-coordinates of coroot-lattice vectors y = C^T c lying in Y_{Q,n}
        M = (self.B @ C.T).tolist()
        inter_c = kernel_mod(M, self.n)
        inter = hermite_rows([list(np.asarray(c) @ C) for c in inter_c])
        return inter == hermite_rows(self.YQn_sc)

    # -- dual root datum ------------------------------------------------
    def dual_root_datum(self) -> "DualDatum":
        H = self.YQn
        rows = []
        for i in range(self.datum.rank):
            rows.append(lattice_coords(self.scaled_coroot(self.datum.simple_root(i)), H))
        # alpha / n_alpha as functionals on the Y_{Q,n}-basis
        funcs = []
        for i in range(self.datum.rank):
            b = self.datum.simple_root(i)
            m = self.n_alpha(b)
            vals = [b.pair(h) for h in H]
            if any(v % m for v in vals):
                raise CoveringError("internal: n_alpha does not divide <Y_{Q,n}, alpha>")
            funcs.append([v // m for v in vals])
        rd = RootDatum(f"{self.datum.label}[Q,n]", "dual", np.array(rows), np.array(funcs))
        return DualDatum(rd, hermite_rows(H) == hermite_rows(self.YQn_sc))


@dataclass
class DualDatum:
    """Root datum on Y_{Q,n} with simple coroots n_alpha alpha^vee."""

    datum: RootDatum
    adjoint: bool


def build_covering(label: str, rank: int | None = None, lattice: str = "sc",
                   Q: Sequence[int] | None = None, n: int = 1, xi: int = 1,
                   B_Q: Sequence[Sequence[int]] | None = None) -> CoveringDatum:
    """Covering from Q-values on the simple coroots (or a full B_Q matrix)."""
    try:
        datum = build_root_datum(label, rank, lattice)
    except RootDatumError as exc:
        raise CoveringError(str(exc)) from exc
    if B_Q is not None:
        B = np.asarray(B_Q, dtype=np.int64)
    else:
        if Q is None:
            raise CoveringError("either Q or B_Q must be given")
        B = gram_from_simple_Q(datum, Q)
    return CoveringDatum(datum, B, n, xi)


def gram_from_simple_Q(datum: RootDatum, Q: Sequence[int]) -> np.ndarray:
    """B_Q on the Y-basis from Q(alpha_i^vee), using B_Q(alpha^vee, y) = Q(alpha^vee) <y, alpha>."""
    if len(Q) != datum.rank:
        raise CoveringError(f"expected {datum.rank} Q-values, got {len(Q)}")
    C = datum.coroots
    if np.linalg.matrix_rank(C.astype(float)) < datum.dim:
        raise CoveringError("coroots do not span Y; give the full B_Q matrix")
    # B C^T = R where R[:, i] = Q_i * alpha_i (as a column functional)
    R = np.array([[Q[i] * datum.roots[i, k] for i in range(datum.rank)]
                  for k in range(datum.dim)], dtype=object)
    # the coroots span Y, so C is square and invertible over Q
    Bm = sympy.Matrix(R.tolist()) * sympy.Matrix(C.T.tolist()).inv()
    if any(not v.is_integer for v in Bm):
        raise CoveringError("Q-values do not give an integral form on this lattice")
    B = np.array(Bm.tolist(), dtype=np.int64)
    if not np.array_equal(B, B.T):
        raise CoveringError("Q-values are not Weyl-invariant (B_Q not symmetric)")
    return B


# ---------------------------------------------------------------------------
# moduli space and orbits
# ---------------------------------------------------------------------------

@dataclass
class Orbit:
    representative: Vector
    elements: tuple[Vector, ...]
    stabilizer: tuple[int, ...]
    stabilizer_sc: tuple[int, ...]
    group_order: int

    @property
    def free(self) -> bool:
        return len(self.stabilizer) == 1

    @property
    def singleton(self) -> bool:
        return len(self.elements) == 1

    @property
    def persistent(self) -> bool:
        return set(self.stabilizer) == set(self.stabilizer_sc)

    def __len__(self) -> int:
        return len(self.elements)


class ModuliSpace:
    """X_{Q,n} with a fixed transversal and the twisted Weyl action."""

    def __init__(self, cov: CoveringDatum):
        self.cov = cov
        self.datum = cov.datum
        self.W = cov.datum.weyl_group
        self.H = cov.YQn
        self.H_sc = cov.YQn_sc
        two_rho = [int(2 * r) for r in self.datum.rho]
        self._two_rho = np.array(two_rho, dtype=np.int64)
        # shift[w] = rho - w(rho), an integer vector
        self._shift = []
        for w in self.W:
            v = self._two_rho - w.array @ self._two_rho
            if np.any(v % 2):
                raise CoveringError("internal: rho - w(rho) is not integral")
            self._shift.append(v // 2)
        dim = self.datum.dim
        pivots = {}
        for r in self.H:
            c = next(j for j, v in enumerate(r) if v)
            pivots[c] = r[c]
        if len(pivots) < dim:
            raise CoveringError("Y_{Q,n} does not have full rank")
        ranges = [range(pivots[c]) for c in range(dim)]
        # last coordinate varies slowest
        self.reps: list[Vector] = [tuple(reversed(p)) for p in itertools.product(*reversed(ranges))]
        self._index = {y: i for i, y in enumerate(self.reps)}

    # -- group structure ------------------------------------------------
    def __len__(self) -> int:
        return len(self.reps)

    def reduce(self, y: Sequence[int]) -> Vector:
        return reduce_mod(y, self.H)

    def index(self, y: Sequence[int]) -> int:
        return self._index[self.reduce(y)]

    @cached_property
    def invariant_factors(self) -> list[int]:
        _, S, _ = smith_normal_form(self.H)
        return [S[i][i] for i in range(len(S)) if S[i][i] != 1]

    # -- twisted action -------------------------------------------------
    def twisted(self, w: int, y: Sequence[int]) -> Vector:
        """w[y] = w(y - rho) + rho on lattice vectors."""
        v = self.W[w].array @ np.asarray(y, dtype=np.int64) + self._shift[w]
        return tuple(int(x) for x in v)

    def act(self, w: int, i: int) -> int:
        """Twisted action on the class with transversal index i."""
        return self.index(self.twisted(w, self.reps[i]))

    @cached_property
    def action_table(self) -> np.ndarray:
        T = np.zeros((len(self.W), len(self)), dtype=np.int64)
        for w in range(len(self.W)):
            for i in range(len(self)):
                T[w, i] = self.act(w, i)
        return T

    def stabilizer(self, y: Sequence[int], sc: bool = False) -> tuple[int, ...]:
        H = self.H_sc if sc else self.H
        return tuple(w for w in range(len(self.W))
                     if in_lattice(np.subtract(self.twisted(w, y), y), H))

    # -- orbits -----------------------------------------------------------
    def orbits(self, S: Iterable[int] | None = None) -> list[Orbit]:
        """Orbits of W(S) (all of W when S is None), in transversal order."""
        S = list(range(self.datum.rank)) if S is None else sorted(S)
        gens = [self.W.gen(i) for i in S]
        sub = self.W.parabolic(S)
        seen = set()
        out = []
        for i, y in enumerate(self.reps):
            if i in seen:
                continue
            orbit = [i]
            seen.add(i)
            k = 0
            while k < len(orbit):
                for g in gens:
                    j = self.act(g, orbit[k])
                    if j not in seen:
                        seen.add(j)
                        orbit.append(j)
                k += 1
            stab = tuple(w for w in sub if w in set(self.stabilizer(y)))
            stab_sc = tuple(w for w in sub if w in set(self.stabilizer(y, sc=True)))
            out.append(Orbit(y, tuple(self.reps[j] for j in orbit), stab, stab_sc, len(sub)))
        return out

    def is_persistent(self) -> bool:
        return all(o.persistent for o in self.orbits())

    def permutation_character(self, orbit: Orbit | None = None) -> list[int]:
        """Number of fixed classes of each w (restricted to an orbit if given)."""
        idx = range(len(self)) if orbit is None else [self.index(y) for y in orbit.elements]
        T = self.action_table
        return [sum(1 for i in idx if T[w, i] == i) for w in range(len(self.W))]


def build_moduli(cov: CoveringDatum) -> ModuliSpace:
    return ModuliSpace(cov)


def is_saturated(cov: CoveringDatum) -> bool:
    return cov.is_saturated()


def fraction_vector(v: Iterable) -> tuple[Fraction, ...]:
    return tuple(Fraction(x) for x in v)
