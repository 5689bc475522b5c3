"""Finite root data, Weyl groups and their combinatorics.

A root datum is stored through its cocharacter lattice ``Y`` (integer
coordinates in a fixed basis), the simple coroots as vectors of ``Y`` and the
simple roots as integer functionals on ``Y``.  Weyl group elements carry both
a reduced word and their integer matrix on ``Y``; equality is by matrix.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

Vector = tuple[int, ...]

LATTICES = ("sc", "adjoint", "GL")
_LATTICE_ALIASES = {
    "sc": "sc",
    "simply-connected": "sc",
    "simply_connected": "sc",
    "adjoint": "adjoint",
    "ad": "adjoint",
    "GL": "GL",
    "gl": "GL",
}


class RootDatumError(ValueError):
    """Raised for an unknown Cartan type or an inconsistent request."""


def cartan_matrix(letter: str, rank: int) -> np.ndarray:
    """Cartan matrix ``A[i, j] = <alpha_i^vee, alpha_j>`` in Bourbaki labelling.

    For type C the last simple root is the long one, so ``alpha_{r-1}^vee`` is
    a long coroot paired with ``alpha_r`` to ``-2``.  For G2 the first simple
    coroot is the short one.
    """
    letter = letter.upper()
    if rank < 1:
        raise RootDatumError(f"rank must be positive, got {rank}")
    A = 2 * np.eye(rank, dtype=np.int64)
    if letter in "ABCD":
        for i in range(rank - 1):
            A[i, i + 1] = A[i + 1, i] = -1
        if letter == "B" and rank >= 2:
            A[rank - 1, rank - 2] = -2
        elif letter == "C" and rank >= 2:
            A[rank - 2, rank - 1] = -2
        elif letter == "D":
            if rank < 3:
                raise RootDatumError("type D needs rank >= 3")
            A[rank - 2, rank - 1] = A[rank - 1, rank - 2] = 0
            A[rank - 3, rank - 1] = A[rank - 1, rank - 3] = -1
        if letter in "BC" and rank < 2:
            raise RootDatumError(f"type {letter} needs rank >= 2")
        return A
    if letter == "G":
        if rank != 2:
            raise RootDatumError("type G exists only in rank 2")
        A[0, 1] = -1
        A[1, 0] = -3
        return A
    if letter == "F":
        if rank != 4:
            raise RootDatumError("type F exists only in rank 4")
        A[0, 1] = A[1, 0] = -1
        A[1, 2] = -2
        A[2, 1] = -1
        A[2, 3] = A[3, 2] = -1
        return A
    if letter == "E":
        if rank not in (6, 7, 8):
            raise RootDatumError("type E exists only in ranks 6, 7, 8")
        # Bourbaki: 1-3-4-5-6(-7-8), with 2 attached to 4.
        edges = [(1, 3), (3, 4), (4, 5), (5, 6), (2, 4)]
        edges += [(6, 7)] if rank >= 7 else []
        edges += [(7, 8)] if rank == 8 else []
        for i, j in edges:
            A[i - 1, j - 1] = A[j - 1, i - 1] = -1
        return A
    raise RootDatumError(f"unknown Cartan type {letter!r}")


def parse_type(label: str, rank: int | None = None) -> list[tuple[str, int]]:
    """Parse ``"A2"``, ``"C"`` (with ``rank``) or a product like ``"A1xA1"``."""
    parts = [p.strip() for p in label.replace("×", "x").split("x") if p.strip()]
    if not parts:
        raise RootDatumError(f"empty type label {label!r}")
    out = []
    for part in parts:
        letter, digits = part[0].upper(), part[1:]
        if letter not in "ABCDEFG":
            raise RootDatumError(f"unknown Cartan type {part!r}")
        if digits:
            if not digits.isdigit():
                raise RootDatumError(f"bad type label {part!r}")
            out.append((letter, int(digits)))
        else:
            if len(parts) > 1 or rank is None:
                raise RootDatumError(f"type {part!r} needs an explicit rank")
            out.append((letter, rank))
    total = sum(r for _, r in out)
    if rank is not None and len(parts) > 1 and rank != total:
        raise RootDatumError(f"rank {rank} does not match type {label!r}")
    if rank is not None and len(parts) == 1 and out[0][1] != rank:
        raise RootDatumError(f"rank {rank} does not match type {label!r}")
    return out


def _block_cartan(components: Sequence[tuple[str, int]]) -> np.ndarray:
    size = sum(r for _, r in components)
    A = np.zeros((size, size), dtype=np.int64)
    pos = 0
    for letter, r in components:
        A[pos:pos + r, pos:pos + r] = cartan_matrix(letter, r)
        pos += r
    return A


@dataclass(frozen=True)
class WeylElement:
    """An element of W: one reduced word plus its integer matrix on Y."""

    word: tuple[int, ...]
    matrix: tuple[tuple[int, ...], ...]

    @property
    def length(self) -> int:
        return len(self.word)

    @cached_property
    def array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=np.int64)

    def act(self, y: Sequence[int]) -> Vector:
        return tuple(int(v) for v in self.array @ np.asarray(y, dtype=np.int64))

    def name(self, longest: bool = False) -> str:
        if longest:
            return "w_G"
        if not self.word:
            return "id"
        return "".join(f"w{i + 1}" for i in self.word)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, WeylElement) and self.matrix == other.matrix

    def __hash__(self) -> int:
        return hash(self.matrix)

    def __repr__(self) -> str:
        return f"WeylElement({self.name()})"


@dataclass(frozen=True)
class Root:
    """A root paired with its coroot, with coefficients in the simple bases."""

    index: int
    coroot: Vector          # vector in Y
    root: Vector            # functional on Y (row vector)
    coroot_coeffs: Vector   # coefficients on the simple coroots
    root_coeffs: Vector     # coefficients on the simple roots

    @property
    def positive(self) -> bool:
        return all(c >= 0 for c in self.coroot_coeffs)

    def pair(self, y: Sequence[int]) -> int:
        return int(sum(a * b for a, b in zip(self.root, y)))


@dataclass
class RootDatum:
    """Based root datum of finite type.

    ``coroots[i]`` is the simple coroot alpha_{i+1}^vee as a vector in Y and
    ``roots[i]`` the simple root alpha_{i+1} as a functional on Y.
    """

    label: str
    lattice: str
    coroots: np.ndarray       # shape (r, dim Y): rows are simple coroots
    roots: np.ndarray         # shape (r, dim Y): rows are simple roots
    basis_labels: tuple[str, ...] = ()
    max_weyl_order: int = 10**5
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self.coroots = np.asarray(self.coroots, dtype=np.int64)
        self.roots = np.asarray(self.roots, dtype=np.int64)
        A = self.cartan
        if not np.all(np.diag(A) == 2):
            raise RootDatumError("Cartan matrix must have 2 on the diagonal")
        if not _is_finite_type(A):
            raise RootDatumError("Cartan matrix is not of finite type")
        if not self.basis_labels:
            self.basis_labels = tuple(f"e{i + 1}" for i in range(self.dim))

    # -- basic data -----------------------------------------------------
    @property
    def rank(self) -> int:
        return self.coroots.shape[0]

    @property
    def dim(self) -> int:
        return self.coroots.shape[1]

    @cached_property
    def cartan(self) -> np.ndarray:
        """``cartan[i, j] = <alpha_i^vee, alpha_j>``."""
        return self.coroots @ self.roots.T

    def simple_reflection(self, i: int) -> np.ndarray:
        """Matrix of y -> y - <y, alpha_i> alpha_i^vee."""
        return np.eye(self.dim, dtype=np.int64) - np.outer(self.coroots[i], self.roots[i])

    @cached_property
    def simple_reflections(self) -> list[np.ndarray]:
        return [self.simple_reflection(i) for i in range(self.rank)]

    # -- roots ----------------------------------------------------------
    @cached_property
    def all_roots(self) -> list[Root]:
        """All roots, positive ones first, each sorted by height then coefficients."""
        A = self.cartan
        r = self.rank
        start = []
        for i in range(r):
            e = tuple(int(i == j) for j in range(r))
            start.append((e, e))
        seen = {s[0]: s[1] for s in start}
        frontier = list(start)
        while frontier:
            nxt = []
            for c, d in frontier:
                for i in range(r):
                    # s_i(beta^vee) = beta^vee - <beta^vee, alpha_i> alpha_i^vee
                    pc = int(sum(c[j] * A[j, i] for j in range(r)))
                    # s_i(beta) = beta - <alpha_i^vee, beta> alpha_i
                    pd = int(sum(A[i, j] * d[j] for j in range(r)))
                    c2 = tuple(c[j] - (pc if j == i else 0) for j in range(r))
                    d2 = tuple(d[j] - (pd if j == i else 0) for j in range(r))
                    if c2 not in seen:
                        seen[c2] = d2
                        nxt.append((c2, d2))
            frontier = nxt

        def key(item):
            c, _ = item
            pos = all(x >= 0 for x in c)
            return (not pos, sum(abs(x) for x in c), tuple(-abs(x) for x in c), c)

        out = []
        for idx, (c, d) in enumerate(sorted(seen.items(), key=key)):
            cor = tuple(int(v) for v in np.asarray(c) @ self.coroots)
            rt = tuple(int(v) for v in np.asarray(d) @ self.roots)
            out.append(Root(idx, cor, rt, c, d))
        return out

    @cached_property
    def positive_roots(self) -> list[Root]:
        return [b for b in self.all_roots if b.positive]

    @cached_property
    def _coroot_lookup(self) -> dict[Vector, Root]:
        return {b.coroot: b for b in self.all_roots}

    def root_of_coroot(self, v: Sequence[int]) -> Root:
        return self._coroot_lookup[tuple(int(x) for x in v)]

    def is_positive_coroot(self, v: Sequence[int]) -> bool:
        return self.root_of_coroot(v).positive

    def simple_root(self, i: int) -> Root:
        return self.root_of_coroot(self.coroots[i])

    @cached_property
    def rho(self) -> tuple[Fraction, ...]:
        """Half the sum of the positive coroots, in Y coordinates."""
        total = np.zeros(self.dim, dtype=np.int64)
        for b in self.positive_roots:
            total += np.asarray(b.coroot)
        return tuple(Fraction(int(v), 2) for v in total)

    # -- Weyl group -----------------------------------------------------
    @cached_property
    def weyl_group(self) -> "WeylGroup":
        return WeylGroup(self)


def _is_finite_type(A: np.ndarray) -> bool:
    """Finite type test: the symmetrized Cartan matrix is positive definite."""
    r = A.shape[0]
    if r == 0:
        return True
    # Symmetrize: find d with d_i A_ij = d_j A_ji on each connected component.
    d = [None] * r
    for s in range(r):
        if d[s] is not None:
            continue
        d[s] = Fraction(1)
        stack = [s]
        while stack:
            i = stack.pop()
            for j in range(r):
                if i != j and A[i, j] != 0:
                    if A[j, i] == 0:
                        return False
                    val = d[i] * int(A[i, j]) / int(A[j, i])
                    if d[j] is None:
                        d[j] = val
                        stack.append(j)
                    elif d[j] != val:
                        return False
    S = np.array([[float(d[i] * int(A[i, j])) for j in range(r)] for i in range(r)])
    return bool(np.all(np.linalg.eigvalsh((S + S.T) / 2) > 1e-9))


class WeylGroup:
    """All elements of W with lex-minimal reduced words, in length-lex order."""

    def __init__(self, datum: RootDatum):
        self.datum = datum
        gens = datum.simple_reflections
        ident = np.eye(datum.dim, dtype=np.int64)
        key = lambda M: tuple(tuple(int(v) for v in row) for row in M)
        elements = [WeylElement((), key(ident))]
        index = {elements[0].matrix: 0}
        layer = [0]
        while layer:
            new_layer = []
            for pos in layer:
                w = elements[pos]
                for i, s in enumerate(gens):
                    M = w.array @ s
                    k = key(M)
                    if k in index:
                        continue
                    index[k] = len(elements)
                    elements.append(WeylElement(w.word + (i,), k))
                    new_layer.append(index[k])
                    if len(elements) > datum.max_weyl_order:
                        raise RootDatumError("Weyl group exceeds the configured bound")
            layer = new_layer
        self.elements: list[WeylElement] = elements
        self._index = index
        self._mult: dict[tuple[int, int], int] = {}

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i: int) -> WeylElement:
        return self.elements[i]

    def index(self, w: WeylElement | np.ndarray) -> int:
        if isinstance(w, WeylElement):
            return self._index[w.matrix]
        return self._index[tuple(tuple(int(v) for v in row) for row in w)]

    @property
    def identity(self) -> int:
        return 0

    @cached_property
    def longest(self) -> int:
        return max(range(len(self)), key=lambda i: self.elements[i].length)

    def mul(self, a: int, b: int) -> int:
        k = (a, b)
        if k not in self._mult:
            self._mult[k] = self.index(self.elements[a].array @ self.elements[b].array)
        return self._mult[k]

    def inverse(self, a: int) -> int:
        return self.from_word(tuple(reversed(self.elements[a].word)))

    def from_word(self, word: Iterable[int]) -> int:
        M = np.eye(self.datum.dim, dtype=np.int64)
        for i in word:
            M = M @ self.datum.simple_reflections[i]
        return self.index(M)

    def gen(self, i: int) -> int:
        return self.from_word((i,))

    def length(self, a: int) -> int:
        return self.elements[a].length

    def name(self, a: int) -> str:
        return self.elements[a].name(longest=(a == self.longest and len(self) > 1))

    def left_descents(self, a: int) -> frozenset[int]:
        """{s : l(s w) < l(w)}."""
        L = self.length(a)
        return frozenset(i for i in range(self.datum.rank)
                         if self.length(self.mul(self.gen(i), a)) < L)

    def right_descents(self, a: int) -> frozenset[int]:
        """{s : l(w s) < l(w)}."""
        L = self.length(a)
        return frozenset(i for i in range(self.datum.rank)
                         if self.length(self.mul(a, self.gen(i))) < L)

    @cached_property
    def conjugacy_classes(self) -> list[tuple[int, ...]]:
        """Classes by orbit closure under conjugation, in order of first element."""
        seen: dict[int, int] = {}
        classes = []
        invs = [self.inverse(g) for g in range(len(self))]
        for a in range(len(self)):
            if a in seen:
                continue
            cls = sorted({self.mul(self.mul(g, a), invs[g]) for g in range(len(self))})
            for c in cls:
                seen[c] = len(classes)
            classes.append(tuple(cls))
        self._class_of = seen
        return classes

    def class_of(self, a: int) -> int:
        self.conjugacy_classes
        return self._class_of[a]

    # -- reduced words and Bruhat order ----------------------------------
    def reduced_words(self, a: int) -> list[tuple[int, ...]]:
        """Every reduced word of the element, found by descending right descents."""
        if a == self.identity:
            return [()]
        out = []
        for i in sorted(self.right_descents(a)):
            for u in self.reduced_words(self.mul(a, self.gen(i))):
                out.append(u + (i,))
        return sorted(set(out))

    def support(self, a: int, word: Sequence[int] | None = None) -> frozenset[int]:
        """The set of simple reflections occurring in a reduced word."""
        return frozenset(self.elements[a].word if word is None else word)

    @cached_property
    def bruhat_matrix(self) -> np.ndarray:
        """``B[x, w]`` true iff x <= w, via subwords of one reduced word of w."""
        N = len(self)
        B = np.zeros((N, N), dtype=bool)
        for w in range(N):
            word = self.elements[w].word
            reach = {self.identity}
            for i in word:
                g = self.gen(i)
                reach |= {self.mul(x, g) for x in reach}
            for x in reach:
                B[x, w] = True
        return B

    def bruhat_leq(self, x: int, w: int) -> bool:
        return bool(self.bruhat_matrix[x, w])

    # -- parabolic subgroups ----------------------------------------------
    def parabolic(self, S: Iterable[int]) -> list[int]:
        """Elements of W(S), the subgroup generated by the simple reflections in S."""
        S = set(S)
        return [a for a in range(len(self)) if set(self.elements[a].word) <= S]

    def parabolic_longest(self, S: Iterable[int]) -> int:
        sub = self.parabolic(S)
        return max(sub, key=self.length)

    def minimal_coset_reps(self, S: Iterable[int]) -> list[int]:
        """R_S = {w : l(w_alpha w) > l(w) for all alpha in S}."""
        S = set(S)
        return [a for a in range(len(self))
                if all(self.length(self.mul(self.gen(i), a)) > self.length(a) for i in S)]


def build_root_datum(label: str, rank: int | None = None, lattice: str = "sc") -> RootDatum:
    """Construct the root datum of the given type on the requested lattice.

    ``lattice`` is ``"sc"`` (Y spanned by the coroots), ``"adjoint"`` (Y the
    coweight lattice) or ``"GL"`` (type A_{r-1} on Y = Z^r, with ``rank`` = r).
    """
    lat = _LATTICE_ALIASES.get(lattice)
    if lat is None:
        raise RootDatumError(f"unknown lattice choice {lattice!r}")
    if lat == "GL":
        if label.upper() not in ("A", "GL") and not label.upper().startswith("A"):
            raise RootDatumError("the GL lattice is only defined for type A")
        r = rank if rank is not None else int(label[1:]) + 1
        if label[1:] and int(label[1:]) + 1 != r:
            raise RootDatumError(f"rank {r} does not match GL type {label!r}")
        if r < 2:
            raise RootDatumError("GL needs rank >= 2")
        cor = np.zeros((r - 1, r), dtype=np.int64)
        for i in range(r - 1):
            cor[i, i], cor[i, i + 1] = 1, -1
        return RootDatum(f"GL{r}", "GL", cor, cor.copy(),
                         tuple(f"e{i + 1}" for i in range(r)))
    comps = parse_type(label, rank)
    A = _block_cartan(comps)
    name = "x".join(f"{c}{r}" for c, r in comps)
    r = A.shape[0]
    if lat == "sc":
        cor = np.eye(r, dtype=np.int64)
        rts = A.T.copy()     # alpha_j(y) = sum_i y_i A[i, j]
        labels = tuple(f"a{i + 1}v" for i in range(r))
    else:
        cor = A.copy()       # alpha_i^vee = sum_j A[i, j] varpi_j^vee
        rts = np.eye(r, dtype=np.int64)
        labels = tuple(f"w{i + 1}v" for i in range(r))
    return RootDatum(name, lat, cor, rts, labels)


def all_subsets(items: Sequence[int]) -> list[tuple[int, ...]]:
    return [c for k in range(len(items) + 1) for c in itertools.combinations(items, k)]
