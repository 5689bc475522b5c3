"""Kazhdan-Lusztig polynomials, right cells and their W-representations.

Polynomials in q are dense tuples of integer coefficients (constant term
first).  Everything can be computed for the whole Weyl group or for a standard
parabolic subgroup W(S), viewed as a Coxeter group in its own right.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

from .rootdata import WeylGroup

Poly = tuple[int, ...]


# ---------------------------------------------------------------------------
# dense polynomial helpers
# ---------------------------------------------------------------------------

def _trim(p: Sequence[int]) -> Poly:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return tuple(p)


def poly_add(a: Sequence[int], b: Sequence[int]) -> Poly:
    n = max(len(a), len(b))
    return _trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def poly_scale(a: Sequence[int], c: int) -> Poly:
    return _trim([c * v for v in a])


def poly_shift(a: Sequence[int], k: int) -> Poly:
    """Multiply by q^k (k >= 0)."""
    return _trim([0] * k + list(a)) if a else ()


def poly_mul(a: Sequence[int], b: Sequence[int]) -> Poly:
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


def poly_degree(a: Sequence[int]) -> int:
    return len(_trim(a)) - 1


def poly_str(a: Sequence[int]) -> str:
    a = _trim(a)
    if not a:
        return "0"
    terms = []
    for k, c in enumerate(a):
        if c:
            mono = "" if k == 0 else ("q" if k == 1 else f"q^{k}")
            coef = str(c) if (c != 1 or k == 0) else ""
            terms.append(coef + mono)
    return " + ".join(terms)


# ---------------------------------------------------------------------------
# Kazhdan-Lusztig data
# ---------------------------------------------------------------------------

class KLData:
    """KL polynomials, mu-function and descents on W(S) (S defaults to all of Delta)."""

    def __init__(self, W: WeylGroup, S: Iterable[int] | None = None):
        self.W = W
        self.S = tuple(sorted(range(W.datum.rank) if S is None else set(S)))
        self.elements = W.parabolic(self.S)   # length-lex order, id first
        self._member = set(self.elements)
        self._P: dict[tuple[int, int], Poly] = {}
        self._build()

    # -- descents ---------------------------------------------------------
    def left_descents(self, w: int) -> frozenset[int]:
        """L(w) = {s in S : l(sw) < l(w)}."""
        return frozenset(s for s in self.S if s in self.W.left_descents(w))

    def right_descents(self, w: int) -> frozenset[int]:
        """R(w) = {s in S : l(ws) < l(w)}."""
        return frozenset(s for s in self.S if s in self.W.right_descents(w))

    def descent_sets(self, w: int) -> tuple[frozenset[int], frozenset[int]]:
        return self.left_descents(w), self.right_descents(w)

    # -- polynomials ------------------------------------------------------
    def _build(self) -> None:
        W = self.W
        for w in self.elements:
            self._P[(w, w)] = (1,)
            if w == W.identity:
                continue
            s = W.elements[w].word[-1]
            gs = W.gen(s)
            v = W.mul(w, gs)
            mu_terms = [(z, self.mu(z, v)) for z in self.elements
                        if z != v and self.precedes(z, v) and s in W.right_descents(z)]
            for x in self.elements:
                if x == w or not W.bruhat_leq(x, w):
                    continue
                xs = W.mul(x, gs)
                c = 1 if s in W.right_descents(x) else 0
                p = poly_add(poly_shift(self.P(xs, v), 1 - c), poly_shift(self.P(x, v), c))
                for z, m in mu_terms:
                    pz = self.P(x, z)
                    if pz:
                        k = (W.length(w) - W.length(z)) // 2
                        p = poly_add(p, poly_scale(poly_shift(pz, k), -m))
                self._P[(x, w)] = p

    def P(self, x: int, w: int) -> Poly:
        return self._P.get((x, w), ())

    def precedes(self, x: int, w: int) -> bool:
        """x < w with deg P_{x,w} = (l(w) - l(x) - 1)/2."""
        if x == w or not self.W.bruhat_leq(x, w):
            return False
        d = self.W.length(w) - self.W.length(x) - 1
        return d % 2 == 0 and poly_degree(self.P(x, w)) == d // 2

    def mu(self, x: int, w: int) -> int:
        if not self.precedes(x, w):
            return 0
        return self.P(x, w)[-1]

    def mu_sym(self, x: int, w: int) -> int:
        return self.mu(x, w) if self.precedes(x, w) else self.mu(w, x)

    # -- cells ------------------------------------------------------------
    @cached_property
    def right_cells(self) -> list[tuple[int, ...]]:
        """Strongly connected components of the one-step right preorder."""
        idx = {w: i for i, w in enumerate(self.elements)}
        N = len(self.elements)
        reach = np.eye(N, dtype=bool)
        for a, x in enumerate(self.elements):
            Rx = self.right_descents(x)
            for b, y in enumerate(self.elements):
                if a != b and (self.precedes(x, y) or self.precedes(y, x)) \
                        and not Rx <= self.right_descents(y):
                    reach[a, b] = True
        # Warshall transitive closure
        for k in range(N):
            reach |= np.outer(reach[:, k], reach[k, :])
        cells, seen = [], set()
        for a in range(N):
            if a in seen:
                continue
            comp = tuple(self.elements[b] for b in range(N) if reach[a, b] and reach[b, a])
            seen |= {idx[w] for w in comp}
            cells.append(comp)
        self._reach = reach
        return cells

    def cell_of(self, w: int) -> tuple[int, ...]:
        return next(c for c in self.right_cells if w in c)

    def right_leq(self, x: int, w: int) -> bool:
        """x <=_R w."""
        self.right_cells
        idx = {v: i for i, v in enumerate(self.elements)}
        return bool(self._reach[idx[x], idx[w]])

    def generator_matrix(self, cell: Sequence[int], s: int) -> np.ndarray:
        """Right action of T_s on the cell module at q = 1, in the basis C_w (w in cell)."""
        W = self.W
        pos = {w: i for i, w in enumerate(cell)}
        M = np.zeros((len(cell), len(cell)), dtype=np.int64)
        gs = W.gen(s)
        for w in cell:
            j = pos[w]
            if s in W.right_descents(w):
                M[j, j] = -1
                continue
            M[j, j] = 1
            ws = W.mul(w, gs)
            if ws in pos:
                M[pos[ws], j] += 1
            for z in cell:
                if z != w and self.precedes(z, w) and s in W.right_descents(z):
                    M[pos[z], j] += self.mu(z, w)
        return M

    def cell_representation(self, cell: Sequence[int], name: str = "") -> "ClassFunction":
        gens = {s: self.generator_matrix(cell, s) for s in self.S}
        vals = []
        for g in self.elements:
            M = np.eye(len(cell), dtype=np.int64)
            for s in self.W.elements[g].word:
                M = M @ gens[s]
            vals.append(Fraction(int(np.trace(M))))
        return ClassFunction(self.W, tuple(self.elements), tuple(vals), name or _cell_name(self.W, cell))

    def cell_representations(self) -> list["ClassFunction"]:
        return [self.cell_representation(c) for c in self.right_cells]


def _cell_name(W: WeylGroup, cell: Sequence[int]) -> str:
    return "{" + ", ".join(W.name(w) for w in cell) + "}"


def kl_polynomial(W: WeylGroup, x: int, w: int) -> Poly:
    return kl_data(W).P(x, w)


_KL_CACHE: dict[int, KLData] = {}


def kl_data(W: WeylGroup, S: Iterable[int] | None = None) -> KLData:
    key = (id(W), None if S is None else tuple(sorted(S)))
    if key not in _KL_CACHE:
        _KL_CACHE[key] = KLData(W, S)
    return _KL_CACHE[key]


# ---------------------------------------------------------------------------
# independent oracle: R-polynomials and the bar-involution solve
# ---------------------------------------------------------------------------

def r_polynomials(W: WeylGroup) -> dict[tuple[int, int], Poly]:
    """R_{x,w} via R_{x,w} = R_{xs,ws} if xs < x, else (q-1)R_{x,ws} + q R_{xs,ws}."""
    R: dict[tuple[int, int], Poly] = {}
    order = sorted(range(len(W)), key=W.length)
    for w in order:
        for x in range(len(W)):
            if w == W.identity:
                R[(x, w)] = (1,) if x == w else ()
                continue
            s = W.elements[w].word[-1]
            gs = W.gen(s)
            ws, xs = W.mul(w, gs), W.mul(x, gs)
            if s in W.right_descents(x):
                R[(x, w)] = R[(xs, ws)]
            else:
                R[(x, w)] = poly_add(poly_mul((-1, 1), R[(x, ws)]), poly_shift(R[(xs, ws)], 1))
    return R


def kl_oracle(W: WeylGroup) -> dict[tuple[int, int], Poly]:
    """P_{x,w} from q^{l(w)-l(x)} bar(P_{x,w}) - P_{x,w} = sum_{x<y<=w} R_{x,y} P_{y,w}.

    Bruhat intervals come from the subword criterion; the sum is solved by
    keeping the part of degree below (l(w)-l(x))/2.
    """
    R = r_polynomials(W)
    P: dict[tuple[int, int], Poly] = {}
    for w in range(len(W)):
        below = [x for x in range(len(W)) if W.bruhat_leq(x, w)]
        for x in sorted(below, key=W.length, reverse=True):
            if x == w:
                P[(x, w)] = (1,)
                continue
            f: Poly = ()
            for y in below:
                if y != x and W.bruhat_leq(x, y):
                    f = poly_add(f, poly_mul(R[(x, y)], P[(y, w)]))
            L = W.length(w) - W.length(x)
            P[(x, w)] = _trim([-c for k, c in enumerate(f) if 2 * k < L])
    return P


# ---------------------------------------------------------------------------
# class functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClassFunction:
    """A class function on a subgroup of W, stored by value on each element.

    ``elements`` lists indices of W (the subgroup) and ``values`` is aligned with it.
    """

    W: WeylGroup
    elements: tuple[int, ...]
    values: tuple[Fraction, ...]
    name: str = ""

    def __call__(self, w: int) -> Fraction:
        return self.values[self.elements.index(w)]

    @property
    def degree(self) -> Fraction:
        return self(self.W.identity)

    def _check(self, other: "ClassFunction") -> None:
        if other.W is not self.W or other.elements != self.elements:
            raise ValueError("class functions live on different groups")

    def __add__(self, other: "ClassFunction") -> "ClassFunction":
        self._check(other)
        return ClassFunction(self.W, self.elements,
                             tuple(a + b for a, b in zip(self.values, other.values)),
                             f"{self.name} + {other.name}")

    def __sub__(self, other: "ClassFunction") -> "ClassFunction":
        self._check(other)
        return ClassFunction(self.W, self.elements,
                             tuple(a - b for a, b in zip(self.values, other.values)),
                             f"{self.name} - {other.name}")

    def __mul__(self, other: "ClassFunction | int | Fraction") -> "ClassFunction":
        if isinstance(other, ClassFunction):
            self._check(other)
            vals = tuple(a * b for a, b in zip(self.values, other.values))
            return ClassFunction(self.W, self.elements, vals, f"{self.name}*{other.name}")
        return ClassFunction(self.W, self.elements, tuple(Fraction(other) * a for a in self.values),
                             f"{other}{self.name}")

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, ClassFunction) and other.elements == self.elements
                and other.values == self.values)

    def __hash__(self) -> int:
        return hash((self.elements, self.values))

    def renamed(self, name: str) -> "ClassFunction":
        return ClassFunction(self.W, self.elements, self.values, name)

    def is_class_function(self) -> bool:
        pos = {g: i for i, g in enumerate(self.elements)}
        for h in self.elements:
            hi = self.W.inverse(h)
            for g in self.elements:
                c = self.W.mul(self.W.mul(h, g), hi)
                if self.values[pos[c]] != self.values[pos[g]]:
                    return False
        return True

    def row(self) -> list[Fraction]:
        return list(self.values)


def inner_product(f: ClassFunction, g: ClassFunction) -> Fraction:
    """(1/|H|) sum_h f(h) g(h); characters of Weyl groups are real."""
    f._check(g)
    return sum((a * b for a, b in zip(f.values, g.values)), Fraction(0)) / len(f.elements)


def class_function(W: WeylGroup, fn: Callable[[int], object], name: str = "",
                   S: Iterable[int] | None = None) -> ClassFunction:
    elems = tuple(W.parabolic(range(W.datum.rank) if S is None else S))
    return ClassFunction(W, elems, tuple(Fraction(fn(w)) for w in elems), name)


def trivial(W: WeylGroup, S: Iterable[int] | None = None) -> ClassFunction:
    return class_function(W, lambda w: 1, "1", S)


def sign(W: WeylGroup, S: Iterable[int] | None = None) -> ClassFunction:
    return class_function(W, lambda w: (-1) ** W.length(w), "eps", S)


def restrict(f: ClassFunction, S: Iterable[int]) -> ClassFunction:
    elems = tuple(f.W.parabolic(S))
    return ClassFunction(f.W, elems, tuple(f(w) for w in elems), f"Res {f.name}")


def induce(f: ClassFunction, S: Iterable[int] | None = None) -> ClassFunction:
    """Induce a class function from W(S) (the group ``f`` lives on) to W."""
    W = f.W
    H = set(f.elements)
    allw = tuple(range(len(W)))
    invs = [W.inverse(x) for x in allw]
    vals = []
    for g in allw:
        tot = Fraction(0)
        for x in allw:
            c = W.mul(W.mul(x, g), invs[x])
            if c in H:
                tot += f(c)
        vals.append(tot / len(H))
    return ClassFunction(W, allw, tuple(vals), f"Ind {f.name}")


def regular_character(W: WeylGroup) -> ClassFunction:
    return class_function(W, lambda w: len(W) if w == W.identity else 0, "C[W]")


def reflection_character(W: WeylGroup) -> ClassFunction:
    """Trace of w on the span of the coroots (the reflection representation)."""
    C = W.datum.coroots.astype(float)
    pinv = np.linalg.pinv(C.T)

    def trace(w):
        M = pinv @ W.elements[w].array @ C.T
        return int(round(float(np.trace(M))))

    return class_function(W, trace, "refl")


# ---------------------------------------------------------------------------
# character table
# ---------------------------------------------------------------------------

@dataclass
class CharTable:
    W: WeylGroup
    characters: list[ClassFunction]
    complete: bool
    columns: list[int] = field(default_factory=list)

    def rows(self) -> list[tuple[str, list[Fraction]]]:
        return [(c.name, [c(w) for w in self.columns]) for c in self.characters]

    def headers(self) -> list[str]:
        return [self.W.name(w) for w in self.columns]

    def by_name(self, name: str) -> ClassFunction:
        return next(c for c in self.characters if c.name == name)

    def decompose(self, f: ClassFunction) -> dict[str, Fraction]:
        return {c.name: inner_product(f, c) for c in self.characters}


def linear_characters(W: WeylGroup) -> list[ClassFunction]:
    """Sign assignments on generators compatible with the braid relations."""
    A = W.datum.cartan
    r = W.datum.rank
    out = []
    for signs in itertools.product((1, -1), repeat=r):
        ok = all(signs[i] == signs[j] for i in range(r) for j in range(r)
                 if i != j and A[i, j] * A[j, i] == 1)
        if ok:
            out.append(signs)
    chars = []
    for signs in out:
        vals = lambda w, s=signs: int(np.prod([s[i] for i in W.elements[w].word])) if W.elements[w].word else 1
        chars.append(class_function(W, vals, _linear_name(signs)))
    return chars


def _linear_name(signs: Sequence[int]) -> str:
    if all(s == 1 for s in signs):
        return "1"
    if all(s == -1 for s in signs):
        return "eps"
    if len(signs) == 2:
        return "chi'" if signs[0] == -1 else "chi''"
    return "lin[" + "".join("+" if s == 1 else "-" for s in signs) + "]"


def character_table(W: WeylGroup, max_rounds: int = 6) -> CharTable:
    """Irreducible characters: linear ones, then norm-one pieces of tensor products.

    Starting from the linear characters and the reflection character, products
    of known characters are reduced by their projections onto the irreducibles
    found so far; any remainder of norm one is a new irreducible.  ``complete``
    records whether the squared degrees add up to |W|.
    """
    irr: list[ClassFunction] = []

    def absorb(f: ClassFunction) -> bool:
        for c in irr:
            m = inner_product(f, c)
            if m:
                f = f - m * c
        if any(f.values) and inner_product(f, f) == 1:
            if f.degree < 0:
                f = -1 * f
            irr.append(f)
            return True
        return False

    for c in linear_characters(W):
        irr.append(c)
    pool = [reflection_character(W)]
    for _ in range(max_rounds):
        new = False
        for f in list(pool):
            new |= absorb(f)
        if sum(c.degree ** 2 for c in irr) == len(W):
            break
        pool = [a * b for a, b in itertools.product(irr, pool + irr[:])]
        if not new and not pool:
            break
    complete = sum(c.degree ** 2 for c in irr) == len(W)
    linear = [c for c in irr if c.degree == 1]
    higher = [c for c in irr if c.degree > 1]
    higher.sort(key=lambda c: (c.degree, [-v for v in c.values]))
    # the reflection character (when irreducible) is sigma0, the rest follow
    refl = reflection_character(W).values
    higher.sort(key=lambda c: c.values != refl)
    named = [c.renamed(f"sigma{i}") for i, c in enumerate(higher)]
    order = {"1": 0, "eps": 1, "chi'": 2, "chi''": 3}
    linear.sort(key=lambda c: (order.get(c.name, 9), c.name))
    return CharTable(W, linear + named, complete, list(range(len(W))))


def cell_decomposition(W: WeylGroup) -> dict[tuple[int, ...], dict[str, Fraction]]:
    """Multiplicities of the irreducibles in every cell representation."""
    kl = kl_data(W)
    table = character_table(W)
    return {cell: {k: v for k, v in table.decompose(kl.cell_representation(cell)).items() if v}
            for cell in kl.right_cells}
