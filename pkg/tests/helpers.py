"""Shared builders and small oracles used across the test modules."""

from __future__ import annotations

from functools import lru_cache

from wkl.covering import ModuliSpace, build_covering
from wkl.whittaker import exceptional_character

# Q on the simple coroots, normalised so that the short coroots have Q = 1
STANDARD_Q = {
    "A1": (1,),
    "A2": (1, 1),
    "A3": (1, 1, 1),
    "C2": (2, 1),
    "G2": (1, 3),
}

# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE: dict[int, str] = {}


@lru_cache(maxsize=None)
def _moduli(label: str, n: int, xi: int) -> ModuliSpace:
    return ModuliSpace(build_covering(label, Q=list(STANDARD_Q[label]), n=n, xi=xi))


@lru_cache(maxsize=None)
def _character(label: str, n: int, xi: int, phi: tuple[int, ...]):
    return exceptional_character(_moduli(label, n, xi), phi)


def moduli(label: str, n: int, xi: int = 1) -> ModuliSpace:
    """One shared moduli space per (type, n, xi), so Weyl groups are comparable."""
    return _moduli(label, n, xi)


def character(label: str, n: int, xi: int = 1, phi=None):
    """The exceptional character with Phi(chi) = the given simple roots (all by default)."""
    m = moduli(label, n, xi)
    phi = tuple(range(m.datum.rank)) if phi is None else tuple(sorted(phi))
    return _character(label, n, xi, phi)


def element(W, name: str) -> int:
    """Index of the element with the given name, e.g. "w1w2" or "id"."""
    return next(w for w in range(len(W)) if W.name(w) == name)


def names(W, elements) -> set[str]:
    return {W.name(w) for w in elements}


def f_closed(d: int) -> int:
    return 1 if d % 2 else 4


def record(number: int, text: str, ok: bool) -> None:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {text}"
    ACCEPTANCE[number] = line
    print(line)
