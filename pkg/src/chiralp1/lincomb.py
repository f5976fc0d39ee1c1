"""Finite rational linear combinations of hashable basis keys.

Shared backing store for lattice Fock states and beta-gamma chart states.
Zero coefficients are never stored, so equality is plain dict equality.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterator, Tuple


class LinComb:
    __slots__ = ("terms",)

    def __init__(self, terms: Dict = None):
        self.terms = {}
        if terms:
            for k, v in terms.items():
                v = Fraction(v)
                if v:
                    self.terms[k] = v

    @classmethod
    def _wrap(cls, terms: Dict) -> "LinComb":
        out = object.__new__(cls)
        out.terms = terms
        return out

    def is_zero(self) -> bool:
        return not self.terms

    def items(self) -> Iterator[Tuple]:
        return iter(self.terms.items())

    def coefficient(self, key) -> Fraction:
        return self.terms.get(key, Fraction(0))

    def __add__(self, other):
        out = dict(self.terms)
        for k, v in other.terms.items():
            s = out.get(k, 0) + v
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return type(self)._wrap(out)

    def __sub__(self, other):
        out = dict(self.terms)
        for k, v in other.terms.items():
            s = out.get(k, 0) - v
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return type(self)._wrap(out)

    def __neg__(self):
        return type(self)._wrap({k: -v for k, v in self.terms.items()})

    def scaled(self, c) -> "LinComb":
        c = Fraction(c)
        if not c:
            return type(self)._wrap({})
        return type(self)._wrap({k: v * c for k, v in self.terms.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, LinComb) and self.terms == other.terms

    def __hash__(self):
        raise TypeError(f"{type(self).__name__} is not hashable")

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)
