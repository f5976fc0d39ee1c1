"""The rank-2 indefinite lattice and its Heisenberg Fock modules.

The lattice is Z p + Z q with (p,p) = 1, (q,q) = -1, (p,q) = 0.  States are
exact rational combinations of monomials e^beta tensor (products of negative
Heisenberg modes), where the mode algebra is

    [p_n, p_m] = n delta_{n,-m},   [q_n, q_m] = -n delta_{n,-m},   [p_n, q_m] = 0.

Gradings used throughout:

* charge(m)   = (p+q, beta) = a - b,
* qcharge(m)  = b, the q-coefficient of the sector (conserved by both
  differentials of the two-term complex, which shift beta by +-p only),
* weight(m)   = level + (beta,beta)/2 + |charge|/2, an integer for every
  monomial; the differentials are respectively weight-preserving and
  weight-lowering with respect to it.

A textual grammar for states is provided for the CLI and golden files:

    state    := term (('+' | '-') term)*
    term     := [rational '*']? factor*
    factor   := 'p(-'nat')' | 'q(-'nat')' | 'E['int','int']'
    rational := int ['/' posint]

"-1*p(-1) E[1,0]" is minus p_{-1} applied to e^p; a missing E factor means
the zero sector and an empty term is the vacuum.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, List, NamedTuple, Tuple

from .lincomb import LinComb


class LatticeVector(NamedTuple):
    a: int
    b: int

    def __add__(self, other: "LatticeVector") -> "LatticeVector":
        return LatticeVector(self.a + other.a, self.b + other.b)

    def __sub__(self, other: "LatticeVector") -> "LatticeVector":
        return LatticeVector(self.a - other.a, self.b - other.b)

    def __neg__(self) -> "LatticeVector":
        return LatticeVector(-self.a, -self.b)

    def __rmul__(self, k: int) -> "LatticeVector":
        return LatticeVector(k * self.a, k * self.b)


P = LatticeVector(1, 0)
Q = LatticeVector(0, 1)
ZERO = LatticeVector(0, 0)


def pair(alpha: LatticeVector, beta: LatticeVector) -> int:
    """Signature (1,1) pairing: a1 a2 - b1 b2."""
    return alpha.a * beta.a - alpha.b * beta.b


class FockMonomial(NamedTuple):
    """e^beta with p- and q-creation modes applied; mode tuples sorted descending."""

    beta: LatticeVector
    pmodes: Tuple[int, ...]
    qmodes: Tuple[int, ...]


def fock_monomial(beta: LatticeVector, pmodes: Iterable[int] = (), qmodes: Iterable[int] = ()) -> FockMonomial:
    pm = tuple(sorted(pmodes, reverse=True))
    qm = tuple(sorted(qmodes, reverse=True))
    if (pm and pm[-1] < 1) or (qm and qm[-1] < 1):
        raise ValueError("creation mode indices must be >= 1")
    return FockMonomial(LatticeVector(*beta), pm, qm)


VACUUM_MONOMIAL = FockMonomial(ZERO, (), ())


def level(m: FockMonomial) -> int:
    return sum(m.pmodes) + sum(m.qmodes)


def charge(m: FockMonomial) -> int:
    return m.beta.a - m.beta.b


def qcharge(m: FockMonomial) -> int:
    return m.beta.b


def weight(m: FockMonomial) -> int:
    """level + (beta,beta)/2 + |charge|/2; always an integer."""
    a, b = m.beta
    twice = 2 * level(m) + (a * a - b * b) + abs(a - b)
    assert twice % 2 == 0
    return twice // 2


class VState(LinComb):
    """Exact rational linear combination of FockMonomials."""

    @classmethod
    def zero(cls) -> "VState":
        return cls._wrap({})

    @classmethod
    def vacuum(cls) -> "VState":
        return cls._wrap({VACUUM_MONOMIAL: Fraction(1)})

    @classmethod
    def monomial(cls, m: FockMonomial, c=1) -> "VState":
        c = Fraction(c)
        return cls._wrap({m: c} if c else {})

    @classmethod
    def sector(cls, beta: LatticeVector, c=1) -> "VState":
        return cls.monomial(fock_monomial(beta), c)

    def __repr__(self) -> str:
        return f"VState({format_state(self)!r})"


def apply_mode(h: str, n: int, v: VState) -> VState:
    """Apply the Heisenberg mode h_n (h in {'p','q'}) to a state.

    n < 0 appends a creation mode, n > 0 annihilates through the commutator
    rules, and h_0 multiplies each monomial by (h, beta).
    """
    if h not in ("p", "q"):
        raise ValueError(f"unknown Heisenberg generator {h!r}")
    out = {}
    for m, c in v.terms.items():
        if n < 0:
            if h == "p":
                key = FockMonomial(m.beta, _insert(m.pmodes, -n), m.qmodes)
            else:
                key = FockMonomial(m.beta, m.pmodes, _insert(m.qmodes, -n))
            out[key] = out.get(key, 0) + c
        elif n == 0:
            eig = pair(P if h == "p" else Q, m.beta)
            if eig:
                out[m] = out.get(m, 0) + c * eig
        else:
            modes = m.pmodes if h == "p" else m.qmodes
            mult = modes.count(n)
            if not mult:
                continue
            scalar = mult * (n if h == "p" else -n)
            if h == "p":
                key = FockMonomial(m.beta, _remove(m.pmodes, n), m.qmodes)
            else:
                key = FockMonomial(m.beta, m.pmodes, _remove(m.qmodes, n))
            out[key] = out.get(key, 0) + c * scalar
    return VState({k: v for k, v in out.items() if v})


def _insert(modes: Tuple[int, ...], k: int) -> Tuple[int, ...]:
    lst = list(modes)
    for i, v in enumerate(lst):
        if k >= v:
            lst.insert(i, k)
            break
    else:
        lst.append(k)
    return tuple(lst)


def _remove(modes: Tuple[int, ...], k: int) -> Tuple[int, ...]:
    lst = list(modes)
    lst.remove(k)
    return tuple(lst)


@lru_cache(maxsize=None)
def partitions(n: int) -> Tuple[Tuple[int, ...], ...]:
    """All partitions of n as descending tuples, in descending lex order."""
    if n == 0:
        return ((),)
    out = []

    def rec(remaining, maxpart, prefix):
        if remaining == 0:
            out.append(tuple(prefix))
            return
        for part in range(min(remaining, maxpart), 0, -1):
            rec(remaining - part, part, prefix + [part])

    rec(n, n, [])
    return tuple(out)


def enumerate_basis(beta: LatticeVector, lvl: int) -> List[FockMonomial]:
    """All monomials with the given sector and exact level.

    The count is the number of 2-colored partitions of the level.
    """
    beta = LatticeVector(*beta)
    out = []
    for lp in range(lvl, -1, -1):
        for pp in partitions(lp):
            for qq in partitions(lvl - lp):
                out.append(FockMonomial(beta, pp, qq))
    return out


def monomial_sort_key(m: FockMonomial):
    return (m.beta.a, m.beta.b, m.pmodes, m.qmodes)


# ---------------------------------------------------------------------------
# textual grammar

def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _format_monomial(m: FockMonomial) -> str:
    parts = [f"p(-{k})" for k in m.pmodes] + [f"q(-{k})" for k in m.qmodes]
    if m.beta != ZERO:
        parts.append(f"E[{m.beta.a},{m.beta.b}]")
    return " ".join(parts)


def format_state(v: VState) -> str:
    if v.is_zero():
        return "0"
    chunks = []
    for m in sorted(v.terms, key=monomial_sort_key):
        c = v.terms[m]
        factors = _format_monomial(m)
        if not factors:
            body = format_rational(abs(c))
        elif abs(c) == 1:
            body = factors
        else:
            body = f"{format_rational(abs(c))}*{factors}"
        if not chunks:
            chunks.append(body if c > 0 else ("-" + format_rational(abs(c)) + "*" + factors if factors else "-" + format_rational(abs(c))))
        else:
            chunks.append(("+ " if c > 0 else "- ") + body)
    return " ".join(chunks)


_TOKEN = re.compile(
    r"""
    (?P<p>p\(\s*-\s*(?P<pn>\d+)\s*\))
  | (?P<q>q\(\s*-\s*(?P<qn>\d+)\s*\))
  | (?P<e>E\[\s*(?P<ea>-?\d+)\s*,\s*(?P<eb>-?\d+)\s*\])
  | (?P<rat>-?\d+(?:\s*/\s*\d+)?)
  | (?P<star>\*)
  | (?P<sign>[+-])
  | (?P<ws>\s+)
""",
    re.VERBOSE,
)


def parse_state(text: str) -> VState:
    """Parse the textual state grammar; inverse of format_state."""
    terms = []
    cur = None  # [coeff or None, pmodes, qmodes, beta or None]
    pending_sign = 1

    def flush():
        nonlocal cur, pending_sign
        if cur is None:
            return
        coeff, pm, qm, beta = cur
        c = Fraction(pending_sign) * (coeff if coeff is not None else 1)
        terms.append((fock_monomial(beta or ZERO, pm, qm), c))
        cur = None
        pending_sign = 1

    pos = 0
    while pos < len(text):
        mt = _TOKEN.match(text, pos)
        if not mt:
            raise ValueError(f"cannot tokenize state at: {text[pos:pos + 20]!r}")
        pos = mt.end()
        if mt.lastgroup == "ws" or mt.lastgroup == "star":
            continue
        kind = mt.lastgroup
        if kind == "sign":
            flush()
            pending_sign = 1 if mt.group("sign") == "+" else -1
            continue
        if kind == "rat":
            if cur is not None:
                flush()
            val = Fraction(mt.group("rat").replace(" ", ""))
            cur = [val, [], [], None]
            continue
        if cur is None:
            cur = [None, [], [], None]
        if kind == "p":
            cur[1].append(int(mt.group("pn")))
        elif kind == "q":
            cur[2].append(int(mt.group("qn")))
        elif kind == "e":
            if cur[3] is not None:
                raise ValueError("term has more than one E factor")
            cur[3] = LatticeVector(int(mt.group("ea")), int(mt.group("eb")))
    flush()
    out = VState.zero()
    for m, c in terms:
        out = out + VState.monomial(m, c)
    return out
