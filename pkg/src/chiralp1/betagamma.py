"""The beta-gamma system on the two charts of the projective line.

Chart C0 carries the vertex algebra on two even generators, a coordinate
field x and a momentum field dx, with the defining relations

    dx_(n) x = -x_(n) dx = delta_{n,0} 1   for n >= 0,

all other generator products regular.  Chart Cinf is the same algebra in the
coordinate y; Cstar is the localized algebra on the overlap, represented in
x-coordinates with an explicit Laurent exponent for the coordinate zero-mode
sector (so x^-3 is a basis monomial, not a formal inverse).

Monomials are products of creation modes applied to the sector:

    x_(-m1) ... dx_(-k1) ... X^e,    m_i, k_j >= 1,

with mode tuples sorted descending and, on Cstar, every x_(-1) factor folded
into the exponent (x_(-1) commutes with all creators and shifts x^e to
x^{e+1}).  On C0 and Cinf the exponent is always 0 and x_(-1) factors stay
in the mode tuple.

Products are computed by the same normally ordered reconstruction as the
lattice engine.  The only case the finite Wick calculus cannot reach is a
left factor with a negative Laurent exponent (the field of x^-1 is not a
finite normal-ordered expression); those products are transported through
the bosonization isomorphism with the charge-zero lattice sector and back.

Grammar extension for states: factors 'x(-n)', 'dx(-n)', 'y(-n)', 'dy(-n)'
and 'X^e' for the Laurent sector.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, NamedTuple, Tuple

from .lincomb import LinComb
from .fock import format_rational, partitions
from .voa import (
    ITerms,
    IState,
    _deriv_coeff,
    _imerge,
    _insert,
    _ireduce,
    _remove,
    _sign,
    gbinom,
)

C0 = "C0"
CINF = "Cinf"
CSTAR = "Cstar"
_CHARTS = (C0, CINF, CSTAR)


class ChartMismatch(Exception):
    """Operands of a chart product live on different charts."""


class BGMonomial(NamedTuple):
    chart: str
    xmodes: Tuple[int, ...]
    dmodes: Tuple[int, ...]
    exp: int


def bg_monomial(chart: str, xmodes: Iterable[int] = (), dmodes: Iterable[int] = (), exp: int = 0) -> BGMonomial:
    """Canonicalizing constructor; folds x_(-1) factors into the Cstar exponent."""
    if chart not in _CHARTS:
        raise ValueError(f"unknown chart {chart!r}")
    xm = tuple(sorted(xmodes, reverse=True))
    dm = tuple(sorted(dmodes, reverse=True))
    if (xm and xm[-1] < 1) or (dm and dm[-1] < 1):
        raise ValueError("creation mode indices must be >= 1")
    if chart == CSTAR:
        ones = 0
        while xm and xm[-1] == 1:
            xm = xm[:-1]
            ones += 1
        exp += ones
    elif exp != 0:
        raise ValueError(f"Laurent exponent is only available on {CSTAR}")
    return BGMonomial(chart, xm, dm, exp)


def bg_vacuum_monomial(chart: str) -> BGMonomial:
    return BGMonomial(chart, (), (), 0)


def bg_level(m: BGMonomial) -> int:
    return sum(m.xmodes) + sum(m.dmodes)


def bg_weight(m: BGMonomial) -> int:
    """x_(-m) weighs m-1, dx_(-m) weighs m, the Laurent sector weighs 0."""
    return sum(m.xmodes) - len(m.xmodes) + sum(m.dmodes)


def bg_hcharge(m: BGMonomial) -> int:
    """Coordinate-degree grading: #x - #dx + Laurent exponent."""
    return len(m.xmodes) - len(m.dmodes) + m.exp


class BGState(LinComb):
    """Exact rational combination of BGMonomials on a single chart."""

    @classmethod
    def zero(cls) -> "BGState":
        return cls._wrap({})

    @classmethod
    def vacuum(cls, chart: str) -> "BGState":
        return cls.monomial(bg_vacuum_monomial(chart))

    @classmethod
    def monomial(cls, m: BGMonomial, c=1) -> "BGState":
        c = Fraction(c)
        return cls._wrap({m: c} if c else {})

    def chart(self) -> str:
        charts = {m.chart for m in self.terms}
        if len(charts) > 1:
            raise ChartMismatch(f"state mixes charts {sorted(charts)}")
        return charts.pop() if charts else C0

    def __repr__(self) -> str:
        return f"BGState({format_bg_state(self)!r})"


def coordinate(chart: str = C0) -> BGState:
    """The coordinate generator (x on C0/Cstar, y on Cinf)."""
    return BGState.monomial(bg_monomial(chart, xmodes=(1,)))


def momentum(chart: str = C0) -> BGState:
    """The momentum generator (dx on C0/Cstar, dy on Cinf)."""
    return BGState.monomial(bg_monomial(chart, dmodes=(1,)))


def laurent(exp: int) -> BGState:
    """The sector monomial x^exp on Cstar."""
    return BGState.monomial(bg_monomial(CSTAR, exp=exp))


# ---------------------------------------------------------------------------
# mode action and products

def monomial_bound_bg(mu: BGMonomial, mv: BGMonomial) -> int:
    """u_(n) v = 0 for n >= this; each contraction eats at most the mode sum."""
    return bg_level(mu) + bg_level(mv) + abs(mu.exp) + abs(mv.exp) + 1


def _bg_mode_terms(kind: str, j: int, terms) -> dict:
    """Mode x_(j) or dx_(j) (kind 'x'/'d') on raw terms, int or Fraction valued."""
    out: dict = {}
    if j < 0:
        k = -j
        for m, c in terms.items():
            if kind == "x":
                if m.chart == CSTAR and k == 1:
                    key = BGMonomial(m.chart, m.xmodes, m.dmodes, m.exp + 1)
                else:
                    key = BGMonomial(m.chart, _insert(m.xmodes, k), m.dmodes, m.exp)
            else:
                key = BGMonomial(m.chart, m.xmodes, _insert(m.dmodes, k), m.exp)
            got = out.get(key)
            out[key] = c if got is None else got + c
        return {k2: v for k2, v in out.items() if v}
    partner = j + 1
    for m, c in terms.items():
        if kind == "x":
            # [x_(j), dx_(-j-1)] = -1
            mult = m.dmodes.count(partner)
            if mult:
                key = BGMonomial(m.chart, m.xmodes, _remove(m.dmodes, partner), m.exp)
                got = out.get(key)
                v = c * (-mult)
                out[key] = v if got is None else got + v
        else:
            # [dx_(j), x_(-j-1)] = +1
            mult = m.xmodes.count(partner)
            if mult:
                key = BGMonomial(m.chart, _remove(m.xmodes, partner), m.dmodes, m.exp)
                got = out.get(key)
                v = c * mult
                out[key] = v if got is None else got + v
            if j == 0 and m.exp:
                key = BGMonomial(m.chart, m.xmodes, m.dmodes, m.exp - 1)
                got = out.get(key)
                v = c * m.exp
                out[key] = v if got is None else got + v
    return {k2: v for k2, v in out.items() if v}


class _NeedsTransport(Exception):
    pass


_BG_PROD_CACHE: Dict[Tuple[BGMonomial, int, BGMonomial], IState] = {}


def clear_bg_caches() -> None:
    _BG_PROD_CACHE.clear()


def _bg_product_monomial(um: BGMonomial, n: int, vm: BGMonomial) -> IState:
    key = (um, n, vm)
    cached = _BG_PROD_CACHE.get(key)
    if cached is not None:
        return cached
    if n >= monomial_bound_bg(um, vm):
        result = ({}, 1)
        _BG_PROD_CACHE[key] = result
        return result
    if um.xmodes:
        kind, m = "x", um.xmodes[0]
        rest = BGMonomial(um.chart, um.xmodes[1:], um.dmodes, um.exp)
    elif um.dmodes:
        kind, m = "d", um.dmodes[0]
        rest = BGMonomial(um.chart, um.xmodes, um.dmodes[1:], um.exp)
    elif um.exp > 0:
        kind, m = "x", 1
        rest = BGMonomial(um.chart, um.xmodes, um.dmodes, um.exp - 1)
    elif um.exp < 0:
        raise _NeedsTransport
    else:
        # vacuum sector: identity field
        result = ({vm: 1}, 1) if n == -1 else ({}, 1)
        _BG_PROD_CACHE[key] = result
        return result
    acc: ITerms = {}
    acc_den = 1
    vmax = max(bg_level(vm), 1)
    for j in range(0, vmax):
        cj = _deriv_coeff(m, j)
        if not cj:
            continue
        w = _bg_mode_terms(kind, j, {vm: 1})
        for wm, wc in w.items():
            t, td = _bg_product_monomial(rest, n - j - m, wm)
            if t:
                acc_den = _imerge(acc, acc_den, t, td, cj * wc)
    jmin = n - m - monomial_bound_bg(rest, vm) + 1
    for j in range(-1, jmin - 1, -1):
        cj = _deriv_coeff(m, j)
        if not cj:
            continue
        t, td = _bg_product_monomial(rest, n - j - m, vm)
        if t:
            acc_den = _imerge(acc, acc_den, _bg_mode_terms(kind, j, t), td, cj)
    result = _ireduce(acc, acc_den)
    _BG_PROD_CACHE[key] = result
    return result


def _to_bg_istate(v: BGState) -> IState:
    from math import gcd

    den = 1
    for c in v.terms.values():
        den = den // gcd(den, c.denominator) * c.denominator
    return {m: int(c * den) for m, c in v.terms.items()}, den


def _from_bg_istate(st: IState) -> BGState:
    terms, den = st
    return BGState._wrap({m: Fraction(c, den) for m, c in terms.items()})


def _bg_product_istate(ut: ITerms, n: int, vt: ITerms) -> IState:
    acc: ITerms = {}
    acc_den = 1
    for mu, cu in ut.items():
        for mv, cv in vt.items():
            try:
                t, td = _bg_product_monomial(mu, n, mv)
            except _NeedsTransport:
                t, td = _transport_product_monomial(mu, n, mv)
            if t:
                acc_den = _imerge(acc, acc_den, t, td, cu * cv)
    return acc, acc_den


def _transport_product_monomial(mu: BGMonomial, n: int, mv: BGMonomial) -> IState:
    """Product through the charge-zero lattice identification (negative exponents)."""
    key = (mu, n, mv)
    cached = _BG_PROD_CACHE.get(key)
    if cached is not None:
        return cached
    from .bosonization import rho_geq, rho_cstar_inverse
    from .voa import product as lattice_product

    image = lattice_product(rho_geq(BGState.monomial(mu)), n, rho_geq(BGState.monomial(mv)))
    result = _to_bg_istate(rho_cstar_inverse(image))
    _BG_PROD_CACHE[key] = result
    return result


def bg_product(u: BGState, n: int, v: BGState) -> BGState:
    """The n-th product on one chart; exact, finite, cache-backed."""
    cu = u.chart()
    cv = v.chart()
    if u.is_zero() or v.is_zero():
        return BGState.zero()
    if cu != cv:
        raise ChartMismatch(f"product across charts {cu} and {cv}")
    ut, uden = _to_bg_istate(u)
    vt, vden = _to_bg_istate(v)
    acc, acc_den = _bg_product_istate(ut, n, vt)
    return _from_bg_istate(_ireduce(acc, acc_den * uden * vden))


def bg_translate(u: BGState) -> BGState:
    return bg_product(u, -2, BGState.vacuum(u.chart()))


def bg_nilpotency_bound(u: BGState, v: BGState) -> int:
    best = 0
    for mu in u.terms:
        for mv in v.terms:
            best = max(best, monomial_bound_bg(mu, mv))
    return best


def bg_borcherds_residual(a: BGState, b: BGState, c: BGState, m: int, n: int, k: int) -> BGState:
    """Borcherds residual in the chart engine (all states are even here)."""
    from .voa import residual_window

    res = residual_window(
        _bg_product_istate,
        _to_bg_istate(a), _to_bg_istate(b), _to_bg_istate(c),
        bg_nilpotency_bound(a, b), bg_nilpotency_bound(b, c), bg_nilpotency_bound(a, c),
        1, [(m, n, k)],
    )
    return _from_bg_istate(res[(m, n, k)])


def bg_borcherds_window(a: BGState, b: BGState, c: BGState, window) -> Dict[Tuple[int, int, int], BGState]:
    from .voa import residual_window

    res = residual_window(
        _bg_product_istate,
        _to_bg_istate(a), _to_bg_istate(b), _to_bg_istate(c),
        bg_nilpotency_bound(a, b), bg_nilpotency_bound(b, c), bg_nilpotency_bound(a, c),
        1, window,
    )
    return {mnk: _from_bg_istate(st) for mnk, st in res.items()}


# ---------------------------------------------------------------------------
# chart bases

def chart_basis(chart: str, weight: int, hcharge: int) -> List[BGMonomial]:
    """All monomials of the given weight and coordinate degree on a chart.

    Finite because the weight bounds every mode multiset and the degree then
    pins the x_(-1) count (C0, Cinf) or the Laurent exponent (Cstar).
    """
    if chart not in _CHARTS:
        raise ValueError(f"unknown chart {chart!r}")
    if weight < 0:
        return []
    out: List[BGMonomial] = []
    # split the weight between shifted x-modes (x_(-m), m>=2, weighs m-1) and d-modes
    for wx in range(weight + 1):
        for px in partitions(wx):
            xm = tuple(k + 1 for k in px)
            for pd in partitions(weight - wx):
                dm = pd
                if chart == CSTAR:
                    e = hcharge - len(xm) + len(dm)
                    out.append(BGMonomial(chart, xm, dm, e))
                else:
                    ones = hcharge - len(xm) + len(dm)
                    if ones < 0:
                        continue
                    out.append(BGMonomial(chart, tuple(sorted(xm + (1,) * ones, reverse=True)), dm, 0))
    return out


# ---------------------------------------------------------------------------
# textual grammar

_BG_TOKEN = re.compile(
    r"""
    (?P<x>x\(\s*-\s*(?P<xn>\d+)\s*\))
  | (?P<dx>d[xy]\(\s*-\s*(?P<dn>\d+)\s*\))
  | (?P<y>y\(\s*-\s*(?P<yn>\d+)\s*\))
  | (?P<sector>X\^(?P<se>-?\d+))
  | (?P<rat>-?\d+(?:\s*/\s*\d+)?)
  | (?P<star>\*)
  | (?P<sign>[+-])
  | (?P<ws>\s+)
""",
    re.VERBOSE,
)


def format_bg_state(v: BGState) -> str:
    if v.is_zero():
        return "0"
    chart = v.chart()
    cname = "y" if chart == CINF else "x"
    chunks = []
    for m in sorted(v.terms, key=lambda mo: (mo.exp, mo.xmodes, mo.dmodes)):
        c = v.terms[m]
        parts = [f"{cname}(-{k})" for k in m.xmodes]
        parts += [f"d{cname}(-{k})" for k in m.dmodes]
        if m.exp or (m.chart == CSTAR and not parts):
            parts.append(f"X^{m.exp}")
        factors = " ".join(parts)
        if not factors:
            body = format_rational(abs(c))
        elif abs(c) == 1:
            body = factors
        else:
            body = f"{format_rational(abs(c))}*{factors}"
        if not chunks:
            if c > 0:
                chunks.append(body)
            else:
                chunks.append("-" + format_rational(abs(c)) + "*" + factors if factors else "-" + format_rational(abs(c)))
        else:
            chunks.append(("+ " if c > 0 else "- ") + body)
    return " ".join(chunks)


def parse_bg_state(text: str, chart: str = None) -> BGState:
    """Parse a chart state; the chart is inferred from the factors if not given."""
    saw_y = "y(" in text or "dy(" in text
    saw_sector = "X^" in text
    if chart is None:
        if saw_sector:
            chart = CSTAR
        elif saw_y:
            chart = CINF
        else:
            chart = C0
    terms = []
    cur = None  # [coeff, xmodes, dmodes, exp]
    pending_sign = 1

    def flush():
        nonlocal cur, pending_sign
        if cur is None:
            return
        coeff, xm, dm, exp = cur
        c = Fraction(pending_sign) * (coeff if coeff is not None else 1)
        terms.append((bg_monomial(chart, xm, dm, exp or 0), c))
        cur = None
        pending_sign = 1

    pos = 0
    while pos < len(text):
        mt = _BG_TOKEN.match(text, pos)
        if not mt:
            raise ValueError(f"cannot tokenize chart state at: {text[pos:pos + 20]!r}")
        pos = mt.end()
        kind = mt.lastgroup
        if kind in ("ws", "star"):
            continue
        if kind == "sign":
            flush()
            pending_sign = 1 if mt.group("sign") == "+" else -1
            continue
        if kind == "rat":
            if cur is not None:
                flush()
            cur = [Fraction(mt.group("rat").replace(" ", "")), [], [], None]
            continue
        if cur is None:
            cur = [None, [], [], None]
        if kind == "x":
            cur[1].append(int(mt.group("xn")))
        elif kind == "y":
            cur[1].append(int(mt.group("yn")))
        elif kind == "dx":
            cur[2].append(int(mt.group("dn")))
        elif kind == "sector":
            if cur[3] is not None:
                raise ValueError("term has more than one sector factor")
            cur[3] = int(mt.group("se"))
    flush()
    out = BGState.zero()
    for m, c in terms:
        out = out + BGState.monomial(m, c)
    return out
