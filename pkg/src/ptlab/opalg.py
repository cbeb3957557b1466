"""Exact polynomial algebra in x and p with [x, p] = i.

Public polynomials are :class:`SymPoly` objects expanded in the totally
symmetrised monomials ``S(m, n)`` (``m`` factors of p, ``n`` of x).  Products
are taken in normal order (every x left of every p) and converted back.
Coefficients are Gaussian rationals, so every identity is checked exactly.

Conversion rules used throughout::

    p^b x^c   = sum_k C(b,k) c!/(c-k)! (-i)^k  x^(c-k) p^(b-k)
    S(m, n)   = sum_k k! C(m,k) C(n,k) (-i/2)^k  x^(n-k) p^(m-k)
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Tuple

from .errors import ConvergenceError, DomainError

__all__ = [
    "GaussianRational",
    "SymPoly",
    "QSeries",
    "Series",
    "multiply",
    "commutator",
    "parity_conjugate",
    "brute_force_symmetrized",
    "H0",
    "H1",
    "solve_q_hierarchy",
    "verify_c_commutes",
    "ShiftedOscillatorReport",
    "shifted_oscillator_check",
]


class GaussianRational:
    """``re + i im`` with ``Fraction`` parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def coerce(cls, v) -> "GaussianRational":
        if isinstance(v, GaussianRational):
            return v
        if isinstance(v, complex):
            return cls(Fraction(v.real).limit_denominator(10 ** 12),
                       Fraction(v.imag).limit_denominator(10 ** 12))
        if isinstance(v, str):
            v = v.replace(" ", "")
            if v.endswith("i"):
                body = v[:-1]
                return cls(0, Fraction(body if body not in ("", "+", "-") else body + "1"))
            return cls(Fraction(v))
        return cls(Fraction(v))

    def __add__(self, o):
        o = GaussianRational.coerce(o)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, o):
        o = GaussianRational.coerce(o)
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        return GaussianRational.coerce(o) - self

    def __mul__(self, o):
        o = GaussianRational.coerce(o)
        return GaussianRational(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = GaussianRational.coerce(o)
        d = o.re * o.re + o.im * o.im
        if d == 0:
            raise ZeroDivisionError("division by zero")
        return GaussianRational((self.re * o.re + self.im * o.im) / d,
                                (self.im * o.re - self.re * o.im) / d)

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, o):
        try:
            o = GaussianRational.coerce(o)
        except (TypeError, ValueError):
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def magnitude_bound(self) -> Fraction:
        """``max(|re|, |im|)``, an exact size measure."""
        return max(abs(self.re), abs(self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"({self.re}{sign}{abs(self.im)}i)"


_ZERO = GaussianRational(0)
# powers of i as (re, im)
_IPOW = [(1, 0), (0, 1), (-1, 0), (0, -1)]


def _times_ipow(c: GaussianRational, scale, k: int) -> GaussianRational:
    """``c * scale * i^k`` for rational ``scale``."""
    a, b = _IPOW[k % 4]
    return GaussianRational(scale * (c.re * a - c.im * b), scale * (c.re * b + c.im * a))


Terms = Dict[Tuple[int, int], GaussianRational]


def _clean(terms: Terms) -> Terms:
    return {k: v for k, v in terms.items() if v}


def _accumulate(out: Terms, key, val):
    cur = out.get(key)
    out[key] = val if cur is None else cur + val


# --- normal-ordered kernels (keys are (x-power, p-power)) -------------------

def _normal_product(A: Terms, B: Terms) -> Terms:
    out: Terms = {}
    for (a, b), ca in A.items():
        for (c, d), cb in B.items():
            cc = ca * cb
            for k in range(min(b, c) + 1):
                scale = math.comb(b, k) * math.perm(c, k)
                _accumulate(out, (a + c - k, b - k + d), _times_ipow(cc, scale, -k))
    return _clean(out)


def _sym_to_normal_monomial(m: int, n: int) -> Terms:
    out: Terms = {}
    for k in range(min(m, n) + 1):
        coef = Fraction(math.factorial(k) * math.comb(m, k) * math.comb(n, k), 2 ** k)
        a, b = _IPOW[(-k) % 4]
        out[(n - k, m - k)] = GaussianRational(coef * a, coef * b)
    return out


def _to_normal(sym: Terms) -> Terms:
    out: Terms = {}
    for (m, n), c in sym.items():
        for key, v in _sym_to_normal_monomial(m, n).items():
            _accumulate(out, key, c * v)
    return _clean(out)


def _from_normal(normal: Terms) -> Terms:
    rest = dict(normal)
    out: Terms = {}
    while rest:
        (a, b) = max(rest, key=lambda k: (k[0] + k[1], k))
        c = rest.pop((a, b))
        if not c:
            continue
        out[(b, a)] = out.get((b, a), _ZERO) + c
        for key, v in _sym_to_normal_monomial(b, a).items():
            if key == (a, b):
                continue
            _accumulate(rest, key, -(c * v))
        rest = _clean(rest)
    return _clean(out)


@dataclass(frozen=True, eq=False)
class SymPoly:
    """Polynomial ``sum c_{m,n} S(m, n)``; zero coefficients are never stored."""

    terms: Terms = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (m, n), v in self.terms.items():
            if m < 0 or n < 0:
                raise DomainError("degrees must be non-negative")
            v = GaussianRational.coerce(v)
            if v:
                clean[(int(m), int(n))] = v
        object.__setattr__(self, "terms", clean)

    @classmethod
    def monomial(cls, m: int, n: int, coef=1) -> "SymPoly":
        return cls({(m, n): coef})

    @classmethod
    def constant(cls, c) -> "SymPoly":
        return cls({(0, 0): c})

    @classmethod
    def from_normal_ordered(cls, normal: dict) -> "SymPoly":
        """From ``{(x_power, p_power): coef}`` meaning ``sum coef x^a p^b``."""
        return cls(_from_normal({k: GaussianRational.coerce(v) for k, v in normal.items()}))

    def normal_ordered(self) -> Terms:
        return _to_normal(self.terms)

    def coefficient(self, m: int, n: int) -> GaussianRational:
        return self.terms.get((m, n), _ZERO)

    def is_zero(self) -> bool:
        return not self.terms

    def is_hermitian(self) -> bool:
        return all(v.im == 0 for v in self.terms.values())

    def is_antihermitian(self) -> bool:
        return all(v.re == 0 for v in self.terms.values())

    @property
    def degree(self) -> int:
        return max((m + n for m, n in self.terms), default=-1)

    def max_coefficient(self) -> Fraction:
        return max((v.magnitude_bound() for v in self.terms.values()), default=Fraction(0))

    def __add__(self, o):
        o = _as_poly(o)
        out = dict(self.terms)
        for k, v in o.terms.items():
            _accumulate(out, k, v)
        return SymPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return SymPoly({k: -v for k, v in self.terms.items()})

    def __sub__(self, o):
        return self + (-_as_poly(o))

    def __rsub__(self, o):
        return _as_poly(o) - self

    def scale(self, c) -> "SymPoly":
        c = GaussianRational.coerce(c)
        return SymPoly({k: v * c for k, v in self.terms.items()})

    def __mul__(self, o):
        if isinstance(o, SymPoly):
            return multiply(self, o)
        return self.scale(o)

    def __rmul__(self, o):
        return self.scale(o)

    def __eq__(self, o):
        if not isinstance(o, SymPoly):
            try:
                o = _as_poly(o)
            except (TypeError, ValueError):
                return NotImplemented
        return self.terms == o.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        return f"SymPoly({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for (m, n) in sorted(self.terms, key=lambda k: (-(k[0] + k[1]), -k[0])):
            parts.append(f"{self.terms[(m, n)]}*S({m},{n})")
        return " + ".join(parts)

    def to_dict(self) -> dict:
        return {f"S({m},{n})": str(v) for (m, n), v in sorted(self.terms.items())}


def _as_poly(o) -> SymPoly:
    if isinstance(o, SymPoly):
        return o
    return SymPoly.constant(o)


def multiply(A: SymPoly, B: SymPoly) -> SymPoly:
    """Exact operator product ``A B``."""
    return SymPoly(_from_normal(_normal_product(_to_normal(A.terms), _to_normal(B.terms))))


def commutator(A: SymPoly, B: SymPoly) -> SymPoly:
    na, nb = _to_normal(A.terms), _to_normal(B.terms)
    diff = _normal_product(na, nb)
    for k, v in _normal_product(nb, na).items():
        _accumulate(diff, k, -v)
    return SymPoly(_from_normal(_clean(diff)))


def parity_conjugate(A: SymPoly) -> SymPoly:
    """``P A P``: x -> -x, p -> -p."""
    return SymPoly({(m, n): (v if (m + n) % 2 == 0 else -v) for (m, n), v in A.terms.items()})


def brute_force_symmetrized(m: int, n: int) -> Terms:
    """Normal-ordered form of ``S(m, n)`` by averaging every ordering of the
    letters, each reduced with ``p x = x p - i`` one letter at a time.
    Independent of the closed-form conversion; meant for checking it."""
    total: Terms = {}
    words = set(itertools.permutations("p" * m + "x" * n))
    X = {(1, 0): GaussianRational(1)}
    Pm = {(0, 1): GaussianRational(1)}
    for w in words:
        cur: Terms = {(0, 0): GaussianRational(1)}
        for letter in w:
            cur = _brute_step(cur, letter)
        for k, v in cur.items():
            _accumulate(total, k, v)
    cnt = len(words)
    return _clean({k: v * Fraction(1, cnt) for k, v in total.items()})


def _brute_step(cur: Terms, letter: str) -> Terms:
    out: Terms = {}
    for (a, b), c in cur.items():
        if letter == "p":
            _accumulate(out, (a, b + 1), c)
        else:
            # x^a p^b x: move x left through p^b using p x = x p - i
            _accumulate(out, (a + 1, b), c)
            if b:
                _accumulate(out, (a, b - 1), c * GaussianRational(0, -b))
    return _clean(out)


H0 = SymPoly({(2, 0): Fraction(1, 2), (0, 2): Fraction(1, 2)})
H1 = SymPoly({(0, 3): GaussianRational(0, 1)})


# --- epsilon series ---------------------------------------------------------

class Series:
    """Truncated power series in a formal coupling with SymPoly coefficients.

    Coefficients are kept normal-ordered internally for speed."""

    def __init__(self, coeffs: dict, order: int):
        self.order = order
        self.c = {k: v for k, v in coeffs.items() if k <= order and v}

    @classmethod
    def from_polys(cls, polys: dict, order: int) -> "Series":
        return cls({k: _to_normal(p.terms) for k, p in polys.items()}, order)

    def __add__(self, o: "Series") -> "Series":
        out = {k: dict(v) for k, v in self.c.items()}
        for k, v in o.c.items():
            d = out.setdefault(k, {})
            for key, val in v.items():
                _accumulate(d, key, val)
        return Series({k: _clean(v) for k, v in out.items()}, min(self.order, o.order))

    def scale(self, s) -> "Series":
        s = GaussianRational.coerce(s)
        return Series({k: {kk: vv * s for kk, vv in v.items()} for k, v in self.c.items()},
                      self.order)

    def __sub__(self, o):
        return self + o.scale(-1)

    def __mul__(self, o: "Series") -> "Series":
        order = min(self.order, o.order)
        out: dict = {}
        for i, a in self.c.items():
            for j, b in o.c.items():
                if i + j > order:
                    continue
                d = out.setdefault(i + j, {})
                for key, val in _normal_product(a, b).items():
                    _accumulate(d, key, val)
        return Series({k: _clean(v) for k, v in out.items()}, order)

    def shift(self, k: int) -> "Series":
        """Multiply by ``eps^k``."""
        return Series({i + k: v for i, v in self.c.items()}, self.order)

    def coefficient(self, k: int) -> SymPoly:
        return SymPoly(_from_normal(self.c.get(k, {})))

    def exp(self) -> "Series":
        """``exp`` of a series with no constant term."""
        if self.c.get(0):
            raise DomainError("exp needs a series without constant term")
        result = Series({0: {(0, 0): GaussianRational(1)}}, self.order)
        term = result
        for j in range(1, self.order + 1):
            term = (term * self).scale(Fraction(1, j))
            if not term.c:
                break
            result = result + term
        return result


@dataclass(frozen=True)
class QSeries:
    """``Q = eps Q1 + eps^3 Q3 + ...``; ``terms[k]`` is ``Q_k``."""

    terms: dict
    symbol: str = "eps"

    def __getitem__(self, k: int) -> SymPoly:
        return self.terms[k]

    @property
    def max_order(self) -> int:
        return max(self.terms)

    def series(self, order: int) -> Series:
        return Series.from_polys(self.terms, order)

    def to_dict(self) -> dict:
        return {f"Q{k}": v.to_dict() for k, v in sorted(self.terms.items())}


def _ansatz(k: int):
    top = 2 * k + 1
    return [(m, n) for m in range(1, top + 1, 2) for n in range(0, top + 1 - m, 2)]


def _solve_exact(columns, rhs, unknowns):
    """Solve ``sum_j x_j col_j = rhs`` for real ``x`` exactly.

    Columns and rhs are SymPolys; each (monomial, re/im) pair is one
    equation.  Raises on inconsistency or a non-trivial kernel.
    """
    keys = set(rhs.terms)
    for c in columns:
        keys |= set(c.terms)
    rows = []
    for key in sorted(keys):
        for part in ("re", "im"):
            row = [getattr(c.coefficient(*key), part) for c in columns]
            rows.append(row + [getattr(rhs.coefficient(*key), part)])
    n = len(columns)
    piv_cols = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pv = rows[r][col]
        rows[r] = [v / pv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        piv_cols.append(col)
        r += 1
    for i in range(r, len(rows)):
        if rows[i][n] != 0:
            raise ConvergenceError("inconsistent linear system for Q (algebra error)")
    if len(piv_cols) < n:
        free = [unknowns[j] for j in range(n) if j not in piv_cols]
        raise ConvergenceError(f"[H0, .] has a kernel on the ansatz: free monomials {free}")
    x = [Fraction(0)] * n
    for i, col in enumerate(piv_cols):
        x[col] = rows[i][n]
    return x


def _rhs(level: int, q: dict) -> SymPoly:
    Q1 = q.get(1)
    if level == 1:
        return H1.scale(-2)
    if level == 3:
        return commutator(Q1, commutator(Q1, H1)).scale(Fraction(-1, 6))
    if level == 5:
        Q3 = q[3]
        c1 = commutator(Q1, H1)
        a = commutator(Q1, commutator(Q1, commutator(Q1, c1))).scale(Fraction(1, 360))
        b = commutator(Q1, commutator(Q3, H1)) + commutator(Q3, c1)
        return a - b.scale(Fraction(1, 6))
    raise DomainError("hierarchy is available for orders 1, 3, 5")


def solve_q_hierarchy(order: int) -> QSeries:
    """Solve ``[H0, Q_k] = R_k`` for ``k = 1, 3, ..., order``.

    ``R_k`` collects the lower-order nested commutators that make
    ``C = exp(Q) P`` commute with ``H0 + eps H1`` order by order.  Each
    ``Q_k`` is the real combination of every ``S(m, n)`` with ``m`` odd,
    ``n`` even and ``m + n <= 2k + 1``.
    """
    if order not in (1, 3, 5):
        raise DomainError("order must be 1, 3 or 5")
    q: dict = {}
    for k in range(1, order + 1, 2):
        basis = _ansatz(k)
        cols = [commutator(H0, SymPoly.monomial(m, n)) for m, n in basis]
        coef = _solve_exact(cols, _rhs(k, q), basis)
        q[k] = SymPoly({mn: c for mn, c in zip(basis, coef)})
    return QSeries(q)


def verify_c_commutes(q: QSeries, max_order: int) -> Fraction:
    """Largest coefficient of ``2 eps e^Q H1 - [e^Q, H0 + eps H1]`` through
    order ``eps^(max_order + 1)``.  Zero means ``exp(Q) P`` commutes with
    ``H`` to that order."""
    M = max_order + 1
    if max_order > q.max_order:
        raise DomainError(f"Q is known through order {q.max_order} only")
    Q = Series.from_polys({k: v for k, v in q.terms.items() if k <= max_order}, M)
    eQ = Q.exp()
    h0 = Series.from_polys({0: H0}, M)
    h1 = Series.from_polys({1: H1}, M)
    H = h0 + h1
    lhs = (eQ * h1).scale(2)
    rhs = eQ * H - H * eQ
    diff = lhs - rhs
    worst = Fraction(0)
    for k in range(M + 1):
        worst = max(worst, diff.coefficient(k).max_coefficient())
    return worst


@dataclass(frozen=True)
class ShiftedOscillatorReport:
    """Exact commutator checks for the shifted oscillator.

    ``symbolic_residual``: ``[e^{-eps p} P, p^2 + x^2 + i eps x]`` with eps
    formal (unit-mass-1/2 normalisation, where ``Q = -eps p``).
    ``residual``: the same at the given rational eps.
    ``half_units_residual``: ``[e^{-2 eps p} P, p^2/2 + x^2/2 + i eps x]``
    with eps formal; this Hamiltonian has the levels in ``levels``.
    """

    eps: Fraction
    symbolic_residual: Fraction
    residual: Fraction
    half_units_residual: Fraction
    c_equals_p: bool
    levels: tuple

    @property
    def exact(self) -> bool:
        return not (self.symbolic_residual or self.residual or self.half_units_residual)


def _conjugate_by_exp(Q: Series, A: Series, order: int) -> Series:
    """``e^Q A e^{-Q} = A + [Q, A] + [Q, [Q, A]]/2! + ...`` (terminating
    when Q is linear and A polynomial)."""
    total = A
    term = A
    for j in range(1, order + 1):
        term = (Q * term - term * Q).scale(Fraction(1, j))
        if not term.c:
            break
        total = total + term
    return total


def _c_commutator_residual(q_coef, h0: SymPoly, h1: SymPoly, eps=None, order: int = 6):
    """Residual of ``e^Q (P H P) e^{-Q} = H`` for ``Q = eps q_coef p`` and
    ``H = h0 + eps h1``.  ``[C, H] = 0`` with ``C = e^Q P`` is equivalent.

    Returns the largest coefficient over all powers of eps, or the largest
    coefficient after substituting the rational ``eps``.
    """
    Q = Series.from_polys({1: SymPoly.monomial(1, 0, q_coef)}, order)
    H = Series.from_polys({0: h0, 1: h1}, order)
    PHP = Series.from_polys({0: parity_conjugate(h0), 1: parity_conjugate(h1)}, order)
    diff = _conjugate_by_exp(Q, PHP, order) - H
    if eps is None:
        return max((diff.coefficient(k).max_coefficient() for k in range(order + 1)),
                   default=Fraction(0))
    value = SymPoly()
    for k in range(order + 1):
        value = value + diff.coefficient(k).scale(Fraction(eps) ** k)
    return value.max_coefficient()


def shifted_oscillator_check(eps, levels: int = 6) -> ShiftedOscillatorReport:
    """Exact check that ``C = e^{-eps p} P`` commutes with the shifted
    oscillator, plus the predicted levels ``n + 1/2 + eps^2/2``.

    ``e^{-eps p}`` translates x by ``i eps``.  That is exactly what
    ``p^2 + x^2 + i eps x`` needs; the ``p^2/2 + x^2/2 + i eps x`` form
    needs twice the translation, which is checked as well.
    """
    eps = Fraction(eps)
    iX = SymPoly.monomial(0, 1, GaussianRational(0, 1))
    unit_h0 = SymPoly({(2, 0): 1, (0, 2): 1})
    symbolic = _c_commutator_residual(-1, unit_h0, iX)
    value = _c_commutator_residual(-1, unit_h0, iX, eps)
    half = _c_commutator_residual(-2, H0, iX)
    pred = tuple(Fraction(2 * n + 1, 2) + eps * eps / 2 for n in range(levels))
    return ShiftedOscillatorReport(eps, symbolic, value, half, bool(eps == 0), pred)
