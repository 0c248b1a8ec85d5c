"""Exact graded-commutative polynomial engine.

Elements are finite rational linear combinations of monomials.  A monomial is
an even part (commuting generators with exponents) times an ordered word of
odd generators.  Normal form: odd words strictly increasing in the fixed
generator order, repeated odd generators annihilate, zero coefficients are
dropped.  All coefficients are exact `fractions.Fraction`; the symbol pi_inv
carries every occurrence of 1/pi, so no float ever appears.
"""

from __future__ import annotations

import json
from enum import IntEnum
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Union

try:  # exact rational coefficients; gmpy2 is a drop-in speedup when present
    from gmpy2 import mpq as Q
except ImportError:  # pragma: no cover
    Q = Fraction

RAT_TYPES = (int, Fraction, type(Q(1)))

Rat = Union[Fraction, int]


class CartanWeilError(Exception):
    """Base class for all package errors."""


class MissingActionError(CartanWeilError):
    """A derivation was applied to a generator it has no rule for."""

    def __init__(self, derivation_name: str, generator: "Generator"):
        self.generator = generator
        super().__init__(
            f"derivation {derivation_name!r} has no action for generator {generator.name}"
        )


class ForeignGeneratorError(CartanWeilError):
    """An element contains a generator outside the expected model."""


class UnassignedGeneratorError(CartanWeilError):
    """evaluate() met an even generator without an assigned value."""


class OddGeneratorError(CartanWeilError):
    """evaluate() met an odd generator under the 'reject' policy."""


class Kind(IntEnum):
    """Generator kinds.  The enum order fixes the canonical odd-word order."""

    THETA_G = 0   # Theta^i : Maurer-Cartan components on G (odd, degree 1)
    THETA_W = 1   # theta^i : Weil exterior generators (odd, degree 1)
    MU = 2        # mu^i    : Weil symmetric generators (even, degree 2)
    DTHETA = 3    # dtheta  : loop 1-form marker (odd, degree 1)
    A = 4         # A^i_j   : adjoint matrix entries (even, degree 0)
    ABAR = 5      # Abar^i_j: inverse adjoint entries (even, degree 0)
    CHI = 6       # chi^i   : Cartan polynomial variables (even, degree 2)
    ALPHA = 7     # alpha   : path cutoff parameter (even, degree 0)
    T = 8         # t       : transgression parameter (even, degree 0)
    PI_INV = 9    # 1/pi    : formal normalisation symbol (even, degree 0)
    DT = 10       # dt      : parameter 1-form on [0,1] (odd, degree 1)


_ODD_KINDS = frozenset({Kind.THETA_G, Kind.THETA_W, Kind.DTHETA, Kind.DT})
_DEGREES = {
    Kind.THETA_G: 1, Kind.THETA_W: 1, Kind.MU: 2, Kind.DTHETA: 1,
    Kind.A: 0, Kind.ABAR: 0, Kind.CHI: 2, Kind.ALPHA: 0, Kind.T: 0,
    Kind.PI_INV: 0, Kind.DT: 1,
}

_KIND_NAMES = {
    Kind.THETA_G: "Theta", Kind.THETA_W: "theta", Kind.MU: "mu",
    Kind.DTHETA: "dtheta", Kind.A: "A", Kind.ABAR: "Abar", Kind.CHI: "chi",
    Kind.ALPHA: "alpha", Kind.T: "t", Kind.PI_INV: "pi_inv", Kind.DT: "dt",
}
_NAMES_KIND = {v: k for k, v in _KIND_NAMES.items()}


class Generator:
    """A formal generator: a kind plus a (possibly empty) 1-based index."""

    __slots__ = ("kind", "index", "_key")

    def __init__(self, kind: Kind, index: tuple[int, ...] = ()):
        self.kind = kind
        self.index = tuple(index)
        i = self.index[0] if len(self.index) > 0 else 0
        j = self.index[1] if len(self.index) > 1 else 0
        self._key = (int(kind) << 42) | ((i + 1) << 21) | (j + 1)

    def __hash__(self) -> int:
        return self._key

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Generator) and self._key == other._key

    def __lt__(self, other: "Generator") -> bool:
        return self._key < other._key

    def __le__(self, other: "Generator") -> bool:
        return self._key <= other._key

    @property
    def parity(self) -> int:
        return 1 if self.kind in _ODD_KINDS else 0

    @property
    def degree(self) -> int:
        return _DEGREES[self.kind]

    @property
    def name(self) -> str:
        base = _KIND_NAMES[self.kind]
        if self.index:
            return base + "_" + "_".join(str(i) for i in self.index)
        return base

    def __repr__(self) -> str:
        return self.name


_GEN_CACHE: dict[tuple[Kind, tuple[int, ...]], Generator] = {}


def _gen(kind: Kind, index: tuple[int, ...] = ()) -> Generator:
    g = _GEN_CACHE.get((kind, index))
    if g is None:
        g = Generator(kind, index)
        _GEN_CACHE[(kind, index)] = g
    return g


def Theta(i: int) -> Generator:
    return _gen(Kind.THETA_G, (i,))


def theta(i: int) -> Generator:
    return _gen(Kind.THETA_W, (i,))


def mu(i: int) -> Generator:
    return _gen(Kind.MU, (i,))


def dtheta() -> Generator:
    return _gen(Kind.DTHETA)


def A(i: int, j: int) -> Generator:
    return _gen(Kind.A, (i, j))


def Abar(i: int, j: int) -> Generator:
    return _gen(Kind.ABAR, (i, j))


def chi(i: int) -> Generator:
    return _gen(Kind.CHI, (i,))


def alpha() -> Generator:
    return _gen(Kind.ALPHA)


def t_param() -> Generator:
    return _gen(Kind.T)


def pi_inv() -> Generator:
    return _gen(Kind.PI_INV)


def dt() -> Generator:
    return _gen(Kind.DT)


def parse_generator(name: str) -> Generator:
    parts = name.split("_")
    # pi_inv is the only base name containing an underscore
    if name == "pi_inv":
        return pi_inv()
    base = parts[0]
    if base not in _NAMES_KIND:
        raise CartanWeilError(f"unknown generator name {name!r}")
    idx = tuple(int(p) for p in parts[1:])
    return _gen(_NAMES_KIND[base], idx)


# A term key is (even, odd): even is a sorted tuple of (Generator, exponent),
# odd is a strictly increasing tuple of odd Generators.
TermKey = tuple[tuple[tuple[Generator, int], ...], tuple[Generator, ...]]

_EMPTY: TermKey = ((), ())


def _merge_even(e1, e2):
    if not e1:
        return e2
    if not e2:
        return e1
    out = []
    i = j = 0
    n1, n2 = len(e1), len(e2)
    while i < n1 and j < n2:
        g1, m1 = e1[i]
        g2, m2 = e2[j]
        if g1._key == g2._key:
            out.append((g1, m1 + m2))
            i += 1
            j += 1
        elif g1._key < g2._key:
            out.append(e1[i])
            i += 1
        else:
            out.append(e2[j])
            j += 1
    out.extend(e1[i:])
    out.extend(e2[j:])
    return tuple(out)


def _merge_odd(o1, o2):
    """Merge two canonical odd words.  Returns (sign, word); sign 0 on repeat."""
    if not o1:
        return 1, o2
    if not o2:
        return 1, o1
    out = []
    sign = 1
    i = j = 0
    n1, n2 = len(o1), len(o2)
    while i < n1 and j < n2:
        a, b = o1[i], o2[j]
        if a._key == b._key:
            return 0, ()
        if a._key < b._key:
            out.append(a)
            i += 1
        else:
            out.append(b)
            j += 1
            if (n1 - i) & 1:
                sign = -sign
    out.extend(o1[i:])
    out.extend(o2[j:])
    return sign, tuple(out)


class GradedElement:
    """An element of the graded-commutative algebra, in normal form."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[TermKey, Fraction] | None = None):
        self.terms: dict[TermKey, Fraction] = dict(terms) if terms else {}

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero() -> "GradedElement":
        return GradedElement()

    @staticmethod
    def scalar(c: Rat) -> "GradedElement":
        c = Q(c)
        if c == 0:
            return GradedElement()
        return GradedElement({_EMPTY: c})

    @staticmethod
    def one() -> "GradedElement":
        return GradedElement.scalar(1)

    @staticmethod
    def from_gen(g: Generator, c: Rat = 1) -> "GradedElement":
        c = Q(c)
        if c == 0:
            return GradedElement()
        if g.parity:
            return GradedElement({((), (g,)): c})
        return GradedElement({(((g, 1),), ()): c})

    # -- basic queries -------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def generators(self) -> set[Generator]:
        out: set[Generator] = set()
        for (even, odd) in self.terms:
            out.update(g for g, _ in even)
            out.update(odd)
        return out

    def parity(self) -> int | None:
        """Common parity of all terms, or None if mixed/zero."""
        if not self.terms:
            return None
        ps = {len(odd) & 1 for (_, odd) in self.terms}
        return ps.pop() if len(ps) == 1 else None

    def degree_decomposition(self) -> dict[int, "GradedElement"]:
        out: dict[int, GradedElement] = {}
        for (even, odd), c in self.terms.items():
            d = sum(g.degree * m for g, m in even) + sum(g.degree for g in odd)
            out.setdefault(d, GradedElement()).terms[(even, odd)] = c
        return out

    def homogeneous_degree(self) -> int | None:
        dec = self.degree_decomposition()
        if len(dec) == 1:
            return next(iter(dec))
        return None

    # -- ring operations -----------------------------------------------------

    def __add__(self, other: "GradedElement") -> "GradedElement":
        out = dict(self.terms)
        for k, c in other.terms.items():
            s = out.get(k)
            if s is None:
                out[k] = c
            else:
                s = s + c
                if s:
                    out[k] = s
                else:
                    del out[k]
        return GradedElement(out)

    def __sub__(self, other: "GradedElement") -> "GradedElement":
        out = dict(self.terms)
        for k, c in other.terms.items():
            s = out.get(k)
            if s is None:
                out[k] = -c
            else:
                s = s - c
                if s:
                    out[k] = s
                else:
                    del out[k]
        return GradedElement(out)

    def __neg__(self) -> "GradedElement":
        return GradedElement({k: -c for k, c in self.terms.items()})

    def scale(self, c: Rat) -> "GradedElement":
        c = Q(c)
        if c == 0:
            return GradedElement()
        return GradedElement({k: v * c for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, RAT_TYPES):
            return self.scale(other)
        if not isinstance(other, GradedElement):
            return NotImplemented
        out: dict[TermKey, Fraction] = {}
        merge_even = _merge_even
        merge_odd = _merge_odd
        get = out.get
        for (e1, o1), c1 in self.terms.items():
            for (e2, o2), c2 in other.terms.items():
                sign, odd = merge_odd(o1, o2)
                if sign == 0:
                    continue
                key = (merge_even(e1, e2), odd)
                c = c1 * c2 if sign == 1 else -c1 * c2
                s = get(key)
                if s is None:
                    out[key] = c
                else:
                    s = s + c
                    if s:
                        out[key] = s
                    else:
                        del out[key]
        return GradedElement(out)

    def __rmul__(self, other):
        if isinstance(other, RAT_TYPES):
            return self.scale(other)
        return NotImplemented

    def add_into(self, acc: dict, factor=None) -> None:
        """acc += factor * self, mutating the raw term dict acc."""
        get = acc.get
        if factor is None:
            for k, c in self.terms.items():
                s = get(k)
                if s is None:
                    acc[k] = c
                else:
                    s = s + c
                    if s:
                        acc[k] = s
                    else:
                        del acc[k]
        else:
            for k, c in self.terms.items():
                v = c * factor
                s = get(k)
                if s is None:
                    acc[k] = v
                else:
                    s = s + v
                    if s:
                        acc[k] = s
                    else:
                        del acc[k]

    def __pow__(self, n: int) -> "GradedElement":
        if n < 0:
            raise CartanWeilError("negative powers are not defined")
        result = GradedElement.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GradedElement) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    # -- substitution and evaluation ------------------------------------------

    def substitute(self, mapping: Mapping[Generator, "GradedElement | Rat"]) -> "GradedElement":
        """Replace generators by elements (or rationals).  Odd generators may
        only be replaced by odd-homogeneous elements or zero."""
        vals: dict[Generator, GradedElement] = {}
        for g, v in mapping.items():
            el = v if isinstance(v, GradedElement) else GradedElement.scalar(v)
            if g.parity and el.terms and el.parity() != 1:
                raise CartanWeilError(
                    f"cannot substitute odd generator {g.name} by a non-odd element"
                )
            vals[g] = el
        out = GradedElement()
        for (even, odd), c in self.terms.items():
            piece = GradedElement.scalar(c)
            for g, m in even:
                rep = vals.get(g)
                if rep is None:
                    piece = piece * GradedElement({(((g, m),), ()): Q(1)})
                else:
                    piece = piece * rep ** m
                if piece.is_zero():
                    break
            else:
                for g in odd:
                    rep = vals.get(g)
                    if rep is None:
                        piece = piece * GradedElement({((), (g,)): Q(1)})
                    else:
                        piece = piece * rep
                    if piece.is_zero():
                        break
            out = out + piece
        return out

    def evaluate(
        self,
        assignment: Mapping[Generator, Rat],
        odd_policy: str = "reject",
    ) -> "Fraction | dict[tuple[Generator, ...], Fraction]":
        """Exact substitution of every even generator.

        odd_policy 'reject' demands an odd-free element and returns a rational;
        'coefficient_extraction' returns a table keyed by odd words.
        """
        if odd_policy not in ("reject", "coefficient_extraction"):
            raise CartanWeilError(f"unknown odd policy {odd_policy!r}")
        table: dict[tuple[Generator, ...], Fraction] = {}
        for (even, odd), c in self.terms.items():
            if odd and odd_policy == "reject":
                raise OddGeneratorError(
                    f"odd generator {odd[0].name} present under policy 'reject'"
                )
            val = c
            for g, m in even:
                if g not in assignment:
                    raise UnassignedGeneratorError(
                        f"even generator {g.name} has no assigned value"
                    )
                val = val * Q(assignment[g]) ** m
            if val:
                s = table.get(odd)
                if s is None:
                    table[odd] = val
                else:
                    s = s + val
                    if s:
                        table[odd] = s
                    else:
                        del table[odd]
        if odd_policy == "reject":
            return table.get((), Q(0))
        return table

    def odd_coefficient(self, g: Generator) -> "GradedElement":
        """Coefficient of the odd generator g: x = g*result + (terms without g)."""
        if not g.parity:
            raise CartanWeilError(f"{g.name} is not odd")
        out: dict[TermKey, Fraction] = {}
        for (even, odd), c in self.terms.items():
            if g not in odd:
                continue
            pos = odd.index(g)
            word = odd[:pos] + odd[pos + 1:]
            sign = -1 if pos & 1 else 1
            out[(even, word)] = c * sign
        return GradedElement(out)

    def without_odd(self, g: Generator) -> "GradedElement":
        return GradedElement(
            {(e, o): c for (e, o), c in self.terms.items() if g not in o}
        )

    def drop_terms_with(self, pred: Callable[[Generator], bool]) -> "GradedElement":
        """Drop every term containing a generator satisfying pred."""
        out = {}
        for (even, odd), c in self.terms.items():
            if any(pred(g) for g, _ in even) or any(pred(g) for g in odd):
                continue
            out[(even, odd)] = c
        return GradedElement(out)

    def integrate_parameter(self, var: Generator, lower: Rat, upper: Rat) -> "GradedElement":
        """Definite coefficient-wise integration of the polynomial in var."""
        if var.kind not in (Kind.ALPHA, Kind.T):
            raise CartanWeilError(
                f"integration variable must be alpha or t, got {var.name}"
            )
        lo, hi = Q(lower), Q(upper)
        out = GradedElement()
        for (even, odd), c in self.terms.items():
            m = 0
            rest = []
            for g, e in even:
                if g == var:
                    m = e
                else:
                    rest.append((g, e))
            factor = (hi ** (m + 1) - lo ** (m + 1)) / (m + 1)
            val = c * factor
            if not val:
                continue
            key = (tuple(rest), odd)
            s = out.terms.get(key)
            if s is None:
                out.terms[key] = val
            else:
                s = s + val
                if s:
                    out.terms[key] = s
                else:
                    del out.terms[key]
        return out

    # -- presentation ----------------------------------------------------------

    def sorted_terms(self) -> list[tuple[TermKey, Fraction]]:
        def keyfn(item):
            (even, odd), _ = item
            return (
                tuple((g._key, m) for g, m in even),
                tuple(g._key for g in odd),
            )

        return sorted(self.terms.items(), key=keyfn)

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (even, odd), c in self.sorted_terms():
            factors = [g.name + (f"^{m}" if m > 1 else "") for g, m in even]
            factors += [g.name for g in odd]
            mono = "*".join(factors) if factors else "1"
            parts.append(f"({c})*{mono}")
        return " + ".join(parts)

    def to_json_obj(self) -> dict:
        terms = []
        for (even, odd), c in self.sorted_terms():
            terms.append(
                {
                    "coeff": f"{c.numerator}/{c.denominator}",
                    "even": {g.name: m for g, m in even},
                    "odd": [g.name for g in odd],
                }
            )
        return {"terms": terms}

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, separators=(",", ":"))

    @staticmethod
    def from_json_obj(obj: dict) -> "GradedElement":
        out = GradedElement()
        for t in obj["terms"]:
            num, den = t["coeff"].split("/")
            c = Q(int(num), int(den))
            even = tuple(
                sorted(((parse_generator(n), m) for n, m in t["even"].items()))
            )
            odd = tuple(sorted(parse_generator(n) for n in t["odd"]))
            key = (even, odd)
            out.terms[key] = out.terms.get(key, Q(0)) + c
        out.terms = {k: v for k, v in out.terms.items() if v}
        return out

    @staticmethod
    def from_json(s: str) -> "GradedElement":
        return GradedElement.from_json_obj(json.loads(s))


_LATEX = {
    Kind.THETA_G: "\\Theta", Kind.THETA_W: "\\theta", Kind.MU: "\\mu",
    Kind.CHI: "\\chi", Kind.ALPHA: "\\alpha", Kind.T: "t",
}


def latex_generator(g: Generator) -> str:
    if g.kind == Kind.A:
        return f"A^{{{g.index[0]}}}_{{{g.index[1]}}}"
    if g.kind == Kind.ABAR:
        return f"\\bar{{A}}^{{{g.index[0]}}}_{{{g.index[1]}}}"
    if g.kind == Kind.PI_INV:
        return "\\pi^{-1}"
    if g.kind == Kind.DTHETA:
        return "d\\theta"
    if g.kind == Kind.DT:
        return "dt"
    base = _LATEX[g.kind]
    if g.index:
        return f"{base}^{{{g.index[0]}}}"
    return base


def latex_element(x: GradedElement) -> str:
    if x.is_zero():
        return "0"
    parts = []
    for (even, odd), c in x.sorted_terms():
        factors = []
        for g, m in even:
            s = latex_generator(g)
            factors.append(f"{s}^{{{m}}}" if m > 1 and not g.index else
                           (f"({s})^{{{m}}}" if m > 1 else s))
        factors += [latex_generator(g) for g in odd]
        mono = " ".join(factors)
        if c.denominator == 1:
            coeff = str(c.numerator)
        else:
            sign = "-" if c < 0 else ""
            coeff = f"{sign}\\tfrac{{{abs(c.numerator)}}}{{{c.denominator}}}"
        if mono:
            if coeff == "1":
                coeff = ""
            elif coeff == "-1":
                coeff = "-"
        term = f"{coeff} {mono}".strip()
        parts.append(term)
    out = parts[0]
    for p in parts[1:]:
        out += " + " + p if not p.startswith("-") else " - " + p[1:]
    return out


def normalize(raw: Iterable[tuple[Rat, Iterable[Generator]]]) -> GradedElement:
    """Build an element from (coefficient, generator word) pairs.

    Reordering adjacent odd generators flips the sign; a repeated odd
    generator annihilates the term; even generators sort without sign.
    """
    out = GradedElement()
    for c, word in raw:
        piece = GradedElement.scalar(c)
        for g in word:
            piece = piece * GradedElement.from_gen(g)
            if piece.is_zero():
                break
        out = out + piece
    return out


class Derivation:
    """A graded derivation, defined on generators and extended by Leibniz.

    parity 0 for even derivations, 1 for odd ones.  Generators missing from
    `action` raise MissingActionError when encountered.
    """

    __slots__ = ("parity", "action", "name")

    def __init__(self, parity: int, action: Mapping[Generator, GradedElement], name: str):
        self.parity = parity
        self.action = dict(action)
        self.name = name

    def __call__(self, x: GradedElement) -> GradedElement:
        return apply_derivation(self, x)

    def __repr__(self) -> str:
        return f"Derivation({self.name})"


def apply_derivation(D: Derivation, x: GradedElement) -> GradedElement:
    """Apply D to x by the graded Leibniz rule."""
    action = D.action
    dpar = D.parity
    out = GradedElement()
    for (even, odd), c in x.terms.items():
        # even factors: no Koszul sign is ever incurred passing over them
        for pos, (g, m) in enumerate(even):
            dg = action.get(g)
            if dg is None:
                raise MissingActionError(D.name, g)
            if dg.is_zero():
                continue
            if m > 1:
                rest = even[:pos] + ((g, m - 1),) + even[pos + 1:]
            else:
                rest = even[:pos] + even[pos + 1:]
            piece = GradedElement({(rest, ()): c * m})
            piece = piece * dg
            piece = piece * GradedElement({((), odd): Q(1)})
            out = out + piece
        # odd factors: sign (-1)^{(j-1) * |D|}
        for j, g in enumerate(odd):
            dg = action.get(g)
            if dg is None:
                raise MissingActionError(D.name, g)
            if dg.is_zero():
                continue
            sign = -1 if (dpar and (j & 1)) else 1
            piece = GradedElement({(even, odd[:j]): c * sign})
            piece = piece * dg
            piece = piece * GradedElement({((), odd[j + 1:]): Q(1)})
            out = out + piece
    return out


def el(g: Generator) -> GradedElement:
    """Shorthand for the element consisting of a single generator."""
    return GradedElement.from_gen(g)


def scalar(c: Rat) -> GradedElement:
    return GradedElement.scalar(c)
