"""Lie algebra coefficient data, axiom validation, invariant polynomials.

Structure constant convention: [xi_j, xi_k] = c^i_{jk} xi_i, upper index
first.  Builtin bases are orthonormal for their metric, so the structure
constants are totally antisymmetric and adjoint matrices are orthogonal.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .engine import CartanWeilError, GradedElement, Q, el, pi_inv

Rat = Fraction | int


class DimensionMismatchError(CartanWeilError):
    pass


class UnknownAlgebraError(CartanWeilError):
    pass


class InvarianceError(CartanWeilError):
    """A symmetric tensor failed the ad-invariance identity."""

    def __init__(self, witness):
        self.witness = witness
        super().__init__(f"ad-invariance fails at {witness}")


@dataclass(frozen=True)
class LieAlgebraData:
    """Exact coefficient data: dimension, c^i_{jk}, metric, name."""

    name: str
    dim: int
    structure_constants: tuple  # c[i][j][k], 0-based storage of c^{i+1}_{j+1,k+1}
    metric: tuple               # g[i][j]

    def c(self, i: int, j: int, k: int) -> Fraction:
        """c^i_{jk} with 1-based indices."""
        return self.structure_constants[i - 1][j - 1][k - 1]

    def g(self, i: int, j: int) -> Fraction:
        return self.metric[i - 1][j - 1]


@dataclass
class CheckResult:
    name: str
    passed: bool
    witness: str | None = None

    def to_json_obj(self):
        obj = {"check": self.name, "pass": self.passed}
        if self.witness is not None:
            obj["witness"] = self.witness
        return obj


@dataclass
class ValidationReport:
    algebra: str
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json_obj(self):
        return {
            "algebra": self.algebra,
            "pass": self.passed,
            "checks": [c.to_json_obj() for c in self.checks],
        }


def _det_invertible(m: Sequence[Sequence[Fraction]]) -> bool:
    """Exact Gaussian elimination; True iff the matrix is invertible."""
    n = len(m)
    a = [list(map(Q, row)) for row in m]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return False
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        for r in range(col + 1, n):
            f = a[r][col] * inv
            if f:
                for cc in range(col, n):
                    a[r][cc] -= f * a[col][cc]
    return True


def validate_algebra(data: LieAlgebraData) -> ValidationReport:
    """Check antisymmetry, Jacobi, metric symmetry/invertibility, invariance."""
    n = data.dim
    if len(data.structure_constants) != n or any(
        len(plane) != n or any(len(row) != n for row in plane)
        for plane in data.structure_constants
    ):
        raise DimensionMismatchError(
            f"structure constants of {data.name!r} are not {n}x{n}x{n}"
        )
    if len(data.metric) != n or any(len(row) != n for row in data.metric):
        raise DimensionMismatchError(f"metric of {data.name!r} is not {n}x{n}")

    report = ValidationReport(algebra=data.name)
    rng = range(1, n + 1)

    witness = None
    for i, j, k in itertools.product(rng, rng, rng):
        if data.c(i, j, k) != -data.c(i, k, j):
            witness = f"(i,j,k)=({i},{j},{k})"
            break
    report.checks.append(CheckResult("antisymmetry", witness is None, witness))

    witness = None
    for j, k, l in itertools.product(rng, rng, rng):
        for i in rng:
            s = sum(
                (
                    data.c(m, j, k) * data.c(i, m, l)
                    + data.c(m, k, l) * data.c(i, m, j)
                    + data.c(m, l, j) * data.c(i, m, k)
                )
                for m in rng
            )
            if s != 0:
                witness = f"(i,j,k,l)=({i},{j},{k},{l})"
                break
        if witness:
            break
    report.checks.append(CheckResult("jacobi", witness is None, witness))

    witness = None
    for i, j in itertools.product(rng, rng):
        if data.g(i, j) != data.g(j, i):
            witness = f"(i,j)=({i},{j})"
            break
    report.checks.append(CheckResult("metric_symmetric", witness is None, witness))

    invertible = _det_invertible(data.metric)
    report.checks.append(
        CheckResult("metric_invertible", invertible, None if invertible else "singular")
    )

    witness = None
    for x, y, z in itertools.product(rng, rng, rng):
        s = sum(data.c(m, x, y) * data.g(m, z) for m in rng) + sum(
            data.c(m, x, z) * data.g(y, m) for m in rng
        )
        if s != 0:
            witness = f"(x,y,z)=({x},{y},{z})"
            break
    report.checks.append(CheckResult("metric_invariant", witness is None, witness))

    return report


# ---------------------------------------------------------------------------
# Exact arithmetic over Q(rho), rho = sqrt(-3), and the rational su(3) model.
#
# The usual Gell-Mann orthonormal basis has structure constants involving
# sqrt(3), so it cannot be used in an exact rational engine.  Instead we work
# inside su(3, Q(rho)) = anti-Hermitian traceless 3x3 matrices over Q(rho),
# where an orthonormal basis with rational, totally antisymmetric structure
# constants does exist, because the trace form splits rationally as
# <1,1,1,1> + <3,3,3,3> and the quaternary form 3*I is Q-equivalent to I.
# ---------------------------------------------------------------------------

Z = tuple  # (a, b) represents a + b*rho


def _z(a=0, b=0) -> Z:
    return (Q(a), Q(b))


def _zadd(z, w):
    return (z[0] + w[0], z[1] + w[1])


def _zsub(z, w):
    return (z[0] - w[0], z[1] - w[1])


def _zmul(z, w):
    a, b = z
    c, d = w
    return (a * c - 3 * b * d, a * d + b * c)


def _zconj(z):
    return (z[0], -z[1])


def _zscale(z, q):
    return (z[0] * q, z[1] * q)


def _zinv(z):
    a, b = z
    nrm = a * a + 3 * b * b
    return (a / nrm, -b / nrm)


Mat3 = tuple  # 3x3 tuple of Z


def _mzero() -> Mat3:
    return tuple(tuple(_z() for _ in range(3)) for _ in range(3))


def _mbuild(fn) -> Mat3:
    return tuple(tuple(fn(r, c) for c in range(3)) for r in range(3))


def _madd(x, y):
    return _mbuild(lambda r, c: _zadd(x[r][c], y[r][c]))


def _msub(x, y):
    return _mbuild(lambda r, c: _zsub(x[r][c], y[r][c]))


def _mscale(x, q):
    return _mbuild(lambda r, c: _zscale(x[r][c], q))


def _mmul(x, y):
    out = []
    for r in range(3):
        row = []
        for c in range(3):
            s = _z()
            for k in range(3):
                s = _zadd(s, _zmul(x[r][k], y[k][c]))
            row.append(s)
        out.append(tuple(row))
    return tuple(out)


def _mdagger(x):
    return _mbuild(lambda r, c: _zconj(x[c][r]))


def _mtrace(x):
    return _zadd(_zadd(x[0][0], x[1][1]), x[2][2])


def _mbracket(x, y):
    return _msub(_mmul(x, y), _mmul(y, x))


def _E(i, j) -> Mat3:
    return _mbuild(lambda r, c: _z(1) if (r, c) == (i, j) else _z())


def _rhoE(i, j) -> Mat3:
    return _mbuild(lambda r, c: _z(0, 1) if (r, c) == (i, j) else _z())


@lru_cache(maxsize=1)
def _su3_basis() -> tuple:
    """Orthonormal rational basis of su(3) for the metric -tr(XY)/2."""
    e1 = _msub(_E(0, 1), _E(1, 0))
    e2 = _msub(_E(0, 2), _E(2, 0))
    e3 = _msub(_E(1, 2), _E(2, 1))
    y1 = _madd(_rhoE(0, 1), _rhoE(1, 0))
    y2 = _madd(_rhoE(0, 2), _rhoE(2, 0))
    y3 = _madd(_rhoE(1, 2), _rhoE(2, 1))
    y4 = _msub(_rhoE(0, 0), _rhoE(1, 1))
    e4 = _mscale(_madd(_msub(_rhoE(0, 0), _rhoE(2, 2)), _msub(_rhoE(1, 1), _rhoE(2, 2))), Q(1, 3))
    ys = (y1, y2, y3, y4)
    # rows of an integer matrix M with M M^T = 3I; Z_i = (1/3) sum_j M_ij Y_j
    mix = ((1, 1, 1, 0), (1, -1, 0, 1), (1, 0, -1, -1), (0, 1, -1, 1))
    zs = []
    for row in mix:
        acc = _mzero()
        for coeff, y in zip(row, ys):
            if coeff:
                acc = _madd(acc, _mscale(y, Q(coeff, 3)))
        zs.append(acc)
    basis = (e1, e2, e3, e4, *zs)
    for a, x in enumerate(basis):
        for b, y in enumerate(basis):
            v = _su3_pair(x, y)
            expected = Q(1) if a == b else Q(0)
            if v != expected:
                raise CartanWeilError(f"su3 basis not orthonormal at ({a},{b})")
    return basis


def _su3_pair(x: Mat3, y: Mat3) -> Fraction:
    """<x,y> = -tr(xy)/2; real for anti-Hermitian arguments."""
    tr = _mtrace(_mmul(x, y))
    if tr[1] != 0:
        raise CartanWeilError("non-real trace pairing on su(3)")
    return -tr[0] / 2


def _su3_coords(x: Mat3) -> list[Fraction]:
    return [_su3_pair(x, e) for e in _su3_basis()]


def _su3_rotation(axis: int, c: Fraction, s: Fraction) -> Mat3:
    """exp(angle * e_axis) in the defining representation, axis in {1,2,3}."""
    c, s = Q(c), Q(s)
    if c * c + s * s != 1:
        raise CartanWeilError("(cos, sin) must satisfy cos^2 + sin^2 = 1")
    one, zero = _z(1), _z()
    cz, sz = _z(c), _z(s)
    nsz = _z(-s)
    if axis == 1:
        rows = ((cz, sz, zero), (nsz, cz, zero), (zero, zero, one))
    elif axis == 2:
        rows = ((cz, zero, sz), (zero, one, zero), (nsz, zero, cz))
    elif axis == 3:
        rows = ((one, zero, zero), (zero, cz, sz), (zero, nsz, cz))
    else:
        raise CartanWeilError("rotation axis must be 1, 2 or 3")
    return rows


def _su3_torus(z1: Z, z2: Z) -> Mat3:
    """diag(u, v, conj(uv)) with u = z1/conj(z1), v = z2/conj(z2); det = 1."""
    u = _zmul(z1, _zinv(_zconj(z1)))
    v = _zmul(z2, _zinv(_zconj(z2)))
    w = _zconj(_zmul(u, v))
    zero = _z()
    return ((u, zero, zero), (zero, v, zero), (zero, zero, w))


def _su3_adjoint_of(g: Mat3):
    """Ad(g) as an exact rational 8x8 matrix in the orthonormal basis."""
    ginv = _mdagger(g)
    cols = []
    for e in _su3_basis():
        cols.append(_su3_coords(_mmul(_mmul(g, e), ginv)))
    # cols[j][i] = <g e_j g^-1, e_i> = A^i_j
    return tuple(tuple(cols[j][i] for j in range(8)) for i in range(8))


# ---------------------------------------------------------------------------
# Builtin algebras
# ---------------------------------------------------------------------------


def _identity_metric(n: int) -> tuple:
    return tuple(tuple(Q(1) if i == j else Q(0) for j in range(n)) for i in range(n))


def algebra_from_entries(
    name: str,
    dim: int,
    entries: Iterable[tuple[int, int, int, Rat]],
    metric: Sequence[Sequence[Rat]] | None = None,
) -> LieAlgebraData:
    """Build data from sparse c^i_{jk} entries (j<k); antisymmetry is completed."""
    c = [[[Q(0)] * dim for _ in range(dim)] for _ in range(dim)]
    for i, j, k, v in entries:
        if not (1 <= i <= dim and 1 <= j <= dim and 1 <= k <= dim):
            raise DimensionMismatchError(f"entry ({i},{j},{k}) out of range for dim {dim}")
        if j >= k:
            raise CartanWeilError(f"entries must have j < k, got ({i},{j},{k})")
        v = Q(v)
        c[i - 1][j - 1][k - 1] += v
        c[i - 1][k - 1][j - 1] -= v
    if metric is None:
        metric = _identity_metric(dim)
    return LieAlgebraData(
        name=name,
        dim=dim,
        structure_constants=tuple(tuple(tuple(row) for row in plane) for plane in c),
        metric=tuple(tuple(Q(v) for v in row) for row in metric),
    )


@lru_cache(maxsize=32)
def builtin_algebra(name: str) -> LieAlgebraData:
    """Builtin validated algebras: abelian(n) (or abelian:n), su2, su3."""
    if name == "su2":
        data = algebra_from_entries(
            "su2", 3, [(3, 1, 2, 1), (1, 2, 3, 1), (2, 1, 3, -1)]
        )
    elif name == "su3":
        basis = _su3_basis()
        entries = []
        for j in range(8):
            for k in range(j + 1, 8):
                coords = _su3_coords(_mbracket(basis[j], basis[k]))
                for i, v in enumerate(coords):
                    if v:
                        entries.append((i + 1, j + 1, k + 1, v))
        data = algebra_from_entries("su3", 8, entries)
    else:
        base = name.replace("(", ":").rstrip(")")
        parts = base.split(":")
        if parts[0] == "abelian" and len(parts) == 2 and parts[1].isdigit():
            n = int(parts[1])
            if n < 1:
                raise UnknownAlgebraError(f"abelian dimension must be >= 1, got {n}")
            data = algebra_from_entries(f"abelian({n})", n, [])
        else:
            raise UnknownAlgebraError(f"unknown builtin algebra {name!r}")
    report = validate_algebra(data)
    if not report.passed:
        raise CartanWeilError(f"builtin algebra {name!r} failed validation: {report}")
    return data


def save_algebra(data: LieAlgebraData, path: str) -> None:
    obj = {
        "name": data.name,
        "dim": data.dim,
        "c": [
            [i, j, k, f"{v.numerator}/{v.denominator}"]
            for i in range(1, data.dim + 1)
            for j in range(1, data.dim + 1)
            for k in range(j + 1, data.dim + 1)
            if (v := data.c(i, j, k)) != 0
        ],
        "metric": [
            [f"{v.numerator}/{v.denominator}" for v in row] for row in data.metric
        ],
    }
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)


def _parse_rat(v) -> Fraction:
    if isinstance(v, str):
        return Q(v)
    return Q(v)


def load_algebra(path: str) -> LieAlgebraData:
    """Read the JSON algebra format; omitted entries are zero, antisymmetry completed."""
    with open(path) as fh:
        obj = json.load(fh)
    entries = [(i, j, k, _parse_rat(v)) for i, j, k, v in obj.get("c", [])]
    metric = None
    if "metric" in obj:
        metric = [[_parse_rat(v) for v in row] for row in obj["metric"]]
    return algebra_from_entries(obj["name"], int(obj["dim"]), entries, metric)


# ---------------------------------------------------------------------------
# Sparse bracket helpers on g-valued element vectors
# ---------------------------------------------------------------------------

GVec = list  # list[GradedElement] of length dim; component i at position i-1


@lru_cache(maxsize=64)
def _sparse_c(data: LieAlgebraData) -> tuple:
    out = []
    n = data.dim
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            for k in range(1, n + 1):
                v = data.c(i, j, k)
                if v:
                    out.append((i, j, k, v))
    return tuple(out)


def bracket(data: LieAlgebraData, u: GVec, v: GVec) -> GVec:
    """[u, v]^i = c^i_{jk} u^j v^k with the graded product of components."""
    accs = [dict() for _ in range(data.dim)]
    prods: dict[tuple[int, int], GradedElement] = {}
    for i, j, k, c in _sparse_c(data):
        p = prods.get((j, k))
        if p is None:
            p = u[j - 1] * v[k - 1]
            prods[(j, k)] = p
        if p.terms:
            p.add_into(accs[i - 1], c)
    return [GradedElement(a) for a in accs]


def ad_matrix(data: LieAlgebraData, i: int) -> tuple:
    """Matrix of ad_{xi_i}: entry [j][k] (0-based) is c^j_{ik}."""
    n = data.dim
    return tuple(
        tuple(data.c(j, i, k) for k in range(1, n + 1)) for j in range(1, n + 1)
    )


def gvec_add(u: GVec, v: GVec) -> GVec:
    return [a + b for a, b in zip(u, v)]


def gvec_sub(u: GVec, v: GVec) -> GVec:
    return [a - b for a, b in zip(u, v)]


def gvec_scale(u: GVec, c) -> GVec:
    if isinstance(c, GradedElement):
        return [c * a for a in u]
    return [a.scale(c) for a in u]


def matrix_apply(m: Sequence[Sequence[Fraction]], u: GVec) -> GVec:
    """(m u)^i = sum_j m[i][j] u^j for a rational matrix m."""
    n = len(u)
    out = []
    for i in range(n):
        acc = GradedElement()
        row = m[i]
        for j in range(n):
            if row[j]:
                acc = acc + u[j].scale(row[j])
        out.append(acc)
    return out


# ---------------------------------------------------------------------------
# Invariant polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Scale:
    """An exact rational times a nonnegative power of the formal symbol 1/pi."""

    coeff: Fraction = Q(1)
    pi_inv_power: int = 0

    @staticmethod
    def one() -> "Scale":
        return Scale(Q(1), 0)

    def __mul__(self, other: "Scale") -> "Scale":
        return Scale(self.coeff * other.coeff, self.pi_inv_power + other.pi_inv_power)

    def as_element(self) -> GradedElement:
        x = GradedElement.scalar(self.coeff)
        if self.pi_inv_power:
            x = x * el(pi_inv()) ** self.pi_inv_power
        return x


@dataclass
class InvariantPolynomial:
    """Symmetric k-tensor over the algebra, stored on sorted index tuples."""

    algebra: LieAlgebraData
    degree: int
    components: dict  # sorted 1-based index tuple -> Fraction
    scale: Scale = field(default_factory=Scale.one)

    def component(self, idx: Sequence[int]) -> Fraction:
        return self.components.get(tuple(sorted(idx)), Q(0))

    def rescaled(self, scale: Scale) -> "InvariantPolynomial":
        return InvariantPolynomial(self.algebra, self.degree, dict(self.components),
                                   self.scale * scale)

    def describe(self) -> str:
        s = f"degree-{self.degree} tensor on {self.algebra.name}"
        if self.scale != Scale.one():
            s += f" (scale {self.scale.coeff} * pi^-{self.scale.pi_inv_power})"
        return s


def check_invariance(
    data: LieAlgebraData, degree: int, components: Mapping[tuple, Fraction]
) -> tuple | None:
    """Exhaustive ad-invariance check over sorted index tuples.

    Returns a witness (x, tuple) on failure, None on success.  Checking
    sorted tuples suffices because the tensor is stored symmetrically.
    """
    n = data.dim
    sparse = _sparse_c(data)
    if not sparse:
        return None
    for idx in itertools.combinations_with_replacement(range(1, n + 1), degree):
        for x in range(1, n + 1):
            s = Q(0)
            for pos in range(degree):
                for m in range(1, n + 1):
                    cv = data.c(m, x, idx[pos])
                    if cv:
                        rep = tuple(sorted(idx[:pos] + (m,) + idx[pos + 1:]))
                        pv = components.get(rep, Q(0))
                        if pv:
                            s += cv * pv
            if s != 0:
                return (x, idx)
    return None


def invariant_polynomial(
    data: LieAlgebraData,
    degree: int,
    components: Mapping[Sequence[int], Rat],
    scale: Scale | None = None,
    check: bool = True,
) -> InvariantPolynomial:
    """Build a symmetric tensor from components given on arbitrary index orders."""
    store: dict[tuple, Fraction] = {}
    for idx, v in components.items():
        key = tuple(sorted(idx))
        if len(key) != degree:
            raise DimensionMismatchError(f"index tuple {idx} has wrong length")
        v = Q(v)
        if key in store and store[key] != v:
            raise CartanWeilError(f"conflicting values for symmetric component {key}")
        store[key] = v
    store = {k: v for k, v in store.items() if v}
    if check:
        witness = check_invariance(data, degree, store)
        if witness is not None:
            raise InvarianceError(witness)
    return InvariantPolynomial(data, degree, store, scale or Scale.one())


def metric_polynomial(data: LieAlgebraData, scale: Scale | None = None) -> InvariantPolynomial:
    """Degree-2 polynomial with components <xi_i, xi_j>."""
    comps = {}
    for i in range(1, data.dim + 1):
        for j in range(i, data.dim + 1):
            v = data.g(i, j)
            if v:
                comps[(i, j)] = v
    return invariant_polynomial(data, 2, comps, scale)


def _perfect_matchings(items: tuple) -> Iterable[tuple]:
    if not items:
        yield ()
        return
    a = items[0]
    for pos in range(1, len(items)):
        b = items[pos]
        rest = items[1:pos] + items[pos + 1:]
        for m in _perfect_matchings(rest):
            yield ((a, b),) + m


def sym_power_polynomial(data: LieAlgebraData, k: int) -> InvariantPolynomial:
    """Symmetrization of the metric to the power k/2 (k even, k >= 2)."""
    if k < 2 or k % 2:
        raise CartanWeilError(f"sym_power degree must be even and >= 2, got {k}")
    n = data.dim
    matchings = list(_perfect_matchings(tuple(range(k))))
    norm = Q(1, len(matchings))
    comps = {}
    for idx in itertools.combinations_with_replacement(range(1, n + 1), k):
        s = Q(0)
        for m in matchings:
            prod = Q(1)
            for a, b in m:
                prod *= data.g(idx[a], idx[b])
                if not prod:
                    break
            s += prod
        if s:
            comps[idx] = s * norm
    return invariant_polynomial(data, k, comps)


def cubic_polynomial(data: LieAlgebraData) -> InvariantPolynomial:
    """The symmetric invariant cubic of su(3): Im tr(x(yz + zy)) in the model basis."""
    if data.name != "su3":
        raise UnknownAlgebraError("the cubic invariant is provided for su3 only")
    basis = _su3_basis()
    comps = {}
    for idx in itertools.combinations_with_replacement(range(1, 9), 3):
        a, b, c = (basis[i - 1] for i in idx)
        anti = _madd(_mmul(b, c), _mmul(c, b))
        tr = _mtrace(_mmul(a, anti))
        if tr[0] != 0:
            raise CartanWeilError("cubic trace has a real part; basis inconsistent")
        if tr[1]:
            comps[idx] = tr[1]
    return invariant_polynomial(data, 3, comps)


def symmetrized_product(p: InvariantPolynomial, q: InvariantPolynomial) -> InvariantPolynomial:
    """Symmetrization of the tensor product; invariant when both factors are."""
    if p.algebra != q.algebra:
        raise CartanWeilError("polynomial factors live on different algebras")
    n = p.algebra.dim
    k, l = p.degree, q.degree
    m = k + l
    fact_m = 1
    for i in range(2, m + 1):
        fact_m *= i
    comps = {}
    for idx in itertools.combinations_with_replacement(range(1, n + 1), m):
        mult = 1
        for _, grp in itertools.groupby(idx):
            c = len(list(grp))
            for i in range(2, c + 1):
                mult *= i
        s = Q(0)
        for w in set(itertools.permutations(idx)):
            pv = p.component(w[:k])
            if pv:
                qv = q.component(w[k:])
                if qv:
                    s += pv * qv
        if s:
            comps[idx] = s * Q(mult, fact_m)
    return invariant_polynomial(p.algebra, m, comps, p.scale * q.scale)


def apply_polynomial(p: InvariantPolynomial, slots: Sequence[GVec]) -> GradedElement:
    """p(v_1, ..., v_k) = sum p_{i1..ik} v_1^{i1} ... v_k^{ik}.

    Repeated slots (the same list object) share cached partial products,
    which is what makes p(u, F^{k-1}) affordable.
    """
    k = p.degree
    if len(slots) != k:
        raise DimensionMismatchError(
            f"polynomial of degree {k} applied to {len(slots)} slots"
        )
    acc: dict = {}
    if not p.components:
        return GradedElement()

    tail_same = k >= 2 and all(s is slots[1] for s in slots[2:])
    prod_cache: dict[tuple, GradedElement] = {}

    def tail_product(indices: tuple) -> GradedElement:
        # product over the identical tail slots, cached on the sorted tuple
        got = prod_cache.get(indices)
        if got is not None:
            return got
        if len(indices) == 1:
            val = slots[1][indices[0] - 1]
        else:
            val = tail_product(indices[:-1]) * slots[1][indices[-1] - 1]
        prod_cache[indices] = val
        return val

    def perm_count(indices: tuple) -> int:
        total = 1
        for i in range(2, len(indices) + 1):
            total *= i
        for _, grp in itertools.groupby(indices):
            c = len(list(grp))
            for i in range(2, c + 1):
                total //= i
        return total

    if k == 1:
        for (i,), v in p.components.items():
            if slots[0][i - 1].terms:
                slots[0][i - 1].add_into(acc, v)
    elif tail_same and slots[0] is not slots[1]:
        # pattern p(u, v^{k-1}): group the first-slot factors on each tail
        by_rest: dict[tuple, dict] = {}
        for idx, v in p.components.items():
            seen = set()
            for pos in range(k):
                a = idx[pos]
                if a in seen:
                    continue
                seen.add(a)
                rest = tuple(sorted(idx[:pos] + idx[pos + 1:]))
                u = slots[0][a - 1]
                if not u.terms:
                    continue
                u.add_into(
                    by_rest.setdefault(rest, {}), v * perm_count(rest)
                )
        for rest, udict in by_rest.items():
            u_sum = GradedElement(udict)
            if not u_sum.terms:
                continue
            tp = tail_product(rest)
            if tp.terms:
                (u_sum * tp).add_into(acc)
    elif tail_same and slots[0] is slots[1]:
        # pattern p(v^k)
        for idx, v in p.components.items():
            tp = tail_product(idx)
            if tp.terms:
                tp.add_into(acc, v * perm_count(idx))
    else:
        for idx, v in p.components.items():
            for w in set(itertools.permutations(idx)):
                prod = GradedElement.scalar(v)
                for slot, i in zip(slots, w):
                    prod = prod * slot[i - 1]
                    if not prod.terms:
                        break
                prod.add_into(acc)
    out = GradedElement(acc)
    sc = p.scale.as_element()
    if sc != GradedElement.one():
        out = out * sc
    return out


def pair(data: LieAlgebraData, u: GVec, v: GVec) -> GradedElement:
    """<u, v> via the metric, without any polynomial scale."""
    out = GradedElement()
    n = data.dim
    for i in range(1, n + 1):
        if not u[i - 1].terms:
            continue
        for j in range(1, n + 1):
            gij = data.g(i, j)
            if gij and v[j - 1].terms:
                out = out + (u[i - 1] * v[j - 1]).scale(gij)
    return out
