"""Bi-invariantly generated forms on G with the adjoint action.

Generators: Maurer-Cartan components Theta^i, adjoint matrix symbols A^i_j
and Abar^i_j (formally independent; the relation A Abar = I is applied only
as a local rewrite and inside the evaluation oracle), Cartan variables chi^i.

Sign conventions follow the fundamental vector field of exp(-t chi), so that
iota_chi Theta-hat = Ad(g) chi - chi and iota_chi Theta = chi - Ad(g^-1) chi.

The equality oracle evaluates at exact rational adjoint points: a False
verdict is a certified inequality with a witness; a True verdict is
polynomial-identity evidence at `samples` independent points.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .engine import (
    A,
    Abar,
    CartanWeilError,
    Derivation,
    ForeignGeneratorError,
    GradedElement,
    Generator,
    Kind,
    Q,
    Theta,
    apply_derivation,
    chi,
    el,
)
from .lie_data import (
    GVec,
    LieAlgebraData,
    UnknownAlgebraError,
    _su3_adjoint_of,
    _su3_rotation,
    _su3_torus,
    _z,
    ad_matrix,
    matrix_apply,
)

_GFORM_KINDS = frozenset({Kind.THETA_G, Kind.A, Kind.ABAR, Kind.CHI, Kind.PI_INV})


# ---------------------------------------------------------------------------
# Derivations of the model
# ---------------------------------------------------------------------------


def gform_differential(algebra: LieAlgebraData) -> Derivation:
    """d with d Theta = -1/2 [Theta, Theta], dA = A c Theta, dAbar = -c Theta Abar."""
    n = algebra.dim
    action: dict[Generator, GradedElement] = {}
    from .engine import pi_inv

    action[pi_inv()] = GradedElement.zero()
    for i in range(1, n + 1):
        dth = GradedElement.zero()
        for j in range(1, n + 1):
            for k in range(1, n + 1):
                c = algebra.c(i, j, k)
                if c:
                    dth = dth - (el(Theta(j)) * el(Theta(k))).scale(c / 2)
        action[Theta(i)] = dth
        action[chi(i)] = GradedElement.zero()
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            dA = GradedElement.zero()
            dAbar = GradedElement.zero()
            for k in range(1, n + 1):
                for l in range(1, n + 1):
                    c_kl = algebra.c(k, l, j)
                    if c_kl:
                        dA = dA + (el(A(i, k)) * el(Theta(l))).scale(c_kl)
                    c_il = algebra.c(i, l, k)
                    if c_il:
                        dAbar = dAbar - (el(Theta(l)) * el(Abar(k, j))).scale(c_il)
            action[A(i, j)] = dA
            action[Abar(i, j)] = dAbar
    return Derivation(parity=1, action=action, name=f"d_G[{algebra.name}]")


def hat_theta(algebra: LieAlgebraData, i: int) -> GradedElement:
    """Theta-hat^i = sum_j A^i_j Theta^j (right-invariant Maurer-Cartan form)."""
    out = GradedElement.zero()
    for j in range(1, algebra.dim + 1):
        out = out + el(A(i, j)) * el(Theta(j))
    return out


def hat_theta_vec(algebra: LieAlgebraData) -> GVec:
    return [hat_theta(algebra, i) for i in range(1, algebra.dim + 1)]


def iota_xi(algebra: LieAlgebraData, i: int) -> Derivation:
    """Contraction with the fundamental vector field of xi_i under conjugation.

    iota_i Theta^j = delta^j_i - Abar^j_i, the chi = xi_i specialisation of
    iota_chi; audited against the paper value iota_chi Theta-hat = Ad(g)chi - chi.
    """
    if not 1 <= i <= algebra.dim:
        raise CartanWeilError(f"contraction index {i} out of range")
    action: dict[Generator, GradedElement] = {}
    _fill_inert(algebra, action)
    for j in range(1, algebra.dim + 1):
        val = -el(Abar(j, i))
        if j == i:
            val = val + GradedElement.one()
        action[Theta(j)] = val
    return Derivation(parity=1, action=action, name=f"iota_xi[{i}]")


def iota_chi(algebra: LieAlgebraData) -> Derivation:
    """iota_chi Theta^i = chi^i - sum_j Abar^i_j chi^j; kills A, Abar, chi."""
    action: dict[Generator, GradedElement] = {}
    _fill_inert(algebra, action)
    for i in range(1, algebra.dim + 1):
        val = el(chi(i))
        for j in range(1, algebra.dim + 1):
            val = val - el(Abar(i, j)) * el(chi(j))
        action[Theta(i)] = val
    return Derivation(parity=1, action=action, name="iota_chi")


def _fill_inert(algebra: LieAlgebraData, action: dict) -> None:
    from .engine import pi_inv

    n = algebra.dim
    action[pi_inv()] = GradedElement.zero()
    for i in range(1, n + 1):
        action[chi(i)] = GradedElement.zero()
        for j in range(1, n + 1):
            action[A(i, j)] = GradedElement.zero()
            action[Abar(i, j)] = GradedElement.zero()


def total_lie(algebra: LieAlgebraData, i: int) -> Derivation:
    """Infinitesimal equivariance along xi_i.

    Theta and chi rotate in the adjoint, (L_i v)^j = -c^j_{ik} v^k; the matrix
    symbols move by commutator with ad_i, which reproduces d iota + iota d
    modulo the A Abar = I relations (oracle-checked).
    """
    if not 1 <= i <= algebra.dim:
        raise CartanWeilError(f"Lie index {i} out of range")
    n = algebra.dim
    adi = ad_matrix(algebra, i)
    from .engine import pi_inv

    action: dict[Generator, GradedElement] = {pi_inv(): GradedElement.zero()}
    for j in range(1, n + 1):
        th = GradedElement.zero()
        ch = GradedElement.zero()
        for k in range(1, n + 1):
            c = algebra.c(j, i, k)
            if c:
                th = th - el(Theta(k)).scale(c)
                ch = ch - el(chi(k)).scale(c)
        action[Theta(j)] = th
        action[chi(j)] = ch
    for r in range(1, n + 1):
        for s in range(1, n + 1):
            # [A, ad_i]^r_s = sum_m A^r_m (ad_i)^m_s - (ad_i)^r_m A^m_s
            va = GradedElement.zero()
            vb = GradedElement.zero()
            for m in range(1, n + 1):
                c1 = adi[m - 1][s - 1]
                if c1:
                    va = va + el(A(r, m)).scale(c1)
                    vb = vb + el(Abar(r, m)).scale(c1)
                c2 = adi[r - 1][m - 1]
                if c2:
                    va = va - el(A(m, s)).scale(c2)
                    vb = vb - el(Abar(m, s)).scale(c2)
            action[A(r, s)] = va
            action[Abar(r, s)] = vb
    return Derivation(parity=0, action=action, name=f"total_lie[{i}]")


@dataclass
class GFormComplex:
    algebra: LieAlgebraData
    d: Derivation
    iota_chi: Derivation
    total_lie: list
    iota_xi: list


def gform_complex(algebra: LieAlgebraData) -> GFormComplex:
    n = algebra.dim
    d = gform_differential(algebra)
    for g in list(d.action):
        if apply_derivation(d, apply_derivation(d, el(g))).terms:
            raise CartanWeilError(f"d^2 != 0 on {g.name} in the G-form model")
    return GFormComplex(
        algebra=algebra,
        d=d,
        iota_chi=iota_chi(algebra),
        total_lie=[total_lie(algebra, i) for i in range(1, n + 1)],
        iota_xi=[iota_xi(algebra, i) for i in range(1, n + 1)],
    )


# ---------------------------------------------------------------------------
# Exact adjoint points
# ---------------------------------------------------------------------------


def _mat_identity(n: int):
    return tuple(tuple(Q(1) if i == j else Q(0) for j in range(n)) for i in range(n))


def _mat_mul(x, y):
    n = len(x)
    return tuple(
        tuple(sum(x[i][k] * y[k][j] for k in range(n)) for j in range(n))
        for i in range(n)
    )


def _mat_transpose(x):
    n = len(x)
    return tuple(tuple(x[j][i] for j in range(n)) for i in range(n))


_PYTH_PAIRS = ((2, 1), (3, 2), (4, 1), (4, 3), (5, 2))


def _pythagorean(rng: random.Random) -> tuple[Fraction, Fraction]:
    m, n = _PYTH_PAIRS[rng.randrange(len(_PYTH_PAIRS))]
    h = m * m + n * n
    return Q(m * m - n * n, h), Q(2 * m * n, h)


def su2_rotation(algebra: LieAlgebraData, axis: int, c, s):
    """Ad(exp(angle xi_axis)) for su2 via the Rodrigues formula I + sN + (1-c)N^2."""
    c, s = Q(c), Q(s)
    if c * c + s * s != 1:
        raise CartanWeilError("(cos, sin) must satisfy cos^2 + sin^2 = 1")
    n = algebra.dim
    N = ad_matrix(algebra, axis)
    N2 = _mat_mul(N, N)
    return tuple(
        tuple(
            (Q(1) if i == j else Q(0)) + s * N[i][j] + (1 - c) * N2[i][j]
            for j in range(n)
        )
        for i in range(n)
    )


def sample_adjoint_point(algebra: LieAlgebraData, seed) -> tuple:
    """An exact rational pair (A, Abar) = (Ad(g), Ad(g^-1)) with Abar = A^T.

    su2: products of Rodrigues rotations at Pythagorean angles.  su3: products
    of root-su(2) rotations and Hilbert-90 torus elements diag(z/LaTeXbar z, ...),
    computed in the defining representation; these generate a Zariski-dense
    subgroup, which is what makes a True oracle verdict meaningful.
    """
    name = algebra.name
    rng = random.Random(f"adjoint:{name}:{seed}")
    n = algebra.dim
    if name.startswith("abelian"):
        ident = _mat_identity(n)
        return ident, ident
    if name == "su2":
        mat = _mat_identity(3)
        for _ in range(rng.randint(2, 3)):
            axis = rng.randint(1, 3)
            c, s = _pythagorean(rng)
            mat = _mat_mul(mat, su2_rotation(algebra, axis, c, s))
        return mat, _mat_transpose(mat)
    if name == "su3":
        g = None
        for fi in range(2):
            if fi == 0 or rng.random() < 0.5:
                c, s = _pythagorean(rng)
                f = _su3_rotation(rng.randint(1, 3), c, s)
            else:
                z1 = _z(rng.randint(1, 2), rng.randint(1, 2))
                z2 = _z(rng.randint(1, 2), -rng.randint(1, 2))
                f = _su3_torus(z1, z2)
            g = f if g is None else _su3_mat_mul(g, f)
        mat = _su3_adjoint_of(g)
        matT = _mat_transpose(mat)
        if _mat_mul(mat, matT) != _mat_identity(8):
            raise CartanWeilError("su3 adjoint point is not orthogonal")
        return mat, matT
    raise UnknownAlgebraError(
        f"no exact adjoint sampling for algebra {name!r}; supported: abelian, su2, su3"
    )


def _su3_mat_mul(x, y):
    from .lie_data import _mmul

    return _mmul(x, y)


# ---------------------------------------------------------------------------
# Evaluation oracle
# ---------------------------------------------------------------------------


@dataclass
class OracleVerdict:
    equal: bool
    samples: int
    seed: object
    witness: dict | None = None

    def __bool__(self) -> bool:
        return self.equal

    def to_json_obj(self) -> dict:
        obj = {"equal": self.equal, "samples": self.samples, "seed": str(self.seed)}
        if self.witness is not None:
            obj["witness"] = self.witness
        return obj


def _assignment_for(
    algebra: LieAlgebraData, gens, seed, sample_index: int
) -> dict[Generator, Fraction]:
    Amat, Abarmat = sample_adjoint_point(algebra, f"{seed}:{sample_index}")
    rng = random.Random(f"scalars:{algebra.name}:{seed}:{sample_index}")
    assignment: dict[Generator, Fraction] = {}
    for g in gens:
        if g.parity:
            continue
        if g.kind == Kind.A:
            i, j = g.index
            assignment[g] = Amat[i - 1][j - 1]
        elif g.kind == Kind.ABAR:
            i, j = g.index
            assignment[g] = Abarmat[i - 1][j - 1]
        else:
            num = rng.randint(-7, 7)
            den = rng.randint(1, 5)
            if num == 0:
                num = rng.randint(1, 5)
            assignment[g] = Q(num, den)
    return assignment


def oracle_equal(
    algebra: LieAlgebraData,
    x: GradedElement,
    y: GradedElement,
    samples: int = 8,
    seed=0,
    restrict_gform: bool = False,
) -> OracleVerdict:
    """Probabilistic identity check on the sampled adjoint points.

    With restrict_gform, inputs must live in the G-form model proper.
    Scalar even generators outside the adjoint matrices (chi, mu, alpha, t,
    pi_inv) receive independent random rationals per sample.
    """
    if samples < 1:
        raise CartanWeilError("oracle needs at least one sample")
    diff = x - y
    if not diff.terms:
        return OracleVerdict(True, samples, seed)
    gens = diff.generators()
    if restrict_gform:
        for g in gens:
            if g.kind not in _GFORM_KINDS:
                raise ForeignGeneratorError(
                    f"{g.name} does not live in the G-form model"
                )
    for s_idx in range(samples):
        assignment = _assignment_for(algebra, gens, seed, s_idx)
        table = diff.evaluate(assignment, odd_policy="coefficient_extraction")
        if table:
            word, val = next(iter(sorted(
                table.items(),
                key=lambda kv: tuple(g._key for g in kv[0]),
            )))
            witness = {
                "sample_index": s_idx,
                "assignment": {
                    g.name: f"{v.numerator}/{v.denominator}"
                    for g, v in sorted(assignment.items(), key=lambda kv: kv[0]._key)
                },
                "odd_word": [g.name for g in word],
                "difference": f"{val.numerator}/{val.denominator}",
            }
            return OracleVerdict(False, samples, seed, witness)
    return OracleVerdict(True, samples, seed)


def equality_oracle(
    algebra: LieAlgebraData,
    x: GradedElement,
    y: GradedElement,
    samples: int = 8,
    seed=0,
) -> OracleVerdict:
    """The G-form model equality oracle (Theta, A, Abar, chi, pi_inv only)."""
    return oracle_equal(algebra, x, y, samples=samples, seed=seed, restrict_gform=True)


def oracle_zero(algebra, x, samples=8, seed=0) -> OracleVerdict:
    return oracle_equal(algebra, x, GradedElement.zero(), samples=samples, seed=seed)


# ---------------------------------------------------------------------------
# Local rewrites for the inverse-pair relations
# ---------------------------------------------------------------------------

# pattern id -> (kind of first factor, kind of second factor,
#                index positions carrying the contraction)
# 1: A^i_k Abar^k_j -> delta^i_j        2: Abar^i_k A^k_j -> delta^i_j
# 3: A^k_i A^k_j    -> delta_{ij}       4: Abar^i_k Abar^j_k -> delta_{ij}


def _term_pattern_sites(even, n):
    """All (pattern, i, j, k, g1, g2) contraction sites in an even monomial."""
    mats = [(g, m) for g, m in even if g.kind in (Kind.A, Kind.ABAR)]
    sites = []
    for g1, m1 in mats:
        i1, j1 = g1.index
        for g2, _ in mats:
            if g1 is g2 and m1 < 2:
                continue
            i2, j2 = g2.index
            if g1.kind == Kind.A and g2.kind == Kind.ABAR and j1 == i2:
                sites.append((1, i1, j2, j1, g1, g2))
            elif g1.kind == Kind.ABAR and g2.kind == Kind.A and j1 == i2:
                sites.append((2, i1, j2, j1, g1, g2))
            if g1.kind == Kind.A and g2.kind == Kind.A and i1 == i2:
                sites.append((3, j1, j2, i1, g1, g2))
            if g1.kind == Kind.ABAR and g2.kind == Kind.ABAR and j1 == j2:
                sites.append((4, i1, i2, j1, g1, g2))
    return sites


def _remove_factors(even, g1, g2):
    out = []
    for g, m in even:
        drop = (1 if g is g1 else 0) + (1 if g is g2 else 0)
        if m - drop > 0:
            out.append((g, m - drop))
        elif m - drop < 0:
            return None
    return tuple(out)


def contract_adjoint_pairs(algebra: LieAlgebraData, x: GradedElement) -> GradedElement:
    """Apply the local rewrites A Abar = Abar A = I and A^T A = Abar Abar^T = I.

    Scans for complete contracted sums (all k = 1..n present with a common
    coefficient on an otherwise identical term) and collapses each to a
    Kronecker delta.  Preserves the value at every adjoint point.
    """
    n = algebra.dim
    current = GradedElement(dict(x.terms))
    for _ in range(200):
        groups: dict[tuple, dict[int, Fraction]] = {}
        meta: dict[tuple, tuple] = {}
        for (even, odd), coeff in current.terms.items():
            for pat, i, j, k, g1, g2 in _term_pattern_sites(even, n):
                rest = _remove_factors(even, g1, g2)
                if rest is None:
                    continue
                sig = (pat, i, j, rest, odd)
                groups.setdefault(sig, {})[k] = coeff
                meta[(sig, k)] = (even, odd, g1, g2)
        done = True
        for sig in sorted(
            groups,
            key=lambda s: (
                s[0],
                s[1],
                s[2],
                tuple((g._key, m) for g, m in s[3]),
                tuple(g._key for g in s[4]),
            ),
        ):
            kmap = groups[sig]
            if set(kmap) != set(range(1, n + 1)):
                continue
            vals = set(kmap.values())
            if len(vals) != 1:
                continue
            c = vals.pop()
            pat, i, j, rest, odd = sig
            terms = dict(current.terms)
            for k in range(1, n + 1):
                even, odd_w, g1, g2 = meta[(sig, k)]
                key = (even, odd_w)
                v = terms.get(key, Q(0)) - c
                if v:
                    terms[key] = v
                else:
                    terms.pop(key, None)
            if i == j:
                key = (rest, odd)
                v = terms.get(key, Q(0)) + c
                if v:
                    terms[key] = v
                else:
                    terms.pop(key, None)
            current = GradedElement(terms)
            done = False
            break
        if done:
            break
    return current


def transpose_abar(x: GradedElement) -> GradedElement:
    """Present Abar via orthogonality: substitute Abar^i_j -> A^j_i."""
    out: dict = {}
    for (even, odd), c in x.terms.items():
        new_even = []
        for g, m in even:
            if g.kind == Kind.ABAR:
                new_even.append((A(g.index[1], g.index[0]), m))
            else:
                new_even.append((g, m))
        merged: dict[Generator, int] = {}
        for g, m in new_even:
            merged[g] = merged.get(g, 0) + m
        key = (tuple(sorted(merged.items(), key=lambda kv: kv[0]._key)), odd)
        out[key] = out.get(key, Q(0)) + c
    return GradedElement({k: v for k, v in out.items() if v})
