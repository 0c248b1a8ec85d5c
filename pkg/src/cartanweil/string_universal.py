"""Universal connection data on PG x EG and the universal string class.

The connection/curvature/Higgs data follow the universal-bundle displays with
the Ad(p^-1) wrapper dropped by invariance of the polynomial; EG enters
through its Weil generators (a^i -> theta^i, f^i -> mu^i) and the endpoint
adjoint survives as the A / Abar symbols.

Two sign variants are implemented for the curvature cross term
[ev* Theta-hat, Ad(p(2pi)^{+-1}) a]: 'paper_display' follows the printed
curvature verbatim, 'rederived' uses the positive power.  Recomputing
dA + 1/2 [A, A] from the connection display confirms 'rederived'; the
basicness and transgression checks arbitrate empirically and the wrong
variant is kept as a negative control.

Large algebras (su3) are verified pointwise: the whole pipeline is rerun
with exact numeric adjoint entries at sampled points, where horizontality,
the vanishing of the exterior components of phi, G-invariance under finite
conjugation, and agreement with the returned form are all literal rational
identities.
"""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .engine import (
    A,
    Abar,
    CartanWeilError,
    Derivation,
    GradedElement,
    Generator,
    Kind,
    Q,
    Theta,
    alpha,
    apply_derivation,
    chi,
    dtheta,
    el,
    mu,
    theta,
)
from .gforms import (
    OracleVerdict,
    oracle_equal,
    sample_adjoint_point,
    _mat_identity,
    _mat_mul,
    _mat_transpose,
)
from .lie_data import (
    GVec,
    InvariantPolynomial,
    LieAlgebraData,
    apply_polynomial,
    bracket,
)
from .mq import (
    EquivariantForm,
    NotBasicError,
    drop_exterior,
    is_basic_tensor,
    mq_phi,
    mq_project,
    mu_to_chi,
    tensor_complex,
)
from .transgression import equivariant_transgress, transgress_closed

VARIANTS = ("rederived", "paper_display")


@dataclass
class UniversalData:
    algebra: LieAlgebraData
    variant: str
    curvature_F: GVec   # component vector; free of the loop marker
    higgs_cov: GVec     # each term carries exactly one dtheta marker
    point: tuple | None = None


def _elmat_symbolic(n: int, kind_A: bool = True):
    make = A if kind_A else Abar
    return [[el(make(i, j)) for j in range(1, n + 1)] for i in range(1, n + 1)]


def _elmat_numeric(mat):
    n = len(mat)
    return [
        [GradedElement.scalar(mat[i][j]) for j in range(n)] for i in range(n)
    ]


def _elmat_apply(M, v: GVec) -> GVec:
    n = len(v)
    out = []
    for i in range(n):
        acc = GradedElement.zero()
        row = M[i]
        for j in range(n):
            if row[j].terms and v[j].terms:
                acc = acc + row[j] * v[j]
        out.append(acc)
    return out


def build_universal_data(
    algebra: LieAlgebraData, variant: str = "rederived", point: tuple | None = None
) -> UniversalData:
    """Curvature and Higgs covariant derivative of the universal connection.

    point, when given, is an exact (A, Abar) adjoint pair whose entries are
    baked into the coefficients instead of the formal A/Abar symbols.
    """
    if variant not in VARIANTS:
        raise CartanWeilError(f"unknown variant {variant!r}")
    n = algebra.dim
    if point is None:
        Amat = _elmat_symbolic(n, True)
        Abarmat = _elmat_symbolic(n, False)
    else:
        Amat = _elmat_numeric(point[0])
        Abarmat = _elmat_numeric(point[1])

    thvec = [el(Theta(i)) for i in range(1, n + 1)]
    avec = [el(theta(i)) for i in range(1, n + 1)]
    fvec = [el(mu(i)) for i in range(1, n + 1)]

    W = _elmat_apply(Amat, thvec)
    Ga = _elmat_apply(Amat, avec)
    Gf = _elmat_apply(Amat, fvec)
    cross = Ga if variant == "rederived" else _elmat_apply(Abarmat, avec)

    br_WW = bracket(algebra, W, W)
    br_Wcross = bracket(algebra, W, cross)
    br_Wa = bracket(algebra, W, avec)
    br_aa = bracket(algebra, avec, avec)
    G_braa = _elmat_apply(Amat, br_aa)
    br_Gaa = bracket(algebra, Ga, avec)

    al = el(alpha())
    weight = al * al - al
    half = Q(1, 2)

    F = []
    for i in range(n):
        two_form = (
            br_WW[i].scale(half)
            - br_Wcross[i]
            + br_Wa[i]
            + G_braa[i].scale(half)
            - br_Gaa[i]
            + br_aa[i].scale(half)
        )
        f_part = al * (Gf[i] - fvec[i]) + fvec[i]
        F.append(weight * two_form + f_part)

    marker = el(dtheta())
    higgs = [marker * (W[i] - Ga[i] + avec[i]) for i in range(n)]
    return UniversalData(algebra, variant, F, higgs, point)


def string_form(
    p: InvariantPolynomial, F: GVec, higgs_cov: GVec
) -> GradedElement:
    """k int_{S^1} p(nabla Phi, F^{k-1}) dtheta via the alpha substitution.

    Strips the single dtheta marker from higgs_cov and integrates the
    alpha-polynomial over [0,1]."""
    n = len(F)
    if p.algebra.dim != n:
        raise CartanWeilError(
            f"polynomial on dim {p.algebra.dim} applied to dim-{n} data"
        )
    k = p.degree
    marker = dtheta()
    for comp in F:
        if any(marker in odd for (_, odd) in comp.terms):
            raise CartanWeilError("curvature must be free of the loop marker")
    Y = []
    for comp in higgs_cov:
        if comp.without_odd(marker).terms:
            raise CartanWeilError(
                "higgs covariant derivative must carry the loop marker in every term"
            )
        Y.append(comp.odd_coefficient(marker))
    slots = [Y] + [F] * (k - 1) if k > 1 else [Y]
    integrand = apply_polynomial(p, slots).scale(k)
    return integrand.integrate_parameter(alpha(), 0, 1)


def caloron_expand_identity(
    p: InvariantPolynomial, F: GVec, Psi: GVec
) -> tuple[GradedElement, GradedElement]:
    """Split p((F + Psi dtheta)^k) into its one-dtheta part and the rest.

    The dtheta part must equal k p(Psi, F^{k-1}) dtheta, certifying the
    factor k between the Chern-Weil and the local string-form formulas."""
    k = p.degree
    marker = el(dtheta())
    H = [F[i] + Psi[i] * marker for i in range(len(F))]
    full = apply_polynomial(p, [H] * k)
    rest = full.without_odd(dtheta())
    return full - rest, rest


def based_string_class(p: InvariantPolynomial, algebra: LieAlgebraData) -> GradedElement:
    """The path-fibration specialisation: a = f = 0, endpoint adjoint trivial."""
    data = build_universal_data(algebra, "rederived")
    subs: dict[Generator, GradedElement] = {}
    n = algebra.dim
    for i in range(1, n + 1):
        subs[theta(i)] = GradedElement.zero()
        subs[mu(i)] = GradedElement.zero()
        for j in range(1, n + 1):
            delta = GradedElement.one() if i == j else GradedElement.zero()
            subs[A(i, j)] = delta
            subs[Abar(i, j)] = delta
    F = [c.substitute(subs) for c in data.curvature_F]
    higgs = [c.substitute(subs) for c in data.higgs_cov]
    return string_form(p, F, higgs)


def reduced_projected_form(p: InvariantPolynomial, algebra: LieAlgebraData) -> GradedElement:
    """The exterior-free component of the universal string form, computed by
    pulling the common adjoint factor out of every slot of the invariant
    polynomial: k int_0^1 p(Theta, (1/2(a^2-a)[Theta,Theta] + a chi
    + (1-a) Abar chi)^{k-1}) da."""
    n = algebra.dim
    k = p.degree
    thvec = [el(Theta(i)) for i in range(1, n + 1)]
    if k == 1:
        return apply_polynomial(p, [thvec])
    br = bracket(algebra, thvec, thvec)
    al = el(alpha())
    weight = (al * al - al).scale(Q(1, 2))
    one_minus = GradedElement.one() - al
    Y = []
    for i in range(1, n + 1):
        abar_chi = GradedElement.zero()
        for j in range(1, n + 1):
            abar_chi = abar_chi + el(Abar(i, j)) * el(chi(j))
        Y.append(weight * br[i - 1] + al * el(chi(i)) + one_minus * abar_chi)
    integrand = apply_polynomial(p, [thvec] + [Y] * (k - 1)).scale(k)
    return integrand.integrate_parameter(alpha(), 0, 1)


# ---------------------------------------------------------------------------
# Pointwise pipeline verification (large algebras)
# ---------------------------------------------------------------------------


def _pointwise_iota(algebra: LieAlgebraData, i: int, abar_pt) -> Derivation:
    """Diagonal contraction with the adjoint entries baked in."""
    n = algebra.dim
    action: dict[Generator, GradedElement] = {}
    from .engine import pi_inv

    action[pi_inv()] = GradedElement.zero()
    for j in range(1, n + 1):
        val = GradedElement.scalar(-abar_pt[j - 1][i - 1])
        if j == i:
            val = val + GradedElement.one()
        action[Theta(j)] = val
        action[theta(j)] = GradedElement.one() if j == i else GradedElement.zero()
        action[mu(j)] = GradedElement.zero()
    return Derivation(parity=1, action=action, name=f"iota_pt[{i}]")


def _pointwise_gamma(algebra: LieAlgebraData, abar_pt) -> Derivation:
    n = algebra.dim
    action: dict[Generator, GradedElement] = {}
    from .engine import pi_inv

    action[pi_inv()] = GradedElement.zero()
    for p_idx in range(1, n + 1):
        val = el(theta(p_idx))
        for i in range(1, n + 1):
            v = abar_pt[p_idx - 1][i - 1]
            if v:
                val = val - el(theta(i)).scale(v)
        action[Theta(p_idx)] = val
        action[theta(p_idx)] = GradedElement.zero()
        action[mu(p_idx)] = GradedElement.zero()
    return Derivation(parity=0, action=action, name="gamma_pt")


def _rotate_generators(x: GradedElement, hbar) -> GradedElement:
    """Substitute v^i -> sum_j Hbar[i][j] v^j for Theta, theta, mu."""
    n = len(hbar)
    subs: dict[Generator, GradedElement] = {}
    for i in range(1, n + 1):
        for make in (Theta, theta, mu):
            acc = GradedElement.zero()
            for j in range(1, n + 1):
                v = hbar[i - 1][j - 1]
                if v:
                    acc = acc + el(make(j)).scale(v)
            subs[make(i)] = acc
    present = x.generators()
    subs = {g: v for g, v in subs.items() if g in present}
    return x.substitute(subs) if subs else x


def _pointwise_string_element(p, algebra, variant, point) -> GradedElement:
    data = build_universal_data(algebra, variant, point=point)
    return string_form(p, data.curvature_F, data.higgs_cov)


def _chi_table_assignment(algebra, seed, gens) -> dict:
    rng = random.Random(f"ptchi:{algebra.name}:{seed}")
    assignment = {}
    for g in gens:
        if g.parity:
            continue
        num = rng.randint(-5, 5) or 3
        assignment[g] = Q(num, rng.randint(1, 4))
    return assignment


def _pointwise_certify(
    p: InvariantPolynomial,
    algebra: LieAlgebraData,
    variant: str,
    reduced: GradedElement,
    samples: int,
    seed,
    phi_points: int = 1,
    invariance_points: int = 1,
) -> None:
    """Exact pointwise certification of the universal pipeline.

    Raises NotBasicError or CartanWeilError with a witness on failure."""
    n = algebra.dim
    for s_idx in range(samples):
        pt = sample_adjoint_point(algebra, f"{seed}:usc:{s_idx}")
        s_el = _pointwise_string_element(p, algebra, variant, pt)

        for i in range(1, n + 1):
            res = apply_derivation(_pointwise_iota(algebra, i, pt[1]), s_el)
            if res.terms:
                raise NotBasicError(
                    {
                        "stage": "horizontality",
                        "variant": variant,
                        "sample_index": s_idx,
                        "operator": f"iota_total[{i}]",
                    }
                )

        if s_idx < phi_points and p.degree <= 3:
            gamma_pt = _pointwise_gamma(algebra, pt[1])
            total = s_el
            piece = s_el
            fact = 1
            m = 0
            while piece.terms:
                m += 1
                if m > n + 1:
                    raise CartanWeilError("pointwise gamma not nilpotent")
                piece = apply_derivation(gamma_pt, piece)
                if piece.terms:
                    fact *= m
                    total = total + piece.scale(Q(1, fact))
            if (total - drop_exterior(total)).terms:
                raise NotBasicError(
                    {
                        "stage": "mq_phi_exterior_part",
                        "variant": variant,
                        "sample_index": s_idx,
                    }
                )
            if drop_exterior(total) != drop_exterior(s_el):
                raise CartanWeilError("phi changed the exterior-free component")

        if s_idx < invariance_points:
            h_pt, hbar_pt = sample_adjoint_point(algebra, f"{seed}:usc-h:{s_idx}")
            conj = _mat_mul(_mat_mul(hbar_pt, pt[0]), h_pt)
            conj_pair = (conj, _mat_transpose(conj))
            s_conj = _pointwise_string_element(p, algebra, variant, conj_pair)
            if _rotate_generators(s_conj, hbar_pt) != s_el:
                raise NotBasicError(
                    {
                        "stage": "finite_invariance",
                        "variant": variant,
                        "sample_index": s_idx,
                    }
                )

        proj_pt = mu_to_chi(drop_exterior(s_el))
        diff_gens = set(proj_pt.generators()) | set(reduced.generators())
        assignment = _chi_table_assignment(algebra, f"{seed}:{s_idx}", diff_gens)
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                assignment[A(i, j)] = pt[0][i - 1][j - 1]
                assignment[Abar(i, j)] = pt[1][i - 1][j - 1]
        t1 = proj_pt.evaluate(assignment, "coefficient_extraction")
        t2 = reduced.evaluate(assignment, "coefficient_extraction")
        if t1 != t2:
            raise CartanWeilError(
                f"reduced projected form disagrees with the pipeline at sample {s_idx}"
            )


def universal_string_class(
    p: InvariantPolynomial,
    algebra: LieAlgebraData,
    variant: str = "rederived",
    samples: int = 8,
    seed=0,
) -> EquivariantForm:
    """build data -> string form -> basicness -> Mathai-Quillen projection.

    Small algebras run fully symbolically with the oracle-assisted basicness
    predicate and the exact phi agreement; larger ones are certified
    pointwise and return the slot-reduced projected form."""
    heavy = algebra.dim > 3 or p.degree > 3
    if not heavy:
        data = build_universal_data(algebra, variant)
        s_el = string_form(p, data.curvature_F, data.higgs_cov)
        ts = tensor_complex(algebra)
        verdict = is_basic_tensor(ts, s_el, samples=samples, seed=seed)
        if not verdict.equal:
            raise NotBasicError(dict(verdict.witness or {}, variant=variant))
        proj = mq_project(ts, s_el, check_basic=False)
        if p.degree <= 3:
            phi = mq_phi(ts, s_el)
            if mu_to_chi(drop_exterior(phi)) != proj.element:
                raise CartanWeilError("phi and the projection shortcut disagree")
            ext = phi - drop_exterior(phi)
            v = oracle_equal(
                algebra, ext, GradedElement.zero(), samples=samples, seed=seed
            )
            if not v.equal:
                raise NotBasicError(dict(v.witness or {}, stage="phi_exterior", variant=variant))
        return proj
    reduced = reduced_projected_form(p, algebra)
    _pointwise_certify(p, algebra, variant, reduced, min(samples, 3), seed)
    return EquivariantForm(algebra, reduced)


# ---------------------------------------------------------------------------
# Verification reports
# ---------------------------------------------------------------------------


@dataclass
class Report:
    claim: str
    algebra: str
    polynomial: str
    passed: bool
    witness: dict | None = None
    runtime_ms: int = 0
    checks: list = field(default_factory=list)

    def to_json_obj(self, include_runtime: bool = True) -> dict:
        obj = {
            "claim": self.claim,
            "algebra": self.algebra,
            "polynomial": self.polynomial,
            "pass": self.passed,
        }
        if self.witness is not None:
            obj["witness"] = self.witness
        if self.checks:
            obj["checks"] = self.checks
        if include_runtime:
            obj["runtime_ms"] = self.runtime_ms
        return obj


def verify_prop14(
    p: InvariantPolynomial,
    algebra: LieAlgebraData,
    variant: str = "rederived",
    samples: int = 8,
    seed=0,
) -> Report:
    """Oracle equality of the universal string class and tau_G(p)."""
    t0 = time.perf_counter()
    try:
        cls = universal_string_class(p, algebra, variant, samples=samples, seed=seed)
    except (NotBasicError, CartanWeilError) as exc:
        witness = getattr(exc, "witness", None) or {"error": str(exc)}
        return Report(
            claim="s_p(ELG) = tau_G(p)",
            algebra=algebra.name,
            polynomial=p.describe(),
            passed=False,
            witness=dict(witness, stage=witness.get("stage", "pipeline")),
            runtime_ms=int((time.perf_counter() - t0) * 1000),
        )
    tau = equivariant_transgress(p)
    v = oracle_equal(algebra, cls.element, tau.form, samples=samples, seed=seed)
    return Report(
        claim="s_p(ELG) = tau_G(p)",
        algebra=algebra.name,
        polynomial=p.describe(),
        passed=v.equal,
        witness=v.witness,
        runtime_ms=int((time.perf_counter() - t0) * 1000),
    )


def verify_theorem15_consistency(
    p: InvariantPolynomial,
    algebra: LieAlgebraData,
    samples: int = 8,
    seed=0,
) -> Report:
    """Universal-level commutativity content: the class is equivariantly
    closed, G-invariant, and specialises at chi = 0, A = I to tau(p)."""
    from .gforms import total_lie
    from .mq import cartan_differential

    t0 = time.perf_counter()
    checks = []
    witness = None
    try:
        cls = universal_string_class(p, algebra, samples=samples, seed=seed)
    except (NotBasicError, CartanWeilError) as exc:
        witness = getattr(exc, "witness", None) or {"error": str(exc)}
        return Report(
            claim="theorem15 universal consistency",
            algebra=algebra.name,
            polynomial=p.describe(),
            passed=False,
            witness=witness,
            runtime_ms=int((time.perf_counter() - t0) * 1000),
        )
    ts = tensor_complex(algebra)
    d_G = cartan_differential(ts)
    v = oracle_equal(
        algebra,
        apply_derivation(d_G, cls.element),
        GradedElement.zero(),
        samples=samples,
        seed=seed,
    )
    checks.append({"check": "equivariantly_closed", "pass": v.equal})
    if not v.equal and witness is None:
        witness = v.witness

    inv_ok = True
    for i in range(1, algebra.dim + 1):
        vi = oracle_equal(
            algebra,
            apply_derivation(total_lie(algebra, i), cls.element),
            GradedElement.zero(),
            samples=samples,
            seed=seed,
        )
        if not vi.equal:
            inv_ok = False
            if witness is None:
                witness = dict(vi.witness or {}, operator=f"total_lie[{i}]")
            break
    checks.append({"check": "g_invariant", "pass": inv_ok})

    subs: dict[Generator, GradedElement] = {}
    n = algebra.dim
    for i in range(1, n + 1):
        subs[chi(i)] = GradedElement.zero()
        for j in range(1, n + 1):
            delta = GradedElement.one() if i == j else GradedElement.zero()
            subs[A(i, j)] = delta
            subs[Abar(i, j)] = delta
    specialised = cls.element.substitute(subs)
    tau = transgress_closed(p)
    based_ok = specialised == tau.form
    checks.append({"check": "chi0_A1_specialisation_equals_tau", "pass": based_ok})
    if not based_ok and witness is None:
        witness = {"stage": "specialisation"}

    passed = all(c["pass"] for c in checks)
    return Report(
        claim="theorem15 universal consistency",
        algebra=algebra.name,
        polynomial=p.describe(),
        passed=passed,
        witness=witness if not passed else None,
        runtime_ms=int((time.perf_counter() - t0) * 1000),
        checks=checks,
    )
