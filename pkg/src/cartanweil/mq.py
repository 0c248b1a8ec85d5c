"""The tensor complex W(g) (x) Omega(G), Mathai-Quillen isomorphism, Cartan model.

phi = exp(gamma) with gamma = sum_i theta^i (x) iota_i; it carries basic
elements onto G-invariant elements of S(g*) (x) Omega(G), where the symmetric
variables are read as the Cartan polynomial variable chi.  The projection
shortcut drops every term with an exterior generator and renames mu to chi;
on basic elements the full exponential agrees because gamma only raises the
exterior degree.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .engine import (
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
    mu,
    theta,
)
from .gforms import (
    GFormComplex,
    OracleVerdict,
    gform_complex,
    oracle_equal,
    oracle_zero,
)
from .lie_data import LieAlgebraData
from .weil import WeilComplex, weil_complex

_TENSOR_KINDS = frozenset(
    {Kind.THETA_W, Kind.MU, Kind.THETA_G, Kind.A, Kind.ABAR, Kind.CHI, Kind.PI_INV}
)
_EQUIV_KINDS = frozenset({Kind.THETA_G, Kind.A, Kind.ABAR, Kind.CHI, Kind.PI_INV})


class NotBasicError(CartanWeilError):
    """A projection was requested on an element that is not basic."""

    def __init__(self, witness):
        self.witness = witness
        super().__init__(f"element is not basic: {witness}")


@dataclass
class TensorComplex:
    algebra: LieAlgebraData
    weil: WeilComplex
    gforms: GFormComplex
    total_d: Derivation
    gamma: Derivation
    iota_total: list
    lie_total: list


@dataclass
class EquivariantForm:
    """A Cartan-model representative: chi-polynomial valued form on G."""

    algebra: LieAlgebraData
    element: GradedElement

    def __post_init__(self):
        for g in self.element.generators():
            if g.kind not in _EQUIV_KINDS:
                raise ForeignGeneratorError(
                    f"{g.name} cannot appear in an equivariant form"
                )

    def degree_decomposition(self) -> dict[int, GradedElement]:
        return self.element.degree_decomposition()

    @property
    def degree(self) -> int | None:
        return self.element.homogeneous_degree()


def tensor_complex(algebra: LieAlgebraData) -> TensorComplex:
    """Assemble W (x) Omega(G) with total differential, gamma, and the diagonal
    contractions/Lie derivatives; total_d^2 = 0 is verified on generators."""
    n = algebra.dim
    w = weil_complex(algebra)
    g = gform_complex(algebra)

    total_action = dict(w.d.action)
    total_action.update(g.d.action)
    total_d = Derivation(parity=1, action=total_action, name=f"total_d[{algebra.name}]")
    for gen in list(total_action):
        if apply_derivation(total_d, apply_derivation(total_d, el(gen))).terms:
            raise CartanWeilError(f"total_d^2 != 0 on {gen.name}")

    gamma_action: dict[Generator, GradedElement] = {}
    for gen in total_action:
        gamma_action[gen] = GradedElement.zero()
    for p in range(1, n + 1):
        val = el(theta(p))
        for i in range(1, n + 1):
            from .engine import Abar

            val = val - el(theta(i)) * el(Abar(p, i))
        gamma_action[Theta(p)] = val
    gamma = Derivation(parity=0, action=gamma_action, name="gamma")

    iota_total = []
    lie_total = []
    for i in range(1, n + 1):
        io_action = dict(g.iota_xi[i - 1].action)
        io_action.update(w.iota[i - 1].action)
        iota_total.append(
            Derivation(parity=1, action=io_action, name=f"iota_total[{i}]")
        )
        lie_action = dict(g.total_lie[i - 1].action)
        lie_action.update(w.lie[i - 1].action)
        lie_total.append(Derivation(parity=0, action=lie_action, name=f"L_total[{i}]"))

    return TensorComplex(
        algebra=algebra,
        weil=w,
        gforms=g,
        total_d=total_d,
        gamma=gamma,
        iota_total=iota_total,
        lie_total=lie_total,
    )


def mq_gamma(ts: TensorComplex) -> Derivation:
    return ts.gamma


def _exp_of(ts: TensorComplex, x: GradedElement, sign: int) -> GradedElement:
    total = x
    piece = x
    fact = 1
    m = 0
    bound = ts.algebra.dim + 1
    while piece.terms:
        m += 1
        if m > bound:
            raise CartanWeilError("gamma failed to be nilpotent within dim+1 steps")
        piece = apply_derivation(ts.gamma, piece)
        if not piece.terms:
            break
        fact *= m
        total = total + piece.scale(Q(sign ** m, fact))
    return total


def mq_phi(ts: TensorComplex, x: GradedElement) -> GradedElement:
    """phi(x) = sum_m gamma^m(x)/m!, a finite sum by nilpotency."""
    return _exp_of(ts, x, +1)


def mq_phi_inv(ts: TensorComplex, x: GradedElement) -> GradedElement:
    return _exp_of(ts, x, -1)


def _check_tensor_domain(x: GradedElement) -> None:
    for g in x.generators():
        if g.kind not in _TENSOR_KINDS:
            raise ForeignGeneratorError(f"{g.name} does not live in W (x) Omega(G)")


def is_basic_tensor(
    ts: TensorComplex, x: GradedElement, samples: int = 8, seed=0
) -> OracleVerdict:
    """Diagonal horizontality and invariance, oracle-assisted.

    Returns the first failing verdict (with witness) or a passing one.
    """
    _check_tensor_domain(x)
    for i in range(ts.algebra.dim):
        v = oracle_zero(ts.algebra, apply_derivation(ts.iota_total[i], x), samples, seed)
        if not v.equal:
            v.witness = dict(v.witness or {}, operator=f"iota_total[{i+1}]")
            return v
    for i in range(ts.algebra.dim):
        v = oracle_zero(ts.algebra, apply_derivation(ts.lie_total[i], x), samples, seed)
        if not v.equal:
            v.witness = dict(v.witness or {}, operator=f"L_total[{i+1}]")
            return v
    return OracleVerdict(True, samples, seed)


def mu_to_chi(x: GradedElement) -> GradedElement:
    subs = {}
    for g in x.generators():
        if g.kind == Kind.MU:
            subs[g] = el(chi(g.index[0]))
    return x.substitute(subs) if subs else x


def drop_exterior(x: GradedElement) -> GradedElement:
    return x.drop_terms_with(lambda g: g.kind == Kind.THETA_W)


def mq_project(
    ts: TensorComplex,
    x: GradedElement,
    check_basic: bool = True,
    samples: int = 8,
    seed=0,
) -> EquivariantForm:
    """Remark-12 shortcut: the exterior-free component with mu renamed to chi."""
    if check_basic:
        verdict = is_basic_tensor(ts, x, samples=samples, seed=seed)
        if not verdict.equal:
            raise NotBasicError(verdict.witness)
    return EquivariantForm(ts.algebra, mu_to_chi(drop_exterior(x)))


def cartan_differential(ts: TensorComplex) -> Derivation:
    """d_G = d - iota_chi on Cartan-model variables; d_G^2 = 0 on invariants."""
    from .engine import A, Abar, pi_inv

    n = ts.algebra.dim
    action: dict[Generator, GradedElement] = {pi_inv(): GradedElement.zero()}
    d = ts.gforms.d
    ichi = ts.gforms.iota_chi
    for i in range(1, n + 1):
        action[Theta(i)] = d.action[Theta(i)] - ichi.action[Theta(i)]
        action[chi(i)] = GradedElement.zero()
        for j in range(1, n + 1):
            action[A(i, j)] = d.action[A(i, j)]
            action[Abar(i, j)] = d.action[Abar(i, j)]
    return Derivation(parity=1, action=action, name="d_Cartan")


def theorem7_differential(ts: TensorComplex) -> Derivation:
    """1 (x) d - mu^i (x) iota_i, the transported differential on phi-images.

    Exterior generators are treated as inert (they only occur in terms that
    the basicness oracle already certifies to vanish)."""
    from .engine import A, Abar, pi_inv

    n = ts.algebra.dim
    action: dict[Generator, GradedElement] = {pi_inv(): GradedElement.zero()}
    for i in range(1, n + 1):
        val = ts.gforms.d.action[Theta(i)]
        for j in range(1, n + 1):
            val = val - el(mu(j)) * ts.gforms.iota_xi[j - 1].action[Theta(i)]
        action[Theta(i)] = val
        action[mu(i)] = GradedElement.zero()
        action[theta(i)] = GradedElement.zero()
        action[chi(i)] = GradedElement.zero()
        for j in range(1, n + 1):
            action[A(i, j)] = ts.gforms.d.action[A(i, j)]
            action[Abar(i, j)] = ts.gforms.d.action[Abar(i, j)]
    return Derivation(parity=1, action=action, name="d_theorem7")
