"""The Weil algebra W(g) with differential, contractions, Lie derivatives.

Generators: theta^i (degree 1) and mu^i (degree 2), with
d theta^i = mu^i - 1/2 c^i_{jk} theta^j theta^k and d mu^i = c^i_{jk} mu^j theta^k.
Contraction follows iota_i(theta^j) = delta^j_i, iota_i(mu^j) = 0, so the
mu-generators span the horizontal part of W.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .engine import (
    CartanWeilError,
    Derivation,
    ForeignGeneratorError,
    GradedElement,
    Kind,
    Q,
    apply_derivation,
    el,
    mu,
    pi_inv,
    theta,
)
from .lie_data import InvariantPolynomial, LieAlgebraData, apply_polynomial

_W_KINDS = frozenset({Kind.THETA_W, Kind.MU, Kind.PI_INV})


def weil_differential(algebra: LieAlgebraData) -> Derivation:
    n = algebra.dim
    action = {pi_inv(): GradedElement.zero()}
    for i in range(1, n + 1):
        d_theta = el(mu(i))
        d_mu = GradedElement.zero()
        for j in range(1, n + 1):
            for k in range(1, n + 1):
                c = algebra.c(i, j, k)
                if c:
                    d_theta = d_theta - (el(theta(j)) * el(theta(k))).scale(c / 2)
                    d_mu = d_mu + (el(mu(j)) * el(theta(k))).scale(c)
        action[theta(i)] = d_theta
        action[mu(i)] = d_mu
    return Derivation(parity=1, action=action, name=f"d_W[{algebra.name}]")


def weil_contraction(algebra: LieAlgebraData, i: int) -> Derivation:
    if not 1 <= i <= algebra.dim:
        raise CartanWeilError(f"contraction index {i} out of range")
    action = {pi_inv(): GradedElement.zero()}
    for j in range(1, algebra.dim + 1):
        action[theta(j)] = GradedElement.one() if j == i else GradedElement.zero()
        action[mu(j)] = GradedElement.zero()
    return Derivation(parity=1, action=action, name=f"iota_W[{i}]")


def _magic_lie(algebra: LieAlgebraData, d: Derivation, iota: Derivation, i: int) -> Derivation:
    """L_i = d iota_i + iota_i d, defined on generators and Leibniz-extended."""
    action = {}
    for g in list(d.action):
        action[g] = apply_derivation(d, apply_derivation(iota, el(g))) + apply_derivation(
            iota, apply_derivation(d, el(g))
        )
    return Derivation(parity=0, action=action, name=f"L_W[{i}]")


@dataclass
class WeilComplex:
    algebra: LieAlgebraData
    d: Derivation
    iota: list
    lie: list


def weil_complex(algebra: LieAlgebraData) -> WeilComplex:
    """Assemble W(g) and verify d^2 = 0 and the contraction relations on generators."""
    n = algebra.dim
    d = weil_differential(algebra)
    iota = [weil_contraction(algebra, i) for i in range(1, n + 1)]
    lie = [_magic_lie(algebra, d, iota[i - 1], i) for i in range(1, n + 1)]
    gens = [theta(i) for i in range(1, n + 1)] + [mu(i) for i in range(1, n + 1)]
    for g in gens:
        if apply_derivation(d, apply_derivation(d, el(g))).terms:
            raise CartanWeilError(f"d_W^2 != 0 on {g.name} for {algebra.name}")
    for i in range(n):
        for j in range(i, n):
            for g in gens:
                anti = apply_derivation(iota[i], apply_derivation(iota[j], el(g))) + apply_derivation(
                    iota[j], apply_derivation(iota[i], el(g))
                )
                if anti.terms:
                    raise CartanWeilError(
                        f"iota_{i+1} iota_{j+1} + iota_{j+1} iota_{i+1} != 0 on {g.name}"
                    )
    return WeilComplex(algebra=algebra, d=d, iota=iota, lie=lie)


def _check_weil_domain(x: GradedElement) -> None:
    for g in x.generators():
        if g.kind not in _W_KINDS:
            raise ForeignGeneratorError(f"{g.name} does not live in the Weil algebra")


def is_horizontal(complex: WeilComplex, x: GradedElement) -> bool:
    _check_weil_domain(x)
    return all(not apply_derivation(io, x).terms for io in complex.iota)


def is_basic(complex: WeilComplex, x: GradedElement) -> bool:
    _check_weil_domain(x)
    if not is_horizontal(complex, x):
        return False
    return all(not apply_derivation(L, x).terms for L in complex.lie)


def chern_weil_element(p: InvariantPolynomial) -> GradedElement:
    """p_{i1..ik} mu^{i1} ... mu^{ik}, a basic element of W."""
    n = p.algebra.dim
    mu_vec = [el(mu(i)) for i in range(1, n + 1)]
    return apply_polynomial(p, [mu_vec] * p.degree)
