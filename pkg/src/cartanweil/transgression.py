"""Ordinary and equivariant transgression forms of invariant polynomials.

The parameter route mirrors the defining computation: expand the curvature
of t*Theta on G x [0,1] with dt as a one-off odd generator, extract the
dt-coefficient and integrate t over [0,1].  The closed route builds
(-1/2)^{k-1} k!(k-1)!/(2k-1)! p(Theta, [Theta,Theta]^{k-1}) directly; the two
must agree as exact term maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .engine import (
    Abar,
    CartanWeilError,
    GradedElement,
    Q,
    Theta,
    apply_derivation,
    chi,
    dt,
    el,
    t_param,
)
from .gforms import OracleVerdict, oracle_equal
from .lie_data import (
    GVec,
    InvariantPolynomial,
    LieAlgebraData,
    apply_polynomial,
    bracket,
    gvec_add,
    gvec_scale,
)
from .mq import EquivariantForm, TensorComplex, cartan_differential


@dataclass
class TransgressionResult:
    polynomial: InvariantPolynomial
    method: str  # "integral" | "closed_formula"
    form: GradedElement
    equivariant: bool = False

    def as_equivariant(self, algebra: LieAlgebraData) -> EquivariantForm:
        return EquivariantForm(algebra, self.form)


def _theta_vec(algebra: LieAlgebraData) -> GVec:
    return [el(Theta(i)) for i in range(1, algebra.dim + 1)]


def _theta_bracket(algebra: LieAlgebraData) -> GVec:
    th = _theta_vec(algebra)
    return bracket(algebra, th, th)


def transgress_integral(p: InvariantPolynomial) -> TransgressionResult:
    """tau(p) via F_t = dt Theta + 1/2 (t^2 - t)[Theta, Theta]."""
    alg = p.algebra
    k = p.degree
    if k < 1:
        raise CartanWeilError("transgression needs degree >= 1")
    tt = el(t_param())
    weight = (tt * tt - tt).scale(Q(1, 2))
    br = _theta_bracket(alg)
    dtel = el(dt())
    F_t = [
        dtel * el(Theta(i)) + weight * br[i - 1] for i in range(1, alg.dim + 1)
    ]
    full = apply_polynomial(p, [F_t] * k)
    integrand = full.odd_coefficient(dt())
    form = integrand.integrate_parameter(t_param(), 0, 1)
    return TransgressionResult(p, "integral", form)


def transgression_coefficient(k: int) -> Fraction:
    return Q((-1) ** (k - 1), 2 ** (k - 1)) * Q(
        math.factorial(k) * math.factorial(k - 1), math.factorial(2 * k - 1)
    )


def transgress_closed(p: InvariantPolynomial) -> TransgressionResult:
    """The closed formula; equals transgress_integral exactly."""
    alg = p.algebra
    k = p.degree
    if k < 1:
        raise CartanWeilError("transgression needs degree >= 1")
    th = _theta_vec(alg)
    if k == 1:
        form = apply_polynomial(p, [th])
    else:
        br = _theta_bracket(alg)
        form = apply_polynomial(p, [th] + [br] * (k - 1)).scale(
            transgression_coefficient(k)
        )
    return TransgressionResult(p, "closed_formula", form)


def equivariant_transgress(p: InvariantPolynomial) -> TransgressionResult:
    """tau_G(p) = k int_0^1 p(Theta, (1/2 (t^2-t)[Theta,Theta] + (1-t)chi
    + t Ad(g^-1)chi)^{k-1}) dt; setting chi = 0 recovers tau(p)."""
    alg = p.algebra
    n = alg.dim
    k = p.degree
    if k < 1:
        raise CartanWeilError("transgression needs degree >= 1")
    th = _theta_vec(alg)
    if k == 1:
        form = apply_polynomial(p, [th])
        return TransgressionResult(p, "integral", form, equivariant=True)
    tt = el(t_param())
    weight = (tt * tt - tt).scale(Q(1, 2))
    br = _theta_bracket(alg)
    one_minus_t = GradedElement.one() - tt
    chivec = [el(chi(i)) for i in range(1, n + 1)]
    abar_chi = []
    for i in range(1, n + 1):
        acc = GradedElement.zero()
        for j in range(1, n + 1):
            acc = acc + el(Abar(i, j)) * el(chi(j))
        abar_chi.append(acc)
    Y = [
        weight * br[i - 1] + one_minus_t * chivec[i - 1] + tt * abar_chi[i - 1]
        for i in range(1, n + 1)
    ]
    integrand = apply_polynomial(p, [th] + [Y] * (k - 1)).scale(k)
    form = integrand.integrate_parameter(t_param(), 0, 1)
    return TransgressionResult(p, "integral", form, equivariant=True)


def check_equivariantly_closed(
    ts: TensorComplex, omega: EquivariantForm, samples: int = 8, seed=0
) -> OracleVerdict:
    d_G = cartan_differential(ts)
    return oracle_equal(
        ts.algebra,
        apply_derivation(d_G, omega.element),
        GradedElement.zero(),
        samples=samples,
        seed=seed,
    )
