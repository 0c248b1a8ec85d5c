"""Exact symbolic engine for Weil/Cartan models and universal string forms."""

from .engine import (
    A,
    Abar,
    CartanWeilError,
    Derivation,
    GradedElement,
    Generator,
    Kind,
    Theta,
    alpha,
    apply_derivation,
    chi,
    dt,
    dtheta,
    el,
    latex_element,
    mu,
    normalize,
    pi_inv,
    t_param,
    theta,
)
from .lie_data import (
    InvariantPolynomial,
    LieAlgebraData,
    Scale,
    ValidationReport,
    apply_polynomial,
    bracket,
    builtin_algebra,
    cubic_polynomial,
    invariant_polynomial,
    load_algebra,
    metric_polynomial,
    save_algebra,
    sym_power_polynomial,
    symmetrized_product,
    validate_algebra,
)
from .weil import (
    WeilComplex,
    chern_weil_element,
    is_basic,
    is_horizontal,
    weil_complex,
    weil_contraction,
    weil_differential,
)
from .gforms import (
    GFormComplex,
    OracleVerdict,
    contract_adjoint_pairs,
    equality_oracle,
    gform_complex,
    gform_differential,
    hat_theta,
    iota_chi,
    oracle_equal,
    sample_adjoint_point,
    total_lie,
    transpose_abar,
)
from .mq import (
    EquivariantForm,
    NotBasicError,
    TensorComplex,
    cartan_differential,
    is_basic_tensor,
    mq_gamma,
    mq_phi,
    mq_phi_inv,
    mq_project,
    tensor_complex,
    theorem7_differential,
)
from .transgression import (
    TransgressionResult,
    check_equivariantly_closed,
    equivariant_transgress,
    transgress_closed,
    transgress_integral,
    transgression_coefficient,
)
from .string_universal import (
    Report,
    UniversalData,
    based_string_class,
    build_universal_data,
    caloron_expand_identity,
    string_form,
    universal_string_class,
    verify_prop14,
    verify_theorem15_consistency,
)

__version__ = "0.1.0"
