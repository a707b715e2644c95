"""Exact order-stability invariants for coprime bases and adic weight characteristics."""

from .errors import (
    AdicError,
    CapExceededError,
    InconclusiveError,
    InternalConsistencyError,
    InvalidPairError,
    OrderPreconditionError,
    PreconditionError,
    WeightFormatError,
)
from .modarith import Factorization, factorize, gcd, modpow, multiplicative_order, order_bruteforce, totient
from .progressions import (
    ProgressionWitness,
    build_G_set,
    discrete_log_t_prime,
    generate_witnesses,
    subgroup_of_powers,
    verify_witness,
)
from .stability import (
    CoprimePair,
    PsiCertificate,
    compute_psi,
    compute_t,
    gamma_sequence,
    verify_lemma_nonvanishing,
    verify_psi_congruence,
    verify_stability_window,
)
from .weights import (
    AdicInterval,
    CharacteristicReport,
    ModuleFamilyParams,
    StepFunction,
    StepWeight,
    adic_children,
    average,
    bmo_norm_adic,
    characteristic_Ar,
    characteristic_extremal,
    characteristic_RHr,
    doubling_ratio_scan,
    module_closed_forms,
    module_pair_weight,
    power_average,
)

__version__ = "0.1.0"
