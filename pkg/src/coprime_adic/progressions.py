"""Arithmetic-progression witnesses for coprime bases.

For admissible ``t1`` the residues ``k`` in ``[1, m^(t1*phi(n))]`` with
``k == 1 (mod psi)`` form exactly the cyclic subgroup generated by
``n^phi(m)``. Writing ``k = (n^phi(m))^t'`` gives, for every
``t2 = i*|G| - t'``, an integer ``j == -1 (mod n)`` with::

    k / m^(t1*phi(n)) - j / n^(t2*phi(m)) = 1 / (m^(t1*phi(n)) * n^(t2*phi(m)))
"""

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import ceil

from . import kernels
from .errors import InternalConsistencyError, PreconditionError
from .modarith import totient
from .stability import psi_certificate

DEFAULT_WITNESS_COUNT = 3
# enumerations of G_{t1} beyond this size are refused rather than attempted
ENUMERATION_CAP = 10**7


@dataclass(frozen=True)
class ProgressionWitness:
    pair: object
    t1: int
    k: int
    t_prime: int
    t2: int
    j: int
    identity_checked: bool = False

    @property
    def m_modulus(self):
        return self.pair.m ** (self.t1 * totient(self.pair.n))

    @property
    def n_modulus(self):
        return self.pair.n ** (self.t2 * totient(self.pair.m))

    def to_record(self):
        return {
            "m": self.pair.m,
            "n": self.pair.n,
            "t1": self.t1,
            "k": self.k,
            "t_prime": self.t_prime,
            "t2": self.t2,
            "j": self.j,
            "m_modulus": str(self.m_modulus),
            "n_modulus": str(self.n_modulus),
        }

    def to_json(self):
        return json.dumps(self.to_record(), sort_keys=True)


def m_modulus(pair, t1):
    return pair.m ** (t1 * totient(pair.n))


def admissible_t1(pair, cert=None):
    """Smallest t1 with ``t1 * phi(n) >= t(m,n) + L + 1``."""
    cert = cert or psi_certificate(pair)
    return max(1, ceil(cert.threshold / totient(pair.n)))


def _check_t1(pair, t1, cert, allow_below_threshold):
    if t1 < 1:
        raise PreconditionError("t1 must be >= 1")
    lo = admissible_t1(pair, cert)
    if t1 < lo and not allow_below_threshold:
        raise PreconditionError(f"t1 = {t1} is below the admissible threshold {lo} for {pair}")


def build_G_set(pair, t1, cert=None):
    """``[1, 1 + psi, 1 + 2*psi, ...]`` up to ``m^(t1*phi(n))``, ascending."""
    if t1 < 1:
        raise PreconditionError("t1 must be >= 1")
    cert = cert or psi_certificate(pair)
    size, r = divmod(m_modulus(pair, t1), cert.psi)
    if r:
        raise InternalConsistencyError(f"psi = {cert.psi} does not divide m^(t1*phi(n)) for t1 = {t1}")
    if size > ENUMERATION_CAP:
        raise PreconditionError(f"|G_{t1}{pair}| = {size} exceeds the enumeration cap {ENUMERATION_CAP}")
    return [1 + i * cert.psi for i in range(size)]


class PowerTable:
    """Successive powers ``g, g^2, ..., 1`` of ``g = n^phi(m)`` modulo ``m^(t1*phi(n))``.

    ``log[k]`` is the least ``t' >= 0`` with ``g^t' == k``; the identity maps
    to 0 rather than to the group order.
    """

    def __init__(self, pair, t1, cap=ENUMERATION_CAP):
        self.pair = pair
        self.t1 = t1
        self.modulus = M = m_modulus(pair, t1)
        g = pair.base_power % M
        expected = M // psi_certificate(pair).psi
        if t1 >= admissible_t1(pair) and expected > cap:
            raise PreconditionError(f"subgroup of order {expected} exceeds the enumeration cap {cap}")
        if M <= kernels.MAX_KERNEL_MODULUS:
            arr = kernels.cyclic_powers(g, M, cap=cap)
            if arr is None:
                raise InternalConsistencyError(f"{g} has no finite order mod {M} within {cap}")
            powers = [int(v) for v in arr]
        else:
            powers, acc = [], g
            while True:
                powers.append(acc)
                if acc == 1:
                    break
                if len(powers) >= cap:
                    raise InternalConsistencyError(f"{g} has no finite order mod {M} within {cap}")
                acc = acc * g % M
        # powers = [g^1, ..., g^order = 1]
        self.order = len(powers)
        self.powers = (1,) + tuple(powers[:-1])
        self.log = {v: e for e, v in enumerate(self.powers)}


@lru_cache(maxsize=256)
def power_table(pair, t1):
    return PowerTable(pair, t1)


def subgroup_of_powers(pair, t1, allow_below_threshold=False):
    """The cyclic subgroup generated by ``n^phi(m)`` mod ``m^(t1*phi(n))``, ascending."""
    _check_t1(pair, t1, psi_certificate(pair), allow_below_threshold)
    return sorted(power_table(pair, t1).powers)


def discrete_log_t_prime(pair, t1, k, allow_below_threshold=False):
    """Least ``t' >= 0`` with ``(n^phi(m))^t' == k (mod m^(t1*phi(n)))``."""
    _check_t1(pair, t1, psi_certificate(pair), allow_below_threshold)
    table = power_table(pair, t1)
    if not 1 <= k <= table.modulus:
        raise PreconditionError(f"k = {k} is outside [1, {table.modulus}]")
    try:
        return table.log[k % table.modulus]
    except KeyError:
        raise InternalConsistencyError(
            f"k = {k} is not a power of n^phi(m) modulo {table.modulus}"
        ) from None


def nearest_valid_k(pair, t1, k):
    """Element of G_{t1} closest to ``k`` (ties go to the smaller one)."""
    psi = psi_certificate(pair).psi
    top = 1 + (m_modulus(pair, t1) // psi - 1) * psi
    if k <= 1:
        return 1
    if k >= top:
        return top
    below = 1 + ((k - 1) // psi) * psi
    return min((below, below + psi), key=lambda c: (abs(c - k), c))


def generate_witnesses(pair, t1, k, count=DEFAULT_WITNESS_COUNT, allow_below_threshold=False):
    """The first ``count`` witnesses ``(t2, j)`` for ``k`` in ``G_{t1}``.

    ``t2`` runs over ``i*|G| - t'`` for ``i = 1, 2, ...`` (skipping any
    ``t2 < 1``) and ``j = (k * n^(t2*phi(m)) - 1) / m^(t1*phi(n))`` exactly.
    """
    if count < 1:
        raise PreconditionError("count must be >= 1")
    cert = psi_certificate(pair)
    if (k - 1) % cert.psi:
        raise PreconditionError(f"k = {k} is not 1 mod psi = {cert.psi}")
    t_prime = discrete_log_t_prime(pair, t1, k, allow_below_threshold)
    size = power_table(pair, t1).order
    M = m_modulus(pair, t1)
    phi_m = totient(pair.m)
    out = []
    i = 1
    while len(out) < count:
        t2 = i * size - t_prime
        i += 1
        if t2 < 1:
            continue
        j, r = divmod(k * pair.n ** (t2 * phi_m) - 1, M)
        if r:
            raise InternalConsistencyError(f"exact division failed for {pair}, t1={t1}, k={k}, t2={t2}")
        w = ProgressionWitness(pair, t1, k, t_prime, t2, j)
        if not verify_witness(w):
            raise InternalConsistencyError(f"witness failed verification: {w}")
        out.append(ProgressionWitness(pair, t1, k, t_prime, t2, j, identity_checked=True))
    return out


def verify_witness(w):
    """Exact check of the fraction identity, the range of ``j`` and ``j == -1 (mod n)``."""
    A, B = w.m_modulus, w.n_modulus
    identity = Fraction(w.k, A) - Fraction(w.j, B) == Fraction(1, A * B)
    return identity and 1 <= w.j <= B and (w.j + 1) % w.pair.n == 0
