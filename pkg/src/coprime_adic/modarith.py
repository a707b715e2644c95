"""Exact integer primitives: gcd, factorization, totient, powers and orders.

All integers are Python ints (arbitrary precision). The only fixed-width
path is :func:`order_bruteforce_batch`, whose moduli are capped well inside
int64 range.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd as _gcd, prod
from types import MappingProxyType

import numpy as np

from . import kernels
from .errors import CapExceededError, OrderPreconditionError, PreconditionError

BRUTEFORCE_CAP = 10**6


@dataclass(frozen=True)
class Factorization:
    """Prime factorization ``{p: e}``; the empty map encodes 1."""

    prime_powers: MappingProxyType = field(default_factory=lambda: MappingProxyType({}))

    def __post_init__(self):
        pp = dict(sorted(dict(self.prime_powers).items()))
        for p, e in pp.items():
            if p < 2 or e < 1 or factorize(p).prime_powers != {p: 1}:
                raise PreconditionError(f"invalid prime power {p}^{e}")
        object.__setattr__(self, "prime_powers", MappingProxyType(pp))

    @property
    def value(self):
        return prod(p**e for p, e in self.prime_powers.items())

    def __pow__(self, k):
        if k < 0:
            raise ValueError("negative exponent")
        if k == 0:
            return Factorization()
        return Factorization({p: e * k for p, e in self.prime_powers.items()})

    def __mul__(self, other):
        pp = dict(self.prime_powers)
        for p, e in other.prime_powers.items():
            pp[p] = pp.get(p, 0) + e
        return Factorization(pp)

    def __eq__(self, other):
        if isinstance(other, Factorization):
            return dict(self.prime_powers) == dict(other.prime_powers)
        if isinstance(other, dict):
            return dict(self.prime_powers) == other
        return NotImplemented

    def __hash__(self):
        return hash(tuple(self.prime_powers.items()))

    def __repr__(self):
        return f"Factorization({dict(self.prime_powers)!r})"


def gcd(a, b):
    """Greatest common divisor of two non-negative integers; gcd(0, 0) == 0."""
    if a < 0 or b < 0:
        raise PreconditionError("gcd expects non-negative integers")
    while b:
        a, b = b, a % b
    return a


@lru_cache(maxsize=4096)
def _trial_division(x):
    out = {}
    while x % 2 == 0:
        out[2] = out.get(2, 0) + 1
        x //= 2
    p = 3
    while p * p <= x:
        while x % p == 0:
            out[p] = out.get(p, 0) + 1
            x //= p
        p += 2
    if x > 1:
        out[x] = out.get(x, 0) + 1
    return tuple(out.items())


def factorize(x):
    """Prime factorization by trial division (inputs are desk-scale)."""
    if x < 1:
        raise PreconditionError(f"factorize needs x >= 1, got {x}")
    # bypass __post_init__ validation, which itself calls factorize
    f = object.__new__(Factorization)
    object.__setattr__(f, "prime_powers", MappingProxyType(dict(_trial_division(x))))
    return f


def totient(x):
    """Euler's phi."""
    result = x
    for p in factorize(x).prime_powers:
        result = result // p * (p - 1)
    return result


def modpow(base, exp, modulus):
    """``base**exp % modulus`` by left-to-right square-and-multiply."""
    if modulus < 2:
        raise PreconditionError(f"modulus must be >= 2, got {modulus}")
    if exp < 0:
        raise PreconditionError("negative exponent")
    base %= modulus
    result = 1
    for bit in bin(exp)[2:]:
        result = result * result % modulus
        if bit == "1":
            result = result * base % modulus
    return result


def multiplicative_order(x, modulus, exponent_bound):
    """Least ``e >= 1`` with ``x**e == 1 (mod modulus)``.

    ``exponent_bound`` is the factorization of some multiple ``E`` of the
    order (a :class:`Factorization` or a plain ``{p: e}`` dict). The order is
    found by stripping each prime from ``E`` while the power stays 1.

    Raises
    ------
    PreconditionError
        If ``gcd(x, modulus) != 1`` or ``modulus < 2``.
    OrderPreconditionError
        If ``x**E`` is not 1, i.e. ``E`` is not a multiple of the order.

    >>> multiplicative_order(4, 9, {3: 2})
    3
    """
    if modulus < 2:
        raise PreconditionError(f"modulus must be >= 2, got {modulus}")
    if _gcd(x, modulus) != 1:
        raise PreconditionError(f"gcd({x}, {modulus}) != 1")
    if isinstance(exponent_bound, Factorization):
        bound = dict(exponent_bound.prime_powers)
    else:
        bound = dict(exponent_bound)
    x %= modulus
    order = prod(p**e for p, e in bound.items())
    if pow(x, order, modulus) != 1:
        raise OrderPreconditionError(
            f"{x}^{order} != 1 mod {modulus}: bound is not a multiple of the order"
        )
    for p in bound:
        while order % p == 0 and pow(x, order // p, modulus) == 1:
            order //= p
    return order


def order_bruteforce(x, modulus, cap=BRUTEFORCE_CAP):
    """Order of ``x`` mod ``modulus`` by successive multiplication (test oracle)."""
    if modulus < 2:
        raise PreconditionError(f"modulus must be >= 2, got {modulus}")
    if modulus > cap:
        raise CapExceededError(f"modulus {modulus} exceeds brute-force cap {cap}")
    if _gcd(x, modulus) != 1:
        raise PreconditionError(f"gcd({x}, {modulus}) != 1")
    x %= modulus
    acc, e = x, 1
    while acc != 1:
        if e >= cap:
            raise CapExceededError(f"no return to 1 within {cap} steps")
        acc = acc * x % modulus
        e += 1
    return e


def order_bruteforce_batch(xs, moduli, cap=BRUTEFORCE_CAP, use_numba=None):
    """Vectorized :func:`order_bruteforce` over int64 arrays."""
    xs = np.asarray(xs, dtype=np.int64)
    moduli = np.asarray(moduli, dtype=np.int64)
    if moduli.size and (moduli.min() < 2 or moduli.max() > cap):
        raise CapExceededError(f"moduli must lie in [2, {cap}]")
    if np.any(np.gcd(xs, moduli) != 1):
        raise PreconditionError("every x must be a unit modulo its modulus")
    out = kernels.order_batch(xs, moduli, cap=cap, use_numba=use_numba)
    if np.any(out < 0):
        raise CapExceededError(f"some order exceeds cap {cap}")
    return out
