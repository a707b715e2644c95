"""Order stability of ``n^phi(m)`` modulo ``m^t`` and the invariant psi(m, n).

For a coprime pair ``m > n >= 2`` let ``x = n^phi(m)`` and ``O_t`` be the order
of ``x`` in ``(Z/m^t Z)^*``. The ratio ``m^t / O_t`` is eventually constant;
that constant is ``psi(m, n)``. The certificate produced here records the
threshold ``t(m, n)``, the sequence ``gamma_l = O_{t(m,n)+l+1} / m^l``, its
stabilization index ``L`` and the verified window of ``t``.

``gamma_l`` is an exact :class:`~fractions.Fraction`. For prime-power ``m`` it
is always an integer divisor of ``m``; for other composite ``m`` it need not
be (e.g. ``(6, 5)`` gives ``gamma_1 = 3/2``) although ``psi`` is still an
integer and still stable. :func:`gamma_chain_violations` reports where the
integral-divisor form breaks down.
"""

import json
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache

from .errors import InconclusiveError, InternalConsistencyError, InvalidPairError, PreconditionError
from .modarith import factorize, gcd, modpow, multiplicative_order, totient

DEFAULT_PROBE_WINDOW = 4
DEFAULT_T_WINDOW = 5
ELL_CAP = 64


@dataclass(frozen=True, order=True)
class CoprimePair:
    m: int
    n: int

    def __post_init__(self):
        m, n = self.m, self.n
        if not (isinstance(m, int) and isinstance(n, int)):
            raise InvalidPairError(f"m and n must be integers, got {m!r}, {n!r}")
        if n < 2 or m < 2:
            raise InvalidPairError(f"need m, n >= 2, got ({m}, {n})")
        if m == n:
            raise InvalidPairError(f"need m > n, got m == n == {m}")
        if m < n:
            raise InvalidPairError(
                f"need m > n, got ({m}, {n})", hint=f"did you mean ({n}, {m})?"
            )
        if gcd(m, n) != 1:
            raise InvalidPairError(f"m and n must be coprime, gcd({m}, {n}) = {gcd(m, n)}")

    @property
    def base_power(self):
        """``n^phi(m)``, the element whose orders are tracked."""
        return self.n ** totient(self.m)

    def __str__(self):
        return f"({self.m}, {self.n})"


@dataclass(frozen=True)
class PsiCertificate:
    pair: CoprimePair
    t_mn: int
    gamma_seq: tuple
    L: int
    gamma: Fraction
    psi: int
    verified_t_lo: int
    verified_t_hi: int

    @property
    def threshold(self):
        """Smallest t at which ``m^t / O_t == psi`` is guaranteed."""
        return self.t_mn + self.L + 1

    def with_window(self, t_lo, t_hi):
        return replace(self, verified_t_lo=t_lo, verified_t_hi=t_hi)

    def to_record(self):
        return {
            "m": self.pair.m,
            "n": self.pair.n,
            "t_mn": self.t_mn,
            "L": self.L,
            "gamma": str(self.gamma),
            "psi": self.psi,
            "verified_t_lo": self.verified_t_lo,
            "verified_t_hi": self.verified_t_hi,
        }

    def to_json(self):
        return json.dumps(self.to_record(), sort_keys=True)

    @classmethod
    def from_record(cls, rec):
        """Rebuild from a cache record. The gamma prefix is not cached; it is
        restored as ``(gamma,)``."""
        pair = CoprimePair(int(rec["m"]), int(rec["n"]))
        gamma = Fraction(rec["gamma"])
        cert = cls(
            pair=pair,
            t_mn=int(rec["t_mn"]),
            gamma_seq=(gamma,),
            L=int(rec["L"]),
            gamma=gamma,
            psi=int(rec["psi"]),
            verified_t_lo=int(rec["verified_t_lo"]),
            verified_t_hi=int(rec["verified_t_hi"]),
        )
        if cert.pair.m ** (cert.t_mn + 1) != cert.gamma * cert.psi:
            raise ValueError(f"inconsistent cache record for {pair}")
        return cert


def order_mod_power(pair, t):
    """``O_t(m, n)``: order of ``n^phi(m)`` modulo ``m^t``.

    ``m^t`` is always a multiple of this order because ``n^phi(m) == 1 mod m``.
    """
    modulus = pair.m**t
    bound = factorize(pair.m) ** t
    return multiplicative_order(pair.base_power % modulus, modulus, bound)


def psi_at(pair, t):
    """``m^t / O_t(m, n)`` for a single t, as an exact integer."""
    q, r = divmod(pair.m**t, order_mod_power(pair, t))
    if r:
        raise InternalConsistencyError(f"O_{t}{pair} does not divide {pair.m}^{t}")
    return q


def compute_t(pair):
    """Least ``t >= 1`` with ``n^phi(m) != 1 (mod m^(t+1))``."""
    x = pair.base_power
    t = 1
    while (x - 1) % pair.m ** (t + 1) == 0:
        t += 1
    return t


def verify_lemma_nonvanishing(pair, ell_max):
    """Check ``(n^phi(m))^(m^l) != 1 (mod m^(t(m,n)+l+1))`` for ``0 <= l <= ell_max``."""
    if ell_max < 0:
        raise PreconditionError("ell_max must be >= 0")
    t = compute_t(pair)
    x = pair.base_power
    return all(
        modpow(x, pair.m**ell, pair.m ** (t + ell + 1)) != 1 for ell in range(ell_max + 1)
    )


def gamma_sequence(pair, ell_max, strict=False):
    """``[gamma_0, ..., gamma_ell_max]`` with ``gamma_l = O_{t(m,n)+l+1} / m^l``.

    Entries are exact fractions. With ``strict=True`` an entry that is not an
    integer divisor of ``m`` greater than 1 raises
    :class:`InternalConsistencyError` instead.
    """
    if ell_max < 0:
        raise PreconditionError("ell_max must be >= 0")
    t = compute_t(pair)
    seq = [Fraction(order_mod_power(pair, t + ell + 1), pair.m**ell) for ell in range(ell_max + 1)]
    if strict:
        for ell, g in enumerate(seq):
            if g.denominator != 1 or g <= 1 or pair.m % g.numerator:
                raise InternalConsistencyError(
                    f"gamma_{ell}{pair} = {g} is not an integer divisor of {pair.m} above 1"
                )
    return seq


def gamma_chain_violations(pair, ell_max=5):
    """List ``(l, reason)`` where the integral gamma chain fails for ``l <= ell_max``.

    The chain requires each ``gamma_l`` to be an integer with ``gamma_l | m``,
    ``gamma_l > 1`` and ``gamma_{l+1} | gamma_l``.
    """
    seq = gamma_sequence(pair, ell_max + 1)
    bad = []
    for ell in range(ell_max + 1):
        g, g_next = seq[ell], seq[ell + 1]
        if g.denominator != 1:
            bad.append((ell, f"gamma_{ell} = {g} is not an integer"))
            continue
        if pair.m % g.numerator:
            bad.append((ell, f"gamma_{ell} = {g} does not divide {pair.m}"))
        if g <= 1:
            bad.append((ell, f"gamma_{ell} = {g} is not > 1"))
        if g_next.denominator != 1 or g.numerator % g_next.numerator:
            bad.append((ell, f"gamma_{ell + 1} = {g_next} does not divide gamma_{ell} = {g}"))
    return bad


def compute_psi(pair, probe_window=DEFAULT_PROBE_WINDOW, t_window=DEFAULT_T_WINDOW, ell_cap=ELL_CAP):
    """Build a verified :class:`PsiCertificate` for ``pair``.

    ``L`` is the first index from which ``probe_window`` consecutive gammas
    agree. ``psi = m^(t(m,n)+1) / gamma`` is then confirmed directly as
    ``m^t / O_t`` for ``t_window`` consecutive ``t`` starting at ``t(m,n)+L+1``.

    Raises
    ------
    InconclusiveError
        No plateau of length ``probe_window`` within ``ell_cap`` terms.
    InternalConsistencyError
        The plateau value does not give an integer psi, or the direct check
        disagrees with it.
    """
    if probe_window < 3:
        raise PreconditionError("probe_window must be >= 3")
    if t_window < 1:
        raise PreconditionError("t_window must be >= 1")
    t = compute_t(pair)
    m = pair.m
    seq = []
    L = None
    for ell in range(ell_cap + 1):
        seq.append(Fraction(order_mod_power(pair, t + ell + 1), m**ell))
        start = len(seq) - probe_window
        if start >= 0 and len(set(seq[start:])) == 1:
            L = start
            break
    if L is None:
        raise InconclusiveError(f"gamma sequence of {pair} did not stabilize within {ell_cap} terms")
    gamma = seq[L]
    psi = Fraction(m ** (t + 1)) / gamma
    if psi.denominator != 1:
        raise InternalConsistencyError(f"{m}^{t + 1} / gamma = {psi} is not an integer for {pair}")
    cert = PsiCertificate(pair, t, tuple(seq), L, gamma, psi.numerator, 0, -1)
    lo, hi = cert.threshold, cert.threshold + t_window - 1
    failing = first_stability_failure(cert, lo, hi)
    if failing is not None:
        raise InternalConsistencyError(f"{pair}: m^t / O_t != psi at t = {failing}")
    return cert.with_window(lo, hi)


@lru_cache(maxsize=1024)
def psi_certificate(pair):
    """Memoized :func:`compute_psi` with default windows."""
    return compute_psi(pair)


def first_stability_failure(cert, t_lo, t_hi):
    """First t in ``[t_lo, t_hi]`` with ``m^t / O_t != psi``, or None."""
    for t in range(t_lo, t_hi + 1):
        if psi_at(cert.pair, t) != cert.psi:
            return t
    return None


def verify_stability_window(cert, t_lo, t_hi):
    """True iff ``m^t / O_t == psi`` for every t in ``[t_lo, t_hi]``.

    ``t_lo`` must be at least the certificate's threshold. Use
    :func:`first_stability_failure` to learn where a check fails and
    :meth:`PsiCertificate.with_window` to record a passing window.
    """
    if t_lo < cert.threshold:
        raise PreconditionError(f"t_lo = {t_lo} is below the threshold {cert.threshold}")
    return first_stability_failure(cert, t_lo, t_hi) is None


def verify_psi_congruence(cert):
    """``n^phi(m) == 1 (mod psi)``."""
    if cert.psi == 1:
        return True
    return modpow(cert.pair.n, totient(cert.pair.m), cert.psi) == 1
