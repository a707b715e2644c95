"""Fixed-width hot loops with a numba path and a pure-numpy fallback.

Set ``ADIC_NUMBA=0`` to force the numpy path. Every kernel here works on
int64 residues whose products stay below 2**62 (moduli <= 2**31), so the
fixed-width arithmetic is exact. Arbitrary-precision work lives in
:mod:`coprime_adic.modarith` and never goes through these kernels.
"""

import os

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is optional at runtime
    njit = None

MAX_KERNEL_MODULUS = 2**31

USE_NUMBA = njit is not None and os.environ.get("ADIC_NUMBA", "1") != "0"


def _order_batch_loop(xs, moduli, cap, out):
    for i in range(xs.shape[0]):
        m = moduli[i]
        x = xs[i] % m
        if m == 1:
            out[i] = 1
            continue
        acc = x
        e = 1
        while acc != 1 and e <= cap:
            acc = (acc * x) % m
            e += 1
        out[i] = e if e <= cap else -1
    return out


def _cyclic_powers_loop(g, modulus, cap, out):
    acc = g % modulus
    k = 0
    while k < cap:
        out[k] = acc
        k += 1
        if acc == 1:
            return k
        acc = (acc * g) % modulus
    return -1


if njit is not None:
    _order_batch_numba = njit(cache=True, nogil=True)(_order_batch_loop)
    _cyclic_powers_numba = njit(cache=True, nogil=True)(_cyclic_powers_loop)
else:  # pragma: no cover
    _order_batch_numba = None
    _cyclic_powers_numba = None


def order_batch_numpy(xs, moduli, cap):
    """Vectorized successive multiplication; lanes retire as they hit 1."""
    xs = np.asarray(xs, dtype=np.int64)
    moduli = np.asarray(moduli, dtype=np.int64)
    x = xs % moduli
    out = np.full(xs.shape, -1, dtype=np.int64)
    done = (x == 1) | (moduli == 1)
    out[done] = 1
    idx = np.flatnonzero(~done)
    acc = x[idx]
    base = x[idx]
    mod = moduli[idx]
    e = 1
    while idx.size and e < cap:
        acc = (acc * base) % mod
        e += 1
        hit = acc == 1
        if hit.any():
            out[idx[hit]] = e
            keep = ~hit
            idx, acc, base, mod = idx[keep], acc[keep], base[keep], mod[keep]
    return out


def cyclic_powers_numpy(g, modulus, cap):
    """Blocked power table: one short scalar run, then whole blocks at once.

    With ``block = [g, ..., g^B]`` every later block is ``block * g^(kB)``.
    """
    g %= modulus
    B = max(16, int(np.sqrt(min(cap, modulus))))
    block = np.empty(B, dtype=np.int64)
    acc = g
    for i in range(B):
        block[i] = acc
        if acc == 1:
            return block[: i + 1].copy() if i + 1 <= cap else None
        acc = acc * g % modulus
    step = int(block[-1])
    chunks = [block]
    shift = step
    total = B
    while total < cap:
        nxt = block * shift % modulus
        ones = np.flatnonzero(nxt == 1)
        if ones.size:
            end = int(ones[0]) + 1
            if total + end > cap:
                return None
            chunks.append(nxt[:end])
            return np.concatenate(chunks)
        chunks.append(nxt)
        total += B
        shift = shift * step % modulus
    return None


def order_batch(xs, moduli, cap=10**6, use_numba=None):
    """Multiplicative orders of ``xs[i]`` modulo ``moduli[i]``; -1 where the cap is hit.

    Callers guarantee ``gcd(xs[i], moduli[i]) == 1``; a non-unit simply never
    reaches 1 and reports -1.
    """
    xs = np.ascontiguousarray(xs, dtype=np.int64)
    moduli = np.ascontiguousarray(moduli, dtype=np.int64)
    if xs.shape != moduli.shape:
        raise ValueError("xs and moduli must have the same shape")
    if moduli.size and (moduli.min() < 1 or moduli.max() > MAX_KERNEL_MODULUS):
        raise ValueError(f"kernel moduli must lie in [1, {MAX_KERNEL_MODULUS}]")
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba:
        out = np.empty(xs.shape, dtype=np.int64)
        return _order_batch_numba(xs, moduli, np.int64(cap), out)
    return order_batch_numpy(xs, moduli, cap)


def cyclic_powers(g, modulus, cap=10**6, use_numba=None):
    """Array ``[g, g^2, ..., 1]`` of successive powers modulo ``modulus``.

    Returns None if 1 does not recur within ``cap`` terms.
    """
    if not 2 <= modulus <= MAX_KERNEL_MODULUS:
        raise ValueError(f"kernel modulus must lie in [2, {MAX_KERNEL_MODULUS}]")
    if use_numba is None:
        use_numba = USE_NUMBA
    if not use_numba:
        return cyclic_powers_numpy(int(g), int(modulus), cap)
    out = np.empty(min(cap, modulus), dtype=np.int64)
    k = _cyclic_powers_numba(np.int64(g), np.int64(modulus), np.int64(out.size), out)
    if k < 0:
        return None
    return out[:k]
