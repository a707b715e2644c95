"""Piecewise-constant weights on [0, 1) and their adic characteristics.

Interval measures and plain averages are exact :class:`~fractions.Fraction`
values. Rational powers and logarithms are attempted exactly first (a power
is exact when the root of a rational is rational) and otherwise evaluated
with :mod:`mpmath` at a configurable number of significant digits.

Suprema are taken over the ``base``-adic intervals of generation
``<= g_max``; a report is therefore a reproducible lower bound for the
supremum over all intervals.
"""

import json
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .errors import PreconditionError, WeightFormatError

DEFAULT_PRECISION = 50

CLASS_TAGS = ("A_r", "RH_r", "A_1", "RH_inf", "BMO")


def _frac(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not accepted; pass a Fraction, int or 'p/q' string")
    return Fraction(x)


def _mp(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


# --- exact roots -----------------------------------------------------------


def iroot(x, k):
    """Floor of the k-th root of a non-negative integer."""
    if x < 0 or k < 1:
        raise ValueError("iroot needs x >= 0 and k >= 1")
    if x < 2 or k == 1:
        return x
    y = 1 << -(-x.bit_length() // k)
    while True:
        z = ((k - 1) * y + x // y ** (k - 1)) // k
        if z >= y:
            return y
        y = z


def exact_root(x, k):
    """Rational k-th root of a non-negative rational, or None if irrational."""
    x = _frac(x)
    if x < 0:
        return None
    p, q = iroot(x.numerator, k), iroot(x.denominator, k)
    if p**k == x.numerator and q**k == x.denominator:
        return Fraction(p, q)
    return None


def exact_power(x, e):
    """``x**e`` for positive rational x and rational e when the result is rational."""
    x, e = _frac(x), _frac(e)
    root = exact_root(x, e.denominator)
    if root is None:
        return None
    return root**e.numerator


def _power(x, e):
    out = exact_power(x, e)
    return out if out is not None else _mp(x) ** _mp(e)


def _num_power(v, e):
    """``v**e`` for a Fraction or an mpf base."""
    if isinstance(v, Fraction):
        return _power(v, e)
    return v ** _mp(e)


def _greater(a, b):
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a > b
    return _mp(a) > _mp(b)


# --- logarithms of rationals ----------------------------------------------


@dataclass(frozen=True)
class LogTerm:
    """The exact real number ``coefficient * log(argument)``.

    Normalized so that ``argument >= 1`` is not a perfect power; equal reals
    then compare equal, e.g. ``LogTerm(Fraction(1, 2), 4) == LogTerm(1, 2)``.
    """

    coefficient: Fraction
    argument: Fraction

    def __post_init__(self):
        c, x = _frac(self.coefficient), _frac(self.argument)
        if x <= 0:
            raise ValueError("log argument must be positive")
        if x < 1:
            c, x = -c, 1 / x
        if x == 1 or c == 0:
            c, x = Fraction(0), Fraction(1)
        else:
            for k in range(max(x.numerator.bit_length(), 1), 1, -1):
                root = exact_root(x, k)
                if root is not None:
                    c, x = c * k, root
                    break
        object.__setattr__(self, "coefficient", c)
        object.__setattr__(self, "argument", x)

    def evaluate(self, precision=DEFAULT_PRECISION):
        with mpmath.workdps(precision):
            return +(_mp(self.coefficient) * mpmath.log(_mp(self.argument)))

    def __str__(self):
        return f"{self.coefficient}*log({self.argument})"


# --- intervals and step functions -----------------------------------------


@dataclass(frozen=True, order=True)
class AdicInterval:
    """``[index / base^generation, (index + 1) / base^generation)``."""

    base: int
    generation: int
    index: int

    def __post_init__(self):
        if self.base < 2 or self.generation < 0:
            raise PreconditionError("need base >= 2 and generation >= 0")
        if not 0 <= self.index < self.base**self.generation:
            raise PreconditionError(f"index {self.index} out of range for generation {self.generation}")

    @property
    def lo(self):
        return Fraction(self.index, self.base**self.generation)

    @property
    def hi(self):
        return Fraction(self.index + 1, self.base**self.generation)

    @property
    def length(self):
        return Fraction(1, self.base**self.generation)

    def bounds(self):
        return self.lo, self.hi

    def to_record(self):
        return {"base": self.base, "generation": self.generation, "index": self.index}


def adic_children(interval):
    """The ``base`` children of ``interval`` in the next generation, left to right."""
    b, g, i = interval.base, interval.generation, interval.index
    return [AdicInterval(b, g + 1, b * i + c) for c in range(b)]


def adic_intervals(base, g_max, root=None):
    """All ``base``-adic intervals inside ``root`` (default [0, 1)) of generation <= g_max.

    Ordered by generation, then index.
    """
    root = root or AdicInterval(base, 0, 0)
    if root.base != base:
        raise PreconditionError("root interval must use the scan base")
    level = [root]
    while level and level[0].generation <= g_max:
        yield from level
        lo = level[0].index * base
        g = level[0].generation + 1
        level = [AdicInterval(base, g, lo + c) for c in range(len(level) * base)]


def _as_bounds(interval):
    if isinstance(interval, AdicInterval):
        return interval.lo, interval.hi
    lo, hi = interval
    return _frac(lo), _frac(hi)


@dataclass(frozen=True)
class StepFunction:
    """Right-open piecewise-constant function on [0, 1) with rational data."""

    breakpoints: tuple
    values: tuple

    def __post_init__(self):
        bps = tuple(_frac(x) for x in self.breakpoints)
        vals = tuple(_frac(v) for v in self.values)
        if len(vals) < 1 or len(bps) != len(vals) + 1:
            raise PreconditionError("need K >= 1 values and K + 1 breakpoints")
        if bps[0] != 0 or bps[-1] != 1:
            raise PreconditionError("breakpoints must start at 0 and end at 1")
        if any(a >= b for a, b in zip(bps, bps[1:])):
            raise PreconditionError("breakpoints must be strictly ascending")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, c):
        return cls((0, 1), (c,))

    def pieces(self, interval):
        """Yield ``(length, value)`` for each piece meeting ``interval``."""
        lo, hi = _as_bounds(interval)
        if not 0 <= lo < hi <= 1:
            raise PreconditionError(f"interval [{lo}, {hi}) is empty or leaves [0, 1]")
        bps = self.breakpoints
        i = bisect_right(bps, lo) - 1
        while i < len(self.values) and bps[i] < hi:
            yield min(hi, bps[i + 1]) - max(lo, bps[i]), self.values[i]
            i += 1

    def map_values(self, fn):
        return type(self)(self.breakpoints, tuple(fn(v) for v in self.values))

    def to_record(self):
        return {
            "breakpoints": [str(x) for x in self.breakpoints],
            "values": [str(v) for v in self.values],
        }


@dataclass(frozen=True)
class StepWeight(StepFunction):
    """Step function with strictly positive values."""

    def __post_init__(self):
        super().__post_init__()
        if any(v <= 0 for v in self.values):
            raise PreconditionError("weight values must be positive")


def _error_position(text, token):
    pos = text.find(json.dumps(token)) if token is not None else -1
    if pos < 0:
        return 1, 1
    line = text.count("\n", 0, pos) + 1
    return line, pos - (text.rfind("\n", 0, pos) + 1) + 1


def load_weight(text, cls=StepWeight):
    """Parse ``{"breakpoints": ["0", "1/2", "1"], "values": ["4", "1"]}``."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise WeightFormatError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(data, dict) or "breakpoints" not in data or "values" not in data:
        raise WeightFormatError("expected an object with 'breakpoints' and 'values'")
    parsed = {}
    for key in ("breakpoints", "values"):
        items = data[key]
        if not isinstance(items, list):
            raise WeightFormatError(f"'{key}' must be a list", *_error_position(text, key))
        out = []
        for item in items:
            if isinstance(item, float) or not isinstance(item, (str, int)):
                raise WeightFormatError(
                    f"{key} entry {item!r} is not a rational string", *_error_position(text, item)
                )
            try:
                out.append(Fraction(item))
            except (ValueError, ZeroDivisionError):
                raise WeightFormatError(
                    f"{key} entry {item!r} is not a rational", *_error_position(text, item)
                ) from None
        parsed[key] = out
    try:
        return cls(tuple(parsed["breakpoints"]), tuple(parsed["values"]))
    except PreconditionError as exc:
        raise WeightFormatError(str(exc)) from None


# --- averages ---------------------------------------------------------------


def measure(w, interval):
    """``integral of w over interval``, exact."""
    return sum((length * v for length, v in w.pieces(interval)), Fraction(0))


def average(w, interval):
    """Exact mean of ``w`` over ``interval``."""
    lo, hi = _as_bounds(interval)
    if hi <= lo:
        raise PreconditionError("zero-length interval")
    return measure(w, (lo, hi)) / (hi - lo)


def _power_mean(w, interval, r):
    lo, hi = _as_bounds(interval)
    values = {v for _, v in w.pieces((lo, hi))}
    if len(values) == 1:
        return values.pop()
    terms = [(length, _power(v, r)) for length, v in w.pieces((lo, hi))]
    if all(isinstance(t, Fraction) for _, t in terms):
        s = sum((length * t for length, t in terms), Fraction(0)) / (hi - lo)
    else:
        s = mpmath.fsum(_mp(length) * _mp(t) for length, t in terms) / _mp(hi - lo)
    return _num_power(s, 1 / r)


def power_average(w, interval, r, precision=DEFAULT_PRECISION):
    """``(mean of w^r over interval)^(1/r)``.

    Returns a Fraction when the value is rational and computable exactly,
    otherwise an mpf carrying ``precision`` significant digits.
    """
    r = _frac(r)
    if r == 0:
        raise PreconditionError("r must be nonzero")
    lo, hi = _as_bounds(interval)
    if hi <= lo:
        raise PreconditionError("zero-length interval")
    with mpmath.workdps(precision):
        return _power_mean(w, (lo, hi), r)


# --- characteristics ---------------------------------------------------------


@dataclass(frozen=True)
class CharacteristicReport:
    class_tag: str
    r: object
    base: int
    max_generation: int
    value: object
    witness: AdicInterval
    precision: int = DEFAULT_PRECISION

    @property
    def exact(self):
        return isinstance(self.value, Fraction)

    def to_record(self):
        with mpmath.workdps(self.precision):
            decimal = mpmath.nstr(_mp(self.value), self.precision)
        return {
            "class_tag": self.class_tag,
            "r": None if self.r is None else str(self.r),
            "base": self.base,
            "g_max": self.max_generation,
            "value": decimal,
            "exact_value": str(self.value) if self.exact else None,
            "precision": self.precision,
            "witness": self.witness.to_record(),
        }

    def to_json(self):
        return json.dumps(self.to_record(), sort_keys=True)


def _scan(base, g_max, per_interval, root=None):
    if g_max < 0:
        raise PreconditionError("g_max must be >= 0")
    best, witness = None, None
    for interval in adic_intervals(base, g_max, root):
        v = per_interval(interval)
        # strict > keeps the lowest (generation, index) on ties
        if best is None or _greater(v, best):
            best, witness = v, interval
    return best, witness


def _normalized(w):
    # characteristics are scale invariant; dividing by the first value makes
    # w and c*w produce bit-identical arithmetic
    c = w.values[0]
    return w if c == 1 else w.map_values(lambda v: v / c)


def _ar_value(w, interval, r):
    mean = average(w, interval)
    inner = _power_mean(w, interval, -1 / (r - 1))
    if isinstance(inner, Fraction):
        return mean / inner
    return _mp(mean) / inner


def characteristic_Ar(w, base, g_max, r, precision=DEFAULT_PRECISION, root=None):
    """``sup (mean w) * (mean w^(-1/(r-1)))^(r-1)`` over ``base``-adic intervals."""
    r = _frac(r)
    if r <= 1:
        raise PreconditionError("A_r needs r > 1")
    wn = _normalized(w)
    with mpmath.workdps(precision):
        # (mean w^s)^(r-1) with s = -1/(r-1) equals 1 / power-mean of order s
        value, witness = _scan(base, g_max, lambda I: _ar_value(wn, I, r), root)
    return CharacteristicReport("A_r", r, base, g_max, value, witness, precision)


def _rh_value(w, interval, r):
    top = _power_mean(w, interval, r)
    mean = average(w, interval)
    if isinstance(top, Fraction):
        return top / mean
    return top / _mp(mean)


def characteristic_RHr(w, base, g_max, r, precision=DEFAULT_PRECISION, root=None):
    """``sup (mean w^r)^(1/r) / (mean w)`` over ``base``-adic intervals."""
    r = _frac(r)
    if r <= 1:
        raise PreconditionError("RH_r needs r > 1")
    wn = _normalized(w)
    with mpmath.workdps(precision):
        value, witness = _scan(base, g_max, lambda I: _rh_value(wn, I, r), root)
    return CharacteristicReport("RH_r", r, base, g_max, value, witness, precision)


def characteristic_extremal(w, base, g_max, which, precision=DEFAULT_PRECISION, root=None):
    """A_1 (``mean / min``) or RH_inf (``max / mean``) characteristic, exact."""
    wn = _normalized(w)
    if which in ("A1", "A_1", "a1"):
        tag = "A_1"

        def per(interval):
            return average(wn, interval) / min(v for _, v in wn.pieces(interval))

    elif which in ("RHinf", "RH_inf", "rhinf"):
        tag = "RH_inf"

        def per(interval):
            return max(v for _, v in wn.pieces(interval)) / average(wn, interval)

    else:
        raise PreconditionError(f"unknown extremal class {which!r}")
    value, witness = _scan(base, g_max, per, root)
    return CharacteristicReport(tag, None, base, g_max, value, witness, precision)


def mean_oscillation(f, interval, log_domain=False, precision=DEFAULT_PRECISION):
    """Mean of ``|f - mean f|`` over ``interval``; ``f = log w`` when ``log_domain``."""
    lo, hi = _as_bounds(interval)
    pieces = list(f.pieces((lo, hi)))
    if len({v for _, v in pieces}) == 1:
        return Fraction(0)
    if not log_domain:
        length = hi - lo
        mean = sum((ell * v for ell, v in pieces), Fraction(0)) / length
        return sum((ell * abs(v - mean) for ell, v in pieces), Fraction(0)) / length
    with mpmath.workdps(precision):
        length = _mp(hi - lo)
        logs = [(_mp(ell), mpmath.log(_mp(v))) for ell, v in pieces]
        mean = mpmath.fsum(ell * g for ell, g in logs) / length
        return mpmath.fsum(ell * abs(g - mean) for ell, g in logs) / length


def log_average(w, interval, precision=DEFAULT_PRECISION):
    """Mean of ``log w`` over ``interval``."""
    lo, hi = _as_bounds(interval)
    with mpmath.workdps(precision):
        total = mpmath.fsum(_mp(ell) * mpmath.log(_mp(v)) for ell, v in w.pieces((lo, hi)))
        return total / _mp(hi - lo)


def bmo_norm_adic(f_source, base, g_max, log_domain=False, precision=DEFAULT_PRECISION, root=None):
    """``sup mean |f - mean f|`` over ``base``-adic intervals of generation <= g_max.

    With ``log_domain`` the function is ``log`` of the step weight's values.
    Pass ``root`` to restrict the scan to the adic subtree under it.
    """
    if log_domain:
        c = f_source.values[0]
        fn = f_source if c == 1 else f_source.map_values(lambda v: v / c)
    else:
        c = f_source.values[0]
        fn = StepFunction(f_source.breakpoints, tuple(v - c for v in f_source.values))
    with mpmath.workdps(precision):
        value, witness = _scan(
            base, g_max, lambda I: mean_oscillation(fn, I, log_domain, precision), root
        )
    return CharacteristicReport("BMO", None, base, g_max, value, witness, precision)


def doubling_ratio_scan(w, g_max, grid_base):
    """Largest ``max(mu(I)/mu(I'), mu(I')/mu(I))`` over adjacent equal-length grid cells.

    Cells are ``[i/B, (i+1)/B)`` with ``B = grid_base^g`` for ``g <= g_max``;
    every adjacent pair is used, not only those sharing an adic parent.
    Returns 1 when no pair exists.
    """
    if g_max < 0:
        raise PreconditionError("g_max must be >= 0")
    best = Fraction(1)
    for g in range(g_max + 1):
        B = grid_base**g
        masses = [measure(w, (Fraction(i, B), Fraction(i + 1, B))) for i in range(B)]
        for left, right in zip(masses, masses[1:]):
            ratio = max(left / right, right / left)
            if ratio > best:
                best = ratio
    return best


# --- H/G module family --------------------------------------------------------


@dataclass(frozen=True)
class ModuleFamilyParams:
    """Two-value module: ``(a/q)^alpha`` on the left half H of ``host``,
    ``(b/q)^alpha`` on the right half G, and 1 elsewhere."""

    a: Fraction
    b: Fraction
    q: int
    alpha: int
    host: AdicInterval = field(default=None)

    def __post_init__(self):
        a, b = _frac(self.a), _frac(self.b)
        if not 0 < a < 1 < b:
            raise PreconditionError(f"need 0 < a < 1 < b, got a={a}, b={b}")
        if self.q < 2:
            raise PreconditionError("q must be >= 2")
        if self.alpha < 1:
            raise PreconditionError("alpha must be >= 1")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if self.host is None:
            object.__setattr__(self, "host", AdicInterval(self.q, 0, 0))


def module_pair_weight(p):
    lo, hi = p.host.lo, p.host.hi
    mid = (lo + hi) / 2
    h_val = (p.a / p.q) ** p.alpha
    g_val = (p.b / p.q) ** p.alpha
    bps, vals = [Fraction(0)], []
    if lo > 0:
        bps.append(lo)
        vals.append(Fraction(1))
    bps += [mid, hi]
    vals += [h_val, g_val]
    if hi < 1:
        bps.append(Fraction(1))
        vals.append(Fraction(1))
    return StepWeight(tuple(bps), tuple(vals))


@dataclass(frozen=True)
class ModuleClosedForms:
    avg_f: LogTerm
    osc_lower: LogTerm
    osc_full: LogTerm

    def to_record(self, precision=DEFAULT_PRECISION):
        out = {}
        for name in ("avg_f", "osc_lower", "osc_full"):
            term = getattr(self, name)
            with mpmath.workdps(precision):
                out[name] = {"exact": str(term), "value": mpmath.nstr(term.evaluate(precision), precision)}
        return out


def module_closed_forms(p):
    """Mean of ``f = log w`` on the host and the two oscillation values.

    ``avg_f = (alpha/2) log(ab/q^2)``; ``osc_full = (alpha/2) log(b/a)`` is the
    mean oscillation over the host; ``osc_lower = (alpha/4) log(b/a)`` is the
    part contributed by G alone.
    """
    half = Fraction(p.alpha, 2)
    return ModuleClosedForms(
        avg_f=LogTerm(half, p.a * p.b / p.q**2),
        osc_lower=LogTerm(half / 2, p.b / p.a),
        osc_full=LogTerm(half, p.b / p.a),
    )
