"""Truncated q-series and eta products attached to frameshapes.

A series is stored as an offset exponent (a rational with denominator
dividing 24) plus the integer coefficients of q^(offset + k) for
k = 0 .. truncation - 1. Coefficients past the truncation are unknown, and
every operation keeps track of how far its result is known.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction

from mukai_fixed.config import DEFAULT_TRUNCATION
from mukai_fixed.exceptions import SeriesError, ValidationError
from mukai_fixed.group_action import Frameshape

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QSeries:
    """q^offset * (c_0 + c_1 q + c_2 q^2 + ...) known up to truncation terms.

    Leading zero coefficients are absorbed into the offset, so c_0 != 0
    unless the series is zero to the known precision.
    """

    offset: Fraction
    coeffs: tuple[int, ...]

    def __post_init__(self) -> None:
        offset = Fraction(self.offset)
        if (offset * 24).denominator != 1:
            raise SeriesError(f"Offset {offset} does not have denominator dividing 24")
        coeffs = tuple(int(c) for c in self.coeffs)
        lead = next((i for i, c in enumerate(coeffs) if c), None)
        if lead is not None and lead > 0:
            coeffs = coeffs[lead:]
            offset += lead
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def truncation(self) -> int:
        return len(self.coeffs)

    @property
    def known_until(self) -> Fraction:
        """First exponent whose coefficient is unknown."""
        return self.offset + self.truncation

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def coefficient(self, exponent: Fraction | int) -> int:
        """Coefficient of q^exponent.

        Raises:
            SeriesError: If the exponent lies past the truncation.
        """
        k = Fraction(exponent) - self.offset
        if k.denominator != 1:
            return 0
        if k < 0:
            return 0
        if k >= self.truncation:
            raise SeriesError(
                f"Coefficient of q^{exponent} requested but the series is only known "
                f"below q^{self.known_until}"
            )
        return self.coeffs[int(k)]

    def truncate(self, n: int) -> "QSeries":
        return QSeries(self.offset, self.coeffs[:n])

    def shift(self, k: Fraction | int) -> "QSeries":
        """Multiply by q^k."""
        return QSeries(self.offset + k, self.coeffs)

    def scale(self, c: int) -> "QSeries":
        return QSeries(self.offset, tuple(c * x for x in self.coeffs))

    def __neg__(self) -> "QSeries":
        return self.scale(-1)

    def __add__(self, other: "QSeries") -> "QSeries":
        diff = other.offset - self.offset
        if diff.denominator != 1:
            raise SeriesError("Cannot add series whose offsets differ by a non-integer")
        start = min(self.offset, other.offset)
        stop = min(self.known_until, other.known_until)
        length = max(int(stop - start), 0)
        out = [0] * length
        for s in (self, other):
            shift = int(s.offset - start)
            for i, c in enumerate(s.coeffs):
                if shift + i < length:
                    out[shift + i] += c
        return QSeries(start, tuple(out))

    def __sub__(self, other: "QSeries") -> "QSeries":
        return self + (-other)

    def __mul__(self, other: "QSeries") -> "QSeries":
        n = min(self.truncation, other.truncation)
        out = [0] * n
        for i, a in enumerate(self.coeffs[:n]):
            if a:
                for j, b in enumerate(other.coeffs[: n - i]):
                    out[i + j] += a * b
        return QSeries(self.offset + other.offset, tuple(out))

    def __pow__(self, k: int) -> "QSeries":
        if k < 0:
            return series_invert(self) ** (-k)
        result = QSeries(Fraction(0), (1,) + (0,) * (self.truncation - 1))
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def render(self, terms: int | None = None) -> str:
        """Text such as '1/q + 2 + 5q + 10q^2 + O(q^4)'."""
        return render_series(self, terms)


def _power(exponent: Fraction) -> str:
    if exponent == 1:
        return "q"
    if exponent.denominator != 1:
        return f"q^({exponent})"
    return f"q^{exponent}"


def _term(c: int, exponent: Fraction) -> str:
    magnitude = abs(c)
    if exponent == 0:
        return str(magnitude)
    if exponent < 0 and exponent.denominator == 1:
        return f"{magnitude}/{_power(-exponent)}"
    return _power(exponent) if magnitude == 1 else f"{magnitude}{_power(exponent)}"


def render_series(series: QSeries, terms: int | None = None) -> str:
    """Render the first `terms` coefficients followed by the error term."""
    n = series.truncation if terms is None else min(terms, series.truncation)
    pieces: list[str] = []
    for k, c in enumerate(series.coeffs[:n]):
        if c == 0:
            continue
        body = _term(c, series.offset + k)
        if not pieces:
            pieces.append(f"-{body}" if c < 0 else body)
        else:
            pieces.append(f"{'-' if c < 0 else '+'} {body}")
    error = series.offset + n
    tail = "O(1)" if error == 0 else f"O({_power(error)})"
    pieces.append(f"+ {tail}" if pieces else tail)
    return " ".join(pieces)


def series_invert(series: QSeries) -> QSeries:
    """1 / series, to the same truncation.

    Raises:
        SeriesError: If the leading coefficient is not a unit.
    """
    if series.is_zero():
        raise SeriesError("Cannot invert a series that is zero to known precision")
    lead = series.coeffs[0]
    if lead not in (1, -1):
        raise SeriesError(f"Leading coefficient {lead} is not invertible over the integers")
    n = series.truncation
    a = series.coeffs
    b = [0] * n
    b[0] = lead
    for k in range(1, n):
        b[k] = -lead * sum(a[i] * b[k - i] for i in range(1, k + 1))
    return QSeries(-series.offset, tuple(b))


def _euler_function(n: int) -> list[int]:
    """Coefficients of prod_{m >= 1} (1 - q^m) below q^n, by the pentagonal number theorem."""
    coeffs = [0] * n
    k = 0
    while True:
        sign = -1 if k % 2 else 1
        first = k * (3 * k - 1) // 2
        second = k * (3 * k + 1) // 2
        if first >= n:
            break
        coeffs[first] += sign
        if k and second < n:
            coeffs[second] += sign
        k += 1
    return coeffs


def eta_series(truncation: int = DEFAULT_TRUNCATION, a: int = 1) -> QSeries:
    """eta(q^a) = q^(a/24) prod_{m >= 1} (1 - q^(a m)), with `truncation` coefficients."""
    if a < 1:
        raise ValidationError(f"eta(q^a) needs a >= 1, got {a}")
    base = _euler_function((truncation + a - 1) // a)
    coeffs = [0] * truncation
    for i, c in enumerate(base):
        if a * i < truncation:
            coeffs[a * i] = c
    return QSeries(Fraction(a, 24), tuple(coeffs))


def frameshape_eta_product(fs: Frameshape, truncation: int = DEFAULT_TRUNCATION) -> QSeries:
    """eta_g(q) = prod_a eta(q^a)^m(a)."""
    if fs.weight != 24:
        logger.warning("Frameshape %s has weight %d, not 24", fs, fs.weight)
    result = QSeries(Fraction(0), (1,) + (0,) * (truncation - 1))
    denominator = QSeries(Fraction(0), (1,) + (0,) * (truncation - 1))
    for a, m in fs.parts:
        factor = eta_series(truncation, a)
        if m > 0:
            result = result * factor**m
        else:
            denominator = denominator * factor ** (-m)
    # one inversion at the end keeps every leading coefficient equal to 1
    return result * series_invert(denominator)


def eigenvalue_product_series(fs: Frameshape, truncation: int = DEFAULT_TRUNCATION) -> QSeries:
    """prod_{n >= 1} prod_a (1 - q^(a n))^(-m(a)).

    This is the Euler characteristic generating function of the fixed loci
    built from the eigenvalues of g on the lattice, and equals q / eta_g(q)
    when the frameshape has weight 24.
    """
    result = QSeries(Fraction(0), (1,) + (0,) * (truncation - 1))
    for a, m in fs.parts:
        factor = eta_series(truncation, a).shift(Fraction(-a, 24))
        result = result * factor ** (-m)
    return result


def euler_char_fixed(
    fs: Frameshape, v_square: int, truncation: int = DEFAULT_TRUNCATION
) -> int:
    """Euler characteristic of the fixed locus M_sigma(v)^G for <v, v> = v_square.

    It is the coefficient of q^(v_square / 2) in 1 / eta_g(q). The truncation
    grows automatically when the requested exponent lies past it.

    Raises:
        ValidationError: If v_square is odd.
        SeriesError: If the exponent is not in the support of 1 / eta_g.
    """
    if v_square % 2:
        raise ValidationError(f"Mukai vectors have even square, got {v_square}")
    exponent = Fraction(v_square, 2)
    start = -Fraction(fs.weight, 24)
    index = exponent - start
    if index.denominator != 1:
        raise SeriesError(
            f"1/eta_g for {fs} has exponents in {start} + Z, so q^{exponent} never occurs"
        )
    if index < 0:
        return 0
    needed = int(index) + 1
    if needed > truncation:
        logger.debug("Extending truncation from %d to %d", truncation, needed)
        truncation = needed
    inverse = series_invert(frameshape_eta_product(fs, truncation))
    return inverse.coefficient(exponent)


def hilbert_euler_characteristics(n_max: int, weight: int = 24) -> list[int]:
    """Euler characteristics of Hilb^n for n = 0 .. n_max.

    These are the coefficients of prod (1 - q^m)^(-weight); for weight 24
    this is the generating function of Hilbert schemes of points on a K3
    surface, and it equals the trivial-group case of euler_char_fixed.
    """
    base = QSeries(Fraction(0), tuple(_euler_function(n_max + 1)))
    return list((base ** (-weight)).coeffs)
