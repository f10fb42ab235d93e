"""Utility functions for mukai-fixed."""

import json
import re
from collections.abc import Mapping, Sequence
from fractions import Fraction
from typing import Any

from mukai_fixed.config import EXACT_INT_LIMIT
from mukai_fixed.exceptions import ValidationError
from mukai_fixed.lattice import Lattice, Vector

_TERM = re.compile(r"([+-]?)(\d+(?:/\d+)?)?\*?([A-Za-z][\w']*)?")


def parse_rational(value: Any) -> Fraction:
    """Read a rational from an int, a "p/q" string or a [p, q] pair.

    Args:
        value: The value to convert.

    Returns:
        The exact rational.

    Raises:
        ValidationError: If the value is not a rational.
    """
    try:
        if isinstance(value, bool):
            raise TypeError("booleans are not rationals")
        if isinstance(value, (list, tuple)):
            num, den = value
            return Fraction(int(num), int(den))
        if isinstance(value, (int, str)):
            return Fraction(str(value).strip())
        if isinstance(value, Fraction):
            return value
    except (TypeError, ValueError, ZeroDivisionError) as e:
        raise ValidationError(f"Cannot read a rational from {value!r}: {e}") from e
    raise ValidationError(f"Cannot read a rational from {value!r}")


def parse_combination(expr: str, lattice: Lattice) -> tuple[Fraction, ...]:
    """Evaluate a signed sum of named vectors such as "2H", "C1'+E1" or "1/2*H - a1".

    A bracketed list "[1, 0, -2]" is read as raw coordinates, and "0" is the
    zero vector.

    Raises:
        ValidationError: If a name is unknown or a term cannot be read.
    """
    text = expr.replace(" ", "")
    n = lattice.rank
    if text.startswith("["):
        try:
            coords = json.loads(text)
        except json.JSONDecodeError as e:
            raise ValidationError(f"Cannot read coordinates {expr!r}: {e}") from e
        if len(coords) != n:
            raise ValidationError(f"{expr!r} needs {n} coordinates")
        return tuple(parse_rational(c) for c in coords)
    if text in ("", "0"):
        return (Fraction(0),) * n
    named = lattice.named()
    total = [Fraction(0)] * n
    for term in re.findall(r"[+-]?[^+-]+", text):
        match = _TERM.fullmatch(term)
        if match is None or not (match.group(2) or match.group(3)):
            raise ValidationError(f"Cannot read term {term!r} in {expr!r}")
        sign, coef, name = match.groups()
        value = Fraction(coef) if coef else Fraction(1)
        if sign == "-":
            value = -value
        if name is None:
            if value != 0:
                raise ValidationError(f"Constant term {term!r} in {expr!r} has no class")
            continue
        if name not in named:
            known = ", ".join(sorted(named)) or "none"
            raise ValidationError(f"Unknown class {name!r} in {expr!r} (known: {known})")
        for i, x in enumerate(named[name]):
            total[i] += value * x
    return tuple(total)


def _split_top_level(text: str) -> list[str]:
    parts, depth, current = [], 0, []
    for ch in text:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
    parts.append("".join(current))
    return parts


def _integral(coords: Sequence[Fraction], expr: str) -> Vector:
    if any(c.denominator != 1 for c in coords):
        raise ValidationError(f"{expr!r} is not an integral vector")
    return tuple(int(c) for c in coords)


def parse_vector(expr: str | Sequence[int], lattice: Lattice) -> Vector:
    """Parse a lattice vector.

    On a Mukai lattice the form "(r, D, s)" is accepted, where D is a
    combination of named classes of the middle lattice. Every lattice also
    accepts raw coordinates, as a list or as "[...]" text, and combinations
    of its own named vectors.

    Args:
        expr: The expression, or a list of coordinates.
        lattice: The lattice the vector lives in.

    Returns:
        Integer coordinates.

    Raises:
        ValidationError: If the expression cannot be read or is not integral.
    """
    if not isinstance(expr, str):
        coords = tuple(int(x) for x in expr)
        if len(coords) != lattice.rank:
            raise ValidationError(f"Vector {coords} needs {lattice.rank} coordinates")
        return coords
    text = expr.strip()
    if text.startswith("(") and text.endswith(")"):
        if lattice.ns is None:
            raise ValidationError(f"{expr!r} uses (r, D, s) form on a non-Mukai lattice")
        pieces = _split_top_level(text[1:-1])
        if len(pieces) != 3:
            raise ValidationError(f"{expr!r} must have the form (r, D, s)")
        r = parse_rational(pieces[0])
        s = parse_rational(pieces[2])
        middle = parse_combination(pieces[1], lattice.ns)
        return _integral((r, *middle, s), expr)
    return _integral(parse_combination(text, lattice), expr)


def format_vector(v: Sequence[int], lattice: Lattice | None = None) -> str:
    """Compact display form; Mukai vectors are shown as (r, [D], s)."""
    if lattice is not None and lattice.ns is not None and len(v) >= 2:
        middle = " ".join(str(x) for x in v[1:-1])
        return f"({v[0]}, [{middle}], {v[-1]})"
    return "[" + " ".join(str(x) for x in v) + "]"


def format_signature(squares: Sequence[int]) -> str:
    """Census signature such as "(-2,-2)"."""
    return "(" + ",".join(str(s) for s in squares) + ")"


def to_jsonable(obj: Any) -> Any:
    """Convert to plain JSON types: rationals become [p, q], big integers strings."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return str(obj) if abs(obj) >= EXACT_INT_LIMIT else obj
    if isinstance(obj, Fraction):
        return [to_jsonable(obj.numerator), to_jsonable(obj.denominator)]
    if isinstance(obj, Mapping):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    raise ValidationError(f"Cannot serialize {type(obj).__name__}")


def canonical_json(obj: Any) -> str:
    """Byte-stable JSON: sorted keys, fixed indentation, ASCII only."""
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def format_elapsed(seconds: float) -> str:
    """Format a duration for tables (e.g. "0.42s" or "1:05")."""
    if seconds < 60:
        return f"{seconds:.2f}s"
    minutes, secs = divmod(int(seconds), 60)
    return f"{minutes}:{secs:02d}"
