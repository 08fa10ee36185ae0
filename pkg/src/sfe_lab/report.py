"""JSON serialization with exact rationals written as "num/den"."""

from __future__ import annotations

import dataclasses
import json
from fractions import Fraction


def rat(v: Fraction | int | None) -> str | None:
    if v is None:
        return None
    v = Fraction(v)
    return f"{v.numerator}/{v.denominator}"


def parse_rat(s: str) -> Fraction:
    num, _, den = s.partition("/")
    return Fraction(int(num), int(den or 1))


def jsonable(obj):
    if isinstance(obj, Fraction):
        return rat(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return obj
    if isinstance(obj, dict):
        return {str(k) if not isinstance(k, tuple) else ",".join(map(str, k)): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        seq = sorted(obj, key=repr) if isinstance(obj, (set, frozenset)) else obj
        return [jsonable(v) for v in seq]
    if hasattr(obj, "to_json"):
        return jsonable(obj.to_json())
    if dataclasses.is_dataclass(obj):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    return str(obj)


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=False, ensure_ascii=False) + "\n"
