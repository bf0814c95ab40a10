"""Structural validation of raw rule files, before any parsing."""
from typing import Any, Dict, List

from pydantic import BaseModel
from sympy import isprime

_OPTIONAL_INTS = ("seed", "n_check", "l_max", "n_max_field")
_KNOWN = {"p", "r", "entries", "blocks", *_OPTIONAL_INTS}


class ValidationResult(BaseModel):
    """Validation result."""
    ok: bool
    missing: List[str]
    errors: List[str]


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _check_grid(grid: Any, r: Any, name: str, errors: List[str]) -> None:
    if not isinstance(grid, list) or not all(isinstance(row, list) for row in grid):
        errors.append(f"{name} must be a list of rows")
        return
    if _is_int(r) and (len(grid) != r or any(len(row) != r for row in grid)):
        errors.append(f"{name} must be {r} x {r}, got {[len(row) for row in grid]}")
    for i, row in enumerate(grid):
        for j, cell in enumerate(row):
            if not isinstance(cell, str):
                errors.append(f"{name}[{i}][{j}] must be a string, got {cell!r}")


def validate_rule_spec(raw: Dict[str, Any]) -> ValidationResult:
    """
    Validate a decoded rule file.

    Args:
        raw: Decoded JSON document

    Returns:
        ValidationResult with ok status, missing fields, and errors
    """
    missing: List[str] = []
    errors: List[str] = []

    if not isinstance(raw, dict):
        return ValidationResult(ok=False, missing=[], errors=["rule file must be a JSON object"])

    for key in sorted(set(raw) - _KNOWN):
        errors.append(f"unknown field '{key}'")

    if "p" not in raw:
        missing.append("p")
    elif not _is_int(raw["p"]) or not isprime(raw["p"]):
        errors.append(f"p must be a prime integer, got {raw['p']!r}")

    r = raw.get("r")
    if "r" not in raw:
        missing.append("r")
    elif not _is_int(r) or r < 1:
        errors.append(f"r must be an integer >= 1, got {r!r}")

    has_entries, has_blocks = "entries" in raw, "blocks" in raw
    if not has_entries and not has_blocks:
        missing.append("entries (or blocks)")
    elif has_entries and has_blocks:
        errors.append("give exactly one of 'entries' and 'blocks'")
    elif has_entries:
        _check_grid(raw["entries"], r, "entries", errors)
    else:
        blocks = raw["blocks"]
        if not isinstance(blocks, list) or not blocks:
            errors.append("blocks must be a non-empty list of matrices")
        else:
            for k, grid in enumerate(blocks):
                _check_grid(grid, r, f"blocks[{k}]", errors)

    for key in _OPTIONAL_INTS:
        if key in raw and raw[key] is not None:
            value = raw[key]
            floor = 0 if key == "seed" else 1
            if not _is_int(value) or value < floor:
                errors.append(f"{key} must be an integer >= {floor}, got {value!r}")

    ok = len(missing) == 0 and len(errors) == 0

    return ValidationResult(ok=ok, missing=missing, errors=errors)
