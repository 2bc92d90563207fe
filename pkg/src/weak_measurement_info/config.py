"""Plain key=value run configuration with typed accessors."""

import logging
import math
from collections.abc import Iterable, Mapping
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .errors import ValidationError

logger = logging.getLogger(__name__)

# Keys that do not affect results and are left out of CSV headers.
UNRECORDED_KEYS = frozenset({"output", "workers"})


class ProgramSpec(BaseModel):
    """Accepted keys of a program; a ``None`` default marks a required key."""

    model_config = ConfigDict(frozen=True)

    name: str
    summary: str
    columns: tuple[str, ...]
    defaults: dict[str, str | None] = Field(default_factory=dict)


def parse_key_values(items: Iterable[str]) -> dict[str, str]:
    """
    Parse ``key=value`` tokens.

    Raises:
        ValidationError: If a token has no ``=`` or an empty key.

    Examples:
        >>> parse_key_values(["model=II", "x=0.1,0.2"])
        {'model': 'II', 'x': '0.1,0.2'}
    """
    values: dict[str, str] = {}
    for item in items:
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ValidationError(f"expected key=value, got {item!r}")
        values[key] = value.strip()
    return values


def read_config_file(path: Path) -> dict[str, str]:
    """Read ``key=value`` lines, ignoring blank lines and ``#`` comments."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ValidationError(f"cannot read config file {path}: {e}") from e
    lines = [line.strip() for line in text.splitlines()]
    return parse_key_values(line for line in lines if line and not line.startswith("#"))


def _parse_float(key: str, text: str) -> float:
    try:
        value = float(text)
    except ValueError as e:
        raise ValidationError(f"{key}: {text!r} is not a number") from e
    if math.isnan(value):
        raise ValidationError(f"{key}: NaN is not a valid parameter")
    return value


def _parse_int(key: str, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        value = _parse_float(key, text)
        if not value.is_integer():
            raise ValidationError(f"{key}: {text!r} is not an integer") from None
        return int(value)


class RunConfig(BaseModel):
    """A program name and its resolved raw values."""

    model_config = ConfigDict(frozen=True)

    program: str
    values: dict[str, str] = Field(default_factory=dict)

    @classmethod
    def resolve(
        cls,
        spec: ProgramSpec,
        *sources: Mapping[str, str],
    ) -> "RunConfig":
        """
        Merge program defaults with ``sources`` (later sources win).

        Raises:
            ValidationError: On unknown keys or missing required keys.
        """
        values: dict[str, str] = {k: v for k, v in spec.defaults.items() if v is not None}
        for source in sources:
            unknown = sorted(set(source) - set(spec.defaults))
            if unknown:
                raise ValidationError(
                    f"{spec.name}: unknown key(s) {', '.join(unknown)}; "
                    f"accepted: {', '.join(sorted(spec.defaults))}"
                )
            values.update(source)
        missing = sorted(k for k in spec.defaults if k not in values)
        if missing:
            raise ValidationError(f"{spec.name}: missing required key(s) {', '.join(missing)}")
        logger.debug("Resolved %s config: %s", spec.name, values)
        return cls(program=spec.name, values=values)

    def has(self, key: str) -> bool:
        """True when ``key`` has a nonempty value."""
        return self.values.get(key, "") != ""

    def get_str(self, key: str) -> str:
        """Raw value of ``key``."""
        if key not in self.values:
            raise ValidationError(f"{self.program}: missing key {key}")
        return self.values[key]

    def get_float(self, key: str) -> float:
        """Value of ``key`` as a float (``inf`` accepted)."""
        return _parse_float(key, self.get_str(key))

    def get_int(self, key: str) -> int:
        """Value of ``key`` as an integer."""
        return _parse_int(key, self.get_str(key))

    def get_float_list(self, key: str) -> list[float]:
        """
        Comma-separated floats, or ``start:stop:count`` for an inclusive linear grid.

        Examples:
            >>> RunConfig(program="p", values={"x": "0:1:3"}).get_float_list("x")
            [0.0, 0.5, 1.0]
        """
        text = self.get_str(key)
        if not text:
            return []
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValidationError(f"{key}: range must be start:stop:count, got {text!r}")
            start, stop = _parse_float(key, parts[0]), _parse_float(key, parts[1])
            count = _parse_int(key, parts[2])
            if count < 1:
                raise ValidationError(f"{key}: range count must be positive")
            return [float(v) for v in np.linspace(start, stop, count)]
        return [_parse_float(key, part) for part in text.split(",")]

    def get_int_list(self, key: str) -> list[int]:
        """Comma-separated integers, or ``start:stop:count`` rounded and deduplicated."""
        text = self.get_str(key)
        if ":" in text:
            return sorted({round(v) for v in self.get_float_list(key)})
        return [_parse_int(key, part) for part in text.split(",")] if text else []

    def get_seed(self, key: str = "seed") -> int:
        """64-bit unsigned seed."""
        seed = self.get_int(key)
        if not 0 <= seed < 1 << 64:
            raise ValidationError(f"{key}: seed must fit in 64 unsigned bits")
        return seed

    def recorded(self) -> dict[str, str]:
        """Values that determine the results, sorted by key."""
        return {k: self.values[k] for k in sorted(self.values) if k not in UNRECORDED_KEYS}

    def header_lines(self) -> list[str]:
        """``# program=<name>`` followed by ``# key=value`` for every recorded key."""
        return [f"# program={self.program}"] + [f"# {k}={v}" for k, v in self.recorded().items()]
