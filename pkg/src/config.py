"""
Run configuration: `key = value` experiment files, command-line overrides and
the worker count.
"""

import os
from dataclasses import dataclass, field, fields
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Optional, Union

from .errors import DomainError, FormatError


class ProblemKind(Enum):
    LAPLACE1D = "laplace1d"
    LAPLACE2D = "laplace2d"
    DIAGONAL = "diagonal"
    MATRIXMARKET = "matrixmarket"


class BoundsMode(Enum):
    AUTO = "auto"
    ACTIVE = "active"


# spectrum spelled `example1` means {pi^2 (i^2 + j^2) <= lambda_u}
EXAMPLE1_SPECTRUM = "example1"


def thread_count() -> int:
    """Worker count from $FRACRB_THREADS, 1 when unset or invalid."""
    try:
        threads = int(os.getenv("FRACRB_THREADS", "1"))
    except ValueError:
        return 1
    return threads if threads >= 1 else 1


def parse_s_list(text: str) -> list[float]:
    try:
        values = [float(item) for item in text.split(",") if item.strip()]
    except ValueError as error:
        raise DomainError("s", text, "a comma separated list of reals") from error
    if not values:
        raise DomainError("s", text, "at least one exponent")
    return values


def parse_r_list(text: str) -> list[int]:
    """Comma list `5,10,20` or inclusive range `a:b`."""
    try:
        if ":" in text:
            start, stop = (int(part) for part in text.split(":", 1))
            values = list(range(start, stop + 1))
        else:
            values = [int(item) for item in text.split(",") if item.strip()]
    except ValueError as error:
        raise DomainError("r", text, "a comma list or a range a:b of integers") from error
    if not values:
        raise DomainError("r", text, "at least one value")
    return values


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_spectrum(text: str) -> Union[str, list[float]]:
    """`example1` or a comma list of positive eigenvalues."""
    if text.strip() == EXAMPLE1_SPECTRUM:
        return EXAMPLE1_SPECTRUM
    try:
        values = [float(item) for item in text.split(",") if item.strip()]
    except ValueError as error:
        raise DomainError("spectrum", text, f"'{EXAMPLE1_SPECTRUM}' or a comma list of positive reals") from error
    if not values or min(values) <= 0.0:
        raise DomainError("spectrum", text, f"'{EXAMPLE1_SPECTRUM}' or a comma list of positive reals")
    return values


_PARSERS: dict[str, Callable[[str], Any]] = {
    "problem": ProblemKind,
    "n": int,
    "spectrum": parse_spectrum,
    "matrix_m": str,
    "matrix_a": str,
    "seed": int,
    "active": int,
    "s_values": parse_s_list,
    "r_values": parse_r_list,
    "lambda_l": float,
    "lambda_u": float,
    "delta": float,
    "rel_tol": float,
    "quad_tol": float,
    "drop_tol": float,
    "out": str,
    "vector_out": str,
    "threads": int,
    "widened": _parse_bool,
    "bounds": BoundsMode,
}

# config keys that differ from the field names
_ALIASES = {"s": "s_values", "r": "r_values"}


def canonical_key(key: str) -> str:
    name = key.strip().lower().replace("-", "_")
    return _ALIASES.get(name, name)


@dataclass
class RunConfig:
    problem: ProblemKind = ProblemKind.LAPLACE1D
    n: int = 64
    spectrum: Union[str, list[float], None] = None
    matrix_m: Optional[str] = None
    matrix_a: Optional[str] = None
    seed: int = 1
    # 0 combines every eigenvector
    active: int = 0
    s_values: list[float] = field(default_factory=lambda: [0.5])
    r_values: list[int] = field(default_factory=lambda: [8])
    lambda_l: Optional[float] = None
    lambda_u: Optional[float] = None
    delta: Optional[float] = None
    rel_tol: float = 1e-12
    quad_tol: float = 1e-8
    drop_tol: float = 1e-10
    out: Optional[str] = None
    vector_out: Optional[str] = None
    threads: Optional[int] = None
    widened: bool = False
    bounds: BoundsMode = BoundsMode.AUTO

    def validate(self) -> None:
        """Raise DomainError or FormatError when the config cannot describe a run."""
        if self.problem in (ProblemKind.LAPLACE1D, ProblemKind.LAPLACE2D) and self.n < 2:
            raise DomainError("n", self.n, "n >= 2")
        if self.problem is ProblemKind.DIAGONAL and self.spectrum is None:
            raise DomainError("spectrum", None, f"'{EXAMPLE1_SPECTRUM}' or a comma list of positive reals")
        if isinstance(self.spectrum, str) and self.spectrum != EXAMPLE1_SPECTRUM:
            raise DomainError("spectrum", self.spectrum, f"'{EXAMPLE1_SPECTRUM}' or a comma list of positive reals")
        if self.problem is ProblemKind.MATRIXMARKET:
            for name, path in (("matrix_m", self.matrix_m), ("matrix_a", self.matrix_a)):
                if path is None:
                    raise DomainError(name, None, "a Matrix Market file path")
                if not Path(path).is_file():
                    raise FormatError(path, "file does not exist")
        for s in self.s_values:
            low_ok = s >= 0.0 if self.widened else s > 0.0
            high_ok = s <= 1.0 if self.widened else s < 1.0
            if not (low_ok and high_ok):
                raise DomainError("s", s, "0 <= s <= 1" if self.widened else "0 < s < 1")
        for r in self.r_values:
            if r < 1:
                raise DomainError("r", r, "r >= 1")
        if self.active < 0:
            raise DomainError("active", self.active, "active >= 0")
        if (self.lambda_l is None) != (self.lambda_u is None):
            raise DomainError("lambda_l", self.lambda_l, "both lambda bounds or neither")
        for name, tol in (("rel_tol", self.rel_tol), ("quad_tol", self.quad_tol), ("drop_tol", self.drop_tol)):
            if not (0.0 < tol < 1.0):
                raise DomainError(name, tol, f"0 < {name} < 1")
        if self.threads is not None and self.threads < 1:
            raise DomainError("threads", self.threads, "threads >= 1")

    def worker_count(self) -> int:
        return self.threads if self.threads is not None else thread_count()


def parse_config_file(path: Union[str, Path]) -> dict[str, Any]:
    """
    Read a line oriented `key = value` file. `#` starts a comment.

    Args:
        path: the config file

    Returns:
        Parsed values keyed by RunConfig field name
    """
    source = str(path)
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as error:
        raise FormatError(source, f"cannot read config: {error}") from error

    values: dict[str, Any] = {}
    for number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(source, f"expected 'key = value', got {line!r}", number)
        key, text = (part.strip() for part in line.split("=", 1))
        name = canonical_key(key)
        parser = _PARSERS.get(name)
        if parser is None:
            raise FormatError(source, f"unknown key {key!r}", number)
        try:
            values[name] = parser(text)
        except (ValueError, DomainError) as error:
            raise FormatError(source, f"bad value for {key!r}: {error}", number) from error
    return values


def build_config(file_values: dict[str, Any], flag_values: dict[str, Any]) -> RunConfig:
    """Defaults, then file values, then flags that were actually given."""
    known = {f.name for f in fields(RunConfig)}
    merged: dict[str, Any] = {}
    for source in (file_values, flag_values):
        for key, value in source.items():
            if value is None:
                continue
            name = canonical_key(key)
            if name not in known:
                raise DomainError(key, value, "a known configuration key")
            merged[name] = value
    return RunConfig(**merged)
