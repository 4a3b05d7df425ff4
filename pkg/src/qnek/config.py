"""Flat ``key = value`` parameter files.

One file describes either a block (``kind = block``) or a rank-``N`` system
(``kind = lax``) together with optional truncation and tolerance settings.
Complex numbers are written ``re+imi`` (``0.3-0.1i``, ``2i``, ``-1.5``);
vectors are comma separated.  Lines starting with ``#`` are comments.

Block files::

    kind = block
    N = 2
    q = 0.3
    thetas = 0.5, 0.35+0.1i        # theta_1 .. theta_M
    sigma_0 = 0.1, -0.1             # sigma_0 .. sigma_M
    sigma_1 = ...
    x = 0.1, 1.0                    # x_1 .. x_M, |x_1| < .. < |x_M|

Lax files::

    kind = lax
    N = 2
    q = 0.1
    theta_inf = 0.12+0.02i, -0.12-0.02i
    theta_0 = ...
    thetas = 0.25+0.015i, 0.25-0.015i   # theta_1 .. theta_{m+1}
    sigma_1 = ...                       # sigma_1 .. sigma_m
    s_1 = 1.8+0.2i, 2.4-0.6i            # weights s_{k,1} .. s_{k,N}
    t = 1, 0.005                        # t_1 .. t_{m+1}

Shared optional keys: ``cutoff``, ``radius``, ``block_cutoff``,
``series_order``, ``tolerance`` (applied to every identity) and
``tol.<identity>`` (one identity).
"""
from __future__ import annotations

import cmath
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .blocks import BlockParams
from .lax import LaxParams, validate

__all__ = ["ConfigError", "Settings", "BlockConfig", "LaxConfig", "parse_complex", "load_config", "format_complex"]

_COMMON = {"kind", "N", "q", "cutoff", "radius", "block_cutoff", "series_order", "tolerance"}
_BLOCK = {"thetas", "x"}
_LAX = {"theta_inf", "theta_0", "thetas", "t"}
_INDEXED = re.compile(r"^(sigma|s)_(\d+)$")
_NUMBER = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


class ConfigError(ValueError):
    """Malformed, incomplete or inconsistent parameter file."""


def parse_complex(text: str) -> complex:
    """``"0.3-0.1i"`` -> ``(0.3-0.1j)``."""
    s = text.strip().replace(" ", "")
    if not s:
        raise ConfigError("empty number")
    if s.endswith("i"):
        s = s[:-1] + "j"
        if s in ("j", "+j", "-j"):
            s = s.replace("j", "1j")
    if "j" not in s and not _NUMBER.match(s):
        raise ConfigError(f"not a number: {text!r}")
    try:
        return complex(s)
    except ValueError:
        raise ConfigError(f"not a complex number: {text!r}") from None


def format_complex(z: complex, digits: int = 17) -> str:
    z = complex(z)
    im = f"{z.imag:+.{digits}g}"
    return f"{z.real:.{digits}g}{im}i"


@dataclass(frozen=True)
class Settings:
    cutoff: int = 6
    radius: int = 2
    block_cutoff: int = 12
    series_order: int = 5
    tolerance: float | None = None
    tolerances: dict = field(default_factory=dict)

    def tol_for(self, identity: str, default: float) -> float:
        if identity in self.tolerances:
            return self.tolerances[identity]
        return default if self.tolerance is None else self.tolerance


@dataclass(frozen=True)
class BlockConfig:
    params: BlockParams
    q: complex
    settings: Settings


@dataclass(frozen=True)
class LaxConfig:
    params: LaxParams
    settings: Settings

    @property
    def q(self) -> complex:
        return self.params.q


def _read_pairs(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _vector(raw: dict, key: str, n: int | None = None) -> np.ndarray:
    if key not in raw:
        raise ConfigError(f"missing key {key!r}")
    v = np.array([parse_complex(x) for x in raw[key].split(",")], dtype=complex)
    if n is not None and v.size != n:
        raise ConfigError(f"{key!r} needs {n} entries, got {v.size}")
    return v


def _int(raw: dict, key: str, default: int, minimum: int = 0) -> int:
    if key not in raw:
        return default
    try:
        v = int(raw[key])
    except ValueError:
        raise ConfigError(f"{key!r} must be an integer") from None
    if v < minimum:
        raise ConfigError(f"{key!r} must be >= {minimum}")
    return v


def _float(text: str, key: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"{key!r} must be a real number") from None
    if not v >= 0:
        raise ConfigError(f"{key!r} must be nonnegative")
    return v


def _settings(raw: dict) -> Settings:
    tols = {k[4:]: _float(v, k) for k, v in raw.items() if k.startswith("tol.")}
    return Settings(
        cutoff=_int(raw, "cutoff", 6),
        radius=_int(raw, "radius", 2),
        block_cutoff=_int(raw, "block_cutoff", 12),
        series_order=_int(raw, "series_order", 5),
        tolerance=_float(raw["tolerance"], "tolerance") if "tolerance" in raw else None,
        tolerances=tols,
    )


def _indexed(raw: dict, name: str) -> dict[int, str]:
    out = {}
    for key in raw:
        mt = _INDEXED.match(key)
        if mt and mt.group(1) == name:
            out[int(mt.group(2))] = key
    return out


def _check_keys(raw: dict, allowed: set, indexed: dict[str, range]) -> None:
    for key in raw:
        if key in allowed or key.startswith("tol."):
            continue
        mt = _INDEXED.match(key)
        if mt and mt.group(1) in indexed and int(mt.group(2)) in indexed[mt.group(1)]:
            continue
        raise ConfigError(f"unknown key {key!r}")


def _parse_block(raw: dict, N: int, q: complex) -> BlockConfig:
    thetas = _vector(raw, "thetas")
    M = thetas.size
    _check_keys(raw, _COMMON | _BLOCK, {"sigma": range(0, M + 1)})
    sigmas = [_vector(raw, f"sigma_{k}", N) for k in range(M + 1)]
    xs = _vector(raw, "x", M)
    if np.any(xs == 0):
        raise ConfigError("points must be nonzero")
    try:
        params = BlockParams(N, tuple(thetas), tuple(sigmas), tuple(cmath.log(x) for x in xs))
    except ValueError as e:
        raise ConfigError(str(e)) from None
    return BlockConfig(params, q, _settings(raw))


def _parse_lax(raw: dict, N: int, q: complex) -> LaxConfig:
    thetas = _vector(raw, "thetas")
    m = thetas.size - 1
    if m < 1:
        raise ConfigError("'thetas' needs at least two entries")
    _check_keys(raw, _COMMON | _LAX, {"sigma": range(1, m + 1), "s": range(1, m + 1)})
    sigmas = [_vector(raw, f"sigma_{k}", N) for k in range(1, m + 1)]
    s = np.array([_vector(raw, f"s_{k}", N) for k in range(1, m + 1)])
    t = _vector(raw, "t", m + 1)
    if np.any(t == 0):
        raise ConfigError("points t must be nonzero")
    try:
        params = LaxParams.create(N, q, _vector(raw, "theta_inf", N), _vector(raw, "theta_0", N), thetas, sigmas, s, t)
        validate(params)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    return LaxConfig(params, _settings(raw))


def load_config(path: str | Path) -> BlockConfig | LaxConfig:
    """Parse and validate a parameter file; raises :class:`ConfigError`."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror}") from None
    raw = _read_pairs(text)
    kind = raw.get("kind")
    if kind not in ("block", "lax"):
        raise ConfigError("'kind' must be 'block' or 'lax'")
    N = _int(raw, "N", 0, minimum=2) if "N" in raw else None
    if N is None:
        raise ConfigError("missing key 'N'")
    if "q" not in raw:
        raise ConfigError("missing key 'q'")
    q = parse_complex(raw["q"])
    if not 0 < abs(q) < 1:
        raise ConfigError("need 0 < |q| < 1")
    return _parse_block(raw, N, q) if kind == "block" else _parse_lax(raw, N, q)
