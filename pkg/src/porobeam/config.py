"""Flat ``key = value`` run configuration.

Lines are ``key = value``; ``#`` starts a comment; blank lines are ignored.
Numeric values accept plain floats or fractions such as ``1/22``. Initial
profiles are the presets ``parabola``, ``sine:<m>`` and ``zero``.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from pathlib import Path

from .fem import build_mesh
from .errors import MissingKey, ParseError, UnknownKey
from .model import PARAM_NAMES, validate_params
from .timestepper import RunConfig, resolve_profile

PROFILE_KEYS = ("init_u0", "init_u1", "init_phi0", "init_phi1", "init_w0")
RUN_KEYS = ("s", "dt", "t_final")
KNOWN_KEYS = PARAM_NAMES + RUN_KEYS + PROFILE_KEYS + ("output_every",)
DEFAULTS = {**{k: "zero" for k in PROFILE_KEYS}, "output_every": "1"}


def _tokenize(text: str) -> dict[str, tuple[int, str]]:
    entries: dict[str, tuple[int, str]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value or any(c.isspace() for c in key):
            raise ParseError(lineno, raw)
        if key not in KNOWN_KEYS:
            raise UnknownKey(key)
        if key in entries:
            raise ParseError(lineno, f"duplicate key {key!r}")
        entries[key] = (lineno, value)
    return entries


def _number(value: str, lineno: int) -> float:
    try:
        if "/" in value:
            return float(Fraction(value.replace(" ", "")))
        return float(value)
    except (ValueError, ZeroDivisionError):
        raise ParseError(lineno, value) from None


def _integer(value: str, lineno: int) -> int:
    x = _number(value, lineno)
    if x != int(x):
        raise ParseError(lineno, value)
    return int(x)


def _build(values: dict[str, tuple[int, str]]) -> RunConfig:
    for key in PARAM_NAMES + RUN_KEYS:
        if key not in values:
            raise MissingKey(key)
    merged = {k: (0, v) for k, v in DEFAULTS.items()}
    merged.update(values)
    params = validate_params({k: _number(merged[k][1], merged[k][0]) for k in PARAM_NAMES})
    profiles = {}
    for key in PROFILE_KEYS:
        lineno, spec = merged[key]
        try:
            resolve_profile(spec, params.l)
        except ValueError:
            raise ParseError(lineno, spec) from None
        profiles[key] = spec.lower()

    def num(key, conv=_number):
        lineno, value = merged[key]
        return conv(value, lineno)

    # rejects s < 2 with TooFewElements before anything runs
    build_mesh(params.l, num("s", _integer))
    try:
        return RunConfig(
            params=params,
            s=num("s", _integer),
            dt=num("dt"),
            t_final=num("t_final"),
            output_every=num("output_every", _integer),
            **profiles,
        )
    except ValueError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(0, str(exc)) from None


def parse_config(text: str) -> RunConfig:
    return _build(_tokenize(text))


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def serialize_config(cfg: RunConfig) -> str:
    """Inverse of :func:`parse_config` for configs with named profiles."""
    lines = [f"{k} = {getattr(cfg.params, k)!r}" for k in PARAM_NAMES]
    lines += [f"s = {cfg.s}", f"dt = {cfg.dt!r}", f"t_final = {cfg.t_final!r}"]
    for key in PROFILE_KEYS:
        spec = getattr(cfg, key)
        if not isinstance(spec, str):
            raise ValueError(f"{key} is not a named profile and cannot be serialized")
        lines.append(f"{key} = {spec}")
    lines.append(f"output_every = {cfg.output_every}")
    if cfg.init_w1 is not None:
        raise ValueError("init_w1 has no config key")
    return "\n".join(lines) + "\n"


def parse_sweep(text: str) -> list[tuple[dict, RunConfig]]:
    """Expand comma-separated numeric values into the Cartesian grid of configs.

    Returns ``(overrides, config)`` pairs in row-major order of the keys as
    they appear in the document.
    """
    entries = _tokenize(text)
    axes = []
    for key, (lineno, value) in entries.items():
        if "," in value:
            axes.append((key, lineno, [v.strip() for v in value.split(",") if v.strip()]))
    grid = []
    for combo in itertools.product(*[vals for _, _, vals in axes]):
        values = dict(entries)
        overrides = {}
        for (key, lineno, _), v in zip(axes, combo):
            values[key] = (lineno, v)
            overrides[key] = v
        grid.append((overrides, _build(values)))
    return grid
