"""Config file handling: TOML in, canonical TOML out, dotted-path overrides.

The schema is deliberately flat:

    n = 3
    D = 0.1
    r = 0.3
    Y = [2.0, 0.2, 1.0]
    s_in = [0.5, 0.1, 0.5]
    s1_bar = 0.25

    [uptake]
    kind = "liebig"

    [[uptake.monod]]
    mu_max = 0.5
    k = 1.0

Re-emitting a parsed config through dump_config is canonical: fixed key
order, shortest-round-trip float formatting. Parsing a canonical dump and
dumping again reproduces it byte for byte.
"""

from __future__ import annotations

import copy
import math
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .model import MonodParams, ReactorConfig, UptakeLaw

TOP_LEVEL_KEYS = ("n", "D", "r", "Y", "s_in", "s1_bar", "uptake")
FIXTURE_NAMES = ("EX1", "EX2", "EX3")


class ConfigFileError(ValueError):
    """Raised for malformed config documents or unknown keys."""


def parse_config(text: str) -> ReactorConfig:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigFileError(f"config is not valid TOML: {exc}") from exc
    return config_from_dict(doc)


def load_config(path: str | Path) -> ReactorConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def config_from_dict(doc: dict) -> ReactorConfig:
    unknown = set(doc) - set(TOP_LEVEL_KEYS)
    if unknown:
        raise ConfigFileError(f"unknown config keys: {', '.join(sorted(unknown))}")
    missing = [k for k in TOP_LEVEL_KEYS if k not in doc]
    if missing:
        raise ConfigFileError(f"missing config keys: {', '.join(missing)}")
    uptake = doc["uptake"]
    if not isinstance(uptake, dict):
        raise ConfigFileError("uptake must be a table")
    unknown = set(uptake) - {"kind", "monod"}
    if unknown:
        raise ConfigFileError(f"unknown uptake keys: {', '.join(sorted(unknown))}")
    if uptake.get("kind") not in ("liebig", "product"):
        raise ConfigFileError("uptake.kind must be \"liebig\" or \"product\"")
    monod = uptake.get("monod")
    if not isinstance(monod, list) or not monod:
        raise ConfigFileError("uptake.monod must be a non-empty array of tables")
    curves = []
    for i, entry in enumerate(monod):
        if not isinstance(entry, dict) or set(entry) != {"mu_max", "k"}:
            raise ConfigFileError(f"uptake.monod[{i}] must have exactly the keys mu_max and k")
        curves.append(MonodParams(mu_max=float(entry["mu_max"]), k=float(entry["k"])))
    n = doc["n"]
    if not isinstance(n, int) or isinstance(n, bool):
        raise ConfigFileError(f"n must be an integer, got {n!r}")
    for key in ("Y", "s_in"):
        if not isinstance(doc[key], list):
            raise ConfigFileError(f"{key} must be an array of numbers")
    return ReactorConfig(
        n=n,
        D=doc["D"],
        r=doc["r"],
        Y=doc["Y"],
        s_in=doc["s_in"],
        s1_bar=doc["s1_bar"],
        uptake=UptakeLaw(kind=uptake["kind"], per_resource=curves),
    )


def config_to_dict(cfg: ReactorConfig) -> dict:
    return {
        "n": cfg.n,
        "D": cfg.D,
        "r": cfg.r,
        "Y": list(cfg.Y),
        "s_in": list(cfg.s_in),
        "s1_bar": cfg.s1_bar,
        "uptake": {
            "kind": cfg.uptake.kind.value,
            "monod": [{"mu_max": m.mu_max, "k": m.k} for m in cfg.uptake.per_resource],
        },
    }


def _fmt(value) -> str:
    if isinstance(value, bool):
        raise ConfigFileError("booleans have no place in this schema")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ConfigFileError(f"non-finite number {value!r} cannot be serialized")
        # repr gives the shortest string that round-trips the float
        text = repr(value)
        return text if ("." in text or "e" in text or "E" in text) else text + ".0"
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, list):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    raise ConfigFileError(f"cannot serialize {type(value).__name__}")


def dump_config(cfg: ReactorConfig) -> str:
    lines = [
        f"n = {_fmt(cfg.n)}",
        f"D = {_fmt(cfg.D)}",
        f"r = {_fmt(cfg.r)}",
        f"Y = {_fmt(list(cfg.Y))}",
        f"s_in = {_fmt(list(cfg.s_in))}",
        f"s1_bar = {_fmt(cfg.s1_bar)}",
        "",
        "[uptake]",
        f'kind = "{cfg.uptake.kind.value}"',
    ]
    for m in cfg.uptake.per_resource:
        lines += ["", "[[uptake.monod]]", f"mu_max = {_fmt(m.mu_max)}", f"k = {_fmt(m.k)}"]
    return "\n".join(lines) + "\n"


def _coerce(raw: str):
    """Parse an override value with TOML typing; bare words fall back to strings."""
    try:
        return tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        return raw


def apply_overrides(doc: dict, overrides: list[str]) -> dict:
    """Apply key=value pairs to a parsed config dict.

    Paths are dotted; integer segments index into arrays. Only paths inside
    the schema are accepted, so a typo fails loudly instead of being ignored.
    Returns an updated copy; the input document is left alone.
    """
    doc = copy.deepcopy(doc)
    for item in overrides:
        if "=" not in item:
            raise ConfigFileError(f"override {item!r} is not of the form key=value")
        path, raw = item.split("=", 1)
        parts = path.strip().split(".")
        value = _coerce(raw.strip())
        _check_override_path(parts)
        target = doc
        for i, part in enumerate(parts[:-1]):
            if part.isdigit():
                idx = int(part)
                if not isinstance(target, list) or idx >= len(target):
                    raise ConfigFileError(f"override path {path!r} indexes past the end")
                target = target[idx]
            else:
                if not isinstance(target, dict) or part not in target:
                    raise ConfigFileError(f"override path {path!r} does not exist in the config")
                target = target[part]
        leaf = parts[-1]
        if leaf.isdigit():
            idx = int(leaf)
            if not isinstance(target, list) or idx >= len(target):
                raise ConfigFileError(f"override path {path!r} indexes past the end")
            target[idx] = value
        else:
            if not isinstance(target, dict) or leaf not in target:
                raise ConfigFileError(f"override path {path!r} does not exist in the config")
            target[leaf] = value
    return doc


def _check_override_path(parts: list[str]) -> None:
    head = parts[0]
    if head not in TOP_LEVEL_KEYS:
        raise ConfigFileError(f"override key {head!r} is not part of the config schema")
    if head == "uptake":
        if len(parts) >= 2 and parts[1] not in ("kind", "monod"):
            raise ConfigFileError(f"override key uptake.{parts[1]!r} is not part of the config schema")
        if len(parts) >= 4 and parts[3] not in ("mu_max", "k"):
            raise ConfigFileError(f"override leaf {parts[3]!r} must be mu_max or k")


def load_config_with_overrides(path: str | Path, overrides: list[str]) -> ReactorConfig:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigFileError(f"config is not valid TOML: {exc}") from exc
    if overrides:
        doc = apply_overrides(doc, overrides)
    return config_from_dict(doc)


def fixture_path(name: str) -> Path:
    """Filesystem path of a bundled example config (EX1, EX2, EX3)."""
    if name not in FIXTURE_NAMES:
        raise ValueError(f"unknown fixture {name!r}; available: {', '.join(FIXTURE_NAMES)}")
    return Path(str(resources.files("scf").joinpath("fixtures", f"{name}.toml")))


def load_fixture(name: str) -> ReactorConfig:
    return load_config(fixture_path(name))
