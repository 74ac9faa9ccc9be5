"""TOML configuration for sweeps, identity checks and polytope reports.

Field elements (the twist c and the fiber value a) are written as discrete
logs, i.e. exponents of the fixed generator; a lives in F_{q^m}.  Example::

    budget = 100_000_000

    [[sweep]]
    field = {p = 3, n = 1}
    types = [[1, 1], [2]]
    chars = "all"          # or a list of exponent tuples
    c = "all"              # twists of psi, as logs
    a = "all"              # elements of F_{q^m}^*, as logs
    m = [1, 2]

    [[verify]]
    field = {p = 3, n = 1}
    types = [[1, 1]]
    identities = "all"

    [polytope]
    n = [1, 6]             # inclusive range
    m = [1, 4]
    fields = [{p = 2, n = 1}, {p = 3, n = 1}]
    depth = 3
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import tomli

from .etale import EtaleAlgebra
from .ffield import DEFAULT_TABLE_BUDGET, FieldError, FieldTable, build_field, embedding

DEFAULT_BUDGET = 10**8

IDENTITIES = (
    "unfold",
    "split",
    "fiber",
    "norm_induced",
    "twist",
    "conj",
    "char2_closed_form",
    "split_toric",
    "wild_toric",
    "orthogonality",
    "gauss",
    "fiber_size",
)


class ConfigError(ValueError):
    """Malformed or out-of-budget configuration (exit code 2)."""


@dataclass(frozen=True)
class FieldSpec:
    p: int
    n: int
    modulus: tuple[int, ...] | None = None

    def build(self, budget: int = DEFAULT_TABLE_BUDGET) -> FieldTable:
        try:
            F = build_field(self.p, self.n, budget)
            if self.modulus is None or tuple(self.modulus) == F.modulus:
                return F
            return FieldTable(self.p, self.n, tuple(self.modulus))
        except FieldError as exc:
            raise ConfigError(str(exc)) from exc

    def label(self) -> int:
        return self.p**self.n


def build_algebra_over(base: FieldTable, type_) -> EtaleAlgebra:
    factors = []
    for d in type_:
        F = build_field(base.p, base.n * int(d))
        factors.append((F, embedding(base, F)))
    return EtaleAlgebra(base, factors)


@dataclass
class SweepSpec:
    field: FieldSpec
    types: list[tuple[int, ...]]
    chars: str | list[tuple[int, ...]] = "all"
    c: str | list[int] = "all"
    a: str | list[int] = "all"
    m: list[int] = field(default_factory=lambda: [1])


@dataclass
class VerifySpec:
    field: FieldSpec
    types: list[tuple[int, ...]]
    identities: tuple[str, ...] = IDENTITIES
    c: str | list[int] = "all"


@dataclass
class PolytopeSpec:
    n: tuple[int, int] = (1, 6)
    m: tuple[int, int] = (1, 4)
    fields: list[FieldSpec] = field(default_factory=list)
    depth: int = 3


@dataclass
class Config:
    sweeps: list[SweepSpec] = field(default_factory=list)
    verifies: list[VerifySpec] = field(default_factory=list)
    polytope: PolytopeSpec | None = None
    budget: int = DEFAULT_BUDGET
    tolerance: float = 1e-6


def _field(d) -> FieldSpec:
    if not isinstance(d, dict) or "p" not in d or "n" not in d:
        raise ConfigError(f"field descriptor needs p and n: {d!r}")
    mod = d.get("modulus")
    return FieldSpec(int(d["p"]), int(d["n"]), tuple(int(c) for c in mod) if mod is not None else None)


def _all_or_list(v, name, conv=int):
    if v == "all":
        return "all"
    if not isinstance(v, list):
        raise ConfigError(f"{name} must be 'all' or a list")
    return [conv(x) for x in v]


def _types(v) -> list[tuple[int, ...]]:
    if not isinstance(v, list) or not all(isinstance(t, list) and t for t in v):
        raise ConfigError("types must be a list of non-empty integer lists")
    out = [tuple(int(d) for d in t) for t in v]
    for t in out:
        if any(d < 1 for d in t) or sum(t) < 2:
            raise ConfigError(f"type {list(t)} must have positive parts and degree >= 2")
    return out


def _range(v, name) -> tuple[int, int]:
    if isinstance(v, int):
        return (v, v)
    if not (isinstance(v, list) and len(v) == 2):
        raise ConfigError(f"{name} must be an integer or [lo, hi]")
    lo, hi = int(v[0]), int(v[1])
    if lo < 1 or hi < lo:
        raise ConfigError(f"bad range for {name}: {v}")
    return lo, hi


def parse_config(data: dict) -> Config:
    known = {"sweep", "verify", "polytope", "budget", "tolerance"}
    extra = set(data) - known
    if extra:
        raise ConfigError(f"unknown top-level keys: {sorted(extra)}")
    cfg = Config(budget=int(data.get("budget", DEFAULT_BUDGET)), tolerance=float(data.get("tolerance", 1e-6)))
    try:
        for s in data.get("sweep", []):
            ms = s.get("m", [1])
            ms = [int(ms)] if isinstance(ms, int) else [int(x) for x in ms]
            if any(x < 1 for x in ms):
                raise ConfigError("extension degrees m must be positive")
            cfg.sweeps.append(
                SweepSpec(
                    _field(s.get("field")),
                    _types(s.get("types")),
                    _all_or_list(s.get("chars", "all"), "chars", lambda t: tuple(int(e) for e in t)),
                    _all_or_list(s.get("c", "all"), "c"),
                    _all_or_list(s.get("a", "all"), "a"),
                    ms,
                )
            )
        for v in data.get("verify", []):
            ids = v.get("identities", "all")
            ids = IDENTITIES if ids == "all" else tuple(ids)
            unknown = set(ids) - set(IDENTITIES)
            if unknown:
                raise ConfigError(f"unknown identities: {sorted(unknown)}")
            cfg.verifies.append(
                VerifySpec(_field(v.get("field")), _types(v.get("types")), ids, _all_or_list(v.get("c", "all"), "c"))
            )
        if "polytope" in data:
            p = data["polytope"]
            cfg.polytope = PolytopeSpec(
                _range(p.get("n", [1, 6]), "n"),
                _range(p.get("m", [1, 4]), "m"),
                [_field(f) for f in p.get("fields", [])],
                int(p.get("depth", 3)),
            )
    except (TypeError, KeyError) as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    return cfg


def load_config(path: str | Path) -> Config:
    try:
        with open(path, "rb") as fh:
            data = tomli.load(fh)
    except (OSError, tomli.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(data)
