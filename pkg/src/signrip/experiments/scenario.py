"""Scenario files: the sweep configuration format and its parser.

A scenario is a YAML mapping.  Scalars may be replaced by lists to form
grid axes; the runner takes the Cartesian product of all axes and repeats
it for every solver and trial.  Three kinds exist:

kind: solve (default)          kind: rip                  kind: qdev
--------------------------     ------------------------   ------------------------
name: my-sweep                 name: rip-sweep            name: deviation-sweep
d: 50          # or list       kind: rip                  kind: qdev
m: 500         # or list       d: [10]                    d: 10
r_star: 1                      m: [1250, 5000]            m: 2000
noise:                         rank: [1, 2]               noise:
  p: 0.1       # or list       certifiers: [sign, l2]       p: [0.1]
  dist: gaussian               n_samples: 200               dist: gaussian
  scale: 10.0                  noise: {p: 0.0}              scale: [1, 10, 100]
init:                          trials: 1                  n_samples: 100
  kind: spectral               base_seed: 7               variant: goe
  alpha: 0.1
solvers:
  - label: subgd-over
    algorithm: subgd           # subgd | gd
    r_prime: d                 # integer or the string "d"
    policy: {kind: qnorm_geometric, eta0: 0.4, rho: 0.99}
    iters: 1500
trials: 5
base_seed: 2026
trace: false                   # per-iteration trace files, opt-in
output: results                # optional default output directory

Noise sections accept either dist/scale (each possibly a list, crossed as
independent axes) or ``cases: [{dist: gaussian, scale: 10}, ...]`` for
paired dist/scale combinations.  Policy kinds: qnorm_geometric,
geometric (eta0, rho), residual_proportional, inverse_t, inverse_sqrt_t,
constant (eta0).  Init kinds: spectral (alpha), random (scale),
zero_adjacent (scale).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import yaml

from ..model import NOISE_DISTS
from ..optim import (
    Constant,
    Geometric,
    InitSpec,
    InverseSqrtT,
    InverseT,
    QNormGeometric,
    RandomGaussian,
    ResidualProportional,
    Spectral,
    StepPolicy,
    ZeroAdjacent,
)

__all__ = ["Scenario", "SolverSpec", "ScenarioError", "parse_scenario", "load_scenario", "apply_overrides"]

_POLICY_KINDS = {
    "qnorm_geometric": (QNormGeometric, ("eta0", "rho")),
    "geometric": (Geometric, ("eta0", "rho")),
    "residual_proportional": (ResidualProportional, ("eta0",)),
    "inverse_t": (InverseT, ("eta0",)),
    "inverse_sqrt_t": (InverseSqrtT, ("eta0",)),
    "constant": (Constant, ("eta0",)),
}

_INIT_KINDS = {
    "spectral": (Spectral, ("alpha",)),
    "random": (RandomGaussian, ("scale",)),
    "zero_adjacent": (ZeroAdjacent, ("scale",)),
}


class ScenarioError(ValueError):
    """Configuration problem; the message names the offending field."""


@dataclass(frozen=True)
class SolverSpec:
    label: str
    algorithm: str  # "subgd" | "gd"
    policy: StepPolicy
    r_prime: int | str  # positive int, or "d" for full over-parameterization
    iters: int

    def resolve_r_prime(self, d: int) -> int:
        return d if self.r_prime == "d" else int(self.r_prime)

    def policy_fields(self) -> tuple[str, float, float]:
        kind = {v[0]: k for k, v in _POLICY_KINDS.items()}[type(self.policy)]
        rho = getattr(self.policy, "rho", float("nan"))
        return kind, self.policy.eta0, rho


@dataclass(frozen=True)
class Scenario:
    name: str
    kind: str = "solve"  # "solve" | "rip" | "qdev"
    d: tuple[int, ...] = (10,)
    m: tuple[int, ...] = (100,)
    r_star: int = 1
    noise_p: tuple[float, ...] = (0.0,)
    noise_cases: tuple[tuple[str, float], ...] = (("none", 0.0),)
    init: InitSpec = Spectral(alpha=0.1)
    solvers: tuple[SolverSpec, ...] = ()
    trials: int = 1
    base_seed: int = 0
    trace: bool = False
    output: str | None = None
    # rip / qdev kinds only
    rank: tuple[int, ...] = (1,)
    certifiers: tuple[str, ...] = ("sign",)
    n_samples: int = 200
    variant: str = "goe"

    def grid_cells(self) -> list[dict[str, Any]]:
        """All grid coordinates, in deterministic declaration order."""
        cells = []
        for d in self.d:
            for m in self.m:
                for p in self.noise_p:
                    for dist, scale in self.noise_cases:
                        cells.append({"d": d, "m": m, "p": p, "dist": dist, "scale": scale})
        return cells


def _as_list(value, name: str, cast, positive: bool = False) -> tuple:
    vals = value if isinstance(value, list) else [value]
    if not vals:
        raise ScenarioError(f"{name}: grid must be non-empty")
    out = []
    for v in vals:
        try:
            c = cast(v)
        except (TypeError, ValueError):
            raise ScenarioError(f"{name}: cannot read {v!r}") from None
        if positive and c <= 0:
            raise ScenarioError(f"{name}: must be positive, got {v!r}")
        out.append(c)
    return tuple(out)


def _parse_policy(raw: Any, where: str) -> StepPolicy:
    if not isinstance(raw, dict) or "kind" not in raw:
        raise ScenarioError(f"{where}: expected a mapping with a 'kind' field")
    kind = raw["kind"]
    if kind not in _POLICY_KINDS:
        raise ScenarioError(f"{where}.kind: unknown policy {kind!r}, expected one of {sorted(_POLICY_KINDS)}")
    cls, fields = _POLICY_KINDS[kind]
    extra = set(raw) - {"kind", *fields}
    if extra:
        raise ScenarioError(f"{where}: unexpected fields {sorted(extra)} for policy {kind!r}")
    try:
        return cls(**{f: float(raw[f]) for f in fields})
    except KeyError as exc:
        raise ScenarioError(f"{where}.{exc.args[0]}: required for policy {kind!r}") from None
    except ValueError as exc:
        raise ScenarioError(f"{where}: {exc}") from None


def _parse_init(raw: Any) -> InitSpec:
    if raw is None:
        return Spectral(alpha=0.1)
    if not isinstance(raw, dict) or "kind" not in raw:
        raise ScenarioError("init: expected a mapping with a 'kind' field")
    kind = raw["kind"]
    if kind not in _INIT_KINDS:
        raise ScenarioError(f"init.kind: unknown init {kind!r}, expected one of {sorted(_INIT_KINDS)}")
    cls, fields = _INIT_KINDS[kind]
    extra = set(raw) - {"kind", *fields}
    if extra:
        raise ScenarioError(f"init: unexpected fields {sorted(extra)} for {kind!r}")
    try:
        return cls(**{f: float(raw[f]) for f in fields})
    except KeyError as exc:
        raise ScenarioError(f"init.{exc.args[0]}: required for init {kind!r}") from None
    except ValueError as exc:
        raise ScenarioError(f"init: {exc}") from None


def _parse_noise(raw: Any) -> tuple[tuple[float, ...], tuple[tuple[str, float], ...]]:
    if raw is None:
        return (0.0,), (("none", 0.0),)
    if not isinstance(raw, dict):
        raise ScenarioError("noise: expected a mapping")
    p = _as_list(raw.get("p", 0.0), "noise.p", float)
    for v in p:
        if not 0.0 <= v <= 1.0:
            raise ScenarioError(f"noise.p: {v} outside [0, 1]")
    if "cases" in raw:
        if "dist" in raw or "scale" in raw:
            raise ScenarioError("noise: give either cases or dist/scale, not both")
        cases = []
        for i, case in enumerate(raw["cases"]):
            if not isinstance(case, dict) or "dist" not in case:
                raise ScenarioError(f"noise.cases[{i}]: expected a mapping with 'dist'")
            dist = case["dist"]
            if dist not in NOISE_DISTS:
                raise ScenarioError(f"noise.cases[{i}].dist: unknown {dist!r}")
            cases.append((dist, float(case.get("scale", 1.0))))
        if not cases:
            raise ScenarioError("noise.cases: must be non-empty")
        return p, tuple(cases)
    dists = _as_list(raw.get("dist", "gaussian"), "noise.dist", str)
    for dist in dists:
        if dist not in NOISE_DISTS:
            raise ScenarioError(f"noise.dist: unknown {dist!r}, expected one of {NOISE_DISTS}")
    scales = _as_list(raw.get("scale", 1.0), "noise.scale", float)
    return p, tuple((dist, s) for dist in dists for s in scales)


def _parse_solver(raw: Any, i: int) -> SolverSpec:
    where = f"solvers[{i}]"
    if not isinstance(raw, dict):
        raise ScenarioError(f"{where}: expected a mapping")
    algorithm = raw.get("algorithm", "subgd")
    if algorithm not in ("subgd", "gd"):
        raise ScenarioError(f"{where}.algorithm: expected 'subgd' or 'gd', got {algorithm!r}")
    r_prime = raw.get("r_prime", 1)
    if r_prime != "d":
        try:
            r_prime = int(r_prime)
        except (TypeError, ValueError):
            raise ScenarioError(f"{where}.r_prime: expected an integer or 'd', got {r_prime!r}") from None
        if r_prime < 1:
            raise ScenarioError(f"{where}.r_prime: must be >= 1, got {r_prime}")
    iters = raw.get("iters")
    if iters is None:
        raise ScenarioError(f"{where}.iters: required")
    iters = int(iters)
    if iters < 0:
        raise ScenarioError(f"{where}.iters: must be >= 0, got {iters}")
    policy = _parse_policy(raw.get("policy"), f"{where}.policy")
    label = str(raw.get("label", f"{algorithm}-{i}"))
    return SolverSpec(label=label, algorithm=algorithm, policy=policy, r_prime=r_prime, iters=iters)


_KNOWN_KEYS = {
    "name", "kind", "d", "m", "r_star", "noise", "init", "solvers", "trials",
    "base_seed", "trace", "output", "rank", "certifiers", "n_samples", "variant",
}


def parse_scenario(raw: dict[str, Any]) -> Scenario:
    """Build and validate a Scenario from a parsed YAML mapping."""
    if not isinstance(raw, dict):
        raise ScenarioError("scenario: top level must be a mapping")
    unknown = set(raw) - _KNOWN_KEYS
    if unknown:
        raise ScenarioError(f"scenario: unknown fields {sorted(unknown)}")
    kind = raw.get("kind", "solve")
    if kind not in ("solve", "rip", "qdev"):
        raise ScenarioError(f"kind: expected solve, rip or qdev, got {kind!r}")
    name = str(raw.get("name", "unnamed"))
    d = _as_list(raw.get("d", 10), "d", int, positive=True)
    m = _as_list(raw.get("m", 100), "m", int, positive=True)
    r_star = int(raw.get("r_star", 1))
    if r_star < 1:
        raise ScenarioError(f"r_star: must be >= 1, got {r_star}")
    if r_star > min(d):
        raise ScenarioError(f"r_star: {r_star} exceeds smallest d={min(d)}")
    noise_p, noise_cases = _parse_noise(raw.get("noise"))
    trials = int(raw.get("trials", 1))
    if trials < 1:
        raise ScenarioError(f"trials: must be >= 1, got {trials}")
    base_seed = int(raw.get("base_seed", 0))
    trace = bool(raw.get("trace", False))
    output = raw.get("output")
    variant = raw.get("variant", "goe")
    if variant not in ("goe", "iid"):
        raise ScenarioError(f"variant: expected 'goe' or 'iid', got {variant!r}")

    solvers: tuple[SolverSpec, ...] = ()
    init: InitSpec = Spectral(alpha=0.1)
    rank = _as_list(raw.get("rank", 1), "rank", int, positive=True)
    certifiers = tuple(_as_list(raw.get("certifiers", "sign"), "certifiers", str))
    n_samples = int(raw.get("n_samples", 200))
    if n_samples < 1:
        raise ScenarioError(f"n_samples: must be >= 1, got {n_samples}")

    if kind == "solve":
        raw_solvers = raw.get("solvers")
        if not raw_solvers:
            raise ScenarioError("solvers: at least one solver required for kind=solve")
        solvers = tuple(_parse_solver(s, i) for i, s in enumerate(raw_solvers))
        init = _parse_init(raw.get("init"))
        for sv in solvers:
            if sv.r_prime != "d" and sv.r_prime > min(d):
                raise ScenarioError(f"solver {sv.label!r}: r_prime={sv.r_prime} exceeds smallest d={min(d)}")
    elif kind == "rip":
        for c in certifiers:
            if c not in ("sign", "l2", "l1l2"):
                raise ScenarioError(f"certifiers: unknown certifier {c!r}")
        for r in rank:
            if r > min(d):
                raise ScenarioError(f"rank: {r} exceeds smallest d={min(d)}")

    return Scenario(
        name=name, kind=kind, d=d, m=m, r_star=r_star,
        noise_p=noise_p, noise_cases=noise_cases, init=init, solvers=solvers,
        trials=trials, base_seed=base_seed, trace=trace, output=output,
        rank=rank, certifiers=certifiers, n_samples=n_samples, variant=variant,
    )


def load_scenario(path) -> Scenario:
    """Parse a scenario YAML file."""
    with open(path) as fh:
        try:
            raw = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ScenarioError(f"{path}: not valid YAML ({exc})") from None
    if raw is None:
        raise ScenarioError(f"{path}: empty scenario file")
    return parse_scenario(raw)


def apply_overrides(raw: dict[str, Any], overrides: list[str]) -> dict[str, Any]:
    """Apply key=value overrides to a raw scenario mapping (dotted paths).

    Values are parsed as YAML, so `trials=3`, `noise.p=[0.1,0.3]`,
    `solvers.0.iters=100` and `name=quick` all work; bare comma lists
    (`m=400,800`) are wrapped in brackets first.
    """
    for item in overrides:
        if "=" not in item:
            raise ScenarioError(f"override {item!r}: expected key=value")
        key, _, text = item.partition("=")
        if "," in text and not text.lstrip().startswith("["):
            text = f"[{text}]"
        try:
            value = yaml.safe_load(text)
        except yaml.YAMLError:
            raise ScenarioError(f"override {item!r}: cannot parse value") from None
        node: Any = raw
        parts = key.split(".")
        for j, part in enumerate(parts[:-1]):
            idx: Any = int(part) if part.lstrip("-").isdigit() else part
            try:
                node = node[idx]
            except (KeyError, IndexError, TypeError):
                raise ScenarioError(f"override {item!r}: no such field {'.'.join(parts[:j+1])!r}") from None
        last: Any = int(parts[-1]) if parts[-1].lstrip("-").isdigit() else parts[-1]
        try:
            node[last] = value
        except (IndexError, TypeError):
            raise ScenarioError(f"override {item!r}: cannot set field {key!r}") from None
    return raw
