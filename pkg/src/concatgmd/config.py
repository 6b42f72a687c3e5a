"""Flat ``section.key = value`` configuration files.

Example::

    # one-level RS(15,9) over a random [8,4] inner code
    channel.spec = bsc:0.05
    scheme.inner_n = 8
    scheme.inner_k = 4
    scheme.inner_seed = 1
    scheme.inner_attempts = 50
    scheme.outer_n = 15
    scheme.outer_k = 9
    scheme.eps2 = 0.25
    sim.trials = 10000
    sim.seed = 1
    sim.variants = revised, errors_only

List-valued keys take comma-separated values, one per level.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from concatgmd.channel import ChannelError, ChannelModel, parse_channel
from concatgmd.gmd import DECODERS, GmdParamError
from concatgmd.inner_code import InnerCode, InnerCodeError, random_linear_codebook
from concatgmd.multilevel import ConcatScheme, SchemeError, allocate_outer_rates
from concatgmd.outer_code import CodeError
from concatgmd.finite_field import FieldError

KNOWN_KEYS = {
    "channel.spec",
    "scheme.levels",
    "scheme.inner_n",
    "scheme.inner_k",
    "scheme.inner_seed",
    "scheme.inner_attempts",
    "scheme.inner_file",
    "scheme.level_bits",
    "scheme.outer_n",
    "scheme.outer_k",
    "scheme.rate",
    "scheme.eps1",
    "scheme.eps2",
    "scheme.T",
    "sim.trials",
    "sim.seed",
    "sim.variants",
    "sim.workers",
    "sim.output",
    "sim.trial_log",
    "exponents.variants",
    "exponents.m",
    "exponents.r_min",
    "exponents.r_max",
    "exponents.points",
    "exponents.rates",
    "exponents.output",
}


class ConfigError(ValueError):
    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        self.key = key
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(key)
        super().__init__(f"{': '.join(where)}: {message}" if where else message)


class RawConfig:
    """Parsed key/value pairs remembering the line each key came from."""

    def __init__(self, values: dict[str, tuple[str, int | None]] | None = None):
        self.values = dict(values or {})

    @classmethod
    def parse(cls, text: str) -> "RawConfig":
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError("expected 'section.key = value'", line=lineno)
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in KNOWN_KEYS:
                raise ConfigError("unknown key", key=key, line=lineno)
            if key in values:
                raise ConfigError("duplicate key", key=key, line=lineno)
            values[key] = (value, lineno)
        return cls(values)

    @classmethod
    def load(cls, path) -> "RawConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        return cls.parse(text)

    def set(self, key: str, value) -> None:
        self.values[key] = (str(value), None)

    def has(self, key: str) -> bool:
        return key in self.values

    def line(self, key: str) -> int | None:
        return self.values.get(key, (None, None))[1]

    def error(self, key: str, message: str) -> ConfigError:
        return ConfigError(message, key=key, line=self.line(key))

    def get(self, key: str, conv=str, default=None, required: bool = False):
        if key not in self.values:
            if required:
                raise ConfigError("missing required key", key=key)
            return default
        value, _ = self.values[key]
        try:
            return conv(value)
        except (TypeError, ValueError) as exc:
            raise self.error(key, f"bad value {value!r}: {exc}") from None

    def get_list(self, key: str, conv=str, default=None, required: bool = False):
        return self.get(key, lambda v: [conv(x.strip()) for x in v.split(",") if x.strip()], default, required)


def _float_or_auto(v: str):
    return None if v.lower() == "auto" else float(v)


@dataclass
class SchemeConfig:
    inner_n: int
    inner_k: int
    inner_seed: int = 0
    inner_attempts: int = 1
    inner_file: str | None = None
    level_bits: list[int] = field(default_factory=list)
    outer_n: int = 0
    outer_k: list[int] = field(default_factory=list)
    rate: float | None = None
    eps1: list[float] = field(default_factory=list)
    eps2: list[float] = field(default_factory=list)
    T: float | None = None


def _scheme_config(raw: RawConfig) -> SchemeConfig:
    inner_file = raw.get("scheme.inner_file")
    inner_n = raw.get("scheme.inner_n", int, required=inner_file is None)
    inner_k = raw.get("scheme.inner_k", int, required=inner_file is None)
    if inner_file is not None:
        try:
            code = InnerCode.load(inner_file)
        except (OSError, InnerCodeError, ValueError) as exc:
            raise raw.error("scheme.inner_file", str(exc)) from None
        inner_n, inner_k = code.length, code.k_bits
    levels = raw.get("scheme.levels", int)
    level_bits = raw.get_list("scheme.level_bits", int)
    if level_bits is None:
        m = levels or 1
        if inner_k % m:
            raise raw.error("scheme.levels", f"inner_k={inner_k} does not split evenly over {m} levels")
        level_bits = [inner_k // m] * m
    elif levels is not None and levels != len(level_bits):
        raise raw.error("scheme.level_bits", f"{len(level_bits)} entries but scheme.levels = {levels}")
    m = len(level_bits)
    if sum(level_bits) != inner_k:
        raise raw.error("scheme.level_bits", f"level bits sum to {sum(level_bits)}, inner_k = {inner_k}")

    def per_level(key, default):
        vals = raw.get_list(key, float, default=[default])
        if len(vals) == 1:
            vals = vals * m
        if len(vals) != m:
            raise raw.error(key, f"need 1 or {m} values, got {len(vals)}")
        return vals

    outer_k = raw.get_list("scheme.outer_k", int)
    rate = raw.get("scheme.rate", float)
    if outer_k is None and rate is None:
        raise ConfigError("need scheme.outer_k or scheme.rate", key="scheme.outer_k")
    if outer_k is not None and len(outer_k) != m:
        raise raw.error("scheme.outer_k", f"need {m} values, got {len(outer_k)}")
    return SchemeConfig(
        inner_n=inner_n,
        inner_k=inner_k,
        inner_seed=raw.get("scheme.inner_seed", int, 0),
        inner_attempts=raw.get("scheme.inner_attempts", int, 1),
        inner_file=inner_file,
        level_bits=level_bits,
        outer_n=raw.get("scheme.outer_n", int, required=True),
        outer_k=outer_k or [],
        rate=rate,
        eps1=per_level("scheme.eps1", 0.0),
        eps2=per_level("scheme.eps2", 0.25),
        T=raw.get("scheme.T", _float_or_auto),
    )


def build_scheme(raw: RawConfig, ch: ChannelModel) -> ConcatScheme:
    sc = _scheme_config(raw)
    try:
        if sc.inner_file is not None:
            inner = InnerCode.load(sc.inner_file)
        else:
            inner = random_linear_codebook(sc.inner_seed, sc.inner_n, sc.inner_k, sc.inner_attempts)
    except InnerCodeError as exc:
        raise ConfigError(str(exc), key="scheme.inner_k") from None
    outer_k = sc.outer_k
    if not outer_k:
        outer_k = _allocate(raw, sc, inner, ch)
    for j, (kj, e2) in enumerate(zip(sc.level_bits, sc.eps2), 1):
        inv = 1.0 / e2 if e2 > 0 else float("inf")
        if not 0 < e2 <= 1 or abs(inv - round(inv)) > 1e-9:
            raise raw.error("scheme.eps2", f"level {j}: 1/eps2 must be an integer, got eps2={e2}")
    try:
        return ConcatScheme.build(inner, sc.level_bits, sc.outer_n, outer_k, sc.eps1, sc.eps2, sc.T)
    except GmdParamError as exc:
        raise raw.error("scheme.eps1", str(exc)) from None
    except (SchemeError, CodeError, FieldError) as exc:
        raise raw.error("scheme.outer_k", str(exc)) from None


def _allocate(raw: RawConfig, sc: SchemeConfig, inner: InnerCode, ch: ChannelModel) -> list[int]:
    from concatgmd.exponents import ExponentCalculator

    calc = ExponentCalculator(ch)
    R_i = inner.rate
    if R_i >= calc.C:
        raise raw.error("scheme.rate", "inner rate is not below capacity; cannot allocate outer rates")
    try:
        rates = allocate_outer_rates(sc.rate, R_i, len(sc.level_bits), lambda x: calc.E_L(x).E)
    except (SchemeError, ValueError) as exc:
        raise raw.error("scheme.rate", str(exc)) from None
    ks = [min(sc.outer_n - 1, max(1, round(r * sc.outer_n))) for r in rates]
    return ks


def build_channel(raw: RawConfig, override: str | None = None) -> ChannelModel:
    spec = override if override is not None else raw.get("channel.spec", required=True)
    try:
        return parse_channel(spec)
    except ChannelError as exc:
        raise ConfigError(str(exc), key="channel.spec", line=None if override else raw.line("channel.spec")) from None


@dataclass
class SimConfig:
    channel: ChannelModel
    scheme: ConcatScheme
    trials: int
    seed: int
    variants: list[str]
    workers: int = 1
    output: str | None = None
    trial_log: str | None = None


def load_sim_config(raw: RawConfig, channel_override: str | None = None) -> SimConfig:
    ch = build_channel(raw, channel_override)
    scheme = build_scheme(raw, ch)
    trials = raw.get("sim.trials", int, 1000)
    if trials < 1:
        raise raw.error("sim.trials", "trials must be >= 1")
    seed = raw.get("sim.seed", int, 0)
    if not 0 <= seed < 1 << 64:
        raise raw.error("sim.seed", "seed must be an unsigned 64-bit integer")
    variants = raw.get_list("sim.variants", str, ["revised", "forney", "errors_only"])
    for v in variants:
        if v not in DECODERS:
            raise raw.error("sim.variants", f"unknown decoder variant {v!r}; choose from {sorted(DECODERS)}")
    if len(set(variants)) != len(variants):
        raise raw.error("sim.variants", "duplicate variant")
    workers = raw.get("sim.workers", int, 1)
    if workers < 1:
        raise raw.error("sim.workers", "workers must be >= 1")
    return SimConfig(
        channel=ch,
        scheme=scheme,
        trials=trials,
        seed=seed,
        variants=variants,
        workers=workers,
        output=raw.get("sim.output"),
        trial_log=raw.get("sim.trial_log"),
    )


@dataclass
class SweepConfig:
    channel: ChannelModel
    variants: list[tuple[str, int | None]]
    rates: list[float]
    output: str | None = None


def _parse_variants(raw: RawConfig) -> list[tuple[str, int | None]]:
    tokens = raw.get_list("exponents.variants", str, ["gallager", "forney", "bz_m", "bz_inf"])
    ms = raw.get_list("exponents.m", int, [1, 2, 4, 8])
    out = []
    for tok in tokens:
        name, _, arg = tok.partition(":")
        if name == "bz_m":
            if arg:
                try:
                    mm = [int(arg)]
                except ValueError:
                    raise raw.error("exponents.variants", f"bad level count in {tok!r}") from None
            else:
                mm = ms
            for m in mm:
                if m < 1:
                    raise raw.error("exponents.variants", "m must be >= 1")
                out.append(("bz_m", m))
        elif name in ("gallager", "forney", "bz_inf") and not arg:
            out.append((name, None))
        else:
            raise raw.error("exponents.variants", f"unknown exponent variant {tok!r}")
    return out


def load_sweep_config(raw: RawConfig, channel_override: str | None = None) -> SweepConfig:
    ch = build_channel(raw, channel_override)
    if raw.has("exponents.rates"):
        rates = raw.get_list("exponents.rates", float)
    else:
        r_min = raw.get("exponents.r_min", float, required=True)
        r_max = raw.get("exponents.r_max", float, required=True)
        points = raw.get("exponents.points", int, 32)
        if points < 1:
            raise raw.error("exponents.points", "need at least one point")
        if r_max < r_min:
            raise raw.error("exponents.r_max", "r_max < r_min")
        step = (r_max - r_min) / (points - 1) if points > 1 else 0.0
        rates = [r_min + i * step for i in range(points)]
    return SweepConfig(ch, _parse_variants(raw), rates, raw.get("exponents.output"))
