"""Sectioned ``key = value`` run configuration.

Grammar::

    file    := (blank | comment | header | entry)*
    comment := '#' text            (also allowed after a value)
    header  := '[' section ']'
    entry   := key '=' value

Sections are ``market``, ``estimator``, ``experiment``, ``output`` and, per
asset i in {1, 2}, ``asset<i>.durations``, ``asset<i>.deformation``,
``asset<i>.efficient`` and ``asset<i>.noise``.  Every key has a default, so
any subset of sections may be given; unknown sections or keys are errors.
"""

from __future__ import annotations

from dataclasses import dataclass

from .clock import intraday_seasonal_spec, linear_spec, trading_schedule_spec
from .durations import AcdSpec, IidSpec, LmsdSpec
from .errors import ConfigError, TickCointError
from .estimators import TaperConfig
from .fracgauss import GaussianSpec
from .limitlab import ExperimentConfig, LimitFunctional
from .market import AssetConfig, MarketConfig
from .shocks import EfficientSpec, NoiseSpec

DURATION_KEYS = {
    "model": "iid",
    "law": "exponential",
    "mean": 1.0,
    "scale": 1.0,
    "sigma": 1.0,
    "driver_kind": "long-memory",
    "driver_hurst": 0.7,
    "driver_c": 0.2,
    "innovation": "exponential",
    "innovation_scale": 1.0,
    "omega": 0.2,
    "alpha": 0.1,
    "beta": 0.7,
    "burn_in": 10000,
}
DEFORMATION_KEYS = {
    "kind": "none",
    "gamma": 1.0,
    "period": 1.0,
    "amplitude": 0.0,
    "min_slope": 1e-6,
    "trading": 1.0,
    "closed": 0.0,
    "reopen_jump": 0.0,
    "slope": 1.0,
}
EFFICIENT_KEYS = {"variance": 1.0, "law": "gaussian"}
NOISE_KEYS = {
    "regime": "none",
    "hurst": 0.25,
    "scale": 1.0,
    "construction": "independent-long-memory",
    "driver_hurst": 0.75,
    "driver_c": 0.5,
}

SCHEMA = {
    "market": {"theta": 1.0, "theta21": None, "theta12": None, "horizon": 1000.0},
    "estimator": {"name": "ols", "taper": "cosine", "m": 3, "dt": 1.0, "delta": 1.0},
    "experiment": {
        "name": "experiment",
        "n_grid": (256, 512, 1024, 2048, 4096),
        "n": 8192,
        "reps": 500,
        "rate": 0.25,
        "functional": "ratio-BBH",
        "hurst": 0.25,
        "scale": 1.0,
        "denominator": "regressor",
        "reference_count": 10000,
        "grid": 4096,
        "planted_rate": 0.25,
    },
    "output": {"dir": "out"},
}
for _i in (1, 2):
    SCHEMA[f"asset{_i}.durations"] = DURATION_KEYS
    SCHEMA[f"asset{_i}.deformation"] = DEFORMATION_KEYS
    SCHEMA[f"asset{_i}.efficient"] = EFFICIENT_KEYS
    SCHEMA[f"asset{_i}.noise"] = NOISE_KEYS

# keys whose default is None hold floats
_OPTIONAL_FLOAT = {("market", "theta21"), ("market", "theta12")}


def _convert(section: str, key: str, raw: str, line: int):
    default = SCHEMA[section][key]
    where = f"line {line}: [{section}] {key}"
    raw = raw.strip()
    try:
        if (section, key) in _OPTIONAL_FLOAT:
            return None if raw.lower() in ("", "none") else float(raw)
        if section == "market" and key == "theta" and raw.lower() in ("", "none"):
            return None
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            return tuple(int(v) for v in raw.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {raw!r} as {type(default).__name__}") from None
    if not raw:
        raise ConfigError(f"{where}: empty value")
    return raw


def _format(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    return str(value)


@dataclass
class RunConfig:
    """Typed values of every section with defaults filled in."""

    values: dict

    def __eq__(self, other):
        return isinstance(other, RunConfig) and self.values == other.values

    def get(self, section: str, key: str):
        return self.values[section][key]

    # ------------------------------------------------------------ builders

    def _durations(self, i: int):
        d = self.values[f"asset{i}.durations"]
        model = d["model"]
        if model == "iid":
            return IidSpec(law=d["law"], mean=d["mean"], scale=d["scale"])
        if model == "lmsd":
            if d["driver_kind"] == "white":
                driver = GaussianSpec(kind="summable", acov=())
            else:
                driver = GaussianSpec(kind=d["driver_kind"], hurst=d["driver_hurst"], c=d["driver_c"])
            return LmsdSpec(d["sigma"], driver, d["innovation"], d["innovation_scale"])
        if model == "acd":
            return AcdSpec(d["omega"], d["alpha"], d["beta"], d["innovation"], d["innovation_scale"], d["burn_in"])
        raise ConfigError(f"unknown duration model {model!r}")

    def _deformation(self, i: int):
        d = self.values[f"asset{i}.deformation"]
        kind = d["kind"]
        if kind == "none":
            return None
        if kind == "linear":
            return linear_spec(d["gamma"])
        if kind == "seasonal":
            return intraday_seasonal_spec(d["period"], d["amplitude"], d["min_slope"])
        if kind == "schedule":
            return trading_schedule_spec(d["trading"], d["closed"], d["reopen_jump"], d["slope"])
        raise ConfigError(f"unknown deformation kind {kind!r}")

    def _asset(self, i: int) -> AssetConfig:
        durations = self._durations(i)
        e = self.values[f"asset{i}.efficient"]
        nz = self.values[f"asset{i}.noise"]
        driver = None
        if nz["regime"] in ("strong", "standard") and nz["construction"] == "independent-long-memory":
            driver = GaussianSpec(kind="long-memory", hurst=nz["driver_hurst"], c=nz["driver_c"])
        sigma = durations.sigma if isinstance(durations, LmsdSpec) else 1.0
        noise = NoiseSpec(nz["regime"], nz["hurst"], nz["scale"], nz["construction"], driver, sigma)
        return AssetConfig(durations, self._deformation(i), EfficientSpec(e["variance"], e["law"]), noise)

    def asset(self, i: int) -> AssetConfig:
        try:
            return self._asset(i)
        except ConfigError:
            raise
        except TickCointError as exc:
            raise ConfigError(f"[asset{i}]: {exc}") from None

    def market(self) -> MarketConfig:
        m = self.values["market"]
        a1, a2 = self.asset(1), self.asset(2)
        try:
            if m["theta21"] is not None or m["theta12"] is not None:
                return MarketConfig(a1, a2, None, m["theta21"], m["theta12"], m["horizon"])
            return MarketConfig(a1, a2, m["theta"], None, None, m["horizon"])
        except TickCointError as exc:
            raise ConfigError(f"[market]: {exc}") from None

    def taper(self) -> TaperConfig:
        e = self.values["estimator"]
        try:
            return TaperConfig(e["taper"], e["m"])
        except TickCointError as exc:
            raise ConfigError(f"[estimator]: {exc}") from None

    def functional(self, sigma=None) -> LimitFunctional:
        x = self.values["experiment"]
        try:
            return LimitFunctional(
                x["functional"],
                scale=x["scale"],
                hurst=x["hurst"],
                taper=self.taper(),
                sigma=None if sigma is None else tuple(map(tuple, sigma)),
                denominator=x["denominator"],
            )
        except TickCointError as exc:
            raise ConfigError(f"[experiment]: {exc}") from None

    def experiment(self) -> ExperimentConfig:
        x, e = self.values["experiment"], self.values["estimator"]
        market = None if e["name"] == "planted" else self.market()
        try:
            return ExperimentConfig(
                x["name"],
                market,
                e["name"],
                x["rate"],
                self.taper(),
                e["dt"],
                e["delta"],
                x["planted_rate"],
            )
        except TickCointError as exc:
            raise ConfigError(f"[experiment]: {exc}") from None

    def validate(self):
        """Build every object once so cross-field errors surface before any work."""
        if self.values["estimator"]["name"] != "planted":
            self.market()
        self.taper()
        self.experiment()
        x = self.values["experiment"]
        if x["reps"] < 1:
            raise ConfigError("[experiment] reps must be positive")
        if any(n < 1 for n in x["n_grid"]) or x["n"] < 1:
            raise ConfigError("[experiment] n values must be positive")
        return self


def defaults() -> dict:
    return {sec: dict(keys) for sec, keys in SCHEMA.items()}


def parse_config(text: str, validate: bool = True) -> RunConfig:
    values = defaults()
    seen = set()
    section = None
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"line {line_no}: malformed section header {raw_line.strip()!r}")
            section = line[1:-1].strip()
            if section not in SCHEMA:
                raise ConfigError(f"line {line_no}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {raw_line.strip()!r}")
        if section is None:
            raise ConfigError(f"line {line_no}: entry outside any section")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in SCHEMA[section]:
            raise ConfigError(f"line {line_no}: unknown key {key!r} in [{section}]")
        if (section, key) in seen:
            raise ConfigError(f"line {line_no}: duplicate key {key!r} in [{section}]")
        seen.add((section, key))
        values[section][key] = _convert(section, key, raw, line_no)
    cfg = RunConfig(values)
    return cfg.validate() if validate else cfg


def serialize_config(cfg: RunConfig) -> str:
    blocks = []
    for section, keys in cfg.values.items():
        lines = [f"[{section}]"]
        lines += [f"{key} = {_format(value)}" for key, value in keys.items()]
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def load_config(path=None) -> RunConfig:
    if path is None:
        return RunConfig(defaults()).validate()
    with open(path) as fh:
        return parse_config(fh.read())
