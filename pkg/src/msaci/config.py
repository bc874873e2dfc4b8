"""Experiment configuration: dataclasses plus a versioned INI-style file format.

Example::

    [meta]
    version = 1

    [data]
    path = data/demand_temperature.csv
    timestamp = Datetime
    demand = Demand
    temperature = Temperature

    [window]
    p_lags = 24
    horizon = 5
    exogenous = temperature, week, weekday, hour

    [train]
    size = 477
    size_unit = values     ; or pairs
    ridge = gcv            ; or a fixed nonnegative number
    gcv_min = 1e-4
    gcv_max = 1e4
    gcv_points = 25
    refit = online         ; or frozen

    [aci]
    eps = 0.1, 0.1, 0.1, 0.1, 0.1
    gamma = 0.005          ; a single value is broadcast over the horizon
    clamp = true
    adaptive = true

    [output]
    dir = out/example1
    seed = 0
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .aci import AciConfig
from .errors import ConfigError
from .ingest import DEFAULT_SCHEMA, WindowConfig
from .ridge import GcvGrid

CONFIG_VERSION = 1
DEFAULT_CEILING = 1.0 - 1e-9
GENERATORS = ("iid-gaussian", "ar1", "mean-shift", "trend")


@dataclass
class ExperimentConfig:
    window: WindowConfig
    eps: tuple[float, ...]
    gamma: tuple[float, ...]
    train_size: int
    size_unit: str = "values"  # "values": raw history length; "pairs": complete training pairs
    data_path: Optional[str] = None
    schema: dict = field(default_factory=lambda: dict(DEFAULT_SCHEMA))
    ridge: Optional[float] = None  # None: tune by GCV
    gcv_grid: GcvGrid = field(default_factory=GcvGrid.logspace)
    refit: str = "online"
    clamp: bool = True
    ceiling: float = DEFAULT_CEILING
    adaptive: bool = True
    output_dir: Optional[str] = None
    seed: int = 0
    generator: str = "iid-gaussian"
    steps: int = 500

    def __post_init__(self):
        h = self.window.horizon
        if len(self.gamma) == 1:
            self.gamma = tuple(self.gamma) * h
        if len(self.eps) == 1:
            self.eps = tuple(self.eps) * h
        self.eps = tuple(float(e) for e in self.eps)
        self.gamma = tuple(float(g) for g in self.gamma)
        if len(self.eps) != h or len(self.gamma) != h:
            raise ConfigError(f"eps and gamma need {h} entries (horizon), got {len(self.eps)} and {len(self.gamma)}")
        if any(g <= 0 for g in self.gamma):
            raise ConfigError(f"learning rates must be > 0, got {self.gamma}")
        if not all(0 < e < 1 for e in self.eps):
            raise ConfigError(f"target levels must lie in (0, 1), got {self.eps}")
        if self.size_unit not in ("values", "pairs"):
            raise ConfigError(f"size_unit must be 'values' or 'pairs', got {self.size_unit!r}")
        if self.size_unit == "pairs" and self.train_size < 1:
            raise ConfigError("need at least one training pair")
        if self.size_unit == "values" and self.train_size < self.window.p_lags + self.window.horizon:
            raise ConfigError(
                f"train size {self.train_size} < p_lags + horizon = {self.window.p_lags + self.window.horizon}"
            )
        if self.refit not in ("online", "frozen"):
            raise ConfigError(f"refit must be 'online' or 'frozen', got {self.refit!r}")
        if self.ridge is not None and self.ridge < 0:
            raise ConfigError(f"ridge parameter must be >= 0, got {self.ridge}")
        if self.generator not in GENERATORS:
            raise ConfigError(f"unknown generator {self.generator!r}; choose from {GENERATORS}")
        if self.steps < 1:
            raise ConfigError("steps must be >= 1")

    @property
    def h(self) -> int:
        return self.window.horizon

    @property
    def history_length(self) -> int:
        """Raw values available before the first forecast."""
        if self.size_unit == "pairs":
            return self.train_size + self.window.p_lags + self.window.horizon - 1
        return self.train_size

    def aci_config(self) -> AciConfig:
        return AciConfig(self.eps, self.gamma, clamp_ceiling=self.ceiling)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def _floats(s: str) -> tuple[float, ...]:
    return tuple(float(v) for v in s.replace(";", ",").split(",") if v.strip())


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {s!r}")


def parse_config(text: str, overrides: Iterable[str] = (), base_dir: Path | None = None) -> ExperimentConfig:
    """Parse config text; ``overrides`` are ``section.key=value`` strings."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    for ov in overrides:
        try:
            key, value = ov.split("=", 1)
            section, option = key.strip().split(".", 1)
        except ValueError:
            raise ConfigError(f"override must look like section.key=value, got {ov!r}") from None
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section, option, value.strip())

    version = cp.getint("meta", "version", fallback=CONFIG_VERSION)
    if version != CONFIG_VERSION:
        raise ConfigError(f"unsupported config version {version}")

    def get(section, key, default=None):
        return cp.get(section, key, fallback=default)

    try:
        exog = tuple(f.strip() for f in get("window", "exogenous", "").split(",") if f.strip())
        window = WindowConfig(int(get("window", "p_lags", 24)), int(get("window", "horizon", 5)), exog)

        ridge_raw = get("train", "ridge", "gcv").strip().lower()
        ridge = None if ridge_raw == "gcv" else float(ridge_raw)
        grid = GcvGrid.logspace(
            float(get("train", "gcv_min", 1e-4)),
            float(get("train", "gcv_max", 1e4)),
            int(get("train", "gcv_points", 25)),
        )

        schema = dict(DEFAULT_SCHEMA)
        for key in ("timestamp", "demand", "temperature"):
            if cp.has_option("data", key):
                schema[key] = cp.get("data", key) or None
        data_path = get("data", "path") or None
        if data_path and base_dir is not None and not Path(data_path).is_absolute():
            for root in (base_dir, base_dir.parent):
                if (root / data_path).exists():
                    data_path = str(root / data_path)
                    break

        if "aci" not in cp or not cp.has_option("aci", "eps"):
            raise ConfigError("[aci] eps is required")
        return ExperimentConfig(
            window=window,
            eps=_floats(cp.get("aci", "eps")),
            gamma=_floats(get("aci", "gamma", "0.005")),
            train_size=int(get("train", "size", 477)),
            size_unit=get("train", "size_unit", "values").strip(),
            data_path=data_path,
            schema=schema,
            ridge=ridge,
            gcv_grid=grid,
            refit=get("train", "refit", "online").strip(),
            clamp=_bool(get("aci", "clamp", "true")),
            ceiling=float(get("aci", "ceiling", DEFAULT_CEILING)),
            adaptive=_bool(get("aci", "adaptive", "true")),
            output_dir=get("output", "dir") or None,
            seed=int(get("output", "seed", 0)),
            generator=get("synth", "generator", "iid-gaussian").strip(),
            steps=int(get("synth", "steps", 500)),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path, overrides: Iterable[str] = ()) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, overrides, base_dir=path.parent)


def dump_config(cfg: ExperimentConfig) -> str:
    """Resolved config in the same file format; parse_config(dump_config(c)) == c."""
    grid = cfg.gcv_grid.values
    join = lambda xs: ", ".join(repr(float(x)) for x in xs)  # noqa: E731
    sections = {
        "meta": {"version": CONFIG_VERSION},
        "data": {
            "path": cfg.data_path or "",
            **{k: (v or "") for k, v in cfg.schema.items()},
        },
        "window": {
            "p_lags": cfg.window.p_lags,
            "horizon": cfg.window.horizon,
            "exogenous": ", ".join(cfg.window.exogenous_features),
        },
        "train": {
            "size": cfg.train_size,
            "size_unit": cfg.size_unit,
            "ridge": "gcv" if cfg.ridge is None else repr(float(cfg.ridge)),
            "gcv_min": repr(grid[0]),
            "gcv_max": repr(grid[-1]),
            "gcv_points": len(grid),
            "refit": cfg.refit,
        },
        "aci": {
            "eps": join(cfg.eps),
            "gamma": join(cfg.gamma),
            "clamp": str(cfg.clamp).lower(),
            "ceiling": repr(cfg.ceiling),
            "adaptive": str(cfg.adaptive).lower(),
        },
        "synth": {"generator": cfg.generator, "steps": cfg.steps},
        "output": {"dir": cfg.output_dir or "", "seed": cfg.seed},
    }
    lines = []
    for name, items in sections.items():
        lines.append(f"[{name}]")
        lines += [f"{k} = {v}" for k, v in items.items()]
        lines.append("")
    return "\n".join(lines)
