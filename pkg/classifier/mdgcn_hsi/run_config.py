"""Resolved run configuration: every knob of one pipeline run, JSON round-trippable.

A run writes its resolved configuration next to its outputs; reading that
file back (``--config``) reproduces the run exactly with the same seed.
"""

import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Optional

from .cmdline import format_variant, parse_scales, parse_variant
from .constants import (
    DEFAULT_ALPHA,
    DEFAULT_BETA,
    DEFAULT_COMPACTNESS,
    DEFAULT_GAMMA,
    DEFAULT_HIDDEN,
    DEFAULT_ITERATIONS,
    DEFAULT_LAYERS,
    DEFAULT_LEARNING_RATE,
    DEFAULT_LOG_EVERY,
    DEFAULT_PER_CLASS,
    DEFAULT_SCALES,
    DEFAULT_SEED,
    DEFAULT_SLIC_ITERS,
    DEFAULT_VAL_FRACTION,
    VARIANT_MDGCN,
)
from .errors import ConfigError
from .train import TrainConfig


@dataclass(frozen=True)
class RunConfig:
    # Paths
    cube: Optional[str] = None
    labels: Optional[str] = None
    split: Optional[str] = None
    out: str = "."
    palette: Optional[str] = None
    # Label sampling
    per_class: int = DEFAULT_PER_CLASS
    val_fraction: float = DEFAULT_VAL_FRACTION
    # Superpixels; k=None means ceil(H*W / 100)
    k: Optional[int] = None
    m: float = DEFAULT_COMPACTNESS
    slic_iters: int = DEFAULT_SLIC_ITERS
    # Graphs and network
    gamma: float = DEFAULT_GAMMA
    scales: tuple = DEFAULT_SCALES
    layers: int = DEFAULT_LAYERS
    hidden: int = DEFAULT_HIDDEN
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    # Optimisation
    iters: int = DEFAULT_ITERATIONS
    lr: float = DEFAULT_LEARNING_RATE
    variant: str = VARIANT_MDGCN
    seed: int = DEFAULT_SEED
    log_every: int = DEFAULT_LOG_EVERY

    def __post_init__(self):
        scales = self.scales
        if isinstance(scales, str):
            scales = parse_scales(scales)
        object.__setattr__(self, "scales", tuple(int(s) for s in scales))
        object.__setattr__(self, "variant", format_variant(*parse_variant(self.variant)))

    @classmethod
    def from_dict(cls, values):
        """Build from a mapping; missing keys take the defaults, unknown keys are an error."""
        unknown = set(values) - set(cls.DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown configuration key(s): {sorted(unknown)}")
        return cls(**values)

    def to_dict(self):
        out = asdict(self)
        out["scales"] = list(self.scales)
        return out

    def updated(self, **changes):
        return replace(self, **changes)

    def train_config(self):
        return TrainConfig(
            iterations=self.iters,
            learning_rate=self.lr,
            scales=self.scales,
            layers=self.layers,
            hidden=self.hidden,
            alpha=self.alpha,
            beta=self.beta,
            seed=self.seed,
            variant=self.variant,
            log_every=self.log_every,
        )


RunConfig.DEFAULTS = {f.name: f.default for f in fields(RunConfig)}


def read_run_config(path):
    """Merge a saved JSON document over :attr:`RunConfig.DEFAULTS`."""
    try:
        with open(path) as f:
            saved = json.load(f)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(saved, dict):
        raise ConfigError(f"{path}: expected a JSON object, got {type(saved).__name__}")
    try:
        return RunConfig.from_dict(saved)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def write_run_config(config, path):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(config.to_dict(), f, indent=2)
