"""key=value configuration files.

Lines hold ``key=value`` pairs; ``#`` starts a comment; blank lines are
ignored. Recognized keys (all optional):

    classes            comma-separated class names
    input_resolution   network input size (default 224)
    norm_mean          three comma-separated floats (default 0.485,0.456,0.406)
    norm_std           three comma-separated floats (default 0.229,0.224,0.225)
    port               HTTP port (default 8080; env LOSTNET_PORT overrides)
    top_k              default number of search matches (default 5)
    freeze_epochs, freeze_batch, unfreeze_epochs, unfreeze_batch,
    init_lr, min_lr, momentum, optimizer, seed   training settings
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

from .train.data import DEFAULT_CLASSES, DEFAULT_NORM_MEAN, DEFAULT_NORM_STD
from .train.loop import TrainConfig

DEFAULT_PORT = 8080


class ConfigError(ValueError):
    pass


def parse_config_file(path) -> dict[str, str]:
    values: dict[str, str] = {}
    for ln, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{ln}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def _floats(value: str, n: int, key: str) -> tuple[float, ...]:
    parts = tuple(float(p) for p in value.split(","))
    if len(parts) != n:
        raise ConfigError(f"{key} needs {n} comma-separated values, got {value!r}")
    return parts


@dataclass
class AppConfig:
    classes: tuple[str, ...] = DEFAULT_CLASSES
    input_resolution: int = 224
    norm_mean: tuple[float, ...] = DEFAULT_NORM_MEAN
    norm_std: tuple[float, ...] = DEFAULT_NORM_STD
    port: int = DEFAULT_PORT
    top_k: int = 5
    raw: dict[str, str] = field(default_factory=dict)

    @property
    def num_classes(self) -> int:
        return len(self.classes)

    @classmethod
    def load(cls, path=None) -> "AppConfig":
        raw = parse_config_file(path) if path else {}
        cfg = cls(raw=raw)
        if "classes" in raw:
            cfg.classes = tuple(c.strip() for c in raw["classes"].split(",") if c.strip())
            if not cfg.classes:
                raise ConfigError("classes must name at least one class")
        if "input_resolution" in raw:
            cfg.input_resolution = int(raw["input_resolution"])
        if "norm_mean" in raw:
            cfg.norm_mean = _floats(raw["norm_mean"], 3, "norm_mean")
        if "norm_std" in raw:
            cfg.norm_std = _floats(raw["norm_std"], 3, "norm_std")
        if "top_k" in raw:
            cfg.top_k = int(raw["top_k"])
        env_port = os.environ.get("LOSTNET_PORT")
        if env_port:
            cfg.port = int(env_port)
        elif "port" in raw:
            cfg.port = int(raw["port"])
        return cfg

    def train_config(self, seed: int | None = None) -> TrainConfig:
        raw = self.raw
        kwargs = {}
        for key, cast in (
            ("freeze_epochs", int),
            ("freeze_batch", int),
            ("unfreeze_epochs", int),
            ("unfreeze_batch", int),
            ("init_lr", float),
            ("min_lr", float),
            ("freeze_lr_scale", float),
            ("momentum", float),
            ("optimizer", str),
            ("seed", int),
        ):
            if key in raw:
                kwargs[key] = cast(raw[key])
        if seed is not None:
            kwargs["seed"] = seed
        return TrainConfig(**kwargs)
