"""
Run configuration files.

A config file is YAML with optional top-level sections `model`, `train`,
`window`, `synthetic` and `split`, plus an optional `preset` (`pie` or `jaad`)
choosing the base values of the model and train sections:

    preset: pie
    model:
      recurrent_kind: ugru
      streams: {pseudo_image: true, jcd: true, bbox: true, speed: true}
    train:
      epochs: 30
      batch_size: 8
"""
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml

from .errors import ConfigError
from .fileio import atomic_write_text
from .models import ModelConfig, SplitConfig, SyntheticConfig, TrainConfig, WindowSpec

logger = logging.getLogger(__name__)

SECTIONS = ("model", "train", "window", "synthetic", "split")
PRESETS = ("pie", "jaad")


def _coerce(section: str, key: str, default: Any, value: Any) -> Any:
    """YAML reads exponents without a dot (5e-5) as strings; flag mappings merge into the base"""
    if isinstance(default, dict) and isinstance(value, dict):
        return {**default, **value}
    if isinstance(default, float) and isinstance(value, (int, str)) and not isinstance(value, bool):
        try:
            return float(value)
        except ValueError:
            raise ConfigError([f"{section}.{key} must be a number, got '{value}'"], source="config") from None
    return value


@dataclass(frozen=True)
class RunConfig:
    model: ModelConfig = field(default_factory=ModelConfig.pie)
    train: TrainConfig = field(default_factory=TrainConfig.pie)
    window: WindowSpec = field(default_factory=WindowSpec)
    synthetic: SyntheticConfig = field(default_factory=SyntheticConfig)
    split: SplitConfig = field(default_factory=SplitConfig)
    preset: str = "pie"

    def with_seed(self, seed: int) -> 'RunConfig':
        """Same run with every seeded component reseeded"""
        return replace(
            self,
            model=replace(self.model, seed=seed),
            train=replace(self.train, seed=seed),
            synthetic=replace(self.synthetic, seed=seed),
            split=replace(self.split, seed=seed),
        )

    def check(self) -> 'RunConfig':
        problems = []
        for name in SECTIONS:
            problems.extend(f"{name}: {p}" for p in getattr(self, name).validate())
        if problems:
            raise ConfigError(problems, source="config")
        return self

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {'preset': self.preset}
        data.update({name: getattr(self, name).to_dict() for name in SECTIONS})
        return data

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> 'RunConfig':
        data = dict(data or {})
        if not all(isinstance(k, str) for k in data):
            raise ConfigError(["top-level keys must be strings"], source="config")
        unknown = sorted(set(data) - set(SECTIONS) - {'preset'})
        if unknown:
            raise ConfigError([f"unknown section(s) {unknown}, expected {list(SECTIONS)}"], source="config")
        preset = data.pop('preset', 'pie')
        if preset not in PRESETS:
            raise ConfigError([f"preset must be one of {PRESETS}, got '{preset}'"], source="config")

        bases = {
            'model': getattr(ModelConfig, preset)(),
            'train': getattr(TrainConfig, preset)(),
            'window': WindowSpec(),
            'synthetic': SyntheticConfig(),
            'split': SplitConfig(),
        }
        if preset == "jaad":
            bases['synthetic'] = SyntheticConfig(speed_present=False)

        sections: Dict[str, Any] = {}
        for name, base in bases.items():
            section = data.get(name) or {}
            if not isinstance(section, dict):
                raise ConfigError([f"section '{name}' must be a mapping"], source="config")
            merged = base.to_dict()
            merged.update({key: _coerce(name, key, merged.get(key), value) for key, value in section.items()})
            try:
                sections[name] = type(base).from_dict(merged)
            except TypeError as e:
                raise ConfigError([f"{name}: {e}"], source="config") from e
        config = cls(preset=preset, **sections)
        try:
            return config.check()
        except TypeError as e:
            raise ConfigError([f"wrongly typed value: {e}"], source="config") from e


def load_config(path: Union[str, Path, None]) -> RunConfig:
    """Defaults when `path` is None"""
    if path is None:
        return RunConfig().check()
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding='utf-8'))
    except yaml.YAMLError as e:
        raise ConfigError([f"invalid YAML: {e}"], source=str(path)) from e
    if data is not None and not isinstance(data, dict):
        raise ConfigError(["config file must hold a mapping"], source=str(path))
    try:
        config = RunConfig.from_dict(data)
    except ConfigError as e:
        raise ConfigError(e.violations, source=str(path)) from e
    logger.debug(f"Loaded config from {path} (preset {config.preset})")
    return config


def dump_config(config: RunConfig) -> str:
    return yaml.safe_dump(config.to_dict(), sort_keys=False)


def save_config(config: RunConfig, path: Union[str, Path]) -> None:
    atomic_write_text(path, dump_config(config))
