"""Run configuration: a flat text file of ``dotted.key = value`` lines.

Values are JSON (numbers, strings, lists, true/false); anything that does
not parse as JSON is taken as a bare string. ``#`` starts a comment line.
Example::

    seed = 7
    city.rio.sw = [-23.08302, -43.795449]      # [lat, lon]
    city.rio.ne = [-22.739823, -43.087707]
    city.rio.utc_offset = -180                 # minutes
    city.rio.languages = ["pt"]
    city.rio.place_mode = containment
    preprocess.preset = topic
    lda.k = 50

Cities not named in the file come from the built-in presets; a file entry
for a preset city overrides only the keys it sets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional

from .errors import BadGeometry, ConfigError
from .geo import CITY_PRESETS, City, GeoBox, PlaceMode


def parse_config(text: str) -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or any(not part for part in key.split(".")):
            raise ConfigError(f"line {n}: bad key {key!r}")
        try:
            out[key] = json.loads(value)
        except ValueError:
            # a value followed by a trailing comment
            head = value.split(" #", 1)[0].strip()
            try:
                out[key] = json.loads(head)
            except ValueError:
                out[key] = head
    return out


@dataclass
class RunConfig:
    values: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def load(cls, path: Optional[str]) -> "RunConfig":
        if not path:
            return cls()
        try:
            with open(path, encoding="utf-8") as fh:
                return cls(parse_config(fh.read()))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc

    def get(self, key: str, default=None):
        return self.values.get(key, default)

    def override(self, **flags) -> "RunConfig":
        """Apply non-None flag values on top of the file (flags win)."""
        merged = dict(self.values)
        merged.update({k: v for k, v in flags.items() if v is not None})
        return RunConfig(merged)

    def section(self, prefix: str) -> Dict[str, Any]:
        p = prefix + "."
        return {k[len(p):]: v for k, v in self.values.items() if k.startswith(p)}

    @property
    def seed(self) -> int:
        try:
            return int(self.values.get("seed", 0))
        except (TypeError, ValueError):
            raise ConfigError("seed must be an integer") from None

    def city(self, name: str) -> City:
        own = self.section(f"city.{name}")
        base = CITY_PRESETS.get(name)
        if base is None and not own:
            raise ConfigError(f"unknown city {name!r}")
        try:
            if "sw" in own or "ne" in own:
                sw = own.get("sw") or (base.box.sw.lat, base.box.sw.lon)
                ne = own.get("ne") or (base.box.ne.lat, base.box.ne.lon)
                box = GeoBox.from_corners(tuple(sw), tuple(ne))
            elif base is not None:
                box = base.box
            else:
                raise ConfigError(f"city {name!r} needs sw and ne corners")
            offset = int(own.get("utc_offset", base.utc_offset_minutes if base else 0))
            langs = tuple(own.get("languages", base.languages if base else ()))
            mode = PlaceMode(own.get("place_mode", base.place_mode.value if base else "containment"))
        except (BadGeometry, TypeError, ValueError) as exc:
            raise ConfigError(f"city {name!r}: {exc}") from exc
        return City(name, box, offset, langs, mode)

    def effective(self) -> Dict[str, Any]:
        return dict(sorted(self.values.items()))


def typed(value, kind, key):
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected {kind.__name__}, got {value!r}") from None


def pick(cfg: RunConfig, key: str, flag, default, kind=None):
    """Flag beats config file beats default."""
    value = flag if flag is not None else cfg.get(key, default)
    return typed(value, kind, key) if kind is not None and value is not None else value


__all__ = ["RunConfig", "parse_config", "pick", "typed"]
