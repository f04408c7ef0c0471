"""
Run configuration: a sectioned key = value file, overridable from the command line.

Example::

    [grid]
    n = 2
    res = 64
    half_width = 2.0

    [symbol]
    id = coordinate
    j = 1

    [function]
    id = gaussian_bump
    center = 0.4, 0.25
"""

import configparser
import logging
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Dict, Optional, Union, get_args, get_origin, get_type_hints

from ..core.catalog import resolve_params
from ..core.convolution import DEFAULT_RATIO, RadiusLadder, TruncationPolicy, resolve_workers
from ..core.errors import ConfigError
from ..core.grid import Grid, NormSettings
from ..core.sphere import SphereQuadrature, sphere_quadrature
from ..core.symbols import SphereSymbol, create_symbol

logger = logging.getLogger(__name__)

__all__ = ["RunConfig", "load_run_config", "parse_literal", "resolve_workers"]

DEFAULT_P = {2: 1.5, 3: 2.0}

# section -> {key: attribute}
SECTION_KEYS = {
    "grid": {"n": "n", "res": "res", "half_width": "half_width"},
    "ladder": {"t_min": "t_min", "t_max": "t_max", "ratio": "ratio", "include_zero": "include_zero"},
    "policy": {"mode": "policy_mode", "subsamples": "subsamples"},
    "quadrature": {"order": "quad_order"},
    "norm": {"p": "p"},
    "run": {"output_dir": "output_dir", "seed": "seed", "t": "t"},
}
PARAM_SECTIONS = {"symbol": ("symbol", "symbol_params"), "function": ("function", "function_params")}


def parse_literal(text: str) -> Any:
    """Decimal literal, boolean, comma list of numbers, or bare string."""
    value = text.strip()
    lowered = value.lower()
    if lowered in ("true", "yes", "on"):
        return True
    if lowered in ("false", "no", "off"):
        return False
    if lowered in ("none", ""):
        return None
    if "," in value:
        return tuple(parse_literal(part) for part in value.split(","))
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    return value


@dataclass(frozen=True)
class RunConfig:
    """Everything a CLI run needs; ``validate`` runs before any compute."""

    n: int = 2
    res: int = 64
    half_width: float = 2.0
    symbol: str = "one"
    symbol_params: Dict[str, Any] = field(default_factory=dict)
    function: str = "gaussian"
    function_params: Dict[str, Any] = field(default_factory=dict)
    t_min: Optional[float] = None
    t_max: Optional[float] = None
    ratio: float = DEFAULT_RATIO
    include_zero: bool = False
    policy_mode: str = "overlap"
    subsamples: int = 4
    quad_order: int = 64
    p: Optional[float] = None
    t: float = 0.5
    output_dir: str = "results"
    seed: int = 0

    def with_overrides(self, **overrides) -> "RunConfig":
        """Copy with every non-None override applied."""
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown configuration field")
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def grid(self) -> Grid:
        return Grid.from_box(self.n, self.res, self.half_width)

    def symbol_obj(self) -> SphereSymbol:
        return create_symbol(self.symbol, self.n, self.symbol_params)

    def ladder(self, grid: Optional[Grid] = None) -> RadiusLadder:
        grid = grid or self.grid()
        t_min = self.t_min if self.t_min is not None else grid.h
        t_max = self.t_max if self.t_max is not None else grid.diameter
        return RadiusLadder(t_min, t_max, self.ratio, self.include_zero)

    def policy(self) -> TruncationPolicy:
        return TruncationPolicy(self.policy_mode, self.subsamples)

    def quadrature(self) -> SphereQuadrature:
        return sphere_quadrature(self.n, self.quad_order)

    def norm_settings(self) -> NormSettings:
        return NormSettings(self.p if self.p is not None else DEFAULT_P.get(self.n, 1.5), self.n)

    def validate(self) -> "RunConfig":
        """Raise ConfigError naming the first invalid field."""
        if self.n not in (2, 3):
            raise ConfigError("n", f"dimension must be 2 or 3, got {self.n}")
        checks = [
            ("res", self.grid),
            ("symbol", self.symbol_obj),
            ("function", lambda: resolve_params(self.function, self.function_params)),
            ("ladder", self.ladder),
            ("policy", self.policy),
            ("quad_order", self.quadrature),
            ("p", self.norm_settings),
        ]
        for name, build in checks:
            try:
                built = build()
            except (TypeError, ValueError) as exc:
                raise ConfigError(name, str(exc)) from exc
            if name == "ladder":
                try:
                    built.validate(self.grid())
                except (TypeError, ValueError) as exc:
                    raise ConfigError("t_min", str(exc)) from exc
        if not isinstance(self.t, (int, float)) or not self.t > 0.0:
            raise ConfigError("t", f"truncation radius must be a positive number, got {self.t!r}")
        return self

    def to_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        out["symbol_params"] = {k: _plain(v) for k, v in self.symbol_params.items()}
        out["function_params"] = {k: _plain(v) for k, v in self.function_params.items()}
        return out


def _field_kind(annotation: Any) -> Any:
    """Unwrap Optional[X] to X."""
    if get_origin(annotation) is Union:
        args = [a for a in get_args(annotation) if a is not type(None)]
        if len(args) == 1:
            return args[0]
    return annotation


def _check_type(name: str, value: Any, annotation: Any, path: str) -> None:
    kind = _field_kind(annotation)
    if value is None:
        if kind is annotation:
            raise ConfigError(name, "a value is required", path)
        return
    if kind is bool and not isinstance(value, bool):
        raise ConfigError(name, f"expected true or false, got {value!r}", path)
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise ConfigError(name, f"expected an integer, got {value!r}", path)
    if kind is float and (isinstance(value, bool) or not isinstance(value, (int, float))):
        raise ConfigError(name, f"expected a number, got {value!r}", path)


def _plain(value: Any) -> Any:
    return list(value) if isinstance(value, tuple) else value


def load_run_config(path: str, base: Optional[RunConfig] = None) -> RunConfig:
    """
    Read a sectioned config file on top of ``base`` (defaults if omitted).

    Args:
        path: Config file path
        base: Starting configuration

    Returns:
        RunConfig (not yet validated)
    """
    parser = configparser.ConfigParser()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError("config", f"cannot read config file: {exc}", path) from exc
    except configparser.Error as exc:
        raise ConfigError("config", f"malformed config file: {exc}", path) from exc

    values: Dict[str, Any] = {}
    for section in parser.sections():
        items = dict(parser.items(section))
        if section in PARAM_SECTIONS:
            id_attr, params_attr = PARAM_SECTIONS[section]
            if "id" in items:
                values[id_attr] = items.pop("id").strip()
            values[params_attr] = {k: parse_literal(v) for k, v in items.items()}
            continue
        if section not in SECTION_KEYS:
            raise ConfigError(section, "unknown config section", path)
        for key, raw in items.items():
            if key not in SECTION_KEYS[section]:
                raise ConfigError(f"{section}.{key}", "unknown config key", path)
            values[SECTION_KEYS[section][key]] = parse_literal(raw)

    config = base or RunConfig()
    hints = get_type_hints(RunConfig)
    for name, value in values.items():
        _check_type(name, value, hints[name], path)
    logger.debug("loaded %d config values from %s", len(values), path)
    return config.with_overrides(**values)
