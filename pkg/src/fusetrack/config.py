"""Tracker configuration and the key=value config file format.

A config file holds one ``key = value`` pair per line; ``#`` starts a
comment. Recognized keys and their defaults:

    features            = hog            comma list: hog, cn, gray, external:PATH
    region_area_factor  = 5.0            search region side = factor * sqrt(w*h)
    canonical_side      = 224            patch resolution fed to extractors
    scale_count         = 5              number of scale hypotheses (odd)
    scale_step          = 1.02           relative factor between hypotheses
    learning_rate       = 0.01           exponential sample-weight decay
    sigma_factor        = 0.0625         label width / target side
    mu_min              = 0.1            penalty floor at target center
    eta                 = 3.0            penalty growth away from center
    first_frame_iters   = 50             solver iterations on the first frame
    frame_iters         = 5              solver iterations per later frame
    tol                 = 1e-6           solver relative-residual stop
    hog_cell            = 4
    cn_cell             = 4
    gray_cell           = 4
    cn_table            = (shipped)      path to a color-name table
"""

from __future__ import annotations

from dataclasses import dataclass, field

__all__ = ["ConfigError", "FeatureSpec", "TrackerConfig", "parse_config", "load_config"]

KINDS = ("hog", "cn", "gray", "external")


class ConfigError(ValueError):
    """Malformed configuration file or invalid parameter combination."""


@dataclass
class FeatureSpec:
    kind: str
    cell: int = 4
    path: str | None = None  # FMAP file for kind == "external"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown feature kind {self.kind!r}")
        if self.kind == "external" and not self.path:
            raise ConfigError("external feature needs a file path (external:PATH)")


@dataclass
class TrackerConfig:
    features: list = field(default_factory=lambda: [FeatureSpec("hog")])
    region_area_factor: float = 5.0
    canonical_side: int = 224
    scale_count: int = 5
    scale_step: float = 1.02
    learning_rate: float = 0.01
    sigma_factor: float = 1.0 / 16.0
    mu_min: float = 0.1
    eta: float = 3.0
    first_frame_iters: int = 50
    frame_iters: int = 5
    tol: float = 1e-6
    cn_table: str | None = None

    def __post_init__(self):
        if not self.features:
            raise ConfigError("at least one feature is required")
        if self.scale_count < 1 or self.scale_count % 2 == 0:
            raise ConfigError("scale_count must be odd and positive")
        if self.scale_step <= 1.0:
            raise ConfigError("scale_step must exceed 1")
        if self.region_area_factor <= 0:
            raise ConfigError("region_area_factor must be positive")
        if self.canonical_side < 4:
            raise ConfigError("canonical_side too small")
        if not 0 < self.learning_rate < 1:
            raise ConfigError("learning_rate must lie in (0, 1)")
        if self.first_frame_iters < 1 or self.frame_iters < 1:
            raise ConfigError("solver iteration counts must be >= 1")


_FLOAT_KEYS = {
    "region_area_factor",
    "scale_step",
    "learning_rate",
    "sigma_factor",
    "mu_min",
    "eta",
    "tol",
}
_INT_KEYS = {"canonical_side", "scale_count", "first_frame_iters", "frame_iters"}
_CELL_KEYS = {"hog_cell", "cn_cell", "gray_cell"}


def parse_feature_list(text: str, cells: dict) -> list:
    specs = []
    for token in [t.strip() for t in text.split(",") if t.strip()]:
        if token.startswith("external:"):
            specs.append(FeatureSpec("external", path=token.split(":", 1)[1]))
        elif token in ("hog", "cn", "gray"):
            specs.append(FeatureSpec(token, cell=cells[f"{token}_cell"]))
        else:
            raise ConfigError(f"unknown feature token {token!r}")
    if not specs:
        raise ConfigError("feature list is empty")
    return specs


def parse_config(text: str) -> TrackerConfig:
    kwargs = {}
    cells = {"hog_cell": 4, "cn_cell": 4, "gray_cell": 4}
    feature_text = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            if key == "features":
                feature_text = value
            elif key in _FLOAT_KEYS:
                kwargs[key] = float(value)
            elif key in _INT_KEYS:
                kwargs[key] = int(value)
            elif key in _CELL_KEYS:
                cells[key] = int(value)
            elif key == "cn_table":
                kwargs[key] = value
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    if feature_text is not None:
        kwargs["features"] = parse_feature_list(feature_text, cells)
    return TrackerConfig(**kwargs)


def load_config(path: str) -> TrackerConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
