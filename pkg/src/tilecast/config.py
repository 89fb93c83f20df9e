"""Scenario configuration: `key = value` lines, `#` comments.

Times are seconds, with an optional trailing ``m`` for minutes; data
rates are kbit/s at this boundary and converted to bit/s internally.

Example::

    synthetic   = 7, 2048, 2048, 40    # seed, width, height, objects
    tile_w      = 256
    tile_h      = 256
    levels      = 5
    data_rates  = 22, 88, 176          # kbit/s
    t_TRlimits  = 3m, 10m, 30m
    mu_t_hum    = 30
    t_hum_cap   = 5m
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .annotate import DetectorModel
from .codestream import MAX_LEVELS


class ConfigError(ValueError):
    """A scenario configuration file is invalid."""


@dataclass(frozen=True)
class SyntheticSpec:
    seed: int
    width: int
    height: int
    objects: int


@dataclass
class ScenarioConfig:
    """Fully validated scenario grid description."""

    image_path: Optional[str]
    synthetic: Optional[SyntheticSpec]
    ground_truth: Optional[str]
    tile_w: int
    tile_h: int
    levels: int
    data_rates_kbps: tuple[float, ...]
    t_tr_limits_s: tuple[float, ...]
    mu_t_hum: float
    t_hum_cap: float
    baseline_human_budget: int
    seed: int
    detector: DetectorModel
    detections_path: Optional[str]
    object_size: tuple[int, int]
    tile_size_estimate: str
    charge_index_bytes: bool
    compute_delay: float
    iou_threshold: float = 0.1


def _parse_seconds(value: str, where: str) -> float:
    value = value.strip()
    factor = 1.0
    if value.endswith("m"):
        factor = 60.0
        value = value[:-1].strip()
    try:
        return float(value) * factor
    except ValueError:
        raise ConfigError(f"{where}: bad time value {value!r}") from None


def _parse_list(value: str):
    return [v.strip() for v in value.split(",") if v.strip()]


def parse_config(path) -> ScenarioConfig:
    """Parse and validate a scenario configuration file."""
    raw: dict[str, tuple[str, int]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}: line {lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key in raw:
                raise ConfigError(f"{path}: line {lineno}: duplicate key {key!r}")
            raw[key] = (value, lineno)

    known = {
        "image", "synthetic", "ground_truth", "object_size",
        "tile_w", "tile_h", "levels",
        "data_rates", "t_TRlimits", "mu_t_hum", "t_hum_cap",
        "baseline_human_budget", "seed",
        "detect_p", "detect_conf", "detect_sigma", "detect_jitter",
        "detect_fp_rate", "detections",
        "tile_size_estimate", "charge_index_bytes", "compute_delay",
        "iou_threshold",
    }
    for key, (_, lineno) in raw.items():
        if key not in known:
            raise ConfigError(f"{path}: line {lineno}: unknown key {key!r}")

    def where(key):
        return f"{path}: line {raw[key][1]}"

    def get_int(key, default=None, minimum=None, maximum=None):
        if key not in raw:
            return default
        try:
            v = int(raw[key][0])
        except ValueError:
            raise ConfigError(f"{where(key)}: bad integer {raw[key][0]!r}") from None
        if minimum is not None and v < minimum:
            raise ConfigError(f"{where(key)}: {key} must be >= {minimum}")
        if maximum is not None and v > maximum:
            raise ConfigError(f"{where(key)}: {key} must be <= {maximum}")
        return v

    def get_float(key, default=None, minimum=None):
        if key not in raw:
            return default
        try:
            v = float(raw[key][0])
        except ValueError:
            raise ConfigError(f"{where(key)}: bad number {raw[key][0]!r}") from None
        if minimum is not None and v < minimum:
            raise ConfigError(f"{where(key)}: {key} must be >= {minimum}")
        return v

    image_path = raw["image"][0] if "image" in raw else None
    synthetic = None
    if "synthetic" in raw:
        parts = _parse_list(raw["synthetic"][0])
        if len(parts) != 4:
            raise ConfigError(
                f"{where('synthetic')}: expected 'seed, width, height, objects'"
            )
        try:
            synthetic = SyntheticSpec(*[int(p) for p in parts])
        except ValueError:
            raise ConfigError(f"{where('synthetic')}: bad integer in list") from None
        if synthetic.width < 1 or synthetic.height < 1 or synthetic.objects < 0:
            raise ConfigError(f"{where('synthetic')}: bad scene parameters")
    if image_path is None and synthetic is None:
        raise ConfigError(f"{path}: one of 'image' or 'synthetic' is required")
    if image_path is not None and synthetic is not None:
        raise ConfigError(f"{path}: 'image' and 'synthetic' are mutually exclusive")
    ground_truth = raw["ground_truth"][0] if "ground_truth" in raw else None
    if image_path is not None and ground_truth is None:
        raise ConfigError(f"{path}: 'image' requires a 'ground_truth' CSV")

    if "data_rates" not in raw:
        raise ConfigError(f"{path}: missing required key 'data_rates'")
    try:
        rates = tuple(float(v) for v in _parse_list(raw["data_rates"][0]))
    except ValueError:
        raise ConfigError(f"{where('data_rates')}: bad rate list") from None
    if not rates or any(r <= 0 for r in rates):
        raise ConfigError(f"{where('data_rates')}: rates must be positive and non-empty")

    if "t_TRlimits" not in raw:
        raise ConfigError(f"{path}: missing required key 't_TRlimits'")
    limits = tuple(
        _parse_seconds(v, where("t_TRlimits")) for v in _parse_list(raw["t_TRlimits"][0])
    )
    if not limits or any(t <= 0 for t in limits):
        raise ConfigError(f"{where('t_TRlimits')}: limits must be positive and non-empty")

    levels = get_int("levels", default=5, minimum=1, maximum=MAX_LEVELS)
    tile_w = get_int("tile_w", default=256, minimum=1, maximum=65535)
    tile_h = get_int("tile_h", default=256, minimum=1, maximum=65535)
    mu_t_hum = (
        _parse_seconds(raw["mu_t_hum"][0], where("mu_t_hum")) if "mu_t_hum" in raw else 30.0
    )
    if mu_t_hum <= 0:
        raise ConfigError(f"{where('mu_t_hum')}: mu_t_hum must be > 0")
    t_hum_cap = (
        _parse_seconds(raw["t_hum_cap"][0], where("t_hum_cap")) if "t_hum_cap" in raw else 300.0
    )
    if t_hum_cap < 0:
        raise ConfigError(f"{where('t_hum_cap')}: t_hum_cap must be >= 0")
    baseline_budget = get_int(
        "baseline_human_budget", default=int(t_hum_cap / mu_t_hum), minimum=0
    )
    seed = get_int("seed", default=0)

    object_size = (24, 64)
    if "object_size" in raw:
        parts = _parse_list(raw["object_size"][0])
        if len(parts) != 2:
            raise ConfigError(f"{where('object_size')}: expected 'min, max'")
        try:
            object_size = (int(parts[0]), int(parts[1]))
        except ValueError:
            raise ConfigError(f"{where('object_size')}: bad integer") from None
        if not 1 <= object_size[0] <= object_size[1]:
            raise ConfigError(f"{where('object_size')}: bad size range")

    default_model = DetectorModel.default(levels)
    detect_p = default_model.detect_p
    detect_conf = default_model.conf_mean
    if "detect_p" in raw:
        try:
            detect_p = tuple(float(v) for v in _parse_list(raw["detect_p"][0]))
        except ValueError:
            raise ConfigError(f"{where('detect_p')}: bad probability list") from None
        if len(detect_p) != levels:
            raise ConfigError(f"{where('detect_p')}: need one value per level ({levels})")
    if "detect_conf" in raw:
        try:
            detect_conf = tuple(float(v) for v in _parse_list(raw["detect_conf"][0]))
        except ValueError:
            raise ConfigError(f"{where('detect_conf')}: bad confidence list") from None
        if len(detect_conf) != levels:
            raise ConfigError(f"{where('detect_conf')}: need one value per level ({levels})")
    try:
        detector = DetectorModel(
            detect_p=detect_p,
            conf_mean=detect_conf,
            conf_sigma=get_float("detect_sigma", default=default_model.conf_sigma, minimum=0.0),
            jitter=get_float("detect_jitter", default=default_model.jitter, minimum=0.0),
            fp_rate=get_float("detect_fp_rate", default=default_model.fp_rate, minimum=0.0),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: invalid detector profile: {exc}") from None

    estimate = raw.get("tile_size_estimate", ("max", 0))[0]
    if estimate not in ("max", "mean"):
        raise ConfigError(f"{where('tile_size_estimate')}: must be 'max' or 'mean'")
    charge = raw.get("charge_index_bytes", ("false", 0))[0].lower()
    if charge not in ("true", "false"):
        raise ConfigError(f"{where('charge_index_bytes')}: must be true or false")
    compute_delay = (
        _parse_seconds(raw["compute_delay"][0], where("compute_delay"))
        if "compute_delay" in raw
        else 0.0
    )
    if compute_delay < 0:
        raise ConfigError(f"{where('compute_delay')}: compute_delay must be >= 0")
    iou_threshold = get_float("iou_threshold", default=0.1)
    if not 0 < iou_threshold <= 1:
        raise ConfigError(f"{where('iou_threshold')}: must be in (0, 1]")

    return ScenarioConfig(
        image_path=image_path,
        synthetic=synthetic,
        ground_truth=ground_truth,
        tile_w=tile_w,
        tile_h=tile_h,
        levels=levels,
        data_rates_kbps=rates,
        t_tr_limits_s=limits,
        mu_t_hum=mu_t_hum,
        t_hum_cap=t_hum_cap,
        baseline_human_budget=baseline_budget,
        seed=seed,
        detector=detector,
        detections_path=raw["detections"][0] if "detections" in raw else None,
        object_size=object_size,
        tile_size_estimate=estimate,
        charge_index_bytes=charge == "true",
        compute_delay=compute_delay,
        iou_threshold=iou_threshold,
    )
