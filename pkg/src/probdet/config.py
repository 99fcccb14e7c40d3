"""Run configuration: one nested schema shared by every command.

A config is a JSON document with one section per subsystem.  Unknown keys
are rejected so that a typo cannot silently fall back to a default.  The
full config is embedded verbatim in every artifact (dataset, checkpoint,
report) for provenance.
"""

from __future__ import annotations

import copy
import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path


class ConfigError(ValueError):
    """Invalid or unknown configuration content."""


@dataclass
class PyramidConfig:
    strides: list[int] = field(default_factory=lambda: [2, 4, 8])
    # one (min, max] extent range per level; final max of null means unbounded
    size_ranges: list[list[float | None]] = field(
        default_factory=lambda: [[0, 16], [16, 32], [32, None]]
    )
    base_scale: float = 4.0  # canonical cell box side, in cells, for loose labeling

    def validate(self) -> None:
        if len(self.strides) != len(self.size_ranges):
            raise ConfigError("pyramid: strides and size_ranges must align")
        if any(s <= 0 for s in self.strides):
            raise ConfigError("pyramid: strides must be positive")
        if list(self.strides) != sorted(set(self.strides)):
            raise ConfigError("pyramid: strides must be strictly increasing")
        lo = 0.0
        for i, (mn, mx) in enumerate(self.size_ranges):
            if float(mn) != lo:
                raise ConfigError("pyramid: size_ranges must partition (0, inf)")
            if mx is None:
                if i != len(self.size_ranges) - 1:
                    raise ConfigError("pyramid: only the last range may be unbounded")
                lo = math.inf
            else:
                if float(mx) <= float(mn):
                    raise ConfigError("pyramid: empty size range")
                lo = float(mx)
        if lo != math.inf:
            raise ConfigError("pyramid: last size range must be unbounded (max null)")
        if self.base_scale <= 0:
            raise ConfigError("pyramid: base_scale must be positive")


@dataclass
class FeatureConfig:
    length: int = 16
    sig_length: int = 8
    noise: float = 0.5       # per-object signature perturbation scale
    ray_cells: float = 6.0   # boundary probe length, in cells of the level stride
    window_cells: float = 3.0  # side of the coverage/moment window, in cells

    def validate(self) -> None:
        if self.sig_length < 1:
            raise ConfigError("features: sig_length must be >= 1")
        if self.length != self.sig_length + 8:
            raise ConfigError("features: length must equal sig_length + 8")
        if self.noise < 0:
            raise ConfigError("features: noise must be >= 0")
        if self.ray_cells <= 0 or self.window_cells <= 0:
            raise ConfigError("features: ray_cells and window_cells must be positive")


@dataclass
class DataConfig:
    num_scenes: int = 48
    scene_size: list[int] = field(default_factory=lambda: [64, 64])
    num_classes: int = 8
    skew: float = 0.0                 # power-law exponent over class ranks
    objects_per_scene: list[int] = field(default_factory=lambda: [4, 8])
    object_extent: list[float] = field(default_factory=lambda: [6.0, 28.0])
    federated_fraction: float = 1.0   # probability an absent class is still annotated
    min_separation: float = 2.0       # required gap between placed objects
    seed: int = 7

    def validate(self, pyramid: PyramidConfig) -> None:
        if self.num_scenes < 0:
            raise ConfigError("data: num_scenes must be >= 0")
        if self.num_classes < 1:
            raise ConfigError("data: need at least one class")
        h, w = self.scene_size
        if h <= 0 or w <= 0:
            raise ConfigError("data: scene_size must be positive")
        for s in pyramid.strides:
            if h % s or w % s:
                raise ConfigError(f"data: scene_size must be divisible by stride {s}")
        lo, hi = self.objects_per_scene
        if lo < 0 or hi < lo:
            raise ConfigError("data: objects_per_scene range invalid")
        emin, emax = self.object_extent
        if emin <= 0 or emax < emin:
            raise ConfigError("data: object_extent range invalid")
        if emax > min(h, w):
            raise ConfigError("data: largest object does not fit in the scene")
        if not 0.0 <= self.federated_fraction <= 1.0:
            raise ConfigError("data: federated_fraction must lie in [0, 1]")
        if self.min_separation < 0:
            raise ConfigError("data: min_separation must be >= 0")


@dataclass
class ModelConfig:
    kind: str = "two_stage"           # two_stage | one_stage
    cascade_thresholds: list[float] = field(default_factory=lambda: [0.6])
    score_mode: str = "probabilistic"  # probabilistic | nonprob
    loss_flavor: str = "softmax_ce"    # softmax_ce | federated
    max_proposals: int = 256
    proposal_nms: float = 0.7
    pre_nms_top: int = 1000
    final_nms: float = 0.5
    score_threshold: float = 0.05
    max_detections: int = 100
    focal_gamma: float = 2.0
    focal_alpha: float = 0.25
    fed_subset_size: int = 50
    # relative weights of the two jointly optimized background terms:
    # dense first-stage negatives and objectness-weighted second-stage bg
    bg_dense_weight: float = 1.0
    bg_conditional_weight: float = 1.0

    def validate(self) -> None:
        if self.kind not in ("two_stage", "one_stage"):
            raise ConfigError("model: kind must be two_stage or one_stage")
        if self.score_mode not in ("probabilistic", "nonprob"):
            raise ConfigError("model: score_mode must be probabilistic or nonprob")
        if self.loss_flavor not in ("softmax_ce", "federated"):
            raise ConfigError("model: loss_flavor must be softmax_ce or federated")
        if not self.cascade_thresholds:
            raise ConfigError("model: need at least one cascade stage")
        if list(self.cascade_thresholds) != sorted(self.cascade_thresholds):
            raise ConfigError("model: cascade_thresholds must be ascending")
        if any(not 0 < t < 1 for t in self.cascade_thresholds):
            raise ConfigError("model: cascade_thresholds must lie in (0, 1)")
        if self.max_proposals < 1 or self.pre_nms_top < 1:
            raise ConfigError("model: proposal budgets must be >= 1")
        for name, v in (("proposal_nms", self.proposal_nms), ("final_nms", self.final_nms)):
            if not 0 <= v <= 1:
                raise ConfigError(f"model: {name} must lie in [0, 1]")
        if self.fed_subset_size < 1:
            raise ConfigError("model: fed_subset_size must be >= 1")


@dataclass
class AssignmentConfig:
    mode: str = "center"              # center | recall
    neighbor_loss_max: float = 0.2    # box loss below which a neighbor cell is positive
    recall_iou: float = 0.3           # loose labeling overlap threshold

    def validate(self) -> None:
        if self.mode not in ("center", "recall"):
            raise ConfigError("assignment: mode must be center or recall")
        if not 0 < self.recall_iou < 1:
            raise ConfigError("assignment: recall_iou must lie in (0, 1)")
        if self.neighbor_loss_max <= 0:
            raise ConfigError("assignment: neighbor_loss_max must be positive")


@dataclass
class TrainerConfig:
    iterations: int = 2000
    batch_size: int = 8
    lr: float = 0.02
    momentum: float = 0.9
    lr_drops: list[int] | None = None  # defaults to 2/3 and 8/9 of the run
    drop_factor: float = 0.1
    stage1_weight: float = 0.5
    seed: int = 0

    def validate(self) -> None:
        if self.iterations < 0:
            raise ConfigError("trainer: iterations must be >= 0")
        if self.batch_size < 1:
            raise ConfigError("trainer: batch_size must be >= 1")
        if self.lr <= 0:
            raise ConfigError("trainer: lr must be positive")
        if not 0 <= self.momentum < 1:
            raise ConfigError("trainer: momentum must lie in [0, 1)")
        if self.lr_drops is not None:
            if list(self.lr_drops) != sorted(self.lr_drops):
                raise ConfigError("trainer: lr_drops must be ascending")
            if any(d >= self.iterations for d in self.lr_drops):
                raise ConfigError("trainer: lr_drops must precede the final iteration")

    def resolved_drops(self) -> list[int]:
        if self.lr_drops is not None:
            return list(self.lr_drops)
        return [(self.iterations * 2) // 3, (self.iterations * 8) // 9]


@dataclass
class EvalConfig:
    iou_thresholds: list[float] = field(
        default_factory=lambda: [round(0.5 + 0.05 * i, 2) for i in range(10)]
    )
    ar_iou: float = 0.5
    ar_budget: int = 256

    def validate(self) -> None:
        if not self.iou_thresholds:
            raise ConfigError("eval: need at least one IoU threshold")
        if any(not 0 < t <= 1 for t in self.iou_thresholds):
            raise ConfigError("eval: IoU thresholds must lie in (0, 1]")
        if self.ar_budget < 1:
            raise ConfigError("eval: ar_budget must be >= 1")


@dataclass
class ExperimentConfig:
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2, 3, 4])
    proposal_budgets: list[int] = field(default_factory=lambda: [256, 128, 64, 32, 16, 8])
    eval_seed_offset: int = 1000      # held-out twin dataset seed = data seed + offset

    def validate(self) -> None:
        if not self.seeds:
            raise ConfigError("experiment: need at least one seed")
        if not self.proposal_budgets:
            raise ConfigError("experiment: need at least one proposal budget")


_SECTIONS = {
    "pyramid": PyramidConfig,
    "features": FeatureConfig,
    "data": DataConfig,
    "model": ModelConfig,
    "assignment": AssignmentConfig,
    "trainer": TrainerConfig,
    "eval": EvalConfig,
    "experiment": ExperimentConfig,
}


@dataclass
class RunConfig:
    pyramid: PyramidConfig = field(default_factory=PyramidConfig)
    features: FeatureConfig = field(default_factory=FeatureConfig)
    data: DataConfig = field(default_factory=DataConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    assignment: AssignmentConfig = field(default_factory=AssignmentConfig)
    trainer: TrainerConfig = field(default_factory=TrainerConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)

    def validate(self) -> "RunConfig":
        self.pyramid.validate()
        self.features.validate()
        self.data.validate(self.pyramid)
        self.model.validate()
        self.assignment.validate()
        self.trainer.validate()
        self.eval.validate()
        self.experiment.validate()
        return self

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def dataset_sections(self) -> dict:
        """The sections that determine dataset content, features included."""
        d = self.to_dict()
        return {k: d[k] for k in ("pyramid", "features", "data")}

    def copy(self) -> "RunConfig":
        return copy.deepcopy(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config root must be a JSON object")
        unknown = set(data) - set(_SECTIONS)
        if unknown:
            raise ConfigError(f"unknown config section(s): {sorted(unknown)}")
        cfg = cls()
        for name, section_cls in _SECTIONS.items():
            if name in data:
                setattr(cfg, name, _section_from_dict(section_cls, data[name], name))
        return cfg.validate()

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(raw)


def _section_from_dict(section_cls, data: dict, name: str):
    if not isinstance(data, dict):
        raise ConfigError(f"config section {name!r} must be an object")
    names = {f.name for f in dataclasses.fields(section_cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"unknown key(s) in section {name!r}: {sorted(unknown)}")
    return section_cls(**data)


def apply_dataset_sections(cfg: RunConfig, sections: dict) -> RunConfig:
    """Return a copy of cfg with pyramid/features/data replaced by a dataset's
    embedded generation sections, so downstream shapes match the data."""
    out = cfg.copy()
    for name in ("pyramid", "features", "data"):
        if name in sections:
            setattr(out, name, _section_from_dict(_SECTIONS[name], sections[name], name))
    return out.validate()


def merged_overrides(cfg: RunConfig, overrides: dict[str, object]) -> RunConfig:
    """Apply dotted-path overrides such as {'trainer.seed': 3}."""
    out = cfg.copy()
    for path, value in overrides.items():
        section, _, key = path.partition(".")
        if section not in _SECTIONS or not key:
            raise ConfigError(f"unknown override target {path!r}")
        target = getattr(out, section)
        if key not in {f.name for f in dataclasses.fields(target)}:
            raise ConfigError(f"unknown override target {path!r}")
        setattr(target, key, value)
    return out.validate()
