"""key=value pipeline configuration with CLI-flag overrides.

Config files are flat `key = value` lines; blank lines and #-comments are
ignored. Every key can also be set by the corresponding CLI flag, which wins.
See the README for a complete example.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

from .classifier import TrainConfig
from .errors import ParseError
from .metrics import CostTable, Track1Weights


def parse_kv(text: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ParseError(f"line {lineno}: empty key")
        if key in values:
            raise ParseError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def load_kv(path) -> dict[str, str]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_kv(fh.read())


@dataclass
class PipelineConfig:
    """Everything the CLI commands need, file values overridden by flags."""

    # paths
    manifest: str | None = None
    features: str | None = None
    grids: str | None = None
    model: str | None = None
    classmap: str | None = None
    submission: str | None = None
    history: str | None = None
    report: str | None = None
    scatter: str | None = None
    # training
    seed: int = 0
    batch_size: int = 64
    epochs: int = 20
    lr: float = 1e-3
    val_fraction: float = 0.2
    feature_kind: str = "cls"
    # dct compression
    block_size: int = 8
    grid_rows: int = 256
    grid_cols: int = 768
    # metrics
    c_correct: float = 0.0
    c_wrong_hh: float = 1.0
    c_wrong_vv: float = 2.0
    c_h_as_v: float = 2.0
    c_v_as_h: float = 5.0
    w_f1: float = 1.0
    w_venom_kept: float = 1.0
    w_harmless_kept: float = 1.0
    # eda
    classes: str | None = None  # comma-separated class_id filter

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            seed=self.seed,
            batch_size=self.batch_size,
            epochs=self.epochs,
            lr=self.lr,
            val_fraction=self.val_fraction,
            feature_kind=self.feature_kind,
        )

    def cost_table(self) -> CostTable:
        return CostTable(
            c_correct=self.c_correct,
            c_wrong_hh=self.c_wrong_hh,
            c_wrong_vv=self.c_wrong_vv,
            c_h_as_v=self.c_h_as_v,
            c_v_as_h=self.c_v_as_h,
        )

    def track1_weights(self) -> Track1Weights:
        return Track1Weights(
            w_f1=self.w_f1,
            w_venom_kept=self.w_venom_kept,
            w_harmless_kept=self.w_harmless_kept,
        )

    def class_filter(self) -> list[int] | None:
        if self.classes is None or not self.classes.strip():
            return None
        try:
            return [int(tok) for tok in self.classes.split(",") if tok.strip()]
        except ValueError:
            raise ParseError(f"classes must be comma-separated integers, got {self.classes!r}")


_FIELD_TYPES = {f.name: f.type for f in fields(PipelineConfig)}


def _coerce(key: str, value: str):
    ftype = _FIELD_TYPES[key]
    try:
        if ftype == "int":
            return int(value)
        if ftype == "float":
            return float(value)
    except ValueError:
        raise ParseError(f"config key {key!r}: expected {ftype}, got {value!r}") from None
    return value


def build_config(file_values: dict[str, str] | None, overrides: dict) -> PipelineConfig:
    """Defaults, then config-file values, then non-None CLI overrides."""
    cfg = PipelineConfig()
    for key, raw in (file_values or {}).items():
        if key not in _FIELD_TYPES:
            raise ParseError(f"unknown config key {key!r}")
        setattr(cfg, key, _coerce(key, raw))
    for key, value in overrides.items():
        if value is not None:
            setattr(cfg, key, value)
    return cfg
