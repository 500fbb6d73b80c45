"""Experiment configuration management."""

from functools import lru_cache
from pathlib import Path
from typing import Literal, Optional, Tuple, Union
import math

import orjson
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PositiveInt,
    ValidationError,
    field_validator,
    model_validator,
)
from pydantic_settings import BaseSettings, SettingsConfigDict

from rimsa.errors import ConfigError

Vec3 = Tuple[float, float, float]


def dbm_to_mw(dbm: float) -> float:
    """Convert a power in dBm to milliwatts."""
    return 10.0 ** (dbm / 10.0)


class UserRegion(BaseModel):
    """Axis-aligned user sampling rectangle at a fixed height."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    z: float

    @model_validator(mode="after")
    def _check_bounds(self) -> "UserRegion":
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError("user_region requires min <= max on both axes")
        return self


class SystemConfig(BaseModel):
    """
    Array geometry, user population, powers and fading parameters.

    Every other component reads its dimensions from here.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    # Geometry
    n_ex: PositiveInt
    n_ey: PositiveInt
    n_rx: PositiveInt
    n_ry: PositiveInt
    k_users: PositiveInt
    wavelength: float = Field(gt=0)
    element_spacing: Optional[float] = Field(default=None, gt=0)  # None -> wavelength / 2
    bs_position: Vec3
    user_region: UserRegion
    enforce_square_aperture: bool = True

    # Fading
    rician_k: float = Field(default=10.0, ge=0)
    pathloss_ref: float = Field(default=1e-4, gt=0)
    pathloss_exp: float = Field(default=2.2, gt=0)

    # Powers (dBm)
    p_pilot_dbm: float = 15.0
    p_data_dbm: float = 20.0
    noise_ul_dbm: float = -100.0
    noise_dl_dbm: float = -80.0

    pilot_len: PositiveInt
    n_blocks_per_episode: PositiveInt = 1

    @model_validator(mode="after")
    def _check_pilots(self) -> "SystemConfig":
        if self.pilot_len < self.k_users:
            raise ValueError(
                f"pilot_len ({self.pilot_len}) must be >= k_users ({self.k_users}) "
                "for orthogonal pilots"
            )
        return self

    @property
    def n_e(self) -> int:
        return self.n_ex * self.n_ey

    @property
    def n_r(self) -> int:
        return self.n_rx * self.n_ry

    @property
    def n_t(self) -> int:
        return self.n_e * self.n_r

    @property
    def aperture_x(self) -> int:
        """Elements along the first aperture axis."""
        return self.n_ex * self.n_rx

    @property
    def aperture_y(self) -> int:
        return self.n_ey * self.n_ry

    @property
    def d_r(self) -> float:
        return self.element_spacing if self.element_spacing is not None else self.wavelength / 2

    @property
    def p_pilot_mw(self) -> float:
        return dbm_to_mw(self.p_pilot_dbm)

    @property
    def p_data_mw(self) -> float:
        return dbm_to_mw(self.p_data_dbm)

    @property
    def noise_ul_mw(self) -> float:
        return dbm_to_mw(self.noise_ul_dbm)

    @property
    def noise_dl_mw(self) -> float:
        return dbm_to_mw(self.noise_dl_dbm)

    def reference_distance(self) -> float:
        """Distance from the RIMSA to the centre of the user region."""
        r = self.user_region
        centre = ((r.x_min + r.x_max) / 2, (r.y_min + r.y_max) / 2, r.z)
        return math.dist(centre, self.bs_position)


class ControllerConfig(BaseModel):
    """Neural controller dimensions and freeze protocol."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    n_p: PositiveInt = 64
    n_layers: PositiveInt = 6
    heads: PositiveInt = 4
    ffn_expansion: PositiveInt = 4
    max_seq: PositiveInt = 64
    residual_stages: int = 4
    freeze_backbone: bool = True
    st_heads: PositiveInt = 4
    phase_hidden: PositiveInt = 1024
    channel_hidden: PositiveInt = 2048
    se_reduction: PositiveInt = 16
    pooling: Literal["mean", "last"] = "mean"
    channel_scale: Optional[float] = Field(default=None, gt=0)
    init_std: float = Field(default=0.02, gt=0)
    seed: int = Field(default=0, ge=0)

    @field_validator("residual_stages")
    @classmethod
    def _four_stages(cls, value: int) -> int:
        if value != 4:
            raise ValueError("residual_stages must be 4")
        return value

    @model_validator(mode="after")
    def _check_heads(self) -> "ControllerConfig":
        if self.n_p % self.heads:
            raise ValueError(f"n_p ({self.n_p}) must be divisible by heads ({self.heads})")
        return self


class TrainConfig(BaseModel):
    """Optimizer, schedule and loss-weight hyperparameters."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    epochs: PositiveInt = 500
    lr_max: float = Field(default=3e-4, gt=0)
    lr_min: float = Field(default=1e-5, gt=0)
    betas: Tuple[float, float] = (0.9, 0.999)
    eps: float = Field(default=1e-8, gt=0)
    weight_decay: float = Field(default=1e-6, ge=0)
    grad_clip: float = Field(default=1.0, gt=0)
    accum_steps: PositiveInt = 4
    batch_size: int = Field(default=32, ge=2)  # BatchNorm needs two samples
    early_stop_patience: PositiveInt = 20
    lambda_pre: float = Field(default=0.1, ge=0)
    lambda_rate_max: float = Field(default=1.0, ge=0)
    warmup_fraction: float = Field(default=0.5, gt=0, le=1)
    rise_fraction: float = Field(default=0.3, gt=0, lt=1)
    utility: Literal["sum", "maxmin"] = "sum"
    softmin_temperature: float = Field(default=10.0, gt=0)
    max_steps: Optional[PositiveInt] = None
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _check_lr(self) -> "TrainConfig":
        if not self.lr_min < self.lr_max:
            raise ValueError(f"lr_min ({self.lr_min}) must be < lr_max ({self.lr_max})")
        return self


class DataConfig(BaseModel):
    """Dataset sizes; the split ratios follow a 10000/2000/5000 layout."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    n_train: PositiveInt = 512
    val_ratio: float = Field(default=0.2, gt=0)
    test_ratio: float = Field(default=0.5, gt=0)
    seed: int = Field(default=0, ge=0)

    def split_sizes(self, n_train: Optional[int] = None) -> Tuple[int, int, int]:
        n = self.n_train if n_train is None else n_train
        return n, max(1, round(n * self.val_ratio)), max(1, round(n * self.test_ratio))


class ExperimentConfig(BaseModel):
    """One file, one experiment: system, controller, training and data sections."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    system: SystemConfig
    controller: ControllerConfig = ControllerConfig()
    training: TrainConfig = TrainConfig()
    data: DataConfig = DataConfig()

    @model_validator(mode="after")
    def _check_cross_section(self) -> "ExperimentConfig":
        width = 2 * self.system.n_r
        if width % self.controller.st_heads:
            raise ValueError(
                f"2*n_r ({width}) must be divisible by controller.st_heads "
                f"({self.controller.st_heads})"
            )
        if self.system.pilot_len // 2 > self.controller.max_seq:
            raise ValueError(
                f"pooled pilot length {self.system.pilot_len // 2} exceeds "
                f"controller.max_seq ({self.controller.max_seq})"
            )
        return self

    def dump(self, path: Union[str, Path]) -> None:
        """Write the configuration back as JSON (same schema as load_config)."""
        Path(path).write_bytes(
            orjson.dumps(self.model_dump(mode="json"), option=orjson.OPT_INDENT_2)
        )


def _describe_validation_error(err: ValidationError) -> str:
    lines = []
    for item in err.errors():
        key = ".".join(str(p) for p in item["loc"])
        if item["type"] == "missing":
            lines.append(f"missing key '{key}'")
        else:
            lines.append(f"invalid value for '{key}': {item['msg']}")
    return "; ".join(lines)


def parse_config(data: dict, source: str = "<dict>") -> ExperimentConfig:
    """Validate a raw mapping into an ExperimentConfig."""
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"{source}: {_describe_validation_error(e)}") from e


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """Load and validate a JSON experiment configuration file."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e

    try:
        data = orjson.loads(raw)
    except orjson.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e

    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top-level value must be an object")
    return parse_config(data, source=str(path))


class Settings(BaseSettings):
    """Process-level settings with environment variable support."""

    model_config = SettingsConfigDict(
        env_prefix="RIMSA_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    config: Optional[str] = None  # default experiment config path
    log_level: str = "INFO"
    log_json: bool = False
    run_slow: bool = False


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
