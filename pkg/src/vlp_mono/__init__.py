"""Monocular visible-light positioning against one shaped LED luminaire."""

from .estimator import MonocularLocalizer
from .exceptions import (
    BehindCameraError,
    CollinearError,
    ConfigError,
    ConvergenceError,
    DegenerateImageError,
    GeometryError,
    ImplausibleDepthError,
    InsufficientFeaturesError,
    VLPError,
)
from .geometry import (
    PAPER_ROOM,
    PAPER_TRANSMITTER,
    Circle,
    FeatureSet,
    Rectangle,
    RoomConfig,
    TransmitterModel,
    WorldPoint,
    default_features,
    virtual_point_grid,
)
from .localization import (
    LocalizationResult,
    Observation,
    SphereConstraint,
    estimate_depth_scale,
    feature_distance,
    least_squares_multilaterate,
    localize,
    trilaterate_planar,
)
from .projection import (
    PAPER_INTRINSICS,
    CameraIntrinsics,
    GaussianNoise,
    ImagePoint,
    NoNoise,
    QuantizeNoise,
    apply_noise,
    image_distance,
    project,
)
from .simulation import CdfSeries, PointResult, ScenarioConfig, build_cdf, compute_metrics, run_scenario

__version__ = "0.1.0"
