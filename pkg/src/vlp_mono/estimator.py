"""scikit-learn estimator wrapper around :func:`vlp_mono.localization.localize`.

Each row of ``X`` is one snapshot: the centered image coordinates
``(u, v)`` in micrometers of every feature, in ``features_.labels`` order,
flattened as ``[u_A, v_A, u_B, v_B, ...]``. A NaN pair marks a feature that
was not observed in that snapshot.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import VLPError
from .geometry import PAPER_TRANSMITTER, FeatureSet, TransmitterModel, default_features
from .localization import METHOD_ALIASES, Observation, localize
from .projection import PAPER_INTRINSICS, CameraIntrinsics, ImagePoint, project


class MonocularLocalizer(TransformerMixin, BaseEstimator):
    """Camera positions from snapshots of a single known luminaire.

    Parameters
    ----------
    transmitter : TransmitterModel, optional
        The luminaire seen by the camera. Its center height is taken as the
        ceiling height. Defaults to the 1 m square light of the reference
        scenario.
    intrinsics : CameraIntrinsics, optional
        Camera calibration in micrometers.
    method : {"trilaterate", "least_squares"}
        Range solver.
    features : FeatureSet, optional
        Anchor points; ``default_features(transmitter)`` when omitted.
    on_error : {"raise", "nan"}
        What ``predict`` does with a snapshot that cannot be localized.
    """

    def __init__(
        self,
        transmitter: TransmitterModel | None = None,
        intrinsics: CameraIntrinsics | None = None,
        method: str = "trilaterate",
        features: FeatureSet | None = None,
        on_error: str = "raise",
    ):
        self.transmitter = transmitter
        self.intrinsics = intrinsics
        self.method = method
        self.features = features
        self.on_error = on_error

    def fit(self, X=None, y=None):
        """Validate parameters. No parameters are learned from data."""
        if self.method not in METHOD_ALIASES:
            raise ValueError(f"unknown method {self.method!r}")
        if self.on_error not in ("raise", "nan"):
            raise ValueError("on_error must be 'raise' or 'nan'")
        transmitter = self.transmitter if self.transmitter is not None else PAPER_TRANSMITTER
        self.intrinsics_ = self.intrinsics if self.intrinsics is not None else PAPER_INTRINSICS
        self.features_ = self.features if self.features is not None else default_features(transmitter)
        self.ceiling_height_ = transmitter.center.z
        self.n_features_in_ = 2 * len(self.features_)
        if X is not None:
            self._validate(X)
        return self

    def _validate(self, X) -> np.ndarray:
        X = check_array(X, dtype=np.float64, ensure_all_finite="allow-nan")
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} columns, expected {self.n_features_in_}")
        return X

    def _localize_rows(self, X) -> np.ndarray:
        check_is_fitted(self, "features_")
        X = self._validate(X)
        labels = self.features_.labels
        out = np.full((X.shape[0], 5), np.nan)
        for i, row in enumerate(X):
            obs = [
                Observation(label, ImagePoint(row[2 * j], row[2 * j + 1]))
                for j, label in enumerate(labels)
                if not (np.isnan(row[2 * j]) or np.isnan(row[2 * j + 1]))
            ]
            try:
                res = localize(obs, self.features_, self.intrinsics_, self.ceiling_height_, self.method)
            except VLPError:
                if self.on_error == "raise":
                    raise
                continue
            out[i] = (*res.position, res.depth_scale, res.residual_rms)
        return out

    def predict(self, X) -> np.ndarray:
        """Camera positions, shape ``(n_samples, 3)``."""
        return self._localize_rows(X)[:, :3]

    def transform(self, X) -> np.ndarray:
        """Columns ``X, Y, Z, depth_scale, residual_rms``."""
        return self._localize_rows(X)

    def score(self, X, y) -> float:
        """Negative 3D RMSE against true positions ``y``, so larger is better."""
        y = check_array(y, dtype=np.float64)
        err = self.predict(X) - y
        return -float(np.sqrt(np.nanmean(np.sum(err * err, axis=1))))

    def project_positions(self, positions) -> np.ndarray:
        """Noiseless snapshot rows for camera ``positions`` (inverse of ``predict``)."""
        check_is_fitted(self, "features_")
        positions = check_array(positions, dtype=np.float64)
        if positions.shape[1] != 3:
            raise ValueError("positions must have 3 columns")
        rows = []
        for cam in positions:
            rows.append([c for _, p in self.features_ for c in project(cam, self.intrinsics_, p)])
        return np.asarray(rows, dtype=float)
