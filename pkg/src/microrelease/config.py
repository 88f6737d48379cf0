"""Run configuration: JSON document with explicit units in key names.

Radii enter in micrometers (the experimental convention) and are converted
to normalized millimeter units internally.  Defaults reproduce the
reference wound-dressing setup: a = 3.54 mm, omega = 0, mu_R = 1 um,
sigma_R = 0.12 um, with the calibrated diffusivities d_i = 1.62e-9 and
d_out = 8.13e-2 mm^2/h.
"""
import json
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .errors import DataFormatError
from .params import SizeMoments, TransportParams, TruncationPolicy
from .quadrature import QuadratureSpec

UM_PER_MM = 1000.0

_SECTIONS = {
    "geometry": {"a_mm"},
    "particle": {"mu_R_um", "sigma_R_um", "omega"},
    "transport": {"d_in_mm2_per_h", "d_hat_mm2_per_h", "d_out_mm2_per_h"},
    "numerics": {"max_terms", "tail_tol", "t_min_h",
                 "quad_nodes", "quad_panels", "quad_nodes_2d"},
    "mc": {"samples", "seed", "hypothesis"},
    "grid": {"start_h", "stop_h", "step_h"},
}


@dataclass
class RunConfig:
    a_mm: float = 3.54
    mu_R_um: float = 1.0
    sigma_R_um: float = 0.12
    omega: float = 0.0
    d_in_mm2_per_h: float = 1.62e-9
    d_hat_mm2_per_h: float = None
    d_out_mm2_per_h: float = 8.13e-2
    max_terms: int = 200
    tail_tol: float = 1e-10
    t_min_h: float = 1e-6
    quad_nodes: int = 64
    quad_panels: int = 4
    quad_nodes_2d: int = 48
    samples: int = 10_000
    seed: int = 20230817
    hypothesis: str = "volume"
    start_h: float = 0.0
    stop_h: float = 72.0
    step_h: float = 0.5

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        cfg = cls()
        if not isinstance(doc, dict):
            raise DataFormatError("config root must be a JSON object")
        for section, content in doc.items():
            if section not in _SECTIONS:
                raise DataFormatError(f"config: unknown section {section!r}")
            if not isinstance(content, dict):
                raise DataFormatError(f"config: section {section!r} must be an object")
            for key, value in content.items():
                if key not in _SECTIONS[section]:
                    raise DataFormatError(
                        f"config: unknown field {section}.{key} "
                        f"(units belong in the key name)")
                setattr(cfg, key, value)
        if ("transport" in doc and "d_in_mm2_per_h" in doc["transport"]
                and "d_hat_mm2_per_h" in doc["transport"]):
            raise DataFormatError(
                "config: give transport.d_in_mm2_per_h or d_hat_mm2_per_h, not both")
        if cfg.d_hat_mm2_per_h is not None and (
                "transport" in doc and "d_in_mm2_per_h" not in doc.get("transport", {})):
            cfg.d_in_mm2_per_h = None
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise DataFormatError(
                    f"{path}: line {exc.lineno}: {exc.msg}") from exc
        return cls.from_dict(doc)

    def validate(self):
        checks = [
            ("geometry.a_mm", self.a_mm > 0, "must be positive"),
            ("particle.mu_R_um", self.mu_R_um > 0, "must be positive"),
            ("particle.sigma_R_um", self.sigma_R_um >= 0, "must be nonnegative"),
            ("particle.omega", 0.0 <= self.omega < 2.0, "must lie in [0, 2)"),
            ("transport.d_out_mm2_per_h", self.d_out_mm2_per_h > 0,
             "must be positive"),
            ("mc.samples", self.samples >= 1, "must be >= 1"),
            ("mc.hypothesis", self.hypothesis in ("equal", "volume"),
             "must be 'equal' or 'volume'"),
            ("grid.step_h", self.step_h > 0, "must be positive"),
            ("grid.stop_h", self.stop_h >= self.start_h,
             "must not precede start_h"),
            ("grid.start_h", self.start_h >= 0, "must be nonnegative"),
        ]
        for name, ok, msg in checks:
            if not ok:
                raise DataFormatError(f"config: {name} {msg}, "
                                      f"got {getattr(self, name.split('.')[1], None)!r}")
        if self.d_in_mm2_per_h is None and self.d_hat_mm2_per_h is None:
            raise DataFormatError("config: transport needs d_in or d_hat")

    # ---- derived objects -------------------------------------------------

    @property
    def mu_R_norm(self) -> float:
        return self.mu_R_um / UM_PER_MM

    @property
    def sigma_R_norm(self) -> float:
        return self.sigma_R_um / UM_PER_MM

    def d_hat(self) -> float:
        if self.d_hat_mm2_per_h is not None:
            return float(self.d_hat_mm2_per_h)
        return float(self.d_in_mm2_per_h) / self.mu_R_norm ** self.omega

    def transport(self) -> TransportParams:
        return TransportParams(a=self.a_mm, d_hat=self.d_hat(),
                               omega=self.omega, d_out=self.d_out_mm2_per_h,
                               r_norm=self.mu_R_norm)

    def size_moments(self) -> SizeMoments:
        return SizeMoments(mu_R=self.mu_R_norm, sigma_R=self.sigma_R_norm)

    def truncation(self) -> TruncationPolicy:
        return TruncationPolicy(max_terms=self.max_terms,
                                tail_tol=self.tail_tol, t_min=self.t_min_h)

    def quad_single(self) -> QuadratureSpec:
        return QuadratureSpec(self.quad_nodes, self.quad_panels)

    def quad_double(self) -> QuadratureSpec:
        return QuadratureSpec(self.quad_nodes_2d, self.quad_panels)

    def time_grid(self) -> np.ndarray:
        n = int(np.floor((self.stop_h - self.start_h) / self.step_h + 1e-9)) + 1
        return self.start_h + self.step_h * np.arange(n)


@dataclass
class SensitivityConfig:
    """Sweep of the radius-diffusivity exponent at fixed effective d_i."""

    omega_grid: tuple = tuple(np.arange(0.0, 2.0, 0.25))
    eval_time_h: float = 24.0
    di_targets_mm2_per_h: tuple = (1e-10, 1e-9, 1e-8)
    sigma_R_um: float = 0.24

    def __post_init__(self):
        if any(not (0.0 <= w < 2.0) for w in self.omega_grid):
            raise DataFormatError("sensitivity omega values must lie in [0, 2)")
        if not self.eval_time_h > 0:
            raise DataFormatError("sensitivity eval time must be positive")
        if not self.di_targets_mm2_per_h:
            raise DataFormatError("sensitivity needs at least one d_i target")
