import os
from contextlib import contextmanager
from typing import Dict, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, field_validator

load_dotenv()


def _float_env(name, default):
    return float(os.environ.get(name) or default)


class Config:
    # Runtime
    THREADS = int(os.environ.get('CANTOR_ATLAS_THREADS') or 4)
    LOG_LEVEL = os.environ.get('CANTOR_ATLAS_LOG_LEVEL') or 'INFO'
    OUTPUT_DIR = os.environ.get('CANTOR_ATLAS_OUTPUT_DIR') or 'out'
    SEED = int(os.environ.get('CANTOR_ATLAS_SEED') or 0)

    # Report schema
    SCHEMA_VERSION = 'cantor-atlas/1'

    # Sphere charts: |z| > CHART_SWITCH is stored as 1/z
    CHART_SWITCH = 2.0

    # Root finding
    ROOT_MAX_ITER = 500
    ROOT_RESIDUAL = _float_env('CANTOR_ATLAS_ROOT_RESIDUAL', 1e-10)
    ROOT_CLUSTER_RADIUS = 1e-7
    MAX_DEGREE = 16
    COPRIME_TOL = 1e-8

    # Fixed point classification band around |multiplier| = 1
    INDIFFERENT_BAND = 1e-6

    # Orbits
    TRAP_RADIUS = _float_env('CANTOR_ATLAS_TRAP_RADIUS', 1e-2)
    MAX_ITER = int(os.environ.get('CANTOR_ATLAS_MAX_ITER') or 10_000)
    TRUNCATION_BOUND = 1e3
    LANDING_TOL = 1e-9

    # Simple domains
    DOMAIN_SAMPLES = 256
    DOMAIN_MARGIN = 1e-6
    DOMAIN_MIN_RADIUS = 1e-6
    DOMAIN_BISECTIONS = 30

    # Path lifting
    LIFT_TOL = _float_env('CANTOR_ATLAS_LIFT_TOL', 1e-8)
    STEP_FLOOR = 1e-5
    NEWTON_STEPS = 5
    SHEET_GUARD = 0.3
    CRITICAL_PROXIMITY = 1e-6
    CRITICAL_VALUE_AVOIDANCE = 1e-4
    MAX_GAP = 0.05
    MATCH_RATIO = 10.0

    # Curves and cuts
    CORRIDOR = 1e-3
    GRAZING_TOL = 1e-6
    WINDING_BAND = 0.01
    LASSO_RADIUS = 0.1
    CURVE_SAMPLES = 256
    NESTING_MARGIN = 1e-4

    # Rendering
    JULIA_CAP = 200
    RENDER_WIDTH = int(os.environ.get('CANTOR_ATLAS_RENDER_WIDTH') or 400)
    RENDER_HEIGHT = int(os.environ.get('CANTOR_ATLAS_RENDER_HEIGHT') or 400)
    RENDER_VIEWPORT = (-2.5, 2.5, -2.5, 2.5)

    # Certificates
    TUBE_MARGIN = 0.05
    TUBE_MIN_WIDTH = 1e-3
    CENSUS_LEVELS = 6
    CLAIM3_MAX_LENGTH = 6
    GROWTH_SAMPLES = 10_000
    FINITENESS_MAX_POINTS = 16

    # Allowed range for tolerance overrides
    TOLERANCE_FLOOR = 1e-14
    TOLERANCE_CEILING = 1e-2


# Tolerances a run may override, mapped to their Config attribute
OVERRIDABLE = {
    'root_residual': 'ROOT_RESIDUAL',
    'cluster_radius': 'ROOT_CLUSTER_RADIUS',
    'trap_radius': 'TRAP_RADIUS',
    'lift_tol': 'LIFT_TOL',
    'critical_proximity': 'CRITICAL_PROXIMITY',
    'critical_value_avoidance': 'CRITICAL_VALUE_AVOIDANCE',
    'corridor': 'CORRIDOR',
    'grazing_tol': 'GRAZING_TOL',
    'winding_band': 'WINDING_BAND',
    'domain_margin': 'DOMAIN_MARGIN',
    'nesting_margin': 'NESTING_MARGIN',
    'tube_min_width': 'TUBE_MIN_WIDTH',
}


class RunConfig(BaseModel):
    """Per-invocation settings validated at the command boundary"""
    model_config = ConfigDict(frozen=True)

    output: Optional[str] = None
    seed: int = Config.SEED
    threads: int = Field(default=Config.THREADS, ge=1, le=256)
    tolerances: Dict[str, float] = Field(default_factory=dict)

    @field_validator('tolerances')
    @classmethod
    def check_tolerances(cls, value):
        for name, tol in value.items():
            if name not in OVERRIDABLE:
                raise ValueError(f"unknown tolerance '{name}'")
            if not (Config.TOLERANCE_FLOOR <= tol <= Config.TOLERANCE_CEILING):
                raise ValueError(
                    f"tolerance {name}={tol} outside [{Config.TOLERANCE_FLOOR}, {Config.TOLERANCE_CEILING}]")
        return value

    def to_dict(self):
        return {'seed': self.seed, 'threads': self.threads, 'tolerances': dict(sorted(self.tolerances.items()))}

    @contextmanager
    def applied(self):
        """Install the overrides on Config for the duration of a run"""
        saved = {attr: getattr(Config, attr) for attr in OVERRIDABLE.values()}
        saved['THREADS'] = Config.THREADS
        saved['SEED'] = Config.SEED
        try:
            for name, tol in self.tolerances.items():
                setattr(Config, OVERRIDABLE[name], tol)
            Config.THREADS = self.threads
            Config.SEED = self.seed
            yield self
        finally:
            for attr, value in saved.items():
                setattr(Config, attr, value)
