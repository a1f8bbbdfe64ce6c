import enum
import json
import logging
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Union

import numpy as np
from PIL import Image

from cantor_atlas.config import Config
from cantor_atlas.models import JuliaGrid, cjson

logger = logging.getLogger(__name__)


class ReportService:
    """Versioned JSON reports and PPM images, written atomically"""

    @staticmethod
    def to_jsonable(obj: Any) -> Any:
        if hasattr(obj, 'to_dict'):
            return ReportService.to_jsonable(obj.to_dict())
        if isinstance(obj, dict):
            return {str(k): ReportService.to_jsonable(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple, set, frozenset)):
            items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
            return [ReportService.to_jsonable(v) for v in items]
        if isinstance(obj, enum.Enum):
            return obj.value
        if isinstance(obj, (complex, np.complexfloating)):
            return cjson(obj)
        if isinstance(obj, np.ndarray):
            return ReportService.to_jsonable(obj.tolist())
        if isinstance(obj, (np.bool_,)):
            return bool(obj)
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, (float, np.floating)):
            x = float(obj)
            if math.isinf(x):
                return "infinity" if x > 0 else "-infinity"
            if math.isnan(x):
                return None
            return x
        return obj

    @staticmethod
    def dumps(document: Any) -> str:
        return json.dumps(ReportService.to_jsonable(document), sort_keys=True, indent=2, allow_nan=False)

    @staticmethod
    def _atomic_write(path: Path, writer) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=f'.{path.name}.', dir=str(path.parent))
        os.close(fd)
        try:
            writer(tmp)
            os.replace(tmp, path)
        except Exception:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return path

    @staticmethod
    def emit_report(document: Any, path: Union[str, Path]) -> Path:
        """Write the document as stable JSON; a reader never sees a partial file"""
        payload = ReportService.to_jsonable(document)
        if isinstance(payload, dict):
            payload.setdefault('schema', Config.SCHEMA_VERSION)
        text = json.dumps(payload, sort_keys=True, indent=2, allow_nan=False)

        def write(tmp):
            with open(tmp, 'w', encoding='utf-8') as fh:
                fh.write(text + '\n')

        out = ReportService._atomic_write(path, write)
        logger.info("Report written to %s", out)
        return out

    @staticmethod
    def load(path: Union[str, Path]) -> dict:
        with open(path, encoding='utf-8') as fh:
            return json.load(fh)

    @staticmethod
    def palette(grid: JuliaGrid) -> np.ndarray:
        """Monotone blue ramp by escape step; capped pixels are black"""
        steps = np.minimum(grid.steps, grid.cap).astype(float)
        level = np.sqrt(1.0 - steps / grid.cap)
        rgb = np.stack([90 * level, 200 * level, 255 * level], axis=-1)
        rgb[grid.capped] = 0
        return rgb.round().astype(np.uint8)

    @staticmethod
    def write_ppm(grid: JuliaGrid, path: Union[str, Path]) -> Path:
        image = Image.fromarray(ReportService.palette(grid), mode='RGB')

        def write(tmp):
            image.save(tmp, format='PPM')

        out = ReportService._atomic_write(path, write)
        logger.info("Image written to %s (%dx%d)", out, grid.width, grid.height)
        return out
