"""Path handling, JSON schemas and payload writing."""

import dataclasses
from functools import lru_cache
import json
import math
import os
import sys
from typing import Any, Dict, List, Optional

from hydra.utils import to_absolute_path
import jsonschema
import numpy as np
import pandas as pd
import torch
from typeguard import typechecked

SCHEMA_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "schemas")

# columns of every sweep / power-curve csv
SWEEP_COLUMNS = ["parameter", "estimate", "stderr"]


@typechecked
def return_absolute_path(possibly_relative_path: str) -> str:
    """Return absolute path from possibly relative path.

    @hydra.main switches the cwd to an outputs/YYYY-MM-DD/HH-MM-SS folder; relative paths
    are resolved against the directory the script was launched from.

    """
    if os.path.isabs(possibly_relative_path):
        abs_path = possibly_relative_path
    else:
        abs_path = to_absolute_path(possibly_relative_path)
    if not os.path.exists(abs_path):
        raise IOError("%s is not a valid path" % abs_path)
    return abs_path


@lru_cache(maxsize=None)
def load_schema(name: str) -> Dict[str, Any]:
    path = os.path.join(SCHEMA_DIR, "%s.schema.json" % name)
    if not os.path.isfile(path):
        raise NotImplementedError("no schema named '%s' in %s" % (name, SCHEMA_DIR))
    with open(path, "r") as f:
        return json.load(f)


def validate_payload(payload: Dict[str, Any], schema_name: str) -> None:
    """Raise jsonschema.ValidationError if payload does not match the shipped schema."""
    jsonschema.validate(to_jsonable(payload), load_schema(schema_name))


def to_jsonable(obj: Any) -> Any:
    """Recursively convert dataclasses, tensors and numpy values to plain JSON types."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        if hasattr(obj, "to_dict"):
            return to_jsonable(obj.to_dict())
        return to_jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, torch.Tensor):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return to_jsonable(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        # json has no inf/nan
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def dump_json(payload: Any) -> str:
    return json.dumps(to_jsonable(payload), indent=2, sort_keys=True)


def write_text(text: str, out: Optional[str] = None) -> None:
    """Write to `out`, or to stdout when out is None."""
    if out is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    out_dir = os.path.dirname(os.path.abspath(out))
    os.makedirs(out_dir, exist_ok=True)
    with open(out, "w") as f:
        f.write(text)


def rows_to_frame(rows: List[Dict[str, Any]]) -> pd.DataFrame:
    """Sweep rows as a dataframe with the parameter, estimate, stderr columns first."""
    df = pd.DataFrame(rows)
    missing = [c for c in SWEEP_COLUMNS if c not in df.columns]
    if missing:
        raise ValueError("sweep rows are missing columns %s" % missing)
    extra = [c for c in df.columns if c not in SWEEP_COLUMNS]
    return df[SWEEP_COLUMNS + extra]


def frame_to_csv_text(df: pd.DataFrame) -> str:
    return df.to_csv(index=False, float_format="%.17g")
