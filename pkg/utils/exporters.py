import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

import pandas as pd
from pydantic import BaseModel

from models.errors import OutputError
from schemas.results import SWEEP_COLUMNS, CheckRow, SweepRow

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _prepare(path: PathLike) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputError(f"cannot create output directory: {e}", str(path.parent))
    return path


def sweep_frame(rows: Iterable[SweepRow]) -> pd.DataFrame:
    frame = pd.DataFrame([row.as_record() for row in rows], columns=SWEEP_COLUMNS)
    return frame.sort_values("instance-id", kind="stable").reset_index(drop=True)


def checks_frame(rows: Iterable[CheckRow]) -> pd.DataFrame:
    columns = ["instance_id", "check", "value", "bound", "passed", "detail"]
    frame = pd.DataFrame([row.model_dump() for row in rows], columns=columns)
    return frame.sort_values(["instance_id", "check"], kind="stable").reset_index(drop=True)


def write_csv(frame: pd.DataFrame, path: PathLike) -> Path:
    """CSV body only; anything time-dependent belongs in the sidecar"""
    path = _prepare(path)
    try:
        frame.to_csv(path, index=False, float_format="%.12g")
    except OSError as e:
        raise OutputError(f"cannot write CSV: {e}", str(path))
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def write_json(payload: Union[BaseModel, Dict[str, Any], List[Any]], path: PathLike) -> Path:
    path = _prepare(path)
    if isinstance(payload, BaseModel):
        text = payload.model_dump_json(indent=2)
    else:
        text = json.dumps(payload, indent=2, default=str)
    try:
        path.write_text(text)
    except OSError as e:
        raise OutputError(f"cannot write JSON: {e}", str(path))
    return path


def meta_path(path: PathLike) -> Path:
    path = Path(path)
    return path.with_name(f"{path.stem}.meta.json")


def write_meta(
        path: PathLike,
        parameters: Dict[str, Any],
        started_at: datetime,
        events: Optional[List[Dict[str, Any]]] = None
) -> Path:
    """Sidecar <name>.meta.json with the parameters, timestamps and run events"""
    return write_json({
        "parameters": parameters,
        "started_at": started_at.isoformat(),
        "finished_at": datetime.now(timezone.utc).isoformat(),
        "events": events or []
    }, meta_path(path))
