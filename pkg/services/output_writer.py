"""Result files of one command run, plus the manifest that reproduces it."""

import hashlib
import json
import logging
import math
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel

from config import TOOL_VERSION
from models.manifest.manifest_models import RunManifest
from services.errors import InvalidInputError, OutputError

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
NON_FINITE = {math.inf: "inf", -math.inf: "-inf"}


def to_jsonable(value: Any) -> Any:
    """Plain JSON types; non-finite floats become "inf", "-inf" or "nan"."""
    if isinstance(value, BaseModel):
        return {k: to_jsonable(getattr(value, k)) for k in type(value).model_fields}
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, datetime):
        return value.isoformat()
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        x = float(value)
        if math.isnan(x):
            return "nan"
        return NON_FINITE.get(x, x)
    return value


def dumps(payload: Any) -> str:
    return json.dumps(to_jsonable(payload), indent=2) + "\n"


def _restore(value: Any) -> Any:
    if isinstance(value, dict):
        return {k: _restore(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_restore(v) for v in value]
    if value in ("inf", "-inf", "nan"):
        return float(value)
    return value


def read_json(path: Union[str, Path]) -> Any:
    with open(path, encoding="utf-8") as f:
        return _restore(json.load(f))


def read_table(path: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(path, encoding="utf-8")


def sha256_of(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


class OutputWriter:
    """Writes a run's files into ``out_dir``.

    Used as a context manager: on an exception every file written so far is
    removed; on success the manifest is written last.
    """

    def __init__(
        self,
        out_dir: Union[str, Path],
        command: str,
        argv: Sequence[str],
        parameters: Dict[str, Any],
        base_seed: Optional[int] = None,
        output_format: str = "json",
    ):
        if output_format not in ("json", "csv"):
            raise InvalidInputError(f"format must be json or csv, got {output_format!r}")
        self.out_dir = Path(out_dir)
        self.format = output_format
        self.written: List[Path] = []
        self.manifest = RunManifest(
            command=command,
            argv=list(argv),
            parameters=to_jsonable(parameters),
            base_seed=base_seed,
            tool_version=TOOL_VERSION,
            started_at=datetime.now(timezone.utc),
        )

    def __enter__(self) -> "OutputWriter":
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise OutputError(f"cannot create output directory {self.out_dir}: {exc}")
        return self

    def __exit__(self, exc_type, exc, tb) -> bool:
        if exc_type is not None:
            self.discard()
            return False
        try:
            self.finish()
        except Exception:
            self.discard()
            raise
        return False

    def _target(self, name: str) -> Path:
        path = self.out_dir / name
        if path in self.written:
            raise OutputError(f"{name} written twice in one run")
        return path

    def _write(self, name: str, text: str) -> Path:
        path = self._target(name)
        self.written.append(path)
        try:
            path.write_text(text, encoding="utf-8")
        except OSError as exc:
            raise OutputError(f"cannot write {path}: {exc}")
        logger.info("wrote %s", path)
        return path

    def write_json(self, stem: str, payload: Any) -> Path:
        return self._write(f"{stem}.json", dumps(payload))

    def write_table(self, stem: str, rows: List[Dict[str, Any]]) -> Path:
        """One row per cell/point; column order follows the first row."""
        frame = pd.DataFrame([to_jsonable(r) for r in rows])
        return self._write(f"{stem}.csv", frame.to_csv(index=False, lineterminator="\n"))

    def write_data(self, stem: str, payload: Any, rows: List[Dict[str, Any]]) -> Path:
        """Write ``rows`` as CSV or ``payload`` as JSON, per the run's format."""
        if self.format == "csv":
            return self.write_table(stem, rows)
        return self.write_json(stem, payload)

    def write_text(self, name: str, text: str) -> Path:
        return self._write(name, text)

    def write_file(self, name: str, writer: Callable[[Path], Any]) -> Path:
        """Track a file produced by ``writer(path)``, e.g. a dataset export."""
        path = self._target(name)
        self.written.append(path)
        try:
            writer(path)
        except OSError as exc:
            raise OutputError(f"cannot write {path}: {exc}")
        logger.info("wrote %s", path)
        return path

    def finish(self) -> RunManifest:
        outputs = {p.name: sha256_of(p) for p in self.written}
        self.manifest = self.manifest.model_copy(
            update={"finished_at": datetime.now(timezone.utc), "outputs": outputs}
        )
        self._write(MANIFEST_NAME, dumps(self.manifest))
        return self.manifest

    def discard(self) -> None:
        for path in self.written:
            try:
                path.unlink()
            except FileNotFoundError:
                pass
            except OSError as exc:
                logger.warning("could not remove partial output %s: %s", path, exc)
        if self.written:
            logger.warning("removed %d partial output files", len(self.written))
        self.written = []
