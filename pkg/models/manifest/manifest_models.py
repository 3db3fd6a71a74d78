from datetime import datetime
from typing import Any, Dict, List, Optional

from pydantic import BaseModel


class RunManifest(BaseModel):
    """Written next to every output set; re-running ``argv`` reproduces the run."""

    command: str
    argv: List[str]
    parameters: Dict[str, Any]
    base_seed: Optional[int] = None
    tool_version: str
    started_at: datetime
    finished_at: Optional[datetime] = None
    outputs: Dict[str, str] = {}
