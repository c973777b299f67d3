from dataclasses import dataclass, field
from typing import Optional

from django.utils import timezone

from symrad import __version__


@dataclass
class RunManifest:
    """What a run or sweep produced and from which configuration."""

    command: str
    config_digest: str
    duration_seconds: float
    workers: int
    outputs: dict = field(default_factory=dict)
    sweep_param: Optional[str] = None
    sweep_values: list = field(default_factory=list)
    version: str = __version__
    created_at: str = field(default_factory=lambda: timezone.now().isoformat())
