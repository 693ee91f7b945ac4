"""Service configuration: flags, environment variables, startup checks."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

from ..adjacency import DEFAULT_GAP_THRESHOLD, DEFAULT_MIN_MATCH
from ..mastery import MASTERY_THRESHOLD

ENV_PREFIX = "GENETUTOR_"


@dataclass
class HintPolicy:
    """Service-level hint behavior knobs (defaults match the tutoring rules)."""

    escalate: bool = True      # repeated requests climb the hint chain
    log_events: bool = True    # hint events go to the session log for replay


@dataclass
class ServiceConfig:
    port: int = 8000
    data_dir: Path = Path("data")
    problems_dir: Path | None = None       # defaults to <data_dir>/problems
    ui_dir: Path | None = None             # built frontend to serve at /ui
    gap_threshold: int = DEFAULT_GAP_THRESHOLD
    min_match: int = DEFAULT_MIN_MATCH
    mastery_threshold: float = MASTERY_THRESHOLD
    hint_policy: HintPolicy = field(default_factory=HintPolicy)

    @property
    def resolved_problems_dir(self) -> Path:
        return self.problems_dir if self.problems_dir is not None \
            else self.data_dir / "problems"

    @classmethod
    def from_env(cls, environ: dict[str, str] | None = None) -> ServiceConfig:
        """Build a config from GENETUTOR_* environment variables."""
        env = os.environ if environ is None else environ
        config = cls()
        if value := env.get(f"{ENV_PREFIX}PORT"):
            config.port = int(value)
        if value := env.get(f"{ENV_PREFIX}DATA_DIR"):
            config.data_dir = Path(value)
        if value := env.get(f"{ENV_PREFIX}PROBLEMS_DIR"):
            config.problems_dir = Path(value)
        if value := env.get(f"{ENV_PREFIX}GAP_THRESHOLD"):
            config.gap_threshold = int(value)
        return config

    def check(self) -> None:
        """Fail fast on an unusable configuration; creates the data layout."""
        if not 1 <= self.port <= 65535:
            raise ValueError(f"port {self.port} outside [1, 65535]")
        if self.gap_threshold < 0:
            raise ValueError("gap_threshold must be >= 0")
        self.data_dir.mkdir(parents=True, exist_ok=True)
        probe = self.data_dir / ".write-probe"
        try:
            probe.write_text("ok")
        finally:
            probe.unlink(missing_ok=True)
        self.resolved_problems_dir.mkdir(parents=True, exist_ok=True)
