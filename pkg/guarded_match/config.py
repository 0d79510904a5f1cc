"""Match configuration and named guard-toggle presets.

Environment defaults come from ``.env`` / the process environment:

- ``GMATCH_EMBEDDING_LIMIT``: stop after this many embeddings
- ``GMATCH_TIME_LIMIT``: seconds per query
- ``GMATCH_RESERVATION_SIZE``: max reservation guard size ``r``
- ``GMATCH_THREADS``: search threads
- ``GMATCH_DB_PATH``: SQLite file for stored runs (see :mod:`guarded_match.db`)
"""

from __future__ import annotations

import itertools
import os
from typing import Any, Dict, List, Literal, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field

load_dotenv()

DEFAULT_EMBEDDING_LIMIT = 100_000
DEFAULT_RESERVATION_SIZE = 3

_ENV_FIELDS = {
    "GMATCH_EMBEDDING_LIMIT": ("embedding_limit", int),
    "GMATCH_TIME_LIMIT": ("time_limit", float),
    "GMATCH_RESERVATION_SIZE": ("reservation_size", int),
    "GMATCH_THREADS": ("thread_count", int),
}


class MatchConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    embedding_limit: Optional[int] = Field(
        None, gt=0, description="Stop after this many embeddings (None: no limit)"
    )
    time_limit: Optional[float] = Field(
        None, gt=0, description="Wall-clock limit in seconds for the search"
    )
    reservation_size: int = Field(
        DEFAULT_RESERVATION_SIZE, ge=0, le=20, description="Max reservation guard size"
    )
    use_reservation: bool = True
    use_nv: bool = True
    use_ne: bool = True
    use_backjump: bool = True
    thread_count: int = Field(1, ge=1)
    emit_embeddings: bool = Field(
        False, description="Collect embeddings in the result"
    )
    seed: int = 0
    mask_width: Literal[64, 128] = 64
    debug_checks: bool = Field(
        False, description="Assert state restoration and nogood encoding"
    )

    @property
    def effective_reservation_size(self) -> int:
        return self.reservation_size if self.use_reservation else 0

    def toggles(self) -> Dict[str, bool]:
        return {
            "reservation": self.use_reservation and self.reservation_size > 0,
            "nv": self.use_nv,
            "ne": self.use_ne,
            "backjump": self.use_backjump,
        }

    def label(self) -> str:
        """Short name of the guard combination, e.g. ``all`` or ``nv+ne``."""
        on = [k for k, v in self.toggles().items() if v]
        if len(on) == 4:
            return "all"
        return "+".join(on) if on else "none"

    @classmethod
    def from_env(cls, **overrides: Any) -> "MatchConfig":
        """Environment defaults, with explicit non-None overrides winning."""
        values: Dict[str, Any] = {}
        for env, (name, cast) in _ENV_FIELDS.items():
            raw = os.getenv(env)
            if raw:
                values[name] = cast(raw)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


PRESETS: Dict[str, Dict[str, bool]] = {
    "all": {},
    "none": {
        "use_reservation": False,
        "use_nv": False,
        "use_ne": False,
        "use_backjump": False,
    },
    "no-reservation": {"use_reservation": False},
    "no-nv": {"use_nv": False},
    "no-ne": {"use_ne": False},
    "no-backjump": {"use_backjump": False},
}


def toggle_matrix(base: Optional[MatchConfig] = None) -> List[MatchConfig]:
    """All 16 on/off combinations of the four guard toggles."""
    base = base or MatchConfig()
    out = []
    for res, nv, ne, bj in itertools.product((True, False), repeat=4):
        out.append(
            base.model_copy(
                update={
                    "use_reservation": res,
                    "use_nv": nv,
                    "use_ne": ne,
                    "use_backjump": bj,
                }
            )
        )
    return out


def resolve_presets(
    names: str, base: Optional[MatchConfig] = None
) -> List[MatchConfig]:
    """Configs for a comma-separated list of preset names (``matrix`` = all 16)."""
    base = base or MatchConfig()
    out: List[MatchConfig] = []
    for name in (n.strip() for n in names.split(",")):
        if not name:
            continue
        if name == "matrix":
            out.extend(toggle_matrix(base))
        elif name in PRESETS:
            out.append(base.model_copy(update=PRESETS[name]))
        else:
            raise ValueError(f"unknown config preset {name!r}")
    return out
