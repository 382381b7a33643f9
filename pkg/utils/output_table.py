"""
OutputTable - fixed column schema, '#' metadata header, CSV with 17 significant digits.

Rows are dicts; missing columns are filled with NaN so every row has the same width.
"""
import hashlib
import json
import logging
import os
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, TextIO

import numpy as np
import pandas as pd

from config.config import TOOL_VERSION

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"

# Column schemas per command
COLUMNS = {
    "qcb": ["t", "xi_bar_nats", "r_qcb", "r_corrected", "r_discretized", "f_delta_continuous"],
    "holevo": ["t", "delta", "f_delta", "r_exact", "chi_at_f", "stderr", "mode", "reached"],
    "gaussian": ["t", "r_qcb", "r_quadratic", "r_exact", "decoherence_factor", "gaussian_decoherence", "onset"],
    "band": ["t", "r_band_analytic", "r_gaussian_smalltime", "r_asymptote", "r_corrected", "r_discretized", "r_exact"],
    "bloch-mesh": ["theta", "phi", "xi"],
}


def config_hash(payload: Dict[str, Any]) -> str:
    """sha256 of the canonical JSON (sorted keys, no whitespace) of a resolved config."""
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def generated_timestamp() -> str:
    """ISO-8601 UTC; SOURCE_DATE_EPOCH pins it for reproducible files."""
    epoch = os.getenv("SOURCE_DATE_EPOCH")
    when = datetime.fromtimestamp(int(epoch), tz=timezone.utc) if epoch else datetime.now(timezone.utc)
    return when.replace(microsecond=0).isoformat()


class OutputTable:
    def __init__(self, command: str, columns: Optional[List[str]] = None):
        self.command = command
        self.columns = list(columns if columns is not None else COLUMNS[command])
        self.rows: List[Dict[str, Any]] = []
        self.metadata: Dict[str, Any] = {"command": command}

    def append_row(self, row: Dict[str, Any]):
        """Append row, fill missing cols with NaN."""
        unknown = set(row) - set(self.columns)
        if unknown:
            raise KeyError(f"columns not in the {self.command} schema: {sorted(unknown)}")
        self.rows.append({col: row.get(col, np.nan) for col in self.columns})

    def add_metadata(self, **items):
        self.metadata.update(items)

    def stamp(self, resolved_config: Dict[str, Any], seed: int):
        self.add_metadata(
            config_hash=config_hash(resolved_config),
            seed=seed,
            tool_version=TOOL_VERSION,
            generated=generated_timestamp(),
        )

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=self.columns)

    def render(self) -> str:
        header = "".join(f"# {key}: {value}\n" for key, value in self.metadata.items())
        body = self.to_frame().to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        return header + body

    def write(self, out: Optional[str] = None, stream: TextIO = None):
        text = self.render()
        if out:
            path = Path(out)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8")
            logger.info("💾 wrote %d rows to %s", len(self.rows), path)
        else:
            (stream or sys.stdout).write(text)

    def __len__(self):
        return len(self.rows)


def read_table(path: str) -> pd.DataFrame:
    """Load an emitted CSV, skipping the metadata lines."""
    return pd.read_csv(path, comment="#")
