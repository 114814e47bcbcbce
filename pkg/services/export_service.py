"""
Export Service for simulation results.
Writes diagnostics, snapshots and sweep tables as CSV files whose header
lines echo every setting needed to reproduce the run.
"""
import io
import math
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

import numpy as np
import pandas as pd

from config.settings import config
from models.simulation import Diagnostics, SimConfig
from utils.error_handler import ChemowaveError, ErrorCategory, ErrorSeverity
from utils.logger import get_logger

logger = get_logger(__name__)

DIAGNOSTIC_COLUMNS = {
    'time': 't',
    'mass': 'mass',
    'speed': 'c_est',
    'peak_x': 'peak_x',
    'peak_rho': 'peak_rho',
    'sym_err': 'sym_err',
    'min_f': 'min_f',
}


class ExportError(ChemowaveError):
    """Exception raised when export operations fail."""

    def __init__(self, message: str, **kwargs):
        kwargs.setdefault('category', ErrorCategory.OUTPUT)
        kwargs.setdefault('severity', ErrorSeverity.HIGH)
        super().__init__(message, **kwargs)


def _header_value(value: Any) -> str:
    """Render one header value so that YAML reads it back unchanged."""
    if isinstance(value, np.generic):
        value = value.item()
    if value is None:
        return 'null'
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        if math.isnan(value):
            return '.nan'
        if math.isinf(value):
            return '.inf' if value > 0 else '-.inf'
        text = repr(value)
        # YAML 1.1 floats need a fraction before the exponent
        if 'e' in text and '.' not in text:
            text = text.replace('e', '.0e')
        return text
    if isinstance(value, (list, tuple, np.ndarray)):
        return '[' + ', '.join(_header_value(item) for item in value) + ']'
    return str(value)


def _flatten(values: Dict[str, Any], prefix: str = '') -> Dict[str, Any]:
    flat = {}
    for key, value in values.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, prefix=f"{name}."))
        else:
            flat[name] = value
    return flat


class ExportService:
    """
    Service for exporting simulation results as commented CSV.
    """

    def __init__(self, output_dir: Optional[Union[str, Path]] = None):
        """
        Initialize Export Service.

        Args:
            output_dir: Target directory (defaults to the configured one)
        """
        self.output_dir = Path(output_dir or config.output.output_dir)
        self.float_format = config.output.float_format
        logger.info(f"Export Service initialized (output: {self.output_dir})")

    def header(self, metadata: Optional[Dict[str, Any]] = None) -> str:
        """
        Commented header lines ``# key: value`` with the run settings and the
        application settings.
        """
        lines = [
            f"# exported: {datetime.now().isoformat(timespec='seconds')}",
            f"# version: {config.version}",
        ]
        for key, value in _flatten(metadata or {}).items():
            lines.append(f"# {key}: {_header_value(value)}")
        for key, value in _flatten(config.to_dict(), prefix='settings.').items():
            lines.append(f"# {key}: {_header_value(value)}")
        return '\n'.join(lines) + '\n'

    def frame_to_csv(self, frame: pd.DataFrame, metadata: Optional[Dict[str, Any]] = None) -> str:
        """
        Render a DataFrame as CSV text with the settings header.

        Raises:
            ExportError: If rendering fails
        """
        try:
            output = io.StringIO()
            output.write(self.header(metadata))
            frame.to_csv(output, index=False, float_format=self.float_format)
            return output.getvalue()
        except Exception as e:
            logger.error(f"Error exporting to CSV: {e}", exc_info=True)
            raise ExportError(f"Failed to export to CSV: {e}") from e

    def write_csv(
        self,
        frame: pd.DataFrame,
        filename: str,
        metadata: Optional[Dict[str, Any]] = None
    ) -> Path:
        """
        Write one table into the output directory.

        Returns:
            Path of the written file
        """
        text = self.frame_to_csv(frame, metadata)
        path = self.output_dir / filename
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
        except OSError as e:
            raise ExportError(f"Cannot write {path}: {e}", details={'path': str(path)}) from e
        logger.info(f"Wrote {path} ({len(frame)} rows)")
        return path

    @staticmethod
    def diagnostics_frame(diagnostics: Diagnostics) -> pd.DataFrame:
        """Time series with the public column names."""
        frame = diagnostics.to_frame()
        if frame.empty:
            return pd.DataFrame(columns=list(DIAGNOSTIC_COLUMNS.values()))
        return frame[list(DIAGNOSTIC_COLUMNS)].rename(columns=DIAGNOSTIC_COLUMNS)

    @staticmethod
    def snapshots_frame(diagnostics: Diagnostics) -> pd.DataFrame:
        """All snapshots stacked, one row per (t, x)."""
        frames = []
        for snapshot in diagnostics.snapshots:
            frame = snapshot.to_frame()
            frame.insert(0, 't', snapshot.time)
            frames.append(frame)
        if not frames:
            return pd.DataFrame(columns=['t', 'x', 'rho', 'u', 'M', 'N'])
        return pd.concat(frames, ignore_index=True)

    def export_run(self, diagnostics: Diagnostics, sim_config: SimConfig) -> List[Path]:
        """
        Write the diagnostics and snapshot files of one run.

        Returns:
            Paths of the written files
        """
        metadata = sim_config.to_dict()
        metadata['aborted'] = diagnostics.aborted
        if diagnostics.abort_reason:
            metadata['abort_reason'] = diagnostics.abort_reason
        metadata['steady'] = diagnostics.steady
        metadata['run'] = diagnostics.metadata

        return [
            self.write_csv(self.diagnostics_frame(diagnostics), f"{sim_config.label}_diagnostics.csv", metadata),
            self.write_csv(self.snapshots_frame(diagnostics), f"{sim_config.label}_snapshots.csv", metadata),
        ]

    def export_table(
        self,
        rows: Iterable[Dict[str, Any]],
        filename: str,
        metadata: Optional[Dict[str, Any]] = None
    ) -> Path:
        """Write a list of result rows (sweep tables)."""
        return self.write_csv(pd.DataFrame.from_records(list(rows)), filename, metadata)
