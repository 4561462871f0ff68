"""Trajectory file adapters, selected by file extension."""

from __future__ import annotations

import os
from typing import Dict, Type

from ..errors import TrajectoryFileError
from .base_adapter import BaseTrajectoryAdapter
from .csv_trajectory import CsvTrajectoryAdapter
from .excel_trajectory import ExcelTrajectoryAdapter

# Extend this dict to register additional trajectory formats.
ADAPTERS: Dict[str, Type[BaseTrajectoryAdapter]] = {
    ext: cls
    for cls in (CsvTrajectoryAdapter, ExcelTrajectoryAdapter)
    for ext in cls.supported_extensions
}


def adapter_for(path: str) -> BaseTrajectoryAdapter:
    ext = os.path.splitext(path)[1].lower()
    try:
        return ADAPTERS[ext]()
    except KeyError:
        raise TrajectoryFileError(
            f'No adapter for {ext or "extensionless"} files; supported: {", ".join(sorted(ADAPTERS))}'
        ) from None


__all__ = [
    'ADAPTERS',
    'BaseTrajectoryAdapter',
    'CsvTrajectoryAdapter',
    'ExcelTrajectoryAdapter',
    'adapter_for',
]
