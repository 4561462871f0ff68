"""
Adapter for trajectory data kept in a spreadsheet.

Reads the first sheet by default (or the one passed as ``sheet``) through
pandas with the openpyxl engine.  Header handling and column selection are
the same as for CSV files.
"""

from __future__ import annotations

from typing import Optional, Union

import pandas as pd

from .base_adapter import BaseTrajectoryAdapter


class ExcelTrajectoryAdapter(BaseTrajectoryAdapter):
    """Adapter for ``.xlsx``/``.xlsm``/``.xls`` trajectory files."""

    supported_extensions = ['.xlsx', '.xlsm', '.xls']

    def __init__(self, sheet: Optional[Union[str, int]] = None) -> None:
        super().__init__()
        self.sheet = 0 if sheet is None else sheet

    def _read_table(self, path: str) -> pd.DataFrame:
        return pd.read_excel(path, sheet_name=self.sheet, header=None, dtype=str)
