"""
Adapter for trajectory files in CSV form.

Accepts ``t,y`` files with or without a header.  Semicolon- and
tab-separated exports are recognised from the first non-blank line, so
European-style files with decimal commas (``0,5;0,12``) work too.
"""

from __future__ import annotations

import pandas as pd

from .base_adapter import BaseTrajectoryAdapter


def _sniff_separator(path: str) -> str:
    with open(path, encoding='utf-8-sig') as fh:
        first = next((line for line in fh if line.strip()), '')
    if ';' in first:
        return ';'
    if '\t' in first:
        return '\t'
    return ','


class CsvTrajectoryAdapter(BaseTrajectoryAdapter):
    """Adapter for ``.csv`` and ``.txt`` trajectory files."""

    supported_extensions = ['.csv', '.txt']

    def _read_table(self, path: str) -> pd.DataFrame:
        return pd.read_csv(path, header=None, dtype=str, sep=_sniff_separator(path),
                           skip_blank_lines=True, encoding='utf-8-sig')
