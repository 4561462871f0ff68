"""
Base adapter for target trajectory files.

A trajectory file holds a sampled response (time and output), typically
measured on a real system or exported from another tool.  Files come in
several shapes: with or without a header row, comma or semicolon separated,
with decimal points or decimal commas, as CSV or as a spreadsheet.  Adapters
isolate that variety from the tuner: every adapter returns a DataFrame with
exactly two float columns, ``t`` and ``y``, sorted by strictly increasing
``t``.

Example usage::

    from pidmatch.adapters import adapter_for

    adapter = adapter_for('step_test.csv')
    spec = adapter.load_spec('step_test.csv')

Column selection works in order: header words matching a vocabulary
(``time``, ``output`` ...), then fuzzy matching of the header against the
canonical names, then the first two numeric columns.  Adapters raise
:class:`~pidmatch.errors.TrajectoryFileError` with an explanatory message
when nothing usable is found.
"""

from __future__ import annotations

import os
import re
from abc import ABC, abstractmethod
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from rapidfuzz import fuzz, process

from ..errors import TrajectoryFileError
from ..target_design import TrajectorySpec

TIME_COL_HINTS = {'t', 'time', 'times', 'tempo', 'sec', 'secs', 'seconds'}
OUTPUT_COL_HINTS = {'y', 'output', 'out', 'response', 'value', 'pv', 'uscita', 'yout'}


def _normalize(s: str) -> str:
    return re.sub(r'[^a-z0-9]+', ' ', str(s).strip().lower()).strip()


def _to_number(s) -> Optional[float]:
    if s is None or (isinstance(s, float) and np.isnan(s)):
        return None
    x = str(s).strip().replace(' ', '')
    if x == '':
        return None
    # a lone comma is a decimal comma
    if ',' in x and '.' not in x:
        x = x.replace(',', '.')
    try:
        return float(x)
    except ValueError:
        return None


def _best_guess(target: str, candidates: List[str], cutoff: int = 72) -> Optional[str]:
    if not candidates:
        return None
    res = process.extractOne(target, candidates, scorer=fuzz.WRatio)
    if res and res[1] >= cutoff:
        return res[0]
    return None


def _guess_by_vocab(cands: List[str], vocab: set) -> Optional[str]:
    for col in cands:
        if set(_normalize(col).split()) & vocab:
            return col
    return None


class BaseTrajectoryAdapter(ABC):
    """Abstract reader turning a trajectory file into ``t``/``y`` columns."""

    supported_extensions: List[str] = []

    def parse_trajectory_file(self, path: str) -> pd.DataFrame:
        """Read ``path`` and return a clean DataFrame with columns ``t`` and ``y``.

        Parameters
        ----------
        path : str
            Path of the trajectory file.

        Returns
        -------
        pd.DataFrame
            Two float columns, ``t`` strictly increasing.
        """
        ext = os.path.splitext(path)[1].lower()
        if ext not in self.supported_extensions:
            raise TrajectoryFileError(
                f'{type(self).__name__} does not read {ext or "extensionless"} files '
                f'(supported: {", ".join(self.supported_extensions)})'
            )
        try:
            raw = self._read_table(path)
        except (OSError, ValueError) as exc:
            raise TrajectoryFileError(f'Cannot read trajectory file {path}: {exc}') from exc
        raw = raw.dropna(how='all').dropna(axis=1, how='all')
        if raw.empty:
            raise TrajectoryFileError(f'Trajectory file {path} is empty')
        return self._validate(self._map_columns(raw), path)

    def load_spec(self, path: str) -> TrajectorySpec:
        df = self.parse_trajectory_file(path)
        return TrajectorySpec(tuple(df['t']), tuple(df['y']), source=path)

    @abstractmethod
    def _read_table(self, path: str) -> pd.DataFrame:
        """Return the file's cells as strings, without interpreting a header."""
        raise NotImplementedError

    def _split_header(self, raw: pd.DataFrame) -> Tuple[Optional[List[str]], pd.DataFrame]:
        first = raw.iloc[0].tolist()
        if all(_to_number(cell) is not None for cell in first):
            return None, raw
        header = [str(cell).strip() for cell in first]
        return header, raw.iloc[1:]

    def _map_columns(self, raw: pd.DataFrame) -> pd.DataFrame:
        header, body = self._split_header(raw)
        positions = list(range(body.shape[1]))
        t_pos = y_pos = None
        if header is not None:
            t_col = _guess_by_vocab(header, TIME_COL_HINTS) or _best_guess('time', header)
            rest = [h for h in header if h != t_col]
            y_col = _guess_by_vocab(rest, OUTPUT_COL_HINTS) or _best_guess('output', rest)
            if t_col is not None and y_col is not None:
                t_pos, y_pos = header.index(t_col), header.index(y_col)
        numeric = body.apply(lambda col: col.map(_to_number))
        if t_pos is None:
            usable = [p for p in positions if numeric.iloc[:, p].notna().all()]
            if len(usable) < 2:
                raise TrajectoryFileError('Could not find a time column and an output column')
            t_pos, y_pos = usable[0], usable[1]
        mapped = pd.DataFrame({
            't': numeric.iloc[:, t_pos].astype(float).to_numpy(),
            'y': numeric.iloc[:, y_pos].astype(float).to_numpy(),
        })
        return mapped

    def _validate(self, df: pd.DataFrame, path: str) -> pd.DataFrame:
        if df.isna().any().any():
            raise TrajectoryFileError(f'{path}: non-numeric cells in the time or output column')
        if len(df) < 2:
            raise TrajectoryFileError(f'{path}: a trajectory needs at least two samples')
        if not np.all(np.diff(df['t'].to_numpy()) > 0.0):
            raise TrajectoryFileError(f'{path}: time column must be strictly increasing')
        return df.reset_index(drop=True)
