"""Plain-text ``.hka`` coefficient files.

One header line followed by whitespace-separated rows
``h k amp_obs phase_obs [amp_sym phase_sym]``. The reader skips lines that do
not start with a number and ignores columns beyond the sixth.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .core import GROUP_NAMES
from .spectrum import FCSet

logger = logging.getLogger(__name__)

HEADER = "h k amp_obs phase_obs amp_sym phase_sym"
_NUMERIC = re.compile(r"^[+-]?(\d|\.\d)")


class HkaFormatError(ValueError):
    pass


@dataclass(frozen=True)
class HkaRecord:
    h: int
    k: int
    amp_obs: float
    phase_obs: float
    amp_sym: Optional[float] = None
    phase_sym: Optional[float] = None

    @property
    def has_sym(self) -> bool:
        return self.amp_sym is not None


def read_hka(path) -> list:
    records = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts or not _NUMERIC.match(parts[0]):
                continue
            try:
                h, k = int(parts[0]), int(parts[1])
                vals = [float(v) for v in parts[2:6]]
            except (ValueError, IndexError) as exc:
                raise HkaFormatError(f"{path}:{lineno}: malformed row: {exc}") from None
            if len(vals) not in (2, 4):
                raise HkaFormatError(f"{path}:{lineno}: expected 4 or 6 columns")
            if vals[0] <= 0:
                raise HkaFormatError(f"{path}:{lineno}: observed amplitudes must be positive")
            records.append(HkaRecord(h, k, *vals))
    return records


def write_hka(path, records) -> None:
    records = list(records)
    if not records:
        raise ValueError("nothing to write")
    with_sym = all(r.has_sym for r in records)
    with open(path, "w") as fh:
        fh.write((HEADER if with_sym else "h k amp_obs phase_obs") + "\n")
        for r in records:
            row = [str(r.h), str(r.k), repr(float(r.amp_obs)), repr(float(r.phase_obs))]
            if with_sym:
                row += [repr(float(r.amp_sym)), repr(float(r.phase_sym))]
            fh.write(" ".join(row) + "\n")


def records_from_fcs(obs: FCSet, sym: Optional[FCSet] = None) -> list:
    out = []
    for i, fc in enumerate(obs):
        if sym is None:
            out.append(HkaRecord(fc.h, fc.k, fc.amplitude, fc.phase))
        else:
            out.append(HkaRecord(fc.h, fc.k, fc.amplitude, fc.phase,
                                 float(sym.amplitude[i]), float(sym.phase[i])))
    return out


def records_to_fcs(records):
    """Split records into observed and (if present) symmetrized FC sets."""
    records = list(records)
    obs = FCSet.from_records([(r.h, r.k, r.amp_obs, r.phase_obs) for r in records])
    if records and all(r.has_sym for r in records):
        sym = FCSet.from_records([(r.h, r.k, r.amp_sym, r.phase_sym) for r in records])
        return obs, sym
    return obs, None


def hka_path(directory, basename: str, group: str) -> Path:
    return Path(directory) / f"{basename}_{group}.hka"


def read_hka_dir(directory) -> dict:
    """Collect ``<basename>_<group>.hka`` files from a directory, keyed by group."""
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"{directory} is not a directory")
    found = {}
    for path in sorted(directory.glob("*.hka")):
        group = path.stem.rsplit("_", 1)[-1]
        if group not in GROUP_NAMES:
            logger.warning("skipping %s: unknown group suffix", path.name)
            continue
        found[group] = read_hka(path)
    if not found:
        raise FileNotFoundError(f"no .hka files in {directory}")
    return found
