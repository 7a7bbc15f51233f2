"""
CSV datasets with a `#` metadata header and a content fingerprint.
"""

import hashlib
import json
import logging
import os
import tempfile
from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.12e'


def fingerprint(metadata: Dict[str, Any]) -> str:
    """sha256 of the sorted-key JSON form of the metadata"""
    text = json.dumps(metadata, sort_keys=True, default=str)
    return hashlib.sha256(text.encode()).hexdigest()


def format_header(metadata: Dict[str, Any]) -> List[str]:
    lines = [f"# {key} = {_format_value(value)}" for key, value in sorted(metadata.items())]
    lines.append(f"# fingerprint = {fingerprint(metadata)}")
    return lines


def _format_value(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass
class Dataset:
    """Named table of float columns plus the metadata echoed in its header"""
    name: str
    columns: List[str]
    data: np.ndarray
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.data = np.atleast_2d(np.asarray(self.data, dtype=float))
        if self.data.shape[1] != len(self.columns):
            raise ValueError(f"{self.name}: {len(self.columns)} column names for "
                             f"{self.data.shape[1]} columns")

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]

    def to_csv(self) -> str:
        lines = format_header(self.metadata)
        lines.append(",".join(self.columns))
        for row in self.data:
            lines.append(",".join(FLOAT_FORMAT % value for value in row))
        return "\n".join(lines) + "\n"

    def write(self, directory: str) -> str:
        path = os.path.join(directory, self.name if self.name.endswith('.csv') else self.name + '.csv')
        write_atomic(path, self.to_csv())
        return path


def write_atomic(path: str, text: str) -> None:
    """Write through a temporary file in the target directory, then rename over the target"""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    handle = tempfile.NamedTemporaryFile('w', dir=directory, delete=False, suffix='.tmp',
                                         encoding='utf-8', newline='\n')
    try:
        with handle:
            handle.write(text)
        os.replace(handle.name, path)
    except BaseException:
        if os.path.exists(handle.name):
            os.remove(handle.name)
        raise
    logger.info("wrote %s", path)


def read_csv(path: str) -> Dataset:
    """Inverse of Dataset.write; metadata values come back as strings"""
    metadata, columns, rows = {}, None, []
    with open(path, 'r', encoding='utf-8') as handle:
        for line in handle:
            line = line.rstrip('\n')
            if line.startswith('#'):
                key, _, value = line[1:].partition('=')
                if key.strip() != 'fingerprint':
                    metadata[key.strip()] = value.strip()
            elif columns is None:
                columns = line.split(',')
            elif line:
                rows.append([float(value) for value in line.split(',')])
    name = os.path.splitext(os.path.basename(path))[0]
    return Dataset(name, columns or [], np.array(rows).reshape(-1, len(columns or [])), metadata)
