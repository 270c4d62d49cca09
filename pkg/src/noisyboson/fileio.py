"""Experiment configuration and on-disk formats.

Every artifact is written deterministically (sorted JSON keys, repr floats,
no timestamps) so identical (config, seed) reruns produce byte-identical
files.  Data files stay clean tabular formats; the toolkit version, config
hash, and seed travel in a .meta.json sidecar next to each artifact.
"""

import hashlib
import json
import math
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from .combinat import configuration_count, rank_configurations

__all__ = [
    "ExperimentConfig",
    "MODEL_LABELS",
    "parse_config_file",
    "config_hash",
    "write_meta",
    "read_meta",
    "write_table_csv",
    "read_table_csv",
    "write_matrix_csv",
    "read_matrix_csv",
    "write_jsonl",
    "read_jsonl",
    "write_json",
    "read_json",
    "write_records_jsonl",
    "write_counts_csv",
    "write_sweep_csv",
    "BOUND_ORDER",
]

MODEL_LABELS = ("ideal", "classical", "noisy_eq5", "noisy_eq9",
                "partial", "truncated", "click")

_INT_FIELDS = {"n", "m", "r", "draws", "realizations", "seed"}
_FLOAT_FIELDS = {"epsilon", "eps_err", "eps_over_n"}
_STR_FIELDS = {"command", "model", "output_dir", "param", "sampler", "values"}
# canonical config keys for the count fields are the uppercase names
_KEY_ALIASES = {"N": "n", "M": "m", "R": "r"}


@dataclass
class ExperimentConfig:
    """Flat experiment description; the config file uses exactly these
    field names as keys and CLI flags override file values."""

    command: str = ""
    n: int = 0
    m: int = 0
    epsilon: float = 0.0
    eps_err: float = 0.05
    r: int = None
    model: str = "ideal"
    draws: int = 10000
    realizations: int = 1000
    seed: int = None
    output_dir: str = "."

    def validate(self):
        if self.seed is None:
            raise ValueError("seed is mandatory (no wall-clock default)")
        if self.n < 1:
            raise ValueError("n >= 1 required")
        if self.m < 1:
            raise ValueError("m >= 1 required")
        if self.m < self.n:
            raise ValueError("m >= n required")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon in [0, 1] required")
        if not 0.0 < self.eps_err < 1.0:
            raise ValueError("eps_err in (0, 1) required")
        if self.r is not None and self.r < 0:
            raise ValueError("r >= 0 required")
        if self.model not in MODEL_LABELS:
            raise ValueError(f"model must be one of {', '.join(MODEL_LABELS)}")
        if self.draws < 1:
            raise ValueError("draws >= 1 required")
        if self.realizations < 2:
            raise ValueError("realizations >= 2 required")
        return self

    def as_dict(self):
        return asdict(self)


def _convert(key, raw):
    raw = raw.strip()
    if key in _INT_FIELDS:
        return int(raw)
    if key in _FLOAT_FIELDS:
        return float(raw)
    if key in _STR_FIELDS:
        return raw
    raise ValueError(f"unknown config key {key!r}")


def parse_config_file(path):
    """Flat `key = value` lines; blank lines and # comments allowed."""
    values = {}
    text = Path(path).read_text()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, _, raw = stripped.partition("=")
        key = _KEY_ALIASES.get(key.strip(), key.strip())
        values[key] = _convert(key, raw)
    return values


def config_hash(cfg):
    """Stable hash of the experiment (output location excluded)."""
    if isinstance(cfg, ExperimentConfig):
        cfg = cfg.as_dict()
    payload = {k: v for k, v in sorted(cfg.items()) if k != "output_dir"}
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def _clean_floats(obj):
    if isinstance(obj, float):
        return None if math.isnan(obj) else obj
    if isinstance(obj, dict):
        return {k: _clean_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean_floats(v) for v in obj]
    return obj


def write_json(path, obj):
    text = json.dumps(_clean_floats(obj), indent=2, sort_keys=True,
                      default=_json_default)
    Path(path).write_text(text + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


def write_meta(path, meta):
    write_json(path, meta)


def read_meta(path):
    return read_json(path)


def write_jsonl(path, rows):
    lines = [json.dumps(_clean_floats(row), sort_keys=True,
                        separators=(", ", ": "), default=_json_default)
             for row in rows]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def read_jsonl(path):
    return [json.loads(line)
            for line in Path(path).read_text().splitlines() if line.strip()]


def write_records_jsonl(path, records):
    """Sample record stream: one {"m": [...], "n_quantum": k, "stream": s}
    object per line."""
    rows = [{"m": list(rec.configuration),
             "n_quantum": rec.n_quantum,
             "stream": rec.seed_tag}
            for rec in records]
    write_jsonl(path, rows)


def write_table_csv(path, configurations, probabilities, value_columns=None):
    """Probability table as CSV: one configuration per row, header
    m_1,...,m_M,probability.  value_columns replaces the single probability
    column with named columns (e.g. mean + stderr)."""
    configurations = np.asarray(configurations)
    modes = configurations.shape[1]
    head = [f"m_{i + 1}" for i in range(modes)]
    if value_columns is None:
        value_columns = [("probability", np.asarray(probabilities))]
    lines = [",".join(head + [name for name, _ in value_columns])]
    cols = [np.asarray(vals) for _, vals in value_columns]
    for i in range(configurations.shape[0]):
        row = [str(int(x)) for x in configurations[i]]
        row += [repr(float(c[i])) for c in cols]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_table_csv(path):
    """Read back a table CSV; returns (configurations, columns dict)."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    header = lines[0].split(",")
    modes = sum(1 for h in header if h.startswith("m_"))
    names = header[modes:]
    configs = []
    cols = [[] for _ in names]
    for ln in lines[1:]:
        parts = ln.split(",")
        configs.append([int(x) for x in parts[:modes]])
        for jj, val in enumerate(parts[modes:]):
            cols[jj].append(float(val))
    configurations = np.array(configs, dtype=np.int64)
    return configurations, {name: np.array(col) for name, col in zip(names, cols)}


def table_csv_probabilities(path, n_bosons, modes):
    """Probability column aligned with the canonical enumeration order."""
    configurations, cols = read_table_csv(path)
    if configurations.shape[1] != modes or (configurations.sum(axis=1) != n_bosons).any():
        raise ValueError("table support does not match (n_bosons, modes)")
    idx = rank_configurations(configurations, n_bosons, modes)
    out = np.zeros(configuration_count(n_bosons, modes))
    out[idx] = cols["probability"]
    return out


def write_counts_csv(path, counts):
    """Empirical tallies as CSV: m_1,...,m_M,count with integer counts,
    rows in configuration-sorted order."""
    items = sorted((tuple(int(x) for x in k), int(c)) for k, c in counts.items())
    if not items:
        raise ValueError("no counts to write")
    modes = len(items[0][0])
    lines = [",".join([f"m_{i + 1}" for i in range(modes)] + ["count"])]
    for cfg, c in items:
        lines.append(",".join([str(x) for x in cfg] + [str(c)]))
    Path(path).write_text("\n".join(lines) + "\n")


BOUND_ORDER = (
    "average_distinguishability",
    "distinguishability_tvd",
    "cutoff_interference_order",
    "sufficient_click_order",
    "noise_click_ratio",
    "average_tvd",
    "click_tail",
    "hoeffding_tail",
)


def write_sweep_csv(path, param, rows):
    """Bound sweep as CSV: one row per sweep point, a fixed column per
    bound; inapplicable bounds leave empty cells."""
    header = ["param", "n", "epsilon", "r"] + list(BOUND_ORDER)
    lines = [",".join(header)]
    for row in rows:
        cells = [param, str(row["n"]), repr(float(row["epsilon"])),
                 "" if row.get("r") is None else str(row["r"])]
        bounds = row["bounds"]
        for name in BOUND_ORDER:
            val = bounds.get(name)
            cells.append("" if val is None else repr(float(val)))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def write_matrix_csv(path, matrix):
    """Complex matrix as CSV: a dims line then row,col,re,im entries."""
    matrix = np.asarray(matrix, dtype=np.complex128)
    rows, cols = matrix.shape
    lines = ["rows,cols", f"{rows},{cols}", "row,col,re,im"]
    for i in range(rows):
        for jj in range(cols):
            z = matrix[i, jj]
            lines.append(f"{i},{jj},{float(z.real)!r},{float(z.imag)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix_csv(path):
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if len(lines) < 3 or lines[0] != "rows,cols" or lines[2] != "row,col,re,im":
        raise ValueError("not a matrix CSV (expected rows,cols header)")
    rows, cols = (int(x) for x in lines[1].split(","))
    out = np.zeros((rows, cols), dtype=np.complex128)
    seen = 0
    for ln in lines[3:]:
        i, jj, re, im = ln.split(",")
        out[int(i), int(jj)] = complex(float(re), float(im))
        seen += 1
    if seen != rows * cols:
        raise ValueError(f"expected {rows * cols} entries, found {seen}")
    return out
