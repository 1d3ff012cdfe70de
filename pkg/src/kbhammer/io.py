"""Dataset, ground-truth and campaign-config file formats.

Dataset files are CSV with a short ``#`` header::

    # kbhammer dataset v1
    # N: 500
    # n: 100
    # truth: run.truth.json
    u,y
    1.2345,-0.678
    ...

Floats are written with ``repr`` so that a write/read round trip is exact.
Ground truth lives in a sibling JSON file and is never read by the
estimators.
"""

import json
from pathlib import Path

import numpy as np

from .datagen import BENCHMARK_GRID, ExperimentConfig, GroundTruth
from .errors import DatasetError
from .structured import SignalRecord

MAGIC = "kbhammer dataset v1"


def fmt(x) -> str:
    return repr(float(x))


def truth_path_for(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".truth.json")


def write_dataset(path, data: SignalRecord, n=None, truth_file=None):
    path = Path(path)
    lines = [f"# {MAGIC}", f"# N: {data.N}"]
    if n is not None:
        lines.append(f"# n: {int(n)}")
    if truth_file is not None:
        lines.append(f"# truth: {Path(truth_file).name}")
    lines.append("u,y")
    lines.extend(f"{fmt(u)},{fmt(y)}" for u, y in zip(data.u, data.y))
    path.write_text("\n".join(lines) + "\n")


def read_dataset(path):
    """Parse a dataset file; returns (SignalRecord, header dict).

    Raises :class:`DatasetError` with the offending line number on any
    malformed row, non-finite value or header inconsistency.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DatasetError(f"{path}: cannot read ({exc.strerror})") from None
    header, u, y = {}, [], []
    seen_columns = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if ":" in body:
                key, value = (s.strip() for s in body.split(":", 1))
                header[key] = value
            continue
        if not seen_columns:
            if [c.strip() for c in line.split(",")] != ["u", "y"]:
                raise DatasetError(f"{path}:{lineno}: expected column header 'u,y', got {line!r}")
            seen_columns = True
            continue
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != 2 or not all(fields):
            raise DatasetError(
                f"{path}:{lineno}: row has {len([f for f in fields if f])} value(s), expected 2 (u,y)")
        try:
            uu, yy = float(fields[0]), float(fields[1])
        except ValueError:
            raise DatasetError(f"{path}:{lineno}: cannot parse {line!r} as two numbers") from None
        if not (np.isfinite(uu) and np.isfinite(yy)):
            raise DatasetError(f"{path}:{lineno}: non-finite value (NaN/Inf rejected)")
        u.append(uu)
        y.append(yy)
    if not seen_columns:
        raise DatasetError(f"{path}: missing 'u,y' column header")
    if not u:
        raise DatasetError(f"{path}: no samples")
    meta = {}
    if "N" in header:
        try:
            meta["N"] = int(header["N"])
        except ValueError:
            raise DatasetError(f"{path}: header N={header['N']!r} is not an integer") from None
        if meta["N"] != len(u):
            raise DatasetError(f"{path}: header declares N={meta['N']} but file has {len(u)} rows")
    if "n" in header:
        try:
            meta["n"] = int(header["n"])
        except ValueError:
            raise DatasetError(f"{path}: header n={header['n']!r} is not an integer") from None
    if "truth" in header:
        meta["truth"] = header["truth"]
    return SignalRecord(np.array(u), np.array(y)), meta


def write_truth(path, truth: GroundTruth, **extra):
    s = truth.system
    doc = {
        "g": [float(v) for v in truth.g],
        "c": [float(v) for v in truth.c],
        "sigma2": float(truth.sigma2),
        "nu": int(s.nu),
        "poles": [[float(z.real), float(z.imag)] for z in s.poles],
        "zeros": [[float(z.real), float(z.imag)] for z in s.zeros],
        **extra,
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def read_truth(path) -> dict:
    doc = json.loads(Path(path).read_text())
    doc["g"] = np.array(doc["g"])
    doc["c"] = np.array(doc["c"])
    return doc


# -- campaign config ---------------------------------------------------------

_INT_KEYS = {"N", "n", "p", "runs", "seed"}
_LIST_KEYS = {"nu", "snr"}


def parse_config(text: str, source: str = "<config>") -> dict:
    """Parse ``key = value`` lines (``#`` comments).

    ``nu`` and ``snr`` accept comma-separated lists; experiments are the
    product with SNR as the outer loop, as in the default grid.
    """
    cfg = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DatasetError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _INT_KEYS | _LIST_KEYS:
            raise DatasetError(f"{source}:{lineno}: unknown key {key!r}")
        try:
            if key in _INT_KEYS:
                cfg[key] = int(value)
            elif key == "nu":
                cfg[key] = [int(v) for v in value.split(",")]
            else:
                cfg[key] = [float(v) for v in value.split(",")]
        except ValueError:
            raise DatasetError(f"{source}:{lineno}: bad value for {key!r}: {value!r}") from None
    return cfg


def experiments_from_config(cfg: dict):
    """Expand a parsed config into a list of ExperimentConfig (the default experiment grid when empty)."""
    base = {k: cfg[k] for k in ("N", "n", "p", "runs", "seed") if k in cfg}
    if "nu" in cfg or "snr" in cfg:
        nus = cfg.get("nu", [4, 8, 10, 20])
        snrs = cfg.get("snr", [10.0, 1.0])
        pairs = [(nu, snr) for snr in snrs for nu in nus]
    else:
        pairs = list(BENCHMARK_GRID)
    exps = [ExperimentConfig(nu=nu, snr=snr, **base) for nu, snr in pairs]
    for e in exps:
        if e.nu < 1 or e.snr <= 0 or e.n < 1 or e.N < e.n or e.p < 1 or e.runs < 0:
            raise DatasetError(f"invalid experiment settings: {e}")
    return exps


def read_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DatasetError(f"{path}: cannot read ({exc.strerror})") from None
    return experiments_from_config(parse_config(text, str(path)))
