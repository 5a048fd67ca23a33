"""File formats: channel specs, tap CSVs, clustered filters and waveforms.

See FORMATS.md at the repository root for the layouts.
"""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from .clustering import ClusteredFilter
from .signal import SignalBlock
from .taps import ChannelSpec, TapSet, tap_phases


class ConfigError(ValueError):
    """Malformed or inconsistent input file."""


_SPEC_FIELDS = {f.name: f.type for f in fields(ChannelSpec)}
_INT_FIELDS = {"samples_per_symbol", "span_count"}


def _coerce(key, raw, where):
    try:
        if key in _INT_FIELDS:
            v = float(raw)
            if v != int(v):
                raise ValueError
            return int(v)
        return float(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: {key} expects a number, got {raw!r}") from None


def parse_channel_spec(text: str, source: str = "<spec>") -> ChannelSpec:
    """Parse ``key = value`` lines (``#`` comments) or a JSON object."""
    stripped = text.strip()
    values = {}
    if stripped.startswith("{"):
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{source}:{exc.lineno}: invalid JSON ({exc.msg})") from None
        for key, raw in data.items():
            if key not in _SPEC_FIELDS:
                raise ConfigError(f"{source}: unknown key {key!r}")
            values[key] = _coerce(key, raw, source)
    else:
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            sep = "=" if "=" in line else ":" if ":" in line else None
            if sep is None:
                raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
            key, raw = (s.strip() for s in line.split(sep, 1))
            if key not in _SPEC_FIELDS:
                raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
            values[key] = _coerce(key, raw, f"{source}:{lineno}")
    try:
        return ChannelSpec(**values)
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_channel_spec(path) -> ChannelSpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read spec file {path}: {exc.strerror}") from None
    return parse_channel_spec(text, str(path))


def dump_channel_spec(spec: ChannelSpec) -> str:
    return "".join(f"{k} = {v}\n" for k, v in asdict(spec).items())


def write_csv(path, rows: list[dict], columns: list[str] | None = None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _fmt(r[k]) for k in columns})


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def read_csv(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def write_taps_csv(path, taps: TapSet):
    g = taps.taps
    ph = tap_phases(g)
    rows = [
        {"index": k, "real": float(g[k].real), "imag": float(g[k].imag), "magnitude": float(abs(g[k])), "phase": float(ph[k])}
        for k in range(g.size)
    ]
    write_csv(path, rows, ["index", "real", "imag", "magnitude", "phase"])


def read_taps_csv(path) -> TapSet:
    rows = read_csv(path)
    if not rows:
        raise ConfigError(f"{path}: no taps")
    try:
        rows.sort(key=lambda r: int(r["index"]))
        g = np.array([float(r["real"]) + 1j * float(r["imag"]) for r in rows])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"{path}: bad tap row ({exc})") from None
    return TapSet(g)


def save_clustered_filter(path, cf: ClusteredFilter, **metadata):
    md = dict(cf.metadata)
    md.update(metadata)
    write_json(
        path,
        {
            "centroids": [[float(c.real), float(c.imag)] for c in cf.centroids],
            "routing": [int(q) for q in cf.routing],
            "source_filter_len": cf.source_filter_len,
            "n_clusters": cf.n_clusters,
            "metadata": md,
        },
    )


def load_clustered_filter(path) -> ClusteredFilter:
    try:
        data = json.loads(Path(path).read_text())
        cents = np.array([complex(re, im) for re, im in data["centroids"]])
        routing = np.array(data["routing"], dtype=np.int64)
    except (OSError, KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"{path}: not a clustered filter file ({exc})") from None
    if data.get("source_filter_len", routing.size) != routing.size:
        raise ConfigError(f"{path}: routing length disagrees with source_filter_len")
    try:
        return ClusteredFilter(cents, routing, data.get("metadata", {}))
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _sidecar(path: Path) -> Path:
    return path.with_suffix(".json")


def write_signal(path, block: SignalBlock, **metadata):
    """Raw little-endian float64 ``re, im`` pairs, polarization-major, plus JSON sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    s = np.asarray(block.samples, dtype=np.complex128)
    inter = np.empty(s.shape + (2,), dtype="<f8")
    inter[..., 0] = s.real
    inter[..., 1] = s.imag
    inter.tofile(path)
    md = dict(block.metadata)
    md.update(metadata)
    write_json(
        _sidecar(path),
        {
            "polarizations": block.polarizations,
            "samples": len(block),
            "sample_rate_hz": block.sample_rate_hz,
            "role": block.role,
            "dtype": "float64-le interleaved re/im",
            "metadata": md,
        },
    )


def read_signal(path) -> SignalBlock:
    path = Path(path)
    try:
        head = json.loads(_sidecar(path).read_text())
        raw = np.fromfile(path, dtype="<f8")
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read signal {path}: {exc}") from None
    pols, n = head["polarizations"], head["samples"]
    if raw.size != pols * n * 2:
        raise ConfigError(f"{path}: expected {pols * n * 2} floats, found {raw.size}")
    raw = raw.reshape(pols, n, 2)
    return SignalBlock(raw[..., 0] + 1j * raw[..., 1], head["sample_rate_hz"], head["role"], head.get("metadata", {}))


def write_signal_csv(path, block: SignalBlock):
    rows = [
        {"pol": p, "index": i, "real": float(v.real), "imag": float(v.imag)}
        for p in range(block.polarizations)
        for i, v in enumerate(block.samples[p])
    ]
    write_csv(path, rows, ["pol", "index", "real", "imag"])


def read_signal_csv(path, sample_rate_hz: float = 64e9, role: str = "rx") -> SignalBlock:
    rows = read_csv(path)
    pols = 1 + max(int(r["pol"]) for r in rows)
    n = 1 + max(int(r["index"]) for r in rows)
    s = np.zeros((pols, n), dtype=complex)
    for r in rows:
        s[int(r["pol"]), int(r["index"])] = float(r["real"]) + 1j * float(r["imag"])
    return SignalBlock(s, sample_rate_hz, role)


def write_bits(path, bits):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    b = np.atleast_2d(np.asarray(bits, dtype=np.uint8))
    b.tofile(path)
    write_json(_sidecar(path), {"polarizations": b.shape[0], "bits": b.shape[1], "dtype": "uint8"})


def read_bits(path) -> np.ndarray:
    path = Path(path)
    head = json.loads(_sidecar(path).read_text())
    return np.fromfile(path, dtype=np.uint8).reshape(head["polarizations"], head["bits"]).astype(np.int8)
