"""File formats: CSV emission, PGM images, raw binary snapshots, run manifests.

All floating-point CSV output uses 17 significant digits so values round-trip
exactly; a pretty mode rounds for human consumption only.
"""
from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError

FLOAT_FMT = "%.17g"
PRETTY_FMT = "%.6g"
RAW_MAGIC = b"RD2D"


def format_value(x, pretty: bool = False) -> str:
    if isinstance(x, float) or isinstance(x, np.floating):
        return (PRETTY_FMT if pretty else FLOAT_FMT) % float(x)
    return str(x)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence],
              pretty: bool = False) -> Path:
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format_value(x, pretty) for x in row) + "\n")
    return path


def write_field_csv(path: Path, field: np.ndarray, pretty: bool = False) -> Path:
    """Row-major grid dump, one grid row per CSV line, nx columns."""
    path = Path(path)
    fmt = PRETTY_FMT if pretty else FLOAT_FMT
    with open(path, "w", newline="\n") as fh:
        for row in np.asarray(field):
            fh.write(",".join(fmt % x for x in row) + "\n")
    return path


def read_field_csv(path: Path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)


def write_pgm(path: Path, field: np.ndarray) -> tuple[Path, Path]:
    """8-bit binary PGM with min-max scaling; the scale goes to a sidecar."""
    path = Path(path)
    lo, hi = float(field.min()), float(field.max())
    span = hi - lo if hi > lo else 1.0
    img = np.clip(np.rint((field - lo) / span * 255.0), 0, 255).astype(np.uint8)
    ny, nx = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{nx} {ny}\n255\n".encode("ascii"))
        fh.write(img.tobytes())
    sidecar = path.with_suffix(path.suffix + ".scale.txt")
    with open(sidecar, "w") as fh:
        fh.write(f"min = {FLOAT_FMT % lo}\nmax = {FLOAT_FMT % hi}\n")
    return path, sidecar


def write_raw(path: Path, field: np.ndarray) -> Path:
    """Raw snapshot: 16-byte header (magic, nx, ny, reserved as little-endian
    int32) followed by row-major little-endian float64 samples."""
    path = Path(path)
    arr = np.ascontiguousarray(field, dtype="<f8")
    ny, nx = arr.shape
    with open(path, "wb") as fh:
        fh.write(RAW_MAGIC)
        fh.write(struct.pack("<iii", nx, ny, 0))
        fh.write(arr.tobytes())
    return path


def read_raw(path: Path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < 16 or data[:4] != RAW_MAGIC:
        raise ConfigError(f"{path}: not a raw field snapshot")
    nx, ny, _ = struct.unpack("<iii", data[4:16])
    expected = 16 + nx * ny * 8
    if len(data) != expected:
        raise ConfigError(f"{path}: truncated raw snapshot ({len(data)} != {expected} bytes)")
    return np.frombuffer(data[16:], dtype="<f8").reshape(ny, nx).copy()


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(outdir: Path, config_digest: str, version: str, seed: int,
                   artifacts: Sequence[Path]) -> Path:
    outdir = Path(outdir)
    manifest = {
        "config_digest": config_digest,
        "tool_version": version,
        "seed": seed,
        "output_directory": str(outdir),
        "artifacts": {p.name: sha256_file(p) for p in sorted(artifacts)},
    }
    path = outdir / "manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
