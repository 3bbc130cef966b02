"""Binary batch files holding labeled image records, plus their manifest.

File layout (little-endian throughout):

    bytes 0..7    magic "MTGBATCH"
    bytes 8..11   u32 record count N
    bytes 12..15  u32 height H
    bytes 16..19  u32 width W
    then N records, each:
        u16 label_id
        3*H*W bytes of pixels, channel-planar (all R, all G, all B),
        row-major within a plane

The manifest.json beside the batch files records label_set, height, width,
records_per_batch, seed, augmentation, and the ordered card_ids (one per
record across all batches) used for per-card evaluation.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .cards import COLOR_LABELS, TYPE_LABELS
from .errors import BatchFormatError
from .images import ImageSample

MAGIC = b"MTGBATCH"
_HEADER = struct.Struct("<III")
_LABEL = struct.Struct("<H")


@dataclass
class BatchSet:
    directory: Path
    batch_paths: list[Path]
    manifest: dict

    @property
    def height(self) -> int:
        return self.manifest["height"]

    @property
    def width(self) -> int:
        return self.manifest["width"]

    @property
    def label_set(self) -> str:
        return self.manifest["label_set"]

    @property
    def card_ids(self) -> list[str]:
        return self.manifest["card_ids"]

    def record_count(self) -> int:
        return len(self.manifest["card_ids"])


def _record_bytes(sample: ImageSample) -> bytes:
    planar = np.ascontiguousarray(sample.pixels.transpose(2, 0, 1))
    return _LABEL.pack(sample.label_id) + planar.tobytes()


def write_batches(
    samples: Sequence[ImageSample],
    out_dir: str | Path,
    label_set: str,
    seed: int = 0,
    augmentation: dict | None = None,
    records_per_batch: int = 10000,
) -> BatchSet:
    """Write samples into fixed-size batch files plus a manifest.

    Samples must be homogeneous in dimensions; round-trip through
    read_batches is bit-exact.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cardinality = {"color": len(COLOR_LABELS), "type": len(TYPE_LABELS)}.get(label_set)
    if samples:
        h, w = samples[0].pixels.shape[:2]
        for s in samples:
            if s.pixels.shape != (h, w, 3) or s.pixels.dtype != np.uint8:
                raise BatchFormatError(f"inhomogeneous sample for card {s.card_id}: shape {s.pixels.shape}, dtype {s.pixels.dtype}")
            if s.label_id < 0 or (cardinality is not None and s.label_id >= cardinality):
                raise BatchFormatError(f"label_id {s.label_id} outside the {label_set} label set (card {s.card_id})")
    else:
        h = w = 0
    paths: list[Path] = []
    for start in range(0, len(samples), records_per_batch):
        chunk = samples[start : start + records_per_batch]
        path = out_dir / f"batch_{len(paths):04d}.bin"
        with path.open("wb") as fh:
            fh.write(MAGIC)
            fh.write(_HEADER.pack(len(chunk), h, w))
            for sample in chunk:
                fh.write(_record_bytes(sample))
        paths.append(path)
    manifest = {
        "label_set": label_set,
        "height": h,
        "width": w,
        "records_per_batch": records_per_batch,
        "seed": seed,
        "augmentation": augmentation or {},
        "batches": [p.name for p in paths],
        "card_ids": [s.card_id for s in samples],
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=1), encoding="utf-8")
    return BatchSet(out_dir, paths, manifest)


def open_batch_set(directory: str | Path) -> BatchSet:
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.exists():
        raise BatchFormatError(f"no manifest.json in {directory}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    paths = [directory / name for name in manifest["batches"]]
    for p in paths:
        if not p.exists():
            raise BatchFormatError(f"missing batch file {p}")
    return BatchSet(directory, paths, manifest)


def read_batch_file(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Read one batch file, validating magic, counts, and size.

    Returns (pixels, labels) with pixels shaped (N, H, W, 3) uint8.
    """
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < len(MAGIC) + _HEADER.size:
        raise BatchFormatError(f"{path}: truncated header")
    if blob[: len(MAGIC)] != MAGIC:
        raise BatchFormatError(f"{path}: bad magic {blob[:len(MAGIC)]!r}")
    n, h, w = _HEADER.unpack_from(blob, len(MAGIC))
    record_size = _LABEL.size + 3 * h * w
    expected = len(MAGIC) + _HEADER.size + n * record_size
    if len(blob) != expected:
        raise BatchFormatError(f"{path}: size {len(blob)} does not match count {n} (expected {expected})")
    labels = np.empty(n, dtype=np.int64)
    pixels = np.empty((n, h, w, 3), dtype=np.uint8)
    offset = len(MAGIC) + _HEADER.size
    for i in range(n):
        labels[i] = _LABEL.unpack_from(blob, offset)[0]
        offset += _LABEL.size
        planar = np.frombuffer(blob, dtype=np.uint8, count=3 * h * w, offset=offset).reshape(3, h, w)
        pixels[i] = planar.transpose(1, 2, 0)
        offset += 3 * h * w
    return pixels, labels


def read_batches(batch_set: BatchSet | str | Path) -> Iterator[ImageSample]:
    """Stream samples from a batch set in file order, with manifest card ids."""
    if not isinstance(batch_set, BatchSet):
        batch_set = open_batch_set(batch_set)
    card_ids = batch_set.card_ids
    index = 0
    for path in batch_set.batch_paths:
        pixels, labels = read_batch_file(path)
        for i in range(len(labels)):
            cid = card_ids[index] if index < len(card_ids) else ""
            yield ImageSample(pixels=pixels[i], label_id=int(labels[i]), card_id=cid)
            index += 1
    if index != len(card_ids):
        raise BatchFormatError(f"{batch_set.directory}: manifest lists {len(card_ids)} records, files hold {index}")


def load_arrays(batch_set: BatchSet | str | Path) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Materialize a whole batch set as (pixels, labels, card_ids)."""
    if not isinstance(batch_set, BatchSet):
        batch_set = open_batch_set(batch_set)
    samples = list(read_batches(batch_set))
    if not samples:
        h, w = batch_set.height, batch_set.width
        return np.empty((0, h, w, 3), dtype=np.uint8), np.empty(0, dtype=np.int64), []
    pixels = np.stack([s.pixels for s in samples])
    labels = np.asarray([s.label_id for s in samples], dtype=np.int64)
    return pixels, labels, [s.card_id for s in samples]
