"""Versioned little-endian snapshot files.

Layout: magic ``FLTO``, u16 version, u8 structure code, then length-prefixed
u32/u64 fields, and a trailing sha256 of everything before it. Only the graph,
the build parameters, the hierarchy levels and the sampled B-sets are stored;
sketches and range trees are rebuilt on load.
"""

from __future__ import annotations

import hashlib
import struct

from .graph_core import Graph

MAGIC = b"FLTO"
VERSION = 1
STRUCTURES = {"det": 1, "mc-vertex": 2, "mc-edge": 3}
_NAMES = {v: k for k, v in STRUCTURES.items()}


class SnapshotError(ValueError):
    pass


class _Writer:
    def __init__(self):
        self.parts: list[bytes] = []

    def u8(self, x: int):
        self.parts.append(struct.pack("<B", x))

    def u32(self, x: int):
        self.parts.append(struct.pack("<I", x))

    def u64(self, x: int):
        self.parts.append(struct.pack("<Q", x & (2**64 - 1)))

    def ints(self, xs):
        xs = list(xs)
        self.u32(len(xs))
        self.parts.append(struct.pack(f"<{len(xs)}I", *xs))

    def data(self) -> bytes:
        return b"".join(self.parts)


class _Reader:
    def __init__(self, buf: bytes):
        self.buf, self.at = buf, 0

    def _take(self, fmt: str):
        size = struct.calcsize(fmt)
        if self.at + size > len(self.buf):
            raise SnapshotError("truncated snapshot")
        out = struct.unpack_from(fmt, self.buf, self.at)
        self.at += size
        return out

    def u8(self) -> int:
        return self._take("<B")[0]

    def u32(self) -> int:
        return self._take("<I")[0]

    def u64(self) -> int:
        return self._take("<Q")[0]

    def ints(self) -> list:
        k = self.u32()
        return list(self._take(f"<{k}I")) if k else []


def encode(structure: str, g: Graph, params: dict, levels=None, bsets=None) -> bytes:
    if structure not in STRUCTURES:
        raise SnapshotError(f"unknown structure {structure!r}")
    w = _Writer()
    w.parts.append(MAGIC)
    w.parts.append(struct.pack("<H", VERSION))
    w.u8(STRUCTURES[structure])
    w.u32(g.n)
    w.ints(x for e in g.edges for x in e)
    w.ints(g.ids)
    w.u32(params.get("dstar", 0))
    w.u64(params.get("seed", 0))
    w.u32(params.get("c", 4))
    w.u8((1 if params.get("strict") else 0) | (2 if params.get("eager") else 0))
    levels = levels or []
    w.u32(len(levels))
    for edges, bad in levels:
        w.ints(edges)
        w.ints(bad)
    bsets = bsets or []
    w.u32(len(bsets))
    for b in bsets:
        w.ints(b)
    body = w.data()
    return body + hashlib.sha256(body).digest()


def decode(buf: bytes) -> dict:
    if len(buf) < 39 or buf[:4] != MAGIC:
        raise SnapshotError("not a snapshot file")
    body, digest = buf[:-32], buf[-32:]
    if hashlib.sha256(body).digest() != digest:
        raise SnapshotError("snapshot digest mismatch")
    (version,) = struct.unpack_from("<H", body, 4)
    if version != VERSION:
        raise SnapshotError(f"unsupported snapshot version {version}")
    r = _Reader(body)
    r.at = 6
    code = r.u8()
    if code not in _NAMES:
        raise SnapshotError(f"unknown structure code {code}")
    n = r.u32()
    flat = r.ints()
    ids = r.ints()
    g = Graph(n, list(zip(flat[::2], flat[1::2])), ids)
    params = {"dstar": r.u32(), "seed": r.u64(), "c": r.u32()}
    flags = r.u8()
    params["strict"], params["eager"] = bool(flags & 1), bool(flags & 2)
    levels = [(r.ints(), r.ints()) for _ in range(r.u32())]
    bsets = [r.ints() for _ in range(r.u32())]
    if r.at != len(body):
        raise SnapshotError("trailing bytes in snapshot")
    return {"structure": _NAMES[code], "graph": g, "params": params, "levels": levels, "bsets": bsets}


def digest(buf: bytes) -> str:
    return hashlib.sha256(buf).hexdigest()
