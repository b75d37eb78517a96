"""Binary policy checkpoints.

Layout (all integers little-endian)::

    8 bytes   magic  b"MOCKPT\\x00\\x01"
    u32       format version
    u32       header length in bytes
    ...       UTF-8 JSON header: network config + training metadata
    u64       parameter count
    f64 * n   parameters, little-endian IEEE-754
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .network import NetworkConfig, NetworkParams, PolicyNetwork

MAGIC = b"MOCKPT\x00\x01"
VERSION = 1


@dataclass
class PolicyCheckpoint:
    config: NetworkConfig
    params: NetworkParams
    metadata: dict = field(default_factory=dict)

    def network(self) -> PolicyNetwork:
        return PolicyNetwork(self.config, self.params.copy())

    def to_bytes(self) -> bytes:
        header = json.dumps({"config": self.config.to_dict(), "metadata": self.metadata}, sort_keys=True).encode()
        flat = np.ascontiguousarray(self.params.flat, dtype="<f8")
        return b"".join(
            [
                MAGIC,
                struct.pack("<II", VERSION, len(header)),
                header,
                struct.pack("<Q", flat.size),
                flat.tobytes(),
            ]
        )

    @classmethod
    def from_bytes(cls, blob: bytes) -> "PolicyCheckpoint":
        if blob[:8] != MAGIC:
            raise ValueError("not a policy checkpoint (bad magic)")
        version, hlen = struct.unpack_from("<II", blob, 8)
        if version != VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        start = 16
        header = json.loads(blob[start : start + hlen].decode())
        (count,) = struct.unpack_from("<Q", blob, start + hlen)
        body = start + hlen + 8
        if len(blob) - body != 8 * count:
            raise ValueError(f"truncated checkpoint: expected {count} parameters")
        flat = np.frombuffer(blob, dtype="<f8", count=count, offset=body).astype(np.float64)
        cfg = header["config"]
        cfg["hidden_sizes"] = tuple(cfg["hidden_sizes"])
        config = NetworkConfig(**cfg)
        if config.parameter_count() != count:
            raise ValueError("parameter count does not match the stored network config")
        return cls(config, NetworkParams(flat, config.layer_shapes()), header["metadata"])

    def save(self, path) -> Path:
        path = Path(path)
        path.write_bytes(self.to_bytes())
        return path

    @classmethod
    def load(cls, path) -> "PolicyCheckpoint":
        return cls.from_bytes(Path(path).read_bytes())
