"""Encoder tables, per-stream decoders and the codec file format.

A codec maps node ``k``'s input ``s_k`` to ``L`` complex symbols through a
lookup table, and recovers each output stream from the superposed symbol with
a per-stream decoder. Designed codecs decode by nearest labeled point; the
closed-form PAM/QAM codecs decode arithmetically. All three share the same
:class:`Codec` container and JSON layout.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

FORMAT_VERSION = 1


class InconsistentDesignError(ValueError):
    """Two sum points with different labels coincide within the dedup tolerance."""


@dataclass
class DecoderTable:
    """Labeled sum points for nearest-point decoding of one output stream."""

    ell: int
    points: np.ndarray  # (P,) complex
    labels: np.ndarray  # (P,) float
    dedup_tol: float

    kind = "nearest"

    @classmethod
    def from_sum_points(cls, ell, points, labels, rel_tol=1e-6) -> "DecoderTable":
        """Merge same-label points closer than the tolerance; reject clashes."""
        points = np.asarray(points, dtype=complex)
        labels = np.asarray(labels, dtype=float)
        scale = float(np.max(np.abs(points))) if points.size else 0.0
        tol = rel_tol * scale
        if tol > 0:
            xy = np.column_stack([points.real, points.imag])
            pairs = cKDTree(xy).query_pairs(tol, output_type="ndarray")
        else:
            # every point is zero, so they all coincide
            pairs = np.column_stack([np.zeros(points.size - 1, int), np.arange(1, points.size)])
        if len(pairs):
            clash = labels[pairs[:, 0]] != labels[pairs[:, 1]]
            if np.any(clash):
                i, j = pairs[np.argmax(clash)]
                raise InconsistentDesignError(
                    f"stream {ell}: points {i} and {j} are within {tol:.3g} "
                    f"but carry labels {labels[i]} and {labels[j]}"
                )
        # keep the lowest index of each cluster
        drop = np.zeros(points.size, dtype=bool)
        if len(pairs):
            drop[np.maximum(pairs[:, 0], pairs[:, 1])] = True
        keep = ~drop
        return cls(ell, points[keep], labels[keep], tol)

    def decode(self, y) -> np.ndarray:
        """Label of the nearest stored point; ties go to the lowest index."""
        y = np.asarray(y, dtype=complex)
        flat = y.reshape(-1)
        out = np.empty(flat.size)
        step = max(1, 2**20 // max(1, self.points.size))
        for a in range(0, flat.size, step):
            d = np.abs(flat[a:a + step, None] - self.points[None, :])
            out[a:a + step] = self.labels[np.argmin(d, axis=1)]
        return out.reshape(y.shape)

    def min_label_distance(self) -> float:
        """Smallest distance between two points with different labels."""
        d = np.abs(self.points[:, None] - self.points[None, :])
        diff = self.labels[:, None] != self.labels[None, :]
        return float(d[diff].min()) if diff.any() else np.inf

    def to_dict(self) -> dict:
        return {
            "type": self.kind,
            "ell": self.ell,
            "dedup_tol": self.dedup_tol,
            "points": [[float(p.real), float(p.imag)] for p in self.points],
            "labels": [float(v) for v in self.labels],
        }


@dataclass
class PamDecoder:
    """De-offset, round and clamp to ``[0, upper]``, then add ``b``."""

    ell: int
    shift: int
    upper: int
    b: int

    kind = "pam"

    def decode(self, y) -> np.ndarray:
        u = np.real(np.asarray(y)) + self.shift
        r = np.clip(np.round(u), 0, self.upper)
        return r + self.b

    def to_dict(self) -> dict:
        return {"type": self.kind, "ell": self.ell, "shift": self.shift,
                "upper": self.upper, "b": self.b}


@dataclass
class QamDecoder:
    """Round the in-phase and quadrature parts of a superposed QAM point."""

    ell: int
    Q: int
    K: int

    kind = "qam"

    def decode(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=complex)
        off = self.K * (self.Q - 1) / 2.0
        re = np.clip(np.round(y.real + off), 0, self.K * (self.Q - 1))
        im = np.clip(np.round(y.imag + off), 0, self.K * (self.Q - 2))
        return re + self.Q * im

    def to_dict(self) -> dict:
        return {"type": self.kind, "ell": self.ell, "Q": self.Q, "K": self.K}


def _decoder_from_dict(d: dict):
    t = d["type"]
    if t == "nearest":
        pts = np.array([complex(re, im) for re, im in d["points"]], dtype=complex)
        return DecoderTable(int(d["ell"]), pts, np.array(d["labels"], dtype=float),
                            float(d["dedup_tol"]))
    if t == "pam":
        return PamDecoder(int(d["ell"]), int(d["shift"]), int(d["upper"]), int(d["b"]))
    if t == "qam":
        return QamDecoder(int(d["ell"]), int(d["Q"]), int(d["K"]))
    raise ValueError(f"unknown decoder type {t!r}")


@dataclass
class Codec:
    """Per-node encoder tables plus one decoder per output stream.

    ``encoders[k]`` has shape ``(Q_k, L)``: row ``q`` is what node ``k``
    sends when its input is ``q``.
    """

    kind: str
    encoders: list
    decoders: list
    meta: dict = field(default_factory=dict)

    @property
    def K(self) -> int:
        return len(self.encoders)

    @property
    def L(self) -> int:
        return len(self.decoders)

    @property
    def Q_list(self) -> tuple[int, ...]:
        return tuple(int(e.shape[0]) for e in self.encoders)

    def symbols(self, S) -> np.ndarray:
        """Symbols for input rows ``S`` (T, K) -> (T, K, L)."""
        S = np.asarray(S, dtype=int)
        return np.stack([self.encoders[k][S[..., k]] for k in range(self.K)], axis=-2)

    def decode(self, R) -> np.ndarray:
        """Decode superposed streams ``R`` (..., L) -> (..., L) labels."""
        R = np.asarray(R, dtype=complex)
        return np.stack([self.decoders[l].decode(R[..., l]) for l in range(self.L)], axis=-1)

    def mean_node_power(self) -> float:
        """Average of ``E||x_k||^2`` over nodes under uniform inputs."""
        return float(np.mean([np.mean(np.sum(np.abs(e) ** 2, axis=1)) for e in self.encoders]))

    # file format --------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "format": FORMAT_VERSION,
            "kind": self.kind,
            "K": self.K,
            "L": self.L,
            "Q_list": list(self.Q_list),
            "meta": self.meta,
            "encoders": [
                [[[float(v.real), float(v.imag)] for v in row] for row in e]
                for e in self.encoders
            ],
            "decoders": [d.to_dict() for d in self.decoders],
        }

    def to_json(self) -> str:
        # json writes floats with repr, the shortest string that round-trips
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, d: dict) -> "Codec":
        if d.get("format") != FORMAT_VERSION:
            raise ValueError(f"unsupported codec format {d.get('format')!r}")
        enc = [
            np.array([[complex(re, im) for re, im in row] for row in e], dtype=complex).reshape(-1, d["L"])
            for e in d["encoders"]
        ]
        dec = [_decoder_from_dict(x) for x in d["decoders"]]
        return cls(d["kind"], enc, dec, dict(d.get("meta", {})))

    @classmethod
    def from_json(cls, text: str) -> "Codec":
        return cls.from_dict(json.loads(text))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "Codec":
        with open(path) as fh:
            return cls.from_json(fh.read())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Codec):
            return NotImplemented
        return self.to_json() == other.to_json()
