"""
NNet network files.

Layout: leading `//` comment lines, then comma-separated header lines
(counts, layer sizes, a legacy flag, input minimums, input maximums, means,
ranges), then for each layer its weight rows followed by one bias per line.
Normalization constants are kept as metadata and only folded into the
weights on request.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, List, Optional, Tuple, Union

import numpy as np

from .errors import NNetParseError
from .network import Network


@dataclass(frozen=True, eq=False)
class NNetMetadata:
    """Input bounds and normalization constants from an NNet header."""
    mins: np.ndarray
    maxes: np.ndarray
    means: np.ndarray      # input means followed by the output mean
    ranges: np.ndarray     # input ranges followed by the output range

    @classmethod
    def neutral(cls, input_size: int, lower=None, upper=None) -> "NNetMetadata":
        """Identity normalization with the given (or zero/one) input bounds."""
        mins = np.zeros(input_size) if lower is None else np.asarray(lower, dtype=np.float64)
        maxes = np.ones(input_size) if upper is None else np.asarray(upper, dtype=np.float64)
        return cls(mins, maxes, np.zeros(input_size + 1), np.ones(input_size + 1))

    def normalized_bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        """Declared input bounds expressed in the network's normalized input space."""
        n = len(self.mins)
        means, ranges = self.means[:n], self.ranges[:n]
        return (self.mins - means) / ranges, (self.maxes - means) / ranges


class _Lines:
    """Numbered, comment-stripped line cursor over NNet text."""

    def __init__(self, text: str, path: Optional[str]):
        self.path = path
        self._items = [
            (number, line.strip())
            for number, line in enumerate(text.splitlines(), start=1)
            if line.strip()
        ]
        self._pos = 0
        while self._pos < len(self._items) and self._items[self._pos][1].startswith("//"):
            self._pos += 1

    def _error(self, message: str, line: Optional[int]) -> NNetParseError:
        return NNetParseError(message, line=line, path=self.path)

    def next_values(self, what: str, count: Optional[int] = None, kind=float) -> Tuple[List, int]:
        if self._pos >= len(self._items):
            last = self._items[-1][0] if self._items else None
            raise self._error(f"unexpected end of file while reading {what}", last)
        number, line = self._items[self._pos]
        self._pos += 1
        tokens = [t.strip() for t in line.split(",") if t.strip()]
        try:
            values = [kind(t) for t in tokens]
        except ValueError:
            raise self._error(f"non-numeric token in {what}: {line!r}", number) from None
        if not all(np.isfinite(values)):
            raise self._error(f"non-finite value in {what}: {line!r}", number)
        if count is not None and len(values) != count:
            raise self._error(f"{what}: expected {count} values, found {len(values)}", number)
        return values, number

    def remaining(self) -> Iterator[Tuple[int, str]]:
        return iter(self._items[self._pos:])


def parse_nnet(text: Union[str, bytes], path: Optional[str] = None) -> Tuple[Network, NNetMetadata]:
    """Parse NNet text into a Network plus its normalization metadata."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise NNetParseError(f"not UTF-8 text (byte {e.start})", path=path) from None
    lines = _Lines(text, path)

    header, header_line = lines.next_values("header", kind=int)
    if len(header) != 4:
        raise NNetParseError("header must list numLayers, inputSize, outputSize, maxLayerSize", header_line, path)
    num_layers, input_size, output_size, _max_layer = header
    if num_layers < 1 or input_size < 1 or output_size < 1:
        raise NNetParseError("layer counts must be positive", header_line, path)

    sizes, sizes_line = lines.next_values("layer sizes", kind=int)
    if len(sizes) != num_layers + 1:
        raise NNetParseError(
            f"numLayers is {num_layers} but {len(sizes)} layer sizes are listed (expected {num_layers + 1})",
            sizes_line, path,
        )
    if sizes[0] != input_size or sizes[-1] != output_size:
        raise NNetParseError("layer sizes disagree with inputSize/outputSize", sizes_line, path)
    if any(s < 1 for s in sizes):
        raise NNetParseError("layer sizes must be positive", sizes_line, path)

    lines.next_values("legacy flag")
    mins, _ = lines.next_values("input minimums", input_size)
    maxes, _ = lines.next_values("input maximums", input_size)
    means, _ = lines.next_values("means", input_size + 1)
    ranges, ranges_line = lines.next_values("ranges", input_size + 1)
    if any(r == 0 for r in ranges):
        raise NNetParseError("ranges must be non-zero", ranges_line, path)

    weights = []
    biases = []
    for layer in range(num_layers):
        rows, cols = sizes[layer + 1], sizes[layer]
        matrix = [lines.next_values(f"layer {layer + 1} weights", cols)[0] for _ in range(rows)]
        bias = [lines.next_values(f"layer {layer + 1} bias", 1)[0][0] for _ in range(rows)]
        weights.append(np.array(matrix, dtype=np.float64))
        biases.append(np.array(bias, dtype=np.float64))

    for number, line in lines.remaining():
        if not line.startswith("//"):
            raise NNetParseError("unexpected content after the last layer", number, path)

    meta = NNetMetadata(
        np.array(mins, dtype=np.float64),
        np.array(maxes, dtype=np.float64),
        np.array(means, dtype=np.float64),
        np.array(ranges, dtype=np.float64),
    )
    return Network(tuple(weights), tuple(biases)), meta


def load_nnet(path: Union[str, Path]) -> Tuple[Network, NNetMetadata]:
    path = Path(path)
    return parse_nnet(path.read_bytes(), path=str(path))


def _row(values) -> str:
    return ",".join(repr(float(v)) for v in values) + ","


def serialize_nnet(net: Network, meta: Optional[NNetMetadata] = None, comment: Optional[str] = None) -> str:
    """Write a network in NNet layout; floats use their shortest round-trip form."""
    meta = meta or NNetMetadata.neutral(net.input_size)
    sizes = net.layer_sizes
    out = [f"// {line}" for line in (comment or "Written by cegar_verifier").splitlines()]
    out.append(",".join(str(v) for v in (len(net.weights), net.input_size, net.output_size, max(sizes))) + ",")
    out.append(",".join(str(s) for s in sizes) + ",")
    out.append("0,")
    out.append(_row(meta.mins))
    out.append(_row(meta.maxes))
    out.append(_row(meta.means))
    out.append(_row(meta.ranges))
    for w, b in zip(net.weights, net.biases):
        out.extend(_row(row) for row in w)
        out.extend(_row([v]) for v in b)
    return "\n".join(out) + "\n"


def apply_normalization(net: Network, meta: NNetMetadata) -> Network:
    """
    Fold input normalization and output de-normalization into the network.

    The returned network takes raw inputs x and computes
    range_out * N((x - mean) / range) + mean_out.
    """
    n = net.input_size
    means, ranges = meta.means[:n], meta.ranges[:n]
    out_mean, out_range = meta.means[n], meta.ranges[n]

    weights = list(net.weights)
    biases = list(net.biases)
    weights[0] = net.weights[0] / ranges
    biases[0] = net.biases[0] - net.weights[0] @ (means / ranges)
    weights[-1] = weights[-1] * out_range
    biases[-1] = biases[-1] * out_range + out_mean
    return Network(tuple(weights), tuple(biases), net.tags)
