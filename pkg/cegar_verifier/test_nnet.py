#!/usr/bin/env python3
"""
Tests for the nnet module.

Run with: python -m pytest cegar_verifier/test_nnet.py -v
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from cegar_verifier.errors import NNetParseError
from cegar_verifier.network import evaluate
from cegar_verifier.nnet import NNetMetadata, apply_normalization, load_nnet, parse_nnet, serialize_nnet
from cegar_verifier.conftest import make_net


# =============================================================================
# Sample NNet Data
# =============================================================================

# 2 inputs, one hidden layer of 2, 1 output
SMALL_NNET = """// small test network
// second comment line
2,2,1,2,
2,2,1,
0,
0.0,-1.0,
1.0,1.0,
0.5,0.0,0.0,
2.0,1.0,1.0,
1.0,-1.0,
0.5,2.0,
0.0,
1.0,
3.0,-2.0,
0.25,
"""

# numLayers says 2 but only two sizes are listed
BAD_LAYER_COUNT = """2,2,1,2,
2,1,
0,
0,0,
1,1,
0,0,0,
1,1,1,
1,1,
0,
1,
0,
"""

MISSING_BIAS = """1,2,1,2,
2,1,
0,
0,0,
1,1,
0,0,0,
1,1,1,
1.0,2.0,
"""


# =============================================================================
# Parsing
# =============================================================================

def test_parse_small_network():
    """Header, metadata, weights and biases land where they belong."""
    net, meta = parse_nnet(SMALL_NNET)
    assert net.layer_sizes == [2, 2, 1]
    assert_array_equal(net.weights[0], [[1.0, -1.0], [0.5, 2.0]])
    assert_array_equal(net.biases[0], [0.0, 1.0])
    assert_array_equal(net.weights[1], [[3.0, -2.0]])
    assert_array_equal(net.biases[1], [0.25])
    assert_array_equal(meta.mins, [0.0, -1.0])
    assert_array_equal(meta.maxes, [1.0, 1.0])
    assert_array_equal(meta.means, [0.5, 0.0, 0.0])
    assert_array_equal(meta.ranges, [2.0, 1.0, 1.0])


def test_parse_reports_line_of_layer_count_mismatch():
    """The error names numLayers and the offending line."""
    with pytest.raises(NNetParseError) as info:
        parse_nnet(BAD_LAYER_COUNT, path="bad.nnet")
    assert info.value.line == 2
    assert "numLayers is 2" in str(info.value)
    assert str(info.value).startswith("bad.nnet:2:")


def test_parse_reports_truncated_file():
    """Running out of lines is an error, not an IndexError."""
    with pytest.raises(NNetParseError) as info:
        parse_nnet(MISSING_BIAS)
    assert "unexpected end of file" in str(info.value)


def test_parse_rejects_non_numeric_tokens():
    """A stray word in a weight row is reported with its line."""
    text = SMALL_NNET.replace("3.0,-2.0,", "3.0,abc,")
    with pytest.raises(NNetParseError) as info:
        parse_nnet(text)
    assert info.value.line == 14


def test_parse_rejects_trailing_content():
    """Extra numbers after the last layer mean the counts were wrong."""
    with pytest.raises(NNetParseError):
        parse_nnet(SMALL_NNET + "1.0,\n")


@pytest.mark.parametrize("token", ["nan", "inf", "-inf", "NaN"])
def test_parse_rejects_non_finite_weights(token):
    """nan and inf parse as floats but are reported like any bad token."""
    text = SMALL_NNET.replace("3.0,-2.0,", f"3.0,{token},")
    with pytest.raises(NNetParseError) as info:
        parse_nnet(text, path="w.nnet")
    assert info.value.line == 14
    assert "non-finite" in str(info.value)


def test_parse_rejects_non_finite_header_values():
    """The normalization header is checked the same way."""
    text = SMALL_NNET.replace("2.0,1.0,1.0,", "2.0,inf,1.0,")
    with pytest.raises(NNetParseError) as info:
        parse_nnet(text)
    assert info.value.line == 9


def test_parse_rejects_invalid_utf8():
    """Undecodable bytes are a parse error, not a UnicodeDecodeError."""
    data = SMALL_NNET.encode("utf-8").replace(b"small", b"sm\xffall")
    with pytest.raises(NNetParseError) as info:
        parse_nnet(data, path="bin.nnet")
    assert str(info.value).startswith("bin.nnet:")
    assert "UTF-8" in str(info.value)


def test_load_from_file(tmp_path):
    """load_nnet reads a file and keeps the path in errors."""
    path = tmp_path / "net.nnet"
    path.write_text(SMALL_NNET)
    net, _meta = load_nnet(path)
    assert net.layer_sizes == [2, 2, 1]
    path.write_text(BAD_LAYER_COUNT)
    with pytest.raises(NNetParseError) as info:
        load_nnet(path)
    assert str(path) in str(info.value)
    path.write_bytes(b"\x89PNG\r\n\x1a\n\x00\x00")
    with pytest.raises(NNetParseError) as info:
        load_nnet(path)
    assert str(path) in str(info.value)


# =============================================================================
# Writing and normalization
# =============================================================================

def test_serialize_then_parse_is_exact():
    """Shortest round-trip floats make write-then-read bit exact."""
    net = make_net(11, hidden_layers=3, width=5, inputs=3, outputs=2)
    meta = NNetMetadata.neutral(3, lower=[-1.0, 0.0, 0.5], upper=[1.0, 2.0, 0.75])
    parsed, parsed_meta = parse_nnet(serialize_nnet(net, meta, comment="round trip"))
    for a, b in zip(net.weights + net.biases, parsed.weights + parsed.biases):
        assert_array_equal(a, b)
    assert_array_equal(parsed_meta.mins, meta.mins)
    assert_array_equal(parsed_meta.maxes, meta.maxes)


def test_apply_normalization_matches_manual_scaling():
    """The folded network equals range_out * N((x - mean) / range) + mean_out."""
    net, meta = parse_nnet(SMALL_NNET)
    meta = NNetMetadata(meta.mins, meta.maxes, np.array([0.5, 0.25, 3.0]), np.array([2.0, 4.0, 10.0]))
    folded = apply_normalization(net, meta)
    for x in ([0.0, 0.0], [1.0, -1.0], [0.3, 0.7]):
        x = np.array(x)
        expected = 10.0 * evaluate(net, (x - meta.means[:2]) / meta.ranges[:2]) + 3.0
        assert_allclose(evaluate(folded, x), expected, atol=1e-12)


def test_normalized_bounds():
    """Declared bounds are mapped into normalized input space."""
    _net, meta = parse_nnet(SMALL_NNET)
    lower, upper = meta.normalized_bounds()
    assert_allclose(lower, [(0.0 - 0.5) / 2.0, -1.0])
    assert_allclose(upper, [(1.0 - 0.5) / 2.0, 1.0])
