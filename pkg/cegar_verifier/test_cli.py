#!/usr/bin/env python3
"""
Tests for the command-line interface.

Run with: python -m pytest cegar_verifier/test_cli.py -v
"""

import json

import numpy as np
import pytest

from cegar_verifier.classifier import classify
from cegar_verifier.cli import build_parser, main
from cegar_verifier.config import EXIT_INCONCLUSIVE, EXIT_SAT, EXIT_UNSAT, EXIT_USAGE
from cegar_verifier.network import Network, evaluate
from cegar_verifier.nnet import NNetMetadata, load_nnet, serialize_nnet
from cegar_verifier.report import parse_report, read_csv_rows
from cegar_verifier.selfcheck import THREE_NEURON_NET


# y = relu(x) + 2 relu(-x); on [0, 1] the output is x
V_NET = Network(
    weights=(np.array([[1.0], [-1.0]]), np.array([[1.0, 2.0]])),
    biases=(np.zeros(2), np.zeros(1)),
)

# y0 = x0 + 10, y1 = x0 on the unit box
OFFSET_NET = Network(
    weights=(np.eye(2), np.array([[1.0, 0.0], [1.0, 0.0]])),
    biases=(np.zeros(2), np.array([10.0, 0.0])),
)


def _write_net(path, net):
    path.write_text(serialize_nnet(net, NNetMetadata.neutral(net.input_size)), encoding="utf-8")
    return str(path)


def _write_prop(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


@pytest.fixture
def three_neuron_files(tmp_path):
    net = _write_net(tmp_path / "three.nnet", THREE_NEURON_NET)
    box = "x0 >= 0\nx0 <= 1\nx1 >= 0\nx1 <= 1\n"
    return {
        "net": net,
        "sat": _write_prop(tmp_path / "sat.prop", box + "y0 > 13\n"),
        "unsat": _write_prop(tmp_path / "unsat.prop", box + "y0 > 30\n"),
    }


# =============================================================================
# verify
# =============================================================================

def test_verify_unsat_exit_code(tmp_path):
    """y > 2 never holds on [0, 1] for the two-neuron example."""
    net = _write_net(tmp_path / "v.nnet", V_NET)
    prop = _write_prop(tmp_path / "v.prop", "x0 >= 0\nx0 <= 1\ny0 > 2\n")
    assert main(["verify", "--net", net, "--prop", prop]) == EXIT_UNSAT


def test_verify_sat_reports_witness(three_neuron_files, capsys):
    """SAT exits with 1 and prints a witness that really violates."""
    code = main(["verify", "--net", three_neuron_files["net"], "--prop", three_neuron_files["sat"]])
    assert code == EXIT_SAT
    out, err = capsys.readouterr()
    report = parse_report(out)
    assert evaluate(THREE_NEURON_NET, report.witness)[0] > 13.0
    assert "Verdict: SAT" in err


def test_verify_unsat_after_refinement(three_neuron_files, capsys):
    """The saturated abstraction is too coarse for y > 30; the loop refines."""
    code = main(["verify", "--net", three_neuron_files["net"], "--prop", three_neuron_files["unsat"]])
    assert code == EXIT_UNSAT
    data = json.loads(capsys.readouterr().out)
    assert data["stats"]["refinement_rounds"] >= 1
    assert data["witness"] is None


def test_timeout_exit_code(three_neuron_files):
    """A zero timeout ends in TIMEOUT, reported with the inconclusive code."""
    code = main(["verify", "--net", three_neuron_files["net"], "--prop", three_neuron_files["unsat"], "--timeout", "0"])
    assert code == EXIT_INCONCLUSIVE


def test_omit_timings_is_byte_identical(three_neuron_files, tmp_path):
    """Two seeded runs with --omit-timings write the same bytes."""
    outputs = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        args = [
            "verify", "--net", three_neuron_files["net"], "--prop", three_neuron_files["unsat"],
            "--abstraction", "indicator", "--refine", "random", "--seed", "3",
            "--omit-timings", "--out", str(out),
        ]
        assert main(args) == EXIT_UNSAT
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]
    assert json.loads(outputs[0])["stats"]["total_ms"] == 0.0


def test_no_abstraction_flag(three_neuron_files, capsys):
    """--no-abstraction starts from the classified network itself."""
    main(["verify", "--net", three_neuron_files["net"], "--prop", three_neuron_files["unsat"], "--no-abstraction"])
    stats = json.loads(capsys.readouterr().out)["stats"]
    assert stats["initial_abstract_size"] == stats["classified_size"]
    assert stats["refinement_rounds"] == 0


def test_dump_classified(three_neuron_files, tmp_path):
    """--dump-classified writes the encoded, classified network."""
    dump = tmp_path / "out" / "classified.nnet"
    main([
        "verify", "--net", three_neuron_files["net"], "--prop", three_neuron_files["sat"],
        "--dump-classified", str(dump),
    ])
    net, _meta = load_nnet(dump)
    assert net.output_size == 1
    assert net.hidden_size() >= THREE_NEURON_NET.hidden_size()


# =============================================================================
# Errors and usage
# =============================================================================

def test_missing_required_option_is_usage_error():
    """argparse errors exit with the usage code."""
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--net", "x.nnet"])
    assert exc.value.code == EXIT_USAGE


def test_missing_subcommand_is_usage_error():
    """A subcommand is required."""
    with pytest.raises(SystemExit) as exc:
        build_parser().parse_args([])
    assert exc.value.code == EXIT_USAGE


def test_malformed_network_reports_location(tmp_path, capsys):
    """Parse errors name the file and line and exit with the usage code."""
    broken = tmp_path / "broken.nnet"
    broken.write_text("1,2,1,2,\n2,1,\n0,\n0,0,\n1,1,\n0,0,0,\n1,1,1,\n", encoding="utf-8")
    prop = _write_prop(tmp_path / "p.prop", "x0 >= 0\nx0 <= 1\nx1 >= 0\nx1 <= 1\ny0 > 0\n")
    assert main(["verify", "--net", str(broken), "--prop", prop]) == EXIT_USAGE
    assert f"{broken}:" in capsys.readouterr().err


def test_malformed_property_reports_line(three_neuron_files, tmp_path, capsys):
    """An unbounded input is a property error."""
    prop = _write_prop(tmp_path / "bad.prop", "x0 >= 0\nx0 <= 1\ny0 > 1\n")
    assert main(["verify", "--net", three_neuron_files["net"], "--prop", prop]) == EXIT_USAGE
    assert "x1 unbounded" in capsys.readouterr().err


def test_unknown_output_reports_line(three_neuron_files, tmp_path, capsys):
    """y3 on a one-output network is rejected with the line it sits on."""
    prop = _write_prop(tmp_path / "bad.prop", "x0 >= 0\nx0 <= 1\nx1 >= 0\nx1 <= 1\ny3 > 1\n")
    assert main(["verify", "--net", three_neuron_files["net"], "--prop", prop]) == EXIT_USAGE
    assert f"{prop}:5:" in capsys.readouterr().err


def test_missing_file_is_usage_error(tmp_path):
    """OSError from a missing file maps to the usage code."""
    prop = _write_prop(tmp_path / "p.prop", "x0 >= 0\nx0 <= 1\ny0 > 0\n")
    assert main(["verify", "--net", str(tmp_path / "nope.nnet"), "--prop", prop]) == EXIT_USAGE


# =============================================================================
# robustness / classify
# =============================================================================

def test_robustness_holds(tmp_path):
    """y1 stays below y0 by 10 everywhere, so output 1 keeps the lower score."""
    net = _write_net(tmp_path / "offset.nnet", OFFSET_NET)
    args = ["robustness", "--net", net, "--center", "0.5,0.5", "--delta", "0.1", "--better", "1", "--than", "0"]
    assert main(args) == EXIT_UNSAT


def test_robustness_violated(tmp_path, capsys):
    """Swapping the roles gives a counterexample inside the ball."""
    net = _write_net(tmp_path / "offset.nnet", OFFSET_NET)
    args = ["robustness", "--net", net, "--center", "0.5,0.5", "--better", "0", "--than", "1"]
    assert main(args) == EXIT_SAT
    witness = np.array(json.loads(capsys.readouterr().out)["witness"])
    assert np.all(np.abs(witness - 0.5) <= 0.1 + 1e-9)


def test_robustness_same_outputs_rejected(tmp_path):
    """better == than is an invalid query."""
    net = _write_net(tmp_path / "offset.nnet", OFFSET_NET)
    args = ["robustness", "--net", net, "--center", "0.5,0.5", "--better", "0", "--than", "0"]
    assert main(args) == EXIT_USAGE


def test_classify_writes_network(three_neuron_files, tmp_path, capsys):
    """classify writes N'' and reports the size change."""
    out = tmp_path / "c.nnet"
    assert main(["classify", "--net", three_neuron_files["net"], "--out", str(out)]) == 0
    net, _meta = load_nnet(out)
    assert net.hidden_size() == classify(THREE_NEURON_NET).hidden_size()
    assert "Wrote:" in capsys.readouterr().err


# =============================================================================
# generate-corpus / bench
# =============================================================================

def test_generate_then_bench(tmp_path, capsys):
    """A generated corpus benches to one row per query and mode."""
    corpus = tmp_path / "corpus"
    assert main(["generate-corpus", str(corpus), "--count", "2", "--seed", "4"]) == 0
    assert len(list(corpus.glob("*.nnet"))) == 2
    capsys.readouterr()

    assert main(["bench", str(corpus), "--modes", "saturation-cegar,no-abstraction"]) == 0
    rows = read_csv_rows(capsys.readouterr().out)
    assert len(rows) == 4
    assert {row["mode"] for row in rows} == {"saturation-cegar", "no-abstraction"}
    assert all(row["verdict"] in ("SAT", "UNSAT") for row in rows)


def test_bench_unknown_mode(tmp_path):
    """Unknown modes are rejected before anything runs."""
    assert main(["bench", str(tmp_path), "--modes", "magic"]) == EXIT_USAGE
