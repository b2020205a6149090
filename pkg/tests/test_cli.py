"""Command-line interface: exit codes, report formats, determinism."""

import pytest

from hystlab import (
    RatioDirection,
    current_ratio,
    node_squares,
    parse_value,
    transition_currents,
)
from hystlab.comparator import LatchOperatingPoint
from hystlab.cli import run

PROBE = """current probe
IIN 0 a DC 0
R1 a 0 1meg
.end
"""

# 1 Mohm into a 1.5 V offset: node a swings symmetrically about the
# inverter-style threshold, so both delay edges are measurable
OFFSET = """offset probe
IIN 0 a DC 0
R1 a mid 1meg
V1 mid 0 DC 1.5
C1 a 0 20f
.end
"""

DIVIDER = """divider
V1 in 0 DC 3
R1 in mid 1k
R2 mid 0 2k
.end
"""


@pytest.fixture
def probe_file(tmp_path):
    p = tmp_path / "probe.cir"
    p.write_text(PROBE)
    return p


def _machine_lines(text):
    out = {}
    for line in text.splitlines():
        if "=" in line and " " not in line.split("=", 1)[0]:
            key, _, val = line.partition("=")
            try:
                out[key] = float(val)
            except ValueError:
                pass
    return out


def test_missing_file_is_usage_error(capsys):
    rc = run(["op", "/no/such/file.cir"])
    assert rc == 2
    assert "/no/such/file.cir" in capsys.readouterr().err


def test_parse_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.cir"
    bad.write_text("title\nR1 a 0 -5\n.end\n")
    assert run(["op", str(bad)]) == 3
    assert "error:" in capsys.readouterr().err


def test_neither_input_is_usage_error(capsys):
    assert run(["op"]) == 2
    assert "exactly one" in capsys.readouterr().err


def test_both_inputs_is_usage_error(probe_file, capsys):
    assert run(["op", str(probe_file), "--variant", "hysteresis"]) == 2


def test_gen_emits_canonical_netlist(capsys):
    assert run(["gen", "--variant", "hysteresis"]) == 0
    out = capsys.readouterr().out
    assert "M5 C A VDD VDD pm W=1.08u L=0.18u" in out
    assert out.endswith(".end\n")


def test_op_reports_nodes_and_devices(tmp_path, capsys):
    f = tmp_path / "div.cir"
    f.write_text(DIVIDER)
    assert run(["op", str(f)]) == 0
    out = capsys.readouterr().out
    assert "V(mid) = 2" in out
    assert "I(V1) = -0.001" in out
    assert "iterations=" in out


def test_dc_csv_both_directions(probe_file, tmp_path):
    out = tmp_path / "sweep.csv"
    rc = run(["dc", str(probe_file), "--source", "IIN", "--from=-1u",
              "--to", "1u", "--step", "0.5u", "--both", "-o", str(out)])
    assert rc == 0
    text = out.read_text()
    assert text.count("stimulus,") == 2
    first = text.splitlines()[1].split(",")
    assert float(first[0]) == -1e-6


def test_tran_csv(tmp_path):
    f = tmp_path / "rc.cir"
    f.write_text("""rc
V1 in 0 PULSE(0 1 0 1p 1p 5u 0)
R1 in out 1k
C1 out 0 1n
.end
""")
    out = tmp_path / "wave.csv"
    rc = run(["tran", str(f), "--dt", "10n", "--stop", "1u", "-o", str(out)])
    assert rc == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0].startswith("time,")
    assert len(lines) == 102  # header + 101 samples


def test_hyst_resistor_report(probe_file, capsys):
    rc = run(["hyst", str(probe_file), "--range", "2u", "--step", "10n",
              "--node", "a"])
    assert rc == 0
    vals = _machine_lines(capsys.readouterr().out)
    # 1.5 V threshold across (1 Mohm || gmin): both edges at the same spot
    assert vals["i_t1"] == 1.5003125e-06
    assert vals["i_t2"] == 1.5003125e-06
    assert vals["i_hy"] == abs(vals["i_t1"] - vals["i_t2"])
    assert vals["i_hy"] == 0.0
    assert vals["resolution"] <= 1e-9


def test_hyst_runs_are_byte_identical(probe_file, capsys):
    argv = ["hyst", str(probe_file), "--range", "2u", "--step", "50n",
            "--node", "a"]
    assert run(argv) == 0
    first = capsys.readouterr().out
    assert run(argv) == 0
    assert capsys.readouterr().out == first


def test_hyst_without_crossing_fails(probe_file, capsys):
    rc = run(["hyst", str(probe_file), "--range", "2u", "--step", "50n",
              "--node", "a", "--threshold", "5"])
    assert rc == 1
    assert "found 0" in capsys.readouterr().err


def test_delay_report(tmp_path, capsys):
    f = tmp_path / "offset.cir"
    f.write_text(OFFSET)
    rc = run(["delay", str(f), "--amp", "2u", "--period", "400n",
              "--node", "a"])
    assert rc == 0
    vals = _machine_lines(capsys.readouterr().out)
    # dominated by the 20 ns RC at node a; edges nearly symmetric
    assert 10e-9 < vals["t_plh"] < 20e-9
    assert vals["t_phl"] == pytest.approx(vals["t_plh"], abs=1e-11)
    assert vals["average"] == (vals["t_plh"] + vals["t_phl"]) / 2


def test_delay_threshold_never_crossed_fails(probe_file, capsys):
    # without the offset the node swings +/-2 V around 0, crossing
    # 1.5 V off-phase with the stimulus edges
    rc = run(["delay", str(probe_file), "--amp", "2u", "--period", "400n",
              "--node", "a"])
    assert rc == 1


def test_analytic_matches_library(capsys):
    rc = run(["analytic", "--kn7", "127.5u", "--kn9", "170u", "--kp3", "22.5u",
              "--kp5", "180u", "--vth", "0.5", "--id1", "21.86u",
              "--id2", "21.86u", "--vc", "1.2667", "--vd", "1.2667"])
    assert rc == 0
    vals = _machine_lines(capsys.readouterr().out)
    # feed the library the same parsed floats the CLI saw
    kn7, kn9 = parse_value("127.5u"), parse_value("170u")
    id_ = parse_value("21.86u")
    op = LatchOperatingPoint(k_n7=kn7, k_n9=kn9, k_p3=parse_value("22.5u"),
                             k_p5=parse_value("180u"), v_th=0.5, i_d1=id_,
                             i_d2=id_, i_ref=0.0, v_c=1.2667,
                             v_d=1.2667, i_1=0.0, i_2=0.0)
    sq_c, sq_d = node_squares(op, 0.0)
    p = current_ratio(1.2667, 1.2667, 0.5, kn9 / kn7,
                      RatioDirection.LOW_TO_HIGH)
    pp = current_ratio(1.2667, 1.2667, 0.5, kn9 / kn7,
                       RatioDirection.HIGH_TO_LOW)
    tr = transition_currents(0.0, id_, id_, p, pp)
    assert vals["sq_c"] == sq_c and vals["sq_d"] == sq_d
    assert vals["p"] == p and vals["p_prime"] == pp
    assert vals["i_t1"] == tr.i_t1 and vals["i_t2"] == tr.i_t2
    assert vals["i_hy"] == tr.i_hy


def test_analytic_singular_input_fails(capsys):
    rc = run(["analytic", "--kn7", "100u", "--kn9", "100u", "--kp3", "30u",
              "--kp5", "30u", "--vth", "0.5", "--id1", "10u", "--id2", "10u",
              "--vc", "1.0", "--vd", "1.0"])
    assert rc == 1


def test_bad_si_value_is_usage_error():
    assert run(["hyst", "--variant", "hysteresis", "--range", "2x",
                "--step", "10n"]) == 2
