"""Sweep, hysteresis-measurement, transient and delay checks."""

import numpy as np
import pytest

from hystlab import (
    ConvergenceError,
    MeasurementError,
    SweepCurve,
    SweepDirection,
    branch_solution_at,
    dc_sweep,
    measure_delay,
    measure_hysteresis,
    parse_netlist,
    source_trace,
    sweep_csv,
    transient,
    waveform_csv,
)

PROBE = """current probe
IIN 0 a DC 0
R1 a 0 1meg
.end
"""

RC_STEP = """rc lowpass
V1 in 0 PULSE(0 1 0 1p 1p 5u 0)
R1 in out 1k
C1 out 0 1n
.end
"""


def test_sweep_linear_in_stimulus():
    net = parse_netlist(PROBE)
    curve = dc_sweep(net, "IIN", -2e-6, 2e-6, 0.5e-6)
    stim = curve.stimulus()
    va = curve.node("a")
    assert curve.direction is SweepDirection.UP
    assert np.all(np.diff(stim) > 0)
    # node a sees the 1 MOhm in parallel with the gmin floor
    assert np.max(np.abs(va - stim / (1e-6 + 1e-12))) < 1e-9


def test_sweep_grid_and_direction():
    net = parse_netlist(PROBE)
    down = dc_sweep(net, "IIN", 2e-6, -2e-6, 0.5e-6)
    assert down.direction is SweepDirection.DOWN
    assert down.stimulus()[0] == 2e-6
    assert down.stimulus()[-1] == -2e-6
    # stop off the step grid still gets an endpoint sample
    ragged = dc_sweep(net, "IIN", 0.0, 1.05e-6, 0.5e-6)
    assert ragged.stimulus()[-1] == pytest.approx(1.05e-6)


def test_monostable_path_independence():
    net = parse_netlist(PROBE)
    up = dc_sweep(net, "IIN", -1e-6, 1e-6, 0.25e-6)
    dn = dc_sweep(net, "IIN", 1e-6, -1e-6, 0.25e-6)
    for (su, nu), (sd, nd) in zip(up.samples, reversed(dn.samples)):
        assert su == pytest.approx(sd, abs=1e-18)
        assert nu["a"] == pytest.approx(nd["a"], abs=1e-9)


def test_sweep_tags_failures_with_stimulus():
    net = parse_netlist("""stuck
IIN 0 a DC 0
M1 a 0 0 0 nch W=1u L=1u
.model nch NMOS (KP=200u VTO=0.5)
.end
""")
    with pytest.raises(ConvergenceError) as exc:
        dc_sweep(net, "IIN", 0.0, 1e-3, 0.5e-3)
    assert "sweep failed at" in str(exc.value)


def test_hysteresis_on_monostable_is_zero():
    net = parse_netlist(PROBE)
    up = dc_sweep(net, "IIN", -2e-6, 2e-6, 10e-9)
    dn = dc_sweep(net, "IIN", 2e-6, -2e-6, 10e-9)
    rep = measure_hysteresis(up, dn, output_node="a", threshold=1.5,
                             refine_to=1e-9, netlist=net)
    # 1.5 V across 1 MOhm: both transitions at 1.5 uA
    assert rep.i_t1 == pytest.approx(1.5e-6, abs=2e-9)
    assert rep.i_t2 == pytest.approx(1.5e-6, abs=2e-9)
    assert rep.i_hy == abs(rep.i_t1 - rep.i_t2)
    assert rep.i_hy <= 2e-9
    assert rep.resolution <= 1e-9


def test_hysteresis_band_located(hysteresis_net):
    up = dc_sweep(hysteresis_net, "IIN", -8e-6, 8e-6, 50e-9)
    dn = dc_sweep(hysteresis_net, "IIN", 8e-6, -8e-6, 50e-9)
    rep = measure_hysteresis(up, dn, output_node="OUT", threshold=1.5,
                             refine_to=1e-9, netlist=hysteresis_net)
    assert rep.i_t1 > rep.i_t2
    assert rep.i_t1 == pytest.approx(3.851e-6, abs=5e-9)
    assert rep.i_t2 == pytest.approx(-4.651e-6, abs=5e-9)
    assert rep.i_hy == abs(rep.i_t1 - rep.i_t2)
    assert rep.threshold == 1.5


def test_no_crossing_is_an_error():
    net = parse_netlist(PROBE)
    up = dc_sweep(net, "IIN", -2e-6, 2e-6, 0.5e-6)
    dn = dc_sweep(net, "IIN", 2e-6, -2e-6, 0.5e-6)
    with pytest.raises(MeasurementError) as exc:
        measure_hysteresis(up, dn, output_node="a", threshold=5.0,
                           refine_to=1e-9, netlist=net)
    assert "found 0" in str(exc.value)


def test_multiple_crossings_is_an_error():
    net = parse_netlist(PROBE)
    zigzag = [(i * 1e-7, {"a": v}) for i, v in enumerate([0.0, 2.0, 1.0, 2.0, 2.2])]
    up = SweepCurve("IIN", SweepDirection.UP, tuple(zigzag))
    dn = dc_sweep(net, "IIN", 2e-6, -2e-6, 1e-6)
    with pytest.raises(MeasurementError) as exc:
        measure_hysteresis(up, dn, output_node="a", threshold=1.5,
                           refine_to=1e-9, netlist=net)
    assert "found 3" in str(exc.value)


def test_rc_step_matches_exponential():
    wave = transient(parse_netlist(RC_STEP), dt=1e-9, tstop=5e-6)
    t = wave.times()
    v = wave.node("out")
    tau = 1e-6
    exact = 1.0 - np.exp(-np.clip(t - 1e-12, 0.0, None) / tau)
    assert np.max(np.abs(v - exact)) < 0.01
    assert np.all(np.diff(t) > 0)
    assert np.allclose(np.diff(t), wave.dt, rtol=1e-9)


def test_transient_holds_dc_equilibrium():
    net = parse_netlist("""hold
V1 a 0 DC 2
R1 a b 1k
R2 b 0 1k
C1 b 0 1n
.end
""")
    wave = transient(net, dt=1e-8, tstop=1e-6)
    b = wave.node("b")
    assert np.max(np.abs(b - b[0])) < 1e-9
    assert b[0] == pytest.approx(1.0, rel=1e-6)


def _trapezoid(t, period, rise, lo, hi):
    ph = t % period
    half = period / 2
    if ph < rise:
        return lo + (hi - lo) * ph / rise
    if ph < half:
        return hi
    if ph < half + rise:
        return hi - (hi - lo) * (ph - half) / rise
    return lo


def test_delay_of_shifted_copy():
    times = np.arange(0.0, 400e-9, 1e-9)
    stim = np.array([_trapezoid(t, 200e-9, 10e-9, -1.0, 1.0) for t in times])
    out = np.array([_trapezoid(max(t - 1e-9, 0.0), 200e-9, 10e-9, 0.0, 3.0)
                    for t in times])
    rep = measure_delay(times, stim, out, vdd=3.0)
    assert rep.t_plh == pytest.approx(1e-9, abs=1e-15)
    assert rep.t_phl == pytest.approx(1e-9, abs=1e-15)
    assert rep.average == (rep.t_plh + rep.t_phl) / 2


def test_delay_hand_computed_ramps():
    # stimulus crosses 0 at 25 ns / 75 ns; output crosses 1.5 V at
    # 30 ns (rising, slope 0.3 V/ns from 0) and 80 ns (falling)
    times = np.arange(0.0, 100e-9, 1e-9)
    stim = np.interp(times, [0, 20e-9, 30e-9, 70e-9, 80e-9, 100e-9],
                     [-1, -1, 1, 1, -1, -1])
    out = np.interp(times, [0, 25e-9, 35e-9, 75e-9, 85e-9, 100e-9],
                    [0, 0, 3, 3, 0, 0])
    rep = measure_delay(times, stim, out, vdd=3.0)
    assert rep.t_plh == pytest.approx(5e-9, abs=1e-12)
    assert rep.t_phl == pytest.approx(5e-9, abs=1e-12)


def test_delay_missing_crossing_is_an_error():
    times = np.arange(0.0, 100e-9, 1e-9)
    stim = np.interp(times, [0, 40e-9, 60e-9, 100e-9], [-1, -1, 1, 1])
    out = np.full_like(times, 0.2)  # never crosses vdd/2
    with pytest.raises(MeasurementError):
        measure_delay(times, stim, out, vdd=3.0)


def test_source_trace_follows_pulse():
    net = parse_netlist("""pulse
IIN 0 a PULSE(-1u 1u 0 10n 10n 90n 200n)
R1 a 0 1k
.end
""")
    times = np.array([0.0, 5e-9, 50e-9, 105e-9, 150e-9, 205e-9])
    trace = source_trace(net, "IIN", times)
    spec = net.find_source("IIN").spec
    assert np.all(trace == [spec.value_at(t) for t in times])
    assert trace[0] == -1e-6
    assert trace[2] == 1e-6


def test_branch_solution_at_is_side_dependent(hysteresis_net):
    lo = branch_solution_at(hysteresis_net, "IIN", 0.0, approach_from=-8e-6)
    hi = branch_solution_at(hysteresis_net, "IIN", 0.0, approach_from=8e-6)
    # inside the hysteresis band the two approaches land on different branches
    assert lo.node_voltages["OUT"] < 1.0
    assert hi.node_voltages["OUT"] > 2.5


def test_sweep_csv_round_trips():
    net = parse_netlist(PROBE)
    curve = dc_sweep(net, "IIN", 0.0, 1e-6, 0.5e-6)
    text = sweep_csv(curve)
    lines = text.strip().splitlines()
    assert lines[0].split(",")[0] == "stimulus"
    assert "a" in lines[0].split(",")
    col = lines[0].split(",").index("a")
    # %.12e formatting: 13 significant digits survive the trip
    for (stim, nodes), line in zip(curve.samples, lines[1:]):
        parts = line.split(",")
        assert float(parts[0]) == pytest.approx(stim, rel=1e-12, abs=0)
        assert float(parts[col]) == pytest.approx(nodes["a"], rel=1e-12, abs=0)


def test_waveform_csv_round_trips():
    wave = transient(parse_netlist(RC_STEP), dt=1e-7, tstop=1e-6)
    lines = waveform_csv(wave).strip().splitlines()
    header = lines[0].split(",")
    assert header[0] == "time"
    col = header.index("out")
    for (t, nodes), line in zip(wave.samples, lines[1:]):
        parts = line.split(",")
        assert float(parts[0]) == pytest.approx(t, rel=1e-12, abs=0)
        assert float(parts[col]) == pytest.approx(nodes["out"], rel=1e-12, abs=0)
