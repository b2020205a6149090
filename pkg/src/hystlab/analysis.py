"""Swept-DC and transient engines plus the derived measurements.

The hysteresis measurement mirrors the bench procedure: trace the
transfer curve in both directions with warm-started solves, then
bisect each output transition down to the requested current
resolution. Delay measurement works on sampled waveforms.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, MeasurementError, NetlistError
from .netlist import Capacitor, DcSpec, Mosfet, Netlist
from .solver import Companion, Solution, SolverOptions, _newton, _System, dc_solve

logger = logging.getLogger(__name__)

CMIN_DEFAULT = 1e-15  # transient shunt capacitance per node [F]


class SweepDirection(enum.Enum):
    UP = "up"
    DOWN = "down"


@dataclass(frozen=True)
class SweepCurve:
    source_name: str
    direction: SweepDirection
    samples: tuple[tuple[float, dict[str, float]], ...]

    def stimulus(self) -> np.ndarray:
        return np.array([v for v, _ in self.samples])

    def node(self, name: str) -> np.ndarray:
        return np.array([volts[name] for _, volts in self.samples])


@dataclass(frozen=True)
class Waveform:
    samples: tuple[tuple[float, dict[str, float]], ...]
    dt: float

    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.samples])

    def node(self, name: str) -> np.ndarray:
        return np.array([volts[name] for _, volts in self.samples])


@dataclass(frozen=True)
class HysteresisReport:
    i_t1: float        # up-sweep transition [A]
    i_t2: float        # down-sweep transition [A]
    i_hy: float        # |i_t1 - i_t2| [A]
    resolution: float  # worst refined bracket width [A]
    threshold: float   # output decision level [V]


@dataclass(frozen=True)
class DelayReport:
    t_plh: float    # [s]
    t_phl: float    # [s]
    average: float  # [s]


def _sweep_grid(start: float, stop: float, step: float) -> list[float]:
    if step <= 0.0:
        raise NetlistError(f"sweep step must be > 0, got {step}")
    span = stop - start
    if span == 0.0:
        return [start]
    sign = 1.0 if span > 0.0 else -1.0
    n = int(abs(span) / step + 1e-9)
    values = [start + sign * step * i for i in range(n + 1)]
    if abs(values[-1] - stop) > 1e-12 * max(1.0, abs(stop)):
        values.append(stop)
    return values


def dc_sweep(netlist: Netlist, source_name: str, start: float, stop: float,
             step: float, options: SolverOptions | None = None) -> SweepCurve:
    """Solve along a stimulus grid, warm-starting each point from the last.

    The warm chain is what lets a bistable circuit hold its branch
    through the hysteresis band.
    """
    src = netlist.find_source(source_name)
    if not isinstance(src.spec, DcSpec):
        raise NetlistError(f"source {source_name!r} is not a DC source")
    values = _sweep_grid(start, stop, step)
    direction = SweepDirection.UP if stop >= start else SweepDirection.DOWN

    samples = []
    guess = None
    for v in values:
        point = netlist.replaced_source(source_name, DcSpec(v))
        try:
            sol = dc_solve(point, options, initial_guess=guess)
        except ConvergenceError as e:
            raise ConvergenceError(
                f"sweep failed at {source_name}={v:.6g}: {e}",
                stage=e.stage, residual=e.residual) from None
        samples.append((v, sol.node_voltages))
        guess = sol.node_voltages
    return SweepCurve(source_name, direction, tuple(samples))


def _crossing_brackets(curve: SweepCurve, node: str, threshold: float):
    out = curve.node(node)
    above = out >= threshold
    return [i for i in range(len(out) - 1) if above[i] != above[i + 1]]


def _refine_transition(netlist: Netlist, curve: SweepCurve, node: str,
                       threshold: float, refine_to: float,
                       options: SolverOptions | None):
    brackets = _crossing_brackets(curve, node, threshold)
    if len(brackets) != 1:
        raise MeasurementError(
            f"expected exactly one {node} crossing of {threshold:g} V on the "
            f"{curve.direction.value} sweep, found {len(brackets)}")
    i = brackets[0]
    a, volts_a = curve.samples[i]
    b, _ = curve.samples[i + 1]
    pre_side = volts_a[node] >= threshold

    # warm every probe from the pre-transition side so the bisection
    # follows the surviving branch right up to the jump
    while abs(b - a) > refine_to:
        mid = 0.5 * (a + b)
        point = netlist.replaced_source(curve.source_name, DcSpec(mid))
        sol = dc_solve(point, options, initial_guess=volts_a)
        if (sol.node_voltages[node] >= threshold) == pre_side:
            a, volts_a = mid, sol.node_voltages
        else:
            b = mid
    return 0.5 * (a + b), abs(b - a)


def measure_hysteresis(up: SweepCurve, down: SweepCurve, output_node: str,
                       threshold: float, refine_to: float, netlist: Netlist,
                       options: SolverOptions | None = None) -> HysteresisReport:
    """Locate both transition currents and report the hysteresis width."""
    if refine_to <= 0.0:
        raise MeasurementError(f"refine_to must be > 0, got {refine_to}")
    i_t1, w1 = _refine_transition(netlist, up, output_node, threshold,
                                  refine_to, options)
    i_t2, w2 = _refine_transition(netlist, down, output_node, threshold,
                                  refine_to, options)
    return HysteresisReport(i_t1=i_t1, i_t2=i_t2, i_hy=abs(i_t1 - i_t2),
                            resolution=max(w1, w2), threshold=threshold)


def _gather_caps(netlist: Netlist, sys_: _System, cmin: float):
    # (pos index, neg index, farads) with -1 for ground
    caps = []
    for el in netlist.elements:
        if isinstance(el, Capacitor):
            if el.farads > 0.0:
                caps.append((sys_._ni(el.pos), sys_._ni(el.neg), el.farads))
        elif isinstance(el, Mosfet):
            if el.model.cgs > 0.0:
                caps.append((sys_._ni(el.g), sys_._ni(el.s), el.model.cgs))
            if el.model.cgd > 0.0:
                caps.append((sys_._ni(el.g), sys_._ni(el.d), el.model.cgd))
    if cmin > 0.0:
        for i in range(sys_.n_nodes):
            caps.append((i, -1, cmin))
    return caps


def transient(netlist: Netlist, dt: float, tstop: float,
              options: SolverOptions | None = None,
              cmin: float = CMIN_DEFAULT) -> Waveform:
    """Fixed-step trapezoidal integration from the t=0 operating point."""
    if dt <= 0.0:
        raise MeasurementError(f"dt must be > 0, got {dt}")
    if tstop < dt:
        raise MeasurementError(f"tstop must be >= dt, got {tstop}")
    options = options or SolverOptions()

    start = dc_solve(netlist, options)
    sys_ = _System(netlist)
    caps = _gather_caps(netlist, sys_, cmin)

    x = sys_.vector_from_guess(start.node_voltages)
    for ip, ineg, bi, name, _spec in sys_.vsources:
        x[bi] = start.branch_currents[name]

    def across(ip: int, ineg: int) -> float:
        vp = 0.0 if ip < 0 else x[ip]
        vn = 0.0 if ineg < 0 else x[ineg]
        return vp - vn

    v_cap = [across(ip, ineg) for ip, ineg, _ in caps]
    i_cap = [0.0] * len(caps)  # no capacitor current at DC

    samples = [(0.0, start.node_voltages)]
    n_steps = int(tstop / dt + 1e-9)
    for k in range(1, n_steps + 1):
        t = k * dt
        companions = tuple(
            Companion(ip, ineg, 2.0 * c / dt, -2.0 * c / dt * v_cap[j] - i_cap[j])
            for j, (ip, ineg, c) in enumerate(caps))
        x, a, iters, status = _newton(sys_, x, options, options.gmin_floor,
                                      time=t, companions=companions)
        if status != "ok":
            nn = sys_.n_nodes
            residual = float(np.max(np.abs(a.f[:nn]))) if nn else 0.0
            raise ConvergenceError(
                f"transient step failed at t={t:.6g} s ({status})",
                stage=f"transient t={t:.6g}", residual=residual)
        for j, (ip, ineg, c) in enumerate(caps):
            g = 2.0 * c / dt
            ieq = -g * v_cap[j] - i_cap[j]
            v_new = across(ip, ineg)
            i_cap[j] = g * v_new + ieq
            v_cap[j] = v_new
        volts = {"0": 0.0}
        for name in sys_.node_names:
            volts[name] = float(x[sys_.index[name]])
        samples.append((t, volts))
    return Waveform(tuple(samples), dt)


def source_trace(netlist: Netlist, source_name: str, times: np.ndarray) -> np.ndarray:
    """Sample a source's stimulus spec on a time grid."""
    spec = netlist.find_source(source_name).spec
    return np.array([spec.value_at(float(t)) for t in times])


def _interp_crossings(times: np.ndarray, values: np.ndarray, level: float):
    # (time, rising?) for every linear-interpolated crossing of level
    out = []
    above = values >= level
    for i in range(len(values) - 1):
        if above[i] == above[i + 1]:
            continue
        frac = (level - values[i]) / (values[i + 1] - values[i])
        out.append((times[i] + frac * (times[i + 1] - times[i]), bool(above[i + 1])))
    return out


def measure_delay(times: np.ndarray, stimulus: np.ndarray,
                  output: np.ndarray, vdd: float) -> DelayReport:
    """Propagation delay from stimulus 50% edges to output vdd/2 crossings."""
    s_level = 0.5 * (float(np.max(stimulus)) + float(np.min(stimulus)))
    edges = _interp_crossings(times, stimulus, s_level)
    if not edges:
        raise MeasurementError("stimulus has no 50% edges")
    out_crossings = _interp_crossings(times, output, 0.5 * vdd)

    rising: list[float] = []
    falling: list[float] = []
    for k, (t_edge, _edge_up) in enumerate(edges):
        t_next = edges[k + 1][0] if k + 1 < len(edges) else float(times[-1]) + 1.0
        hit = next((c for c in out_crossings if t_edge <= c[0] < t_next), None)
        if hit is None:
            raise MeasurementError(
                f"no output crossing after the stimulus edge at {t_edge:.6g} s")
        (rising if hit[1] else falling).append(hit[0] - t_edge)
    if not rising or not falling:
        raise MeasurementError("need both low-to-high and high-to-low output edges")
    t_plh = float(np.mean(rising))
    t_phl = float(np.mean(falling))
    return DelayReport(t_plh=t_plh, t_phl=t_phl, average=0.5 * (t_plh + t_phl))


def branch_solution_at(netlist: Netlist, source_name: str, value: float,
                       approach_from: float, options: SolverOptions | None = None,
                       steps: int = 32) -> Solution:
    """Solve at one stimulus value, approached by continuation.

    Warm-walks the solver from approach_from so the returned Solution
    sits on the branch reachable from that side, which matters inside
    a hysteresis band.
    """
    guess = None
    for k in range(steps + 1):
        v = approach_from + (value - approach_from) * k / steps
        point = netlist.replaced_source(source_name, DcSpec(v))
        sol = dc_solve(point, options, initial_guess=guess)
        guess = sol.node_voltages
    return sol


def sweep_csv(curve: SweepCurve) -> str:
    """CSV text: header stimulus,<nodes>; ground column omitted."""
    nodes = [n for n in curve.samples[0][1] if n != "0"]
    lines = ["stimulus," + ",".join(nodes)]
    for v, volts in curve.samples:
        lines.append(",".join(f"{x:.12e}" for x in (v, *(volts[n] for n in nodes))))
    return "\n".join(lines) + "\n"


def waveform_csv(wave: Waveform) -> str:
    """CSV text: header time,<nodes>; ground column omitted."""
    nodes = [n for n in wave.samples[0][1] if n != "0"]
    lines = ["time," + ",".join(nodes)]
    for t, volts in wave.samples:
        lines.append(",".join(f"{x:.12e}" for x in (t, *(volts[n] for n in nodes))))
    return "\n".join(lines) + "\n"
