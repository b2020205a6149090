"""Nonlinear DC solution by modified nodal analysis.

Unknowns are the non-ground node voltages plus one branch current per
voltage source. The residual at a node is the sum of currents leaving
it. Newton iteration is damped by a per-node voltage clamp; cold starts
fall back to a gmin ladder and then to source stepping.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .devices import DeviceEval, mos_eval
from .errors import ConvergenceError, SingularMatrixError
from .netlist import Capacitor, ISource, Mosfet, Netlist, Resistor, VSource

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverOptions:
    abstol: float = 1e-12        # nodal current tolerance [A]
    reltol: float = 1e-4
    vntol: float = 1e-6          # voltage step / branch row tolerance [V]
    max_newton_iters: int = 100
    dv_clamp: float = 0.5        # max node-voltage move per iteration [V]
    gmin_floor: float = 1e-12    # always-on shunt to ground [S]
    gmin_start: float = 1e-2     # first gmin ladder rung [S]
    source_steps: int = 10

    def __post_init__(self):
        for name in ("abstol", "reltol", "vntol", "max_newton_iters",
                     "dv_clamp", "gmin_floor", "gmin_start", "source_steps"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class Solution:
    node_voltages: dict[str, float]         # includes ground "0" at 0.0
    branch_currents: dict[str, float]       # per voltage source [A]
    device_evals: dict[str, DeviceEval]     # per mosfet
    iterations: int
    gmin_used: float                        # shunt present in the solved system [S]


@dataclass(frozen=True)
class Companion:
    """Linear Norton stamp used by the transient engine.

    Current pos->neg through the companion is G*(v_pos - v_neg) + ieq.
    Indices are unknown-vector positions, -1 for ground.
    """

    pos: int
    neg: int
    g: float    # [S]
    ieq: float  # [A]


@dataclass
class _Assembled:
    f: np.ndarray
    jac: np.ndarray
    node_scale: np.ndarray
    branch_scale: np.ndarray
    evals: dict[str, DeviceEval] = field(default_factory=dict)


class _System:
    """Precompiled stamp lists for one netlist."""

    def __init__(self, netlist: Netlist):
        self.netlist = netlist
        self.node_names = tuple(n for n in netlist.nodes if n != "0")
        self.index = {n: i for i, n in enumerate(self.node_names)}
        self.n_nodes = len(self.node_names)

        self.resistors: list[tuple[int, int, float]] = []
        self.isources: list[tuple[int, int, object]] = []
        self.vsources: list[tuple[int, int, int, str, object]] = []
        self.mosfets: list[tuple[int, int, int, str, object, object]] = []

        nb = self.n_nodes
        for el in netlist.elements:
            if isinstance(el, Resistor):
                self.resistors.append((self._ni(el.pos), self._ni(el.neg), 1.0 / el.ohms))
            elif isinstance(el, Capacitor):
                continue  # open in DC; transient replaces with companions
            elif isinstance(el, ISource):
                self.isources.append((self._ni(el.pos), self._ni(el.neg), el.spec))
            elif isinstance(el, VSource):
                self.vsources.append((self._ni(el.pos), self._ni(el.neg), nb, el.name, el.spec))
                nb += 1
            elif isinstance(el, Mosfet):
                self.mosfets.append((self._ni(el.d), self._ni(el.g), self._ni(el.s),
                                     el.name, el.model, el.geom))
        self.n_unknowns = nb

    def _ni(self, node: str) -> int:
        return -1 if node == "0" else self.index[node]

    def unknown_name(self, i: int) -> str:
        if i < self.n_nodes:
            return self.node_names[i]
        return f"I({self.vsources[i - self.n_nodes][3]})"

    def vector_from_guess(self, guess: dict[str, float] | None) -> np.ndarray:
        x = np.zeros(self.n_unknowns)
        if guess:
            for name, v in guess.items():
                i = self.index.get(name)
                if i is not None:
                    x[i] = v
        return x

    def assemble(self, x: np.ndarray, gmin: float, src_scale: float = 1.0,
                 time: float = 0.0, companions: tuple[Companion, ...] = ()) -> _Assembled:
        n = self.n_unknowns
        f = np.zeros(n)
        jac = np.zeros((n, n))
        node_scale = np.zeros(self.n_nodes)
        branch_scale = np.zeros(n - self.n_nodes)

        def v(i: int) -> float:
            return 0.0 if i < 0 else x[i]

        def add_f(i: int, val: float):
            if i >= 0:
                f[i] += val

        def add_j(i: int, k: int, val: float):
            if i >= 0 and k >= 0:
                jac[i, k] += val

        def add_scale(i: int, val: float):
            if 0 <= i < self.n_nodes:
                node_scale[i] += abs(val)

        for ip, ineg, g in self.resistors:
            i = g * (v(ip) - v(ineg))
            add_f(ip, i)
            add_f(ineg, -i)
            add_j(ip, ip, g)
            add_j(ip, ineg, -g)
            add_j(ineg, ip, -g)
            add_j(ineg, ineg, g)
            add_scale(ip, i)
            add_scale(ineg, i)

        for ip, ineg, spec in self.isources:
            val = spec.value_at(time) * src_scale
            add_f(ip, val)
            add_f(ineg, -val)
            add_scale(ip, val)
            add_scale(ineg, val)

        for ip, ineg, bi, _name, spec in self.vsources:
            j = x[bi]
            add_f(ip, j)
            add_f(ineg, -j)
            add_j(ip, bi, 1.0)
            add_j(ineg, bi, -1.0)
            add_scale(ip, j)
            add_scale(ineg, j)
            e = spec.value_at(time) * src_scale
            f[bi] = (v(ip) - v(ineg)) - e
            add_j(bi, ip, 1.0)
            add_j(bi, ineg, -1.0)
            branch_scale[bi - self.n_nodes] = abs(v(ip)) + abs(v(ineg)) + abs(e)

        evals: dict[str, DeviceEval] = {}
        for idx_d, idx_g, idx_s, name, model, geom in self.mosfets:
            ev = mos_eval(model, geom, v(idx_g) - v(idx_s), v(idx_d) - v(idx_s))
            evals[name] = ev
            add_f(idx_d, ev.id)
            add_f(idx_s, -ev.id)
            add_j(idx_d, idx_g, ev.gm)
            add_j(idx_d, idx_d, ev.gds)
            add_j(idx_d, idx_s, -(ev.gm + ev.gds))
            add_j(idx_s, idx_g, -ev.gm)
            add_j(idx_s, idx_d, -ev.gds)
            add_j(idx_s, idx_s, ev.gm + ev.gds)
            add_scale(idx_d, ev.id)
            add_scale(idx_s, ev.id)

        for c in companions:
            i = c.g * (v(c.pos) - v(c.neg)) + c.ieq
            add_f(c.pos, i)
            add_f(c.neg, -i)
            add_j(c.pos, c.pos, c.g)
            add_j(c.pos, c.neg, -c.g)
            add_j(c.neg, c.pos, -c.g)
            add_j(c.neg, c.neg, c.g)
            add_scale(c.pos, abs(c.g * (v(c.pos) - v(c.neg))) + abs(c.ieq))
            add_scale(c.neg, abs(c.g * (v(c.pos) - v(c.neg))) + abs(c.ieq))

        # SPICE-style shunt on every node keeps floating gates solvable
        for i in range(self.n_nodes):
            f[i] += gmin * x[i]
            jac[i, i] += gmin
            node_scale[i] += abs(gmin * x[i])

        return _Assembled(f, jac, node_scale, branch_scale, evals)


def _residual_ok(sys_: _System, a: _Assembled, options: SolverOptions) -> bool:
    nn = sys_.n_nodes
    node_f = np.abs(a.f[:nn])
    if np.any(node_f > options.abstol + options.reltol * a.node_scale):
        return False
    branch_f = np.abs(a.f[nn:])
    return not np.any(branch_f > options.vntol + options.reltol * a.branch_scale)


def _newton(sys_: _System, x0: np.ndarray, options: SolverOptions, gmin: float,
            src_scale: float = 1.0, time: float = 0.0,
            companions: tuple[Companion, ...] = (), polish: bool = True):
    """Damped Newton loop. Returns (x, assembled, iterations, status).

    status: "ok" | "maxiter" | "singular" | "nonfinite".
    """
    x = x0.copy()
    nn = sys_.n_nodes
    iters = 0
    while iters < options.max_newton_iters:
        iters += 1
        a = sys_.assemble(x, gmin, src_scale, time, companions)
        if not (np.all(np.isfinite(a.f)) and np.all(np.isfinite(a.jac))):
            return x, a, iters, "nonfinite"
        try:
            dx = np.linalg.solve(a.jac, -a.f)
        except np.linalg.LinAlgError:
            return x, a, iters, "singular"
        if not np.all(np.isfinite(dx)):
            return x, a, iters, "nonfinite"
        dx[:nn] = np.clip(dx[:nn], -options.dv_clamp, options.dv_clamp)
        step_ok = bool(np.all(np.abs(dx) <= options.vntol
                              + options.reltol * np.abs(x + dx)))
        if step_ok and _residual_ok(sys_, a, options):
            # accept the residual-checked point, not the final micro-step
            if polish:
                x, a, _ = _polish(sys_, x, a, options, gmin, src_scale, time, companions)
            return x, a, iters, "ok"
        x = x + dx
    a = sys_.assemble(x, gmin, src_scale, time, companions)
    return x, a, iters, "maxiter"


def _polish(sys_: _System, x, a, options, gmin, src_scale, time, companions):
    # a few undamped refinement steps push nodal residuals well under
    # abstol so converged points audit cleanly
    nn = sys_.n_nodes
    extra = 0
    best = np.max(np.abs(a.f[:nn])) if nn else 0.0
    for _ in range(3):
        if best <= 0.1 * options.abstol:
            break
        try:
            dx = np.linalg.solve(a.jac, -a.f)
        except np.linalg.LinAlgError:
            break
        x_try = x + dx
        a_try = sys_.assemble(x_try, gmin, src_scale, time, companions)
        extra += 1
        worst = np.max(np.abs(a_try.f[:nn])) if nn else 0.0
        if not np.all(np.isfinite(a_try.f)) or worst >= best:
            break
        x, a, best = x_try, a_try, worst
    return x, a, extra


def _gmin_ladder(options: SolverOptions) -> list[float]:
    rungs = []
    g = options.gmin_start
    while g > options.gmin_floor * 1.001:
        rungs.append(g)
        g /= 10.0
    rungs.append(options.gmin_floor)
    return rungs


def _suspect_unknown(sys_: _System, jac: np.ndarray) -> str:
    try:
        _, _, vt = np.linalg.svd(jac)
        comp = int(np.argmax(np.abs(vt[-1])))
    except np.linalg.LinAlgError:
        comp = 0
    return sys_.unknown_name(comp)


def _build_solution(sys_: _System, x: np.ndarray, a: _Assembled,
                    iterations: int, gmin: float) -> Solution:
    voltages = {"0": 0.0}
    for name in sys_.netlist.nodes:
        if name != "0":
            voltages[name] = float(x[sys_.index[name]])
    branches = {name: float(x[bi]) for _, _, bi, name, _ in sys_.vsources}
    return Solution(voltages, branches, dict(a.evals), iterations, gmin)


def _plain_then_ladder(sys_: _System, x0: np.ndarray, options: SolverOptions):
    """Plain Newton, then a gmin ladder warm-chained rung to rung.

    Returns (x, assembled, iterations, converged). Raises
    SingularMatrixError when even the heaviest rung leaves the
    system matrix singular.
    """
    total = 0
    x, a, iters, status = _newton(sys_, x0, options, options.gmin_floor)
    total += iters
    if status == "ok":
        return x, a, total, True
    logger.debug("plain newton %s after %d iters", status, iters)

    x = x0
    for rung_no, g in enumerate(_gmin_ladder(options)):
        x, a, iters, status = _newton(sys_, x, options, g)
        total += iters
        if status == "singular" and rung_no == 0:
            raise SingularMatrixError(
                f"singular system matrix with gmin={g:g} S",
                suspect=_suspect_unknown(sys_, a.jac))
        if status != "ok":
            logger.debug("gmin ladder %s at %g S", status, g)
            return x, a, total, False
    return x, a, total, True


def dc_solve(netlist: Netlist, options: SolverOptions | None = None,
             initial_guess: dict[str, float] | None = None) -> Solution:
    """DC operating point.

    Plain Newton from the guess (or zero) first; on failure a gmin
    ladder, a cold restart of both when a guess was given, then source
    stepping. Raises ConvergenceError when all stages fail,
    SingularMatrixError when the system matrix stays singular under
    heavy gmin augmentation.
    """
    options = options or SolverOptions()
    sys_ = _System(netlist)
    total = 0

    starts = [sys_.vector_from_guess(initial_guess)]
    if initial_guess is not None:
        # a stale guess can strand Newton on a branch of the solution set
        # that no longer exists; from zero it lands on a surviving one
        starts.append(sys_.vector_from_guess(None))
    for x0 in starts:
        x, a, iters, ok = _plain_then_ladder(sys_, x0, options)
        total += iters
        if ok:
            return _build_solution(sys_, x, a, total, options.gmin_floor)

    # source stepping at full gmin floor
    x = sys_.vector_from_guess(initial_guess)
    for k in range(1, options.source_steps + 1):
        alpha = k / options.source_steps
        x, a, iters, status = _newton(sys_, x, options, options.gmin_floor,
                                      src_scale=alpha)
        total += iters
        if status != "ok":
            nn = sys_.n_nodes
            residual = float(np.max(np.abs(a.f[:nn]))) if nn else 0.0
            raise ConvergenceError(
                f"no DC convergence (source stepping, alpha={alpha:.1f}, "
                f"residual={residual:.3e} A)",
                stage="source stepping", residual=residual)
    return _build_solution(sys_, x, a, total, options.gmin_floor)
