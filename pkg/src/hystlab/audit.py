"""Independent KCL audit of a converged DC solution.

Re-sums element currents straight from the node voltages and the
netlist, through mos_eval, without touching any solver workspace.
Used by the test suite to cross-check every Solution the solver emits.
"""

from __future__ import annotations

from .devices import mos_eval
from .errors import HystlabError
from .netlist import Capacitor, ISource, Mosfet, Netlist, Resistor, VSource
from .solver import Solution


def kcl_residuals(netlist: Netlist, solution: Solution) -> dict[str, tuple[float, float]]:
    """Per non-ground node: (sum of currents leaving, local current scale)."""
    v = solution.node_voltages
    residual = {n: 0.0 for n in netlist.nodes if n != "0"}
    scale = {n: 0.0 for n in residual}

    def add(node: str, current: float):
        if node != "0":
            residual[node] += current
            scale[node] += abs(current)

    for el in netlist.elements:
        if isinstance(el, Resistor):
            i = (v[el.pos] - v[el.neg]) / el.ohms
            add(el.pos, i)
            add(el.neg, -i)
        elif isinstance(el, Capacitor):
            continue  # open at DC
        elif isinstance(el, ISource):
            val = el.spec.value_at(0.0)
            add(el.pos, val)
            add(el.neg, -val)
        elif isinstance(el, VSource):
            j = solution.branch_currents[el.name]
            add(el.pos, j)
            add(el.neg, -j)
        elif isinstance(el, Mosfet):
            ev = mos_eval(el.model, el.geom, v[el.g] - v[el.s], v[el.d] - v[el.s])
            add(el.d, ev.id)
            add(el.s, -ev.id)

    for n in residual:
        shunt = solution.gmin_used * v[n]
        residual[n] += shunt
        scale[n] += abs(shunt)

    return {n: (residual[n], scale[n]) for n in residual}


def verify_kcl(netlist: Netlist, solution: Solution,
               abstol: float = 1e-12, reltol: float = 1e-4) -> float:
    """Check every node against abstol + reltol*scale.

    Returns the worst residual [A]; raises HystlabError on violation.
    """
    worst = 0.0
    for node, (res, sc) in kcl_residuals(netlist, solution).items():
        worst = max(worst, abs(res))
        if abs(res) > abstol + reltol * sc:
            raise HystlabError(
                f"KCL violated at node {node}: residual {res:.3e} A "
                f"against scale {sc:.3e} A")
    return worst
