"""hystlab: a desk-scale MOS circuit simulator and comparator workbench.

Square-law device models, modified nodal analysis with Newton/homotopy
DC solution, swept-DC and trapezoidal transient engines, hysteresis
and delay measurements, comparator netlist generation, and the
matching closed-form transition-current algebra.
"""

from .devices import (DeviceEval, MosGeometry, MosModel, MosPolarity,
                      NMOS_DEFAULT, PMOS_DEFAULT, Region, kfactor,
                      mos_charge_caps, mos_eval)
from .errors import (ConfigError, ConvergenceError, DomainError, ExtractionError,
                     HystlabError, MeasurementError, ModelError, NetlistError,
                     SingularMatrixError, SingularityError)
from .netlist import (Capacitor, DcSpec, ISource, Mosfet, Netlist, PulseSpec,
                      Resistor, VSource, parse_netlist, parse_value)
from .solver import Solution, SolverOptions, dc_solve
from .audit import kcl_residuals, verify_kcl
from .analysis import (DelayReport, HysteresisReport, SweepCurve, SweepDirection,
                       Waveform, branch_solution_at, dc_sweep, measure_delay,
                       measure_hysteresis, source_trace, sweep_csv, transient,
                       waveform_csv)
from .comparator import (ComparatorConfig, ComparatorVariant, LatchOperatingPoint,
                         build_comparator, build_latch_testbench, comparator_text,
                         extract_operating_point, latch_testbench_text, table_sizing)
from .analytics import (RatioDirection, SmallSignalLatch, TransitionResult,
                        current_ratio, latch_current_ratio_from_devices,
                        latch_voltages_large_signal, latch_voltages_small_signal,
                        node_squares, transition_currents)

__all__ = [name for name in dir() if not name.startswith("_")]
