"""SPICE-like netlist subset: value grammar, parser, serializer.

Line-oriented format, first line is the title, '*' starts a comment.
Supported elements: R, C, V, I, M. Supported cards: .model, .op, .dc,
.tran, .end. Node names are arbitrary identifiers; "0" is ground and
"gnd" is accepted as an alias for it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from .devices import MosGeometry, MosModel, MosPolarity, NMOS_DEFAULT, PMOS_DEFAULT
from .errors import NetlistError

_VALUE_RE = re.compile(r"^[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")

# "meg" must be tried before "m"
_SUFFIXES = (
    ("meg", 1e6),
    ("f", 1e-15),
    ("p", 1e-12),
    ("n", 1e-9),
    ("u", 1e-6),
    ("m", 1e-3),
    ("k", 1e3),
    ("g", 1e9),
)


def parse_value(token: str) -> float:
    """Decimal with optional SI suffix; trailing unit letters ignored.

    "1k" -> 1000, "2.5uF" -> 2.5e-6, "3MEG" -> 3e6. Anything outside
    that grammar raises NetlistError.
    """
    m = _VALUE_RE.match(token)
    if not m:
        raise NetlistError(f"malformed value {token!r}")
    mantissa = float(m.group(0))
    rest = token[m.end():]
    if not rest:
        return mantissa
    low = rest.lower()
    for suffix, mult in _SUFFIXES:
        if low.startswith(suffix):
            tail = low[len(suffix):]
            if tail and not tail.isalpha():
                raise NetlistError(f"malformed value {token!r} (bad unit tail {tail!r})")
            return mantissa * mult
    raise NetlistError(f"unknown suffix {rest!r} in value {token!r}")


@dataclass(frozen=True)
class DcSpec:
    value: float  # [V] or [A]

    def value_at(self, t: float) -> float:
        return self.value


@dataclass(frozen=True)
class PulseSpec:
    v1: float      # initial level
    v2: float      # pulsed level
    delay: float   # [s]
    rise: float    # [s], > 0
    fall: float    # [s], > 0
    width: float   # [s], >= 0
    period: float  # [s], 0 means single-shot

    def __post_init__(self):
        if self.rise <= 0.0 or self.fall <= 0.0:
            raise NetlistError("pulse rise and fall times must be > 0")
        if self.width < 0.0:
            raise NetlistError("pulse width must be >= 0")
        if self.period != 0.0 and self.period < self.rise + self.fall + self.width:
            raise NetlistError("pulse period shorter than rise+width+fall")

    def value_at(self, t: float) -> float:
        tau = t - self.delay
        if tau < 0.0:
            return self.v1
        if self.period > 0.0:
            tau = tau % self.period
        if tau < self.rise:
            return self.v1 + (self.v2 - self.v1) * tau / self.rise
        tau -= self.rise
        if tau < self.width:
            return self.v2
        tau -= self.width
        if tau < self.fall:
            return self.v2 + (self.v1 - self.v2) * tau / self.fall
        return self.v1


SourceSpec = DcSpec | PulseSpec


@dataclass(frozen=True)
class Resistor:
    name: str
    pos: str
    neg: str
    ohms: float


@dataclass(frozen=True)
class Capacitor:
    name: str
    pos: str
    neg: str
    farads: float


@dataclass(frozen=True)
class VSource:
    name: str
    pos: str
    neg: str
    spec: SourceSpec


@dataclass(frozen=True)
class ISource:
    """Current source: drives spec amperes from pos through itself into neg.

    A positive value therefore flows INTO the neg node. The comparator
    generator injects its input as `IIN 0 A DC x` so positive x raises
    the receiving node.
    """

    name: str
    pos: str
    neg: str
    spec: SourceSpec


@dataclass(frozen=True)
class Mosfet:
    name: str
    d: str
    g: str
    s: str
    b: str
    model_name: str
    model: MosModel
    geom: MosGeometry


Element = Resistor | Capacitor | VSource | ISource | Mosfet


@dataclass(frozen=True)
class OpDirective:
    pass


@dataclass(frozen=True)
class DcDirective:
    source: str
    start: float
    stop: float
    step: float


@dataclass(frozen=True)
class TranDirective:
    dt: float
    tstop: float


Directive = OpDirective | DcDirective | TranDirective


@dataclass(frozen=True)
class Netlist:
    title: str
    elements: tuple[Element, ...]
    models: dict[str, MosModel]
    directives: tuple[Directive, ...]
    nodes: tuple[str, ...]  # ground "0" first when the netlist is non-empty

    def find_element(self, name: str) -> Element:
        want = name.upper()
        for el in self.elements:
            if el.name.upper() == want:
                return el
        raise NetlistError(f"no element named {name!r}")

    def find_source(self, name: str) -> VSource | ISource:
        el = self.find_element(name)
        if not isinstance(el, (VSource, ISource)):
            raise NetlistError(f"element {name!r} is not a source")
        return el

    def replaced_source(self, name: str, spec: SourceSpec) -> "Netlist":
        """Copy of this netlist with one source's spec swapped out."""
        src = self.find_source(name)
        els = tuple(replace(el, spec=spec) if el is src else el for el in self.elements)
        return replace(self, elements=els)

    def to_text(self) -> str:
        lines = [self.title]
        for el in self.elements:
            lines.append(_element_line(el))
        for name, model in self.models.items():
            lines.append(_model_line(name, model))
        for d in self.directives:
            lines.append(_directive_line(d))
        lines.append(".end")
        return "\n".join(lines) + "\n"


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def _spec_text(spec: SourceSpec) -> str:
    if isinstance(spec, DcSpec):
        return f"DC {_fmt(spec.value)}"
    p = spec
    parts = " ".join(_fmt(x) for x in (p.v1, p.v2, p.delay, p.rise, p.fall, p.width, p.period))
    return f"PULSE({parts})"


def _element_line(el: Element) -> str:
    if isinstance(el, Resistor):
        return f"{el.name} {el.pos} {el.neg} {_fmt(el.ohms)}"
    if isinstance(el, Capacitor):
        return f"{el.name} {el.pos} {el.neg} {_fmt(el.farads)}"
    if isinstance(el, (VSource, ISource)):
        return f"{el.name} {el.pos} {el.neg} {_spec_text(el.spec)}"
    w_um = f"{el.geom.w * 1e6:.6g}"
    l_um = f"{el.geom.l * 1e6:.6g}"
    return f"{el.name} {el.d} {el.g} {el.s} {el.b} {el.model_name} W={w_um}u L={l_um}u"


def _model_line(name: str, m: MosModel) -> str:
    kind = "NMOS" if m.polarity is MosPolarity.N else "PMOS"
    params = [f"KP={_fmt(m.kp)}", f"VTO={_fmt(m.vto)}"]
    if m.lam:
        params.append(f"LAMBDA={_fmt(m.lam)}")
    if m.cgs:
        params.append(f"CGS={_fmt(m.cgs)}")
    if m.cgd:
        params.append(f"CGD={_fmt(m.cgd)}")
    return f".model {name} {kind} ({' '.join(params)})"


def _directive_line(d: Directive) -> str:
    if isinstance(d, OpDirective):
        return ".op"
    if isinstance(d, DcDirective):
        return f".dc {d.source} {_fmt(d.start)} {_fmt(d.stop)} {_fmt(d.step)}"
    return f".tran {_fmt(d.dt)} {_fmt(d.tstop)}"


class _NodeTable:
    def __init__(self):
        self._order: dict[str, None] = {}

    def intern(self, raw: str) -> str:
        name = "0" if raw.lower() == "gnd" else raw
        if "0" not in self._order:
            self._order["0"] = None
        if name not in self._order:
            self._order[name] = None
        return name

    def ordered(self) -> tuple[str, ...]:
        return tuple(self._order)


# raw element rows kept until models can be resolved in the second pass
@dataclass
class _RawMos:
    line_no: int
    name: str
    d: str
    g: str
    s: str
    b: str
    model_name: str
    w: float
    l: float


def _value_at(token: str, line_no: int) -> float:
    try:
        return parse_value(token)
    except NetlistError as e:
        raise NetlistError(str(e), line_no) from None


def _parse_source_spec(tokens: list[str], line_no: int) -> SourceSpec:
    if not tokens:
        raise NetlistError("missing source value (DC or PULSE)", line_no)
    head = tokens[0].upper()
    if head == "DC":
        if len(tokens) != 2:
            raise NetlistError("DC spec takes exactly one value", line_no)
        return DcSpec(_value_at(tokens[1], line_no))
    if head == "PULSE":
        if len(tokens) != 8:
            raise NetlistError("PULSE spec takes 7 values", line_no)
        vals = [_value_at(t, line_no) for t in tokens[1:]]
        try:
            return PulseSpec(*vals)
        except NetlistError as e:
            raise NetlistError(str(e), line_no) from None
    raise NetlistError(f"unknown source spec {tokens[0]!r}", line_no)


def _parse_kv(tokens: list[str], line_no: int) -> dict[str, str]:
    out = {}
    for tok in tokens:
        if "=" not in tok:
            raise NetlistError(f"expected key=value, got {tok!r}", line_no)
        key, _, val = tok.partition("=")
        if not key or not val:
            raise NetlistError(f"expected key=value, got {tok!r}", line_no)
        out[key.upper()] = val
    return out


def _parse_model_card(tokens: list[str], line_no: int) -> tuple[str, MosModel]:
    # .model <name> NMOS|PMOS (params)
    if len(tokens) < 3:
        raise NetlistError(".model needs a name and a type", line_no)
    name = tokens[1].lower()
    kind = tokens[2].upper()
    if kind == "NMOS":
        polarity, base = MosPolarity.N, NMOS_DEFAULT
    elif kind == "PMOS":
        polarity, base = MosPolarity.P, PMOS_DEFAULT
    else:
        raise NetlistError(f"unknown model type {tokens[2]!r}", line_no)
    kv = _parse_kv(tokens[3:], line_no)
    known = {"KP", "VTO", "LAMBDA", "CGS", "CGD"}
    for key in kv:
        if key not in known:
            raise NetlistError(f"unknown model parameter {key!r}", line_no)
    # KP/VTO fall back to the default card; the rest default to zero
    kp = _value_at(kv["KP"], line_no) if "KP" in kv else base.kp
    vto = _value_at(kv["VTO"], line_no) if "VTO" in kv else base.vto
    lam = _value_at(kv["LAMBDA"], line_no) if "LAMBDA" in kv else 0.0
    cgs = _value_at(kv["CGS"], line_no) if "CGS" in kv else 0.0
    cgd = _value_at(kv["CGD"], line_no) if "CGD" in kv else 0.0
    try:
        return name, MosModel(polarity, kp=kp, vto=vto, lam=lam, cgs=cgs, cgd=cgd)
    except Exception as e:
        raise NetlistError(f"bad model {name!r}: {e}", line_no) from None


def parse_netlist(text: str) -> Netlist:
    """Parse netlist text into an immutable Netlist.

    Errors carry the 1-based line number of the offending line.
    """
    lines = text.splitlines()
    if not lines:
        raise NetlistError("empty netlist (missing title line)")
    title = lines[0].strip()

    nodes = _NodeTable()
    elements: list[Element] = []
    raw_mos: list[tuple[int, _RawMos]] = []  # (elements index, row)
    models: dict[str, MosModel] = {}
    directives: list[Directive] = []
    seen_names: set[str] = set()

    def check_name(name: str, line_no: int):
        key = name.upper()
        if key in seen_names:
            raise NetlistError(f"duplicate element name {name!r}", line_no)
        seen_names.add(key)

    for idx, raw_line in enumerate(lines[1:], start=2):
        line = raw_line.strip()
        if not line or line.startswith("*"):
            continue
        # PULSE(...) and (param lists) tokenize with parens as spaces
        tokens = line.replace("(", " ").replace(")", " ").replace(",", " ").split()
        if not tokens:
            continue
        head = tokens[0]
        lead = head[0].upper()

        if lead == ".":
            card = head.lower()
            if card == ".end":
                break
            if card == ".op":
                directives.append(OpDirective())
            elif card == ".dc":
                if len(tokens) != 5:
                    raise NetlistError(".dc takes source, start, stop, step", idx)
                directives.append(DcDirective(tokens[1],
                                              _value_at(tokens[2], idx),
                                              _value_at(tokens[3], idx),
                                              _value_at(tokens[4], idx)))
            elif card == ".tran":
                if len(tokens) != 3:
                    raise NetlistError(".tran takes dt and tstop", idx)
                directives.append(TranDirective(_value_at(tokens[1], idx),
                                                _value_at(tokens[2], idx)))
            elif card == ".model":
                name, model = _parse_model_card(tokens, idx)
                if name in models:
                    raise NetlistError(f"duplicate model {name!r}", idx)
                models[name] = model
            else:
                raise NetlistError(f"unknown card {head!r}", idx)
            continue

        if lead == "R":
            if len(tokens) != 4:
                raise NetlistError("resistor takes two nodes and a value", idx)
            check_name(head, idx)
            ohms = _value_at(tokens[3], idx)
            if ohms <= 0.0:
                raise NetlistError(f"resistance must be > 0, got {ohms}", idx)
            elements.append(Resistor(head, nodes.intern(tokens[1]), nodes.intern(tokens[2]), ohms))
        elif lead == "C":
            if len(tokens) != 4:
                raise NetlistError("capacitor takes two nodes and a value", idx)
            check_name(head, idx)
            farads = _value_at(tokens[3], idx)
            if farads < 0.0:
                raise NetlistError(f"capacitance must be >= 0, got {farads}", idx)
            elements.append(Capacitor(head, nodes.intern(tokens[1]), nodes.intern(tokens[2]), farads))
        elif lead in ("V", "I"):
            if len(tokens) < 4:
                raise NetlistError("source takes two nodes and a spec", idx)
            check_name(head, idx)
            pos, neg = nodes.intern(tokens[1]), nodes.intern(tokens[2])
            spec = _parse_source_spec(tokens[3:], idx)
            cls = VSource if lead == "V" else ISource
            elements.append(cls(head, pos, neg, spec))
        elif lead == "M":
            if len(tokens) != 8:
                raise NetlistError("mosfet takes four nodes, a model and W=/L=", idx)
            check_name(head, idx)
            d, g, s, b = (nodes.intern(t) for t in tokens[1:5])
            kv = _parse_kv(tokens[6:8], idx)
            if set(kv) != {"W", "L"}:
                raise NetlistError("mosfet needs exactly W= and L=", idx)
            row = _RawMos(idx, head, d, g, s, b, tokens[5].lower(),
                          _value_at(kv["W"], idx), _value_at(kv["L"], idx))
            raw_mos.append((len(elements), row))
            elements.append(None)  # type: ignore[arg-type]  # patched in pass 2
        else:
            raise NetlistError(f"unknown element type {head!r}", idx)

    # second pass: resolve model references now that all cards are read
    for slot, row in raw_mos:
        if row.model_name not in models:
            raise NetlistError(f"undeclared model {row.model_name!r}", row.line_no)
        try:
            geom = MosGeometry(row.w, row.l)
        except Exception as e:
            raise NetlistError(f"bad geometry for {row.name}: {e}", row.line_no) from None
        elements[slot] = Mosfet(row.name, row.d, row.g, row.s, row.b,
                                row.model_name, models[row.model_name], geom)

    return Netlist(title, tuple(elements), models, tuple(directives), nodes.ordered())
