"""Circuit data model, line-oriented netlist parser and renderer.

Grammar (one statement per line, ``#`` starts a comment)::

    C  <name> <node+> <node-> <value_F>
    L  <name> <node+> <node-> <value_H>
    JJ <name> <node+> <node-> EJ=<J> CJ=<F>
    PS <name> <node+> <node-> ES=<J> L=<H>
    NR <name> kind=<S|Y|Z> R=<Ohm> ports=(<n+> <n->)... matrix=[r00,r01,...;r10,...]
    TR <name> left=(<n+> <n->)... right=(<n+> <n->)... N=[...]
    FLUX <loop_label> <value_Wb> through=(<branch_name>...)

Matrix literals are semicolon-separated rows of comma-separated entries,
row-major.  All values are SI.  A Josephson junction always carries its
own shunt capacitance CJ; a phase-slip element always carries its series
inductance L.  Both expand to two branches in the circuit graph.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DanglingNodeError,
    MatrixShapeError,
    NetlistSyntaxError,
    NonPositiveValueError,
    UnknownElementError,
)
from .immittance import ImmittanceDescription
from .units import PhysicalConstants


# ------------------------------------------------------------- elements


@dataclass(frozen=True)
class Capacitor:
    name: str
    node_p: str
    node_m: str
    value: float  # F


@dataclass(frozen=True)
class Inductor:
    name: str
    node_p: str
    node_m: str
    value: float  # H


@dataclass(frozen=True)
class JosephsonJunction:
    name: str
    node_p: str
    node_m: str
    ej: float  # J
    cj: float  # F, intrinsic shunt, always > 0

    @property
    def shunt_name(self) -> str:
        return f"{self.name}_cj"


@dataclass(frozen=True)
class PhaseSlip:
    name: str
    node_p: str
    node_m: str
    es: float  # J
    l_series: float  # H

    @property
    def inductor_name(self) -> str:
        return f"{self.name}_l"

    @property
    def internal_node(self) -> str:
        return f"{self.name}.m"


@dataclass(frozen=True)
class NonreciprocalDevice:
    name: str
    ports: tuple  # ((node+, node-), ...)
    description: ImmittanceDescription

    @property
    def n_ports(self) -> int:
        return len(self.ports)

    @property
    def r_ref(self) -> float:
        return self.description.r_ref

    def branch_name(self, k: int) -> str:
        return f"{self.name}.p{k + 1}"

    def __eq__(self, other) -> bool:
        if not isinstance(other, NonreciprocalDevice):
            return NotImplemented
        return (
            self.name == other.name
            and self.ports == other.ports
            and self.description == other.description
        )


@dataclass(frozen=True)
class TransformerBank:
    name: str
    left: tuple  # ((node+, node-), ...) tree-side branches
    right: tuple
    turns: np.ndarray  # shape (n_right, n_left); I_R = -N I_L, V_L = N^T V_R

    def left_name(self, k: int) -> str:
        return f"{self.name}.l{k + 1}"

    def right_name(self, k: int) -> str:
        return f"{self.name}.r{k + 1}"

    def __eq__(self, other) -> bool:
        if not isinstance(other, TransformerBank):
            return NotImplemented
        return (
            self.name == other.name
            and self.left == other.left
            and self.right == other.right
            and np.array_equal(self.turns, other.turns)
        )


Element = (
    Capacitor
    | Inductor
    | JosephsonJunction
    | PhaseSlip
    | NonreciprocalDevice
    | TransformerBank
)


@dataclass(frozen=True)
class ExternalFlux:
    label: str
    value: float  # Wb
    through: tuple  # chord branch names carrying the offset


@dataclass(frozen=True)
class Netlist:
    elements: tuple
    external_fluxes: tuple = ()
    units: PhysicalConstants = field(default_factory=PhysicalConstants)

    def __post_init__(self):
        _validate(self)

    @property
    def nodes(self) -> frozenset:
        out = set()
        for el in self.elements:
            if isinstance(el, NonreciprocalDevice):
                for a, b in el.ports:
                    out.update((a, b))
            elif isinstance(el, TransformerBank):
                for a, b in el.left + el.right:
                    out.update((a, b))
            else:
                out.update((el.node_p, el.node_m))
                if isinstance(el, PhaseSlip):
                    out.add(el.internal_node)
        return frozenset(out)

    def element(self, name: str) -> Element:
        for el in self.elements:
            if el.name == name:
                return el
        raise UnknownElementError(f"no element named {name!r}")

    def of_type(self, cls) -> list:
        return [el for el in self.elements if isinstance(el, cls)]

    def flux_for(self, branch_name: str) -> float:
        """Total static external flux attached to a chord branch's loop."""
        total = 0.0
        for fx in self.external_fluxes:
            if branch_name in fx.through:
                total += fx.value
        return total

    def __eq__(self, other) -> bool:
        if not isinstance(other, Netlist):
            return NotImplemented
        return (
            self.elements == other.elements
            and self.external_fluxes == other.external_fluxes
            and self.units == other.units
        )


# ------------------------------------------------------------ validation


def _require_positive(name: str, what: str, value: float):
    if not (value > 0.0) or not np.isfinite(value):
        raise NonPositiveValueError(f"{what} of {name!r} must be > 0, got {value!r}")


def _validate(netlist: Netlist):
    names = set()
    degree: dict[str, int] = {}

    def touch(node: str):
        degree[node] = degree.get(node, 0) + 1

    for el in netlist.elements:
        if el.name in names:
            raise NetlistSyntaxError(0, f"duplicate element name {el.name!r}")
        names.add(el.name)

        if isinstance(el, Capacitor):
            _require_positive(el.name, "capacitance", el.value)
        elif isinstance(el, Inductor):
            _require_positive(el.name, "inductance", el.value)
        elif isinstance(el, JosephsonJunction):
            _require_positive(el.name, "EJ", el.ej)
            _require_positive(el.name, "CJ", el.cj)
        elif isinstance(el, PhaseSlip):
            _require_positive(el.name, "ES", el.es)
            _require_positive(el.name, "series inductance", el.l_series)
        elif isinstance(el, NonreciprocalDevice):
            _require_positive(el.name, "reference resistance", el.r_ref)
            if el.description.n_ports != el.n_ports:
                raise MatrixShapeError(
                    f"{el.name!r}: matrix is {el.description.n_ports}-port "
                    f"but {el.n_ports} port pairs given"
                )
            seen = set()
            for a, b in el.ports:
                if a == b:
                    raise DanglingNodeError(f"{el.name!r}: port shorts node {a!r} to itself")
                if (a, b) in seen:
                    raise DanglingNodeError(f"{el.name!r}: duplicate port ({a}, {b})")
                seen.add((a, b))
        elif isinstance(el, TransformerBank):
            nr, nl = el.turns.shape
            if (nr, nl) != (len(el.right), len(el.left)):
                raise MatrixShapeError(
                    f"{el.name!r}: turns matrix {nr}x{nl} does not match "
                    f"{len(el.right)} right / {len(el.left)} left branches"
                )

        if isinstance(el, (Capacitor, Inductor, JosephsonJunction)):
            if el.node_p == el.node_m:
                raise DanglingNodeError(f"{el.name!r} shorts node {el.node_p!r} to itself")
            touch(el.node_p)
            touch(el.node_m)
            if isinstance(el, JosephsonJunction):
                # intrinsic shunt branch
                touch(el.node_p)
                touch(el.node_m)
        elif isinstance(el, PhaseSlip):
            touch(el.node_p)
            touch(el.node_m)
            touch(el.internal_node)
            touch(el.internal_node)
        elif isinstance(el, NonreciprocalDevice):
            for a, b in el.ports:
                touch(a)
                touch(b)
        elif isinstance(el, TransformerBank):
            for a, b in el.left + el.right:
                if a == b:
                    raise DanglingNodeError(f"{el.name!r} shorts node {a!r} to itself")
                touch(a)
                touch(b)

    if not netlist.elements:
        raise NetlistSyntaxError(0, "empty netlist")

    for node, deg in degree.items():
        if deg < 2:
            raise DanglingNodeError(f"node {node!r} has a single attachment")

    branch_names = set()
    for el in netlist.elements:
        branch_names.add(el.name)
        if isinstance(el, JosephsonJunction):
            branch_names.add(el.shunt_name)
        elif isinstance(el, PhaseSlip):
            branch_names.add(el.inductor_name)
        elif isinstance(el, NonreciprocalDevice):
            branch_names.update(el.branch_name(k) for k in range(el.n_ports))
        elif isinstance(el, TransformerBank):
            branch_names.update(el.left_name(k) for k in range(len(el.left)))
            branch_names.update(el.right_name(k) for k in range(len(el.right)))

    labels = set()
    for fx in netlist.external_fluxes:
        if fx.label in labels:
            raise NetlistSyntaxError(0, f"duplicate flux label {fx.label!r}")
        labels.add(fx.label)
        for b in fx.through:
            if b not in branch_names:
                raise UnknownElementError(f"FLUX {fx.label!r} references unknown branch {b!r}")


# --------------------------------------------------------------- parsing

_GROUPS_RE = re.compile(r"\(([^)]*)\)")


def _parse_float(line_no: int, token: str, what: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise NetlistSyntaxError(line_no, f"bad {what} {token!r}") from None


def _parse_matrix(line_no: int, literal: str) -> np.ndarray:
    literal = literal.strip()
    if not (literal.startswith("[") and literal.endswith("]")):
        raise NetlistSyntaxError(line_no, f"matrix literal must be bracketed, got {literal!r}")
    body = literal[1:-1].strip()
    if not body:
        raise NetlistSyntaxError(line_no, "empty matrix literal")
    rows = []
    for row_text in body.split(";"):
        entries = [e for e in (t.strip() for t in row_text.split(",")) if e]
        if not entries:
            raise NetlistSyntaxError(line_no, "empty matrix row")
        rows.append([_parse_float(line_no, e, "matrix entry") for e in entries])
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise MatrixShapeError(f"line {line_no}: ragged matrix literal")
    return np.array(rows, dtype=float)


def _parse_pairs(line_no: int, text: str, what: str) -> tuple:
    pairs = []
    for group in _GROUPS_RE.findall(text):
        toks = group.split()
        if len(toks) != 2:
            raise NetlistSyntaxError(line_no, f"{what} group {group!r} is not a node pair")
        pairs.append((toks[0], toks[1]))
    if not pairs:
        raise NetlistSyntaxError(line_no, f"missing {what} groups")
    return tuple(pairs)


def _split_kv(line_no: int, tokens: list[str], required: tuple) -> dict:
    out = {}
    for tok in tokens:
        if "=" not in tok:
            raise NetlistSyntaxError(line_no, f"expected key=value, got {tok!r}")
        key, _, val = tok.partition("=")
        out[key] = val
    missing = [k for k in required if k not in out]
    if missing:
        raise NetlistSyntaxError(line_no, f"missing field(s): {', '.join(missing)}")
    return out


def parse_netlist(text: str) -> Netlist:
    """Parse netlist source into a fully validated :class:`Netlist`."""
    elements: list = []
    fluxes: list = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        kind = tokens[0].upper()

        if kind in ("C", "L"):
            if len(tokens) != 5:
                raise NetlistSyntaxError(line_no, f"{kind} needs: name node+ node- value")
            name, np_, nm, val = tokens[1:]
            value = _parse_float(line_no, val, "value")
            cls = Capacitor if kind == "C" else Inductor
            elements.append(cls(name, np_, nm, value))

        elif kind == "JJ":
            if len(tokens) != 6:
                raise NetlistSyntaxError(line_no, "JJ needs: name node+ node- EJ=<J> CJ=<F>")
            name, np_, nm = tokens[1:4]
            kv = _split_kv(line_no, tokens[4:], ("EJ", "CJ"))
            elements.append(
                JosephsonJunction(
                    name,
                    np_,
                    nm,
                    _parse_float(line_no, kv["EJ"], "EJ"),
                    _parse_float(line_no, kv["CJ"], "CJ"),
                )
            )

        elif kind == "PS":
            if len(tokens) != 6:
                raise NetlistSyntaxError(line_no, "PS needs: name node+ node- ES=<J> L=<H>")
            name, np_, nm = tokens[1:4]
            kv = _split_kv(line_no, tokens[4:], ("ES", "L"))
            elements.append(
                PhaseSlip(
                    name,
                    np_,
                    nm,
                    _parse_float(line_no, kv["ES"], "ES"),
                    _parse_float(line_no, kv["L"], "L"),
                )
            )

        elif kind == "NR":
            m = re.match(
                r"NR\s+(\S+)\s+kind=(\S+)\s+R=(\S+)\s+ports=((?:\([^)]*\)\s*)+)matrix=(\[.*\])\s*$",
                line,
                re.IGNORECASE,
            )
            if not m:
                raise NetlistSyntaxError(
                    line_no, "NR needs: name kind=<S|Y|Z> R=<Ohm> ports=(..)... matrix=[..]"
                )
            name, dkind, rtext, ports_text, mat_text = m.groups()
            dkind = dkind.upper()
            if dkind not in ("S", "Y", "Z"):
                raise NetlistSyntaxError(line_no, f"NR kind must be S, Y or Z, got {dkind!r}")
            r_ref = _parse_float(line_no, rtext, "R")
            ports = _parse_pairs(line_no, ports_text, "port")
            matrix = _parse_matrix(line_no, mat_text)
            if matrix.shape[0] != matrix.shape[1]:
                raise MatrixShapeError(f"line {line_no}: NR matrix must be square")
            desc = ImmittanceDescription(dkind, matrix, r_ref)
            elements.append(NonreciprocalDevice(name, ports, desc))

        elif kind == "TR":
            m = re.match(
                r"TR\s+(\S+)\s+left=((?:\([^)]*\)\s*)+)right=((?:\([^)]*\)\s*)+)N=(\[.*\])\s*$",
                line,
                re.IGNORECASE,
            )
            if not m:
                raise NetlistSyntaxError(
                    line_no, "TR needs: name left=(..)... right=(..)... N=[..]"
                )
            name, left_text, right_text, mat_text = m.groups()
            left = _parse_pairs(line_no, left_text, "left")
            right = _parse_pairs(line_no, right_text, "right")
            turns = _parse_matrix(line_no, mat_text)
            elements.append(TransformerBank(name, left, right, turns))

        elif kind == "FLUX":
            m = re.match(r"FLUX\s+(\S+)\s+(\S+)\s+through=\(([^)]*)\)\s*$", line, re.IGNORECASE)
            if not m:
                raise NetlistSyntaxError(line_no, "FLUX needs: label value through=(branch...)")
            label, vtext, through_text = m.groups()
            value = _parse_float(line_no, vtext, "flux value")
            through = tuple(through_text.split())
            if not through:
                raise NetlistSyntaxError(line_no, "FLUX needs at least one branch name")
            fluxes.append(ExternalFlux(label, value, through))

        else:
            raise UnknownElementError(f"line {line_no}: unknown element type {tokens[0]!r}")

    return Netlist(tuple(elements), tuple(fluxes))


# ------------------------------------------------------------- rendering


def _fmt(x: float) -> str:
    return repr(float(x))


def _fmt_matrix(m: np.ndarray) -> str:
    rows = [",".join(_fmt(v) for v in row) for row in np.atleast_2d(m)]
    return "[" + ";".join(rows) + "]"


def render_netlist(netlist: Netlist) -> str:
    """Render a netlist back to its textual form; parse(render(n)) == n."""
    lines = []
    for el in netlist.elements:
        if isinstance(el, Capacitor):
            lines.append(f"C {el.name} {el.node_p} {el.node_m} {_fmt(el.value)}")
        elif isinstance(el, Inductor):
            lines.append(f"L {el.name} {el.node_p} {el.node_m} {_fmt(el.value)}")
        elif isinstance(el, JosephsonJunction):
            lines.append(
                f"JJ {el.name} {el.node_p} {el.node_m} EJ={_fmt(el.ej)} CJ={_fmt(el.cj)}"
            )
        elif isinstance(el, PhaseSlip):
            lines.append(
                f"PS {el.name} {el.node_p} {el.node_m} ES={_fmt(el.es)} L={_fmt(el.l_series)}"
            )
        elif isinstance(el, NonreciprocalDevice):
            ports = "".join(f"({a} {b})" for a, b in el.ports)
            lines.append(
                f"NR {el.name} kind={el.description.kind} R={_fmt(el.r_ref)} "
                f"ports={ports} matrix={_fmt_matrix(el.description.matrix)}"
            )
        elif isinstance(el, TransformerBank):
            left = "".join(f"({a} {b})" for a, b in el.left)
            right = "".join(f"({a} {b})" for a, b in el.right)
            lines.append(
                f"TR {el.name} left={left} right={right} N={_fmt_matrix(el.turns)}"
            )
    for fx in netlist.external_fluxes:
        through = " ".join(fx.through)
        lines.append(f"FLUX {fx.label} {_fmt(fx.value)} through=({through})")
    return "\n".join(lines) + "\n"
