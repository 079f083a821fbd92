"""Oriented circuit multigraph, spanning-tree selection, loop matrix.

Every element expands into branches: one per one-port, one per
nonreciprocal-device port, one per transformer winding, and for the
compound elements two (junction + intrinsic shunt, phase-slip + series
inductor).  Branch classes are C, J, L, PS, G, TL, TR.

The reduced fundamental loop matrix F is defined so that Kirchhoff's
laws read  F I_ch = -I_tr  and  F^T V_tr = V_ch + dPhi_ex/dt:
F[t, c] = +1 when the tree path from c's tail to c's head traverses
tree branch t along its own orientation, -1 against it, 0 otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DisconnectedError,
    InfeasibleTreeError,
    ModeViolationError,
    UnknownClassError,
)
from .netlist import (
    Capacitor,
    Inductor,
    JosephsonJunction,
    Netlist,
    NonreciprocalDevice,
    PhaseSlip,
    TransformerBank,
)

#: canonical ordering of branch classes in loop-matrix rows and columns
CLASS_ORDER = ("C", "J", "L", "PS", "G", "TL", "TR")

#: tree-growth stages per mode: (class, mandatory) in priority order
_TREE_STAGES = {
    "bkd": (("C", True), ("TL", True), ("L", False)),
    "burkard": (("J", True), ("L", True), ("TL", True), ("G", False)),
    "sdevice": (("G", True), ("TL", False), ("L", False)),
}


@dataclass(frozen=True)
class Branch:
    name: str
    cls: str
    node_from: str
    node_to: str


@dataclass(frozen=True)
class CircuitGraph:
    netlist: Netlist
    branches: tuple

    @property
    def nodes(self) -> tuple:
        seen = {}
        for b in self.branches:
            seen.setdefault(b.node_from, None)
            seen.setdefault(b.node_to, None)
        return tuple(sorted(seen))

    def branch(self, name: str) -> Branch:
        for b in self.branches:
            if b.name == name:
                return b
        raise KeyError(name)

    def shunt_cap_names(self) -> frozenset:
        """Names of the auto-emitted junction shunt capacitor branches."""
        return frozenset(
            j.shunt_name for j in self.netlist.of_type(JosephsonJunction)
        )


def build_graph(netlist: Netlist) -> CircuitGraph:
    """Expand a netlist into its oriented branch multigraph."""
    branches: list[Branch] = []
    for el in netlist.elements:
        if isinstance(el, Capacitor):
            branches.append(Branch(el.name, "C", el.node_p, el.node_m))
        elif isinstance(el, Inductor):
            branches.append(Branch(el.name, "L", el.node_p, el.node_m))
        elif isinstance(el, JosephsonJunction):
            branches.append(Branch(el.name, "J", el.node_p, el.node_m))
            branches.append(Branch(el.shunt_name, "C", el.node_p, el.node_m))
        elif isinstance(el, PhaseSlip):
            branches.append(Branch(el.name, "PS", el.node_p, el.internal_node))
            branches.append(Branch(el.inductor_name, "L", el.internal_node, el.node_m))
        elif isinstance(el, NonreciprocalDevice):
            for k, (a, b) in enumerate(el.ports):
                branches.append(Branch(el.branch_name(k), "G", a, b))
        elif isinstance(el, TransformerBank):
            for k, (a, b) in enumerate(el.left):
                branches.append(Branch(el.left_name(k), "TL", a, b))
            for k, (a, b) in enumerate(el.right):
                branches.append(Branch(el.right_name(k), "TR", a, b))

    graph = CircuitGraph(netlist, tuple(branches))

    parent = {n: n for n in graph.nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for b in branches:
        parent[find(b.node_from)] = find(b.node_to)
    roots = {find(n) for n in graph.nodes}
    if len(roots) > 1:
        raise DisconnectedError(f"graph splits into {len(roots)} components")
    return graph


@dataclass(frozen=True)
class TreeChordPartition:
    tree: tuple  # branch names
    chord: tuple
    mode: str


def select_tree(
    graph: CircuitGraph, mode: str, manual_tree: tuple | None = None
) -> TreeChordPartition:
    """Choose a spanning tree under the given convention.

    Modes: ``bkd`` (all capacitors in the tree, junction / NR / right
    transformer branches in the chord set), ``burkard`` (junctions and
    inductors in the tree, all capacitors in the chord set, NR branches
    on either side), ``sdevice`` (all NR branches in the tree), and
    ``manual``.  Deterministic: branches are considered in stage
    priority order, names breaking ties lexicographically.
    """
    nodes = graph.nodes
    by_name = {b.name: b for b in graph.branches}

    def spans(tree_names) -> bool:
        return len(tree_names) == len(nodes) - 1

    if mode == "manual":
        if manual_tree is None:
            raise ModeViolationError("manual mode requires an explicit tree branch list")
        parent = {n: n for n in nodes}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for name in manual_tree:
            if name not in by_name:
                raise ModeViolationError(f"unknown tree branch {name!r}")
            b = by_name[name]
            ra, rb = find(b.node_from), find(b.node_to)
            if ra == rb:
                raise InfeasibleTreeError(f"manual tree contains a loop through {name!r}")
            parent[ra] = rb
        if not spans(manual_tree):
            raise InfeasibleTreeError("manual tree does not span all nodes")
        tree = tuple(sorted(manual_tree))
        chord = tuple(sorted(set(by_name) - set(tree)))
        return TreeChordPartition(tree, chord, mode)

    if mode not in _TREE_STAGES:
        raise ModeViolationError(f"unknown tree mode {mode!r}")

    parent = {n: n for n in nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    tree: list[str] = []
    for cls, mandatory in _TREE_STAGES[mode]:
        for b in sorted((b for b in graph.branches if b.cls == cls), key=lambda b: b.name):
            ra, rb = find(b.node_from), find(b.node_to)
            if ra == rb:
                if mandatory:
                    raise InfeasibleTreeError(
                        f"{mode}: branch {b.name!r} of class {cls} closes a loop "
                        "among mandatory tree branches"
                    )
                continue
            parent[ra] = rb
            tree.append(b.name)

    if not spans(tree):
        raise InfeasibleTreeError(
            f"{mode}: allowed tree classes do not span all nodes "
            f"({len(tree)} tree branches for {len(nodes)} nodes)"
        )
    chord = tuple(sorted(set(by_name) - set(tree)))
    return TreeChordPartition(tuple(sorted(tree)), chord, mode)


# ------------------------------------------------------------ loop matrix


@dataclass(frozen=True)
class LoopMatrix:
    matrix: np.ndarray  # ternary, tree rows x chord columns
    row_labels: tuple  # (class, branch name)
    col_labels: tuple
    flux_offsets: np.ndarray  # Wb per chord column

    def rows_of(self, cls: str) -> list[int]:
        _check_class(cls)
        return [i for i, (c, _) in enumerate(self.row_labels) if c == cls]

    def cols_of(self, cls: str) -> list[int]:
        _check_class(cls)
        return [j for j, (c, _) in enumerate(self.col_labels) if c == cls]

    def block(self, row_class: str, col_class: str) -> np.ndarray:
        """Contiguous class-pair submatrix with ordering preserved."""
        return self.matrix[np.ix_(self.rows_of(row_class), self.cols_of(col_class))]

    def row_names(self, cls: str | None = None) -> list[str]:
        return [n for c, n in self.row_labels if cls is None or c == cls]

    def col_names(self, cls: str | None = None) -> list[str]:
        return [n for c, n in self.col_labels if cls is None or c == cls]

    def col_index(self, name: str) -> int:
        for j, (_, n) in enumerate(self.col_labels):
            if n == name:
                return j
        raise KeyError(name)

    def to_json_dict(self) -> dict:
        return {
            "rows": [{"class": c, "name": n} for c, n in self.row_labels],
            "cols": [{"class": c, "name": n} for c, n in self.col_labels],
            "matrix": [[int(v) for v in row] for row in self.matrix],
            "flux_offsets_wb": [float(v) for v in self.flux_offsets],
        }


def _check_class(cls: str):
    if cls not in CLASS_ORDER:
        raise UnknownClassError(f"unknown branch class {cls!r}")


def block(loops: LoopMatrix, row_class: str, col_class: str) -> np.ndarray:
    return loops.block(row_class, col_class)


def _ordered(graph: CircuitGraph, names, shunts: frozenset) -> list[Branch]:
    """Order branches by class, junction shunts leading within class C.

    Shunt capacitors sort by their owning junction's name so that the
    junction rows and shunt columns stay aligned one-to-one.
    """
    by_name = {b.name: b for b in graph.branches}
    branches = [by_name[n] for n in names]

    def key(b: Branch):
        if b.cls == "C" and b.name in shunts:
            return (CLASS_ORDER.index(b.cls), 0, b.name[: -len("_cj")])
        return (CLASS_ORDER.index(b.cls), 1, b.name)

    return sorted(branches, key=key)


def loop_matrix(graph: CircuitGraph, partition: TreeChordPartition) -> LoopMatrix:
    """Reduced fundamental loop matrix for a tree/chord partition."""
    shunts = graph.shunt_cap_names()
    tree = _ordered(graph, partition.tree, shunts)
    chord = _ordered(graph, partition.chord, shunts)

    adj: dict[str, list] = {}
    for i, b in enumerate(tree):
        adj.setdefault(b.node_from, []).append((b.node_to, i, +1))
        adj.setdefault(b.node_to, []).append((b.node_from, i, -1))

    def tree_path(src: str, dst: str) -> list[tuple[int, int]]:
        # BFS on the spanning tree; unique path (index, direction)
        prev: dict[str, tuple] = {src: None}
        queue = [src]
        while queue:
            node = queue.pop(0)
            if node == dst:
                break
            for nxt, idx, sign in adj.get(node, ()):
                if nxt not in prev:
                    prev[nxt] = (node, idx, sign)
                    queue.append(nxt)
        if dst not in prev:
            raise InfeasibleTreeError(f"tree does not connect {src!r} to {dst!r}")
        path = []
        node = dst
        while prev[node] is not None:
            pnode, idx, sign = prev[node]
            path.append((idx, sign))
            node = pnode
        path.reverse()
        return path

    mat = np.zeros((len(tree), len(chord)), dtype=int)
    for j, cb in enumerate(chord):
        for idx, sign in tree_path(cb.node_from, cb.node_to):
            mat[idx, j] = sign

    offsets = np.zeros(len(chord))
    chord_names = {b.name: j for j, b in enumerate(chord)}
    tree_names = {b.name for b in tree}
    for fx in graph.netlist.external_fluxes:
        for name in fx.through:
            if name in tree_names:
                raise ModeViolationError(
                    f"FLUX {fx.label!r}: branch {name!r} is a tree branch; "
                    "external flux must attach to a chord branch's loop"
                )
            if name in chord_names:
                offsets[chord_names[name]] += fx.value

    return LoopMatrix(
        mat,
        tuple((b.cls, b.name) for b in tree),
        tuple((b.cls, b.name) for b in chord),
        offsets,
    )
