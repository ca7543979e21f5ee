"""RL interconnection networks as netlists over named nodes.

A netlist consists of series-RL branches between nodes (the distinguished
ground is spelled ``gnd``) plus attachments of piezo patch electrodes to
nodes.  Circuit nodes are exactly the non-ground branch endpoints; every node
must carry at least one piezo electrode so the node capacitance matrix stays
nonsingular, and pure-resistive branches are rejected (L > 0 keeps the
assembled model a plain ODE).

Text dialect (line oriented, '#' comments, case sensitive)::

    piezo <index> <node>
    branch <name> <nodeA> <nodeB> R=<ohms> L=<henries>

Numbers accept scientific notation and the SI suffixes k, m, u, n.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NetlistError, ParameterError

GROUND = "gnd"

_SI_SUFFIXES = {"k": 1e3, "m": 1e-3, "u": 1e-6, "n": 1e-9}


def parse_si(token):
    """Parse a number with optional SI suffix: '100n' -> 1e-7, '10k' -> 1e4."""
    try:
        return float(token)
    except ValueError:
        pass
    if token and token[-1] in _SI_SUFFIXES:
        try:
            return float(token[:-1]) * _SI_SUFFIXES[token[-1]]
        except ValueError:
            pass
    raise ValueError(f"malformed number {token!r}")


@dataclass(frozen=True)
class Branch:
    name: str
    node_a: str
    node_b: str
    r: float
    l: float


@dataclass(frozen=True)
class Netlist:
    """Validated interconnection: branch list plus patch-to-node attachments."""

    branches: tuple[Branch, ...]
    piezo: dict[int, str]  # 1-based patch index -> node name

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))
        object.__setattr__(self, "piezo", dict(self.piezo))
        _validate_structure(self.branches, self.piezo)

    @property
    def nodes(self):
        """Sorted non-ground node names (the branch endpoints)."""
        names = set()
        for br in self.branches:
            names.update((br.node_a, br.node_b))
        names.discard(GROUND)
        return sorted(names)


def _validate_structure(branches, piezo):
    """Shared invariant checks (no line attribution; the parser adds that)."""
    if not branches:
        raise ParameterError("netlist needs at least one branch")
    names = set()
    nodes = set()
    for br in branches:
        if br.name in names:
            raise ParameterError(f"duplicate branch name {br.name!r}")
        names.add(br.name)
        if br.node_a == br.node_b:
            raise ParameterError(f"self-loop branch {br.name!r} ({br.node_a})")
        if br.l <= 0:
            raise ParameterError(f"branch {br.name!r} needs positive inductance, got {br.l}")
        if br.r < 0:
            raise ParameterError(f"branch {br.name!r} needs nonnegative resistance, got {br.r}")
        nodes.update(n for n in (br.node_a, br.node_b) if n != GROUND)
    if not piezo:
        raise ParameterError("netlist needs at least one piezo attachment")
    for idx, node in piezo.items():
        if idx < 1:
            raise ParameterError(f"piezo index must be positive, got {idx}")
        if node == GROUND:
            raise ParameterError(f"piezo {idx} attached to ground")
        if node not in nodes:
            raise ParameterError(f"piezo {idx} attached to unknown node {node!r}")
    attached = set(piezo.values())
    for node in sorted(nodes - attached):
        raise ParameterError(f"node {node!r} has no piezo attachment")


def build_single_shunt(n, r, lind):
    """All N piezos parallel on one bus node, shunted to ground by one RL branch."""
    if n < 1:
        raise ParameterError(f"need at least one patch, got {n}")
    if lind <= 0:
        raise ParameterError(f"shunt inductance must be positive, got {lind}")
    return Netlist(
        branches=(Branch("b1", "bus", GROUND, float(r), float(lind)),),
        piezo={i: "bus" for i in range(1, n + 1)},
    )


def build_multi_shunt(n, r, lind):
    """One grounded RL branch per piezo; scalars broadcast over the N loops."""
    if n < 1:
        raise ParameterError(f"need at least one patch, got {n}")
    r_list = np.broadcast_to(np.asarray(r, dtype=float), (n,))
    l_list = np.broadcast_to(np.asarray(lind, dtype=float), (n,))
    if np.asarray(r).ndim == 1 and len(np.asarray(r)) != n:
        raise ParameterError(f"resistance list length {len(np.asarray(r))} != {n}")
    if np.asarray(lind).ndim == 1 and len(np.asarray(lind)) != n:
        raise ParameterError(f"inductance list length {len(np.asarray(lind))} != {n}")
    branches = tuple(
        Branch(f"b{i}", f"n{i}", GROUND, float(r_list[i - 1]), float(l_list[i - 1]))
        for i in range(1, n + 1)
    )
    return Netlist(branches=branches, piezo={i: f"n{i}" for i in range(1, n + 1)})


def build_transmission_line(n, r, lind, termination="none"):
    """Chain of floating RL branches linking adjacent piezo nodes.

    With ``termination="both_ends"`` two extra grounded branches with the same
    (R, L) are added at the first and last node; the default leaves the line
    floating, which carries an undamped uniform-voltage mode.
    """
    if n < 2:
        raise ParameterError(f"transmission line needs at least 2 patches, got {n}")
    if lind <= 0:
        raise ParameterError(f"line inductance must be positive, got {lind}")
    if termination not in ("none", "both_ends"):
        raise ParameterError(f"unknown termination {termination!r}")
    branches = [
        Branch(f"b{i}", f"n{i}", f"n{i + 1}", float(r), float(lind))
        for i in range(1, n)
    ]
    if termination == "both_ends":
        branches.append(Branch("bt1", "n1", GROUND, float(r), float(lind)))
        branches.append(Branch("bt2", f"n{n}", GROUND, float(r), float(lind)))
    return Netlist(branches=tuple(branches), piezo={i: f"n{i}" for i in range(1, n + 1)})


def parse_netlist(text):
    """Parse the netlist dialect, rejecting invariant violations with line numbers."""
    branches = []
    piezo = {}
    branch_lines = {}
    piezo_lines = {}
    node_first_line = {}

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] == "piezo":
            if len(tokens) != 3:
                raise NetlistError(line_no, "expected: piezo <index> <node>")
            try:
                idx = int(tokens[1])
            except ValueError:
                raise NetlistError(line_no, f"malformed piezo index {tokens[1]!r}") from None
            if idx < 1:
                raise NetlistError(line_no, f"piezo index must be positive, got {idx}")
            if idx in piezo:
                raise NetlistError(line_no, f"duplicate piezo attachment for patch {idx}")
            if tokens[2] == GROUND:
                raise NetlistError(line_no, f"piezo {idx} attached to ground")
            piezo[idx] = tokens[2]
            piezo_lines[idx] = line_no
        elif tokens[0] == "branch":
            if len(tokens) != 6 or not tokens[4].startswith("R=") or not tokens[5].startswith("L="):
                raise NetlistError(
                    line_no, "expected: branch <name> <nodeA> <nodeB> R=<ohms> L=<henries>"
                )
            name, node_a, node_b = tokens[1], tokens[2], tokens[3]
            try:
                r = parse_si(tokens[4][2:])
                l = parse_si(tokens[5][2:])
            except ValueError as exc:
                raise NetlistError(line_no, str(exc)) from None
            if name in branch_lines:
                raise NetlistError(line_no, f"duplicate branch name {name!r}")
            if node_a == node_b:
                raise NetlistError(line_no, f"self-loop branch {name!r} ({node_a})")
            if l <= 0:
                raise NetlistError(line_no, f"branch {name!r} needs positive inductance, got {l}")
            if r < 0:
                raise NetlistError(line_no, f"branch {name!r} needs nonnegative resistance, got {r}")
            branches.append(Branch(name, node_a, node_b, r, l))
            branch_lines[name] = line_no
            for node in (node_a, node_b):
                if node != GROUND:
                    node_first_line.setdefault(node, line_no)
        else:
            raise NetlistError(line_no, f"unknown directive {tokens[0]!r}")

    if not branches:
        raise NetlistError(0, "netlist contains no branches")
    if not piezo:
        raise NetlistError(0, "netlist contains no piezo attachments")
    for idx, node in sorted(piezo.items()):
        if node not in node_first_line:
            raise NetlistError(piezo_lines[idx], f"piezo {idx} attached to unknown node {node!r}")
    attached = set(piezo.values())
    for node in sorted(node_first_line):
        if node not in attached:
            raise NetlistError(node_first_line[node], f"node {node!r} has no piezo attachment")

    return Netlist(branches=tuple(branches), piezo=piezo)


@dataclass(frozen=True)
class NetworkMatrices:
    """Incidence and branch-parameter matrices for an ordered netlist.

    node_names are sorted; branch order follows declaration order.  Column j
    of b_inc holds +1 at the branch's departure node and -1 at its arrival
    node, with the ground row dropped.  r_b and l_b hold the diagonal branch
    resistances and inductances.
    """

    node_names: tuple[str, ...]
    branch_names: tuple[str, ...]
    b_inc: np.ndarray
    r_b: np.ndarray
    l_b: np.ndarray

    @property
    def n_nodes(self):
        return len(self.node_names)

    @property
    def n_branches(self):
        return len(self.branch_names)


def network_matrices(net, n_patches):
    """Emit deterministic incidence/parameter matrices for `n_patches` piezos."""
    expected = set(range(1, n_patches + 1))
    if set(net.piezo) != expected:
        missing = sorted(expected - set(net.piezo))
        extra = sorted(set(net.piezo) - expected)
        detail = []
        if missing:
            detail.append(f"unattached patches {missing}")
        if extra:
            detail.append(f"attachments for nonexistent patches {extra}")
        raise ParameterError("netlist/patch mismatch: " + ", ".join(detail))

    nodes = net.nodes
    index = {name: p for p, name in enumerate(nodes)}
    b_inc = np.zeros((len(nodes), len(net.branches)))
    r_b = np.empty(len(net.branches))
    l_b = np.empty(len(net.branches))
    for j, br in enumerate(net.branches):
        if br.node_a != GROUND:
            b_inc[index[br.node_a], j] = 1.0
        if br.node_b != GROUND:
            b_inc[index[br.node_b], j] = -1.0
        r_b[j] = br.r
        l_b[j] = br.l
    return NetworkMatrices(
        node_names=tuple(nodes),
        branch_names=tuple(br.name for br in net.branches),
        b_inc=b_inc,
        r_b=r_b,
        l_b=l_b,
    )
