"""Gate-level circuit IR with a reference statevector simulator.

Qubit 0 is the least significant bit of a basis index; amplitude arrays are
little-endian throughout.  Circuits are immutable; simulation never mutates
its input state.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

PI = math.pi

# Gate kinds with a fixed 2x2 matrix.
_SIMPLE_1Q = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "T": np.array([[1, 0], [0, np.exp(1j * PI / 4)]], dtype=complex),
}

_PARAM_1Q = {
    "Phase": lambda t: np.array([[1, 0], [0, np.exp(1j * t)]], dtype=complex),
    "RX": lambda t: np.array(
        [[math.cos(t / 2), -1j * math.sin(t / 2)],
         [-1j * math.sin(t / 2), math.cos(t / 2)]], dtype=complex),
    "RY": lambda t: np.array(
        [[math.cos(t / 2), -math.sin(t / 2)],
         [math.sin(t / 2), math.cos(t / 2)]], dtype=complex),
    "RZ": lambda t: np.array(
        [[np.exp(-1j * t / 2), 0], [0, np.exp(1j * t / 2)]], dtype=complex),
}

_SELF_INVERSE = frozenset({"X", "Y", "Z", "H", "Swap"})
_NEGATE_PARAM = frozenset({"Phase", "RX", "RY", "RZ", "GlobalPhase"})
KINDS = frozenset(_SIMPLE_1Q) | frozenset(_PARAM_1Q) | {"GlobalPhase", "Swap", "Permutation"}


class UnsupportedGateError(ValueError):
    """Raised when an export or lowering cannot handle a gate."""


@dataclass(frozen=True)
class Gate:
    """One gate: a kind, target qubits, and (qubit, polarity) controls."""

    kind: str
    targets: tuple[int, ...] = ()
    controls: tuple[tuple[int, int], ...] = ()
    param: float | None = None
    table: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        used = list(self.targets) + [q for q, _ in self.controls]
        if len(set(used)) != len(used):
            raise ValueError("gate targets and controls must be pairwise distinct qubits")
        if self.kind == "Permutation":
            if self.table is None:
                raise ValueError("Permutation gate needs a table")
            n = len(self.table)
            if n != 1 << len(self.targets) or sorted(self.table) != list(range(n)):
                raise ValueError("Permutation table must be a bijection on the target block")

    def inverse(self) -> "Gate":
        if self.kind in _SELF_INVERSE:
            return self
        if self.kind == "S":
            return Gate("Phase", self.targets, self.controls, -PI / 2)
        if self.kind == "T":
            return Gate("Phase", self.targets, self.controls, -PI / 4)
        if self.kind in _NEGATE_PARAM:
            return Gate(self.kind, self.targets, self.controls, -self.param)
        if self.kind == "Permutation":
            inv = [0] * len(self.table)
            for i, j in enumerate(self.table):
                inv[j] = i
            return Gate("Permutation", self.targets, self.controls, table=tuple(inv))
        raise AssertionError(self.kind)

    def remapped(self, fn) -> "Gate":
        return Gate(
            self.kind,
            tuple(fn(q) for q in self.targets),
            tuple((fn(q), p) for q, p in self.controls),
            self.param,
            self.table,
        )

    def with_control(self, qubit: int, polarity: int) -> "Gate":
        return Gate(self.kind, self.targets, self.controls + ((qubit, polarity),),
                    self.param, self.table)

    def count_key(self) -> str:
        n = len(self.controls)
        prefix = "C" * n if n <= 2 else f"C{n}"
        return prefix + self.kind


# Short constructors; tests and builders use these.
def x(q, controls=()):
    return Gate("X", (q,), tuple(controls))


def h(q, controls=()):
    return Gate("H", (q,), tuple(controls))


def phase(theta, q, controls=()):
    return Gate("Phase", (q,), tuple(controls), float(theta))


def ry(theta, q, controls=()):
    return Gate("RY", (q,), tuple(controls), float(theta))


def rz(theta, q, controls=()):
    return Gate("RZ", (q,), tuple(controls), float(theta))


def global_phase(theta, controls=()):
    return Gate("GlobalPhase", (), tuple(controls), float(theta))


def swap(q0, q1, controls=()):
    return Gate("Swap", (q0, q1), tuple(controls))


def permutation(table, targets, controls=()):
    return Gate("Permutation", tuple(targets), tuple(controls), table=tuple(int(t) for t in table))


@dataclass(frozen=True)
class Circuit:
    """An ordered gate list over main + ancilla qubits (ancillas on top)."""

    main_qubits: int
    ancilla_qubits: int = 0
    gates: tuple[Gate, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        total = self.main_qubits + self.ancilla_qubits
        for g in self.gates:
            for q in list(g.targets) + [q for q, _ in g.controls]:
                if not 0 <= q < total:
                    raise ValueError(f"gate {g} references qubit {q} outside register of {total}")

    @property
    def n_qubits(self) -> int:
        return self.main_qubits + self.ancilla_qubits

    def adjoint(self) -> "Circuit":
        return Circuit(self.main_qubits, self.ancilla_qubits,
                       tuple(g.inverse() for g in reversed(self.gates)))

    def concat(self, other: "Circuit") -> "Circuit":
        if (other.main_qubits, other.ancilla_qubits) != (self.main_qubits, self.ancilla_qubits):
            raise ValueError("can only concatenate circuits over the same register")
        return Circuit(self.main_qubits, self.ancilla_qubits, self.gates + other.gates)

    def gate_counts(self, lower_permutations: bool = False) -> dict[str, int]:
        counts = Counter()
        for g in self.gates:
            if lower_permutations and g.kind == "Permutation":
                for lg in lower_permutation_gate(g):
                    counts[lg.count_key()] += 1
            else:
                counts[g.count_key()] += 1
        return dict(counts)

    def apply(self, state):
        """Apply the gate sequence to a statevector (or column-stacked matrix)."""
        st = np.array(state, dtype=complex)
        flat = st.ndim == 1
        if flat:
            st = st[:, None]
        if st.shape[0] != 1 << self.n_qubits:
            raise ValueError(
                f"state has {st.shape[0]} amplitudes, circuit needs {1 << self.n_qubits}")
        idx = np.arange(st.shape[0])
        for g in self.gates:
            st = _apply_gate(st, g, idx)
        return st[:, 0] if flat else st

    def unitary(self) -> np.ndarray:
        """Dense matrix of the circuit (built column-by-column, one pass)."""
        dim = 1 << self.n_qubits
        return self.apply(np.eye(dim, dtype=complex))

    def export_text(self, lower_permutations: bool = False) -> str:
        return export_text(self, lower_permutations)


def _control_mask(idx, controls):
    mask = np.ones(idx.shape, dtype=bool)
    for q, p in controls:
        mask &= ((idx >> q) & 1) == p
    return mask


def _apply_gate(st, g, idx):
    mask = _control_mask(idx, g.controls) if g.controls else None
    if g.kind in _SIMPLE_1Q or g.kind in _PARAM_1Q:
        m = _SIMPLE_1Q[g.kind] if g.kind in _SIMPLE_1Q else _PARAM_1Q[g.kind](g.param)
        t = g.targets[0]
        lo = ((idx >> t) & 1) == 0
        sel0 = idx[(lo & mask) if mask is not None else lo]
        sel1 = sel0 | (1 << t)
        a, b = st[sel0], st[sel1]
        st[sel0] = m[0, 0] * a + m[0, 1] * b
        st[sel1] = m[1, 0] * a + m[1, 1] * b
        return st
    if g.kind == "GlobalPhase":
        f = np.exp(1j * g.param)
        if mask is None:
            st *= f
        else:
            st[mask] *= f
        return st
    if g.kind == "Swap":
        t0, t1 = g.targets
        cond = (((idx >> t0) & 1) == 1) & (((idx >> t1) & 1) == 0)
        if mask is not None:
            cond &= mask
        sel = idx[cond]
        other = (sel ^ (1 << t0)) | (1 << t1)
        st[sel], st[other] = st[other].copy(), st[sel].copy()
        return st
    if g.kind == "Permutation":
        tbl = np.asarray(g.table)
        block = np.zeros(idx.shape, dtype=idx.dtype)
        for i, q in enumerate(g.targets):
            block |= ((idx >> q) & 1) << i
        newblock = tbl[block]
        dest = idx.copy()
        for i, q in enumerate(g.targets):
            dest &= ~(1 << q)
            dest |= ((newblock >> i) & 1) << q
        out = st.copy()
        if mask is None:
            out[dest] = st[idx]
        else:
            out[dest[mask]] = st[idx[mask]]
        return out
    raise AssertionError(g.kind)


def lower_permutation_gate(g: Gate) -> list[Gate]:
    """Expand a PermutationGate into CX conjugations around multi-controlled X.

    One network per transposition; cycles are processed in order of their
    smallest moved index, and each cycle (c0 c1 ... ck) with c0 minimal emits
    the transpositions (c0,c1), (c0,c2), ..., (c0,ck).
    """
    if g.kind != "Permutation":
        raise ValueError("not a permutation gate")
    table, targets = g.table, g.targets
    nq = len(targets)
    seen = [False] * len(table)
    gates: list[Gate] = []
    for start in range(len(table)):
        if seen[start] or table[start] == start:
            seen[start] = True
            continue
        cycle = [start]
        seen[start] = True
        nxt = table[start]
        while nxt != start:
            cycle.append(nxt)
            seen[nxt] = True
            nxt = table[nxt]
        for other in cycle[1:]:
            gates.extend(_transposition_gates(start, other, nq, targets, g.controls))
    return gates


def _transposition_gates(a, b, nq, targets, extra_controls):
    diff = a ^ b
    t = (diff & -diff).bit_length() - 1
    a_t = (a >> t) & 1
    ladder = [
        Gate("X", (targets[j],), ((targets[t], a_t),))
        for j in range(nq)
        if j != t and (diff >> j) & 1
    ]
    core_controls = tuple((targets[i], (b >> i) & 1) for i in range(nq) if i != t)
    core = Gate("X", (targets[t],), core_controls + tuple(extra_controls))
    return ladder + [core] + ladder[::-1]


def t_count_estimate(circuit: Circuit) -> dict[str, int]:
    """Rough T-cost of the lowered circuit.

    Fixed cost model: Toffoli = 7 T; an X with n >= 2 controls costs (2n - 3)
    Toffolis plus n - 2 clean scratch qubits.  These are documented constants
    of this estimator, not tight syntheses.
    """
    t = 0
    scratch = 0
    for g in circuit.gates:
        lowered = lower_permutation_gate(g) if g.kind == "Permutation" else [g]
        for lg in lowered:
            n = len(lg.controls)
            if lg.kind == "T":
                t += 1
            elif lg.kind == "X" and n >= 2:
                t += (2 * n - 3) * 7
                scratch = max(scratch, n - 2)
    return {"t": t, "scratch": scratch}


_QASM_NAMES = {
    "X": "x", "Y": "y", "Z": "z", "H": "h", "S": "s", "T": "t",
    "Phase": "p", "RX": "rx", "RY": "ry", "RZ": "rz",
    "Swap": "swap", "GlobalPhase": "gphase",
}


def export_text(circuit: Circuit, lower_permutations: bool = False) -> str:
    """OpenQASM-3-compatible textual export (export only, no import path)."""
    lines = ["OPENQASM 3.0;", 'include "stdgates.inc";',
             f"qubit[{circuit.main_qubits}] q;"]
    if circuit.ancilla_qubits:
        lines.append(f"qubit[{circuit.ancilla_qubits}] anc;")

    def ref(q):
        if q < circuit.main_qubits:
            return f"q[{q}]"
        return f"anc[{q - circuit.main_qubits}]"

    def emit(g: Gate):
        if g.kind == "Permutation":
            if not lower_permutations:
                raise UnsupportedGateError(
                    "PermutationGate has no direct text form; export with lowering enabled")
            for lg in lower_permutation_gate(g):
                emit(lg)
            return
        name = _QASM_NAMES[g.kind]
        if g.param is not None:
            name += f"({g.param!r})"
        ctrls = list(g.controls)
        args = [ref(q) for q, _ in ctrls] + [ref(q) for q in g.targets]
        if g.kind == "X" and ctrls and all(p == 1 for _, p in ctrls) and len(ctrls) <= 2:
            name = "cx" if len(ctrls) == 1 else "ccx"
        else:
            name = "".join("ctrl @ " if p else "negctrl @ " for _, p in ctrls) + name
        lines.append(f"{name} {', '.join(args)};" if args else f"{name};")

    for g in circuit.gates:
        emit(g)
    return "\n".join(lines) + "\n"
