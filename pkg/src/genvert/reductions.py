"""Constructive hardness gadgets: compile 3-CNF formulas into small ReLU
networks whose inversion decides satisfiability, plus a brute-force oracle.

The binary gadget maps +/-1 assignments to the count of unsatisfied clauses
(target 0).  The real gadget clamps arbitrary real inputs into [-1, 1],
forces them to +/-1 through an absolute-sum output coordinate, and exposes
the unsatisfied-clause count on the other coordinate (target (0, num_vars)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import Matrix, Vector
from .model import Activation, GeneratorNetwork, Layer

BRUTE_FORCE_VAR_LIMIT = 24
_CHUNK_BITS = 20


@dataclass(frozen=True)
class CnfFormula:
    """3-CNF instance: positive literal = variable index, negative = negation.
    Repeated literals inside a clause are allowed (how shorter clauses are
    padded up to width 3)."""

    num_vars: int
    clauses: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        if self.num_vars < 1:
            raise ValueError("formula needs at least one variable")
        for ci, clause in enumerate(self.clauses):
            if len(clause) != 3:
                raise ValueError(f"clause {ci + 1} has {len(clause)} literals, need 3")
            for lit in clause:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"clause {ci + 1}: literal {lit} out of range")

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)


def formula(num_vars: int, clauses) -> CnfFormula:
    return CnfFormula(num_vars, tuple(tuple(int(l) for l in c) for c in clauses))


def count_unsatisfied(f: CnfFormula, assignment) -> int:
    """Number of clauses with no true literal; assignment is a bool sequence."""
    if len(assignment) != f.num_vars:
        raise ValueError(f"assignment has {len(assignment)} values for {f.num_vars} variables")
    unsat = 0
    for clause in f.clauses:
        if not any((lit > 0) == bool(assignment[abs(lit) - 1]) for lit in clause):
            unsat += 1
    return unsat


def assignment_to_signs(assignment) -> Vector:
    """Encode booleans as the +/-1 inputs the gadget networks expect."""
    return Vector([1.0 if a else -1.0 for a in assignment])


def build_binary_gadget(f: CnfFormula) -> tuple[GeneratorNetwork, Vector]:
    """Two-layer network whose output on +/-1 inputs counts unsatisfied
    clauses; the formula is satisfiable iff the target output 0 is attained.

    Hidden unit per clause: weight -1 toward a positive literal, +1 toward a
    negative one, bias -2, so the pre-activation is 1 - 2 * (number of
    satisfied literals) and the unit fires exactly when the clause fails.
    """
    k, m = f.num_vars, f.num_clauses
    w1 = np.zeros((m, k))
    for ci, clause in enumerate(f.clauses):
        for lit in clause:
            w1[ci, abs(lit) - 1] += -1.0 if lit > 0 else 1.0
    hidden = Layer(Matrix.from_array(w1), Vector(np.full(m, -2.0)), Activation.relu())
    total = Layer(Matrix.from_array(np.ones((1, m))), Vector(np.zeros(1)), Activation.relu())
    return GeneratorNetwork((hidden, total)), Vector([0.0])


def build_real_gadget(f: CnfFormula) -> tuple[GeneratorNetwork, Vector]:
    """Four-layer ReLU network over real inputs with target (0, num_vars).

    Layers 1-2 clamp each input into v = min(max(z, -1), 1) via the rewrite
    v = 1 - ReLU(2 - ReLU(z + 1)); because each layer carries its own bias,
    the constant offsets fold into the next layer's bias and no dedicated
    constant channel is needed.  Layer 3 holds one unit per clause (on v,
    through the same +/-1 weights as the binary gadget) plus per-input
    positive/negative part units; layer 4 sums clause units into output 1 and
    the absolute parts into output 2.  Output 2 equals sum |v_i| <= num_vars
    with equality iff every v_i is +/-1, which pins the inputs to the binary
    case; output 1 then counts unsatisfied clauses.
    """
    k, m = f.num_vars, f.num_clauses

    clamp_low = Layer(Matrix.from_array(np.eye(k)), Vector(np.ones(k)), Activation.relu())
    clamp_high = Layer(Matrix.from_array(-np.eye(k)), Vector(np.full(k, 2.0)),
                       Activation.relu())

    # layer 3 inputs h satisfy v = 1 - h
    w3 = np.zeros((m + 2 * k, k))
    b3 = np.zeros(m + 2 * k)
    for ci, clause in enumerate(f.clauses):
        bias = -2.0
        for lit in clause:
            var = abs(lit) - 1
            if lit > 0:  # v-coefficient -1 becomes +1 on h with -1 into the bias
                w3[ci, var] += 1.0
                bias += -1.0
            else:
                w3[ci, var] += -1.0
                bias += 1.0
        b3[ci] = bias
    for i in range(k):  # positive part ReLU(v) = ReLU(1 - h)
        w3[m + i, i] = -1.0
        b3[m + i] = 1.0
    for i in range(k):  # negative part ReLU(-v) = ReLU(h - 1)
        w3[m + k + i, i] = 1.0
        b3[m + k + i] = -1.0
    units = Layer(Matrix.from_array(w3), Vector(b3), Activation.relu())

    w4 = np.zeros((2, m + 2 * k))
    w4[0, :m] = 1.0
    w4[1, m:] = 1.0
    head = Layer(Matrix.from_array(w4), Vector(np.zeros(2)), Activation.relu())

    net = GeneratorNetwork((clamp_low, clamp_high, units, head))
    return net, Vector([0.0, float(k)])


def brute_force_sat(f: CnfFormula):
    """Exhaustive satisfiability check; returns a bool assignment or None.

    Guarded to num_vars <= 24; assignments are enumerated in chunks as bit
    patterns (variable i is bit i) so the scan is vectorized.
    """
    if f.num_vars > BRUTE_FORCE_VAR_LIMIT:
        raise ValueError(f"brute force capped at {BRUTE_FORCE_VAR_LIMIT} variables")
    n = f.num_vars
    total = 1 << n
    chunk = 1 << min(n, _CHUNK_BITS)
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.uint32)
        sat = np.ones(codes.size, dtype=bool)
        for clause in f.clauses:
            clause_sat = np.zeros(codes.size, dtype=bool)
            for lit in clause:
                bit = (codes >> (abs(lit) - 1)) & 1
                clause_sat |= (bit == 1) if lit > 0 else (bit == 0)
            sat &= clause_sat
            if not sat.any():
                break
        if sat.any():
            code = int(codes[int(np.argmax(sat))])
            return tuple(bool((code >> i) & 1) for i in range(n))
    return None


def parse_dimacs(text: str) -> CnfFormula:
    """DIMACS CNF subset: one ``p cnf`` header, clause lines terminated by 0.

    Clauses with one or two literals are padded by repeating the last
    literal; clauses longer than three literals are rejected.
    """
    num_vars = None
    declared_clauses = None
    clauses: list[tuple[int, int, int]] = []
    pending: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"line {lineno}: malformed problem line {line!r}")
            if num_vars is not None:
                raise ValueError(f"line {lineno}: duplicate problem line")
            try:
                num_vars, declared_clauses = int(parts[2]), int(parts[3])
            except ValueError as e:
                raise ValueError(f"line {lineno}: bad problem line numbers") from e
            continue
        if num_vars is None:
            raise ValueError(f"line {lineno}: clause before the 'p cnf' header")
        try:
            lits = [int(tok) for tok in line.split()]
        except ValueError as e:
            raise ValueError(f"line {lineno}: non-integer literal") from e
        pending.extend(lits)
        while 0 in pending:
            at = pending.index(0)
            clause = pending[:at]
            pending = pending[at + 1:]
            if not 1 <= len(clause) <= 3:
                raise ValueError(
                    f"line {lineno}: clause of width {len(clause)}, only 1-3 supported")
            while len(clause) < 3:
                clause.append(clause[-1])
            clauses.append(tuple(clause))
    if num_vars is None:
        raise ValueError("missing 'p cnf' header")
    if pending:
        raise ValueError("trailing literals without a terminating 0")
    if declared_clauses is not None and declared_clauses != len(clauses):
        raise ValueError(
            f"header declares {declared_clauses} clauses, found {len(clauses)}")
    return CnfFormula(num_vars, tuple(clauses))
