"""Query circuits: oracle adversaries as alternating local unitaries and queries.

A circuit runs on registers A (work), optionally Z (standard-form scratch),
X, Y, plus the oracle database D when the backend carries one.  Local
unitaries may target any subset of {A, Z, X, Y}; queries are forward or
inverse oracle calls dispatched through an :class:`~spolab.oracles.OracleBackend`.

The module also provides the concrete adversaries used by the verification
experiments (classical probes, Grover preimage and double-sided zero search
attackers, seeded random circuits), the standard-form preprocessing that
doubles the query count, and a line-oriented text format for circuit files.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Callable, Iterable, Literal

import numpy as np

from .oracles import (
    AMPLITUDE_BUDGET,
    BudgetError,
    OracleBackend,
    cnot_operator,
    concrete_backend,
    database_dim,
    database_layout,
    shift_operator,
    spo_backend,
    swap_operator,
    v_oracle,
)
from .permutations import Permutation, all_permutations, invert
from .states import (
    CQEnsemble,
    LinearOperator,
    RegisterLayout,
    StateVector,
    apply,
    from_matrix,
    probe_unitary,
)

Direction = Literal["forward", "inverse"]


@dataclass(frozen=True)
class LocalUnitary:
    targets: tuple[str, ...]
    op: LinearOperator
    tag: str = ""


@dataclass(frozen=True)
class Query:
    direction: Direction


Step = LocalUnitary | Query


@dataclass(frozen=True)
class QueryCircuit:
    """An adversary: ordered steps over registers A(,Z),X,Y plus oracle queries."""

    n: int
    steps: tuple[Step, ...]
    work_dim: int = 1
    output: Literal["x", "xy"] = "x"
    has_z: bool = False
    name: str = ""

    def __post_init__(self) -> None:
        allowed = {"A", "X", "Y"} | ({"Z"} if self.has_z else set())
        for step in self.steps:
            if isinstance(step, LocalUnitary):
                if not set(step.targets) <= allowed:
                    raise ValueError(f"unitary targets {step.targets} outside {allowed}")
                if not probe_unitary(step.op):
                    raise ValueError(f"step {step.tag or step.targets} fails the "
                                     "unitarity probe")
            elif isinstance(step, Query):
                if step.direction not in ("forward", "inverse"):
                    raise ValueError(f"bad query direction {step.direction!r}")
            else:
                raise TypeError(f"unknown step {step!r}")

    @property
    def query_count(self) -> int:
        return sum(1 for s in self.steps if isinstance(s, Query))

    def register_dim(self, name: str) -> int:
        return {"A": self.work_dim, "Z": self.n, "X": self.n, "Y": self.n}[name]


def circuit_layout(circ: QueryCircuit, backend: OracleBackend) -> RegisterLayout:
    regs: list[tuple[str, int]] = [("A", circ.work_dim)]
    if circ.has_z:
        regs.append(("Z", circ.n))
    regs += [("X", circ.n), ("Y", circ.n)]
    if backend.has_database:
        regs += list(database_layout(circ.n).registers)
    return RegisterLayout(tuple(regs))


def initial_state(circ: QueryCircuit, backend: OracleBackend) -> StateVector:
    lay = circuit_layout(circ, backend)
    if lay.total_dim > AMPLITUDE_BUDGET:
        raise BudgetError(f"joint state needs {lay.total_dim} amplitudes "
                          f"(budget {AMPLITUDE_BUDGET})")
    amps = np.zeros(lay.total_dim, dtype=np.complex128)
    if backend.has_database:
        nf = database_dim(circ.n)
        amps.reshape(-1, nf)[0, :] = 1.0 / math.sqrt(nf)
    else:
        amps[0] = 1.0
    return StateVector(lay, amps)


def run(circ: QueryCircuit, backend: OracleBackend) -> StateVector:
    """Run the circuit to completion and return the final joint state."""
    if backend.n != circ.n:
        raise ValueError(f"backend size {backend.n} != circuit size {circ.n}")
    state = initial_state(circ, backend)
    for step in circ.steps:
        if isinstance(step, Query):
            state = backend.query(state, step.direction)
        else:
            state = apply(step.op, state, step.targets)
    return state


def run_with_intermediates(
    circ: QueryCircuit, backend: OracleBackend
) -> tuple[StateVector, list[tuple[Direction, StateVector]]]:
    """Final state plus (direction, state) right before each query."""
    if backend.n != circ.n:
        raise ValueError(f"backend size {backend.n} != circuit size {circ.n}")
    state = initial_state(circ, backend)
    pre_query: list[tuple[Direction, StateVector]] = []
    for step in circ.steps:
        if isinstance(step, Query):
            pre_query.append((step.direction, state))
            state = backend.query(state, step.direction)
        else:
            state = apply(step.op, state, step.targets)
    return state, pre_query


def output_distribution(state: StateVector, output: str = "x") -> np.ndarray:
    """Exact Born probabilities of the declared output registers."""
    lay = state.layout
    arr = np.abs(state.reshaped()) ** 2
    keep = ("X",) if output == "x" else ("X", "Y")
    axes = tuple(i for i, name in enumerate(lay.names) if name not in keep)
    probs = arr.sum(axis=axes)
    if output == "xy" and lay.axis("X") > lay.axis("Y"):
        probs = probs.T
    return probs


# --------------------------------------------------------------------------
# Circuit library


def empty_circuit(n: int, work_dim: int = 1, output: str = "xy") -> QueryCircuit:
    return QueryCircuit(n, (), work_dim=work_dim, output=output, name="empty")


def classical_probe(n: int, x: int, direction: Direction = "forward") -> QueryCircuit:
    """Load |x> into X, make one query, output (x, Y)."""
    if not 0 <= x < n:
        raise ValueError(f"x={x} outside 0..{n - 1}")
    steps = (LocalUnitary(("X",), shift_operator(n, x), tag=f"load{x}"),
             Query(direction))
    return QueryCircuit(n, steps, output="xy",
                        name=f"probe-{direction[0]}{x}")


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random unitary: QR of a complex Gaussian with phase fix."""
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_circuit(seed: int, q: int, work_dim: int, n: int,
                   directions: Iterable[Direction] | None = None) -> QueryCircuit:
    """Seeded random adversary: Haar-ish unitaries on A,X,Y between queries."""
    rng = np.random.default_rng(seed)
    dims = (work_dim, n, n)
    dim = work_dim * n * n
    steps: list[Step] = []
    dir_list = list(directions) if directions is not None else [
        ("forward", "inverse")[rng.integers(0, 2)] for _ in range(q)]
    if len(dir_list) != q:
        raise ValueError("directions length must equal q")
    for j in range(q):
        steps.append(LocalUnitary(("A", "X", "Y"),
                                  from_matrix(haar_unitary(dim, rng), dims),
                                  tag=f"U{j}"))
        steps.append(Query(dir_list[j]))
    steps.append(LocalUnitary(("A", "X", "Y"),
                              from_matrix(haar_unitary(dim, rng), dims),
                              tag=f"U{q}"))
    return QueryCircuit(n, tuple(steps), work_dim=work_dim, output="xy",
                        name=f"rand-q{q}-s{seed}")


# --------------------------------------------------------------------------
# Standard form (query-count-doubling preprocessing)


def standard_form(circ: QueryCircuit) -> QueryCircuit:
    """Append a scratch register Z=|0> and replace each query by the
    SWAP / query / CNOT / query / SWAP gadget; makes exactly 2q queries and
    produces the same joint state on (A,Z),X,Y,D against the twirled oracle
    for every sigma, tau."""
    if circ.has_z:
        raise ValueError("circuit already carries a Z register")
    n = circ.n
    swap_yz = LocalUnitary(("Y", "Z"), swap_operator(n), tag="swapYZ")
    cnot_yz = LocalUnitary(("Y", "Z"), cnot_operator(n), tag="cnotYZ")
    steps: list[Step] = []
    for step in circ.steps:
        if isinstance(step, Query):
            steps += [swap_yz, Query(step.direction), cnot_yz,
                      Query(step.direction), swap_yz]
        else:
            steps.append(step)
    return QueryCircuit(n, tuple(steps), work_dim=circ.work_dim,
                        output=circ.output, has_z=True,
                        name=circ.name + "+std")


def dressed_standard_form(circ: QueryCircuit, sigma: Permutation,
                          tau: Permutation) -> QueryCircuit:
    """The standard-form circuit with V-dressed queries: run against the
    *untwirled* oracle it reproduces the twirled run of the original."""
    if circ.has_z:
        raise ValueError("circuit already carries a Z register")
    n = circ.n
    swap_yz = LocalUnitary(("Y", "Z"), swap_operator(n), tag="swapYZ")
    cnot_yz = LocalUnitary(("Y", "Z"), cnot_operator(n), tag="cnotYZ")

    def vx(p: Permutation, tag: str) -> LocalUnitary:
        return LocalUnitary(("X",), v_oracle(p), tag=tag)

    def vy(p: Permutation, tag: str) -> LocalUnitary:
        return LocalUnitary(("Y",), v_oracle(p), tag=tag)

    sigma_inv, tau_inv = invert(sigma), invert(tau)
    steps: list[Step] = []
    for step in circ.steps:
        if not isinstance(step, Query):
            steps.append(step)
            continue
        if step.direction == "forward":
            first = [vx(sigma, "Vs"), Query("forward"), vy(tau_inv, "Vt-"),
                     vx(sigma_inv, "Vs-")]
            second = [vy(tau, "Vt"), vx(sigma, "Vs"), Query("forward"),
                      vx(sigma_inv, "Vs-")]
        else:
            first = [vx(tau, "Vt"), Query("inverse"), vy(sigma_inv, "Vs-"),
                     vx(tau_inv, "Vt-")]
            second = [vy(sigma, "Vs"), vx(tau, "Vt"), Query("inverse"),
                      vx(tau_inv, "Vt-")]
        steps += [swap_yz, *first, cnot_yz, *second, swap_yz]
    return QueryCircuit(n, tuple(steps), work_dim=circ.work_dim,
                        output=circ.output, has_z=True,
                        name=circ.name + "+dressed")


def with_loading_query(circ: QueryCircuit) -> QueryCircuit:
    """Append one forward query that loads pi(x) into Y.

    The original Y content is parked in a fresh |0> scratch register first,
    so the final (X, Y) readout is exactly (x, pi(x))."""
    if circ.has_z:
        raise ValueError("circuit already uses the Z register")
    steps = circ.steps + (
        LocalUnitary(("Y", "Z"), swap_operator(circ.n), tag="swapYZ"),
        Query("forward"),
    )
    return QueryCircuit(circ.n, steps, work_dim=circ.work_dim, output="xy",
                        has_z=True, name=circ.name + "+load")


# --------------------------------------------------------------------------
# Ensembles for the exact-simulation experiments


def concrete_ensemble(circ: QueryCircuit, n: int) -> CQEnsemble:
    """Experiment: sample pi uniformly, run against U^pi; labels are pi."""
    nf = database_dim(n)
    weight = 1.0 / math.sqrt(nf)
    out = CQEnsemble()
    for perm in all_permutations(n):
        final = run(circ, concrete_backend(perm))
        out.entries[perm.images] = StateVector(final.layout, final.amps * weight)
    return out


def spo_ensemble(circ: QueryCircuit, backend: OracleBackend) -> CQEnsemble:
    """Init + run + recover against an spo/tspo backend."""
    from .oracles import spo_recover

    final = run(circ, backend)
    return spo_recover(final, sigma=backend.sigma, tau=backend.tau)


# --------------------------------------------------------------------------
# Grover attackers for the one-round sponge and double-sided zero search


def _hadamard_power(m_bits: int) -> np.ndarray:
    h1 = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
    return reduce(np.kron, [h1] * m_bits) if m_bits else np.eye(1)


def _subspace_prep(n_bits: int, c: int) -> np.ndarray:
    """|0> -> uniform over {x || 0^c}: Hadamards on the leading n-c bits."""
    return np.kron(_hadamard_power(n_bits - c), np.eye(2 ** c))


def _diffusion(n_bits: int, c: int) -> np.ndarray:
    dim = 2 ** n_bits
    pad = 2 ** c
    psi = np.zeros(dim)
    psi[::pad][:] = 1.0 / math.sqrt(dim // pad)
    return 2.0 * np.outer(psi, psi) - np.eye(dim)


def _phase_flip(n_bits: int, predicate: Callable[[int], bool]) -> np.ndarray:
    dim = 2 ** n_bits
    return np.where([predicate(y) for y in range(dim)], -1.0, 1.0).astype(complex)


def _grover_circuit(n_bits: int, c: int, predicate: Callable[[int], bool],
                    iterations: int, name: str) -> QueryCircuit:
    if not 1 <= c < n_bits:
        raise ValueError(f"capacity must satisfy 1 <= c < n, got c={c}, n={n_bits}")
    n = 2 ** n_bits
    from .states import from_diagonal

    prep = LocalUnitary(("X",), from_matrix(_subspace_prep(n_bits, c)), tag="prep")
    flip = LocalUnitary(("Y",), from_diagonal((n,), _phase_flip(n_bits, predicate)),
                        tag="flip")
    diffuse = LocalUnitary(("X",), from_matrix(_diffusion(n_bits, c)), tag="diffuse")
    steps: list[Step] = [prep]
    for _ in range(iterations):
        steps += [Query("forward"), flip, Query("forward"), diffuse]
    return QueryCircuit(n, tuple(steps), output="x", name=name)


def grover_preimage(n_bits: int, c: int, target: int,
                    iterations: int) -> QueryCircuit:
    """Preimage attack on the one-round sponge f(x) = first n-c bits of
    pi(x || 0^c); two forward queries per iteration (compute, phase, uncompute)."""
    if not 0 <= target < 2 ** (n_bits - c):
        raise ValueError(f"target outside 0..2^{n_bits - c} - 1")
    return _grover_circuit(n_bits, c, lambda y: (y >> c) == target, iterations,
                           name=f"sponge-n{n_bits}c{c}k{iterations}")


def zero_search_adversary(n_bits: int, c: int, iterations: int) -> QueryCircuit:
    """Find x with pi(x || 0^c) ending in 0^c."""
    mask = 2 ** c - 1
    return _grover_circuit(n_bits, c, lambda y: (y & mask) == 0, iterations,
                           name=f"zero-n{n_bits}c{c}k{iterations}")


def sponge_success_predicate(n_bits: int, c: int, target: int) -> Callable[[int, Permutation], bool]:
    def pred(x_label: int, perm: Permutation) -> bool:
        return (perm(x_label & ~(2 ** c - 1)) >> c) == target and \
            (x_label & (2 ** c - 1)) == 0
    return pred


def zero_search_success_predicate(n_bits: int, c: int) -> Callable[[int, Permutation], bool]:
    mask = 2 ** c - 1

    def pred(x_label: int, perm: Permutation) -> bool:
        return (perm(x_label & ~mask) & mask) == 0 and (x_label & mask) == 0
    return pred


def success_probability(circ: QueryCircuit, perm: Permutation,
                        predicate: Callable[[int, Permutation], bool]) -> float:
    """Exact Born success probability of the X output under a fixed pi."""
    final = run(circ, concrete_backend(perm))
    dist = output_distribution(final, "x")
    return float(sum(p for x, p in enumerate(dist) if predicate(x, perm)))


def spo_success_probability(circ: QueryCircuit,
                            predicate: Callable[[int, Permutation], bool]) -> float:
    """Success probability with the SPO backend: measure X and recover pi."""
    from .oracles import perm_of_index

    final = run(circ, spo_backend(circ.n))
    lay = final.layout
    arr = np.abs(final.reshaped()) ** 2
    keep = {"X"} | {name for name in lay.names if name.startswith("D")}
    sum_axes = tuple(i for i, name in enumerate(lay.names) if name not in keep)
    joint = arr.sum(axis=sum_axes).reshape(circ.n, -1)  # (X, database label)
    total = 0.0
    for d in range(joint.shape[1]):
        perm = perm_of_index(circ.n, d)
        for x in range(circ.n):
            if joint[x, d] > 0 and predicate(x, perm):
                total += joint[x, d]
    return float(total)


def grover_reference(marked: int, space: int, iterations: int) -> float:
    """Textbook amplitude amplification: sin^2((2k+1) asin(sqrt(m/M)))."""
    if marked == 0:
        return 0.0
    theta = math.asin(math.sqrt(marked / space))
    return math.sin((2 * iterations + 1) * theta) ** 2


def hypergeometric_pmf(population: int, successes: int, draws: int) -> list[Fraction]:
    """Exact pmf of the marked-count m over a uniform permutation."""
    denom = math.comb(population, draws)
    out = []
    for m in range(draws + 1):
        if m > successes or draws - m > population - successes:
            out.append(Fraction(0))
        else:
            out.append(Fraction(math.comb(successes, m) *
                                math.comb(population - successes, draws - m), denom))
    return out


def averaged_grover_reference(n_bits: int, c: int, iterations: int,
                              kind: str = "sponge") -> float:
    """E over pi of the exact per-pi Grover success, via the hypergeometric
    law of the marked-set size."""
    space = 2 ** (n_bits - c)
    population = 2 ** n_bits
    good = 2 ** c if kind == "sponge" else 2 ** (n_bits - c)
    pmf = hypergeometric_pmf(population, good, space)
    return float(sum(float(p) * grover_reference(m, space, iterations)
                     for m, p in enumerate(pmf)))


# --------------------------------------------------------------------------
# Line-oriented circuit text format
#
# Grammar (one directive per line, '#' starts a comment):
#   n <N>                  oracle size (power of two for XOR queries)
#   work <dim>             work register dimension (default 1)
#   output x|xy            declared classical output (default x)
#   load <v>               X += v (mod N) basis shift
#   query fwd|inv          one oracle query
#   unitary <R1[,R2...]> seed=<int>   seeded Haar-ish unitary on registers
#   name <text>            optional circuit name


def parse_circuit(text: str) -> QueryCircuit:
    n: int | None = None
    work = 1
    output = "x"
    name = ""
    pending: list[tuple] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0].lower()
        try:
            if kind == "n":
                n = int(parts[1])
            elif kind == "work":
                work = int(parts[1])
            elif kind == "output":
                output = parts[1]
                if output not in ("x", "xy"):
                    raise ValueError(f"output must be x or xy, got {output}")
            elif kind == "name":
                name = " ".join(parts[1:])
            elif kind == "load":
                pending.append(("load", int(parts[1])))
            elif kind == "query":
                d = {"fwd": "forward", "forward": "forward",
                     "inv": "inverse", "inverse": "inverse"}[parts[1]]
                pending.append(("query", d))
            elif kind == "unitary":
                regs = tuple(r.strip() for r in parts[1].split(","))
                seed = None
                for p in parts[2:]:
                    if p.startswith("seed="):
                        seed = int(p.split("=", 1)[1])
                if seed is None:
                    raise ValueError("unitary requires seed=<int>")
                pending.append(("unitary", regs, seed))
            else:
                raise ValueError(f"unknown directive {kind!r}")
        except (IndexError, KeyError, ValueError) as exc:
            raise ValueError(f"circuit file line {lineno}: {exc}") from exc
    if n is None:
        raise ValueError("circuit file must declare 'n <N>'")
    dims = {"A": work, "X": n, "Y": n}
    steps: list[Step] = []
    for item in pending:
        if item[0] == "load":
            steps.append(LocalUnitary(("X",), shift_operator(n, item[1]),
                                      tag=f"load{item[1]}"))
        elif item[0] == "query":
            steps.append(Query(item[1]))
        else:
            _, regs, seed = item
            if not set(regs) <= set(dims):
                raise ValueError(f"unitary registers {regs} unavailable")
            rng = np.random.default_rng(seed)
            tdims = tuple(dims[r] for r in regs)
            mat = haar_unitary(int(np.prod(tdims)), rng)
            steps.append(LocalUnitary(regs, from_matrix(mat, tdims),
                                      tag=f"u-seed{seed}"))
    return QueryCircuit(n, tuple(steps), work_dim=work, output=output, name=name)


def format_circuit(circ: QueryCircuit) -> str:
    """Serialize circuits built from text-format-compatible steps."""
    lines = [f"n {circ.n}", f"work {circ.work_dim}", f"output {circ.output}"]
    if circ.name:
        lines.append(f"name {circ.name}")
    for step in circ.steps:
        if isinstance(step, Query):
            lines.append(f"query {'fwd' if step.direction == 'forward' else 'inv'}")
        elif step.tag.startswith("load"):
            lines.append(f"load {step.tag[4:]}")
        elif step.tag.startswith("u-seed"):
            lines.append(f"unitary {','.join(step.targets)} seed={step.tag[6:]}")
        else:
            raise ValueError(f"step {step.tag!r} has no text form")
    return "\n".join(lines) + "\n"
