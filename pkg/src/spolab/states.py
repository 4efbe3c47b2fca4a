"""Registers, mixed-radix state vectors, operators, norms, and ensemble distances.

A :class:`RegisterLayout` is an ordered list of named finite registers; a
:class:`StateVector` is a flat complex array over the product basis with the
*last* register varying fastest (row-major).  The oracle database keeps its
registers D_n, ..., D_1 trailing and in descending order, so the flat index
of the database block is exactly the mixed-radix permutation label with t_1
least significant.

State vectors are immutable from the caller's perspective: every operation
returns a fresh array, so read-only sharing across threads is safe.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Hashable, Iterable, Mapping

import numpy as np

ATOL = 1e-10
DENSE_NORM_CAP = 4096

Label = Hashable


class LayoutError(ValueError):
    """Register/layout mismatch between operands."""


class NormConvergenceError(RuntimeError):
    """Power iteration for an operator norm failed to converge."""

    def __init__(self, message: str, lower: float, estimate: float):
        super().__init__(f"{message} (certified lower bound {lower:.3e}, "
                         f"last estimate {estimate:.3e})")
        self.lower = lower
        self.estimate = estimate


@dataclass(frozen=True)
class RegisterLayout:
    """Ordered named registers; the last register varies fastest."""

    registers: tuple[tuple[str, int], ...]

    def __post_init__(self) -> None:
        names = [name for name, _ in self.registers]
        if len(set(names)) != len(names):
            raise LayoutError(f"duplicate register names in {names}")
        for name, dim in self.registers:
            if dim < 1:
                raise LayoutError(f"register {name} has dimension {dim} < 1")

    @cached_property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.registers)

    @cached_property
    def shape(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.registers)

    @cached_property
    def total_dim(self) -> int:
        return int(np.prod(self.shape, dtype=np.int64)) if self.registers else 1

    @cached_property
    def strides(self) -> tuple[int, ...]:
        out = []
        acc = 1
        for dim in reversed(self.shape):
            out.append(acc)
            acc *= dim
        return tuple(reversed(out))

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise LayoutError(f"no register named {name!r} in {self.names}") from None

    def dim(self, name: str) -> int:
        return self.shape[self.axis(name)]

    def has(self, name: str) -> bool:
        return name in self.names

    def drop(self, names: Iterable[str]) -> "RegisterLayout":
        gone = set(names)
        return RegisterLayout(tuple(r for r in self.registers if r[0] not in gone))


def database_layout(n: int) -> RegisterLayout:
    """Registers D_n, ..., D_1 with dims n, ..., 1 (total n!).

    Descending order makes the flat index the mixed-radix permutation label.
    D_1 has dimension 1: logically present, zero strides of storage.
    """
    return RegisterLayout(tuple((f"D{k}", k) for k in range(n, 0, -1)))


def database_names(n: int) -> tuple[str, ...]:
    return tuple(f"D{k}" for k in range(n, 0, -1))


@dataclass(frozen=True)
class StateVector:
    layout: RegisterLayout
    amps: np.ndarray  # flat complex128, length layout.total_dim

    def __post_init__(self) -> None:
        if self.amps.shape != (self.layout.total_dim,):
            raise LayoutError(
                f"amplitude array shape {self.amps.shape} does not match "
                f"layout dimension {self.layout.total_dim}")

    def reshaped(self) -> np.ndarray:
        return self.amps.reshape(self.layout.shape)

    def norm_sq(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def inner(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amps, other.amps))


def zero_state(layout: RegisterLayout) -> StateVector:
    return StateVector(layout, np.zeros(layout.total_dim, dtype=np.complex128))


def basis_state(layout: RegisterLayout, indices: Mapping[str, int] | None = None) -> StateVector:
    """|i_1, ..., i_r> with unspecified registers at index 0."""
    indices = dict(indices or {})
    flat = 0
    for (name, dim), stride in zip(layout.registers, layout.strides):
        i = indices.pop(name, 0)
        if not 0 <= i < dim:
            raise LayoutError(f"index {i} outside register {name} (dim {dim})")
        flat += i * stride
    if indices:
        raise LayoutError(f"unknown registers {sorted(indices)}")
    amps = np.zeros(layout.total_dim, dtype=np.complex128)
    amps[flat] = 1.0
    return StateVector(layout, amps)


def uniform_state(dim: int, name: str = "R") -> StateVector:
    """|+_dim> = (1/sqrt(dim)) * sum_t |t> on a single register."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    layout = RegisterLayout(((name, dim),))
    return StateVector(layout, np.full(dim, 1.0 / np.sqrt(dim), dtype=np.complex128))


def product_uniform(layout: RegisterLayout) -> StateVector:
    """Every register uniform; globally uniform amplitude 1/sqrt(total_dim)."""
    d = layout.total_dim
    return StateVector(layout, np.full(d, 1.0 / np.sqrt(d), dtype=np.complex128))


# --------------------------------------------------------------------------
# Linear operators


@dataclass
class LinearOperator:
    """An operator on a block of registers with the given dims.

    ``apply_block`` maps a matricized (d, rest) array to its image; adjoint
    likewise.  A dense ``matrix`` is optional and used for exact norms.
    """

    dims: tuple[int, ...]
    apply_block: Callable[[np.ndarray], np.ndarray]
    adjoint_block: Callable[[np.ndarray], np.ndarray] | None = None
    matrix: np.ndarray | None = None
    label: str = ""

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64))

    def dense(self) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix
        return self.apply_block(np.eye(self.dim, dtype=np.complex128))

    def adjoint(self) -> "LinearOperator":
        if self.adjoint_block is None:
            mat = self.dense().conj().T
            return from_matrix(mat, self.dims, label=self.label + "^+")
        return LinearOperator(self.dims, self.adjoint_block, self.apply_block,
                              None if self.matrix is None else self.matrix.conj().T,
                              self.label + "^+")


def from_matrix(mat: np.ndarray, dims: tuple[int, ...] | None = None,
                label: str = "") -> LinearOperator:
    mat = np.asarray(mat, dtype=np.complex128)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {mat.shape}")
    if dims is None:
        dims = (mat.shape[0],)
    if int(np.prod(dims)) != mat.shape[0]:
        raise ValueError("dims do not multiply to the matrix dimension")
    return LinearOperator(
        tuple(dims),
        lambda block: mat @ block,
        lambda block: mat.conj().T @ block,
        matrix=mat,
        label=label,
    )


def from_permutation(dims: tuple[int, ...], mapping: np.ndarray,
                     label: str = "") -> LinearOperator:
    """Basis permutation |j> -> |mapping[j]>."""
    mapping = np.asarray(mapping)
    d = int(np.prod(dims))
    if mapping.shape != (d,):
        raise ValueError("mapping length does not match dims")
    inverse = np.empty_like(mapping)
    inverse[mapping] = np.arange(d)

    def fwd(block: np.ndarray) -> np.ndarray:
        return block[inverse]

    def bwd(block: np.ndarray) -> np.ndarray:
        return block[mapping]

    op = LinearOperator(tuple(dims), fwd, bwd, label=label)
    op.mapping = mapping  # type: ignore[attr-defined]
    return op


def from_diagonal(dims: tuple[int, ...], diag: np.ndarray,
                  label: str = "") -> LinearOperator:
    diag = np.asarray(diag, dtype=np.complex128)
    d = int(np.prod(dims))
    if diag.shape != (d,):
        raise ValueError("diagonal length does not match dims")
    col = diag[:, None]
    return LinearOperator(
        tuple(dims),
        lambda block: col * block,
        lambda block: col.conj() * block,
        label=label,
    )


def identity_operator(dims: tuple[int, ...]) -> LinearOperator:
    return LinearOperator(tuple(dims), lambda b: b.copy(), lambda b: b.copy(),
                          label="I")


def apply(op: LinearOperator, state: StateVector, targets: tuple[str, ...]) -> StateVector:
    """Apply ``op`` on the named registers, identity elsewhere."""
    lay = state.layout
    axes = [lay.axis(t) for t in targets]
    dims = tuple(lay.shape[a] for a in axes)
    if dims != tuple(op.dims):
        raise LayoutError(f"operator dims {op.dims} do not match targets "
                          f"{targets} with dims {dims}")
    arr = state.reshaped()
    moved = np.moveaxis(arr, axes, range(len(axes)))
    tail_shape = moved.shape[len(axes):]
    block = moved.reshape(op.dim, -1)
    out = op.apply_block(block)
    out = out.reshape(dims + tail_shape)
    out = np.moveaxis(out, range(len(axes)), axes)
    return StateVector(lay, np.ascontiguousarray(out).reshape(-1))


def probe_unitary(op: LinearOperator, rng: np.random.Generator | None = None,
                  trials: int = 3, atol: float = 1e-10) -> bool:
    """Random-vector check that op preserves norms and is linear."""
    rng = rng or np.random.default_rng(7)
    d = op.dim
    for _ in range(trials):
        v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        w = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        a = complex(rng.standard_normal() + 1j * rng.standard_normal())
        fv = op.apply_block(v[:, None])[:, 0]
        fw = op.apply_block(w[:, None])[:, 0]
        fvw = op.apply_block((a * v + w)[:, None])[:, 0]
        if np.linalg.norm(fvw - (a * fv + fw)) > atol * max(1.0, np.linalg.norm(fvw)):
            return False
        if abs(np.linalg.norm(fv) - np.linalg.norm(v)) > atol * np.linalg.norm(v):
            return False
    return True


def operator_norm(op: LinearOperator, cap: int = DENSE_NORM_CAP,
                  tol: float = 1e-8, max_iter: int = 400) -> float:
    """Spectral norm: dense SVD up to ``cap``, else Lanczos iteration on the
    Gram operator A^+ A (randomized start, full reorthogonalization).

    The returned Ritz value is a certified lower bound on the norm; the run
    stops once its residual bracket is below ``tol`` relative.  Failure to
    converge raises with the best bracket seen.
    """
    if op.matrix is not None or op.dim <= cap:
        mat = op.dense()
        if mat.size == 0:
            return 0.0
        return float(np.linalg.norm(mat, 2))
    if op.adjoint_block is None:
        raise ValueError("matrix-free norm needs an adjoint")

    def gram(vec: np.ndarray) -> np.ndarray:
        return op.adjoint_block(op.apply_block(vec[:, None]))[:, 0]

    rng = np.random.default_rng(20240917)
    d = op.dim
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    v /= np.linalg.norm(v)
    basis = [v]
    alphas: list[float] = []
    betas: list[float] = []
    best = 0.0
    bracket = np.inf
    steps = min(max_iter, d)
    w = gram(v)
    for _ in range(steps):
        alpha = float(np.vdot(basis[-1], w).real)
        alphas.append(alpha)
        w = w - alpha * basis[-1]
        if len(basis) > 1:
            w = w - betas[-1] * basis[-2]
        for b in basis:  # full reorthogonalization keeps the recurrence honest
            w = w - np.vdot(b, w) * b
        beta = float(np.linalg.norm(w))
        tri = np.diag(alphas) + np.diag(betas, 1) + np.diag(betas, -1)
        eigvals, eigvecs = np.linalg.eigh(tri)
        ritz = float(max(eigvals[-1], 0.0))
        best = max(best, ritz)
        # Ritz residual: |lambda_ritz - some eigenvalue| <= beta * |s_last|
        bracket = beta * abs(eigvecs[-1, -1])
        if beta <= 1e-14 or bracket <= tol * max(ritz, 1e-300):
            return math.sqrt(ritz)
        betas.append(beta)
        basis.append(w / beta)
        w = gram(basis[-1])
    raise NormConvergenceError(
        "operator norm Lanczos iteration did not converge",
        lower=math.sqrt(best), estimate=math.sqrt(best + bracket))


def project_basis(state: StateVector, register: str, keep: Iterable[int]) -> StateVector:
    """Zero amplitudes outside ``keep`` on one register (subnormalized result)."""
    lay = state.layout
    ax = lay.axis(register)
    dim = lay.shape[ax]
    keep_set = sorted(set(keep))
    if any(not 0 <= k < dim for k in keep_set):
        raise LayoutError(f"keep set exceeds register {register} (dim {dim})")
    mask = np.zeros(dim, dtype=bool)
    mask[keep_set] = True
    arr = state.reshaped().copy()
    sl = [slice(None)] * arr.ndim
    sl[ax] = ~mask
    arr[tuple(sl)] = 0.0
    return StateVector(lay, arr.reshape(-1))


# --------------------------------------------------------------------------
# Classical-quantum ensembles


@dataclass
class CQEnsemble:
    """Classical label -> subnormalized conditional state (sums to prob 1)."""

    entries: dict[Label, StateVector] = field(default_factory=dict)

    def total_probability(self) -> float:
        return sum(s.norm_sq() for s in self.entries.values())

    def distribution(self) -> dict[Label, float]:
        return {k: s.norm_sq() for k, s in self.entries.items()}


def _pure_block_trace_norm(a: np.ndarray | None, b: np.ndarray | None) -> float:
    """Trace norm of |a><a| - |b><b| for (sub)normalized vectors."""
    na2 = float(np.vdot(a, a).real) if a is not None else 0.0
    nb2 = float(np.vdot(b, b).real) if b is not None else 0.0
    if na2 < 1e-300 and nb2 < 1e-300:
        return 0.0
    if na2 < 1e-300:
        return nb2
    if nb2 < 1e-300:
        return na2
    # Work in the (at most) 2-dim span of a and b.
    e1 = a / np.sqrt(na2)
    c = complex(np.vdot(e1, b))
    b_perp = b - c * e1
    mu = float(np.linalg.norm(b_perp))
    m = np.array([[na2 - abs(c) ** 2, -c * mu],
                  [-np.conj(c) * mu, -mu * mu]], dtype=np.complex128)
    eig = np.linalg.eigvalsh(m)
    return float(np.abs(eig).sum())


def trace_distance(a: CQEnsemble, b: CQEnsemble) -> float:
    """(1/2)||rho_a - rho_b||_1 with labels embedded as orthogonal flags."""
    total = 0.0
    for label in set(a.entries) | set(b.entries):
        sa = a.entries.get(label)
        sb = b.entries.get(label)
        if sa is not None and sb is not None and sa.layout != sb.layout:
            raise LayoutError(f"ensembles disagree on layout for label {label!r}")
        total += _pure_block_trace_norm(
            sa.amps if sa is not None else None,
            sb.amps if sb is not None else None,
        )
    return 0.5 * total
