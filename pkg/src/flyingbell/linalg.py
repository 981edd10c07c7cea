"""Dense complex linear algebra and tensor-product bookkeeping.

Qubit convention used throughout the package: basis index 0 is the excited
state ``|e>`` and index 1 the ground state ``|g>``, so ``sigma_z = diag(1, -1)``
and ``sigma_plus = |e><g|``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-10
NORM_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-8


class ValidationError(ValueError):
    """Input violates a structural precondition (shape, Hermiticity, labels)."""


# Single-qubit operators, basis (|e>, |g>).
IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)
KET_E = np.array([1, 0], dtype=complex)
KET_G = np.array([0, 1], dtype=complex)


def dag(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def kron_all(*ops: np.ndarray) -> np.ndarray:
    return reduce(kron, ops, np.ones((1, 1), dtype=complex))


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and bool(np.max(np.abs(m - dag(m)), initial=0.0) <= tol)


def _require_hermitian(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    if not is_hermitian(m):
        err = np.max(np.abs(m - dag(m)))
        raise ValidationError(f"matrix is not Hermitian (max |M - M^dag| = {err:.3e})")
    return m


def hermitian_eig(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues in descending order.

    Returns ``(w, v)`` with ``m = v @ diag(w) @ v^dag`` and eigenvectors in the
    columns of ``v``.
    """
    m = _require_hermitian(m)
    # symmetrize so LAPACK sees an exactly Hermitian input
    w, v = np.linalg.eigh(0.5 * (m + dag(m)))
    return w[::-1].copy(), v[:, ::-1].copy()


def hermitian_function(m: np.ndarray, func) -> np.ndarray:
    """Apply a scalar function to the spectrum of a Hermitian matrix."""
    w, v = hermitian_eig(m)
    return (v * func(w)) @ dag(v)


def expm_hermitian_generator(h: np.ndarray, t: float) -> np.ndarray:
    """Propagator ``exp(-i h t)`` built from the eigenbasis of ``h``."""
    w, v = hermitian_eig(h)
    return (v * np.exp(-1j * w * t)) @ dag(v)


def operator_cosine(x: np.ndarray) -> np.ndarray:
    return hermitian_function(x, np.cos)


def annihilation(n_max: int) -> np.ndarray:
    """Truncated bosonic lowering operator on Fock states ``0..n_max``."""
    if n_max < 0:
        raise ValidationError("Fock truncation must be nonnegative")
    return np.diag(np.sqrt(np.arange(1, n_max + 1)), k=1).astype(complex)


@dataclass(frozen=True)
class SpaceLayout:
    """Ordered tensor factors, each a ``(label, dim)`` pair."""

    factors: tuple[tuple[str, int], ...]

    def __post_init__(self):
        factors = tuple((str(label), int(dim)) for label, dim in self.factors)
        labels = [label for label, _ in factors]
        if not factors:
            raise ValidationError("layout needs at least one factor")
        if len(set(labels)) != len(labels):
            raise ValidationError(f"duplicate factor labels in {labels}")
        if any(dim < 1 for _, dim in factors):
            raise ValidationError("factor dimensions must be positive")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def of(cls, *factors: tuple[str, int]) -> "SpaceLayout":
        return cls(tuple(factors))

    @classmethod
    def qubits(cls, *labels: str) -> "SpaceLayout":
        return cls(tuple((label, 2) for label in labels))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.factors)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValidationError(f"unknown factor label {label!r}; layout has {self.labels}") from None

    def dim_of(self, label: str) -> int:
        return self.dims[self.index(label)]

    def subset(self, labels: Iterable[str]) -> "SpaceLayout":
        keep = set(labels)
        return SpaceLayout(tuple(f for f in self.factors if f[0] in keep))

    def embed(self, ops: dict[str, np.ndarray]) -> np.ndarray:
        """Tensor product placing ``ops[label]`` on its factor, identity elsewhere."""
        for label in ops:
            self.index(label)
        mats = []
        for label, dim in self.factors:
            op = ops.get(label)
            if op is None:
                op = np.eye(dim, dtype=complex)
            elif np.shape(op) != (dim, dim):
                raise ValidationError(f"operator on {label!r} has shape {np.shape(op)}, expected {(dim, dim)}")
            mats.append(op)
        return kron_all(*mats)

    def basis_index(self, assignment: dict[str, int]) -> int:
        """Flat index of the product basis state with the given per-factor indices."""
        idx = [0] * len(self.factors)
        for label, value in assignment.items():
            idx[self.index(label)] = int(value)
        return int(np.ravel_multi_index(tuple(idx), self.dims))


@dataclass(frozen=True, eq=False)
class StateVector:
    layout: SpaceLayout
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != self.layout.dim:
            raise ValidationError(f"{amps.size} amplitudes for layout of dimension {self.layout.dim}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def projector(self) -> "DensityMatrix":
        return DensityMatrix(self.layout, np.outer(self.amplitudes, self.amplitudes.conj()))


def product_state(layout: SpaceLayout, kets: dict[str, np.ndarray]) -> StateVector:
    """Product ket with ``kets[label]`` on each factor (all factors required)."""
    missing = set(layout.labels) - set(kets)
    if missing:
        raise ValidationError(f"no ket given for factors {sorted(missing)}")
    return StateVector(layout, kron_all(*[np.reshape(kets[label], (-1, 1)) for label in layout.labels]))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite operator on a layout.

    Construction checks the invariants; pass ``check=False`` only for
    intermediate objects that are validated later.
    """

    layout: SpaceLayout
    matrix: np.ndarray
    check: bool = True

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        d = self.layout.dim
        if m.shape != (d, d):
            raise ValidationError(f"density matrix shape {m.shape} does not match layout dimension {d}")
        if self.check:
            validate_density_matrix(m)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def expect(self, op: np.ndarray) -> complex:
        return complex(np.trace(self.matrix @ op))

    def fidelity_to_pure(self, ket: StateVector | np.ndarray) -> float:
        """``<psi|rho|psi>``; insensitive to the global phase of ``psi``."""
        psi = ket.amplitudes if isinstance(ket, StateVector) else np.asarray(ket, dtype=complex)
        return float(np.real(np.vdot(psi, self.matrix @ psi)))


def validate_density_matrix(m: np.ndarray) -> None:
    herm = np.max(np.abs(m - dag(m)), initial=0.0)
    if herm > HERMITIAN_TOL:
        raise ValidationError(f"density matrix not Hermitian (deviation {herm:.3e})")
    tr = np.trace(m)
    if abs(tr - 1) > TRACE_TOL:
        raise ValidationError(f"density matrix trace {tr.real:.12g} differs from 1")
    wmin = np.linalg.eigvalsh(0.5 * (m + dag(m)))[0]
    if wmin < -POSITIVITY_TOL:
        raise ValidationError(f"density matrix has negative eigenvalue {wmin:.3e}")


def partial_trace(rho: DensityMatrix, keep: Sequence[str] | set[str]) -> DensityMatrix:
    """Reduced state on ``keep``; kept factors retain their original order."""
    keep = set(keep)
    if not keep:
        raise ValidationError("partial_trace needs at least one factor to keep")
    for label in keep:
        rho.layout.index(label)
    dims = rho.layout.dims
    n = len(dims)
    kept = [i for i, label in enumerate(rho.layout.labels) if label in keep]
    traced = [i for i in range(n) if i not in kept]
    t = rho.matrix.reshape(dims + dims)
    # bra axes of traced factors reuse the ket letters so einsum contracts them
    letters = "abcdefghijklmnopqrstuvwxyz"
    ket = [letters[i] for i in range(n)]
    bra = [letters[n + i] if i in kept else letters[i] for i in range(n)]
    out = [letters[i] for i in kept] + [letters[n + i] for i in kept]
    reduced = np.einsum("".join(ket + bra) + "->" + "".join(out), t)
    d = int(np.prod([dims[i] for i in kept]))
    sub = rho.layout.subset(keep)
    return DensityMatrix(sub, reduced.reshape(d, d), check=rho.check)


def random_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (a + dag(a))


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR with phase correction."""
    z = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_density_matrix(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = n if rank is None else rank
    g = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    m = g @ dag(g)
    return m / np.trace(m)
