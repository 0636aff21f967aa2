"""Binary quadratic models: sparse upper-triangular QUBO and Ising forms.

A :class:`QuboMatrix` stores ``Q[i, j]`` for ``i <= j``; the diagonal holds
linear coefficients (``x*x == x`` for binary ``x``) and ``offset`` the
constant term, so that ``energy(x) = sum_{i<=j} Q[i, j] x_i x_j + offset``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "QuboMatrix",
    "IsingModel",
    "MatrixMetrics",
    "qubo_energy",
    "raw_energy",
    "qubo_to_ising",
    "ising_energy",
    "matrix_metrics",
    "export_matrix",
    "parse_matrix",
    "format_number",
    "EXPORT_FORMATS",
]

EXPORT_FORMATS = ("dense-csv", "coo", "json")


class QuboMatrix:
    """Sparse upper-triangular QUBO with exact-zero pruning."""

    def __init__(self, n: int, offset: float = 0.0):
        if n < 0:
            raise ValueError(f"variable count must be >= 0, got {n}")
        self.n = n
        self.offset = offset
        self.entries: dict[tuple[int, int], float] = {}

    def add_term(self, i: int, j: int, c: float) -> "QuboMatrix":
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise IndexError(f"term ({i}, {j}) out of range for n={self.n}")
        key = (i, j) if i <= j else (j, i)
        v = self.entries.get(key, 0) + c
        if v == 0:
            self.entries.pop(key, None)
        else:
            self.entries[key] = v
        return self

    def add_linear(self, i: int, c: float) -> "QuboMatrix":
        return self.add_term(i, i, c)

    def add_constant(self, c: float) -> "QuboMatrix":
        self.offset += c
        return self

    def __getitem__(self, key: tuple[int, int]) -> float:
        i, j = key
        return self.entries.get((min(i, j), max(i, j)), 0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuboMatrix):
            return NotImplemented
        return (
            self.n == other.n
            and self.offset == other.offset
            and self.entries == other.entries
        )

    def __repr__(self) -> str:
        return f"QuboMatrix(n={self.n}, nnz={len(self.entries)}, offset={self.offset!r})"

    def copy(self) -> "QuboMatrix":
        q = QuboMatrix(self.n, self.offset)
        q.entries = dict(self.entries)
        return q

    def diagonal(self) -> np.ndarray:
        d = np.zeros(self.n)
        for (i, j), v in self.entries.items():
            if i == j:
                d[i] = v
        return d

    def to_dense(self) -> np.ndarray:
        """Upper-triangular dense array (zeros below the diagonal)."""
        m = np.zeros((self.n, self.n))
        for (i, j), v in self.entries.items():
            m[i, j] = v
        return m

    def adjacency(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """CSR view of the symmetric off-diagonal couplings.

        Returns ``(diag, indptr, indices, weights)`` where the neighbours of
        ``i`` are ``indices[indptr[i]:indptr[i+1]]``.
        """
        nbrs: list[list[tuple[int, float]]] = [[] for _ in range(self.n)]
        for (i, j), v in sorted(self.entries.items()):
            if i != j:
                nbrs[i].append((j, v))
                nbrs[j].append((i, v))
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        for i, lst in enumerate(nbrs):
            indptr[i + 1] = indptr[i] + len(lst)
        indices = np.array([j for lst in nbrs for j, _ in lst], dtype=np.int64)
        weights = np.array([v for lst in nbrs for _, v in lst], dtype=np.float64)
        return self.diagonal(), indptr, indices, weights


def _check_bits(q: QuboMatrix, x: Sequence[int]) -> None:
    if len(x) != q.n:
        raise ValueError(f"bit vector has length {len(x)}, expected {q.n}")


def raw_energy(q: QuboMatrix, x: Sequence[int]) -> float:
    """``x^T Q x`` without the constant offset."""
    _check_bits(q, x)
    return sum(v for (i, j), v in q.entries.items() if x[i] and x[j])


def qubo_energy(q: QuboMatrix, x: Sequence[int]) -> float:
    return raw_energy(q, x) + q.offset


@dataclass
class IsingModel:
    """``H(s) = -sum_{i<j} J_ij s_i s_j - sum_i h_i s_i``; ``offset`` kept apart."""

    n: int
    couplings: dict[tuple[int, int], float] = field(default_factory=dict)
    fields: np.ndarray = None
    offset: float = 0.0

    def __post_init__(self):
        if self.fields is None:
            self.fields = np.zeros(self.n)


def qubo_to_ising(q: QuboMatrix) -> IsingModel:
    """Substitute ``x = (s + 1) / 2``.

    ``qubo_energy(q, x) == ising_energy(m, 2x - 1) + m.offset`` for all x.
    """
    h = np.zeros(q.n)
    J: dict[tuple[int, int], float] = {}
    offset = q.offset
    for (i, j), v in q.entries.items():
        if i == j:
            # v*x = v/2*s + v/2
            h[i] -= v / 2
            offset += v / 2
        else:
            # v*x_i*x_j = v/4*(s_i s_j + s_i + s_j + 1)
            J[(i, j)] = -v / 4
            h[i] -= v / 4
            h[j] -= v / 4
            offset += v / 4
    return IsingModel(q.n, J, h, offset)


def ising_energy(m: IsingModel, s: Sequence[int]) -> float:
    if len(s) != m.n:
        raise ValueError(f"spin vector has length {len(s)}, expected {m.n}")
    if any(v not in (-1, 1) for v in s):
        raise ValueError("spins must be -1 or +1")
    e = -sum(J * s[i] * s[j] for (i, j), J in m.couplings.items())
    e -= float(np.dot(m.fields, np.asarray(s, dtype=float)))
    return e


@dataclass(frozen=True)
class MatrixMetrics:
    n: int
    nnz: int
    cells: int
    density: float
    couplings: int
    max_incident: int
    max_degree: int

    def line(self) -> str:
        return (
            f"n={self.n} nnz={self.nnz} density={100 * self.density:.2f}% "
            f"max_incident={self.max_incident}"
        )


def matrix_metrics(q: QuboMatrix) -> MatrixMetrics:
    """Sparsity statistics of the stored upper-triangular matrix.

    ``max_incident`` is the largest nonzero count of any single row or
    column of the triangle. ``max_degree`` counts, per variable, all
    couplings touching it plus its diagonal entry.
    """
    row = [0] * q.n
    col = [0] * q.n
    degree = [0] * q.n
    couplings = 0
    for i, j in q.entries:
        row[i] += 1
        col[j] += 1
        degree[i] += 1
        if i != j:
            degree[j] += 1
            couplings += 1
    nnz = len(q.entries)
    cells = q.n * q.n
    return MatrixMetrics(
        n=q.n,
        nnz=nnz,
        cells=cells,
        density=nnz / cells if cells else 0.0,
        couplings=couplings,
        max_incident=max(row + col, default=0),
        max_degree=max(degree, default=0),
    )


def format_number(v: float) -> str:
    """Integers without a decimal point, others with up to 12 significant digits."""
    v = float(v)
    if v.is_integer():
        return str(int(v))
    return f"{v:.12g}"


def export_matrix(q: QuboMatrix, fmt: str) -> str:
    if fmt == "dense-csv":
        m = q.to_dense()
        return "\n".join(",".join(format_number(v) for v in row) for row in m)
    if fmt == "coo":
        lines = [f"{i} {j} {format_number(v)}" for (i, j), v in sorted(q.entries.items())]
        lines.append(f"# offset {format_number(q.offset)}")
        return "\n".join(lines)
    if fmt == "json":
        entries = [[i, j, _json_num(v)] for (i, j), v in sorted(q.entries.items())]
        return json.dumps({"n": q.n, "offset": _json_num(q.offset), "entries": entries})
    raise ValueError(f"unknown export format {fmt!r}; choose from {EXPORT_FORMATS}")


def _json_num(v: float):
    return int(v) if float(v).is_integer() else float(v)


def parse_matrix(text: str, fmt: str, n: int | None = None) -> QuboMatrix:
    """Inverse of :func:`export_matrix` for the ``coo`` and ``json`` formats.

    The coo text does not record ``n``; it defaults to one past the largest
    index seen.
    """
    if fmt == "json":
        d = json.loads(text)
        q = QuboMatrix(d["n"], d["offset"])
        for i, j, v in d["entries"]:
            q.add_term(i, j, v)
        return q
    if fmt == "coo":
        terms: list[tuple[int, int, float]] = []
        offset = 0.0
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] == "offset":
                    offset = _parse_num(parts[1])
                continue
            a, b, c = line.split()
            terms.append((int(a), int(b), _parse_num(c)))
        if n is None:
            n = max((max(i, j) for i, j, _ in terms), default=-1) + 1
        q = QuboMatrix(n, offset)
        for i, j, v in terms:
            q.add_term(i, j, v)
        return q
    raise ValueError(f"cannot parse format {fmt!r}")


def _parse_num(s: str) -> float:
    try:
        return int(s)
    except ValueError:
        return float(s)


def from_terms(n: int, terms: Iterable[tuple[int, int, float]], offset: float = 0.0) -> QuboMatrix:
    q = QuboMatrix(n, offset)
    for i, j, c in terms:
        q.add_term(i, j, c)
    return q
