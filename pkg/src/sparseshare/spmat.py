"""Sparse matrices over F_q in sorted coordinate form, plus the SPFQ file format.

SPFQ 1 layout (UTF-8, LF)::

    SPFQ 1
    q k m nnz
    row col value        # nnz lines, 0-indexed, row-major sorted, value in [1, q-1]
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._backend import kernels
from .field import FieldError, PrimeField
from .rng import Xoshiro256


class SpfqFormatError(ValueError):
    pass


def _i64(x) -> np.ndarray:
    return np.ascontiguousarray(x, dtype=np.int64)


class SparseMatrix:
    """Immutable k x m matrix over ``field`` storing only nonzero entries.

    Entries are kept as three parallel int64 arrays sorted row-major with no
    duplicates and no stored zeros.
    """

    __slots__ = ("field", "shape", "rows", "cols", "vals", "_indptr")

    def __init__(self, field: PrimeField, shape, rows, cols, vals, check: bool = True):
        k, m = int(shape[0]), int(shape[1])
        if k < 1 or m < 1:
            raise ValueError(f"dimensions must be positive, got {k}x{m}")
        self.field = field
        self.shape = (k, m)
        self.rows = _i64(rows)
        self.cols = _i64(cols)
        self.vals = _i64(vals)
        self._indptr = None
        if check:
            self._validate()
        for arr in (self.rows, self.cols, self.vals):
            arr.flags.writeable = False

    def _validate(self):
        k, m = self.shape
        q = self.field.q
        if not (len(self.rows) == len(self.cols) == len(self.vals)):
            raise ValueError("rows, cols and vals must have equal length")
        if len(self.vals) == 0:
            return
        if self.rows.min() < 0 or self.rows.max() >= k or self.cols.min() < 0 or self.cols.max() >= m:
            raise ValueError("entry index out of range")
        if self.vals.min() < 1 or self.vals.max() >= q:
            raise ValueError(f"stored values must lie in [1, {q - 1}]")
        keys = self.rows * m + self.cols
        if np.any(np.diff(keys) <= 0):
            raise ValueError("entries must be strictly sorted row-major without duplicates")

    # -- constructors -------------------------------------------------------

    @classmethod
    def zeros(cls, field, shape):
        e = np.empty(0, dtype=np.int64)
        return cls(field, shape, e, e, e, check=False)

    @classmethod
    def identity(cls, field, k):
        idx = np.arange(k, dtype=np.int64)
        return cls(field, (k, k), idx, idx, np.ones(k, dtype=np.int64), check=False)

    @classmethod
    def from_dense(cls, field, dense):
        d = np.asarray(dense, dtype=np.int64) % field.q
        if d.ndim != 2:
            raise ValueError("dense input must be 2-D")
        r, c = np.nonzero(d)
        return cls(field, d.shape, r, c, d[r, c], check=False)

    @classmethod
    def from_entries(cls, field, shape, rows, cols, vals):
        """Build from unsorted triples; duplicates are summed mod q, zeros dropped."""
        k, m = int(shape[0]), int(shape[1])
        rows, cols = _i64(rows), _i64(cols)
        if len(rows) and (rows.min() < 0 or rows.max() >= k or cols.min() < 0 or cols.max() >= m):
            raise ValueError("entry index out of range")
        keys = rows * m + cols
        return cls._from_keys(field, (k, m), keys, _i64(vals) % field.q)

    @classmethod
    def _from_keys(cls, field, shape, keys, vals):
        m = shape[1]
        if len(keys) == 0:
            return cls.zeros(field, shape)
        order = np.argsort(keys, kind="stable")
        keys, vals = keys[order], vals[order]
        uniq, start = np.unique(keys, return_index=True)
        sums = np.add.reduceat(vals, start) % field.q
        keep = sums != 0
        uniq, sums = uniq[keep], sums[keep]
        return cls(field, shape, uniq // m, uniq % m, sums, check=False)

    # -- views --------------------------------------------------------------

    @property
    def nnz(self) -> int:
        return len(self.vals)

    @property
    def indptr(self) -> np.ndarray:
        if self._indptr is None:
            counts = np.bincount(self.rows, minlength=self.shape[0])
            ptr = np.zeros(self.shape[0] + 1, dtype=np.int64)
            np.cumsum(counts, out=ptr[1:])
            ptr.flags.writeable = False
            self._indptr = ptr
        return self._indptr

    def row_nnz(self) -> np.ndarray:
        return np.diff(self.indptr)

    def to_dense(self) -> np.ndarray:
        d = np.zeros(self.shape, dtype=np.int64)
        d[self.rows, self.cols] = self.vals
        return d

    def keys(self) -> np.ndarray:
        return self.rows * self.shape[1] + self.cols

    # -- arithmetic ---------------------------------------------------------

    def _same(self, other: "SparseMatrix"):
        if not isinstance(other, SparseMatrix):
            raise TypeError(f"expected SparseMatrix, got {type(other).__name__}")
        if other.field != self.field:
            raise FieldError(f"field mismatch: {self.field} vs {other.field}")
        if other.shape != self.shape:
            raise ValueError(f"shape mismatch: {self.shape} vs {other.shape}")

    def combine(self, other: "SparseMatrix", coeff: int = 1) -> "SparseMatrix":
        """Return ``self + coeff * other``."""
        self._same(other)
        q = self.field.q
        coeff %= q
        if coeff == 0 or other.nnz == 0:
            return self
        keys = np.concatenate([self.keys(), other.keys()])
        vals = np.concatenate([self.vals, other.vals * coeff % q])
        return SparseMatrix._from_keys(self.field, self.shape, keys, vals)

    def scale(self, coeff: int) -> "SparseMatrix":
        coeff %= self.field.q
        if coeff == 0:
            return SparseMatrix.zeros(self.field, self.shape)
        return SparseMatrix(self.field, self.shape, self.rows, self.cols,
                            self.vals * coeff % self.field.q, check=False)

    def __add__(self, other):
        return self.combine(other, 1)

    def __sub__(self, other):
        return self.combine(other, -1)

    def __neg__(self):
        return self.scale(-1)

    def __matmul__(self, other):
        return sp_mul(self, other)

    def __eq__(self, other):
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (
            self.field == other.field
            and self.shape == other.shape
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.cols, other.cols)
            and np.array_equal(self.vals, other.vals)
        )

    __hash__ = None

    def __repr__(self):
        return f"SparseMatrix({self.shape[0]}x{self.shape[1]}, q={self.field.q}, nnz={self.nnz})"


def sp_mul(a: SparseMatrix, b: SparseMatrix) -> SparseMatrix:
    """Exact product ``a @ b`` mod q by row-wise sparse accumulation."""
    if a.field != b.field:
        raise FieldError(f"field mismatch: {a.field} vs {b.field}")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"cannot multiply {a.shape} by {b.shape}")
    k, m = a.shape[0], b.shape[1]
    ptr, col, val = kernels.spgemm(
        a.indptr, a.cols, a.vals, b.indptr, b.cols, b.vals, m, a.field.q
    )
    rows = np.repeat(np.arange(k, dtype=np.int64), np.diff(ptr))
    return SparseMatrix(a.field, (k, m), rows, col, val, check=False)


def product_cost(a: SparseMatrix, b: SparseMatrix) -> int:
    """Multiply-add count of :func:`sp_mul`: sum over nonzeros of ``a`` of nnz in the matching row of ``b``."""
    return int(b.row_nnz()[a.cols].sum())


def dense_mul(a: SparseMatrix, b: SparseMatrix) -> SparseMatrix:
    """O(k*l*m) reference product, exact for any q below 3e9."""
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"cannot multiply {a.shape} by {b.shape}")
    q = a.field.q
    da, db = a.to_dense(), b.to_dense()
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    for t in range(a.shape[1]):
        out = (out + np.outer(da[:, t], db[t, :]) % q) % q
    return SparseMatrix.from_dense(a.field, out)


@dataclass(frozen=True)
class SourceModel:
    """i.i.d. entries: zero with probability ``s``, otherwise uniform on F_q*."""

    field: PrimeField
    s: float

    def __post_init__(self):
        if not 0.0 <= self.s <= 1.0:
            raise ValueError(f"sparsity must lie in [0, 1], got {self.s}")

    def pmf(self) -> np.ndarray:
        q = self.field.q
        p = np.full(q, (1.0 - self.s) / (q - 1))
        p[0] = self.s
        return p


def _as_rng(seed) -> Xoshiro256:
    return seed if isinstance(seed, Xoshiro256) else Xoshiro256(seed)


def source_values(model: SourceModel, u: np.ndarray) -> np.ndarray:
    q, s = model.field.q, model.s
    out = np.zeros(u.shape, dtype=np.int64)
    nz = u >= s
    if s < 1.0:
        step = (1.0 - s) / (q - 1)
        out[nz] = np.minimum(np.floor((u[nz] - s) / step), q - 2).astype(np.int64) + 1
    return out


def sample_source_matrix(model: SourceModel, k: int, m: int, seed=0) -> SparseMatrix:
    """Draw a k x m matrix entry by entry in row-major order.

    Each entry consumes one uniform ``u``: zero when ``u < s``, otherwise
    ``1 + floor((u - s) / ((1 - s)/(q - 1)))`` clamped to ``q - 1``.
    ``seed`` may be an int or an existing :class:`Xoshiro256` stream.
    """
    if k < 1 or m < 1:
        raise ValueError("dimensions must be positive")
    u = _as_rng(seed).uniforms(k * m)
    return SparseMatrix.from_dense(model.field, source_values(model, u).reshape(k, m))


def empirical_sparsity(mat: SparseMatrix) -> Fraction:
    total = mat.shape[0] * mat.shape[1]
    return Fraction(total - mat.nnz, total)


def write_matrix(mat: SparseMatrix, path) -> None:
    k, m = mat.shape
    lines = ["SPFQ 1", f"{mat.field.q} {k} {m} {mat.nnz}"]
    lines.extend(f"{r} {c} {v}" for r, c, v in zip(mat.rows.tolist(), mat.cols.tolist(), mat.vals.tolist()))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _ints(line: str, count: int, lineno: int) -> list[int]:
    parts = line.split(" ")
    if len(parts) != count:
        raise SpfqFormatError(f"line {lineno}: expected {count} integers, got {line!r}")
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise SpfqFormatError(f"line {lineno}: non-integer field in {line!r}") from None


def read_matrix(path) -> SparseMatrix:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        text = fh.read()
    if "\r" in text:
        raise SpfqFormatError("CR line endings are not allowed")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != "SPFQ 1":
        raise SpfqFormatError("missing 'SPFQ 1' magic line")
    if len(lines) < 2:
        raise SpfqFormatError("missing dimension header")
    q, k, m, nnz = _ints(lines[1], 4, 2)
    try:
        field = PrimeField(q)
    except FieldError as exc:
        raise SpfqFormatError(str(exc)) from None
    if k < 1 or m < 1 or nnz < 0 or nnz > k * m:
        raise SpfqFormatError(f"bad header values q={q} k={k} m={m} nnz={nnz}")
    body = lines[2:]
    if len(body) != nnz:
        raise SpfqFormatError(f"header declares {nnz} entries, found {len(body)}")
    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz, dtype=np.int64)
    prev = -1
    for i, line in enumerate(body):
        r, c, v = _ints(line, 3, i + 3)
        if not (0 <= r < k and 0 <= c < m):
            raise SpfqFormatError(f"line {i + 3}: index ({r}, {c}) out of range")
        if not 1 <= v < q:
            raise SpfqFormatError(f"line {i + 3}: value {v} not in [1, {q - 1}]")
        key = r * m + c
        if key <= prev:
            raise SpfqFormatError(f"line {i + 3}: entries unsorted or duplicated")
        prev = key
        rows[i], cols[i], vals[i] = r, c, v
    return SparseMatrix(field, (k, m), rows, cols, vals, check=False)

