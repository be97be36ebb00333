"""Exact linear algebra over Z, Z/p and Z/p^e.

The workhorses are

* :func:`smith_normal_form` -- dense SNF with unimodular transforms, used for
  small matrices where explicit change of basis matters;
* :func:`invariant_factors` -- sparse elimination that only reports the rank
  and the non-unit invariant factors, used on large cobar differentials;
* :func:`cohomology_at` -- ker(d_out)/im(d_in) as an :class:`AbelianGroupPresentation`.

Matrices act on column vectors: ``d(e_j) = sum_i M[i, j] e_i``.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np


class CompositionNotZero(ValueError):
    pass


class NotPrime(ValueError):
    pass


class ResourceLimitExceeded(RuntimeError):
    """Raised instead of returning a result when a size bound is crossed."""


@dataclass(frozen=True)
class Limits:
    max_slice_dim: int = 250_000
    max_dense_entries: int = 4_000_000

    @classmethod
    def from_env(cls) -> "Limits":
        base = cls()
        return cls(
            max_slice_dim=int(os.environ.get("TQMF_MAX_SLICE_DIM", base.max_slice_dim)),
            max_dense_entries=int(os.environ.get("TQMF_MAX_DENSE_ENTRIES", base.max_dense_entries)),
        )


# ---------------------------------------------------------------------------
# matrices and groups
# ---------------------------------------------------------------------------


class IntMatrix:
    """Sparse immutable integer matrix; only nonzero entries are stored."""

    __slots__ = ("nrows", "ncols", "_entries")

    def __init__(self, nrows: int, ncols: int, entries: Mapping[tuple[int, int], int] | None = None):
        if nrows < 0 or ncols < 0:
            raise ValueError("negative matrix dimension")
        clean = {}
        for (i, j), v in (entries or {}).items():
            if not (0 <= i < nrows and 0 <= j < ncols):
                raise IndexError(f"entry {(i, j)} outside {nrows}x{ncols}")
            if v:
                clean[(i, j)] = int(v)
        self.nrows = nrows
        self.ncols = ncols
        self._entries = clean

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence[int]], ncols: int | None = None) -> "IntMatrix":
        nrows = len(rows)
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        return cls(nrows, ncols, {(i, j): v for i, r in enumerate(rows) for j, v in enumerate(r) if v})

    @classmethod
    def from_columns(cls, nrows: int, columns: Sequence[Mapping[int, int]]) -> "IntMatrix":
        return cls(nrows, len(columns), {(i, j): v for j, col in enumerate(columns) for i, v in col.items()})

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, {(i, i): 1 for i in range(n)})

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "IntMatrix":
        return cls(nrows, ncols)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def entries(self) -> dict[tuple[int, int], int]:
        return dict(self._entries)

    def nnz(self) -> int:
        return len(self._entries)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        return self._entries.get(ij, 0)

    def items(self):
        return self._entries.items()

    def to_dense(self) -> list[list[int]]:
        out = [[0] * self.ncols for _ in range(self.nrows)]
        for (i, j), v in self._entries.items():
            out[i][j] = v
        return out

    def row_dicts(self) -> list[dict[int, int]]:
        rows: list[dict[int, int]] = [dict() for _ in range(self.nrows)]
        for (i, j), v in self._entries.items():
            rows[i][j] = v
        return rows

    def col_dicts(self) -> list[dict[int, int]]:
        cols: list[dict[int, int]] = [dict() for _ in range(self.ncols)]
        for (i, j), v in self._entries.items():
            cols[j][i] = v
        return cols

    def transpose(self) -> "IntMatrix":
        return IntMatrix(self.ncols, self.nrows, {(j, i): v for (i, j), v in self._entries.items()})

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.ncols != other.nrows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        right_rows = other.row_dicts()
        out: dict[tuple[int, int], int] = {}
        for (i, k), v in self._entries.items():
            for j, w in right_rows[k].items():
                out[(i, j)] = out.get((i, j), 0) + v * w
        return IntMatrix(self.nrows, other.ncols, out)

    def apply(self, vec: Mapping[int, int]) -> dict[int, int]:
        """Image of a sparse column vector."""
        cols = self.col_dicts()
        out: dict[int, int] = {}
        for j, c in vec.items():
            for i, v in cols[j].items():
                out[i] = out.get(i, 0) + c * v
        return {i: v for i, v in out.items() if v}

    def mod(self, m: int) -> "IntMatrix":
        return IntMatrix(self.nrows, self.ncols, {k: v % m for k, v in self._entries.items()})

    def is_zero(self) -> bool:
        return not self._entries

    def __eq__(self, other):
        if not isinstance(other, IntMatrix):
            return NotImplemented
        return self.shape == other.shape and self._entries == other._entries

    def __hash__(self):
        return hash((self.shape, frozenset(self._entries.items())))

    def __repr__(self):
        return f"IntMatrix({self.nrows}x{self.ncols}, nnz={len(self._entries)})"


@dataclass(frozen=True)
class AbelianGroupPresentation:
    """Z^free_rank + Z/d1 + ... + Z/dk with d1 | d2 | ... | dk, each >= 2."""

    free_rank: int = 0
    torsion: tuple[int, ...] = ()

    def __post_init__(self):
        if self.free_rank < 0:
            raise ValueError("negative free rank")
        t = tuple(int(d) for d in self.torsion)
        if any(d < 2 for d in t):
            raise ValueError(f"invariant factors must be >= 2, got {t}")
        if any(t[i + 1] % t[i] for i in range(len(t) - 1)):
            raise ValueError(f"invariant factors must form a divisibility chain, got {t}")
        object.__setattr__(self, "torsion", t)

    @classmethod
    def from_diagonal(cls, free_rank: int, diagonal: Iterable[int]) -> "AbelianGroupPresentation":
        """Normalise arbitrary positive diagonal entries into invariant factors."""
        return cls(free_rank, tuple(d for d in normalize_diagonal(diagonal) if d > 1))

    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    def order(self) -> int | None:
        return None if self.free_rank else math.prod(self.torsion)

    def localize_away(self, primes: Iterable[int]) -> "AbelianGroupPresentation":
        """Tensor with Z[1/p for p in primes]: strip those primes from the torsion."""
        out = []
        for d in self.torsion:
            for p in primes:
                while d % p == 0:
                    d //= p
            if d > 1:
                out.append(d)
        return AbelianGroupPresentation.from_diagonal(self.free_rank, out)

    def __add__(self, other: "AbelianGroupPresentation") -> "AbelianGroupPresentation":
        return AbelianGroupPresentation.from_diagonal(self.free_rank + other.free_rank, self.torsion + other.torsion)

    def to_json(self) -> dict:
        return {"free_rank": self.free_rank, "torsion": list(self.torsion)}

    def __str__(self) -> str:
        parts = []
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank > 1:
            parts.append(f"Z^{self.free_rank}")
        parts += [f"Z/{d}" for d in self.torsion]
        return " + ".join(parts) if parts else "0"


def normalize_diagonal(diagonal: Iterable[int]) -> list[int]:
    """Turn nonzero diagonal entries into a divisibility chain (same group).

    >>> normalize_diagonal([4, 6])
    [2, 12]
    """
    d = sorted(abs(x) for x in diagonal if x)
    ones = sum(1 for x in d if x == 1)
    d = d[ones:]
    n = len(d)
    for i in range(n):
        for j in range(i + 1, n):
            g = math.gcd(d[i], d[j])
            if g != d[i]:
                d[i], d[j] = g, d[i] * d[j] // g
    return [1] * ones + d


# ---------------------------------------------------------------------------
# dense Smith normal form with transforms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SmithDecomposition:
    """U * M * V = S with U, V unimodular and S diagonal in divisibility order."""

    U: IntMatrix
    S: IntMatrix
    V: IntMatrix
    U_inv: IntMatrix = field(repr=False, compare=False, default=None)
    V_inv: IntMatrix = field(repr=False, compare=False, default=None)

    @property
    def diagonal(self) -> list[int]:
        return [self.S[i, i] for i in range(min(self.S.shape))]

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d)

    def invariant_factors(self) -> list[int]:
        return [d for d in self.diagonal if d]


class _Dense:
    """Mutable dense working copy used by the SNF routines."""

    def __init__(self, rows: list[list[int]], ncols: int, track: bool):
        self.A = rows
        self.m = len(rows)
        self.n = ncols
        self.track = track
        if track:
            self.U = _eye(self.m)
            self.Ui = _eye(self.m)
            self.V = _eye(self.n)
            self.Vi = _eye(self.n)

    # elementary operations keep U A V invariant and the inverses in sync
    def swap_rows(self, i, k):
        if i == k:
            return
        A = self.A
        A[i], A[k] = A[k], A[i]
        if self.track:
            self.U[i], self.U[k] = self.U[k], self.U[i]
            for row in self.Ui:
                row[i], row[k] = row[k], row[i]

    def swap_cols(self, j, k):
        if j == k:
            return
        for row in self.A:
            row[j], row[k] = row[k], row[j]
        if self.track:
            for row in self.V:
                row[j], row[k] = row[k], row[j]
            self.Vi[j], self.Vi[k] = self.Vi[k], self.Vi[j]

    def add_row(self, i, k, q):
        """row_i += q * row_k"""
        if not q:
            return
        A = self.A
        ri, rk = A[i], A[k]
        for j in range(self.n):
            if rk[j]:
                ri[j] += q * rk[j]
        if self.track:
            ui, uk = self.U[i], self.U[k]
            for j in range(self.m):
                if uk[j]:
                    ui[j] += q * uk[j]
            for row in self.Ui:
                if row[i]:
                    row[k] -= q * row[i]

    def add_col(self, j, k, q):
        """col_j += q * col_k"""
        if not q:
            return
        for row in self.A:
            if row[k]:
                row[j] += q * row[k]
        if self.track:
            for row in self.V:
                if row[k]:
                    row[j] += q * row[k]
            vj, vk = self.Vi[j], self.Vi[k]
            for i in range(self.n):
                if vj[i]:
                    vk[i] -= q * vj[i]

    def negate_row(self, i):
        self.A[i] = [-x for x in self.A[i]]
        if self.track:
            self.U[i] = [-x for x in self.U[i]]
            for row in self.Ui:
                row[i] = -row[i]


def _eye(n: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def _snf_dense(rows: list[list[int]], ncols: int, track: bool = True) -> _Dense:
    W = _Dense([list(r) for r in rows], ncols, track)
    A, m, n = W.A, W.m, W.n
    t = 0
    while t < min(m, n):
        # minimal |entry| pivot, fill-in (row count * column count) as tiebreak
        best = None
        for i in range(t, m):
            row = A[i]
            for j in range(t, n):
                v = row[j]
                if v:
                    key = abs(v)
                    if best is None or key < best[0]:
                        best = (key, i, j)
                        if key == 1:
                            break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        W.swap_rows(t, i)
        W.swap_cols(t, j)
        while True:
            p = A[t][t]
            dirty = False
            for i in range(t + 1, m):
                if A[i][t]:
                    W.add_row(i, t, -(A[i][t] // p))
                    if A[i][t]:
                        dirty = True
            for j in range(t + 1, n):
                if A[t][j]:
                    W.add_col(j, t, -(A[t][j] // p))
                    if A[t][j]:
                        dirty = True
            if dirty:
                # move the smallest leftover in row/column t onto the pivot
                cands = [(abs(A[i][t]), i, t) for i in range(t + 1, m) if A[i][t]]
                cands += [(abs(A[t][j]), t, j) for j in range(t + 1, n) if A[t][j]]
                _, i, j = min(cands)
                W.swap_rows(t, i)
                W.swap_cols(t, j)
                continue
            # enforce divisibility of the remaining block by the pivot
            bad = None
            for i in range(t + 1, m):
                row = A[i]
                for j in range(t + 1, n):
                    if row[j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            W.add_row(t, bad, 1)
        if A[t][t] < 0:
            W.negate_row(t)
        t += 1
    return W


def smith_normal_form(M: IntMatrix, limits: Limits | None = None) -> SmithDecomposition:
    """Smith normal form with unimodular transforms (deterministic).

    >>> smith_normal_form(IntMatrix.from_dense([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])).diagonal
    [2, 6, 12]
    """
    limits = limits or Limits.from_env()
    if M.nrows * M.ncols > limits.max_dense_entries:
        raise ResourceLimitExceeded(f"dense SNF of {M.shape} exceeds {limits.max_dense_entries} entries")
    W = _snf_dense(M.to_dense(), M.ncols, track=True)
    return SmithDecomposition(
        U=IntMatrix.from_dense(W.U, M.nrows),
        S=IntMatrix.from_dense(W.A, M.ncols),
        V=IntMatrix.from_dense(W.V, M.ncols),
        U_inv=IntMatrix.from_dense(W.Ui, M.nrows),
        V_inv=IntMatrix.from_dense(W.Vi, M.ncols),
    )


# ---------------------------------------------------------------------------
# sparse invariant factors
# ---------------------------------------------------------------------------


def _is_unit(v: int, inverted: tuple[int, ...]) -> bool:
    v = abs(v)
    for p in inverted:
        while v % p == 0:
            v //= p
    return v == 1


def invariant_factors(
    M: IntMatrix,
    inverted: Iterable[int] = (),
    limits: Limits | None = None,
) -> tuple[int, list[int]]:
    """Rank and non-unit invariant factors of M over Z (or Z[1/p : p in inverted]).

    The answer is assembled from two localisations.  Over Z[1/2] every entry
    +-2^k is a unit pivot, which keeps sparse elimination cheap and yields the
    rank and the odd torsion.  The 2-primary torsion comes from elimination
    over Z/2^E, where coefficients stay bounded; the known rank certifies that
    E was large enough.
    """
    inverted = tuple(sorted(set(inverted)))
    limits = limits or Limits.from_env()
    if max(M.nrows, M.ncols) > limits.max_slice_dim:
        raise ResourceLimitExceeded(f"matrix {M.shape} exceeds max_slice_dim={limits.max_slice_dim}")
    away = tuple(sorted(set(inverted) | {2}))
    rank, odd = _factors_away(M, away, limits)
    if 2 in inverted:
        return rank, odd
    vals = local_valuations(M, 2, rank)
    return rank, [x for x in normalize_diagonal(odd + [2**v for v in vals if v]) if x > 1]


def local_valuations(M: IntMatrix, p: int, rank: int, E: int = 64) -> list[int]:
    """p-adic valuations of the nonzero invariant factors of M, given its rank.

    Eliminates over Z/p^E; if fewer than ``rank`` pivots survive, E was too
    small and the computation is repeated with a larger exponent.
    """
    while True:
        vals = _local_pivots(M, p, E)
        if len(vals) == rank:
            return sorted(vals)
        if len(vals) > rank:
            raise AssertionError("more local pivots than the rational rank")
        E *= 2


def _local_pivots(M: IntMatrix, p: int, E: int) -> list[int]:
    q = p**E
    rows: dict[int, dict[int, int]] = {}
    cols: dict[int, set[int]] = {}
    for (i, j), v in M.items():
        v %= q
        if v:
            rows.setdefault(i, {})[j] = v
            cols.setdefault(j, set()).add(i)
    vals: list[int] = []
    k = 0
    pk = 1
    while rows and k < E:
        progressed = True
        while progressed and rows:
            progressed = False
            for r in sorted(rows, key=lambda x: len(rows[x])):
                row = rows.get(r)
                if not row:
                    continue
                best = None
                for j, v in row.items():
                    if (v // pk) % p:
                        cost = len(cols[j])
                        if best is None or cost < best[0]:
                            best = (cost, j)
                            if cost == 1:
                                break
                if best is None:
                    continue
                c = best[1]
                inv = pow(row[c] // pk, -1, q)
                prow = row
                for r2 in list(cols[c]):
                    if r2 == r:
                        continue
                    row2 = rows[r2]
                    f = ((row2[c] // pk) * inv) % q
                    for j, v in prow.items():
                        nv = (row2.get(j, 0) - f * v) % q
                        if nv:
                            if j not in row2:
                                cols.setdefault(j, set()).add(r2)
                            row2[j] = nv
                        elif j in row2:
                            del row2[j]
                            cols[j].discard(r2)
                    if not row2:
                        del rows[r2]
                _remove_pivot(rows, cols, r, c)
                vals.append(k)
                progressed = True
        k += 1
        pk *= p
    return vals


def _factors_away(M: IntMatrix, inverted: tuple[int, ...], limits: Limits) -> tuple[int, list[int]]:
    """Rank and invariant factors over Z[1/p : p in inverted] by content rounds."""
    rows: dict[int, dict[int, int]] = {}
    cols: dict[int, set[int]] = {}
    for (i, j), v in M.items():
        rows.setdefault(i, {})[j] = v
        cols.setdefault(j, set()).add(i)
    if inverted:
        for row in rows.values():
            _strip(row, inverted)

    diag: list[int] = []
    d = 1
    while rows:
        count = _eliminate_content(rows, cols, inverted, d)
        diag.extend([d] * count)
        if not rows:
            break
        g = 0
        for row in rows.values():
            for v in row.values():
                g = math.gcd(g, v)
                if g == d:
                    break
            if g == d:
                break
        g = _strip_int(g, inverted)
        if g != d:
            d = g
            continue
        ncols = len(cols)
        nnz = sum(len(row) for row in rows.values())
        if len(rows) * ncols <= limits.max_dense_entries and nnz * 20 >= len(rows) * ncols:
            diag.extend(_dense_diagonal(rows, cols))
            break
        for _ in range(max(1, len(rows) // 16)):
            if not rows:
                break
            diag.append(_general_pivot(rows, cols))
    factors = [x for x in (_strip_int(x, inverted) for x in normalize_diagonal(diag)) if x > 1]
    return len(diag), [x for x in normalize_diagonal(factors) if x > 1]


def _strip_int(v: int, inverted: tuple[int, ...]) -> int:
    v = abs(v)
    for p in inverted:
        while v and v % p == 0:
            v //= p
    return v


def _pivot_reduce(rows, cols, r, c):
    """Clear column c outside row r using row r; pivot value must divide the entries."""
    prow = rows[r]
    p = prow[c]
    for r2 in list(cols[c]):
        if r2 == r:
            continue
        row2 = rows[r2]
        q, rem = divmod(row2[c], p)
        if rem:
            raise AssertionError("pivot does not divide column entry")
        for j, v in prow.items():
            nv = row2.get(j, 0) - q * v
            if nv:
                if j not in row2:
                    cols.setdefault(j, set()).add(r2)
                row2[j] = nv
            elif j in row2:
                del row2[j]
                cols[j].discard(r2)
        if not row2:
            del rows[r2]


def _remove_pivot(rows, cols, r, c):
    for j in rows[r]:
        s = cols.get(j)
        if s is not None:
            s.discard(r)
            if not s:
                del cols[j]
    del rows[r]
    cols.pop(c, None)


def _strip(row: dict[int, int], inverted: tuple[int, ...]) -> None:
    """Divide a row by its content in the inverted primes (a unit operation)."""
    for p in inverted:
        while row and all(v % p == 0 for v in row.values()):
            for j in row:
                row[j] //= p


def _eliminate_content(rows, cols, inverted, d) -> int:
    """Eliminate pivots of value d*unit while all entries are multiples of d."""
    count = 0
    changed = True
    while changed and rows:
        changed = False
        for r in sorted(rows, key=lambda k: len(rows[k])):
            row = rows.get(r)
            if not row:
                continue
            best = None
            for j, v in row.items():
                if v == d or v == -d or (inverted and v % d == 0 and _is_unit(v // d, inverted)):
                    cost = len(cols[j])
                    if best is None or cost < best[0]:
                        best = (cost, j)
                        if cost == 1:
                            break
            if best is None:
                continue
            c = best[1]
            p = row[c]
            touched = [r2 for r2 in cols[c] if r2 != r]
            if p != d and p != -d:
                # p = d * (unit of Z[1/S]): rescale other rows by units so p divides them
                for r2 in touched:
                    a = rows[r2][c]
                    if a % p:
                        g = abs(p) // math.gcd(abs(p), abs(a))
                        row2 = rows[r2]
                        for j in row2:
                            row2[j] *= g
            _pivot_reduce(rows, cols, r, c)
            if inverted:
                for r2 in touched:
                    if r2 in rows:
                        _strip(rows[r2], inverted)
            _remove_pivot(rows, cols, r, c)
            count += 1
            changed = True
    return count


_INT64_SAFE = 1 << 40


def _dense_diagonal(rows, cols) -> list[int]:
    """Diagonalise the remaining block densely with numpy; consumes rows/cols."""
    rlist = list(rows)
    cidx = {c: k for k, c in enumerate(cols)}
    big = max(abs(v) for row in rows.values() for v in row.values())
    A = np.zeros((len(rlist), len(cidx)), dtype=np.int64 if big < _INT64_SAFE else object)
    for i, r in enumerate(rlist):
        for c, v in rows[r].items():
            A[i, cidx[c]] = v
    rows.clear()
    cols.clear()
    diag = []
    while A.shape[0] and A.shape[1]:
        nz = np.nonzero(A)
        if len(nz[0]) == 0:
            break
        vals = np.abs(A[nz])
        k = int(np.argmin(vals))
        i, j = int(nz[0][k]), int(nz[1][k])
        while True:
            p = A[i, j]
            q = A[:, j] // p
            q[i] = 0
            if q.any():
                A = A - np.outer(q, A[i])
                A = _widen(A)
            col = A[:, j].copy()
            col[i] = 0
            if col.any():
                idx = np.nonzero(col)[0]
                i = int(idx[np.argmin(np.abs(col[idx]))])
                continue
            row = A[i] - (A[i] // p) * p
            row[j] = p
            A[i] = row
            rest = row.copy()
            rest[j] = 0
            if rest.any():
                idx = np.nonzero(rest)[0]
                j = int(idx[np.argmin(np.abs(rest[idx]))])
                continue
            break
        diag.append(abs(int(A[i, j])))
        A = np.delete(np.delete(A, i, axis=0), j, axis=1)
    return diag


def _widen(A: np.ndarray) -> np.ndarray:
    if A.dtype != object and A.size and int(np.abs(A).max()) >= _INT64_SAFE:
        return A.astype(object)
    return A


def _general_pivot(rows, cols) -> int:
    """One gcd-driven pivot; returns the absolute diagonal value it splits off."""
    # start from the shortest row and its smallest entry; the diagonal is
    # normalised afterwards, so the pivot need not be globally minimal
    r = min(rows, key=lambda k: len(rows[k]))
    row = rows[r]
    c = min(row, key=lambda j: (abs(row[j]), len(cols[j])))
    while True:
        p = rows[r][c]
        leftovers = False
        emptied = []
        for r2 in list(cols[c]):
            if r2 == r:
                continue
            row2 = rows[r2]
            q = row2[c] // p
            if q:
                for j, v in rows[r].items():
                    nv = row2.get(j, 0) - q * v
                    if nv:
                        if j not in row2:
                            cols.setdefault(j, set()).add(r2)
                        row2[j] = nv
                    elif j in row2:
                        del row2[j]
                        cols[j].discard(r2)
            if c in row2:
                leftovers = True
            elif not row2:
                emptied.append(r2)
        for r2 in emptied:
            del rows[r2]
        if leftovers:
            r = min(cols[c], key=lambda k: abs(rows[k][c]))
            continue
        # column c now only meets row r; column operations touch row r only
        row = rows[r]
        p = row[c]
        for j in list(row):
            if j == c:
                continue
            rem = row[j] - (row[j] // p) * p
            if rem:
                row[j] = rem
            else:
                del row[j]
                cols[j].discard(r)
                if not cols[j]:
                    del cols[j]
        others = [j for j in row if j != c]
        if others:
            c = min(others, key=lambda j: abs(row[j]))
            continue
        break
    value = abs(rows[r][c])
    _remove_pivot(rows, cols, r, c)
    return value


def rank(M: IntMatrix, limits: Limits | None = None) -> int:
    return invariant_factors(M, limits=limits)[0]


# ---------------------------------------------------------------------------
# cohomology of a three-term complex
# ---------------------------------------------------------------------------


def check_composition(d_in: IntMatrix, d_out: IntMatrix) -> None:
    if d_out.ncols != d_in.nrows:
        raise ValueError(f"d_out {d_out.shape} cannot follow d_in {d_in.shape}")
    prod = d_out @ d_in
    if not prod.is_zero():
        raise CompositionNotZero(f"d_out * d_in has {prod.nnz()} nonzero entries")


def cohomology_at(
    d_in: IntMatrix,
    d_out: IntMatrix,
    inverted: Iterable[int] = (),
    check: bool = True,
    limits: Limits | None = None,
    out_rank: int | None = None,
    in_factors: tuple[int, list[int]] | None = None,
) -> AbelianGroupPresentation:
    """ker(d_out) / im(d_in) for d_in: C^{s-1} -> C^s and d_out: C^s -> C^{s+1}.

    >>> print(cohomology_at(IntMatrix.from_dense([[2], [0]]), IntMatrix.from_dense([[0, 1]])))
    Z/2

    ``out_rank`` and ``in_factors`` let callers reuse factorisations they
    already hold (each differential borders two cohomology groups).
    """
    if check:
        check_composition(d_in, d_out)
    rank_out = out_rank if out_rank is not None else invariant_factors(d_out, inverted, limits)[0]
    rank_in, factors = in_factors if in_factors is not None else invariant_factors(d_in, inverted, limits)
    return AbelianGroupPresentation.from_diagonal(d_in.nrows - rank_out - rank_in, factors)


# ---------------------------------------------------------------------------
# ranks modulo a prime
# ---------------------------------------------------------------------------


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    k = 3
    while k * k <= p:
        if p % k == 0:
            return False
        k += 2
    return True


def rank_mod_p(M: IntMatrix, p: int) -> int:
    if not is_prime(p):
        raise NotPrime(p)
    if p == 2:
        masks: dict[int, int] = {}
        for (i, j), v in M.items():
            if v & 1:
                masks[j] = masks.get(j, 0) | (1 << i)
        return f2_rank(masks.values())
    rows: dict[int, dict[int, int]] = {}
    for (i, j), v in M.items():
        if v % p:
            rows.setdefault(i, {})[j] = v % p
    pivots: dict[int, dict[int, int]] = {}
    for row in rows.values():
        row = dict(row)
        while row:
            lead = min(row)
            if lead not in pivots:
                inv = pow(row[lead], -1, p)
                pivots[lead] = {j: (v * inv) % p for j, v in row.items()}
                break
            f = row[lead]
            for j, v in pivots[lead].items():
                nv = (row.get(j, 0) - f * v) % p
                if nv:
                    row[j] = nv
                else:
                    row.pop(j, None)
    return len(pivots)


# ---------------------------------------------------------------------------
# F_2 vector spaces as Python integers (bit i = coordinate i)
# ---------------------------------------------------------------------------


class F2Basis:
    """Incrementally maintained echelon basis of a subspace of F_2^N."""

    __slots__ = ("pivots",)

    def __init__(self, vectors: Iterable[int] = ()):
        self.pivots: dict[int, int] = {}
        for v in vectors:
            self.add(v)

    def reduce(self, v: int) -> int:
        piv = self.pivots
        while v:
            top = v.bit_length() - 1
            b = piv.get(top)
            if b is None:
                return v
            v ^= b
        return 0

    def reduce_fully(self, v: int) -> int:
        """Clear every pivot bit (not only the leading one)."""
        for top in sorted(self.pivots, reverse=True):
            if (v >> top) & 1:
                v ^= self.pivots[top]
        return v

    def add(self, v: int) -> bool:
        v = self.reduce(v)
        if v:
            self.pivots[v.bit_length() - 1] = v
            return True
        return False

    def __contains__(self, v: int) -> bool:
        return self.reduce(v) == 0

    def __len__(self) -> int:
        return len(self.pivots)

    def vectors(self) -> list[int]:
        return [self.pivots[k] for k in sorted(self.pivots)]


def f2_rank(vectors: Iterable[int]) -> int:
    return len(F2Basis(vectors))


# ---------------------------------------------------------------------------
# lattice helpers (small dense problems)
# ---------------------------------------------------------------------------


def _columns_to_rows(cols: Sequence[Sequence[int]], nrows: int) -> list[list[int]]:
    return [[c[i] for c in cols] for i in range(nrows)]


def kernel_basis(M: IntMatrix) -> list[list[int]]:
    """Z-basis of {x : M x = 0} (a saturated sublattice), as column lists."""
    W = _snf_dense(M.to_dense(), M.ncols, track=True)
    r = sum(1 for t in range(min(W.m, W.n)) if W.A[t][t])
    return [[W.V[i][j] for i in range(M.ncols)] for j in range(r, M.ncols)]


def lattice_basis(gens: Sequence[Sequence[int]], dim: int) -> list[list[int]]:
    """Z-basis of the sublattice of Z^dim spanned by ``gens``."""
    if not gens:
        return []
    W = _snf_dense(_columns_to_rows(gens, dim), len(gens), track=True)
    basis = []
    for t in range(min(W.m, W.n)):
        s = W.A[t][t]
        if s:
            basis.append([W.Ui[i][t] * s for i in range(dim)])
    return basis


class LatticeCoordinates:
    """Solve B c = g for a full-column-rank integer matrix B."""

    def __init__(self, basis: Sequence[Sequence[int]], dim: int):
        self.dim = dim
        self.k = len(basis)
        self._W = _snf_dense(_columns_to_rows(basis, dim), self.k, track=True) if basis else None

    def solve(self, g: Sequence[int]) -> list[int] | None:
        if self.k == 0:
            return [] if not any(g) else None
        W = self._W
        Ug = [sum(W.U[i][j] * g[j] for j in range(self.dim) if g[j]) for i in range(self.dim)]
        y = []
        for i in range(self.dim):
            s = W.A[i][i] if i < self.k else 0
            if s:
                if Ug[i] % s:
                    return None
                y.append(Ug[i] // s)
            elif Ug[i]:
                return None
        return [sum(W.V[i][j] * y[j] for j in range(self.k)) for i in range(self.k)]


def subquotient(
    ambient_dim: int,
    numerator: Sequence[Sequence[int]],
    denominator: Sequence[Sequence[int]],
) -> tuple[AbelianGroupPresentation, list[list[int]], SmithDecomposition | None]:
    """Structure of span(numerator) / span(denominator) inside Z^ambient_dim.

    The denominator must lie in the numerator lattice.  Returns the group,
    a Z-basis of the numerator lattice, and the SNF of the denominator written
    in that basis (rows of U give coordinates of classes).
    """
    basis = lattice_basis(numerator, ambient_dim)
    coords = LatticeCoordinates(basis, ambient_dim)
    rel_cols = []
    for g in denominator:
        c = coords.solve(g)
        if c is None:
            raise ValueError("denominator is not contained in the numerator lattice")
        rel_cols.append(c)
    k = len(basis)
    if not rel_cols or k == 0:
        return AbelianGroupPresentation(k), basis, None
    R = IntMatrix.from_dense(_columns_to_rows(rel_cols, k), len(rel_cols))
    snf = smith_normal_form(R)
    diag = snf.invariant_factors()
    return AbelianGroupPresentation.from_diagonal(k - len(diag), diag), basis, snf


# ---------------------------------------------------------------------------
# Smith form over Z/p^e (numpy, for the filtration spectral sequence)
# ---------------------------------------------------------------------------


def local_smith(A: np.ndarray, p: int, e: int) -> tuple[list[int], np.ndarray]:
    """Diagonalise A over Z/p^e using row ops (untracked) and column ops (tracked).

    Returns the pivot valuations (in pivot order) and the column transform V,
    invertible over Z/p^e, such that column t of A V is p^{v_t} times a unit
    multiple of a standard vector for t < len(valuations) and zero afterwards.
    """
    q = p**e
    if q >= 2**31:
        raise ValueError("p^e must stay below 2^31 for int64 products")
    A = np.array(A, dtype=np.int64) % q
    m, n = A.shape
    V = np.eye(n, dtype=np.int64)
    vals: list[int] = []
    for t in range(min(m, n)):
        sub = A[t:, t:]
        if not sub.any():
            break
        v = 0
        while True:
            hit = sub % p ** (v + 1) != 0
            if hit.any():
                break
            v += 1
        i, j = np.unravel_index(np.argmax(hit), hit.shape)
        i += t
        j += t
        if i != t:
            A[[t, i]] = A[[i, t]]
        if j != t:
            A[:, [t, j]] = A[:, [j, t]]
            V[:, [t, j]] = V[:, [j, t]]
        unit = int(A[t, t]) // p**v
        A[t] = (A[t] * pow(unit, -1, q)) % q
        pv = p**v
        f = A[t + 1 :, t] // pv
        if f.any():
            A[t + 1 :] = (A[t + 1 :] - np.outer(f, A[t])) % q
        g = A[t, t + 1 :] // pv
        if g.any():
            V[:, t + 1 :] = (V[:, t + 1 :] - np.outer(V[:, t], g)) % q
            A[t, t + 1 :] = 0
        vals.append(v)
    return vals, V
