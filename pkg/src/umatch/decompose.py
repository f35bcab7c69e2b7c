"""Proper U-match decomposition of a matrix oracle.

Both entry points perform the same bottom-to-top row reduction and produce
the same (unique) matching array.  :func:`decompose_full` stores the whole
row and column operation matrices; :func:`decompose_compressed` stores only
the pivot-row block of the row operation matrix and recomputes modified rows
on demand, which is what makes large decompositions affordable.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, Optional

from .coeff import Field
from .errors import InternalInconsistencyError, UsageError
from .matrix import MatrixOracle, SparseVector, StoredCsMatrix


@dataclass
class OpCounter:
    """Coarse operation counts, for benchmarking and regression tests."""

    eliminations: int = 0
    heap_pops: int = 0
    rows_processed: int = 0
    rows_cleared: int = 0
    pareto_hits: int = 0
    solves: int = 0
    axpy_entries: int = 0


@dataclass(frozen=True)
class DecomposeOptions:
    clearing: bool = True
    pareto: bool = True
    counters: bool = False
    clear_rows: Optional[frozenset[int]] = None


class MatchingArray:
    """The unique generalized matching matrix of a U-match decomposition.

    Holds the support with coefficients, the bijection between matched rows
    and columns, and the sorted pivot / non-pivot index sequences.
    """

    def __init__(self, nrows: int, ncols: int, pairs: Iterable[tuple[int, int, int]]):
        self.nrows = nrows
        self.ncols = ncols
        pairs = tuple(sorted(pairs))
        self.pairs = pairs
        self.col_of_row: dict[int, int] = {}
        self.row_of_col: dict[int, int] = {}
        self._coeff: dict[int, int] = {}
        for r, c, v in pairs:
            if r in self.col_of_row or c in self.row_of_col:
                raise UsageError("matching has more than one entry in a row or column")
            if v == 0:
                raise UsageError("matching coefficients must be nonzero")
            self.col_of_row[r] = c
            self.row_of_col[c] = r
            self._coeff[r] = v
        self.rho = tuple(sorted(self.col_of_row))
        self.kappa = tuple(sorted(self.row_of_col))
        rho_set = set(self.rho)
        kappa_set = set(self.kappa)
        self.rho_bar = tuple(i for i in range(nrows) if i not in rho_set)
        self.kappa_bar = tuple(j for j in range(ncols) if j not in kappa_set)
        self.kappa_star = tuple(self.row_of_col[c] for c in self.kappa)
        self.rho_pos = {r: q for q, r in enumerate(self.rho)}
        self.kappa_pos = {c: p for p, c in enumerate(self.kappa)}

    @property
    def rank(self) -> int:
        return len(self.pairs)

    def coeff(self, r: int, c: Optional[int] = None) -> int:
        """M[r, c]; with c omitted, the coefficient of row r's pivot."""
        if r not in self.col_of_row:
            return 0
        if c is not None and self.col_of_row[r] != c:
            return 0
        return self._coeff[r]

    def support(self) -> frozenset[tuple[int, int]]:
        return frozenset((r, c) for r, c, _ in self.pairs)

    def row(self, c: int) -> Optional[int]:
        return self.row_of_col.get(c)

    def col(self, r: int) -> Optional[int]:
        return self.col_of_row.get(r)

    def to_oracle(self, field: Field) -> StoredCsMatrix:
        rows = {r: {c: v} for r, c, v in self.pairs}
        return StoredCsMatrix.from_row_dicts(field, self.nrows, self.ncols, rows)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MatchingArray)
            and other.nrows == self.nrows
            and other.ncols == self.ncols
            and other.pairs == self.pairs
        )

    def __hash__(self) -> int:
        return hash((self.nrows, self.ncols, self.pairs))

    def __repr__(self) -> str:
        return f"MatchingArray({self.nrows}x{self.ncols}, rank {self.rank})"


@dataclass
class FullUmatch:
    """Uncompressed proper decomposition: both operation matrices stored."""

    d: MatrixOracle
    rinv: StoredCsMatrix
    cinv: StoredCsMatrix
    matching: MatchingArray

    @property
    def field(self) -> Field:
        return self.d.field


class CompressedUmatch:
    """Compressed decomposition: the matching array plus the pivot block
    (R_rho_rho)^(-1); every other factor is reconstructed lazily."""

    def __init__(self, d: MatrixOracle, matching: MatchingArray,
                 rbar: StoredCsMatrix, stats: Optional[OpCounter] = None):
        self.d = d
        self.matching = matching
        self.rbar = rbar
        self.stats = stats
        m = matching
        self.rho = m.rho
        self.kappa = m.kappa
        self.rho_bar = m.rho_bar
        self.kappa_bar = m.kappa_bar
        self.rho_pos = m.rho_pos
        self.kappa_pos = m.kappa_pos
        # pi[p] = pivot-row position paired with pivot-column position p
        self.pi = tuple(m.rho_pos[m.row_of_col[c]] for c in m.kappa)
        # m_diag[p] = M[row(kappa_p), kappa_p]
        self.m_diag = tuple(m.coeff(m.row_of_col[c]) for c in m.kappa)

    @property
    def field(self) -> Field:
        return self.d.field

    @property
    def rank(self) -> int:
        return self.matching.rank

    def d_row_kappa(self, i: int) -> SparseVector:
        """Row i of D restricted to pivot columns, in pivot-column positions."""
        pos = self.kappa_pos
        ent = [(pos[j], v) for j, v in self.d.row(i).entries if j in pos]
        return SparseVector(self.field, tuple(ent), _checked=True)

    def d_col_rho(self, j: int) -> SparseVector:
        """Column j of D restricted to pivot rows, in pivot-row positions."""
        pos = self.rho_pos
        ent = [(pos[i], v) for i, v in self.d.col(j).entries if i in pos]
        return SparseVector(self.field, tuple(ent), _checked=True)


class _LazyHeapRow:
    """Min-index merge of scaled sparse-row iterators with cancellation.

    Sources are pushed as (iterator, scale); popping returns the leading
    surviving (index, coeff) after all contributions at equal indices are
    combined and zeros are discarded.
    """

    __slots__ = ("field", "_heap", "_count", "counter")

    def __init__(self, field: Field, counter: Optional[OpCounter] = None):
        self.field = field
        self._heap: list[tuple[int, int, int, Optional[Iterable]]] = []
        self._count = 0
        self.counter = counter

    def push_value(self, index: int, value: int) -> None:
        if value:
            self._count += 1
            heapq.heappush(self._heap, (index, self._count, value, None))

    def push_iter(self, entries: Iterable[tuple[int, int]], alpha: int) -> None:
        if alpha == 0:
            return
        it = iter(entries)
        for i, v in it:
            self._advance(it, i, v if alpha == 1 else self.field.mul(alpha, v), alpha)
            return

    def _advance(self, it, index: int, value: int, alpha: int) -> None:
        self._count += 1
        heapq.heappush(self._heap, (index, self._count, value, (it, alpha)))

    def pop_leading(self) -> Optional[tuple[int, int]]:
        f = self.field
        heap = self._heap
        while heap:
            index, _, value, tail = heapq.heappop(heap)
            if tail is not None:
                it, alpha = tail
                for i, v in it:
                    self._advance(it, i, f.mul(alpha, v) if alpha != 1 else v, alpha)
                    break
            acc = value
            while heap and heap[0][0] == index:
                _, _, v2, t2 = heapq.heappop(heap)
                acc = f.add(acc, v2)
                if t2 is not None:
                    it, alpha = t2
                    for i, v in it:
                        self._advance(it, i, f.mul(alpha, v) if alpha != 1 else v, alpha)
                        break
            if self.counter is not None:
                self.counter.heap_pops += 1
            if acc:
                return (index, acc)
        return None


def decompose_full(d: MatrixOracle) -> FullUmatch:
    """Bottom-to-top row reduction storing every factor (uncompressed form).

    Modified rows are kept in memory; the normalized nonzero rows of the
    reduced matrix become the pivot rows of the inverse domain matrix.
    """
    f = d.field
    m, n = d.nrows, d.ncols
    reduced: dict[int, dict[int, int]] = {}
    rinv_rows: dict[int, dict[int, int]] = {}
    lead_of: dict[int, int] = {}  # leading column -> pivot row below
    pairs: list[tuple[int, int, int]] = []

    for i in range(m - 1, -1, -1):
        work = {j: v for j, v in d.row(i).entries}
        ops = {i: 1}
        while work:
            k = min(work)
            j = lead_of.get(k)
            if j is None:
                break
            lam = f.div(work[k], reduced[j][k])
            for jj, v in reduced[j].items():
                nv = f.sub(work.get(jj, 0), f.mul(lam, v))
                if nv:
                    work[jj] = nv
                elif jj in work:
                    del work[jj]
            for jj, v in rinv_rows[j].items():
                nv = f.sub(ops.get(jj, 0), f.mul(lam, v))
                if nv:
                    ops[jj] = nv
                elif jj in ops:
                    del ops[jj]
        rinv_rows[i] = ops
        if work:
            k = min(work)
            reduced[i] = work
            lead_of[k] = i
            pairs.append((i, k, work[k]))

    matching = MatchingArray(m, n, pairs)
    cinv_rows: dict[int, dict[int, int]] = {}
    for r, c, v in pairs:
        s = f.inv(v)
        cinv_rows[c] = {j: f.mul(s, w) for j, w in reduced[r].items()}
    for c in matching.kappa_bar:
        cinv_rows[c] = {c: 1}
    rinv = StoredCsMatrix.from_row_dicts(f, m, m, rinv_rows)
    cinv = StoredCsMatrix.from_row_dicts(f, n, n, cinv_rows)
    return FullUmatch(d, rinv, cinv, matching)


def decompose_compressed(d: MatrixOracle, opts: DecomposeOptions = DecomposeOptions()) -> CompressedUmatch:
    """Bottom-to-top row reduction storing only the matching array and the
    pivot-row block of the row operation matrix.

    Modified rows are never stored: whenever a pivot row is needed for an
    elimination, it is recomputed as the product of the corresponding stored
    pivot-block row with the rows of d, streamed through a lazy merge heap.
    """
    f = d.field
    m, n = d.nrows, d.ncols
    counter = OpCounter() if opts.counters else None
    clear_rows = opts.clear_rows if (opts.clearing and opts.clear_rows) else frozenset()

    rbar_rows: dict[int, dict[int, int]] = {}  # pivot row -> its (R_rr)^-1 row, by absolute index
    row_of_lead: dict[int, int] = {}  # matched column -> pivot row
    coeff_of_lead: dict[int, int] = {}  # matched column -> matching coefficient
    pairs: list[tuple[int, int, int]] = []

    for i in range(m - 1, -1, -1):
        if i in clear_rows:
            if counter is not None:
                counter.rows_cleared += 1
            continue
        if counter is not None:
            counter.rows_processed += 1

        if opts.pareto:
            hit = d.pareto_leading(i)
            if hit is not None:
                k, a = hit
                if k in row_of_lead:
                    raise InternalInconsistencyError(
                        "pareto-leading column is already matched"
                    )
                rbar_rows[i] = {i: 1}
                row_of_lead[k] = i
                coeff_of_lead[k] = a
                pairs.append((i, k, a))
                if counter is not None:
                    counter.pareto_hits += 1
                continue

        work = _LazyHeapRow(f, counter)
        work.push_iter(d.row(i).entries, 1)
        vec: dict[int, int] = {}
        while True:
            lead = work.pop_leading()
            if lead is None:
                break
            k, a = lead
            j = row_of_lead.get(k)
            if j is None:
                # new pivot
                rbar_rows[i] = {i: 1, **vec}
                row_of_lead[k] = i
                coeff_of_lead[k] = a
                pairs.append((i, k, a))
                break
            lam = f.div(a, coeff_of_lead[k])
            neg_lam = f.neg(lam)
            # the reduced pivot row j is row_j(rbar) * D restricted to pivots
            work.push_value(k, a)
            for jj, w in rbar_rows[j].items():
                work.push_iter(d.row(jj).entries, f.mul(neg_lam, w))
            for jj, w in rbar_rows[j].items():
                nv = f.sub(vec.get(jj, 0), f.mul(lam, w))
                if nv:
                    vec[jj] = nv
                elif jj in vec:
                    del vec[jj]
            if counter is not None:
                counter.eliminations += 1

    matching = MatchingArray(m, n, pairs)
    k = matching.rank
    pos = matching.rho_pos
    rbar = StoredCsMatrix.from_row_dicts(
        f, k, k,
        {pos[r]: {pos[j]: v for j, v in row.items()} for r, row in rbar_rows.items()},
        columns=True,
    )
    return CompressedUmatch(d, matching, rbar, stats=counter)


def matching_rank_oracle(d: MatrixOracle) -> frozenset[tuple[int, int]]:
    """Support of the matching array from dense lower-left corner ranks.

    (i, j) is in the support iff the rank of the lower-left submatrix rooted
    at (i, j) exceeds each of its one-step shrinkings by exactly one.  Test
    support only: cost grows quadratically in the dense rank computation.
    """
    f = d.field
    m, n = d.nrows, d.ncols
    dense = d.to_dense()

    # ranks[i][j] = rank of rows i..m-1, cols 0..j-1
    ranks = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m + 1):
        sub = dense[i:]
        ranks[i] = _rank_profile(f, sub, n)
    out = set()
    for i in range(m):
        for j in range(1, n + 1):
            delta = ranks[i][j] - ranks[i + 1][j] - ranks[i][j - 1] + ranks[i + 1][j - 1]
            if delta == 1:
                out.add((i, j - 1))
    return frozenset(out)


def _rank_profile(f: Field, rows: list[list[int]], n: int) -> list[int]:
    """ranks[j] = rank of the given rows restricted to columns 0..j-1."""
    work = [list(r) for r in rows]
    profile = [0] * (n + 1)
    rank = 0
    nr = len(work)
    for j in range(n):
        piv = None
        for i in range(rank, nr):
            if work[i][j]:
                piv = i
                break
        if piv is not None:
            work[rank], work[piv] = work[piv], work[rank]
            inv = f.inv(work[rank][j])
            prow = work[rank]
            for i in range(rank + 1, nr):
                if work[i][j]:
                    lam = f.mul(work[i][j], inv)
                    row = work[i]
                    for jj in range(j, n):
                        row[jj] = f.sub(row[jj], f.mul(lam, prow[jj]))
            rank += 1
        profile[j + 1] = rank
    return profile


def clearing_filter(prior: MatchingArray) -> frozenset[int]:
    """Rows to skip when decomposing the next boundary block.

    A cell matched as a column of the previous block can never index a pivot
    row of the next one, because definition and value sets of the matching
    of a 2-nilpotent graded matrix are disjoint.
    """
    return frozenset(prior.kappa)


def pareto_pairs(d: MatrixOracle) -> frozenset[tuple[int, int]]:
    """All (i, j) where D[i, j] is the leading entry of row i and the lowest
    entry of column j; every such pair lies in the matching support."""
    out = set()
    for i in range(d.nrows):
        lead = d.row(i).leading()
        if lead is None:
            continue
        j, _ = lead
        trail = d.col(j).trailing()
        if trail is not None and trail[0] == i:
            out.add((i, j))
    return frozenset(out)
