"""Lazy reconstruction of rows and columns of R, R^-1, C, C^-1.

A compressed decomposition stores only D, the matching array, and the pivot
block (R_rho_rho)^(-1).  Everything else is rebuilt on demand from the block
identities, using at most one sparse triangular solve per request.  The
workhorse is the pivot-block product A = (R_rho_rho)^(-1) * D_rho_kappa,
which is upper triangular once its rows are listed in the order of their
matched columns; A is never materialized, its rows and columns are generated
by composing stored pivot-block vectors with rows and columns of D.
"""

from __future__ import annotations

from dataclasses import dataclass

from .decompose import CompressedUmatch, OpCounter
from .errors import InternalInconsistencyError, UsageError
from .matrix import MatrixOracle, SparseVector, scale

_TARGET_KINDS = ("R", "Rinv", "C", "Cinv")
_AXES = ("row", "col")


@dataclass(frozen=True)
class RetrievalTarget:
    which: str
    axis: str
    index: int

    def __post_init__(self):
        if self.which not in _TARGET_KINDS:
            raise UsageError(f"unknown factor {self.which!r}; expected one of {_TARGET_KINDS}")
        if self.axis not in _AXES:
            raise UsageError(f"unknown axis {self.axis!r}; expected 'row' or 'col'")


class PivotBlockProduct(MatrixOracle):
    """Lazy view of A = (R_rho_rho)^(-1) * D_rho_kappa, addressed by pivot
    position.  Row q and column p are generated on demand; permuting rows by
    the matched-column order makes the matrix upper triangular."""

    def __init__(self, u: CompressedUmatch, counter: OpCounter | None = None):
        self.u = u
        self.field = u.field
        k = u.rank
        self.nrows = k
        self.ncols = k
        self.counter = counter

    def row(self, q: int) -> SparseVector:
        self._check_row(q)
        u = self.u
        f = self.field
        acc: dict[int, int] = {}
        ops = 0
        kpos = u.kappa_pos
        for jq, w in u.rbar.row(q).entries:
            for j, v in u.d.row(u.rho[jq]).entries:
                ops += 1
                p = kpos.get(j)
                if p is not None:
                    acc[p] = f.add(acc.get(p, 0), f.mul(w, v))
        if self.counter is not None:
            self.counter.axpy_entries += ops
        return SparseVector.from_dict(f, acc)

    def col(self, p: int) -> SparseVector:
        self._check_col(p)
        u = self.u
        f = self.field
        acc: dict[int, int] = {}
        ops = 0
        for iq, v in u.d_col_rho(u.kappa[p]).entries:
            for q, w in u.rbar.col(iq).entries:
                ops += 1
                acc[q] = f.add(acc.get(q, 0), f.mul(w, v))
        if self.counter is not None:
            self.counter.axpy_entries += ops
        return SparseVector.from_dict(f, acc)


def triangular_solve(t: MatrixOracle, b: SparseVector, side: str = "left",
                     row_perm=None, counter: OpCounter | None = None) -> SparseVector:
    """Solve t @ x = b (left) or y @ t = b (right) by back-substitution.

    t must be invertible and upper triangular after permuting rows by
    row_perm (row_perm[p] holds column p's pivot; identity when None).
    A missing pivot raises InternalInconsistencyError.
    """
    f = t.field
    if b.field != f:
        raise UsageError("right-hand side lies in a different field")
    if t.nrows != t.ncols:
        raise UsageError("triangular solve requires a square matrix")
    k = t.ncols
    if row_perm is None:
        row_perm = range(k)
    if counter is not None:
        counter.solves += 1
    touched = 0
    resid = b.to_dict()
    out: dict[int, int] = {}
    if side == "left":
        for p in range(k - 1, -1, -1):
            pr = row_perm[p]
            rv = resid.get(pr)
            if not rv:
                continue
            column = t.col(p)
            diag = column.get(pr)
            if not diag:
                raise InternalInconsistencyError(f"zero pivot in column {p}")
            xv = f.div(rv, diag)
            out[p] = xv
            touched += len(column.entries)
            for i, v in column.entries:
                nv = f.sub(resid.get(i, 0), f.mul(xv, v))
                if nv:
                    resid[i] = nv
                elif i in resid:
                    del resid[i]
    elif side == "right":
        for p in range(k):
            pr = row_perm[p]
            rv = resid.get(p)
            if not rv:
                continue
            rowvec = t.row(pr)
            diag = rowvec.get(p)
            if not diag:
                raise InternalInconsistencyError(f"zero pivot in row {pr}")
            yv = f.div(rv, diag)
            out[pr] = yv
            touched += len(rowvec.entries)
            for j, v in rowvec.entries:
                nv = f.sub(resid.get(j, 0), f.mul(yv, v))
                if nv:
                    resid[j] = nv
                elif j in resid:
                    del resid[j]
    else:
        raise UsageError(f"side must be 'left' or 'right', got {side!r}")
    if resid:
        raise InternalInconsistencyError("triangular solve left a nonzero residual")
    if counter is not None:
        counter.axpy_entries += touched
    return SparseVector.from_dict(f, out)


def _scatter(pairs, index_map) -> list[tuple[int, int]]:
    return sorted((index_map[p], v) for p, v in pairs)


class _Retriever:
    """Implements the dispatch table; one instance per retrieve call."""

    def __init__(self, u: CompressedUmatch):
        self.u = u
        self.f = u.field
        self.counter = OpCounter()
        self.a = PivotBlockProduct(u, counter=self.counter)

    # -- solves against A and D_rho_kappa ------------------------------

    def solve_a_left(self, b: SparseVector) -> SparseVector:
        """x with A x = b (b in pivot-row positions, x in pivot-col positions)."""
        return triangular_solve(self.a, b, side="left", row_perm=self.u.pi,
                                counter=self.counter)

    def solve_a_right(self, c: SparseVector) -> SparseVector:
        """y with y A = c (c in pivot-col positions, y in pivot-row positions)."""
        return triangular_solve(self.a, c, side="right", row_perm=self.u.pi,
                                counter=self.counter)

    def rbar_matvec(self, v: SparseVector) -> SparseVector:
        f = self.f
        ops = 0
        acc: dict[int, int] = {}
        for q, a in v.entries:
            for i, w in self.u.rbar.col(q).entries:
                ops += 1
                acc[i] = f.add(acc.get(i, 0), f.mul(a, w))
        self.counter.axpy_entries += ops
        return SparseVector.from_dict(f, acc)

    def rbar_vecmat(self, v: SparseVector) -> SparseVector:
        f = self.f
        ops = 0
        acc: dict[int, int] = {}
        for q, a in v.entries:
            for j, w in self.u.rbar.row(q).entries:
                ops += 1
                acc[j] = f.add(acc.get(j, 0), f.mul(a, w))
        self.counter.axpy_entries += ops
        return SparseVector.from_dict(f, acc)

    def d_rows_combination(self, coeffs: SparseVector) -> dict[int, int]:
        """sum over pivot positions q of coeffs[q] * row_{rho_q}(D), full width."""
        f = self.f
        ops = 0
        acc: dict[int, int] = {}
        for q, a in coeffs.entries:
            for j, v in self.u.d.row(self.u.rho[q]).entries:
                ops += 1
                acc[j] = f.add(acc.get(j, 0), f.mul(a, v))
        self.counter.axpy_entries += ops
        return {j: v for j, v in acc.items() if v}

    def d_cols_combination(self, coeffs: SparseVector) -> dict[int, int]:
        """sum over pivot positions p of coeffs[p] * col_{kappa_p}(D), full height."""
        f = self.f
        ops = 0
        acc: dict[int, int] = {}
        for p, a in coeffs.entries:
            for i, v in self.u.d.col(self.u.kappa[p]).entries:
                ops += 1
                acc[i] = f.add(acc.get(i, 0), f.mul(a, v))
        self.counter.axpy_entries += ops
        return {i: v for i, v in acc.items() if v}

    # -- rows ----------------------------------------------------------

    def row_rinv(self, i: int) -> SparseVector:
        u, f = self.u, self.f
        q = u.rho_pos.get(i)
        if q is not None:
            # pivot row: permute/pad the stored pivot-block row, zero solves
            ent = _scatter(u.rbar.row(q).entries, u.rho)
            return SparseVector(f, tuple(ent), _checked=True)
        b = SparseVector(f, tuple((p, f.neg(v)) for p, v in u.d_row_kappa(i).entries), _checked=True)
        z = self.solve_a_right(b)
        y = self.rbar_vecmat(z)
        ent = _scatter(y.entries, u.rho)
        ent.append((i, 1))
        ent.sort()
        return SparseVector(f, tuple(ent), _checked=True)

    def row_r(self, i: int) -> SparseVector:
        u, f = self.u, self.f
        q = u.rho_pos.get(i)
        if q is not None:
            x = triangular_solve(u.rbar, SparseVector.unit(f, q), side="right",
                                 counter=self.counter)
            ent = _scatter(x.entries, u.rho)
            return SparseVector(f, tuple(ent), _checked=True)
        x = self.solve_a_right(u.d_row_kappa(i))
        ent = _scatter(x.entries, u.rho)
        ent.append((i, 1))
        ent.sort()
        return SparseVector(f, tuple(ent), _checked=True)

    def row_cinv(self, j: int) -> SparseVector:
        u, f = self.u, self.f
        p = u.kappa_pos.get(j)
        if p is None:
            return SparseVector.unit(f, j)
        # (C^-1)_{kappa,*} = M_rk^-1 (R_rr)^-1 D_{rho,*}: scale one pivot-block
        # row and stream it through the rows of D; zero solves
        q = u.pi[p]
        s = f.inv(u.m_diag[p])
        coeffs = scale(s, u.rbar.row(q))
        acc = self.d_rows_combination(coeffs)
        return SparseVector.from_dict(f, acc)

    def row_c(self, j: int) -> SparseVector:
        u, f = self.u, self.f
        p = u.kappa_pos.get(j)
        if p is None:
            return SparseVector.unit(f, j)
        x = self.solve_a_right(SparseVector.unit(f, p))
        # kappa block: x * M_rho_kappa; kappa_bar block: -(x * rbar) * D_{rho, kappa_bar}
        ent = []
        inv_pi = {q: pp for pp, q in enumerate(u.pi)}
        for q, v in x.entries:
            pp = inv_pi[q]
            ent.append((u.kappa[pp], f.mul(v, u.m_diag[pp])))
        z = self.rbar_vecmat(x)
        full = self.d_rows_combination(z)
        kset = u.kappa_pos
        for jj, v in full.items():
            if jj not in kset:
                ent.append((jj, f.neg(v)))
        ent = [(jj, v) for jj, v in sorted(ent) if v]
        return SparseVector(f, tuple(ent), _checked=True)

    # -- columns -------------------------------------------------------

    def col_rinv(self, i: int) -> SparseVector:
        u, f = self.u, self.f
        q = u.rho_pos.get(i)
        if q is None:
            return SparseVector.unit(f, i)
        w = u.rbar.col(q)
        x = self.solve_a_left(w)
        full = self.d_cols_combination(x)
        ent = []
        rset = u.rho_pos
        for ii, v in full.items():
            if ii not in rset:
                ent.append((ii, f.neg(v)))
        ent.extend(_scatter(w.entries, u.rho))
        ent = [(ii, v) for ii, v in sorted(ent) if v]
        return SparseVector(f, tuple(ent), _checked=True)

    def col_r(self, i: int) -> SparseVector:
        u, f = self.u, self.f
        q = u.rho_pos.get(i)
        if q is None:
            return SparseVector.unit(f, i)
        x = self.solve_a_left(SparseVector.unit(f, q))
        return SparseVector.from_dict(f, self.d_cols_combination(x))

    def col_cinv(self, j: int) -> SparseVector:
        u, f = self.u, self.f
        w = self.rbar_matvec(u.d_col_rho(j))
        ent = []
        for q, v in w.entries:
            # position p with pi[p] == q carries 1 / m_diag[p]
            p = self._pi_inv(q)
            ent.append((u.kappa[p], f.div(v, u.m_diag[p])))
        if j not in u.kappa_pos:
            ent.append((j, 1))
        ent = sorted(ent)
        return SparseVector(f, tuple(ent), _checked=True)

    def col_c(self, j: int) -> SparseVector:
        u, f = self.u, self.f
        p = u.kappa_pos.get(j)
        if p is not None:
            b = SparseVector.unit(f, u.pi[p], u.m_diag[p])
            x = self.solve_a_left(b)
            ent = _scatter(x.entries, u.kappa)
            return SparseVector(f, tuple(ent), _checked=True)
        w = self.rbar_matvec(u.d_col_rho(j))
        b = SparseVector(f, tuple((q, f.neg(v)) for q, v in w.entries), _checked=True)
        x = self.solve_a_left(b)
        ent = _scatter(x.entries, u.kappa)
        ent.append((j, 1))
        ent.sort()
        return SparseVector(f, tuple(ent), _checked=True)

    def _pi_inv(self, q: int) -> int:
        if not hasattr(self, "_pi_inv_map"):
            self._pi_inv_map = {qq: p for p, qq in enumerate(self.u.pi)}
        return self._pi_inv_map[q]

    def run(self, t: RetrievalTarget) -> SparseVector:
        u = self.u
        bound = u.d.nrows if t.which in ("R", "Rinv") else u.d.ncols
        if not 0 <= t.index < bound:
            raise UsageError(f"index {t.index} out of range for {t.which} {t.axis}")
        method = {
            ("Rinv", "row"): self.row_rinv,
            ("R", "row"): self.row_r,
            ("Cinv", "row"): self.row_cinv,
            ("C", "row"): self.row_c,
            ("Rinv", "col"): self.col_rinv,
            ("R", "col"): self.col_r,
            ("Cinv", "col"): self.col_cinv,
            ("C", "col"): self.col_c,
        }[(t.which, t.axis)]
        return method(t.index)


def retrieve(u: CompressedUmatch, t: RetrievalTarget) -> SparseVector:
    """The requested row or column of the proper decomposition determined by
    u, fully materialized with entries ascending."""
    return _Retriever(u).run(t)


def retrieve_with_stats(u: CompressedUmatch, t: RetrievalTarget) -> tuple[SparseVector, OpCounter]:
    r = _Retriever(u)
    vec = r.run(t)
    return vec, r.counter


def solve_count_audit(u: CompressedUmatch, t: RetrievalTarget) -> int:
    """Number of triangular solves performed by retrieve(u, t); at most 1."""
    _, counter = retrieve_with_stats(u, t)
    return counter.solves
