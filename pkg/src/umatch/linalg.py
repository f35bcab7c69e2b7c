"""Linear-algebra services on top of a compressed decomposition: system
solving with support-extremal solutions, bases for kernels, images, inverse
images and their lattice meets/joins, and conversions to LU, echelon, and
right-reduced forms."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .decompose import CompressedUmatch, FullUmatch, MatchingArray
from .errors import UsageError
from .matrix import (
    MatrixOracle,
    SparseVector,
    StoredCsMatrix,
    matvec,
    scale,
    vecmat,
)
from .retrieve import PivotBlockProduct, RetrievalTarget, _Retriever, retrieve, triangular_solve


class NoSolution:
    """Typed outcome for an inconsistent linear system (not an error)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NoSolution"

    def __bool__(self):
        return False


NO_SOLUTION = NoSolution()


def solve_dx_b(u: CompressedUmatch, b: SparseVector) -> Union[SparseVector, NoSolution]:
    """Solve D x = b; the returned solution minimizes max supp(x) over all
    solutions.  Returns NO_SOLUTION when b is outside the column space."""
    f = u.field
    if b.entries and b.entries[-1][0] >= u.d.nrows:
        raise UsageError("right-hand side longer than the codomain")
    r = _Retriever(u)
    pos = u.rho_pos
    b_rho = SparseVector(f, tuple((pos[i], v) for i, v in b.entries if i in pos), _checked=True)
    w = r.rbar_matvec(b_rho)
    xk = r.solve_a_left(w)
    x = SparseVector(f, tuple(sorted((u.kappa[p], v) for p, v in xk.entries)), _checked=True)
    if matvec(u.d, x) != b:
        return NO_SOLUTION
    return x


def solve_yd_c(u: CompressedUmatch, c: SparseVector) -> Union[SparseVector, NoSolution]:
    """Solve y D = c; the returned solution maximizes min supp(y) over all
    solutions.  Returns NO_SOLUTION when c is outside the row space."""
    f = u.field
    if c.entries and c.entries[-1][0] >= u.d.ncols:
        raise UsageError("right-hand side longer than the domain")
    r = _Retriever(u)
    pos = u.kappa_pos
    c_kappa = SparseVector(f, tuple((pos[j], v) for j, v in c.entries if j in pos), _checked=True)
    t = r.solve_a_right(c_kappa)
    y_rho = r.rbar_vecmat(t)
    y = SparseVector(f, tuple(sorted((u.rho[q], v) for q, v in y_rho.entries)), _checked=True)
    if vecmat(y, u.d) != c:
        return NO_SOLUTION
    return y


def kernel_coords(u: CompressedUmatch, b: SparseVector, side: str = "right") -> SparseVector:
    """Coordinates of a kernel vector in the decomposition bases, obtained by
    zeroing pivot coordinates; no triangular solve is performed.

    right: b with D b = 0 yields C^-1 b; left: b with b D = 0 yields b R^-1.
    """
    f = u.field
    if side == "right":
        if matvec(u.d, b):
            raise UsageError("input is not in the kernel of D")
        drop = u.kappa_pos
    elif side == "left":
        if vecmat(b, u.d):
            raise UsageError("input is not in the left kernel of D")
        drop = u.rho_pos
    else:
        raise UsageError(f"side must be 'left' or 'right', got {side!r}")
    return SparseVector(f, tuple((i, v) for i, v in b.entries if i not in drop), _checked=True)


# -- subspace bases ------------------------------------------------------

@dataclass(frozen=True)
class DomainStep:
    """The subspace of domain vectors supported on the first p coordinates."""
    p: int


@dataclass(frozen=True)
class CodomainStep:
    """The subspace of codomain vectors supported on the first p coordinates."""
    p: int


@dataclass(frozen=True)
class PreimageStep:
    """Inverse image under D of the first-p-coordinates codomain subspace.
    p = 0 gives the kernel."""
    p: int


@dataclass(frozen=True)
class ImageStep:
    """Image under D of the first-p-coordinates domain subspace.
    p = ncols gives the full image."""
    p: int


@dataclass(frozen=True)
class Meet:
    left: object
    right: object


@dataclass(frozen=True)
class Join:
    left: object
    right: object


def meet(a, b) -> Meet:
    return Meet(a, b)


def join(a, b) -> Join:
    return Join(a, b)


def kernel_space() -> PreimageStep:
    return PreimageStep(0)


def image_space(u: CompressedUmatch) -> ImageStep:
    return ImageStep(u.d.ncols)


@dataclass(frozen=True)
class SubspaceBasis:
    """Basis referencing columns of the decomposition factors.

    factor is 'C' (domain side) or 'R' (codomain side); generators are the
    referenced column indices, ascending.
    """

    factor: str
    generators: tuple[int, ...]
    ambient: int

    @property
    def dimension(self) -> int:
        return len(self.generators)

    def materialize(self, u: CompressedUmatch) -> list[SparseVector]:
        return [retrieve(u, RetrievalTarget(self.factor, "col", g)) for g in self.generators]


def _eval_space(u: CompressedUmatch, space) -> tuple[str, frozenset[int]]:
    m = u.matching
    if isinstance(space, DomainStep):
        if not 0 <= space.p <= u.d.ncols:
            raise UsageError("filtration step out of range")
        return ("C", frozenset(range(space.p)))
    if isinstance(space, CodomainStep):
        if not 0 <= space.p <= u.d.nrows:
            raise UsageError("filtration step out of range")
        return ("R", frozenset(range(space.p)))
    if isinstance(space, PreimageStep):
        if not 0 <= space.p <= u.d.nrows:
            raise UsageError("filtration step out of range")
        gens = set(m.kappa_bar)
        gens.update(c for c in m.kappa if m.row_of_col[c] < space.p)
        return ("C", frozenset(gens))
    if isinstance(space, ImageStep):
        if not 0 <= space.p <= u.d.ncols:
            raise UsageError("filtration step out of range")
        return ("R", frozenset(r for r, c, _ in m.pairs if c < space.p))
    if isinstance(space, Meet):
        fl, gl = _eval_space(u, space.left)
        fr, gr = _eval_space(u, space.right)
        if fl != fr:
            raise UsageError("cannot mix domain and codomain subspaces")
        return (fl, gl & gr)
    if isinstance(space, Join):
        fl, gl = _eval_space(u, space.left)
        fr, gr = _eval_space(u, space.right)
        if fl != fr:
            raise UsageError("cannot mix domain and codomain subspaces")
        return (fl, gl | gr)
    raise UsageError(f"unrecognized subspace expression {space!r}")


def subspace_basis(u: CompressedUmatch, space) -> SubspaceBasis:
    """Basis for a subspace in the lattice generated by the coordinate
    filtrations and their images/preimages under D; generators are selected
    from the columns of C (domain side) or R (codomain side) by the sparsity
    pattern of the matching array, and meets/joins are taken generator-wise.
    """
    factor, gens = _eval_space(u, space)
    ambient = u.d.ncols if factor == "C" else u.d.nrows
    return SubspaceBasis(factor, tuple(sorted(gens)), ambient)


# -- related factorizations ----------------------------------------------

def _reversal(k: int) -> list[int]:
    return list(range(k - 1, -1, -1))


def _permute_dense(rows: Sequence[Sequence[int]], rperm, cperm) -> list[list[int]]:
    return [[rows[i][j] for j in cperm] for i in rperm]


def to_lu(u: CompressedUmatch) -> tuple[StoredCsMatrix, StoredCsMatrix, StoredCsMatrix, StoredCsMatrix]:
    """(L, P, N, U) with L P = N U, L lower unitriangular, U upper
    unitriangular, P a generalized permutation: the pivot blocks of the
    decomposition conjugated by the exchange permutation."""
    f = u.field
    k = u.rank
    a = PivotBlockProduct(u)
    # R_rho_rho = inverse of the stored pivot block
    rrr = [triangular_solve(u.rbar, SparseVector.unit(f, q), side="left").to_dense(k)
           for q in range(k)]
    rrr_rows = [[rrr[j][i] for j in range(k)] for i in range(k)]
    # C_kappa_kappa columns solve A x = col_p(M_rho_kappa)
    ccc_cols = []
    for p in range(k):
        b = SparseVector.unit(f, u.pi[p], u.m_diag[p])
        ccc_cols.append(triangular_solve(a, b, side="left", row_perm=u.pi).to_dense(k))
    ccc_rows = [[ccc_cols[j][i] for j in range(k)] for i in range(k)]
    d_rk = [[0] * k for _ in range(k)]
    for p in range(k):
        for q, v in u.d_col_rho(u.kappa[p]).entries:
            d_rk[q][p] = v
    m_rk = [[0] * k for _ in range(k)]
    for p in range(k):
        m_rk[u.pi[p]][p] = u.m_diag[p]
    rev = _reversal(k)
    l_rows = _permute_dense(rrr_rows, rev, rev)
    p_rows = _permute_dense(m_rk, rev, range(k))
    n_rows = _permute_dense(d_rk, rev, range(k))
    return (
        StoredCsMatrix.from_dense(f, l_rows),
        StoredCsMatrix.from_dense(f, p_rows),
        StoredCsMatrix.from_dense(f, n_rows),
        StoredCsMatrix.from_dense(f, ccc_rows),
    )


class _RowEchelonOracle(MatrixOracle):
    """Lazy row echelon form: pivot rows are rescaled reduced rows, rows at
    unmatched indices are zero."""

    def __init__(self, u: CompressedUmatch):
        self.u = u
        self.field = u.field
        self.nrows = u.d.nrows
        self.ncols = u.d.ncols

    def _pivot_row(self, q: int) -> SparseVector:
        u = self.u
        f = self.field
        r = _Retriever(u)
        # row rho_q carries the pivot of column col(rho_q); normalize so that
        # leading entries match M and the pivot block is a permutation
        c = u.matching.col_of_row[u.rho[q]]
        p = u.kappa_pos[c]
        x = r.solve_a_right(SparseVector.unit(f, p, u.m_diag[p]))
        z = r.rbar_vecmat(x)
        return SparseVector.from_dict(f, r.d_rows_combination(z))

    def row(self, i: int) -> SparseVector:
        self._check_row(i)
        q = self.u.rho_pos.get(i)
        if q is None:
            return SparseVector.zero(self.field)
        return self._pivot_row(q)

    def col(self, j: int) -> SparseVector:
        self._check_col(j)
        u = self.u
        f = self.field
        r = _Retriever(u)
        w = r.rbar_matvec(u.d_col_rho(j))
        x = triangular_solve(PivotBlockProduct(u), w, side="left", row_perm=u.pi)
        ent = []
        for p, v in x.entries:
            ent.append((u.rho[u.pi[p]], f.mul(v, u.m_diag[p])))
        return SparseVector(f, tuple(sorted(ent)), _checked=True)


class _ColEchelonOracle(MatrixOracle):
    """Lazy column echelon form: pivot columns are rescaled reduced columns,
    columns at unmatched indices are zero."""

    def __init__(self, u: CompressedUmatch):
        self.u = u
        self.field = u.field
        self.nrows = u.d.nrows
        self.ncols = u.d.ncols

    def col(self, j: int) -> SparseVector:
        self._check_col(j)
        u = self.u
        f = self.field
        p = u.kappa_pos.get(j)
        if p is None:
            return SparseVector.zero(f)
        r = _Retriever(u)
        x = r.solve_a_left(SparseVector.unit(f, u.pi[p], u.m_diag[p]))
        return SparseVector.from_dict(f, r.d_cols_combination(x))

    def row(self, i: int) -> SparseVector:
        self._check_row(i)
        u = self.u
        f = self.field
        r = _Retriever(u)
        t = r.solve_a_right(u.d_row_kappa(i))
        z = r.rbar_vecmat(t)
        pi_inv = {q: p for p, q in enumerate(u.pi)}
        ent = []
        for q, v in z.entries:
            p = pi_inv[q]
            ent.append((u.kappa[p], f.mul(v, u.m_diag[p])))
        return SparseVector(f, tuple(sorted(ent)), _checked=True)


def to_echelon(u: CompressedUmatch, orientation: str = "row") -> MatrixOracle:
    """Reduced echelon oracle (row or column orientation), exact up to row/
    column permutation and leading-entry scaling."""
    if orientation == "row":
        return _RowEchelonOracle(u)
    if orientation == "column":
        return _ColEchelonOracle(u)
    raise UsageError(f"orientation must be 'row' or 'column', got {orientation!r}")


# -- right-reduction bridge ------------------------------------------------

@dataclass
class RdvDecomposition:
    """Right-reduction triple: reduced = d @ v with v upper unitriangular and
    the nonzero columns of `reduced` having distinct lowest nonzero rows."""

    reduced: MatrixOracle
    v: MatrixOracle
    low: dict[int, int]
    d: Optional[MatrixOracle] = None


class _ReducedProductOracle(MatrixOracle):
    """Lazy oracle for R @ M of a compressed decomposition."""

    def __init__(self, u: CompressedUmatch):
        self.u = u
        self.field = u.field
        self.nrows = u.d.nrows
        self.ncols = u.d.ncols

    def col(self, j: int) -> SparseVector:
        self._check_col(j)
        u = self.u
        r = u.matching.row_of_col.get(j)
        if r is None:
            return SparseVector.zero(self.field)
        col_r = retrieve(u, RetrievalTarget("R", "col", r))
        return scale(u.matching.coeff(r), col_r)

    def row(self, i: int) -> SparseVector:
        self._check_row(i)
        u = self.u
        f = self.field
        row_r = retrieve(u, RetrievalTarget("R", "row", i))
        ent = []
        for r, v in row_r.entries:
            c = u.matching.col_of_row.get(r)
            if c is not None:
                ent.append((c, f.mul(v, u.matching.coeff(r))))
        return SparseVector(f, tuple(sorted(ent)), _checked=True)


def umatch_to_rdv(u: CompressedUmatch) -> RdvDecomposition:
    """R @ M = D @ C is already a right-reduction; expose it lazily."""
    class _COracle(MatrixOracle):
        def __init__(self, uu):
            self.u = uu
            self.field = uu.field
            self.nrows = uu.d.ncols
            self.ncols = uu.d.ncols

        def col(self, j):
            self._check_col(j)
            return retrieve(self.u, RetrievalTarget("C", "col", j))

        def row(self, i):
            self._check_row(i)
            return retrieve(self.u, RetrievalTarget("C", "row", i))

    low = {c: r for r, c, _ in u.matching.pairs}
    return RdvDecomposition(_ReducedProductOracle(u), _COracle(u), low, d=u.d)


def rdv_to_umatch(rdv: RdvDecomposition) -> FullUmatch:
    """Eliminate the reduced matrix bottom-up into a matching matrix; the
    recorded row operations and the given v constitute a proper U-match
    decomposition when v is proper.

    Once the rows below i are fully reduced, each is a single matching entry,
    so clearing row i means deleting its non-low entries one by one while
    accumulating the corresponding composite row operations.
    """
    red = rdv.reduced
    v = rdv.v
    f = red.field
    m, n = red.nrows, red.ncols
    _check_unitriangular(v)
    low_of_col: dict[int, int] = {}
    pivot_val: dict[int, int] = {}
    low_rows: set[int] = set()
    for j in range(n):
        t = red.col(j).trailing()
        if t is not None:
            if t[0] in low_rows:
                raise UsageError("input is not reduced: repeated low row")
            low_rows.add(t[0])
            low_of_col[j] = t[0]
            pivot_val[j] = t[1]
    rinv_rows: dict[int, dict[int, int]] = {}
    pairs: list[tuple[int, int, int]] = []
    for i in range(m - 1, -1, -1):
        ops = {i: 1}
        keep = None
        for c, val in red.row(i).entries:
            j = low_of_col[c]
            if j == i:
                keep = (c, val)
                continue
            lam = f.div(val, pivot_val[c])
            for jj, vv in rinv_rows[j].items():
                nv = f.sub(ops.get(jj, 0), f.mul(lam, vv))
                if nv:
                    ops[jj] = nv
                elif jj in ops:
                    del ops[jj]
        rinv_rows[i] = ops
        if keep is not None:
            pairs.append((i, keep[0], keep[1]))
    matching = MatchingArray(m, n, pairs)
    rinv = StoredCsMatrix.from_row_dicts(f, m, m, rinv_rows)
    cinv = _invert_unitriangular(v)
    d = rdv.d if rdv.d is not None else _dense_product(red, _invert_unitriangular(v))
    return FullUmatch(d, rinv, cinv, matching)


def rdv_bridge(x: Union[RdvDecomposition, FullUmatch, CompressedUmatch]):
    """Convert between right-reductions and U-match decompositions."""
    if isinstance(x, RdvDecomposition):
        return rdv_to_umatch(x)
    if isinstance(x, CompressedUmatch):
        return umatch_to_rdv(x)
    if isinstance(x, FullUmatch):
        return umatch_to_rdv_full(x)
    raise UsageError(f"cannot bridge {type(x).__name__}")


def _check_unitriangular(v: MatrixOracle) -> None:
    if v.nrows != v.ncols:
        raise UsageError("column operation matrix must be square")
    for j in range(v.ncols):
        t = v.col(j).trailing()
        if t is None or t[0] != j or t[1] != 1:
            raise UsageError("column operation matrix must be upper unitriangular")


def _invert_unitriangular(v: MatrixOracle) -> StoredCsMatrix:
    f = v.field
    n = v.ncols
    cols = []
    for j in range(n):
        x = triangular_solve(v, SparseVector.unit(f, j), side="left")
        cols.append(x)
    rows: dict[int, dict[int, int]] = {}
    for j, x in enumerate(cols):
        for i, val in x.entries:
            rows.setdefault(i, {})[j] = val
    return StoredCsMatrix.from_row_dicts(f, n, n, rows)


def _dense_product(a: MatrixOracle, b: MatrixOracle) -> StoredCsMatrix:
    f = a.field
    rows: dict[int, dict[int, int]] = {}
    for i in range(a.nrows):
        acc: dict[int, int] = {}
        for kk, v in a.row(i).entries:
            for j, w in b.row(kk).entries:
                acc[j] = f.add(acc.get(j, 0), f.mul(v, w))
        rows[i] = {j: v for j, v in acc.items() if v}
    return StoredCsMatrix.from_row_dicts(f, a.nrows, b.ncols, rows)


def umatch_to_rdv_full(fu: FullUmatch) -> RdvDecomposition:
    c = _invert_unitriangular(fu.cinv)
    reduced = _dense_product(fu.d, c)
    low = {cc: r for r, cc, _ in fu.matching.pairs}
    return RdvDecomposition(reduced, c, low, d=fu.d)
