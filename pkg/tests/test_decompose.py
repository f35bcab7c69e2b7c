import random

import pytest

from umatch import (
    GF,
    DecomposeOptions,
    MatchingArray,
    StoredCsMatrix,
    antitranspose_view,
    decompose_compressed,
    decompose_full,
    matching_rank_oracle,
    pareto_pairs,
)
from umatch.complexes import boundary_oracle
from umatch.datasets import circle_complex
from umatch.decompose import clearing_filter
from umatch.linalg import _invert_unitriangular

import numpy as np
from umatch.complexes import FilteredCliqueComplex

from conftest import random_stored
from oracles import mat_mul


def eq6_matrix(f):
    # the worked 2x2 example: [[3, -6], [3, -6]] with -6 = 1 mod 7
    return StoredCsMatrix.from_dense(f, [[3, 1], [3, 1]])


def dense_factors(full):
    r = _invert_unitriangular(full.rinv).to_dense()
    c = _invert_unitriangular(full.cinv).to_dense()
    return r, c


def test_worked_example_full():
    f = GF(7)
    full = decompose_full(eq6_matrix(f))
    assert full.matching.pairs == ((1, 0, 3),)
    r, c = dense_factors(full)
    assert r == [[1, 1], [0, 1]]
    assert c == [[1, 2], [0, 1]]


def test_worked_example_compressed():
    f = GF(7)
    u = decompose_compressed(eq6_matrix(f))
    assert u.matching.pairs == ((1, 0, 3),)
    assert u.rbar.to_dense() == [[1]]


def test_identity_and_zero_inputs():
    f = GF(7)
    eye = StoredCsMatrix.identity(f, 4)
    full = decompose_full(eye)
    assert full.matching.support() == {(i, i) for i in range(4)}
    assert full.rinv.to_dense() == eye.to_dense()
    assert full.cinv.to_dense() == eye.to_dense()
    u = decompose_compressed(eye)
    assert u.rbar.to_dense() == eye.to_dense()

    zero = StoredCsMatrix.from_dense(f, [[0, 0, 0], [0, 0, 0]])
    fz = decompose_full(zero)
    assert fz.matching.rank == 0
    assert fz.rinv.to_dense() == StoredCsMatrix.identity(f, 2).to_dense()
    assert fz.cinv.to_dense() == StoredCsMatrix.identity(f, 3).to_dense()

    empty = StoredCsMatrix.from_rows(f, 0, 3, [])
    assert decompose_full(empty).matching.rank == 0
    assert decompose_compressed(empty).rank == 0

    wide = StoredCsMatrix.from_rows(f, 3, 0, [[], [], []])
    fw = decompose_full(wide)
    assert fw.matching.rank == 0
    assert fw.rinv.to_dense() == StoredCsMatrix.identity(f, 3).to_dense()
    assert decompose_compressed(wide).rank == 0


def test_rank_oracle_on_worked_example_and_permutations():
    f = GF(7)
    assert matching_rank_oracle(eq6_matrix(f)) == {(1, 0)}
    perm = StoredCsMatrix.from_dense(GF(2), [[0, 1, 0], [1, 0, 0], [0, 0, 1]])
    assert matching_rank_oracle(perm) == {(0, 1), (1, 0), (2, 2)}


@pytest.mark.parametrize("p", [2, 7])
def test_matching_uniqueness_randomized(p):
    rnd = random.Random(100 + p)
    f = GF(p)
    for _ in range(25):
        m, n = rnd.randint(1, 9), rnd.randint(1, 10)
        d = random_stored(rnd, p, m, n)
        full = decompose_full(d)
        comp = decompose_compressed(d)
        assert full.matching == comp.matching
        assert full.matching.support() == matching_rank_oracle(d)
        # anti-transpose symmetry of the matching support
        at = decompose_compressed(antitranspose_view(d))
        mirrored = {(n - 1 - c, m - 1 - r) for r, c in full.matching.support()}
        assert at.matching.support() == mirrored


@pytest.mark.parametrize("p", [2, 7])
def test_defining_identity_and_proper_axioms(p):
    rnd = random.Random(7 + p)
    f = GF(p)
    for _ in range(20):
        m, n = rnd.randint(1, 8), rnd.randint(1, 8)
        d = random_stored(rnd, p, m, n)
        full = decompose_full(d)
        r, c = dense_factors(full)
        mm = full.matching.to_oracle(f).to_dense()
        assert mat_mul(r, mm, p) == mat_mul(d.to_dense(), c, p)
        # rows of C at unmatched column indices are standard unit rows
        for k in full.matching.kappa_bar:
            assert c[k] == [1 if j == k else 0 for j in range(n)]
        # columns of R at unmatched row indices are standard unit columns
        for k in full.matching.rho_bar:
            assert [r[i][k] for i in range(m)] == [1 if i == k else 0 for i in range(m)]
        # unitriangularity
        for i in range(m):
            assert r[i][i] == 1 and all(r[i][j] == 0 for j in range(i))
        for i in range(n):
            assert c[i][i] == 1 and all(c[i][j] == 0 for j in range(i))


@pytest.mark.parametrize("p", [2, 7])
def test_matching_identities_for_rows_and_columns(p):
    rnd = random.Random(40 + p)
    f = GF(p)
    for _ in range(10):
        m, n = rnd.randint(2, 7), rnd.randint(2, 7)
        d = random_stored(rnd, p, m, n)
        full = decompose_full(d)
        r, c = dense_factors(full)
        match = full.matching
        dd = d.to_dense()
        for col in range(n):
            image = [sum(dd[i][t] * c[t][col] for t in range(n)) % p for i in range(m)]
            row = match.row_of_col.get(col)
            if row is None:
                assert image == [0] * m
            else:
                coeff = match.coeff(row)
                expect = [(coeff * r[i][row]) % p for i in range(m)]
                assert image == expect
        rinv = full.rinv.to_dense()
        cinv = full.cinv.to_dense()
        for row in range(m):
            lhs = [sum(rinv[row][t] * dd[t][j] for t in range(m)) % p for j in range(n)]
            col = match.col_of_row.get(row)
            if col is None:
                assert lhs == [0] * n
            else:
                coeff = match.coeff(row)
                expect = [(coeff * cinv[col][j]) % p for j in range(n)]
                assert lhs == expect


def test_block_determinism_and_codetermination():
    # three of four blocks of both operation matrices are forced by D
    rnd = random.Random(9)
    p = 7
    f = GF(p)
    for _ in range(10):
        m, n = rnd.randint(2, 7), rnd.randint(2, 7)
        d = random_stored(rnd, p, m, n)
        full = decompose_full(d)
        match = full.matching
        if match.rank == 0:
            continue
        rinv = full.rinv.to_dense()
        dd = d.to_dense()
        rho, kappa = match.rho, match.kappa
        rho_bar, kappa_bar = match.rho_bar, match.kappa_bar
        from oracles import invert_mod

        d_rk = [[dd[i][j] for j in kappa] for i in rho]
        d_rk_inv = invert_mod(d_rk, p)
        # (R^-1)_{rho_bar, rho} = -D_{rho_bar, kappa} (D_{rho, kappa})^-1
        d_rbk = [[dd[i][j] for j in kappa] for i in rho_bar]
        want = mat_mul(d_rbk, d_rk_inv, p)
        got = [[(-rinv[i][j]) % p for j in rho] for i in rho_bar]
        assert got == want
        # C_{kappa, kappa_bar} = -(D_{rho,kappa})^-1 D_{rho, kappa_bar}
        _, c = dense_factors(full)
        d_rkb = [[dd[i][j] for j in kappa_bar] for i in rho]
        want_c = mat_mul(d_rk_inv, d_rkb, p)
        got_c = [[(-c[i][j]) % p for j in kappa_bar] for i in kappa]
        assert got_c == want_c
        # codetermination: R and the inner identities rebuild C exactly
        r, _ = dense_factors(full)
        r_rr = [[r[i][j] for j in rho] for i in rho]
        rbar = invert_mod(r_rr, p)
        a = mat_mul(rbar, d_rk, p)
        a_inv = invert_mod(a, p)
        m_rk = [[full.matching.to_oracle(f).to_dense()[i][j] for j in kappa] for i in rho]
        c_kk = mat_mul(a_inv, m_rk, p)
        c_kkb = mat_mul(a_inv, mat_mul(rbar, d_rkb, p), p)
        for qi, i in enumerate(kappa):
            for qj, j in enumerate(kappa):
                assert c[i][j] == c_kk[qi][qj]
            for qj, j in enumerate(kappa_bar):
                assert c[i][j] == (-c_kkb[qi][qj]) % p


def test_pareto_pairs_examples_and_subset_property():
    f = GF(7)
    assert pareto_pairs(eq6_matrix(f)) == {(1, 0)}
    diag = StoredCsMatrix.from_dense(f, [[2, 0], [0, 5]])
    assert pareto_pairs(diag) == {(0, 0), (1, 1)}
    rnd = random.Random(77)
    for _ in range(20):
        d = random_stored(rnd, 2, rnd.randint(1, 8), rnd.randint(1, 8))
        assert pareto_pairs(d) <= matching_rank_oracle(d)


def test_pareto_short_circuit_changes_nothing():
    rnd = random.Random(5)
    for p in (2, 7):
        for _ in range(10):
            d = random_stored(rnd, p, rnd.randint(1, 8), rnd.randint(1, 8))
            with_sc = decompose_compressed(d, DecomposeOptions(pareto=True))
            without = decompose_compressed(d, DecomposeOptions(pareto=False))
            assert with_sc.matching == without.matching
            assert with_sc.rbar.to_dense() == without.rbar.to_dense()


def triangle_complex():
    d = np.ones((3, 3)) - np.eye(3)
    return FilteredCliqueComplex(d, max_dim=2, threshold=1.5)


def test_clearing_on_triangle_complex():
    f = GF(2)
    cx = triangle_complex()
    d1 = boundary_oracle(cx, 1, f)
    d2 = boundary_oracle(cx, 2, f)
    u1 = decompose_compressed(d1)
    skip = clearing_filter(u1.matching)
    assert skip == frozenset(u1.matching.kappa)
    cleared = decompose_compressed(d2, DecomposeOptions(clear_rows=skip, counters=True))
    plain = decompose_compressed(d2)
    assert cleared.matching == plain.matching
    assert cleared.rbar.to_dense() == plain.rbar.to_dense()
    assert cleared.stats.rows_cleared == len(skip)


def test_empty_prior_matching_clears_nothing():
    prior = MatchingArray(4, 4, ())
    assert clearing_filter(prior) == frozenset()


def test_clearing_identical_on_benchmark_complex():
    f = GF(2)
    cx = circle_complex(10)
    d1 = boundary_oracle(cx, 1, f)
    d2 = boundary_oracle(cx, 2, f)
    u1 = decompose_compressed(d1)
    skip = clearing_filter(u1.matching)
    a = decompose_compressed(d2, DecomposeOptions(clear_rows=skip))
    b = decompose_compressed(d2, DecomposeOptions(clearing=False))
    assert a.matching == b.matching


def test_nilpotent_total_matrix_has_disjoint_def_and_val():
    f = GF(2)
    cx = triangle_complex()
    # assemble the strictly upper triangular total boundary matrix
    orders = {n: cx.order(n) for n in range(3)}
    offsets = {}
    total = 0
    cells = []
    for n in range(3):
        for pos in range(len(orders[n])):
            cells.append((n, pos))
    cells.sort(key=lambda t: (orders[t[0]].births[t[1]], t[0], orders[t[0]].cells[t[1]]))
    index = {cell: g for g, cell in enumerate(cells)}
    dense = [[0] * len(cells) for _ in cells]
    for n in (1, 2):
        d = boundary_oracle(cx, n, f)
        for j in range(d.ncols):
            for i, v in d.col(j).entries:
                dense[index[(n - 1, i)]][index[(n, j)]] = v
    sq = mat_mul(dense, dense, 2)
    assert all(all(v == 0 for v in row) for row in sq)
    u = decompose_compressed(StoredCsMatrix.from_dense(f, dense))
    defs = {r for r, _, _ in u.matching.pairs}
    vals = {c for _, c, _ in u.matching.pairs}
    assert not (defs & vals)


def test_matching_array_index_sequences():
    m = MatchingArray(5, 6, [(4, 0, 3), (1, 2, 1)])
    assert m.rho == (1, 4)
    assert m.kappa == (0, 2)
    assert m.rho_bar == (0, 2, 3)
    assert m.kappa_bar == (1, 3, 4, 5)
    assert m.kappa_star == (4, 1)
    assert sorted(m.kappa_star) == list(m.rho)
    assert m.rank == 2


def test_fifty_random_10x14_gf7_instances_agree_with_oracle():
    rnd = random.Random(1014)
    for _ in range(50):
        d = random_stored(rnd, 7, 10, 14, density=0.35)
        full = decompose_full(d)
        comp = decompose_compressed(d)
        assert full.matching == comp.matching
        assert comp.matching.support() == matching_rank_oracle(d)


@pytest.mark.parametrize("p", [3, 101])
def test_other_prime_fields_soak(p):
    rnd = random.Random(8 + p)
    for _ in range(6):
        m, n = rnd.randint(5, 16), rnd.randint(5, 18)
        d = random_stored(rnd, p, m, n, density=0.3)
        full = decompose_full(d)
        comp = decompose_compressed(d)
        assert full.matching == comp.matching
        assert full.matching.support() == matching_rank_oracle(d)
        r = _invert_unitriangular(full.rinv).to_dense()
        c = _invert_unitriangular(full.cinv).to_dense()
        mm = full.matching.to_oracle(d.field).to_dense()
        assert mat_mul(r, mm, p) == mat_mul(d.to_dense(), c, p)
