import random
from fractions import Fraction

import pytest

from morsecjs.algebra import (
    ChainComplex,
    ChainMap,
    HomologySummary,
    IntegerMatrix,
    NotAChainComplexError,
    NotAChainMapError,
    ShapeError,
    homology,
    integer_kernel_basis,
    integer_rank,
    mapping_cone,
    smith_normal_form,
    snf_diagonal,
    verify_complex,
    verify_les_exactness,
)


# --- independent oracles ----------------------------------------------------


def naive_snf_diagonal(rows):
    """Elementary row/column reduction oracle, no transform tracking.

    Recursively gcd-reduces the matrix; returns the sorted-by-chain diagonal.
    """
    m = [list(r) for r in rows]
    diag = []
    while m and m[0]:
        if all(all(e == 0 for e in r) for r in m):
            break
        # move the smallest nonzero entry to (0, 0)
        bi, bj = min(
            ((i, j) for i in range(len(m)) for j in range(len(m[0])) if m[i][j] != 0),
            key=lambda ij: abs(m[ij[0]][ij[1]]),
        )
        m[0], m[bi] = m[bi], m[0]
        for r in m:
            r[0], r[bj] = r[bj], r[0]
        dirty = False
        for i in range(1, len(m)):
            q = m[i][0] // m[0][0]
            m[i] = [a - q * b for a, b in zip(m[i], m[0])]
            if m[i][0] != 0:
                dirty = True
        for j in range(1, len(m[0])):
            q = m[0][j] // m[0][0]
            for r in m:
                r[j] -= q * r[0]
            if m[0][j] != 0:
                dirty = True
        if dirty:
            continue
        if any(m[i][j] % m[0][0] for i in range(1, len(m)) for j in range(1, len(m[0]))):
            k = next(
                i
                for i in range(1, len(m))
                if any(m[i][j] % m[0][0] for j in range(1, len(m[0])))
            )
            m[0] = [a + b for a, b in zip(m[0], m[k])]
            continue
        diag.append(abs(m[0][0]))
        m = [r[1:] for r in m[1:]]
    return diag


def fraction_rank(rows):
    """Gaussian elimination over Fraction; independent of integer_rank."""
    m = [[Fraction(e) for e in r] for r in rows]
    rank = 0
    for col in range(len(m[0]) if m else 0):
        piv = next((i for i in range(rank, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = 1 / m[rank][col]
        m[rank] = [e * inv for e in m[rank]]
        for i in range(len(m)):
            if i != rank and m[i][col] != 0:
                c = m[i][col]
                m[i] = [a - c * b for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


def random_matrix(rng, max_dim=8, lo=-20, hi=20):
    r = rng.randint(0, max_dim)
    c = rng.randint(0, max_dim)
    return IntegerMatrix.from_rows(
        [[rng.randint(lo, hi) for _ in range(c)] for _ in range(r)], cols=c
    )


def assert_snf_contract(A):
    U, D, V = smith_normal_form(A)
    assert (U @ A @ V).entries == D.entries
    assert U.determinant() in (1, -1)
    assert V.determinant() in (1, -1)
    diag = [D.at(i, i) for i in range(min(D.rows, D.cols))]
    for i in range(D.rows):
        for j in range(D.cols):
            if i != j:
                assert D.at(i, j) == 0
    nz = [d for d in diag if d != 0]
    assert all(d > 0 for d in nz)
    # trailing zeros only
    assert diag[len(nz) :] == [0] * (len(diag) - len(nz))
    for a, b in zip(nz, nz[1:]):
        assert b % a == 0
    return nz


# --- smith_normal_form --------------------------------------------------------


def test_snf_identity():
    A = IntegerMatrix.identity(3)
    nz = assert_snf_contract(A)
    assert nz == [1, 1, 1]


def test_snf_diag_2_3():
    A = IntegerMatrix.from_rows([[2, 0], [0, 3]])
    nz = assert_snf_contract(A)
    assert nz == [1, 6]


def test_snf_zero():
    A = IntegerMatrix.zeros(2, 2)
    U, D, V = smith_normal_form(A)
    assert D.entries == (0, 0, 0, 0)
    assert_snf_contract(A)


def test_snf_empty_and_rectangular():
    for shape in [(0, 0), (0, 3), (3, 0), (1, 4), (4, 1)]:
        A = IntegerMatrix.zeros(*shape)
        assert_snf_contract(A)
    A = IntegerMatrix.from_rows([[2, 4, 4]])
    assert assert_snf_contract(A) == [2]


def test_snf_random_against_naive_oracle():
    rng = random.Random(20240917)
    for _ in range(300):
        A = random_matrix(rng, max_dim=4, lo=-9, hi=9)
        nz = assert_snf_contract(A)
        assert nz == naive_snf_diagonal(A.to_lists())


def test_snf_random_contract_8x8():
    rng = random.Random(71)
    for _ in range(200):
        A = random_matrix(rng, max_dim=8)
        assert_snf_contract(A)


def test_integer_rank_matches_fraction_oracle():
    rng = random.Random(5)
    for _ in range(200):
        A = random_matrix(rng, max_dim=6)
        assert integer_rank(A) == fraction_rank(A.to_lists())


def test_kernel_basis():
    rng = random.Random(6)
    for _ in range(100):
        A = random_matrix(rng, max_dim=6)
        K = integer_kernel_basis(A)
        assert K.cols == A.cols - integer_rank(A)
        assert (A @ K).is_zero()


# --- verify_complex -----------------------------------------------------------


def sphere_complex():
    return ChainComplex.build(0, [1, 0, 1])


def rp2_complex():
    return ChainComplex.build(
        0,
        [1, 1, 1],
        {
            2: IntegerMatrix.from_rows([[2]]),
            1: IntegerMatrix.from_rows([[0]]),
        },
    )


def torus_complex():
    return ChainComplex.build(0, [1, 2, 1])


def test_verify_complex_zero_differentials():
    assert verify_complex(sphere_complex()) == []


def test_verify_complex_rp2():
    assert verify_complex(rp2_complex()) == []


def test_verify_complex_violation():
    C = ChainComplex.build(
        0,
        [1, 1, 1],
        {
            2: IntegerMatrix.from_rows([[1]]),
            1: IntegerMatrix.from_rows([[1]]),
        },
    )
    report = verify_complex(C)
    assert len(report) == 1
    assert report[0]["degree"] == 2
    assert report[0]["value"] == 1


def test_verify_complex_shape_error_names_degree():
    C = ChainComplex.build(0, [1, 1], {1: IntegerMatrix.from_rows([[1, 1]])})
    with pytest.raises(ShapeError) as exc:
        verify_complex(C)
    assert exc.value.degree == 1


# --- homology -----------------------------------------------------------------


def test_homology_sphere():
    H = homology(sphere_complex())
    assert H.betti == (1, 0, 1)
    assert all(t == () for t in H.torsion)


def test_homology_rp2():
    H = homology(rp2_complex())
    assert H.betti == (1, 0, 0)
    assert H.torsion_at(1) == (2,)
    assert H.torsion_at(0) == ()
    assert H.torsion_at(2) == ()


def test_homology_torus():
    H = homology(torus_complex())
    assert H.betti == (1, 2, 1)


def test_homology_rejects_non_complex():
    C = ChainComplex.build(
        0, [1, 1, 1], {2: IntegerMatrix.from_rows([[1]]), 1: IntegerMatrix.from_rows([[1]])}
    )
    with pytest.raises(NotAChainComplexError) as exc:
        homology(C)
    assert exc.value.violations[0]["degree"] == 2


def test_homology_empty_and_zero_rank():
    assert homology(ChainComplex.empty()).betti == ()
    C = ChainComplex.build(-2, [0, 3, 0])
    H = homology(C)
    assert H.betti == (0, 3, 0)
    assert H.euler_characteristic() == C.euler_characteristic()


def random_unimodular(rng, n):
    m = IntegerMatrix.identity(n).to_lists()
    inv = IntegerMatrix.identity(n).to_lists()
    for _ in range(3 * n):
        i, j = rng.randrange(n), rng.randrange(n)
        if i == j:
            continue
        c = rng.randint(-2, 2)
        for k in range(n):
            m[i][k] += c * m[j][k]
        # inverse accumulates the opposite column operation
        for k in range(n):
            inv[k][j] -= c * inv[k][i]
    return IntegerMatrix.from_rows(m), IntegerMatrix.from_rows(inv)


def random_complex(rng, n_degrees=4, max_rank=4):
    """Random valid complex: d_k := (kernel basis of d_{k-1}) x random."""
    ranks = [rng.randint(0, max_rank) for _ in range(n_degrees)]
    diffs = {}
    prev_d = None
    for idx in range(1, n_degrees):
        k = idx  # degrees 0..n-1
        rows, cols = ranks[idx - 1], ranks[idx]
        if prev_d is None:
            mat = IntegerMatrix.from_rows(
                [[rng.randint(-3, 3) for _ in range(cols)] for _ in range(rows)],
                cols=cols,
            )
        else:
            K = integer_kernel_basis(prev_d)
            R = IntegerMatrix.from_rows(
                [[rng.randint(-2, 2) for _ in range(cols)] for _ in range(K.cols)],
                cols=cols,
            )
            mat = K @ R
        diffs[k] = mat
        prev_d = mat
    return ChainComplex.build(0, ranks, diffs)


def test_homology_random_valid_and_euler():
    rng = random.Random(11)
    for _ in range(60):
        C = random_complex(rng)
        assert verify_complex(C) == []
        H = homology(C)
        for k in C.degrees():
            assert H.betti_at(k) <= C.rank(k)
        assert H.euler_characteristic() == C.euler_characteristic()


def test_homology_invariant_under_unimodular_basis_change():
    rng = random.Random(13)
    for _ in range(25):
        C = random_complex(rng)
        H = homology(C)
        P = {}
        Pinv = {}
        for k in C.degrees():
            P[k], Pinv[k] = random_unimodular(rng, C.rank(k))
        diffs = {}
        for k in C.degrees():
            if k == C.k_min:
                continue
            diffs[k] = P[k - 1] @ C.differential(k) @ Pinv[k]
        C2 = ChainComplex.build(C.k_min, C.ranks, diffs)
        assert verify_complex(C2) == []
        assert homology(C2) == H


# --- mapping_cone ---------------------------------------------------------------


def shifted_copy(C, shift=1):
    """Same complex with degrees moved up by `shift`."""
    diffs = {k + shift: C.differential(k) for k in C.degrees() if k > C.k_min}
    return ChainComplex.build(C.k_min + shift, C.ranks, diffs)


def suspension_map(C):
    """Canonical degree -1 iso C[1] -> C, with Koszul signs."""
    S = shifted_copy(C, 1)
    mats = {}
    for k in S.degrees():
        n = S.rank(k)
        sgn = 1 if k % 2 == 0 else -1
        mats[k] = IntegerMatrix(
            n, n, tuple(sgn if i == j else 0 for i in range(n) for j in range(n))
        )
    return ChainMap(S, C, -1, mats)


def test_cone_of_isomorphism_is_acyclic():
    rng = random.Random(17)
    for _ in range(20):
        C = random_complex(rng)
        f = suspension_map(C)
        assert f.verify() == []
        cone = mapping_cone(f)
        assert verify_complex(cone) == []
        H = homology(cone)
        assert all(b == 0 for b in H.betti)
        assert all(t == () for t in H.torsion)


def test_cone_of_zero_splits():
    rng = random.Random(19)
    for _ in range(20):
        C = random_complex(rng)
        D = random_complex(rng)
        f = ChainMap(C, D, -1, {})
        cone = mapping_cone(f)
        H = homology(cone)
        HC, HD = homology(C), homology(D)
        for k in cone.degrees():
            assert H.betti_at(k) == HC.betti_at(k) + HD.betti_at(k)
            assert sorted(H.torsion_at(k)) == sorted(HC.torsion_at(k) + HD.torsion_at(k))


def test_cone_of_multiplication_by_two():
    source = ChainComplex.build(2, [1])
    target = ChainComplex.build(1, [1])
    f = ChainMap(source, target, -1, {2: IntegerMatrix.from_rows([[2]])})
    cone = mapping_cone(f)
    H = homology(cone)
    assert H.betti_at(1) == 0 and H.torsion_at(1) == (2,)
    assert H.betti_at(2) == 0 and H.torsion_at(2) == ()


def test_cone_rejects_non_chain_map():
    # d_target∘f != -f∘d_source here
    source = ChainComplex.build(
        0, [1, 1], {1: IntegerMatrix.from_rows([[1]])}
    )
    target = ChainComplex.build(
        -1, [1, 1], {0: IntegerMatrix.from_rows([[1]])}
    )
    f = ChainMap(
        source,
        target,
        -1,
        {0: IntegerMatrix.from_rows([[1]]), 1: IntegerMatrix.from_rows([[1]])},
    )
    assert f.verify() != []
    with pytest.raises(NotAChainMapError):
        mapping_cone(f)


def test_cone_always_passes_verify_complex():
    rng = random.Random(23)
    from morsecjs.continuation import random_flow_continuation
    from morsecjs.continuation import continuation_chain_map

    for _ in range(40):
        fc = random_flow_continuation(rng)
        f = continuation_chain_map(fc)
        assert verify_complex(mapping_cone(f)) == []


# --- verify_les_exactness --------------------------------------------------------


def test_les_cone_of_identity():
    rng = random.Random(29)
    C = random_complex(rng)
    rep = verify_les_exactness(suspension_map(C))
    assert rep.exact
    for n in rep.nodes:
        if n.space == "cone":
            assert n.dim == 0


def test_les_cone_of_zero():
    rng = random.Random(31)
    C, D = random_complex(rng), random_complex(rng)
    rep = verify_les_exactness(ChainMap(C, D, -1, {}))
    assert rep.exact


def test_les_random_chain_maps():
    rng = random.Random(37)
    from morsecjs.continuation import random_flow_continuation, continuation_chain_map

    for _ in range(30):
        fc = random_flow_continuation(rng, max_points=4)
        f = continuation_chain_map(fc)
        rep = verify_les_exactness(f)
        assert rep.exact, str(rep)


def test_les_ranks_against_fraction_oracle():
    # dims reported for source/target/cone must match independent Fraction ranks
    rng = random.Random(41)
    from morsecjs.continuation import random_flow_continuation, continuation_chain_map
    from morsecjs.flowcat import morse_complex

    fc = random_flow_continuation(rng, max_points=4)
    f = continuation_chain_map(fc)
    cone = mapping_cone(f)
    rep = verify_les_exactness(f)
    by = {(n.space, n.degree): n for n in rep.nodes}
    for C, name in [(f.source, "source"), (f.target, "target"), (cone, "cone")]:
        for k in cone.degrees():
            want = (
                C.rank(k)
                - fraction_rank(C.differential(k).to_lists() or [[]])
                - fraction_rank(C.differential(k + 1).to_lists() or [[]])
            )
            node = by.get((name, k))
            if node is not None:
                assert node.dim == want


# --- misc -----------------------------------------------------------------------


def test_matrix_rejects_bad_entry_count():
    with pytest.raises(ShapeError):
        IntegerMatrix(2, 2, (1, 2, 3))


def test_empty_complex_round_trips():
    C = ChainComplex.empty()
    assert verify_complex(C) == []
    H = homology(C)
    assert H.euler_characteristic() == 0
    assert isinstance(H, HomologySummary)
