"""Finite spaces: duality, continuity, constructions, weight, canonical form."""

import itertools

import numpy as np
import pytest

from finclass.finspace import (
    FinSpace,
    FinSpaceError,
    SpaceMap,
    all_preorders,
    bi_sierpinski,
    brute_force_isomorphism,
    canonical_form,
    discrete,
    indiscrete_cone,
    is_continuous,
    is_continuous_via_opens,
    opens_of,
    product,
    quotient,
    sierpinski,
    space_from_relation,
    specialization_of_topology,
    subspace,
    weight,
)


def small_spaces(max_n=3):
    return [FinSpace(rel, validate=False) for n in range(max_n + 1)
            for rel in all_preorders(n)]


def canonical_representatives(n):
    reps = {}
    for rel in all_preorders(n):
        X = FinSpace(rel, validate=False)
        reps.setdefault(canonical_form(X).certificate, X)
    return list(reps.values())


class TestConstruction:
    def test_sierpinski_from_relation(self):
        X = space_from_relation(2, [(0, 1)])
        opens, base = opens_of(X)
        assert [sorted(o) for o in opens] == [[], [1], [0, 1]]

    def test_chain_closure(self):
        X = space_from_relation(3, [(0, 1), (1, 2)])
        assert X.le(0, 2)

    def test_empty_pairs_discrete(self):
        X = space_from_relation(3, [])
        assert X == discrete(3)

    def test_out_of_range_pair(self):
        with pytest.raises(FinSpaceError):
            space_from_relation(2, [(0, 5)])


class TestOpens:
    def test_bi_sierpinski_opens(self):
        opens, _ = opens_of(bi_sierpinski())
        # labels: -1 -> 0, 0 -> 1, +1 -> 2; particular point is "0"
        assert [sorted(o) for o in opens] == [[], [1], [0, 1], [1, 2], [0, 1, 2]]

    def test_discrete_two_points(self):
        opens, _ = opens_of(discrete(2))
        assert len(opens) == 4

    def test_minimal_base(self):
        _, base = opens_of(sierpinski())
        assert base == [frozenset({1}), frozenset({0, 1})]


class TestSpecializationOfTopology:
    def test_roundtrip_sierpinski(self):
        opens, _ = opens_of(sierpinski())
        assert specialization_of_topology(opens) == sierpinski()

    def test_indiscrete_two_points(self):
        X = specialization_of_topology([frozenset(), frozenset({0, 1})])
        assert X.leq.all()
        assert not X.is_t0()

    def test_bi_sierpinski_relation(self):
        opens, _ = opens_of(bi_sierpinski())
        X = specialization_of_topology(opens)
        assert X.le(0, 1) and X.le(2, 1)
        assert not X.le(1, 0) and not X.le(1, 2)

    def test_rejects_non_topology(self):
        with pytest.raises(FinSpaceError):
            specialization_of_topology([frozenset(), frozenset({0}), frozenset({1})])


class TestContinuity:
    def test_identity_continuous(self):
        for X in (sierpinski(), bi_sierpinski(), discrete(3)):
            assert is_continuous(SpaceMap(X, X, tuple(range(X.n))))

    def test_swap_on_sierpinski_discontinuous(self):
        f = SpaceMap(sierpinski(), sierpinski(), (1, 0))
        assert not is_continuous(f)
        assert not is_continuous_via_opens(f)

    @pytest.mark.parametrize("dom,cod", [
        (bi_sierpinski(), sierpinski()),
        (sierpinski(), bi_sierpinski()),
    ])
    def test_exhaustive_agreement_small(self, dom, cod):
        for vals in itertools.product(range(cod.n), repeat=dom.n):
            f = SpaceMap(dom, cod, vals)
            assert is_continuous(f) == is_continuous_via_opens(f)


class TestDualityExhaustive:
    def test_roundtrip_all_preorders_up_to_4(self):
        count = 0
        for n in range(5):
            for rel in all_preorders(n):
                X = FinSpace(rel, validate=False)
                opens, _ = opens_of(X)
                assert specialization_of_topology(opens) == X
                count += 1
        assert count == 1 + 1 + 4 + 29 + 355  # labeled topologies on 0..4 points

    def test_monotone_iff_continuous_labeled_up_to_3(self):
        spaces = small_spaces(3)
        for X in spaces:
            for Y in spaces:
                if X.n == 0:
                    continue
                for vals in itertools.product(range(Y.n), repeat=X.n):
                    f = SpaceMap(X, Y, vals)
                    assert is_continuous(f) == is_continuous_via_opens(f)

    def test_monotone_iff_continuous_4point_representatives(self):
        # the property is isomorphism-invariant; the 33 canonical classes
        # of 4-point spaces paired with all small spaces are exhaustive
        reps4 = canonical_representatives(4)
        assert len(reps4) == 33  # unlabeled topologies on 4 points
        others = small_spaces(2) + reps4
        for X in reps4:
            for Y in others + [X]:
                if Y.n == 0:
                    continue
                assert _agreement_all_functions(X, Y)
            for Y in reps4:
                assert _agreement_all_functions(Y, X)


def brute_opens(X):
    """Oracle: filter all point subsets for the up-set property."""
    out = []
    for bits in range(1 << X.n):
        S = frozenset(i for i in range(X.n) if bits >> i & 1)
        if X.is_open(S):
            out.append(S)
    return sorted(out, key=lambda s: (len(s), sorted(s)))


def _agreement_all_functions(X, Y):
    """Vectorized check over every function X -> Y that monotonicity agrees
    with the definitional open-preimage continuity."""
    funcs = np.array(list(itertools.product(range(Y.n), repeat=X.n)), dtype=int)
    mono = np.ones(len(funcs), dtype=bool)
    for i, j in zip(*np.nonzero(X.leq)):
        mono &= Y.leq[funcs[:, i], funcs[:, j]]
    x_open_bits = {
        sum(1 << p for p in O) for O in brute_opens(X)
    }
    weights = 1 << np.arange(X.n)
    cont = np.ones(len(funcs), dtype=bool)
    for U in brute_opens(Y):
        in_u = np.isin(funcs, list(U)) if U else np.zeros_like(funcs, dtype=bool)
        bits = in_u @ weights
        cont &= np.isin(bits, list(x_open_bits))
    return bool((mono == cont).all())


class TestConstructions:
    def test_opens_match_brute_force(self):
        for X in small_spaces(3):
            opens, _ = opens_of(X)
            assert opens == brute_opens(X)

    def test_product_of_sierpinski(self):
        X = product(sierpinski(), sierpinski())
        assert X.n == 4
        for (a, b), (c, d) in itertools.product(
            itertools.product(range(2), repeat=2), repeat=2
        ):
            expected = (a == c or (a, c) == (0, 1)) and (b == d or (b, d) == (0, 1))
            assert X.le(a * 2 + b, c * 2 + d) == expected

    def test_product_opens_against_rectangle_oracle(self):
        # every open of the product is a union of open rectangles and back
        for X in small_spaces(2):
            for Y in small_spaces(2):
                if X.n * Y.n == 0 or X.n * Y.n > 6:
                    continue
                P = product(X, Y)
                ox, _ = opens_of(X)
                oy, _ = opens_of(Y)
                rects = [
                    frozenset(i * Y.n + j for i in U for j in V)
                    for U in ox for V in oy
                ]
                opens_p = {frozenset(o) for o in opens_of(P)[0]}
                # closure of rectangles under union, computed by fixpoint
                by_union = {frozenset()}
                frontier = list(rects)
                while frontier:
                    r = frontier.pop()
                    new = {r | u for u in by_union} | {r}
                    for s in new:
                        if s not in by_union:
                            by_union.add(s)
                            frontier.append(s)
                assert opens_p == by_union

    def test_subspace_of_bi_sierpinski_is_discrete(self):
        S = subspace(bi_sierpinski(), [0, 2])
        assert S == discrete(2)

    def test_subspace_opens_oracle(self):
        for X in small_spaces(3):
            if X.n < 2:
                continue
            S = [0, X.n - 1]
            sub = subspace(X, S)
            expected = sorted(
                {frozenset(S.index(p) for p in (O & set(S))) for O in brute_opens(X)},
                key=lambda s: (len(s), sorted(s)),
            )
            assert opens_of(sub)[0] == expected

    def test_quotient_to_point(self):
        Q, proj = quotient(discrete(2), [[0, 1]])
        assert Q.n == 1 and proj.values == (0, 0)

    def test_quotient_opens_oracle(self):
        # quotient opens are exactly the block sets with open preimage
        for X in small_spaces(3):
            if X.n != 3:
                continue
            Q, proj = quotient(X, [[0, 1], [2]])
            expected = []
            for bits in range(1 << Q.n):
                V = frozenset(b for b in range(Q.n) if bits >> b & 1)
                pre = frozenset(p for p in range(X.n) if proj.values[p] in V)
                if X.is_open(pre):
                    expected.append(V)
            expected.sort(key=lambda s: (len(s), sorted(s)))
            assert opens_of(Q)[0] == expected

    def test_invalid_partition(self):
        with pytest.raises(FinSpaceError):
            quotient(discrete(2), [[0]])


class TestIndiscreteCone:
    def test_cone_of_point_is_sierpinski(self):
        assert indiscrete_cone(discrete(1)) == sierpinski()

    def test_cone_of_two_points(self):
        X = indiscrete_cone(discrete(2))
        assert X.n == 3
        assert X.is_open({1}) and X.is_open({2})
        assert not X.is_open({0})
        assert X.le(0, 1) and X.le(0, 2)
        assert not X.le(1, 0)

    def test_cone_of_empty(self):
        assert indiscrete_cone(discrete(0)).n == 1

    def test_cone_opens_are_old_opens_plus_whole(self):
        for X in small_spaces(3):
            C = indiscrete_cone(X)
            expected = sorted(
                [frozenset(p + 1 for p in O) for O in brute_opens(X)]
                + [frozenset(range(X.n + 1))],
                key=lambda s: (len(s), sorted(s)),
            )
            assert opens_of(C)[0] == expected


class TestWeight:
    def test_discrete(self):
        assert weight(discrete(5)) == 5

    def test_sierpinski(self):
        assert weight(sierpinski()) == 2

    def test_circle_face_space(self):
        X = space_from_relation(4, [(0, 2), (1, 2), (0, 3), (1, 3)])
        assert weight(X) == 4

    def test_weight_bounds(self):
        for X in small_spaces(3):
            assert weight(X) <= X.n
            # weight counts distinct minimal neighborhoods, an honest base
            opens, base = opens_of(X)
            assert weight(X) == len(base)


class TestCanonicalForm:
    def test_relabelings_of_bi_sierpinski(self):
        X = bi_sierpinski()
        Y = space_from_relation(3, [(1, 0), (2, 0)])  # same shape, other labels
        assert canonical_form(X).certificate == canonical_form(Y).certificate

    def test_sierpinski_vs_discrete(self):
        assert canonical_form(sierpinski()).certificate != canonical_form(discrete(2)).certificate

    def test_exhaustive_4point_cross_check(self):
        # canonical certificates agree exactly when brute-force search
        # finds an isomorphism, over every pair of 4-point preorders
        spaces = [FinSpace(rel, validate=False) for rel in all_preorders(4)]
        certs = [canonical_form(X).certificate for X in spaces]
        classes = {}
        for X, c in zip(spaces, certs):
            classes.setdefault(c, []).append(X)
        assert len(classes) == 33
        reps = [v[0] for v in classes.values()]
        # within a class: brute force must succeed against the representative
        for c, members in classes.items():
            rep = members[0]
            for X in members[1:]:
                assert brute_force_isomorphism(rep, X) is not None
        # across classes: brute force must fail
        for a in range(len(reps)):
            for b in range(a + 1, len(reps)):
                assert brute_force_isomorphism(reps[a], reps[b]) is None

    def test_certificate_is_permutation_invariant(self):
        rng = np.random.default_rng(1)
        for rel in itertools.islice(all_preorders(4), 40):
            X = FinSpace(rel, validate=False)
            perm = rng.permutation(4)
            Y = FinSpace(rel[np.ix_(perm, perm)], validate=False)
            assert canonical_form(X).certificate == canonical_form(Y).certificate

    def test_canonical_space_isomorphic_to_input(self):
        X = space_from_relation(4, [(0, 2), (1, 2), (3, 1)])
        cf = canonical_form(X)
        assert brute_force_isomorphism(X, cf.space) is not None


class TestJson:
    def test_roundtrip(self):
        X = bi_sierpinski()
        Y = FinSpace.from_json(X.to_json())
        assert X == Y and Y.labels == X.labels

    def test_map_roundtrip(self):
        f = SpaceMap(sierpinski(), bi_sierpinski(), (0, 1))
        g = SpaceMap.from_json(f.to_json())
        assert g.values == f.values and g.dom == f.dom and g.cod == f.cod
