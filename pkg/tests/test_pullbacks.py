"""Tube covers, classifying maps, pullbacks, the reconstruction check, the
cover homotopy, and the equivariant factorization."""

import numpy as np
import pytest

from finclass.classifying import build_B, build_E
from finclass.finspace import discrete, sierpinski
from finclass.groups import (
    all_subgroups,
    builtin_group,
    class_representatives,
    coset_space,
    full_subgroup,
    trivial_subgroup,
)
from finclass.gspaces import (
    GSpace,
    coset_gspace,
    product_with_space,
    translation_gspace,
)
from finclass.pullbacks import (
    CoverError,
    CoverFailure,
    classifying_map,
    cover_kind,
    equivariant_factorization,
    find_tube_cover,
    homotopy_phi,
    homotopy_quotient_filtered,
    lands_in_isovariant_part,
    pullback,
    validate_chart,
    verify_psi,
)

from conftest import cone_gspace


def triv(G):
    return trivial_subgroup(G)


class TestFindTubeCover:
    def test_translation_single_tube(self):
        G = builtin_group("Z4")
        X = translation_gspace(G)
        charts = find_tube_cover(X, [triv(G)])
        assert len(charts) == 1
        assert charts[0].tube == frozenset(range(4))
        assert len(charts[0].slice_points) == 1

    def test_recovers_standard_tubes_on_E2(self):
        G = builtin_group("Z2")
        E = build_E(G, [triv(G)], 2)
        X = E.to_gspace()
        charts = find_tube_cover(X, [triv(G)])
        assert len(charts) == 2
        got = sorted(tuple(sorted(c.tube)) for c in charts)
        d = E.digits(E.all_codes())
        std = sorted(
            tuple(int(c) for c in E.tube_codes(i, 0)) for i in range(2)
        )
        assert got == std

    def test_failure_witness_at_fixed_point(self):
        G = builtin_group("Z2")
        sp = discrete(3)
        act = np.array([[0, 0], [1, 2], [2, 1]])
        X = GSpace(sp, G, act)
        res = find_tube_cover(X, [triv(G)])
        assert isinstance(res, CoverFailure)
        assert res.point == 0
        assert res.isotropy == (0, 1)

    def test_uncoverable_free_space(self):
        # the 4-point circle with the antipodal action: free, but the
        # vertex orbit admits no trivial-subgroup tube
        G = builtin_group("Z2")
        sp_rel = [(0, 2), (0, 3), (1, 2), (1, 3)]
        from finclass.finspace import space_from_relation

        sp = space_from_relation(4, sp_rel)
        act = np.array([[0, 1], [1, 0], [2, 3], [3, 2]])
        X = GSpace(sp, G, act)
        assert all(X.isotropy(x).order == 1 for x in range(4))
        res = find_tube_cover(X, [triv(G)])
        assert isinstance(res, CoverFailure)

    def test_charts_validate(self, gspace_corpus):
        for name, X, fam in gspace_corpus:
            charts = find_tube_cover(X, fam)
            assert not isinstance(charts, CoverFailure), name
            for chart in charts:
                assert validate_chart(X, chart)["ok"], name

    def test_per_orbit_cover(self):
        G = builtin_group("Z3")
        E = build_E(G, [triv(G)], 2)
        X = E.to_gspace()
        fine = find_tube_cover(X, [triv(G)], per_orbit=True)
        assert len(fine) == len(X.orbits())
        assert cover_kind(X, fine) == "isovariant"


class TestCoverKind:
    def test_isovariant_on_corpus(self, gspace_corpus):
        for name, X, fam in gspace_corpus:
            charts = find_tube_cover(X, fam)
            assert cover_kind(X, charts) == "isovariant", name

    def test_free_space_trivial_tubes(self):
        G = builtin_group("S3")
        X = translation_gspace(G)
        charts = find_tube_cover(X, [triv(G)])
        assert cover_kind(X, charts) == "isovariant"

    def test_plain_cover_detected(self):
        # covering a free space by a full-subgroup tube is not isovariant
        G = builtin_group("Z2")
        X = translation_gspace(G)
        charts = find_tube_cover(X, [full_subgroup(G)])
        assert not isinstance(charts, CoverFailure)
        assert cover_kind(X, charts) == "plain"

    def test_charts_must_cover(self):
        G = builtin_group("Z2")
        E = build_E(G, [triv(G)], 2)
        X = E.to_gspace()
        charts = find_tube_cover(X, [triv(G)])
        with pytest.raises(CoverError):
            cover_kind(X, charts[:1])

    def test_never_approximate_only_for_discrete_groups(self, gspace_corpus):
        # the approximate and isovariant conditions coincide for finite
        # discrete groups, so the middle verdict cannot occur
        kinds = set()
        for name, X, fam in gspace_corpus:
            charts = find_tube_cover(X, fam)
            kinds.add(cover_kind(X, charts))
        G = builtin_group("Z2")
        X = translation_gspace(G)
        kinds.add(cover_kind(X, find_tube_cover(X, [full_subgroup(G)])))
        assert "approximate-only" not in kinds
        assert kinds == {"isovariant", "plain"}


class TestClassifyingMap:
    def test_translation_constant_f(self):
        G = builtin_group("Z3")
        X = translation_gspace(G)
        charts = find_tube_cover(X, [triv(G)])
        data = classifying_map(X, charts, [triv(G)])
        assert data.ok
        assert data.orbit_space.n == 1  # f is constant
        # F sends g to the coset 1.g, a single nonzero digit
        digits = data.E.digits(data.F_codes)
        assert (digits[:, 0] == np.arange(1, G.n + 1)).any() or digits[:, 0].all()

    def test_E2_self_classification_identity(self):
        G = builtin_group("Z2")
        E = build_E(G, [triv(G)], 2)
        X = E.to_gspace()
        charts = find_tube_cover(X, [triv(G)])
        data = classifying_map(X, charts, [triv(G)])
        assert (data.F_codes == np.arange(E.n)).all()

    def test_fixed_point_chart_lands_in_point_coset(self):
        G = builtin_group("Z2")
        X = cone_gspace(translation_gspace(G))
        fam = [triv(G), full_subgroup(G)]
        charts = find_tube_cover(X, fam)
        data = classifying_map(X, charts, fam)
        assert data.ok
        # the conepoint's coordinate in its (G)-chart is the single coset G.G
        cone_digits = data.E.digits(data.F_codes[[0]])[0]
        fullblock = [d + 1 for d in data.E.cosets.block(1)]
        assert any(d in fullblock for d in cone_digits)

    def test_isovariant_cover_lands_in_isovariant_part(self, gspace_corpus):
        for name, X, fam in gspace_corpus:
            if X.n > 60:
                continue
            charts = find_tube_cover(X, fam)
            data = classifying_map(X, charts, fam)
            assert data.ok, name
            assert lands_in_isovariant_part(data), name

    def test_induced_map_is_stratified(self, gspace_corpus):
        # the orbit-type stratification is preserved by the induced map
        from finclass.pullbacks import classifying_quotient_stratified

        for name, X, fam in gspace_corpus:
            if X.n > 40:
                continue
            charts = find_tube_cover(X, fam)
            data = classifying_map(X, charts, fam)
            assert classifying_quotient_stratified(X, data, fam), name


class TestPullback:
    def test_constant_map_gives_free_orbit(self):
        G = builtin_group("S3")
        E = build_E(G, [triv(G)], 1)
        base = discrete(1)
        bundle = pullback(base, np.asarray([0]), E)
        assert bundle.total.n == 6
        assert bundle.validate()["ok"]
        assert all(bundle.total.isotropy(x).order == 1 for x in range(6))

    def test_pullback_along_identity_recovers_E(self):
        G = builtin_group("Z2")
        E = build_E(G, [triv(G)], 2)
        B, reps = build_B(E)
        bundle = pullback(B, reps, E)
        assert bundle.total.n == E.n
        X = E.to_gspace()
        # codes of the pullback total biject with E respecting structure
        codes = bundle.e_codes
        perm = np.argsort(codes)
        assert (np.sort(codes) == np.arange(E.n)).all()
        m = np.empty(E.n, dtype=int)
        m[codes] = np.arange(E.n)
        assert (bundle.total.space.leq == X.space.leq[np.ix_(codes, codes)]).all()

    def test_sierpinski_base_two_comparable_orbits(self):
        G = builtin_group("Z2")
        E = build_E(G, [triv(G)], 2)
        B, reps = build_B(E)
        # find comparable orbit pair: a mixed orbit below a full orbit
        pair = None
        for a in range(B.n):
            for b in range(B.n):
                if a != b and B.le(a, b):
                    pair = (a, b)
        assert pair is not None
        base = sierpinski()
        bundle = pullback(base, reps[[pair[0], pair[1]]], E)
        assert bundle.total.n == 4
        rep = bundle.validate()
        assert rep["ok"] and rep["free"]

    def test_discontinuous_base_map_rejected(self):
        G = builtin_group("Z2")
        E = build_E(G, [triv(G)], 2)
        B, reps = build_B(E)
        pair = None
        for a in range(B.n):
            for b in range(B.n):
                if a != b and B.le(a, b) and not B.le(b, a):
                    pair = (a, b)
        with pytest.raises(CoverError, match="not continuous"):
            pullback(sierpinski(), reps[[pair[1], pair[0]]], E)


class TestVerifyPsi:
    def test_translation(self):
        G = builtin_group("S3")
        X = translation_gspace(G)
        charts = find_tube_cover(X, [triv(G)])
        assert verify_psi(X, charts, [triv(G)])["ok"]

    def test_E2_self(self):
        G = builtin_group("Z2")
        X = build_E(G, [triv(G)], 2).to_gspace()
        charts = find_tube_cover(X, [triv(G)])
        assert verify_psi(X, charts, [triv(G)])["ok"]

    def test_corpus(self, gspace_corpus):
        for name, X, fam in gspace_corpus:
            charts = find_tube_cover(X, fam)
            report = verify_psi(X, charts, fam)
            assert report["ok"], (name, report)


class TestHomotopy:
    def test_translation_both_trivial_covers(self):
        G = builtin_group("Z2")
        X = translation_gspace(G)
        fam = [triv(G)]
        charts = find_tube_cover(X, fam)
        hom = homotopy_phi(X, charts, charts, fam)
        assert all(hom.checks.values()), hom.checks
        # at the particular point both coordinates are nonzero
        mid = hom.phi_codes[1::3]
        digits = hom.E.digits(mid)
        assert (digits != 0).all()

    def test_identical_covers_swap_symmetry(self):
        G = builtin_group("Z3")
        X = coset_gspace(coset_space(G, [triv(G)]))
        fam = [triv(G)]
        charts = find_tube_cover(X, fam)
        hom = homotopy_phi(X, charts, charts, fam)
        k = len(charts)
        dm = hom.E.digits(hom.phi_codes[0::3])
        dp = hom.E.digits(hom.phi_codes[2::3])
        assert (dm[:, :k] == dp[:, k:]).all()
        assert (dm[:, k:] == 0).all() and (dp[:, :k] == 0).all()

    def test_E2_full_covers(self):
        G = builtin_group("Z2")
        fam = [triv(G)]
        X = build_E(G, fam, 2).to_gspace()
        greedy = find_tube_cover(X, fam)
        fine = find_tube_cover(X, fam, per_orbit=True)
        hom = homotopy_phi(X, greedy, fine, fam)
        assert all(hom.checks.values()), hom.checks
        assert homotopy_quotient_filtered(X, hom, fam)

    def test_quotient_filtered_on_corpus_pairs(self, gspace_corpus):
        pairs = 0
        for name, X, fam in gspace_corpus:
            if X.n > 30:
                continue
            a = find_tube_cover(X, fam)
            b = find_tube_cover(X, fam, per_orbit=True)
            if (len(a) + len(b)) * np.log(1 + len(fam)) > 12:
                continue  # keep the combined index count small
            hom = homotopy_phi(X, a, b, fam)
            assert all(hom.checks.values()), (name, hom.checks)
            assert homotopy_quotient_filtered(X, hom, fam), name
            pairs += 1
        assert pairs >= 8


class TestFactorization:
    def _v4_instance(self):
        G = builtin_group("Z2xZ2")
        subs = all_subgroups(G)
        Pi = next(H for H in subs if H.order == 2
                  and all(G.label(m).endswith(",0)") for m in H.members))
        K = next(H for H in subs if H.order == 2
                 and all(G.label(m).startswith("(0,") for m in H.members))
        return G, Pi, K

    def test_v4_second_factor_family(self):
        G, Pi, K = self._v4_instance()
        X = product_with_space(coset_gspace(coset_space(G, [K])), discrete(2))
        charts = find_tube_cover(X, [K])
        assert cover_kind(X, charts) == "isovariant"
        report = equivariant_factorization(X, Pi, charts, [K])
        assert report["ok"], report
        assert report["square_is_pullback"]
        assert report["pi_free"] and report["pi_bundle_covered"]

    def test_v4_translation_trivial_family(self):
        G, Pi, K = self._v4_instance()
        X = translation_gspace(G)
        charts = find_tube_cover(X, [triv(G)])
        report = equivariant_factorization(X, Pi, charts, [triv(G)])
        assert report["ok"], report

    def test_pi_trivial_degenerates_to_psi(self):
        G = builtin_group("S3")
        fam = class_representatives(G)
        X = coset_gspace(coset_space(G, fam))
        charts = find_tube_cover(X, fam)
        report = equivariant_factorization(X, triv(G), charts, fam)
        assert report["ok"]
        assert verify_psi(X, charts, fam)["ok"]

    def test_family_meeting_pi_rejected(self):
        G, Pi, K = self._v4_instance()
        X = translation_gspace(G)
        charts = find_tube_cover(X, [Pi])
        with pytest.raises(CoverError, match="meets Pi at element"):
            equivariant_factorization(X, Pi, charts, [Pi])

    def test_non_normal_pi_rejected(self):
        G = builtin_group("S3")
        H2 = next(S for S in all_subgroups(G) if S.order == 2)
        X = translation_gspace(G)
        charts = find_tube_cover(X, [triv(G)])
        with pytest.raises(CoverError, match="normal"):
            equivariant_factorization(X, H2, charts, [triv(G)])

    def test_non_isovariant_cover_rejected(self):
        G, Pi, K = self._v4_instance()
        X = translation_gspace(G)
        charts = find_tube_cover(X, [K])  # plain cover of a free space
        with pytest.raises(CoverError, match="isovariant"):
            equivariant_factorization(X, Pi, charts, [K])

    def test_z6_factorization(self):
        G = builtin_group("Z6")
        subs = all_subgroups(G)
        Pi = next(H for H in subs if H.order == 2)
        K = next(H for H in subs if H.order == 3)
        X = coset_gspace(coset_space(G, [K]))
        charts = find_tube_cover(X, [K])
        report = equivariant_factorization(X, Pi, charts, [K])
        assert report["ok"], report
