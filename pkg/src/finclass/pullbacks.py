"""Tube covers of finite G-spaces, classifying maps, pullback bundles, and
the instance checks for the classifying, homotopy, and factorization
theorems."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classifying import ClassifyingSpace, build_E
from .finspace import FinSpace, SpaceMap, bi_sierpinski
from .groups import CosetSpace, FinGroup, Subgroup, are_conjugate
from .gspaces import (
    FilteredSpace,
    GSpace,
    induced_gspace,
    orbit_space,
    orbit_type_filtration,
    quotient_gspace_by_normal,
    restrict_action,
)


class CoverError(ValueError):
    pass


@dataclass(frozen=True)
class TubeChart:
    """An F-tube chart: an open invariant tube T with a continuous
    equivariant retraction-to-cosets q: T -> H\\G, whose identity fiber is
    the slice."""

    H: Subgroup
    fam_index: int
    cosets: CosetSpace            # H\G for this chart's subgroup
    tube: frozenset
    q: tuple                      # per ambient point: coset index, -1 outside

    @property
    def slice_points(self) -> frozenset:
        idp = self.cosets.identity_point(0)
        return frozenset(x for x in self.tube if self.q[x] == idp)

    def coset_frozenset(self, x) -> frozenset:
        return self.cosets.points[self.q[x]][1]


@dataclass(frozen=True)
class CoverFailure:
    point: int
    isotropy: tuple
    reasons: tuple

    def __bool__(self):
        return False


def _saturate_up_set(X: GSpace, x: int) -> frozenset:
    up = np.flatnonzero(X.space.leq[x])
    pts = set()
    for p in up:
        pts.update(int(v) for v in X.act[p])
    return frozenset(pts)


def _components(X: GSpace, pts: frozenset) -> list[list[int]]:
    """Connected components of the comparability graph on a point set."""
    pts = sorted(pts)
    pos = {p: k for k, p in enumerate(pts)}
    parent = list(range(len(pts)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    leq = X.space.leq
    for a, p in enumerate(pts):
        for q in pts:
            if q > p and (leq[p, q] or leq[q, p]):
                ra, rb = find(a), find(pos[q])
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
    comps: dict[int, list[int]] = {}
    for a, p in enumerate(pts):
        comps.setdefault(find(a), []).append(p)
    return [comps[r] for r in sorted(comps)]


def _search_chart(X: GSpace, tube: frozenset, H: Subgroup, fam_index: int,
                  cosets: CosetSpace):
    """Find a continuous equivariant q: tube -> H\\G, or (None, reason).

    q must be constant on comparability components and equivariant, so a
    chart exists iff every component orbit admits a coset fixed by the
    component stabilizer.
    """
    G = X.group
    comps = _components(X, tube)
    comp_of = {}
    for ci, comp in enumerate(comps):
        for p in comp:
            comp_of[p] = ci
    q = [-1] * X.n
    assigned = [False] * len(comps)
    for ci, comp in enumerate(comps):
        if assigned[ci]:
            continue
        c0 = comp[0]
        stab_mask = 0
        comp_set = set(comp)
        for g in range(G.n):
            if int(X.act[c0, g]) in comp_set:
                stab_mask |= 1 << g
        choice = None
        for c in range(cosets.n):
            if stab_mask & ~cosets.stabilizers[c].mask() == 0:
                choice = c
                break
        if choice is None:
            return None, (
                f"component of point {c0} has stabilizer mask {stab_mask:#x} "
                f"fixed by no coset of the subgroup {tuple(sorted(H.members))}"
            )
        for g in range(G.n):
            img = comp_of[int(X.act[c0, g])]
            val = int(cosets.act[choice, g])
            if assigned[img]:
                if q[comps[img][0]] != val:
                    return None, "inconsistent equivariant propagation"
            else:
                assigned[img] = True
                for p in comps[img]:
                    q[p] = val
    return tuple(q), None


def validate_chart(X: GSpace, chart: TubeChart) -> dict:
    """Full check of the chart axioms, including that mu: S x_H G -> T is a
    G-homeomorphism."""
    G = X.group
    tube = sorted(chart.tube)
    report = {}
    report["tube_open"] = X.space.is_open(tube)
    report["tube_invariant"] = all(
        int(X.act[p, g]) in chart.tube for p in tube for g in range(G.n)
    )
    report["q_equivariant"] = all(
        chart.q[X.act[p, g]] == chart.cosets.act[chart.q[p], g]
        for p in tube for g in range(G.n)
    )
    report["q_continuous"] = all(
        chart.q[p] == chart.q[r]
        for p in tube for r in tube
        if X.space.leq[p, r]
    )
    # mu: S x_H G -> T as an explicit G-homeomorphism
    s_pts = sorted(chart.slice_points)
    Hgrp, order = chart.H.as_group()
    pos = {p: k for k, p in enumerate(s_pts)}
    act = np.empty((len(s_pts), Hgrp.n), dtype=int)
    ok_slice = True
    for k, p in enumerate(s_pts):
        for hi, h in enumerate(order):
            img = int(X.act[p, h])
            if img not in pos:
                ok_slice = False
                break
            act[k, hi] = pos[img]
    report["slice_H_invariant"] = ok_slice
    if not ok_slice:
        report["mu_homeomorphism"] = False
        report["ok"] = False
        return report
    from .finspace import subspace

    S = GSpace(subspace(X.space, s_pts), Hgrp, act, validate=False)
    ind, points, coset_reps = induced_gspace(S, chart.H, order)
    mu = np.empty(ind.n, dtype=int)
    for j, (s, c) in enumerate(points):
        mu[j] = int(X.act[s_pts[s], coset_reps[c]])
    bij = len(set(mu.tolist())) == ind.n == len(tube) and set(mu.tolist()) == set(tube)
    equiv = bij and all(
        (mu[ind.act[:, g]] == X.act[mu, g]).all() for g in range(G.n)
    )
    order_iso = bij and bool(
        (ind.space.leq == X.space.leq[np.ix_(mu, mu)]).all()
    )
    report["mu_homeomorphism"] = bool(bij and equiv and order_iso)
    report["ok"] = all(
        report[k] for k in (
            "tube_open", "tube_invariant", "q_equivariant", "q_continuous",
            "slice_H_invariant", "mu_homeomorphism",
        )
    )
    return report


def find_tube_cover(X: GSpace, family, per_orbit: bool = False):
    """A cover of X by validated F-tube charts, or a failure witness.

    Charts with H conjugate to the local isotropy are preferred, so the
    result is isovariant whenever an isovariant cover exists; per orbit a
    larger tube is preferred.  With ``per_orbit`` every orbit contributes
    its own chart (a finer, more redundant cover).  Failure returns a
    CoverFailure carrying the uncoverable point and per-subgroup reasons.
    """
    G = X.group
    family = list(family)
    coset_cache = [CosetSpace(G, [H]) for H in family]
    orbits = X.orbits()
    tubes0 = [_saturate_up_set(X, orb[0]) for orb in orbits]
    if per_orbit:
        order = list(range(len(orbits)))
    else:
        order = sorted(range(len(orbits)), key=lambda k: (-len(tubes0[k]), orbits[k][0]))
    iso = [X.isotropy(orb[0]) for orb in orbits]
    satisfied = [False] * len(orbits)
    covered = [False] * len(orbits)
    orbit_of = {}
    for k, orb in enumerate(orbits):
        for p in orb:
            orbit_of[p] = k
    charts: list[TubeChart] = []

    def record(chart: TubeChart):
        charts.append(chart)
        touched = {orbit_of[p] for p in chart.tube}
        for k in touched:
            covered[k] = True
            if are_conjugate(iso[k], chart.H) is not None:
                satisfied[k] = True

    for k in order:
        if satisfied[k] and not per_orbit:
            continue
        x = orbits[k][0]
        tube = tubes0[k]
        cands = sorted(
            range(len(family)),
            key=lambda fi: (are_conjugate(iso[k], family[fi]) is None, fi),
        )
        reasons = []
        found = False
        for fi in cands:
            q, reason = _search_chart(X, tube, family[fi], fi, coset_cache[fi])
            if q is not None:
                chart = TubeChart(family[fi], fi, coset_cache[fi], tube, q)
                rep = validate_chart(X, chart)
                if not rep["ok"]:
                    raise CoverError(f"chart validation failed unexpectedly: {rep}")
                record(chart)
                found = True
                break
            reasons.append((fi, reason))
        if not found and not covered[k]:
            return CoverFailure(x, iso[k].key(), tuple(reasons))
    if not all(covered):
        k = covered.index(False)
        return CoverFailure(orbits[k][0], iso[k].key(), ("uncovered orbit",))
    return charts


def cover_kind(X: GSpace, charts) -> str:
    """Classify a tube cover: isovariant, approximate-only, or plain.

    For finite discrete groups the approximate condition collapses to the
    isovariant one (the singleton {G_x} is itself an open neighborhood);
    the two are computed independently and must agree.
    """
    G = X.group
    union = set()
    for c in charts:
        union |= c.tube
    if union != set(range(X.n)):
        raise CoverError("charts do not cover the space")
    isovariant = True
    approximate = True
    for x in range(X.n):
        Gx = X.isotropy(x)
        iso_here = any(
            x in c.tube and are_conjugate(Gx, c.H) is not None for c in charts
        )
        # approximate at the minimal neighborhood O = G_x of the isotropy:
        # some conjugate g^-1 H g must be squeezed between G_x and O
        approx_here = any(
            x in c.tube and any(
                Gx.members <= c.H.conjugate(G.inv[g]).members <= Gx.members
                for g in range(G.n)
            )
            for c in charts
        )
        if iso_here != approx_here:
            raise CoverError("approximate/isovariant collapse failed for a finite group")
        isovariant &= iso_here
        approximate &= approx_here
    if isovariant:
        return "isovariant"
    if approximate:
        return "approximate-only"
    return "plain"


# -- the classifying map ----------------------------------------------------


@dataclass
class ClassifyingMapData:
    """The equivariant classifying map F: X -> E and induced f: X/G -> B."""

    E: ClassifyingSpace
    X: GSpace
    charts: list
    F_codes: np.ndarray           # per point of X, a code of E
    orbit_space: FinSpace         # X/G
    proj: SpaceMap                # X -> X/G
    orbits: list
    f_codes: np.ndarray           # per orbit of X, the E-code F(rep)
    checks: dict

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def classifying_map(X: GSpace, charts, family, budget=None,
                    allow_conjugates=True) -> ClassifyingMapData:
    """The coordinate classifying map from a tube cover: coordinate i is
    q_i on the tube T_i and the conepoint outside it; kappa = len(charts).

    The index count is dictated by the cover, so the target is built
    without a point budget unless one is passed; it is never materialized
    densely here."""
    G = X.group
    family = list(family)
    kappa = len(charts)
    if kappa == 0:
        raise CoverError("need at least one chart")
    E = build_E(G, family, kappa, allow_conjugates=allow_conjugates, budget=budget)
    digits = np.zeros((X.n, kappa), dtype=np.int64)
    for i, chart in enumerate(charts):
        for x in sorted(chart.tube):
            coset = chart.coset_frozenset(x)
            digits[x, i] = E.cosets.index[(chart.fam_index, coset)] + 1
    F_codes = E.codes_from_digits(digits)
    if (F_codes < 0).any():
        raise CoverError("charts do not cover the space")
    checks = {}
    act_F = E.act_matrix(F_codes)
    checks["equivariant"] = bool(
        all((F_codes[X.act[:, g]] == act_F[:, g]).all() for g in range(G.n))
    )
    ii, jj = np.nonzero(X.space.leq)
    checks["continuous"] = bool(E.leq_pairs(F_codes[ii], F_codes[jj]).all()) if len(ii) else True
    Q, proj, orbs = orbit_space(X)
    f_codes = F_codes[[orb[0] for orb in orbs]]
    # continuity of the induced map on orbit spaces
    ok = True
    for a in range(Q.n):
        for b in np.flatnonzero(Q.leq[a]):
            ok &= any(
                E.leq_codes(int(f_codes[a]), int(E.act_codes(np.asarray([f_codes[b]]), g)[0]))
                for g in range(G.n)
            )
    checks["induced_continuous"] = bool(ok)
    return ClassifyingMapData(E, X, list(charts), F_codes, Q, proj, orbs, f_codes, checks)


def lands_in_isovariant_part(data: ClassifyingMapData) -> bool:
    """Whether every value of F has a coordinate realizing its isotropy."""
    E = data.E
    codes = data.F_codes
    masks = E._digit_stab[E.digits(codes)]
    total = E.isotropy_masks(codes)
    return bool((masks == total[:, None]).any(axis=1).all())


def _hit_orbit_filtration(E: ClassifyingSpace, codes: np.ndarray, co):
    """The subspace of E/G spanned by the orbits of the given codes, with
    its orbit-type filtration over the family classes; returns the
    filtered space and the position of each code's orbit."""
    mins = codes.copy()
    for g in range(E.group.n):
        mins = np.minimum(mins, E.act_codes(codes, g))
    reps = np.unique(mins)
    k = len(reps)
    leq = np.zeros((k, k), dtype=bool)
    for g in range(E.group.n):
        leq |= E.leq_matrix(reps, E.act_codes(reps, g))
    space = FinSpace(leq)
    iso_masks = E.isotropy_masks(reps)
    G = E.group
    skeleta = []
    for a in range(co.n):
        H = co.reps[a]
        conj_masks = [H.conjugate(g).mask() for g in range(G.n)]
        skeleta.append(frozenset(
            r for r in range(k)
            if any(int(iso_masks[r]) & cm == cm for cm in conj_masks)
        ))
    filtered = FilteredSpace(space, co.filtration_order(), tuple(skeleta))
    rep_pos = {int(r): i for i, r in enumerate(reps)}
    positions = np.asarray([rep_pos[int(m)] for m in mins])
    return filtered, positions


def classifying_quotient_stratified(X: GSpace, data: ClassifyingMapData,
                                    family) -> bool:
    """Whether the induced map of orbit spaces sends each orbit-type
    stratum into the matching stratum of the classifying orbit space."""
    src, proj, orbs, co = orbit_type_filtration(X, family)
    tgt, positions = _hit_orbit_filtration(data.E, data.f_codes, co)
    f = SpaceMap(src.space, tgt.space, tuple(int(p) for p in positions))
    from .gspaces import is_stratified_map

    return is_stratified_map(f, src, tgt)


# -- pullbacks ---------------------------------------------------------------


@dataclass
class Bundle:
    """A finite principal-bundle datum: total G-space, base, projection."""

    total: GSpace
    base: FinSpace
    proj: SpaceMap
    e_codes: np.ndarray | None = None  # for pullbacks: the E-code per point

    def fibers(self) -> list[list[int]]:
        out = [[] for _ in range(self.base.n)]
        for x in range(self.total.n):
            out[self.proj.values[x]].append(x)
        return out

    def validate(self) -> dict:
        from .finspace import is_continuous

        rep = {}
        rep["proj_continuous"] = is_continuous(self.proj)
        orbs = self.total.orbits()
        rep["proj_constant_on_orbits"] = all(
            len({self.proj.values[p] for p in orb}) == 1 for orb in orbs
        )
        rep["fibers_are_orbits"] = sorted(map(sorted, self.fibers())) == sorted(
            map(sorted, orbs)
        )
        # induced map total/G -> base is a homeomorphism
        Q, _, orbs2 = orbit_space(self.total)
        to_base = [self.proj.values[orb[0]] for orb in orbs2]
        bij = sorted(to_base) == list(range(self.base.n))
        order_ok = bij and all(
            bool(Q.leq[a, b]) == bool(self.base.leq[to_base[a], to_base[b]])
            for a in range(Q.n) for b in range(Q.n)
        )
        rep["orbit_space_homeomorphic_to_base"] = bool(bij and order_ok)
        rep["free"] = all(
            len(orb) == self.total.group.n for orb in orbs
        )
        rep["ok"] = all(v for k, v in rep.items() if k != "free")
        return rep

    def to_json(self) -> dict:
        return {
            "total": self.total.to_json(),
            "base": self.base.to_json(),
            "proj": list(self.proj.values),
        }


def pullback(base: FinSpace, rep_codes, E: ClassifyingSpace) -> Bundle:
    """The pullback bundle of E along a map base -> B = E/G given by orbit
    representative codes per base point."""
    rep_codes = np.asarray(rep_codes, dtype=np.int64)
    if len(rep_codes) != base.n:
        raise CoverError("one orbit representative per base point required")
    # continuity of the base map into B
    for a in range(base.n):
        for b in np.flatnonzero(base.leq[a]):
            if not any(
                E.leq_codes(int(rep_codes[a]), int(E.act_codes(np.asarray([rep_codes[b]]), g)[0]))
                for g in range(E.group.n)
            ):
                raise CoverError(f"base map not continuous into E/G at pair ({a},{b})")
    points: list[tuple[int, int]] = []
    for b in range(base.n):
        for e in sorted(int(c) for c in E.orbit_of(int(rep_codes[b]))):
            points.append((b, e))
    index = {pt: k for k, pt in enumerate(points)}
    n = len(points)
    bs = np.asarray([p[0] for p in points])
    es = np.asarray([p[1] for p in points], dtype=np.int64)
    leq = base.leq[np.ix_(bs, bs)] & E.leq_matrix(es, es)
    labels = [f"({base.label(b)};{E.point_label(e)})" for b, e in points]
    space = FinSpace(leq, labels=labels, validate=False)
    act_e = E.act_matrix(es)
    act = np.empty((n, E.group.n), dtype=int)
    for g in range(E.group.n):
        act[:, g] = [index[(int(b), int(e))] for b, e in zip(bs, act_e[:, g])]
    total = GSpace(space, E.group, act, validate=False)
    proj = SpaceMap(space, base, tuple(int(b) for b in bs))
    return Bundle(total, base, proj, e_codes=es)


# -- the pullback reconstruction check (classifying theorem) -----------------


def verify_psi(X: GSpace, charts, family, data: ClassifyingMapData | None = None) -> dict:
    """Check Psi: x -> (xG, F(x)) is a G-homeomorphism onto the pullback of
    E along the induced map, commuting with the projections."""
    data = data or classifying_map(X, charts, family)
    E = data.E
    bundle = pullback(data.orbit_space, data.f_codes, E)
    pts = {(int(b), int(e)): k for k, (b, e) in enumerate(
        zip(bundle.proj.values, bundle.e_codes)
    )}
    orbit_idx = data.proj.values
    psi = []
    ok_member = True
    for x in range(X.n):
        key = (orbit_idx[x], int(data.F_codes[x]))
        if key not in pts:
            ok_member = False
            break
        psi.append(pts[key])
    report = {"classifying_checks": data.checks, "psi_well_defined": ok_member}
    if not ok_member:
        report["ok"] = False
        return report
    psi = np.asarray(psi)
    report["bijective"] = len(set(psi.tolist())) == bundle.total.n == X.n
    if report["bijective"]:
        report["equivariant"] = bool(
            (bundle.total.act[psi] == psi[X.act]).all()
        )
        report["order_iso"] = bool(
            (bundle.total.space.leq[np.ix_(psi, psi)] == X.space.leq).all()
        )
        report["commutes_with_projections"] = bool(
            all(bundle.proj.values[psi[x]] == orbit_idx[x] for x in range(X.n))
        )
    else:
        report["equivariant"] = report["order_iso"] = False
        report["commutes_with_projections"] = False
    report["bundle"] = bundle.validate()["ok"]
    report["ok"] = all(
        v for k, v in report.items()
        if k in ("psi_well_defined", "bijective", "equivariant", "order_iso",
                 "commutes_with_projections", "bundle")
    ) and data.ok
    return report


# -- homotopy between classifying maps ---------------------------------------


@dataclass
class HomotopyData:
    E: ClassifyingSpace
    source: GSpace                # X x I2 with action on the first factor
    phi_codes: np.ndarray         # per point of X x I2
    checks: dict

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def homotopy_phi(X: GSpace, charts_i, charts_j, family, budget=None) -> HomotopyData:
    """The homotopy over the bi-Sierpinski space joining the classifying
    maps of two covers: the combined-cover map sits at the particular point
    and restricts to each cover's map (extended by conepoints) at the ends."""
    from .gspaces import product_with_space

    data_i = classifying_map(X, charts_i, family)
    data_j = classifying_map(X, charts_j, family)
    combined = list(charts_i) + list(charts_j)
    data_c = classifying_map(X, combined, family, budget=budget)
    E = data_c.E
    ki, kj = len(charts_i), len(charts_j)
    dig_c = E.digits(data_c.F_codes)
    I2 = bi_sierpinski()
    source = product_with_space(X, I2)
    phi = np.empty(X.n * 3, dtype=np.int64)
    for x in range(X.n):
        d_minus = dig_c[x].copy()
        d_minus[ki:] = 0
        d_plus = dig_c[x].copy()
        d_plus[:ki] = 0
        phi[x * 3 + 0] = E.codes_from_digits(d_minus)   # parameter -1
        phi[x * 3 + 1] = E.codes_from_digits(dig_c[x])  # parameter 0
        phi[x * 3 + 2] = E.codes_from_digits(d_plus)    # parameter +1
    checks = {}
    ii, jj = np.nonzero(source.space.leq)
    checks["continuous"] = bool(E.leq_pairs(phi[ii], phi[jj]).all())
    act_phi = E.act_matrix(phi)
    checks["equivariant"] = bool(
        all((phi[source.act[:, g]] == act_phi[:, g]).all() for g in range(X.group.n))
    )
    # the restrictions are the individual classifying maps, embedded by zero
    di = E.digits(phi[0::3])
    dj = E.digits(phi[2::3])
    checks["restricts_to_first"] = bool(
        (di[:, :ki] == data_i.E.digits(data_i.F_codes)).all() and (di[:, ki:] == 0).all()
    )
    checks["restricts_to_second"] = bool(
        (dj[:, ki:] == data_j.E.digits(data_j.F_codes)).all() and (dj[:, :ki] == 0).all()
    )
    masks = E._digit_stab[E.digits(phi)]
    total = E.isotropy_masks(phi)
    checks["lands_in_isovariant_part"] = bool(
        (masks == total[:, None]).any(axis=1).all()
    )
    return HomotopyData(E, source, phi, checks)


def homotopy_quotient_filtered(X: GSpace, hom: HomotopyData, family) -> bool:
    """Whether Phi/G is a filtered map for the orbit-type filtrations."""
    filtered_src, proj, orbs, co = orbit_type_filtration(X, family)
    src = filtered_src.cross_with(bi_sierpinski())
    tgt, positions = _hit_orbit_filtration(hom.E, hom.phi_codes, co)
    # induced map (xG, t) -> orbit of Phi(x, t); check well-definedness
    values = []
    for a, orb in enumerate(orbs):
        for t in range(3):
            vals = {int(positions[x * 3 + t]) for x in orb}
            if len(vals) != 1:
                return False
            values.append(vals.pop())
    fbar = SpaceMap(src.space, tgt.space, tuple(values))
    from .gspaces import is_filtered_map

    return is_filtered_map(fbar, src, tgt)


# -- the equivariant factorization --------------------------------------------


def equivariant_factorization(X: GSpace, Pi: Subgroup, charts, family) -> dict:
    """Checks for the factorization through X/Pi for a normal subgroup
    meeting every family member trivially: the free quotient bundle, the
    pullback square on the quotient level, and the chart-level
    identifications (S x_H G)/Pi = S x_{H Pi/Pi} (G/Pi)."""
    G = X.group
    report = {}
    if not Pi.is_normal():
        raise CoverError("Pi must be a normal subgroup")
    for H in family:
        bad = (H.members & Pi.members) - {G.e}
        if bad:
            raise CoverError(
                f"family member {tuple(sorted(H.members))} meets Pi at element {min(bad)}"
            )
    kind = cover_kind(X, charts)
    if kind != "isovariant":
        raise CoverError(f"cover must be isovariant, got {kind}")
    data = classifying_map(X, charts, family)
    E = data.E
    report["classifying_ok"] = data.ok

    # (a) X -> X/Pi is a principal Pi-bundle covered by {1}-tubes
    restricted, _ = restrict_action(X, Pi)
    Pi_triv = Subgroup(restricted.group, frozenset([restricted.group.e]))
    free_cover = find_tube_cover(restricted, [Pi_triv])
    report["pi_free"] = all(
        restricted.isotropy(x).order == 1 for x in range(X.n)
    )
    report["pi_bundle_covered"] = not isinstance(free_cover, CoverFailure) and (
        cover_kind(restricted, free_cover) == "isovariant"
    )

    # quotient data
    XPi, projX, Q, gproj = quotient_gspace_by_normal(X, Pi)
    # E/Pi on the orbits hit by f, as a Q-space fragment
    hit_orbit_codes = [sorted(int(c) for c in E.orbit_of(int(code))) for code in data.f_codes]
    pi_members = sorted(Pi.members)
    epi_points: list[int] = []     # Pi-orbit representatives (min codes)
    epi_of_borbit: list[list[int]] = []
    seen = {}
    for codes in hit_orbit_codes:
        local = []
        for c in codes:
            rep = min(int(E.act_codes(np.asarray([c]), p)[0]) for p in pi_members)
            if rep not in seen:
                seen[rep] = len(epi_points)
                epi_points.append(rep)
            if seen[rep] not in local:
                local.append(seen[rep])
        epi_of_borbit.append(sorted(local))
    epi = np.asarray(epi_points, dtype=np.int64)
    ne = len(epi)
    eleq = np.zeros((ne, ne), dtype=bool)
    for p in pi_members:
        eleq |= E.leq_matrix(epi, E.act_codes(epi, p))
    def pi_rep(code: int) -> int:
        return min(int(E.act_codes(np.asarray([code]), p)[0]) for p in pi_members)

    # c: X/Pi -> E/Pi
    c_values = []
    for b in range(XPi.n):
        x = next(x for x in range(X.n) if projX.values[x] == b)
        c_values.append(seen[pi_rep(int(data.F_codes[x]))])
    report["c_well_defined"] = all(
        seen.get(pi_rep(int(data.F_codes[x]))) == c_values[projX.values[x]]
        for x in range(X.n)
    )
    report["c_continuous"] = all(
        bool(eleq[c_values[a], c_values[b]])
        for a in range(XPi.n) for b in np.flatnonzero(XPi.space.leq[a])
    )
    c_equi = True
    for b in range(XPi.n):
        for q in range(Q.n):
            g = next(g for g in range(G.n) if gproj[g] == q)
            lhs = c_values[XPi.act[b, q]]
            moved = int(E.act_codes(np.asarray([epi_points[c_values[b]]]), g)[0])
            c_equi &= lhs == seen[pi_rep(moved)]
    report["c_equivariant"] = bool(c_equi)

    # (b) the left square is a pullback: compare X/Pi with the categorical
    # pullback {(xG, ePi) : f(xG) = image of ePi in B}
    P_points = [(b, i) for b in range(data.orbit_space.n) for i in epi_of_borbit[b]]
    P_index = {pt: k for k, pt in enumerate(P_points)}
    comparison = []
    for b in range(XPi.n):
        x = next(x for x in range(X.n) if projX.values[x] == b)
        key = (data.proj.values[x], c_values[b])
        comparison.append(P_index.get(key, -1))
    comp_ok = -1 not in comparison and len(set(comparison)) == len(P_points) == XPi.n
    report["comparison_bijective"] = bool(comp_ok)
    if comp_ok:
        okord = True
        for a in range(XPi.n):
            for b in range(XPi.n):
                pa, pb = P_points[comparison[a]], P_points[comparison[b]]
                lhs = bool(XPi.space.leq[a, b])
                rhs = bool(data.orbit_space.leq[pa[0], pb[0]] and eleq[pa[1], pb[1]])
                okord &= lhs == rhs
        report["comparison_order_iso"] = okord
    else:
        report["comparison_order_iso"] = False
    report["square_is_pullback"] = bool(comp_ok and report["comparison_order_iso"])

    # (c) chart-level identification (S x_H G)/Pi = S x_{H_Pi} (G/Pi)
    chart_ok = True
    for chart in data.charts:
        chart_ok &= _chart_factorization_ok(X, chart, Pi, Q, gproj)
    report["chart_identifications_ok"] = bool(chart_ok)
    report["ok"] = all(
        report[k] for k in (
            "classifying_ok", "pi_free", "pi_bundle_covered", "c_well_defined",
            "c_continuous", "c_equivariant", "square_is_pullback",
            "chart_identifications_ok",
        )
    )
    return report


def _chart_factorization_ok(X: GSpace, chart: TubeChart, Pi: Subgroup,
                            Q: FinGroup, gproj: np.ndarray) -> bool:
    from .finspace import subspace

    G = X.group
    s_pts = sorted(chart.slice_points)
    Hgrp, order = chart.H.as_group()
    pos = {p: k for k, p in enumerate(s_pts)}
    act = np.asarray([[pos[int(X.act[p, h])] for h in order] for p in s_pts], dtype=int)
    S = GSpace(subspace(X.space, s_pts), Hgrp, act, validate=False)
    ind, points, coset_reps = induced_gspace(S, chart.H, order)
    # left side: (S x_H G)/Pi as a Q-space
    lhs, lproj, _Q2, _gproj2 = quotient_gspace_by_normal(ind, Pi)
    # right side: S x_{H_Pi} Q
    HPi = Subgroup(Q, frozenset(int(gproj[h]) for h in chart.H.members))
    QHgrp, qorder = HPi.as_group()
    qpos = {m: i for i, m in enumerate(qorder)}
    # S as an H_Pi-space through the isomorphism H -> H_Pi
    h_for_q = {int(gproj[h]): h for h in order}
    act2 = np.asarray(
        [[pos[int(X.act[p, h_for_q[m]])] for m in qorder] for p in s_pts], dtype=int
    )
    S2 = GSpace(S.space, QHgrp, act2, validate=False)
    rhs, points2, coset_reps2 = induced_gspace(S2, HPi, qorder)
    if lhs.n != rhs.n:
        return False
    # canonical map [s, g]Pi -> [s, gPi]
    coset_of_q = {
        frozenset(Q.op(m, qrep) for m in HPi.members): c2
        for c2, qrep in enumerate(coset_reps2)
    }
    mapping = np.empty(lhs.n, dtype=int)
    fibers = [[] for _ in range(lhs.n)]
    for j in range(ind.n):
        fibers[lproj.values[j]].append(j)
    for b in range(lhs.n):
        s, c = points[fibers[b][0]]
        qg = int(gproj[coset_reps[c]])
        members = frozenset(Q.op(m, qg) for m in HPi.members)
        c2 = coset_of_q[members]
        h2 = Q.op(qg, Q.inv[coset_reps2[c2]])
        s2 = int(S2.act[s, qpos[h2]])
        mapping[b] = points2.index((s2, c2))
    if len(set(mapping.tolist())) != lhs.n:
        return False
    if not (rhs.space.leq[np.ix_(mapping, mapping)] == lhs.space.leq).all():
        return False
    for q in range(Q.n):
        if not (mapping[lhs.act[:, q]] == rhs.act[mapping, q]).all():
            return False
    return True
