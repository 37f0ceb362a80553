"""Enumeration of free regular G-covers of a finite base space.

The pipeline realizes the finite search: every continuous map from the face
space of a complex into the orbit space of the free classifying space pulls
back to a principal bundle; deduplication is by gauge-canonical transition
labels, which classify principal bundles over a fixed finite base exactly.
A definitional brute-force oracle enumerates invariant preorders on
cells x G directly and must agree class-for-class.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iproduct

import numpy as np

from .classifying import DEFAULT_POINT_BUDGET, build_B, build_E
from .finspace import FinSpace, SpaceMap, space_from_relation, weight
from .groups import FinGroup, all_subgroups, trivial_subgroup
from .gspaces import GSpace, orbit_space
from .pullbacks import Bundle, CoverFailure, find_tube_cover, pullback


class EnumerationError(ValueError):
    pass


class MapBudgetExceeded(EnumerationError):
    def __init__(self, partial_count):
        super().__init__(f"map budget exceeded after {partial_count} maps")
        self.partial_count = partial_count


# -- cell complexes ----------------------------------------------------------


@dataclass(frozen=True)
class CellComplex:
    """Cells with dimensions and closed-cell containment incidences."""

    dims: tuple
    faces: tuple
    names: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(
            self, "faces", tuple((int(i), int(j)) for i, j in self.faces)
        )
        n = len(self.dims)
        for i, j in self.faces:
            if not (0 <= i < n and 0 <= j < n):
                raise EnumerationError(f"face pair ({i},{j}) out of range")
            if self.dims[i] >= self.dims[j]:
                raise EnumerationError(
                    f"non-graded incidence: cell {i} (dim {self.dims[i]}) "
                    f"listed as face of cell {j} (dim {self.dims[j]})"
                )

    @property
    def n(self) -> int:
        return len(self.dims)

    def name(self, i) -> str:
        if self.names is not None:
            return self.names[i]
        return f"c{i}^{self.dims[i]}"

    def to_json(self) -> dict:
        return {
            "cells": [{"dim": d, "name": self.name(i)} for i, d in enumerate(self.dims)],
            "faces": [list(p) for p in self.faces],
        }

    @classmethod
    def from_json(cls, data: dict) -> "CellComplex":
        cells = data["cells"]
        names = [c.get("name", f"c{i}") for i, c in enumerate(cells)]
        return cls(tuple(c["dim"] for c in cells), tuple(map(tuple, data["faces"])),
                   tuple(names))


def face_space(K: CellComplex) -> FinSpace:
    """The face poset as a finite space: x <= y iff x is a face of y, so the
    open sets are the up-sets."""
    X = space_from_relation(K.n, K.faces, labels=[K.name(i) for i in range(K.n)])
    strict = X.leq & ~np.eye(K.n, dtype=bool)
    for i, j in np.argwhere(strict):
        if K.dims[i] >= K.dims[j]:
            raise EnumerationError("incidence closure is not graded by dimension")
    for j in range(K.n):
        if K.dims[j] == 1:
            vertices = [i for i in np.flatnonzero(strict[:, j]) if K.dims[i] == 0]
            if len(vertices) != 2:
                raise EnumerationError(
                    f"1-cell {j} has {len(vertices)} vertex faces, expected 2"
                )
    return X


def circle_complex() -> CellComplex:
    """The circle as a regular complex: two vertices and two edges."""
    return CellComplex((0, 0, 1, 1), ((0, 2), (1, 2), (0, 3), (1, 3)),
                       ("v0", "v1", "e0", "e1"))


def interval_complex() -> CellComplex:
    """The 1-simplex: two vertices and one edge."""
    return CellComplex((0, 0, 1), ((0, 2), (1, 2)), ("v0", "v1", "e"))


# -- monotone map enumeration -------------------------------------------------


def linear_extension(A: FinSpace) -> list[int]:
    return sorted(range(A.n), key=lambda i: (len(A.down_set(i)), i))


def enumerate_monotone_maps(A: FinSpace, Y: FinSpace, budget: int | None = None,
                            first_value: int | None = None):
    """All monotone (= continuous) functions A -> Y, in deterministic
    lexicographic order along a fixed linear extension of A.

    Backtracks with forward pruning; raises MapBudgetExceeded with the
    partial count if more than ``budget`` maps would be produced.  With
    ``first_value`` only the branch assigning it to the first point of the
    extension is enumerated (used to partition work)."""
    order = linear_extension(A)
    n = len(order)
    aleq = A.leq
    yleq = Y.leq
    assigned = [0] * n
    count = [0]

    def rec(k):
        if k == n:
            count[0] += 1
            if budget is not None and count[0] > budget:
                raise MapBudgetExceeded(count[0] - 1)
            values = [0] * n
            for pos, p in enumerate(order):
                values[p] = assigned[pos]
            yield tuple(values)
            return
        p = order[k]
        choices = (range(Y.n) if not (k == 0 and first_value is not None)
                   else (first_value,))
        for y in choices:
            ok = True
            for j in range(k):
                q = order[j]
                if aleq[q, p] and not yleq[assigned[j], y]:
                    ok = False
                    break
                if aleq[p, q] and not yleq[y, assigned[j]]:
                    ok = False
                    break
            if ok:
                assigned[k] = y
                yield from rec(k + 1)

    if A.n == 0:
        yield ()
        return
    yield from rec(0)


# -- gauge-canonical certificates for principal bundles -----------------------


@dataclass(frozen=True)
class BaseStructure:
    """Spanning data of the comparability graph of a T0 base space."""

    strict_pairs: tuple          # all (i, j) with i < j strictly in <=
    components: tuple            # tuple of (root, members, tree, backedges)


def base_structure(A: FinSpace) -> BaseStructure:
    n = A.n
    strict = A.leq & ~np.eye(n, dtype=bool)
    if (strict & strict.T).any():
        raise EnumerationError("base must be T0 for bundle certificates")
    pairs = [(int(i), int(j)) for i, j in np.argwhere(strict)]
    und = strict | strict.T
    seen = [False] * n
    comps = []
    for r in range(n):
        if seen[r]:
            continue
        seen[r] = True
        members = [r]
        tree = []      # (parent, child, pair) with pair the oriented strict pair
        tree_pairs = set()
        queue = [r]
        while queue:
            u = queue.pop(0)
            for v in range(n):
                if und[u, v] and not seen[v]:
                    seen[v] = True
                    members.append(v)
                    queue.append(v)
                    pair = (u, v) if strict[u, v] else (v, u)
                    tree.append((u, v, pair))
                    tree_pairs.add(pair)
        back = tuple(p for p in pairs if p[0] in members and p[1] in members
                     and p not in tree_pairs)
        comps.append((r, tuple(members), tuple(tree), back))
    return BaseStructure(tuple(pairs), tuple(comps))


def gauge_canonical_certificate(G: FinGroup, struct: BaseStructure, labels) -> tuple:
    """Canonical form of transition labels under per-point gauge changes.

    ``labels`` maps each strict pair (i, j) to the unique g with
    t_i <= t_j.g.  Tree labels are gauged to the identity; the remaining
    back-edge labels are conjugated by the residual per-component gauge and
    minimized lexicographically.
    """
    mult, inv = G.mult, G.inv
    cert = []
    for root, members, tree, back in struct.components:
        w = {root: G.e}
        for u, v, (i, j) in tree:
            l = labels[(i, j)]
            if (i, j) == (u, v):
                w[v] = int(mult[l, w[u]])
            else:
                w[v] = int(mult[inv[l], w[u]])
        pre = [int(mult[inv[w[j]], mult[labels[(i, j)], w[i]]]) for i, j in back]
        best = None
        for r in range(G.n):
            conj = tuple(int(mult[inv[r], mult[p, r]]) for p in pre)
            if best is None or conj < best:
                best = conj
        cert.append((members, best))
    return tuple(cert)


def bundle_transition_labels(bundle: Bundle, struct: BaseStructure) -> dict:
    """Transition labels of a free principal bundle from its total order."""
    X = bundle.total
    G = X.group
    fibers = bundle.fibers()
    anchors = [min(f) for f in fibers]
    labels = {}
    for i, j in struct.strict_pairs:
        cands = [g for g in range(G.n)
                 if X.space.leq[anchors[i], X.act[anchors[j], g]]]
        if len(cands) != 1:
            raise EnumerationError(
                f"transition label between {i} and {j} not unique: {cands}"
            )
        labels[(i, j)] = cands[0]
    return labels


def bundle_certificate(bundle: Bundle) -> tuple:
    struct = base_structure(bundle.base)
    return gauge_canonical_certificate(bundle.total.group, struct,
                                       bundle_transition_labels(bundle, struct))


# -- the pipeline --------------------------------------------------------------


@dataclass
class BundleClass:
    certificate: tuple
    representative: Bundle
    multiplicity: int
    invariants: dict

    def to_json(self) -> dict:
        return {
            "certificate": _cert_json(self.certificate),
            "multiplicity": self.multiplicity,
            "invariants": self.invariants,
            "representative": self.representative.to_json(),
        }


def _cert_json(cert: tuple):
    return [[list(members), list(back)] for members, back in cert]


def class_invariants(bundle: Bundle) -> dict:
    total = bundle.total
    comps = _component_count(total.space)
    iso = sorted(bin(total.isotropy_mask(x)).count("1") for x in range(total.n))
    return {"components": comps, "isotropy_orders": iso}


def _component_count(X: FinSpace) -> int:
    n = X.n
    und = X.leq | X.leq.T
    seen = [False] * n
    count = 0
    for r in range(n):
        if not seen[r]:
            count += 1
            queue = [r]
            seen[r] = True
            while queue:
                u = queue.pop(0)
                for v in np.flatnonzero(und[u]):
                    if not seen[v]:
                        seen[v] = True
                        queue.append(int(v))
    return count


def _label_table(E, reps: np.ndarray) -> np.ndarray:
    """lab[y, y'] = the unique g with rep_y <= rep_{y'}.g, else -1."""
    nb = len(reps)
    lab = np.full((nb, nb), -1, dtype=int)
    for g in range(E.group.n):
        hit = E.leq_matrix(reps, E.act_codes(reps, g))
        clash = (lab != -1) & hit
        if clash.any():
            raise EnumerationError("transition label not unique; is E free?")
        lab[hit] = g
    return lab


def _enumerate_branch(A: FinSpace, B: FinSpace, lab: np.ndarray,
                      struct: BaseStructure, G: FinGroup, branch: int,
                      budget: int | None):
    """Certificate counts for the branch of maps sending the first point of
    the linear extension to ``branch``: returns (count, {cert: [count, rep map]})."""
    counts: dict = {}
    total = 0
    for f in enumerate_monotone_maps(A, B, budget=budget, first_value=branch):
        labels = {}
        ok = True
        for i, j in struct.strict_pairs:
            g = lab[f[i], f[j]]
            if g < 0:
                ok = False
                break
            labels[(i, j)] = g
        if not ok:
            raise EnumerationError("monotone map produced a non-comparable pair")
        cert = gauge_canonical_certificate(G, struct, labels)
        total += 1
        entry = counts.get(cert)
        if entry is None:
            counts[cert] = [1, f]
        else:
            entry[0] += 1
    return total, counts


@dataclass
class EnumerationResult:
    base: FinSpace
    group: FinGroup
    kappa: int
    classes: list
    map_count: int

    def certificates(self) -> set:
        return {c.certificate for c in self.classes}


def enumerate_bundles(K: CellComplex, G: FinGroup, kappa: int | None = None,
                      budget_maps: int = 1_000_000, workers: int = 1,
                      budget_points: int = DEFAULT_POINT_BUDGET) -> EnumerationResult:
    """Classes of free principal G-covers of the face space of K, found by
    pulling back the free classifying space along every continuous map of
    the base into its orbit space, with multiplicities."""
    A = face_space(K)
    if kappa is None:
        kappa = weight(A)
    E = build_E(G, [trivial_subgroup(G)], kappa, budget=budget_points)
    B, reps = build_B(E, cap=budget_points)
    lab = _label_table(E, reps)
    struct = base_structure(A)
    branches = list(range(B.n))
    if workers <= 1:
        parts = [_enumerate_branch(A, B, lab, struct, G, v, budget_maps)
                 for v in branches]
    else:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(
                _branch_worker,
                [(K.to_json(), G.to_json(), kappa, budget_points, v, budget_maps)
                 for v in branches],
            ))
    merged: dict = {}
    total = 0
    for cnt, counts in parts:
        total += cnt
        for cert, (c, f) in sorted(counts.items()):
            entry = merged.get(cert)
            if entry is None:
                merged[cert] = [c, f]
            else:
                entry[0] += c
    if total > budget_maps:
        raise MapBudgetExceeded(total)
    classes = []
    for cert in sorted(merged):
        count, f = merged[cert]
        bundle = pullback(A, reps[list(f)], E)
        rep_val = bundle.validate()
        if not (rep_val["ok"] and rep_val["free"]):
            raise EnumerationError(f"pulled-back bundle failed validation: {rep_val}")
        if bundle_certificate(bundle) != cert:
            raise EnumerationError("certificate mismatch on representative")
        classes.append(BundleClass(cert, bundle, count, class_invariants(bundle)))
    return EnumerationResult(A, G, kappa, classes, total)


def _branch_worker(args):
    complex_json, group_json, kappa, budget_points, branch, budget_maps = args
    K = CellComplex.from_json(complex_json)
    G = FinGroup.from_json(group_json)
    A = face_space(K)
    E = build_E(G, [trivial_subgroup(G)], kappa, budget=budget_points)
    B, reps = build_B(E, cap=budget_points)
    lab = _label_table(E, reps)
    struct = base_structure(A)
    return _enumerate_branch(A, B, lab, struct, G, branch, budget_maps)


# -- the brute-force oracle ----------------------------------------------------


def _subset_product(G: FinGroup, memo: dict, m1: int, m2: int) -> int:
    key = (m1, m2)
    out = memo.get(key)
    if out is None:
        out = 0
        for a in range(G.n):
            if m1 >> a & 1:
                for b in range(G.n):
                    if m2 >> b & 1:
                        out |= 1 << int(G.mult[a, b])
        memo[key] = out
    return out


def oracle_bundles(K: CellComplex, G: FinGroup, cap: int = 24,
                   prefilter: bool = True) -> EnumerationResult:
    """Definitional enumeration of the same classes: all G-invariant
    preorders on cells x G with orbit quotient the face space, kept when a
    cover by trivial-subgroup tubes exists, deduplicated by certificate.

    Multiplicity here counts raw surviving candidates per class.

    With ``prefilter`` (default), candidates violating a necessary condition
    for tube coverability are dropped early: any tube chart is constant on
    comparable pairs and equivariant, which forces every diagonal relation
    set to be {e} and every strict one a singleton.  The surviving
    candidates still go through the definitional find_tube_cover check;
    tests cross-check against prefilter=False.
    """
    A = face_space(K)
    nc = A.n
    if nc * G.n > cap:
        raise EnumerationError(f"oracle size {nc * G.n} exceeds cap {cap}")
    strict = A.leq & ~np.eye(nc, dtype=bool)
    pairs = [(int(i), int(j)) for i, j in np.argwhere(strict)]
    subgroup_masks = [H.mask() for H in all_subgroups(G)]
    nonempty = [m for m in range(1, 1 << G.n)]
    if prefilter:
        subgroup_masks = [1 << G.e]
        nonempty = [1 << g for g in range(G.n)]
    memo: dict = {}
    # chains needing the composition constraint, as index pairs into the
    # D-slots; slot layout: diagonal slots 0..nc-1 then strict pairs
    slot_of = {}
    for b in range(nc):
        slot_of[(b, b)] = b
    for k, p in enumerate(pairs):
        slot_of[p] = nc + k
    chains = []
    for a in range(nc):
        for b in np.flatnonzero(A.leq[a]):
            for c in np.flatnonzero(A.leq[b]):
                if A.leq[a, c]:
                    chains.append((slot_of[(a, int(b))], slot_of[(int(b), int(c))],
                                   slot_of[(a, int(c))]))
    chains = sorted(set(chains))
    triv = trivial_subgroup(G)
    classes: dict = {}
    raw_count = 0
    e_bit = 1 << G.e
    for diag in iproduct(subgroup_masks, repeat=nc):
        for strict_choice in iproduct(nonempty, repeat=len(pairs)):
            slots = list(diag) + list(strict_choice)
            if any(s & e_bit == 0 for s in slots[:nc]):
                continue
            ok = True
            for s_ab, s_bc, s_ac in chains:
                if _subset_product(G, memo, slots[s_bc], slots[s_ab]) & ~slots[s_ac]:
                    ok = False
                    break
            if not ok:
                continue
            bundle = _oracle_candidate_bundle(A, G, slots, slot_of)
            if bundle is None:
                continue
            cover = find_tube_cover(bundle.total, [triv])
            if isinstance(cover, CoverFailure):
                continue
            raw_count += 1
            cert = bundle_certificate(bundle)
            entry = classes.get(cert)
            if entry is None:
                classes[cert] = [1, bundle]
            else:
                entry[0] += 1
    out = []
    for cert in sorted(classes):
        count, bundle = classes[cert]
        out.append(BundleClass(cert, bundle, count, class_invariants(bundle)))
    return EnumerationResult(A, G, None, out, raw_count)


def _oracle_candidate_bundle(A: FinSpace, G: FinGroup, slots, slot_of):
    """Build the candidate total space for a D-pattern; check it is a
    preorder with orbit quotient exactly the base."""
    nc = A.n
    n = nc * G.n
    leq = np.zeros((n, n), dtype=bool)
    for (a, b), s in slot_of.items():
        D = slots[s]
        for h in range(G.n):
            for h2 in range(G.n):
                z = G.mult[h2, G.inv[h]]
                if D >> int(z) & 1:
                    leq[a * G.n + h, b * G.n + h2] = True
    if not leq.diagonal().all() or ((leq @ leq) & ~leq).any():
        return None
    space = FinSpace(leq, validate=False)
    act = np.empty((n, G.n), dtype=int)
    for b in range(nc):
        for h in range(G.n):
            for g in range(G.n):
                act[b * G.n + h, g] = b * G.n + int(G.mult[h, g])
    total = GSpace(space, G, act, validate=False)
    # orbit quotient must equal the base exactly
    Q, proj, orbs = orbit_space(total)
    to_base = [orb[0] // G.n for orb in orbs]
    if sorted(to_base) != list(range(nc)):
        return None
    perm = np.argsort(to_base)
    if not (Q.leq[np.ix_(perm, perm)] == A.leq).all():
        return None
    return Bundle(total, A, SpaceMap(space, A, tuple(p // G.n for p in range(n))))


# -- isomorphism over the identity of the base --------------------------------


def bundle_iso_over_base(b1: Bundle, b2: Bundle):
    """An equivariant order-isomorphism of totals commuting with the
    projections, or None after exhausting the fiberwise search."""
    if b1.base != b2.base:
        raise EnumerationError("bundles must share the base")
    if not (b1.total.group == b2.total.group):
        raise EnumerationError("bundles must share the group")
    G = b1.total.group
    X1, X2 = b1.total, b2.total
    orbs1 = X1.orbits()
    orbs2 = X2.orbits()
    if sorted(len(o) for o in orbs1) != sorted(len(o) for o in orbs2):
        return None
    base_of2 = {}
    for k, orb in enumerate(orbs2):
        base_of2.setdefault(b2.proj.values[orb[0]], []).append(k)
    phi = np.full(X1.n, -1, dtype=int)
    used = [False] * len(orbs2)

    def assign(k):
        if k == len(orbs1):
            return True
        orb = orbs1[k]
        bpt = b1.proj.values[orb[0]]
        x0 = orb[0]
        m0 = X1.isotropy_mask(x0)
        for k2 in base_of2.get(bpt, []):
            if used[k2] or len(orbs2[k2]) != len(orb):
                continue
            for y0 in orbs2[k2]:
                if X2.isotropy_mask(y0) != m0:
                    continue
                local = {}
                good = True
                for g in range(G.n):
                    x, y = int(X1.act[x0, g]), int(X2.act[y0, g])
                    if local.setdefault(x, y) != y:
                        good = False
                        break
                if not good or len(set(local.values())) != len(orb):
                    continue
                for x, y in local.items():
                    for x2 in range(X1.n):
                        y2 = phi[x2] if phi[x2] >= 0 else local.get(x2, -1)
                        if y2 < 0:
                            continue
                        if bool(X1.space.leq[x, x2]) != bool(X2.space.leq[y, y2]) or \
                           bool(X1.space.leq[x2, x]) != bool(X2.space.leq[y2, y]):
                            good = False
                            break
                    if not good:
                        break
                if not good:
                    continue
                for x, y in local.items():
                    phi[x] = y
                used[k2] = True
                if assign(k + 1):
                    return True
                used[k2] = False
                for x in local:
                    phi[x] = -1
        return False

    if not assign(0):
        return None
    return SpaceMap(X1.space, X2.space, tuple(int(v) for v in phi))


def reclassify_certificate(bundle: Bundle, family=None) -> tuple:
    """Round trip: classify the bundle total afresh, pull back, and return
    the certificate of the re-pulled-back bundle over the original base."""
    from .pullbacks import classifying_map

    X = bundle.total
    G = X.group
    family = family or [trivial_subgroup(G)]
    charts = find_tube_cover(X, family)
    if isinstance(charts, CoverFailure):
        raise EnumerationError(f"bundle total not coverable: {charts}")
    data = classifying_map(X, charts, family)
    new_bundle = pullback(data.orbit_space, data.f_codes, data.E)
    # transport the new bundle onto the original base via proj
    orbs = data.orbits
    to_base = [bundle.proj.values[orb[0]] for orb in orbs]
    perm = np.argsort(to_base)
    Q = new_bundle.base
    base2 = FinSpace(Q.leq[np.ix_(perm, perm)], validate=False)
    if base2 != bundle.base:
        raise EnumerationError("orbit space does not match the original base")
    inv_perm = np.argsort(perm)
    proj2 = SpaceMap(new_bundle.total.space, bundle.base,
                     tuple(int(inv_perm[v]) for v in new_bundle.proj.values))
    transported = Bundle(new_bundle.total, bundle.base, proj2)
    return bundle_certificate(transported)
