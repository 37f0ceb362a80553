"""Finite right G-spaces: actions by order automorphisms, orbits, isotropy,
orbit spaces, equivariance, and orbit-type filtrations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .finspace import FinSpace, SpaceMap, quotient
from .groups import ClassOrder, FinGroup, Subgroup, orbit_type_preorder


class GSpaceError(ValueError):
    pass


class GSpace:
    """A finite space with a right G-action by self-homeomorphisms.

    ``act`` is an n x |G| table; act[x, g] = x.g.  Each column must be an
    automorphism of the specialization preorder and the table must satisfy
    the unit and composition laws.
    """

    __slots__ = ("space", "group", "act")

    def __init__(self, space: FinSpace, group: FinGroup, act, validate=True):
        act = np.asarray(act, dtype=int)
        if act.shape != (space.n, group.n):
            raise GSpaceError(f"action table must be {(space.n, group.n)}, got {act.shape}")
        if validate:
            _validate_action(space, group, act)
        act = act.copy()
        act.setflags(write=False)
        self.space = space
        self.group = group
        self.act = act

    @property
    def n(self) -> int:
        return self.space.n

    def translate(self, x, g) -> int:
        return int(self.act[x, g])

    def isotropy(self, x) -> Subgroup:
        G = self.group
        return Subgroup(G, frozenset(int(g) for g in np.flatnonzero(self.act[x] == x)))

    def isotropy_mask(self, x) -> int:
        mask = 0
        for g in np.flatnonzero(self.act[x] == x):
            mask |= 1 << int(g)
        return mask

    def orbit(self, x) -> frozenset:
        return frozenset(int(p) for p in np.unique(self.act[x]))

    def orbits(self) -> list[list[int]]:
        """All orbits, listed by smallest member, each sorted."""
        seen = np.zeros(self.n, dtype=bool)
        out = []
        for x in range(self.n):
            if not seen[x]:
                orb = np.unique(self.act[x])
                seen[orb] = True
                out.append([int(p) for p in orb])
        return out

    def to_json(self) -> dict:
        return {
            "space": self.space.to_json(),
            "group": self.group.to_json(),
            "act": self.act.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "GSpace":
        return cls(FinSpace.from_json(data["space"]), FinGroup.from_json(data["group"]),
                   np.asarray(data["act"], dtype=int))


def _validate_action(space: FinSpace, group: FinGroup, act: np.ndarray):
    n, m = act.shape
    if act.min() < 0 or act.max() >= n:
        raise GSpaceError("action values out of range")
    if not (act[:, group.e] == np.arange(n)).all():
        raise GSpaceError("identity must act trivially")
    for g in range(m):
        col = act[:, g]
        if len(np.unique(col)) != n:
            raise GSpaceError(f"group element {g} does not act bijectively")
        if not (space.leq[np.ix_(col, col)] == space.leq).all():
            raise GSpaceError(f"group element {g} is not an order automorphism")
    # act(act(x,g),h) == act(x, g*h)
    comp = act[act, :]  # comp[x,g,h] = act[act[x,g], h]
    direct = act[:, group.mult]  # direct[x,g,h] = act[x, mult[g,h]]
    if not (comp == direct).all():
        raise GSpaceError("action does not respect group multiplication")


def trivial_gspace(space: FinSpace, group: FinGroup) -> GSpace:
    act = np.tile(np.arange(space.n)[:, None], (1, group.n))
    return GSpace(space, group, act, validate=False)


def translation_gspace(G: FinGroup) -> GSpace:
    """G acting on itself (discrete) by right translation."""
    from .finspace import discrete

    labels = [G.label(a) for a in range(G.n)]
    return GSpace(discrete(G.n, labels=labels), G, G.mult, validate=False)


def coset_gspace(cs) -> GSpace:
    """GSpace view of a CosetSpace."""
    return GSpace(cs.space(), cs.group, cs.act, validate=False)


def sub_gspace(X: GSpace, pts) -> tuple[GSpace, list[int]]:
    """The G-subspace on an invariant point set; returns it with the
    sorted ambient point list (position k holds ambient index)."""
    pts = sorted(set(int(p) for p in pts))
    pos = {p: k for k, p in enumerate(pts)}
    sub = X.act[pts]
    if any(int(v) not in pos for v in np.unique(sub)):
        raise GSpaceError("point set is not G-invariant")
    act = np.vectorize(pos.__getitem__)(sub) if pts else np.zeros((0, X.group.n), dtype=int)
    from .finspace import subspace

    return GSpace(subspace(X.space, pts), X.group, act, validate=False), pts


def product_with_space(X: GSpace, Y: FinSpace) -> GSpace:
    """X x Y with G acting on the first factor only (row-major indexing)."""
    from .finspace import product

    space = product(X.space, Y)
    n, m = X.n, Y.n
    act = np.empty((n * m, X.group.n), dtype=int)
    for g in range(X.group.n):
        act[:, g] = (X.act[:, g][:, None] * m + np.arange(m)[None, :]).reshape(-1)
    return GSpace(space, X.group, act, validate=False)


def orbit_space(X: GSpace):
    """The orbit space X/G with its projection.

    The quotient preorder is xG <= yG iff x <= y.g for some g; for orbit
    partitions this relation is already transitive.
    """
    orbs = X.orbits()
    k = len(orbs)
    reps = [o[0] for o in orbs]
    cls = np.empty(X.n, dtype=int)
    for b, orb in enumerate(orbs):
        cls[orb] = b
    leq = np.zeros((k, k), dtype=bool)
    for a in range(k):
        ra = reps[a]
        for b in range(k):
            leq[a, b] = bool(X.space.leq[ra, orbs[b]].any())
    np.fill_diagonal(leq, True)
    labels = None
    if X.space.labels is not None:
        labels = ["[" + X.space.label(r) + "]" for r in reps]
    Q = FinSpace(leq, labels=labels)  # validated: transitivity is a theorem here
    proj = SpaceMap(X.space, Q, tuple(int(c) for c in cls))
    return Q, proj, orbs


def orbit_space_via_generic_quotient(X: GSpace):
    """Independent route: the generic quotient by the orbit partition."""
    return quotient(X.space, X.orbits())


def is_equivariant(f: SpaceMap, X: GSpace, Y: GSpace) -> bool:
    if X.group is not Y.group and not (X.group == Y.group):
        raise GSpaceError("equivariance needs a shared group")
    v = np.asarray(f.values)
    return bool((Y.act[v, :] == v[X.act]).all())


def is_isovariant(f: SpaceMap, X: GSpace, Y: GSpace) -> bool:
    if not is_equivariant(f, X, Y):
        return False
    return all(X.isotropy_mask(x) == Y.isotropy_mask(f.values[x]) for x in range(X.n))


# -- filtered and stratified spaces ---------------------------------------


@dataclass(frozen=True)
class FilteredSpace:
    """A space with skeleta indexed by a preorder P (stored as a FinSpace).

    skeleta[a] is the a-th skeleton; b strictly below a in P forces
    skeleta[b] <= skeleta[a], and the strata partition the space.
    """

    space: FinSpace
    order: FinSpace
    skeleta: tuple

    def __post_init__(self):
        object.__setattr__(self, "skeleta", tuple(frozenset(s) for s in self.skeleta))
        if len(self.skeleta) != self.order.n:
            raise GSpaceError("one skeleton per preorder element required")
        union = frozenset().union(*self.skeleta) if self.skeleta else frozenset()
        if union != frozenset(range(self.space.n)):
            raise GSpaceError("skeleta must cover the space")
        for b in range(self.order.n):
            for a in range(self.order.n):
                if self._strictly_below(b, a) and not self.skeleta[b] <= self.skeleta[a]:
                    raise GSpaceError(f"skeleton {b} not inside skeleton {a}")
        strata = self.strata()
        if sum(len(s) for s in strata) != self.space.n:
            raise GSpaceError("strata must partition the space")

    def _strictly_below(self, b, a) -> bool:
        return bool(self.order.leq[b, a] and not self.order.leq[a, b])

    def strata(self) -> tuple:
        out = []
        for a in range(self.order.n):
            s = set(self.skeleta[a])
            for b in range(self.order.n):
                if self._strictly_below(b, a):
                    s -= self.skeleta[b]
            out.append(frozenset(s))
        return tuple(out)

    def cross_with(self, Y: FinSpace) -> "FilteredSpace":
        """Filtration of space x Y with skeleta S^a x Y (homotopy source)."""
        from .finspace import product

        prod = product(self.space, Y)
        skel = [
            frozenset(p * Y.n + j for p in sk for j in range(Y.n))
            for sk in self.skeleta
        ]
        return FilteredSpace(prod, self.order, tuple(skel))


def orbit_type_filtration(X: GSpace, family, class_order: ClassOrder | None = None):
    """Orbit-type filtration of X/G over the conjugacy classes of the family.

    Returns (filtered orbit space, projection, orbits, class order).  The
    skeleton for class (H) holds the orbits xG with H subconjugate to G_x.
    """
    co = class_order or orbit_type_preorder(X.group, family)
    Q, proj, orbs = orbit_space(X)
    G = X.group
    iso = [X.isotropy(o[0]) for o in orbs]
    for s, orb in zip(iso, orbs):
        if co.class_of_subgroup(s) is None:
            raise GSpaceError(
                f"isotropy {s.key()} of orbit of point {orb[0]} is not represented in the family"
            )
    skeleta = []
    for a in range(co.n):
        H = co.reps[a]
        sk = frozenset(
            b for b, s in enumerate(iso)
            if any(H.conjugate(g).members <= s.members for g in range(G.n))
        )
        skeleta.append(sk)
    filtered = FilteredSpace(Q, co.filtration_order(), tuple(skeleta))
    return filtered, proj, orbs, co


def is_filtered_map(f: SpaceMap, Y: FilteredSpace, Z: FilteredSpace) -> bool:
    """f(Y^a) <= Z^a for every a, over a shared preorder."""
    if Y.order != Z.order:
        raise GSpaceError("filtered spaces must share the preorder")
    for a in range(Y.order.n):
        if not {f.values[p] for p in Y.skeleta[a]} <= Z.skeleta[a]:
            return False
    return True


def is_stratified_map(f: SpaceMap, Y: FilteredSpace, Z: FilteredSpace) -> bool:
    """f(Y_a) <= Z_a for every class with a nonempty domain stratum."""
    if Y.order != Z.order:
        raise GSpaceError("stratified spaces must share the preorder")
    ys, zs = Y.strata(), Z.strata()
    for a in range(Y.order.n):
        if ys[a] and not {f.values[p] for p in ys[a]} <= zs[a]:
            return False
    return True


def restrict_action(X: GSpace, H: Subgroup):
    """X as a GSpace over the subgroup H; returns (space, member order)."""
    Hgrp, order = H.as_group()
    act = X.act[:, order]
    return GSpace(X.space, Hgrp, act, validate=False), order


def quotient_gspace_by_normal(X: GSpace, Pi: Subgroup):
    """X/Pi as a G/Pi-space, with the projection.

    Returns (quotient GSpace, projection SpaceMap, quotient group, proj array).
    """
    from .groups import quotient_group

    Q, gproj, reps = quotient_group(X.group, Pi)
    restricted, _ = restrict_action(X, Pi)
    space, proj, orbs = orbit_space(restricted)
    k = len(orbs)
    pos = proj.values
    act = np.empty((k, Q.n), dtype=int)
    for b, orb in enumerate(orbs):
        x = orb[0]
        for q in range(Q.n):
            act[b, q] = pos[X.act[x, reps[q]]]
    return GSpace(space, Q, act, validate=False), proj, Q, gproj


# -- induction from a subgroup ---------------------------------------------


def induced_gspace(S: GSpace, H: Subgroup, subgroup_order: list[int]):
    """The balanced product S x_H G for an H-space S inside a group G.

    ``S`` is a GSpace over H.as_group(); ``subgroup_order`` is the member
    list aligning S's group indices with G.  Points are pairs (s, c) over
    right cosets c of H; the class of (s, g) with g = h.rep(c) is
    (s.h, c).  Returns (GSpace over G, points, coset representatives).
    """
    G = H.group
    cosets: list[frozenset] = []
    coset_reps: list[int] = []
    coset_index: dict[frozenset, int] = {}
    for g in range(G.n):
        c = frozenset(G.op(h, g) for h in H.members)
        if c not in coset_index:
            coset_index[c] = len(cosets)
            cosets.append(c)
            coset_reps.append(g)
    k = len(cosets)
    pos_in_H = {m: i for i, m in enumerate(subgroup_order)}
    n = S.n * k
    # block-diagonal order: (s,c) <= (s',c') iff c == c' and s <= s'
    leq = np.zeros((n, n), dtype=bool)
    for c in range(k):
        idx = np.arange(S.n) * k + c
        leq[np.ix_(idx, idx)] = S.space.leq
    labels = None
    if S.space.labels is not None:
        labels = [None] * n
        for s in range(S.n):
            for c in range(k):
                labels[s * k + c] = f"[{S.space.label(s)};H{G.label(coset_reps[c])}]"
    space = FinSpace(leq, labels=labels, validate=False)
    act = np.empty((n, G.n), dtype=int)
    for c in range(k):
        gc = coset_reps[c]
        for g in range(G.n):
            gcg = G.op(gc, g)
            # find the target coset and the H-twist h with gc*g = h*rep(c')
            c2 = coset_index[frozenset(G.op(h, gcg) for h in H.members)]
            h = G.op(gcg, G.inv[coset_reps[c2]])
            hS = pos_in_H[h]
            for s in range(S.n):
                act[s * k + c, g] = int(S.act[s, hS]) * k + c2
    gspace = GSpace(space, G, act, validate=False)
    points = [(s, c) for s in range(S.n) for c in range(k)]
    return gspace, points, coset_reps


def balanced_product_via_quotient(S: GSpace, H: Subgroup, subgroup_order: list[int]):
    """Definitional S x_H G: quotient of S x G by (s.h, g) ~ (s, h.g).

    Slow reference construction used to cross-check ``induced_gspace``.
    Returns (quotient FinSpace, class map from S x G pairs, act table).
    """
    from .finspace import discrete, product

    G = H.group
    prod = product(S.space, discrete(G.n))
    # H-orbit partition of pairs under h.(s,g) = (s.h, h^-1 g)
    pos_in_H = {m: i for i, m in enumerate(subgroup_order)}
    n = S.n * G.n
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    for s in range(S.n):
        for g in range(G.n):
            for h in H.members:
                s2 = int(S.act[s, pos_in_H[h]])
                g2 = G.op(G.inv[h], g)
                union(s * G.n + g, s2 * G.n + g2)
    blocks: dict[int, list[int]] = {}
    for a in range(n):
        blocks.setdefault(find(a), []).append(a)
    partition = [blocks[r] for r in sorted(blocks)]
    Q, proj = quotient(prod, partition)
    cls = proj.values
    act = np.empty((Q.n, G.n), dtype=int)
    for b, blk in enumerate(partition):
        s, g = divmod(blk[0], G.n)
        for k in range(G.n):
            act[b, k] = cls[s * G.n + G.op(g, k)]
    return Q, proj, act
