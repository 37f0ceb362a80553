"""Finite groups as multiplication tables, subgroups, and coset spaces."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .finspace import FinSpace, discrete


class GroupAxiomError(ValueError):
    """Raised with a witness when a table fails the group axioms."""


class FinGroup:
    """A finite group: n x n multiplication table over indices 0..n-1."""

    __slots__ = ("n", "mult", "e", "inv", "labels", "name")

    def __init__(self, mult, labels=None, name="G", validate=True):
        mult = np.asarray(mult, dtype=int)
        n = mult.shape[0]
        if mult.shape != (n, n) or n == 0:
            raise GroupAxiomError(f"multiplication table must be square and nonempty, got {mult.shape}")
        if validate:
            _validate_table(mult)
        self.n = n
        self.mult = mult
        self.mult.setflags(write=False)
        e = next(
            a for a in range(n)
            if (mult[a] == np.arange(n)).all() and (mult[:, a] == np.arange(n)).all()
        )
        self.e = int(e)
        inv = np.empty(n, dtype=int)
        for a in range(n):
            inv[a] = int(np.flatnonzero(mult[a] == e)[0])
        inv.setflags(write=False)
        self.inv = inv
        self.labels = tuple(str(x) for x in labels) if labels is not None else None
        self.name = name

    def op(self, a, b) -> int:
        return int(self.mult[a, b])

    def conj(self, g, a) -> int:
        """g * a * g^-1."""
        return int(self.mult[self.mult[g, a], self.inv[g]])

    def label(self, a) -> str:
        return self.labels[a] if self.labels is not None else str(a)

    def elements(self):
        return range(self.n)

    def __eq__(self, other):
        return (isinstance(other, FinGroup) and self.n == other.n
                and (self.mult == other.mult).all())

    def __hash__(self):
        return hash(self.mult.tobytes())

    def __repr__(self):
        return f"FinGroup({self.name}, order={self.n})"

    def to_json(self) -> dict:
        data = {"order": self.n, "mult": self.mult.tolist(), "name": self.name}
        if self.labels is not None:
            data["labels"] = list(self.labels)
        return data

    @classmethod
    def from_json(cls, data: dict) -> "FinGroup":
        return group_from_table(data["mult"], labels=data.get("labels"),
                                name=data.get("name", "G"))


def _validate_table(mult: np.ndarray):
    n = mult.shape[0]
    if mult.min() < 0 or mult.max() >= n:
        raise GroupAxiomError("table entries out of range")
    # associativity, with a witness triple
    left = mult[mult, :]            # left[a,b,c] = (ab)c
    right = mult[:, mult]           # right[a,b,c] = a(bc)
    bad = np.argwhere(left != right)
    if len(bad):
        a, b, c = (int(v) for v in bad[0])
        raise GroupAxiomError(f"associativity fails at witness ({a},{b},{c})")
    ident = [
        a for a in range(n)
        if (mult[a] == np.arange(n)).all() and (mult[:, a] == np.arange(n)).all()
    ]
    if not ident:
        raise GroupAxiomError("no two-sided identity element")
    e = ident[0]
    for a in range(n):
        if not (mult[a] == e).any():
            raise GroupAxiomError(f"element {a} has no inverse")


def group_from_table(table, labels=None, name="G") -> FinGroup:
    return FinGroup(table, labels=labels, name=name)


def cyclic(n: int) -> FinGroup:
    mult = (np.arange(n)[:, None] + np.arange(n)[None, :]) % n
    return FinGroup(mult, labels=[str(i) for i in range(n)], name=f"Z{n}", validate=False)


def _perm_group(perms, name):
    perms = [tuple(p) for p in perms]
    index = {p: i for i, p in enumerate(perms)}
    n = len(perms)
    mult = np.empty((n, n), dtype=int)
    for i, p in enumerate(perms):
        for j, q in enumerate(perms):
            # right-action convention: apply p first, then q
            mult[i, j] = index[tuple(q[p[k]] for k in range(len(p)))]
    labels = ["".join(map(str, p)) for p in perms]
    return FinGroup(mult, labels=labels, name=name)


def symmetric3() -> FinGroup:
    return _perm_group(sorted(permutations(range(3))), "S3")


def dihedral4() -> FinGroup:
    """Symmetries of the square, as permutations of its 4 vertices."""
    r = (1, 2, 3, 0)
    s = (1, 0, 3, 2)
    gens = [r, s]
    elems = {(0, 1, 2, 3)}
    frontier = [(0, 1, 2, 3)]
    while frontier:
        nxt = []
        for p in frontier:
            for g in gens:
                q = tuple(g[p[k]] for k in range(4))
                if q not in elems:
                    elems.add(q)
                    nxt.append(q)
        frontier = nxt
    return _perm_group(sorted(elems), "D4")


def quaternion8() -> FinGroup:
    # elements 1, -1, i, -i, j, -j, k, -k
    labels = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"]
    idx = {s: i for i, s in enumerate(labels)}

    def mul(a, b):
        sa, ua = (-1, a[1:]) if a.startswith("-") else (1, a)
        sb, ub = (-1, b[1:]) if b.startswith("-") else (1, b)
        table = {
            ("1", "1"): (1, "1"), ("1", "i"): (1, "i"), ("1", "j"): (1, "j"), ("1", "k"): (1, "k"),
            ("i", "1"): (1, "i"), ("j", "1"): (1, "j"), ("k", "1"): (1, "k"),
            ("i", "i"): (-1, "1"), ("j", "j"): (-1, "1"), ("k", "k"): (-1, "1"),
            ("i", "j"): (1, "k"), ("j", "i"): (-1, "k"),
            ("j", "k"): (1, "i"), ("k", "j"): (-1, "i"),
            ("k", "i"): (1, "j"), ("i", "k"): (-1, "j"),
        }
        s, u = table[(ua, ub)]
        sign = sa * sb * s
        return u if sign == 1 else "-" + u

    mult = [[idx[mul(a, b)] for b in labels] for a in labels]
    return FinGroup(mult, labels=labels, name="Q8")


def product_group(A: FinGroup, B: FinGroup, name=None) -> FinGroup:
    n = A.n * B.n
    mult = np.empty((n, n), dtype=int)
    for a1 in range(A.n):
        for b1 in range(B.n):
            for a2 in range(A.n):
                for b2 in range(B.n):
                    mult[a1 * B.n + b1, a2 * B.n + b2] = (
                        A.mult[a1, a2] * B.n + B.mult[b1, b2]
                    )
    labels = [f"({A.label(a)},{B.label(b)})" for a in range(A.n) for b in range(B.n)]
    return FinGroup(mult, labels=labels, name=name or f"{A.name}x{B.name}", validate=False)


_BUILTIN_CACHE: dict = {}


def builtin_group(name: str) -> FinGroup:
    """Named groups: Zn (any n >= 1), S3, D4, Q8, Z2xZ2."""
    key = name.replace("/", "").strip()
    if key in _BUILTIN_CACHE:
        return _BUILTIN_CACHE[key]
    if key.startswith("Z") and key[1:].isdigit():
        g = cyclic(int(key[1:]))
    elif key == "S3":
        g = symmetric3()
    elif key == "D4":
        g = dihedral4()
    elif key == "Q8":
        g = quaternion8()
    elif key in ("Z2xZ2", "V4"):
        g = product_group(cyclic(2), cyclic(2), name="Z2xZ2")
    else:
        raise GroupAxiomError(f"unknown builtin group {name!r}")
    _BUILTIN_CACHE[key] = g
    return g


# -- subgroups -------------------------------------------------------------


@dataclass(frozen=True)
class Subgroup:
    group: FinGroup
    members: frozenset

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(int(m) for m in self.members))
        G = self.group
        ms = self.members
        if G.e not in ms:
            raise GroupAxiomError("subgroup must contain the identity")
        for a in ms:
            if int(G.inv[a]) not in ms:
                raise GroupAxiomError(f"subgroup not closed under inverse at {a}")
            for b in ms:
                if G.op(a, b) not in ms:
                    raise GroupAxiomError(f"subgroup not closed under product at ({a},{b})")

    @property
    def order(self) -> int:
        return len(self.members)

    def key(self) -> tuple:
        return tuple(sorted(self.members))

    def mask(self) -> int:
        m = 0
        for a in self.members:
            m |= 1 << a
        return m

    def conjugate(self, g) -> "Subgroup":
        """The subgroup g H g^-1."""
        G = self.group
        return Subgroup(G, frozenset(G.conj(g, a) for a in self.members))

    def is_normal(self) -> bool:
        return all(self.conjugate(g).members == self.members for g in self.group.elements())

    def contains(self, other: "Subgroup") -> bool:
        return other.members <= self.members

    def as_group(self):
        """The subgroup as a FinGroup, with the index map back into G."""
        order = sorted(self.members)
        pos = {a: i for i, a in enumerate(order)}
        mult = [[pos[self.group.op(a, b)] for b in order] for a in order]
        labels = [self.group.label(a) for a in order]
        H = FinGroup(mult, labels=labels, name=f"{self.group.name}-sub", validate=False)
        return H, order

    def __repr__(self):
        return f"Subgroup{self.key()}"


def trivial_subgroup(G: FinGroup) -> Subgroup:
    return Subgroup(G, frozenset([G.e]))


def full_subgroup(G: FinGroup) -> Subgroup:
    return Subgroup(G, frozenset(range(G.n)))


def generated_subgroup(G: FinGroup, gens) -> Subgroup:
    members = {G.e}
    frontier = list(members)
    gens = list(gens)
    while frontier:
        nxt = []
        for a in frontier:
            for g in gens:
                c = G.op(a, g)
                if c not in members:
                    members.add(c)
                    nxt.append(c)
        frontier = nxt
    return Subgroup(G, frozenset(members))


def all_subgroups(G: FinGroup) -> list[Subgroup]:
    """Every subgroup, by exhaustive closure generation."""
    found = {frozenset([G.e])}
    frontier = [frozenset([G.e])]
    while frontier:
        nxt = []
        for S in frontier:
            for g in range(G.n):
                if g in S:
                    continue
                T = generated_subgroup(G, set(S) | {g}).members
                if T not in found:
                    found.add(T)
                    nxt.append(T)
        frontier = nxt
    subs = [Subgroup(G, S) for S in found]
    subs.sort(key=lambda H: (H.order, H.key()))
    return subs


def are_conjugate(H: Subgroup, K: Subgroup):
    """A conjugator g with g K g^-1 = H, or None."""
    G = H.group
    if H.order != K.order:
        return None
    for g in range(G.n):
        if K.conjugate(g).members == H.members:
            return g
    return None


def subgroup_classes(G: FinGroup) -> list[list[Subgroup]]:
    """Subgroups grouped into conjugacy classes (each class sorted)."""
    classes: list[list[Subgroup]] = []
    for H in all_subgroups(G):
        for cls in classes:
            if are_conjugate(cls[0], H) is not None:
                cls.append(H)
                break
        else:
            classes.append([H])
    return classes


def class_representatives(G: FinGroup) -> list[Subgroup]:
    return [cls[0] for cls in subgroup_classes(G)]


def validate_family(G: FinGroup, family, allow_conjugates=False) -> list[Subgroup]:
    family = list(family)
    if not family:
        raise GroupAxiomError("family of subgroups must be nonempty")
    for H in family:
        if H.group is not G and not (H.group == G):
            raise GroupAxiomError("family member belongs to a different group")
    if not allow_conjugates:
        for i, H in enumerate(family):
            for K in family[i + 1:]:
                g = are_conjugate(H, K)
                if g is not None:
                    raise GroupAxiomError(
                        f"family has conjugate members {H.key()} and {K.key()} (conjugator {g})"
                    )
    return family


# -- coset spaces ----------------------------------------------------------


class CosetSpace:
    """F\\G: the disjoint union of right-coset spaces H\\G, H in the family.

    Points are pairs (index of H in F, right coset Hg); the space is
    discrete and carries the right translation action.  The stabilizer of
    the point Hg is g^-1 H g.
    """

    def __init__(self, G: FinGroup, family, allow_conjugates=True):
        self.group = G
        self.family = validate_family(G, family, allow_conjugates=allow_conjugates)
        points: list[tuple[int, frozenset]] = []
        index: dict[tuple[int, frozenset], int] = {}
        reps: list[tuple[int, int]] = []
        for fi, H in enumerate(self.family):
            seen = set()
            for g in range(G.n):
                coset = frozenset(G.op(h, g) for h in H.members)
                if coset not in seen:
                    seen.add(coset)
                    index[(fi, coset)] = len(points)
                    points.append((fi, coset))
                    reps.append((fi, g))
        self.points = points
        self.index = index
        self.reps = reps  # (family index, coset representative)
        n = len(points)
        act = np.empty((n, G.n), dtype=int)
        for p, (fi, coset) in enumerate(points):
            for g in range(G.n):
                act[p, g] = index[(fi, frozenset(G.op(c, g) for c in coset))]
        act.setflags(write=False)
        self.act = act
        stab = []
        for fi, coset in points:
            members = frozenset(
                g for g in range(G.n)
                if frozenset(G.op(c, g) for c in coset) == coset
            )
            stab.append(Subgroup(G, members))
        self.stabilizers = stab
        self.block_of = np.array([fi for fi, _ in points], dtype=int)

    @property
    def n(self) -> int:
        return len(self.points)

    def space(self) -> FinSpace:
        labels = [
            "H%d{%s}" % (fi, ",".join(sorted(self.group.label(c) for c in coset)))
            for fi, coset in self.points
        ]
        return discrete(self.n, labels=labels)

    def block(self, fi: int) -> list[int]:
        return [p for p, (f, _) in enumerate(self.points) if f == fi]

    def identity_point(self, fi: int) -> int:
        H = self.family[fi]
        return self.index[(fi, frozenset(H.members))]


def coset_space(G: FinGroup, family, allow_conjugates=True) -> CosetSpace:
    return CosetSpace(G, family, allow_conjugates=allow_conjugates)


# -- orbit types -----------------------------------------------------------


@dataclass(frozen=True)
class ClassOrder:
    """Conjugacy classes of a family with the contains-a-conjugate preorder.

    ``ge[a, b]`` holds iff a representative of class a contains a G-conjugate
    of a representative of class b.
    """

    group: FinGroup
    reps: tuple
    ge: np.ndarray
    class_of_member: tuple  # class index for each member of the input family

    @property
    def n(self) -> int:
        return len(self.reps)

    def class_of_subgroup(self, H: Subgroup):
        """Class index of an arbitrary subgroup, or None if not represented."""
        for a, R in enumerate(self.reps):
            if are_conjugate(R, H) is not None:
                return a
        return None

    def filtration_order(self) -> FinSpace:
        """The classes as a finite space: a <= b iff class a >= class b.

        With this orientation the orbit-type skeleta indexed by the classes
        satisfy the filtered-space containments.
        """
        labels = ["(" + ",".join(str(m) for m in R.key()) + ")" for R in self.reps]
        return FinSpace(self.ge, labels=labels, validate=False)


def subconjugate(H: Subgroup, K: Subgroup) -> bool:
    """True iff some G-conjugate of K is contained in H."""
    G = H.group
    if K.order > H.order:
        return False
    return any(K.conjugate(g).members <= H.members for g in range(G.n))


def orbit_type_preorder(G: FinGroup, family, require_distinct=False) -> ClassOrder:
    """The preorder (H) >= (K) iff H contains a G-conjugate of K."""
    family = validate_family(G, family, allow_conjugates=not require_distinct)
    reps: list[Subgroup] = []
    cls_of = []
    for H in family:
        for a, R in enumerate(reps):
            if are_conjugate(R, H) is not None:
                cls_of.append(a)
                break
        else:
            cls_of.append(len(reps))
            reps.append(H)
    k = len(reps)
    ge = np.zeros((k, k), dtype=bool)
    for a in range(k):
        for b in range(k):
            ge[a, b] = subconjugate(reps[a], reps[b])
    return ClassOrder(G, tuple(reps), ge, tuple(cls_of))


def quotient_group(G: FinGroup, Pi: Subgroup):
    """G/Pi for a normal subgroup Pi: returns (Q, proj, reps) with
    proj[g] the coset index of g and reps one representative per coset."""
    if not Pi.is_normal():
        bad = next(g for g in range(G.n) if Pi.conjugate(g).members != Pi.members)
        raise GroupAxiomError(f"subgroup is not normal; conjugation by {bad} moves it")
    index: dict[frozenset, int] = {}
    reps: list[int] = []
    proj = np.empty(G.n, dtype=int)
    for g in range(G.n):
        c = frozenset(G.op(p, g) for p in Pi.members)
        if c not in index:
            index[c] = len(reps)
            reps.append(g)
        proj[g] = index[c]
    k = len(reps)
    mult = [[int(proj[G.op(reps[a], reps[b])]) for b in range(k)] for a in range(k)]
    labels = [G.label(r) + "Pi" for r in reps]
    Q = FinGroup(mult, labels=labels, name=f"{G.name}/Pi")
    return Q, proj, reps


def parse_family(G: FinGroup, spec) -> list[Subgroup]:
    """Family from a keyword or explicit member lists.

    ``trivial`` -> {1}; ``all-subgroups`` -> conjugacy class representatives;
    otherwise a list of member index lists.
    """
    if spec == "trivial":
        return [trivial_subgroup(G)]
    if spec == "all-subgroups":
        return class_representatives(G)
    if spec == "full":
        return [full_subgroup(G)]
    return [Subgroup(G, frozenset(members)) for members in spec]
