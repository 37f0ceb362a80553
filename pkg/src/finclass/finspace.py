"""Finite topological spaces stored as specialization preorders.

A finite space is determined by its specialization preorder: x <= y iff
every open set containing x contains y (equivalently x lies in the closure
of {y}).  Open sets are exactly the up-sets of <=, so the preorder is a
lossless encoding and every construction here works on boolean relation
matrices.  Non-T0 spaces are allowed throughout; T0 is a checkable flag.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np


class FinSpaceError(ValueError):
    pass


def transitive_closure(rel: np.ndarray) -> np.ndarray:
    """Reflexive-transitive closure of a boolean relation matrix."""
    out = rel.astype(bool).copy()
    np.fill_diagonal(out, True)
    while True:
        step = out @ out
        if (step == out).all():
            return out
        out = step


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=bool)
    a.setflags(write=False)
    return a


class FinSpace:
    """A finite topological space as its specialization preorder.

    Fields: ``n`` point count, ``leq`` an n x n boolean matrix with
    leq[i, j] iff i <= j, ``labels`` optional point names.  ``leq`` is
    validated to be reflexive and transitive and kept read-only.
    """

    __slots__ = ("n", "leq", "labels")

    def __init__(self, leq, labels=None, validate=True):
        leq = np.asarray(leq, dtype=bool)
        n = leq.shape[0]
        if leq.shape != (n, n):
            raise FinSpaceError(f"leq must be square, got {leq.shape}")
        if validate:
            if not leq.diagonal().all():
                raise FinSpaceError("leq is not reflexive")
            if ((leq @ leq) & ~leq).any():
                raise FinSpaceError("leq is not transitive")
        if labels is not None:
            labels = tuple(str(x) for x in labels)
            if len(labels) != n:
                raise FinSpaceError("label count mismatch")
        self.n = n
        self.leq = _freeze(leq)
        self.labels = labels

    # -- basic queries ----------------------------------------------------

    def le(self, i, j) -> bool:
        return bool(self.leq[i, j])

    def up_set(self, i) -> frozenset:
        """Minimal open neighborhood U_i = {j : i <= j}."""
        return frozenset(np.flatnonzero(self.leq[i]))

    def down_set(self, i) -> frozenset:
        """Closure of {i}: all j with j <= i."""
        return frozenset(np.flatnonzero(self.leq[:, i]))

    def is_t0(self) -> bool:
        return not (self.leq & self.leq.T & ~np.eye(self.n, dtype=bool)).any()

    def is_open(self, pts) -> bool:
        mask = np.zeros(self.n, dtype=bool)
        mask[list(pts)] = True
        return not (self.leq[mask][:, ~mask]).any() if (~mask).any() else True

    def label(self, i) -> str:
        return self.labels[i] if self.labels is not None else str(i)

    def __eq__(self, other):
        return (
            isinstance(other, FinSpace)
            and self.n == other.n
            and (self.leq == other.leq).all()
        )

    def __hash__(self):
        return hash((self.n, self.leq.tobytes()))

    def __repr__(self):
        return f"FinSpace(n={self.n})"

    def relabel(self, labels) -> "FinSpace":
        return FinSpace(self.leq, labels=labels, validate=False)

    def to_json(self) -> dict:
        pairs = [[int(i), int(j)] for i, j in zip(*np.nonzero(self.leq)) if i != j]
        return {
            "points": [self.label(i) for i in range(self.n)],
            "leq": pairs,
        }

    @classmethod
    def from_json(cls, data: dict) -> "FinSpace":
        points = data["points"]
        return space_from_relation(len(points), data.get("leq", []), labels=points)


@dataclass(frozen=True)
class SpaceMap:
    """A point function between finite spaces; continuity = monotonicity."""

    dom: FinSpace
    cod: FinSpace
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        if len(self.values) != self.dom.n:
            raise FinSpaceError("map must assign every point of the domain")
        if any(not (0 <= v < self.cod.n) for v in self.values):
            raise FinSpaceError("map value out of range")

    def __call__(self, i):
        return self.values[i]

    def compose(self, other: "SpaceMap") -> "SpaceMap":
        """self after other (other first)."""
        return SpaceMap(other.dom, self.cod, tuple(self.values[v] for v in other.values))

    def to_json(self) -> dict:
        return {
            "dom": self.dom.to_json(),
            "cod": self.cod.to_json(),
            "values": list(self.values),
        }

    @classmethod
    def from_json(cls, data: dict) -> "SpaceMap":
        return cls(FinSpace.from_json(data["dom"]), FinSpace.from_json(data["cod"]),
                   tuple(data["values"]))


def space_from_relation(points: int, pairs, labels=None) -> FinSpace:
    """Finite space generated by relations i <= j; closure is applied."""
    rel = np.eye(points, dtype=bool)
    for i, j in pairs:
        if not (0 <= i < points and 0 <= j < points):
            raise FinSpaceError(f"pair ({i},{j}) out of range for {points} points")
        rel[i, j] = True
    return FinSpace(transitive_closure(rel), labels=labels, validate=False)


def discrete(n: int, labels=None) -> FinSpace:
    return FinSpace(np.eye(n, dtype=bool), labels=labels, validate=False)


def sierpinski() -> FinSpace:
    """The Sierpinski space: 0 <= 1, opens {}, {1}, {0,1}."""
    return space_from_relation(2, [(0, 1)], labels=["0", "1"])


def bi_sierpinski() -> FinSpace:
    """Three-point particular-point space: -1 <= 0 >= +1."""
    return space_from_relation(3, [(0, 1), (2, 1)], labels=["-1", "0", "+1"])


def t0_classes(X: FinSpace) -> list[list[int]]:
    """Equivalence classes of mutually specializing points."""
    eqv = X.leq & X.leq.T
    seen = np.zeros(X.n, dtype=bool)
    classes = []
    for i in range(X.n):
        if not seen[i]:
            members = np.flatnonzero(eqv[i])
            seen[members] = True
            classes.append([int(m) for m in members])
    return classes


def opens_of(X: FinSpace, max_opens: int | None = 1_000_000):
    """All open sets (up-sets) of X, plus the minimal base {U_x}.

    Returns (opens, base) with opens a sorted list of frozensets.  Raises
    if the open-set count would exceed ``max_opens``.
    """
    classes = t0_classes(X)
    k = len(classes)
    succ = [
        frozenset(
            b for b in range(k)
            if b != a and X.leq[classes[a][0], classes[b][0]]
        )
        for a in range(k)
    ]
    # an up-set may include a class only if all strict successors are in, so
    # decide classes successors-first (fewer successors = decided earlier)
    order = sorted(range(k), key=lambda a: (len(succ[a]), a))
    opens: list[frozenset] = []
    current: set = set()

    def rec(i):
        if max_opens is not None and len(opens) > max_opens:
            raise FinSpaceError("open-set count exceeds max_opens")
        if i == k:
            opens.append(frozenset(p for c in current for p in classes[c]))
            return
        a = order[i]
        rec(i + 1)  # class a stays out
        if succ[a] <= current:
            current.add(a)
            rec(i + 1)
            current.remove(a)

    rec(0)
    base = sorted({X.up_set(i) for i in range(X.n)}, key=lambda s: (len(s), sorted(s)))
    opens.sort(key=lambda s: (len(s), sorted(s)))
    return opens, base


def specialization_of_topology(opens) -> FinSpace:
    """Recover the specialization preorder from a full list of open sets."""
    opens = [frozenset(U) for U in opens]
    pts = frozenset().union(*opens) if opens else frozenset()
    n = len(pts)
    if pts != frozenset(range(n)):
        raise FinSpaceError("opens must use point indices 0..n-1")
    oset = set(opens)
    if frozenset() not in oset or pts not in oset:
        raise FinSpaceError("not a topology: missing empty set or whole set")
    for U in oset:
        for V in oset:
            if U | V not in oset or U & V not in oset:
                raise FinSpaceError("not a topology: not closed under union/intersection")
    leq = np.ones((n, n), dtype=bool)
    for U in opens:
        out = np.ones(n, dtype=bool)
        out[list(U)] = False
        for i in U:
            leq[i] &= ~out  # an open containing i must contain j whenever i <= j
    return FinSpace(leq)


def is_continuous(f: SpaceMap) -> bool:
    """Continuity of a map of finite spaces: monotone w.r.t. <=."""
    v = np.asarray(f.values)
    return bool(f.cod.leq[v[:, None], v[None, :]][f.dom.leq].all())


def is_continuous_via_opens(f: SpaceMap) -> bool:
    """Definitional continuity: every open preimage is open (cross-check)."""
    opens, _ = opens_of(f.cod)
    for U in opens:
        pre = frozenset(i for i in range(f.dom.n) if f.values[i] in U)
        if not f.dom.is_open(pre):
            return False
    return True


def product(X: FinSpace, Y: FinSpace) -> FinSpace:
    """Product space; points indexed row-major as i*|Y| + j."""
    leq = np.kron(X.leq, Y.leq)
    labels = None
    if X.labels is not None or Y.labels is not None:
        labels = [f"({X.label(i)},{Y.label(j)})" for i in range(X.n) for j in range(Y.n)]
    return FinSpace(leq, labels=labels, validate=False)


def subspace(X: FinSpace, S) -> FinSpace:
    S = sorted(set(int(s) for s in S))
    if any(not (0 <= s < X.n) for s in S):
        raise FinSpaceError("subspace points out of range")
    leq = X.leq[np.ix_(S, S)]
    labels = [X.label(s) for s in S] if X.labels is not None else None
    return FinSpace(leq, labels=labels, validate=False)


def quotient(X: FinSpace, partition) -> tuple[FinSpace, SpaceMap]:
    """Quotient space of X by a partition, with the projection map."""
    blocks = [sorted(set(int(x) for x in b)) for b in partition]
    seen = [x for b in blocks for x in b]
    if sorted(seen) != list(range(X.n)):
        raise FinSpaceError("partition must cover X exactly once")
    k = len(blocks)
    cls = np.empty(X.n, dtype=int)
    for b, blk in enumerate(blocks):
        cls[blk] = b
    rel = np.zeros((k, k), dtype=bool)
    ii, jj = np.nonzero(X.leq)
    rel[cls[ii], cls[jj]] = True
    Q = FinSpace(transitive_closure(rel), validate=False)
    return Q, SpaceMap(X, Q, tuple(int(c) for c in cls))


def indiscrete_cone(X: FinSpace) -> FinSpace:
    """Adjoin a point 0 whose only neighborhood is the whole space."""
    n = X.n + 1
    leq = np.zeros((n, n), dtype=bool)
    leq[1:, 1:] = X.leq
    leq[0, :] = True
    labels = None
    if X.labels is not None:
        labels = ["0"] + [X.label(i) for i in range(X.n)]
    return FinSpace(leq, labels=labels, validate=False)


def weight(X: FinSpace) -> int:
    """Minimum cardinality of a base: the number of distinct minimal opens."""
    return len({X.up_set(i) for i in range(X.n)})


# -- canonical forms ------------------------------------------------------


@dataclass(frozen=True)
class CanonicalForm:
    perm: tuple          # perm[k] = original index placed at position k
    certificate: bytes   # equal certificates iff isomorphic spaces
    space: FinSpace      # the relabeled representative


def _encode(leq: np.ndarray, perm) -> bytes:
    m = leq[np.ix_(perm, perm)]
    return np.packbits(m).tobytes()


def _refine(leq: np.ndarray, colors: np.ndarray) -> np.ndarray:
    n = len(colors)
    strict = leq & ~leq.T
    eqv = leq & leq.T
    while True:
        sigs = []
        for i in range(n):
            up = tuple(sorted(colors[strict[i]]))
            dn = tuple(sorted(colors[strict[:, i]]))
            eq = tuple(sorted(colors[eqv[i]]))
            sigs.append((int(colors[i]), up, dn, eq))
        order = sorted(range(n), key=lambda i: sigs[i])
        new = np.empty(n, dtype=int)
        c = 0
        for k, i in enumerate(order):
            if k > 0 and sigs[i] != sigs[order[k - 1]]:
                c += 1
            new[i] = c
        if (new == colors).all():
            return colors
        colors = new


def _is_transposition_auto(leq: np.ndarray, u: int, v: int) -> bool:
    n = leq.shape[0]
    mask = np.ones(n, dtype=bool)
    mask[[u, v]] = False
    return (
        (leq[u, mask] == leq[v, mask]).all()
        and (leq[mask, u] == leq[mask, v]).all()
        and leq[u, v] == leq[v, u]
    )


def canonical_form(X: FinSpace, max_nodes: int = 200_000) -> CanonicalForm:
    """Canonical relabeling via invariant refinement with backtracking.

    Isomorphic spaces get identical certificates; ties are broken by the
    lexicographically least packed adjacency encoding.
    """
    n, leq = X.n, X.leq
    if n == 0:
        return CanonicalForm((), b"", X)
    init = np.zeros(n, dtype=int)
    best: list = [None, None]
    nodes = [0]

    def search(colors):
        nodes[0] += 1
        if nodes[0] > max_nodes:
            raise FinSpaceError("canonical_form search exceeded node budget")
        colors = _refine(leq, colors)
        order = sorted(range(n), key=lambda i: (colors[i], i))
        counts = np.bincount(colors)
        if (counts <= 1).all():
            enc = _encode(leq, order)
            if best[0] is None or enc < best[0]:
                best[0], best[1] = enc, tuple(order)
            return
        target = min(c for c in set(colors.tolist()) if counts[c] > 1)
        cell = [i for i in range(n) if colors[i] == target]
        tried: list[int] = []
        for v in cell:
            if any(_is_transposition_auto(leq, v, u) for u in tried):
                continue
            tried.append(v)
            child = colors.copy()
            child[child >= target] += 1
            child[v] = target
            search(child)

    search(init)
    perm = best[1]
    cert = bytes([n]) + best[0] if n < 256 else n.to_bytes(4, "big") + best[0]
    canon = FinSpace(leq[np.ix_(perm, perm)], validate=False)
    return CanonicalForm(perm, cert, canon)


def brute_force_isomorphism(X: FinSpace, Y: FinSpace):
    """Exhaustive isomorphism search; None when none exists (test oracle)."""
    if X.n != Y.n:
        return None
    ex = {(int(i), int(j)) for i, j in zip(*np.nonzero(X.leq))}
    ey = {(int(i), int(j)) for i, j in zip(*np.nonzero(Y.leq))}
    if len(ex) != len(ey):
        return None
    for p in permutations(range(X.n)):
        if {(p[i], p[j]) for i, j in ex} == ey:
            return p
    return None


def all_preorders(n: int):
    """Every reflexive-transitive boolean relation on n labeled points."""
    if n == 0:
        yield np.zeros((0, 0), dtype=bool)
        return
    off = [(i, j) for i in range(n) for j in range(n) if i != j]
    for bits in range(1 << len(off)):
        rel = np.eye(n, dtype=bool)
        for k, (i, j) in enumerate(off):
            if bits >> k & 1:
                rel[i, j] = True
        if not ((rel @ rel) & ~rel).any():
            yield rel
