"""Exact rational implementations of the metric-model formulas: the coarse
cone metric, the bounded level-preserving embedding, the Urysohn ratio, and
the reduction of a finite partition of unity to a disjointified cover.

All arithmetic is over Fraction; no floating point enters any check.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


class AnalyticError(ValueError):
    pass


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


# -- the coarse cone -----------------------------------------------------------


@dataclass(frozen=True)
class ConePoint:
    """A point [x, t] of the coarse cone; all points with t = 0 coincide."""

    t: Fraction
    x: object = None

    def __post_init__(self):
        t = _frac(self.t)
        if not (ZERO <= t <= ONE):
            raise AnalyticError(f"cone level {t} outside [0,1]")
        object.__setattr__(self, "t", t)

    def __eq__(self, other):
        if not isinstance(other, ConePoint):
            return NotImplemented
        if self.t == 0 and other.t == 0:
            return True
        return self.t == other.t and self.x == other.x

    def __hash__(self):
        return hash(self.t) if self.t == 0 else hash((self.t, self.x))


def cone_metric(d, a: ConePoint, b: ConePoint) -> Fraction:
    """|s - t| + min(s, t) * d(x, y).

    This is a metric exactly when the underlying metric has diameter at
    most 2 (any two points are within 2 through the conepoint).
    """
    s, t = a.t, b.t
    if s == 0 or t == 0:
        return abs(s - t)
    return abs(s - t) + min(s, t) * _frac(d(a.x, b.x))


def l1_metric(x, y) -> Fraction:
    return sum((abs(_frac(a) - _frac(b)) for a, b in zip(x, y)), ZERO)


def l1_norm(x) -> Fraction:
    return sum((abs(_frac(a)) for a in x), ZERO)


def iota(x, t) -> tuple:
    """The bounded level-preserving embedding [x, t] -> (t x / (1 + |x|), t).

    The first component has norm strictly below t, so with the sup norm on
    the pair the image of the level-t slice lies on the sphere of radius t.
    """
    t = _frac(t)
    if not (ZERO <= t <= ONE):
        raise AnalyticError(f"level {t} outside [0,1]")
    scale = t / (1 + l1_norm(x))
    return tuple(scale * _frac(v) for v in x), t


def urysohn_ratio(x, C, Z, d) -> Fraction:
    """d(x, C) / (d(x, Z) + d(x, C)): 0 on C, 1 on Z, defined whenever the
    two finite sets are disjoint enough that both distances never vanish
    together."""
    C, Z = list(C), list(Z)
    if not C or not Z:
        raise AnalyticError("both point sets must be nonempty")
    dc = min(_frac(d(x, c)) for c in C)
    dz = min(_frac(d(x, z)) for z in Z)
    if dc + dz == 0:
        raise AnalyticError("point lies in both sets; they must be disjoint")
    return dc / (dz + dc)


# -- exact piecewise-linear functions on [0,1] ---------------------------------


class PLFunc:
    """A piecewise-linear function on [0,1] with rational breakpoints.

    Stored as increasing breakpoints from 0 to 1 with values; linear in
    between.  Construction normalizes away collinear interior breakpoints,
    so equality of functions is equality of the representation.
    """

    __slots__ = ("breakpoints", "values")

    def __init__(self, breakpoints, values, normalize=True):
        bp = [_frac(b) for b in breakpoints]
        vals = [_frac(v) for v in values]
        if len(bp) != len(vals) or len(bp) < 2:
            raise AnalyticError("need matching breakpoints and values, at least two")
        if bp[0] != 0 or bp[-1] != 1:
            raise AnalyticError("breakpoints must start at 0 and end at 1")
        if any(b2 <= b1 for b1, b2 in zip(bp, bp[1:])):
            raise AnalyticError("breakpoints must be strictly increasing")
        if normalize:
            keep = [0]
            for k in range(1, len(bp) - 1):
                i = keep[-1]
                # drop the middle point of an exactly collinear triple
                lhs = (vals[k] - vals[i]) * (bp[k + 1] - bp[i])
                rhs = (vals[k + 1] - vals[i]) * (bp[k] - bp[i])
                if lhs != rhs:
                    keep.append(k)
            keep.append(len(bp) - 1)
            bp = [bp[k] for k in keep]
            vals = [vals[k] for k in keep]
        self.breakpoints = tuple(bp)
        self.values = tuple(vals)

    @classmethod
    def const(cls, c) -> "PLFunc":
        return cls((ZERO, ONE), (_frac(c), _frac(c)), normalize=False)

    @classmethod
    def linear(cls, v0, v1) -> "PLFunc":
        return cls((ZERO, ONE), (v0, v1))

    def __call__(self, x) -> Fraction:
        x = _frac(x)
        if not (ZERO <= x <= ONE):
            raise AnalyticError(f"argument {x} outside [0,1]")
        bp = self.breakpoints
        lo, hi = 0, len(bp) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if bp[mid] <= x:
                lo = mid
            else:
                hi = mid
        if x == bp[lo]:
            return self.values[lo]
        t = (x - bp[lo]) / (bp[hi] - bp[lo])
        return self.values[lo] + t * (self.values[hi] - self.values[lo])

    def refine(self, points) -> "PLFunc":
        grid = sorted(set(self.breakpoints) | {_frac(p) for p in points})
        return PLFunc(grid, [self(x) for x in grid], normalize=False)

    def _aligned(self, other: "PLFunc"):
        grid = sorted(set(self.breakpoints) | set(other.breakpoints))
        return grid, [self(x) for x in grid], [other(x) for x in grid]

    def __add__(self, other):
        grid, a, b = self._aligned(_as_pl(other))
        return PLFunc(grid, [x + y for x, y in zip(a, b)])

    def __sub__(self, other):
        grid, a, b = self._aligned(_as_pl(other))
        return PLFunc(grid, [x - y for x, y in zip(a, b)])

    def __mul__(self, scalar):
        c = _frac(scalar)
        return PLFunc(self.breakpoints, [c * v for v in self.values])

    __rmul__ = __mul__

    def _with_crossings(self, other: "PLFunc"):
        grid, a, b = self._aligned(other)
        full = []
        for k in range(len(grid) - 1):
            full.append((grid[k], a[k], b[k]))
            da, db = a[k + 1] - a[k], b[k + 1] - b[k]
            d0 = a[k] - b[k]
            d1 = a[k + 1] - b[k + 1]
            if (d0 > 0 > d1) or (d0 < 0 < d1):
                s = d0 / (d0 - d1)
                x = grid[k] + s * (grid[k + 1] - grid[k])
                va = a[k] + s * da
                full.append((x, va, va))
        full.append((grid[-1], a[-1], b[-1]))
        return full

    def min(self, other) -> "PLFunc":
        pts = self._with_crossings(_as_pl(other))
        return PLFunc([p[0] for p in pts], [min(p[1], p[2]) for p in pts])

    def max(self, other) -> "PLFunc":
        pts = self._with_crossings(_as_pl(other))
        return PLFunc([p[0] for p in pts], [max(p[1], p[2]) for p in pts])

    def is_nonnegative(self) -> bool:
        return all(v >= 0 for v in self.values)

    def support(self) -> "IntervalSet":
        """The relatively open set {f > 0}."""
        return _positive_set(list(self.breakpoints), list(self.values))

    def __eq__(self, other):
        return (isinstance(other, PLFunc) and self.breakpoints == other.breakpoints
                and self.values == other.values)

    def __hash__(self):
        return hash((self.breakpoints, self.values))

    def __repr__(self):
        pts = ", ".join(f"({b},{v})" for b, v in zip(self.breakpoints, self.values))
        return f"PLFunc[{pts}]"

    def to_json(self) -> dict:
        return {
            "breakpoints": [str(b) for b in self.breakpoints],
            "values": [str(v) for v in self.values],
        }

    @classmethod
    def from_json(cls, data: dict) -> "PLFunc":
        return cls([Fraction(b) for b in data["breakpoints"]],
                   [Fraction(v) for v in data["values"]])


def _as_pl(x) -> PLFunc:
    return x if isinstance(x, PLFunc) else PLFunc.const(x)


# -- finite unions of intervals in [0,1] ---------------------------------------


@dataclass(frozen=True)
class IntervalSet:
    """A finite union of intervals in [0,1], kept sorted, disjoint, and
    maximal; endpoint closedness is tracked exactly."""

    intervals: tuple  # (lo, hi, lo_closed, hi_closed); lo < hi, or lo == hi closed

    @classmethod
    def build(cls, pieces) -> "IntervalSet":
        pieces = [
            (_frac(lo), _frac(hi), bool(lc), bool(rc))
            for lo, hi, lc, rc in pieces
            if _frac(lo) < _frac(hi) or (_frac(lo) == _frac(hi) and lc and rc)
        ]
        pieces.sort()
        merged: list = []
        for lo, hi, lc, rc in pieces:
            if merged:
                plo, phi, plc, prc = merged[-1]
                touches = lo < phi or (lo == phi and (prc or lc))
                if touches:
                    nlc = plc or (lo == plo and lc)
                    if hi < phi or (hi == phi and prc):
                        nhi, nrc = phi, prc
                    else:
                        nhi, nrc = hi, rc
                    merged[-1] = (plo, nhi, nlc, nrc)
                    continue
            merged.append((lo, hi, lc, rc))
        return cls(tuple(merged))

    @classmethod
    def empty(cls) -> "IntervalSet":
        return cls(())

    @classmethod
    def whole(cls) -> "IntervalSet":
        return cls(((ZERO, ONE, True, True),))

    def is_empty(self) -> bool:
        return not self.intervals

    def contains(self, x) -> bool:
        x = _frac(x)
        for lo, hi, lc, rc in self.intervals:
            if lo < x < hi or (x == lo and lc) or (x == hi and rc):
                return True
        return False

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet.build(self.intervals + other.intervals)

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        for alo, ahi, alc, arc in self.intervals:
            for blo, bhi, blc, brc in other.intervals:
                lo = max(alo, blo)
                hi = min(ahi, bhi)
                if lo > hi:
                    continue
                lc = (self.contains(lo)) and (other.contains(lo))
                rc = (self.contains(hi)) and (other.contains(hi))
                if lo < hi or (lo == hi and lc and rc):
                    out.append((lo, hi, lc, rc))
        return IntervalSet.build(out)

    def subset_of(self, other: "IntervalSet") -> bool:
        return self.intersect(other) == self

    def __eq__(self, other):
        return isinstance(other, IntervalSet) and self.intervals == other.intervals

    def __hash__(self):
        return hash(self.intervals)

    def to_json(self):
        return [[str(lo), str(hi), lc, rc] for lo, hi, lc, rc in self.intervals]

    @classmethod
    def from_json(cls, data) -> "IntervalSet":
        return cls.build([(Fraction(lo), Fraction(hi), lc, rc) for lo, hi, lc, rc in data])


def _positive_set(grid, vals) -> IntervalSet:
    """{f > 0} for a PL function given on its grid."""
    pieces = []
    for k in range(len(grid) - 1):
        a, b = grid[k], grid[k + 1]
        va, vb = vals[k], vals[k + 1]
        if va > 0 and vb > 0:
            pieces.append((a, b, True, True))
        elif va > 0 and vb <= 0:
            x = a + (b - a) * va / (va - vb)
            pieces.append((a, x, True, False))
        elif va <= 0 and vb > 0:
            x = a + (b - a) * (-va) / (vb - va) if va < 0 else a
            pieces.append((x, b, False, True))
        # va <= 0 and vb <= 0: nothing (linear piece stays nonpositive)
    return IntervalSet.build(pieces)


# -- reduction of a partition of unity to a disjointified cover -----------------


@dataclass
class CoverReduction:
    names: list
    q_funcs: dict          # frozenset of indices -> PLFunc
    supports: dict         # frozenset -> IntervalSet (V_F)
    by_size: dict          # n -> IntervalSet (V_n)
    checks: dict
    max_overlap: int

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def to_json(self) -> dict:
        def key(F):
            return ",".join(str(i) for i in sorted(F))

        return {
            "names": self.names,
            "q": {key(F): f.to_json() for F, f in self.q_funcs.items()},
            "V": {key(F): s.to_json() for F, s in self.supports.items()},
            "V_by_size": {str(n): s.to_json() for n, s in self.by_size.items()},
            "checks": self.checks,
            "max_overlap": self.max_overlap,
            "ok": self.ok,
        }


def random_pl_partition(rng, n_funcs: int | None = None, max_breaks: int = 6):
    """A random exact PL partition of unity: rational weights at shared
    breakpoints, normalized columnwise, linear in between (so the sum is
    exactly 1 everywhere)."""
    n = n_funcs if n_funcs is not None else rng.randint(2, 8)
    interior = sorted({Fraction(rng.randint(1, 63), 64)
                       for _ in range(rng.randint(1, max_breaks))})
    grid = [ZERO] + interior + [ONE]
    cols = []
    for _ in grid:
        w = [rng.randint(0, 4) for _ in range(n)]
        if sum(w) == 0:
            w[rng.randrange(n)] = 1
        s = sum(w)
        cols.append([Fraction(v, s) for v in w])
    return [
        (f"t{i}", PLFunc(grid, [cols[j][i] for j in range(len(grid))]))
        for i in range(n)
    ]


def random_unit_square_point(rng, denominator: int = 64) -> tuple:
    return (Fraction(rng.randint(0, denominator), denominator),
            Fraction(rng.randint(0, denominator), denominator))


def check_cone_metric_axioms(rng, samples: int) -> dict:
    """Exact metric axioms for the cone metric over [0,1]^2 with the L1
    metric (diameter 2, so the triangle inequality holds exactly)."""
    failures = {"nonneg": 0, "symmetry": 0, "identity": 0, "triangle": 0}
    for _ in range(samples):
        pts = [
            ConePoint(Fraction(rng.randint(0, 16), 16), random_unit_square_point(rng))
            for _ in range(3)
        ]
        a, b, c = pts
        dab = cone_metric(l1_metric, a, b)
        dba = cone_metric(l1_metric, b, a)
        dbc = cone_metric(l1_metric, b, c)
        dac = cone_metric(l1_metric, a, c)
        if dab < 0:
            failures["nonneg"] += 1
        if dab != dba:
            failures["symmetry"] += 1
        if (dab == 0) != (a == b):
            failures["identity"] += 1
        if dac > dab + dbc:
            failures["triangle"] += 1
    failures["samples"] = samples
    failures["ok"] = all(failures[k] == 0 for k in ("nonneg", "symmetry", "identity", "triangle"))
    return failures


def reduce_cover(part, supports=None) -> CoverReduction:
    """Disjointify a finite exact partition of unity on [0,1].

    For each nonempty index subset F the function q_F is the positive part
    of min over F minus max over the complement; its support V_F refines
    the original cover, the V_F of equal size are pairwise disjoint, and
    all of them together still cover [0,1].  Everything is verified in
    exact arithmetic.
    """
    part = list(part)
    if not part:
        raise AnalyticError("partition of unity must be nonempty")
    names = [str(name) for name, _ in part]
    funcs = [f for _, f in part]
    n = len(funcs)
    for name, f in zip(names, funcs):
        if not f.is_nonnegative():
            raise AnalyticError(f"partition function {name} is negative somewhere")
    total = funcs[0]
    for f in funcs[1:]:
        total = total + f
    if total != PLFunc.const(1):
        raise AnalyticError("functions do not sum to 1 exactly")
    cover = [f.support() for f in funcs] if supports is None else list(supports)
    if len(cover) != n:
        raise AnalyticError("one cover member per function required")
    for name, f, U in zip(names, funcs, cover):
        if not f.support().subset_of(U):
            raise AnalyticError(f"support of {name} is not inside its cover member")

    # common refined grid: all breakpoints plus all pairwise crossings, so
    # every function is linear and the pointwise order is constant on each
    # refined segment
    grid = sorted({b for f in funcs for b in f.breakpoints})
    cross = set()
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(len(grid) - 1):
                a, b = grid[k], grid[k + 1]
                d0 = funcs[i](a) - funcs[j](a)
                d1 = funcs[i](b) - funcs[j](b)
                if (d0 > 0 > d1) or (d0 < 0 < d1):
                    cross.add(a + (b - a) * d0 / (d0 - d1))
    grid = sorted(set(grid) | cross)
    vals = [[f(x) for x in grid] for f in funcs]

    q_funcs: dict = {}
    supports_out: dict = {}
    by_size: dict = {}
    all_indices = list(range(n))
    subsets = []
    for bits in range(1, 1 << n):
        F = frozenset(i for i in all_indices if bits >> i & 1)
        subsets.append(F)
    for F in subsets:
        comp = [i for i in all_indices if i not in F]
        # min over F minus max over the complement, on the common grid; the
        # positive part needs its zero crossings as breakpoints
        diff = []
        for k in range(len(grid)):
            lo = min(vals[i][k] for i in F)
            hi = max((vals[i][k] for i in comp), default=ZERO)
            diff.append(lo - hi)
        xs = list(grid)
        full_x, full_v = [], []
        for k in range(len(xs) - 1):
            full_x.append(xs[k])
            full_v.append(max(ZERO, diff[k]))
            d0, d1 = diff[k], diff[k + 1]
            if (d0 > 0 > d1) or (d0 < 0 < d1):
                x = xs[k] + (xs[k + 1] - xs[k]) * d0 / (d0 - d1)
                full_x.append(x)
                full_v.append(ZERO)
        full_x.append(xs[-1])
        full_v.append(max(ZERO, diff[-1]))
        q_funcs[F] = PLFunc(full_x, full_v)
        V = _positive_set(full_x, full_v)
        supports_out[F] = V
        size = len(F)
        by_size[size] = by_size.get(size, IntervalSet.empty()).union(V)

    checks = {}
    # (i) disjointness of equal-size supports
    disjoint = True
    for a in range(len(subsets)):
        for b in range(a + 1, len(subsets)):
            E, F = subsets[a], subsets[b]
            if len(E) == len(F) and not supports_out[E].intersect(supports_out[F]).is_empty():
                disjoint = False
    checks["equal_size_disjoint"] = disjoint
    # (ii) the V_F together cover [0,1]
    union = IntervalSet.empty()
    for F in subsets:
        union = union.union(supports_out[F])
    checks["covers_unit_interval"] = union == IntervalSet.whole()
    # (iii) each V_F lies inside a member of F
    refines = all(
        supports_out[F].is_empty() or any(supports_out[F].subset_of(cover[i]) for i in F)
        for F in subsets
    )
    checks["refines_cover"] = refines
    # (iv) local finiteness: the family is finite and the overlap count is
    # bounded; report the maximum number of V_F meeting a point
    sample_points = set(grid)
    for F in subsets:
        for lo, hi, _, _ in supports_out[F].intervals:
            sample_points.add(lo)
            sample_points.add(hi)
    samples = sorted(sample_points)
    mids = [(a + b) / 2 for a, b in zip(samples, samples[1:])]
    max_overlap = 0
    for x in list(samples) + mids:
        cnt = sum(1 for F in subsets if supports_out[F].contains(x))
        max_overlap = max(max_overlap, cnt)
    checks["locally_finite"] = max_overlap <= len(subsets)
    return CoverReduction(names, q_funcs, supports_out, by_size, checks, max_overlap)
