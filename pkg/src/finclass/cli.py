"""Command-line entry point: build classifying spaces, classify G-spaces,
pull back, enumerate bundle classes, verify theorem instances, and reduce
covers.  All input and output is JSON; reports echo the configuration and
seed and are byte-deterministic for a fixed configuration.

Exit codes: 0 success, 1 input or usage error, 2 a theorem-instance check
was falsified (which would indicate an implementation bug, not bad input).
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import analytic, enumeration, pullbacks
from .classifying import BudgetExceeded, build_B, build_E, verify_tube_decomposition
from .enumeration import (
    CellComplex,
    MapBudgetExceeded,
    circle_complex,
    enumerate_bundles,
    interval_complex,
    oracle_bundles,
)
from .finspace import FinSpace, FinSpaceError, opens_of
from .groups import FinGroup, GroupAxiomError, Subgroup, builtin_group, parse_family
from .gspaces import GSpace, GSpaceError
from .pullbacks import CoverError, CoverFailure, cover_kind, find_tube_cover


class InputError(ValueError):
    pass


class Falsified(RuntimeError):
    def __init__(self, report):
        super().__init__("theorem-instance check failed")
        self.report = report


def _plain(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, frozenset):
        return sorted(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_plain) + "\n"


def _emit(args, payload: dict, ok: bool):
    envelope = {
        "command": args.command,
        "config": {k: v for k, v in sorted(vars(args).items()) if k != "func"},
        "seed": getattr(args, "seed", 0),
        "ok": ok,
        "report": payload,
    }
    text = canonical_json(envelope)
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return envelope


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read JSON from {path}: {exc}") from exc


def _load_group(spec: str) -> FinGroup:
    if spec is None:
        raise InputError("--group is required")
    if Path(spec).suffix == ".json" or Path(spec).exists():
        return FinGroup.from_json(_load_json(spec))
    return builtin_group(spec)


def _load_family(G: FinGroup, spec: str):
    if spec is None:
        raise InputError("--family is required")
    if spec in ("trivial", "all-subgroups", "full"):
        return parse_family(G, spec)
    data = _load_json(spec)
    members = data["subgroups"] if isinstance(data, dict) else data
    return parse_family(G, members)


def _load_gspace(spec: str) -> GSpace:
    return GSpace.from_json(_load_json(spec))


def _load_complex(spec: str) -> CellComplex:
    if spec == "circle":
        return circle_complex()
    if spec == "interval":
        return interval_complex()
    return CellComplex.from_json(_load_json(spec))


def _figures_dir(args):
    d = getattr(args, "figures", None)
    if d:
        Path(d).mkdir(parents=True, exist_ok=True)
    return d


# -- subcommands ----------------------------------------------------------------


def cmd_build_classifying(args):
    G = _load_group(args.group)
    family = _load_family(G, args.family)
    E = build_E(G, family, args.kappa, budget=args.budget_points,
                allow_conjugates=args.allow_conjugates)
    report = verify_tube_decomposition(E)
    if E.n <= 2000:
        codes = E.all_codes()
        report["points"] = [E.point_label(c) for c in codes]
        report["gspace"] = E.to_gspace(cap=2000).to_json()
        B, reps = build_B(E, cap=2000)
        report["orbit_count"] = int(len(reps))
    figs = _figures_dir(args)
    if figs and E.n <= 400:
        from . import viz

        viz.hasse_figure(E.to_gspace(cap=400).space, str(Path(figs) / "classifying_space.png"),
                         title=f"E(kappa={E.kappa}) for {G.name}")
        B, reps = build_B(E, cap=400)
        viz.hasse_figure(B, str(Path(figs) / "orbit_space.png"),
                         title=f"B(kappa={E.kappa}) for {G.name}")
    _emit(args, report, report["ok"])
    if not report["ok"]:
        raise Falsified(report)


def cmd_classify(args):
    G_space = _load_gspace(args.gspace)
    family = _load_family(G_space.group, args.family)
    charts = find_tube_cover(G_space, family)
    if isinstance(charts, CoverFailure):
        raise InputError(
            f"no tube cover within the family: point {charts.point} with isotropy "
            f"{charts.isotropy} is not coverable ({charts.reasons})"
        )
    data = pullbacks.classifying_map(G_space, charts, family)
    kind = cover_kind(G_space, charts)
    report = {
        "kappa": len(charts),
        "cover_kind": kind,
        "family": [sorted(H.members) for H in family],
        "group": G_space.group.to_json(),
        "base": data.orbit_space.to_json(),
        "orbit_of_point": list(data.proj.values),
        "F_codes": [int(c) for c in data.F_codes],
        "f_codes": [int(c) for c in data.f_codes],
        "checks": data.checks,
        "lands_in_isovariant_part": pullbacks.lands_in_isovariant_part(data),
    }
    _emit(args, report, data.ok)
    if not data.ok:
        raise Falsified(report)


def cmd_pullback(args):
    fmap = _load_json(args.map)
    src = fmap.get("report", fmap)
    if args.classifying:
        # parameters of E from a build-classifying report instead
        env = _load_json(args.classifying)
        cfg = env.get("config", env)
        G = _load_group(cfg["group"])
        family = _load_family(G, cfg["family"])
        kappa = cfg["kappa"]
    else:
        G = FinGroup.from_json(src["group"])
        family = parse_family(G, src["family"])
        kappa = src["kappa"]
    E = build_E(G, family, kappa, allow_conjugates=True)
    base = FinSpace.from_json(src["base"])
    bundle = pullbacks.pullback(base, np.asarray(src["f_codes"], dtype=np.int64), E)
    validation = bundle.validate()
    report = {"bundle": bundle.to_json(), "validation": validation}
    _emit(args, report, validation["ok"])
    if not validation["ok"]:
        raise Falsified(report)


def cmd_enumerate(args):
    K = _load_complex(args.complex)
    G = _load_group(args.group)
    result = enumerate_bundles(K, G, kappa=args.kappa, budget_maps=args.budget_maps,
                               workers=args.workers, budget_points=args.budget_points)
    report = {
        "base": result.base.to_json(),
        "group": G.name,
        "kappa": result.kappa,
        "map_count": result.map_count,
        "class_count": len(result.classes),
        "classes": [c.to_json() for c in result.classes],
    }
    ok = True
    if args.oracle:
        oracle = oracle_bundles(K, G)
        agrees = oracle.certificates() == result.certificates()
        report["oracle_class_count"] = len(oracle.classes)
        report["oracle_agrees"] = agrees
        ok = agrees
    figs = _figures_dir(args)
    if figs:
        from . import viz

        viz.class_count_figure(result, str(Path(figs) / "class_multiplicities.png"))
        for k, cls in enumerate(result.classes):
            viz.hasse_figure(cls.representative.total.space,
                             str(Path(figs) / f"class_{k}_total.png"),
                             title=f"class {k} total space")
    _emit(args, report, ok)
    if not ok:
        raise Falsified(report)


def cmd_verify(args):
    thm = args.thm
    if thm == "1.4":
        G = _load_group(args.group)
        family = _load_family(G, args.family)
        report = verify_tube_decomposition(
            build_E(G, family, args.kappa, budget=args.budget_points,
                    allow_conjugates=args.allow_conjugates))
    elif thm == "2.1":
        X = _load_gspace(args.gspace)
        family = _load_family(X.group, args.family)
        charts = find_tube_cover(X, family)
        if isinstance(charts, CoverFailure):
            raise InputError(f"no tube cover: witness point {charts.point}")
        report = pullbacks.verify_psi(X, charts, family)
    elif thm == "3.7":
        X = _load_gspace(args.gspace)
        family = _load_family(X.group, args.family)
        charts_a = find_tube_cover(X, family)
        charts_b = find_tube_cover(X, family, per_orbit=True)
        if isinstance(charts_a, CoverFailure) or isinstance(charts_b, CoverFailure):
            raise InputError("no tube cover for the homotopy instance")
        hom = pullbacks.homotopy_phi(X, charts_a, charts_b, family)
        report = dict(hom.checks)
        report["quotient_filtered"] = pullbacks.homotopy_quotient_filtered(X, hom, family)
        report["ok"] = all(report.values())
    elif thm == "2.7":
        X = _load_gspace(args.gspace)
        family = _load_family(X.group, args.family)
        if args.pi is None:
            raise InputError("--pi is required for the factorization check")
        members = frozenset(int(v) for v in args.pi.split(","))
        Pi = Subgroup(X.group, members)
        charts = find_tube_cover(X, family)
        if isinstance(charts, CoverFailure):
            raise InputError(f"no tube cover: witness point {charts.point}")
        report = pullbacks.equivariant_factorization(X, Pi, charts, family)
    else:
        raise InputError(f"unknown theorem {thm!r}; choose from 1.4, 2.1, 2.7, 3.7")
    _emit(args, report, report["ok"])
    if not report["ok"]:
        raise Falsified(report)


def cmd_reduce_cover(args):
    data = _load_json(args.partition)
    entries = data["functions"] if isinstance(data, dict) else data
    part = []
    supports = []
    has_supports = False
    for k, entry in enumerate(entries):
        f = analytic.PLFunc.from_json(entry)
        name = entry.get("name", f"t{k}")
        part.append((name, f))
        if "support" in entry:
            has_supports = True
            supports.append(analytic.IntervalSet.from_json(entry["support"]))
        else:
            supports.append(f.support())
    red = analytic.reduce_cover(part, supports=supports if has_supports else None)
    report = red.to_json()
    figs = _figures_dir(args)
    if figs:
        from . import viz

        viz.partition_figure(part, red, str(Path(figs) / "cover_reduction.png"))
    _emit(args, report, red.ok)
    if not red.ok:
        raise Falsified(report)


def cmd_selftest(args):
    rng = random.Random(args.seed)
    report = {}
    # duality and continuity foundations, exhaustive on up to 3 points
    from .finspace import (
        all_preorders,
        is_continuous,
        is_continuous_via_opens,
        specialization_of_topology,
        SpaceMap,
    )

    ok = True
    spaces = [FinSpace(rel, validate=False) for n in range(4) for rel in all_preorders(n)]
    for X in spaces:
        opens, _ = opens_of(X)
        ok &= specialization_of_topology(opens) == X if X.n else True
    report["duality_roundtrip"] = ok
    agree = True
    import itertools

    for X in spaces:
        for Y in spaces:
            if X.n == 0 or X.n * Y.n > 9:
                continue
            for vals in itertools.product(range(Y.n), repeat=X.n):
                f = SpaceMap(X, Y, vals)
                agree &= is_continuous(f) == is_continuous_via_opens(f)
    report["monotone_iff_continuous"] = agree
    # a tube-decomposition instance
    G = builtin_group("S3")
    fam = parse_family(G, "all-subgroups")
    report["tube_decomposition"] = verify_tube_decomposition(build_E(G, fam, 2))["ok"]
    # a pullback-reconstruction instance
    from .gspaces import coset_gspace
    from .groups import coset_space

    X = coset_gspace(coset_space(G, fam))
    charts = find_tube_cover(X, fam)
    report["pullback_reconstruction"] = (
        not isinstance(charts, CoverFailure)
        and pullbacks.verify_psi(X, charts, fam)["ok"]
    )
    # enumeration against the oracle
    res = enumerate_bundles(circle_complex(), builtin_group("Z2"))
    ora = oracle_bundles(circle_complex(), builtin_group("Z2"))
    report["circle_enumeration"] = (
        len(res.classes) == 2 and res.certificates() == ora.certificates()
    )
    # analytic formulas
    report["cone_metric"] = analytic.check_cone_metric_axioms(rng, 500)["ok"]
    part_ok = True
    for _ in range(5):
        red = analytic.reduce_cover(analytic.random_pl_partition(rng))
        part_ok &= red.ok
    report["cover_reduction"] = part_ok
    report["ok"] = all(v if isinstance(v, bool) else True for v in report.values())
    _emit(args, report, report["ok"])
    if not report["ok"]:
        raise Falsified(report)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="finclass",
        description="finite classifying spaces: build, classify, enumerate, verify",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, *, group=False, family=False, kappa=False, gspace=False):
        if group:
            sp.add_argument("--group", help="builtin name (Z<n>, S3, D4, Q8, Z2xZ2) or JSON path")
        if family:
            sp.add_argument("--family", help="'trivial', 'all-subgroups', 'full', or JSON path")
        if kappa:
            sp.add_argument("--kappa", type=int, default=None, help="index count")
        if gspace:
            sp.add_argument("--gspace", help="GSpace JSON path")
        sp.add_argument("--budget-points", type=int, default=100_000, dest="budget_points")
        sp.add_argument("--budget-maps", type=int, default=1_000_000, dest="budget_maps")
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default=None, help="write the JSON report here")
        sp.add_argument("--figures", default=None, help="directory for rendered figures")

    sp = sub.add_parser("build-classifying", help="build and verify a classifying space")
    common(sp, group=True, family=True, kappa=True)
    sp.add_argument("--allow-conjugates", action="store_true", dest="allow_conjugates")
    sp.set_defaults(func=cmd_build_classifying, kappa=1)

    sp = sub.add_parser("classify", help="tube cover and classifying map of a G-space")
    common(sp, family=True, gspace=True)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("pullback", help="pull back a classifying map to a bundle")
    common(sp)
    sp.add_argument("--map", required=True, help="classify output JSON")
    sp.add_argument("--classifying", default=None,
                    help="build-classifying output to take E's parameters from")
    sp.set_defaults(func=cmd_pullback)

    sp = sub.add_parser("enumerate", help="enumerate bundle classes over a complex")
    common(sp, group=True, kappa=True)
    sp.add_argument("--complex", required=True,
                    help="'circle', 'interval', or complex JSON path")
    sp.add_argument("--oracle", action="store_true",
                    help="cross-check against the brute-force oracle")
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("verify", help="check a theorem instance; exit 2 if falsified")
    common(sp, group=True, family=True, kappa=True, gspace=True)
    sp.add_argument("--thm", required=True, choices=["1.4", "2.1", "2.7", "3.7"])
    sp.add_argument("--pi", default=None, help="member indices of the normal subgroup, comma-separated")
    sp.add_argument("--allow-conjugates", action="store_true", dest="allow_conjugates")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("reduce-cover", help="disjointify a PL partition of unity")
    common(sp)
    sp.add_argument("--partition", required=True, help="partition JSON path")
    sp.set_defaults(func=cmd_reduce_cover)

    sp = sub.add_parser("selftest", help="run the condensed invariant suite")
    common(sp)
    sp.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses exit code 2 for usage errors; 2 is reserved here
        # for falsified theorem instances, so usage problems map to 1
        return 0 if exc.code in (0, None) else 1
    if getattr(args, "kappa", None) is None and args.command == "verify":
        args.kappa = 1
    try:
        for field in ("budget_points", "budget_maps", "workers"):
            if getattr(args, field, 1) <= 0:
                raise InputError(f"--{field.replace('_', '-')} must be positive")
        args.func(args)
    except Falsified:
        return 2
    except (InputError, FinSpaceError, GroupAxiomError, GSpaceError, CoverError,
            BudgetExceeded, MapBudgetExceeded, enumeration.EnumerationError,
            analytic.AnalyticError, KeyError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
