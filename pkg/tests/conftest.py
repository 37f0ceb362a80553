"""Shared builders: a corpus of finite G-spaces with isovariant tube covers,
drawn from coset spaces, classifying spaces, cones, and enumerated bundles."""

import numpy as np
import pytest

from finclass.classifying import build_E
from finclass.enumeration import circle_complex, enumerate_bundles, interval_complex
from finclass.finspace import indiscrete_cone
from finclass.groups import (
    builtin_group,
    class_representatives,
    coset_space,
    full_subgroup,
    trivial_subgroup,
)
from finclass.gspaces import GSpace, coset_gspace, translation_gspace


def cone_gspace(X: GSpace) -> GSpace:
    """The indiscrete cone on a G-space, with the conepoint fixed."""
    space = indiscrete_cone(X.space)
    act = np.zeros((X.n + 1, X.group.n), dtype=int)
    act[1:, :] = X.act + 1
    return GSpace(space, X.group, act, validate=False)


def corpus():
    """(name, GSpace, family) triples covering coset spaces, classifying
    spaces, cones, and bundle totals; every entry admits an isovariant
    cover within its family."""
    out = []
    for gname in ("Z2", "Z3", "Z4", "Z2xZ2", "S3", "Z6"):
        G = builtin_group(gname)
        reps = class_representatives(G)
        out.append((f"{gname} translation", translation_gspace(G), [trivial_subgroup(G)]))
        out.append((f"{gname} cosets full family", coset_gspace(coset_space(G, reps)), reps))
        for k, H in enumerate(reps[1:3], start=1):
            out.append((
                f"{gname} cosets H{k}",
                coset_gspace(coset_space(G, [H])),
                [H],
            ))
    for gname, kappa in (("Z2", 1), ("Z2", 2), ("Z3", 2), ("Z4", 1)):
        G = builtin_group(gname)
        fam = [trivial_subgroup(G)]
        out.append((f"E({gname},triv,{kappa})", build_E(G, fam, kappa).to_gspace(), fam))
    for gname in ("Z2", "S3"):
        G = builtin_group(gname)
        fam = class_representatives(G)
        out.append((f"E({gname},reps,1)", build_E(G, fam, 1).to_gspace(), fam))
    for gname in ("Z2", "Z3"):
        G = builtin_group(gname)
        fam = [trivial_subgroup(G), full_subgroup(G)]
        out.append((f"cone({gname})", cone_gspace(translation_gspace(G)), fam))
    for gname in ("Z2", "Z3"):
        G = builtin_group(gname)
        res = enumerate_bundles(circle_complex(), G, budget_maps=10_000_000)
        for k, cls in enumerate(res.classes):
            out.append((
                f"circle bundle {gname} class {k}",
                cls.representative.total,
                [trivial_subgroup(G)],
            ))
    G = builtin_group("Z2")
    res = enumerate_bundles(interval_complex(), G)
    out.append(("interval bundle Z2", res.classes[0].representative.total,
                [trivial_subgroup(G)]))
    return out


@pytest.fixture(scope="session")
def gspace_corpus():
    return corpus()
