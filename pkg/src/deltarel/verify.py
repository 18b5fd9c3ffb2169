"""Engine-versus-oracle agreement checks, as run by ``deltarel verify``."""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from . import oracle
from .enumeration import enumerate_min_duals, enumerate_min_idrs, verify_duality
from .explain import min_cardinality_drs, min_idrs
from .measure import MeasureEngine, epsilon, fix_probability, precision
from .model import DecisionTree, Instance

DEFAULT_DELTAS = (Fraction(0), Fraction(1, 8), Fraction(1, 4))


@dataclass(frozen=True)
class Disagreement:
    check: str
    instance: tuple
    subset: frozenset[int] | None
    engine: object
    oracle: object

    def __str__(self) -> str:
        where = "" if self.subset is None else f" S={sorted(self.subset)}"
        return (f"{self.check} disagrees on v={list(self.instance)}{where}: "
                f"engine={self.engine} oracle={self.oracle}")


def _subsets(m: int, rng: random.Random, max_exhaustive: int, samples: int) -> list[frozenset[int]]:
    if m <= max_exhaustive:
        return [frozenset(k + 1 for k in range(m) if mask >> k & 1) for mask in range(1 << m)]
    return [frozenset(i for i in range(1, m + 1) if rng.random() < 0.5) for _ in range(samples)]


def check_instance(tree: DecisionTree, values: Sequence, deltas: Iterable[Fraction] = DEFAULT_DELTAS,
                   rng: random.Random | None = None, max_exhaustive: int = 10,
                   subset_samples: int = 64) -> list[Disagreement]:
    """Compare every engine quantity with the brute-force oracle for one instance.

    Returns all disagreements found (empty when everything matches).
    """
    rng = rng or random.Random(0)
    values = tuple(values)
    m = tree.features.m
    out: list[Disagreement] = []
    table = oracle.PointTable(tree, Instance(values))
    engine = MeasureEngine(tree, values)
    for s in _subsets(m, rng, max_exhaustive, subset_samples):
        brute = table.report(s)
        mine = (engine.epsilon(s), engine.precision(s), engine.fix_probability(s))
        ref = (epsilon(tree, values, s), precision(tree, values, s), fix_probability(tree, values, s))
        if mine != ref:
            out.append(Disagreement("engine vs reference measures", values, s, mine, ref))
        if ref != (brute.epsilon, brute.precision, brute.fix_prob):
            out.append(Disagreement("measures", values, s, ref,
                                    (brute.epsilon, brute.precision, brute.fix_prob)))
    if m > oracle.MAX_SUBSET_FEATURES:
        return out
    for delta in deltas:
        expl = min_idrs(tree, values, delta)
        if not oracle.brute_entails(tree, values, expl.subset) and delta == 0:
            out.append(Disagreement("min_idrs at delta=0 entailment", values, expl.subset, True, False))
        brute_c = oracle.brute_minimal_idrs(tree, values, delta)
        if expl.subset not in set(brute_c):
            out.append(Disagreement(f"min_idrs minimality (delta={delta})", values, expl.subset,
                                    "minimal", "not minimal"))
        k, _ = oracle.brute_min_cardinality(tree, values, delta)
        mc = min_cardinality_drs(tree, values, delta)
        if len(mc.subset) != k:
            out.append(Disagreement(f"min_cardinality_drs size (delta={delta})", values, mc.subset,
                                    len(mc.subset), k))
        if m > max_exhaustive:
            continue
        cmin = enumerate_min_idrs(tree, values, delta).sets()
        dmin = enumerate_min_duals(tree, values, delta).sets()
        brute_d = oracle.brute_minimal_duals(tree, values, delta)
        if set(cmin) != set(brute_c):
            out.append(Disagreement(f"C_min family (delta={delta})", values, None,
                                    sorted(map(sorted, cmin)), sorted(map(sorted, brute_c))))
        if set(dmin) != set(brute_d):
            out.append(Disagreement(f"D_min family (delta={delta})", values, None,
                                    sorted(map(sorted, dmin)), sorted(map(sorted, brute_d))))
        verdict = verify_duality(cmin, dmin)
        if verdict.ok != oracle.brute_duality_holds(cmin, dmin) or not verdict.ok:
            out.append(Disagreement(f"duality (delta={delta})", values, verdict.counterexample,
                                    verdict.reason or "ok", "hitting-set duality"))
    return out


def check_tree(tree: DecisionTree, instances: Iterable[Sequence], **kwargs) -> list[Disagreement]:
    out = []
    for values in instances:
        out.extend(check_instance(tree, values, **kwargs))
    return out
