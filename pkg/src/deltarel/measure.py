"""Exact path probabilities and relevance measures for a fixed feature subset.

Two error measures are supported, selected by ``measure``:

``"joint"``
    ``Pr(k(x) != c, x_S = v_S)``, the weighted mass of misclassified
    points that agree with ``v`` on ``S``.
``"path"``
    The total probability of the non-``c`` paths that remain consistent
    with ``v_S``.  Each surviving path counts with its full, unconditioned
    probability, which is how the deletion walkthrough in the original
    running example tallies the error.

Both are monotone (supersets never increase the error), so deletion-based
minimisation and hitting-set duality apply to either one.  Precision is
always the conditional ``Pr(k(x) = c | x_S = v_S)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Sequence

from .model import DecisionTree, FeatureSpace, Instance, Path, classify

MEASURES = ("joint", "path")


def _check_measure(measure: str) -> None:
    if measure not in MEASURES:
        raise ValueError(f"unknown measure {measure!r}; expected one of {MEASURES}")


def as_instance(tree: DecisionTree, inst: Instance | Sequence[Any]) -> Instance:
    """Normalise ``inst`` and check that its class is the tree's prediction."""
    if not isinstance(inst, Instance):
        inst = Instance(tuple(inst))
    predicted = classify(tree, inst.values)
    if inst.label is None:
        return Instance(inst.values, predicted)
    if inst.label != predicted:
        raise ValueError(f"instance class {inst.label!r} differs from the tree's prediction {predicted!r}")
    return inst


def as_subset(subset: Iterable[int], m: int) -> frozenset[int]:
    s = frozenset(subset)
    bad = [i for i in s if not 1 <= i <= m]
    if bad:
        raise ValueError(f"feature ids {sorted(bad)} are outside 1..{m}")
    return s


def path_measure(path: Path, fs: FeatureSpace) -> Fraction:
    out = Fraction(1)
    for f, allowed in zip(fs, path.allowed):
        if len(allowed) != len(f.domain):
            out *= f.mass(allowed)
    return out


def conditioned_measure(path: Path, inst: Instance, subset: Iterable[int], fs: FeatureSpace) -> Fraction:
    """Mass of the points on ``path`` that agree with ``inst`` on ``subset``."""
    subset = frozenset(subset)
    out = Fraction(1)
    for f, allowed, v in zip(fs, path.allowed, inst.values):
        if f.id in subset:
            if v not in allowed:
                return Fraction(0)
            out *= f.weight(v)
        elif len(allowed) != len(f.domain):
            out *= f.mass(allowed)
    return out


def epsilon(tree: DecisionTree, inst, subset: Iterable[int], fs: FeatureSpace | None = None,
            measure: str = "joint") -> Fraction:
    """Error mass of ``subset``: the quantity an Idelta-relevant set keeps at or below delta."""
    _check_measure(measure)
    fs = fs or tree.features
    inst = as_instance(tree, inst)
    subset = as_subset(subset, fs.m)
    total = Fraction(0)
    for p in tree.paths:
        if p.label == inst.label:
            continue
        if measure == "joint":
            total += conditioned_measure(p, inst, subset, fs)
        elif p.consistent_with(inst.values, subset):
            total += path_measure(p, fs)
    return total


def fix_probability(tree: DecisionTree, inst, subset: Iterable[int], fs: FeatureSpace | None = None) -> Fraction:
    fs = fs or tree.features
    inst = as_instance(tree, inst)
    out = Fraction(1)
    for i in as_subset(subset, fs.m):
        out *= fs[i].weight(inst.values[i - 1])
    return out


def precision(tree: DecisionTree, inst, subset: Iterable[int], fs: FeatureSpace | None = None) -> Fraction:
    fs = fs or tree.features
    inst = as_instance(tree, inst)
    subset = as_subset(subset, fs.m)
    hit = total = Fraction(0)
    for p in tree.paths:
        w = conditioned_measure(p, inst, subset, fs)
        total += w
        if p.label == inst.label:
            hit += w
    return hit / total


@dataclass(frozen=True)
class MeasureReport:
    subset: frozenset[int]
    epsilon: Fraction
    fix_prob: Fraction
    precision: Fraction
    per_path: tuple[tuple[int, Fraction], ...]


def measure_report(tree: DecisionTree, inst, subset: Iterable[int], fs: FeatureSpace | None = None) -> MeasureReport:
    """All joint-measure quantities for one subset, with per-path conditioned masses."""
    fs = fs or tree.features
    inst = as_instance(tree, inst)
    subset = as_subset(subset, fs.m)
    per_path = tuple((j, conditioned_measure(p, inst, subset, fs)) for j, p in enumerate(tree.paths))
    eps = sum((w for j, w in per_path if tree.paths[j].label != inst.label), Fraction(0))
    return MeasureReport(
        subset=subset,
        epsilon=eps,
        fix_prob=fix_probability(tree, inst, subset, fs),
        precision=precision(tree, inst, subset, fs),
        per_path=per_path,
    )


def partition_paths(tree: DecisionTree, inst) -> tuple[list[int], list[int]]:
    """Indices of paths predicting the instance's class, and of the rest."""
    inst = as_instance(tree, inst)
    target = [j for j, p in enumerate(tree.paths) if p.label == inst.label]
    other = [j for j, p in enumerate(tree.paths) if p.label != inst.label]
    return target, other


class MeasureEngine:
    """Integer-arithmetic evaluator for one (tree, instance) pair.

    Every weight of feature ``i`` is scaled by the common denominator
    ``d_i`` of that feature's weights, so a path's conditioned mass is an
    integer numerator over the fixed ``scale = prod(d_i)``.  Subsets are
    passed as feature-id collections or as bitmasks (bit ``i - 1``).
    """

    def __init__(self, tree: DecisionTree, inst, fs: FeatureSpace | None = None, measure: str = "joint"):
        _check_measure(measure)
        self.tree = tree
        self.fs = fs = fs or tree.features
        self.instance = inst = as_instance(tree, inst)
        self.measure = measure
        self.m = m = fs.m
        denoms = [math.lcm(*(w.denominator for w in f.value_weights())) for f in fs]
        self.scale = math.prod(denoms)
        num = [{v: int(w * d) for v, w in zip(f.domain, f.value_weights())} for f, d in zip(fs, denoms)]
        self.point_num = [num[k][inst.values[k]] for k in range(m)]
        self.full_num = denoms

        self.target: list[bool] = []
        self.conflict: list[int] = []
        self.mass_num: list[list[int]] = []
        self.base: list[int] = []
        for p in tree.paths:
            masses = [sum(num[k][v] for v in p.allowed[k]) for k in range(m)]
            mask = 0
            for k in range(m):
                if inst.values[k] not in p.allowed[k]:
                    mask |= 1 << k
            self.target.append(p.label == inst.label)
            self.conflict.append(mask)
            self.mass_num.append(masses)
            self.base.append(math.prod(masses))
        self.full_mask = (1 << m) - 1

    def mask(self, subset: Iterable[int] | int) -> int:
        if isinstance(subset, int):
            return subset
        out = 0
        for i in as_subset(subset, self.m):
            out |= 1 << (i - 1)
        return out

    def subset(self, mask: int) -> frozenset[int]:
        return frozenset(k + 1 for k in range(self.m) if mask >> k & 1)

    def conditioned_num(self, j: int, mask: int) -> int:
        if self.conflict[j] & mask:
            return 0
        out = 1
        masses = self.mass_num[j]
        for k in range(self.m):
            out *= self.point_num[k] if mask >> k & 1 else masses[k]
        return out

    def _error_num(self, mask: int) -> int:
        total = 0
        for j, is_target in enumerate(self.target):
            if is_target or self.conflict[j] & mask:
                continue
            total += self.base[j] if self.measure == "path" else self.conditioned_num(j, mask)
        return total

    def epsilon(self, subset) -> Fraction:
        return Fraction(self._error_num(self.mask(subset)), self.scale)

    def is_relevant(self, subset, delta: Fraction) -> bool:
        return self._error_num(self.mask(subset)) <= delta * self.scale

    def fix_probability(self, subset) -> Fraction:
        mask = self.mask(subset)
        num = 1
        for k in range(self.m):
            num *= self.point_num[k] if mask >> k & 1 else self.full_num[k]
        return Fraction(num, self.scale)

    def precision_parts(self, subset) -> tuple[int, int]:
        """Numerators of (mass predicting c, total mass) for the fixed slice."""
        mask = self.mask(subset)
        hit = total = 0
        for j, is_target in enumerate(self.target):
            w = self.conditioned_num(j, mask)
            total += w
            if is_target:
                hit += w
        return hit, total

    def precision(self, subset) -> Fraction:
        hit, total = self.precision_parts(subset)
        return Fraction(hit, total)

    def meets_precision(self, subset, delta: Fraction) -> bool:
        hit, total = self.precision_parts(subset)
        return hit * delta.denominator >= delta.numerator * total

    def deletion_state(self, subset) -> "DeletionState":
        return DeletionState(self, self.mask(subset))


class DeletionState:
    """Error bookkeeping for a shrinking subset.

    Tracks, for each non-``c`` path, how many features of the current
    subset conflict with it and its conditioned numerator computed as if
    it were consistent, so that trying one removal costs one pass over
    the non-``c`` paths.
    """

    def __init__(self, engine: MeasureEngine, mask: int):
        self.engine = engine
        self.mask = mask
        self.paths = [j for j, t in enumerate(engine.target) if not t]
        m = engine.m
        self.counts = [bin(engine.conflict[j] & mask).count("1") for j in self.paths]
        self.nums = []
        for j in self.paths:
            masses = engine.mass_num[j]
            n = 1
            for k in range(m):
                n *= engine.point_num[k] if mask >> k & 1 else masses[k]
            self.nums.append(n)

    def error_num(self) -> int:
        e = self.engine
        if e.measure == "path":
            return sum(e.base[j] for j, c in zip(self.paths, self.counts) if c == 0)
        return sum(n for n, c in zip(self.nums, self.counts) if c == 0)

    def error_without(self, feature: int) -> int:
        """Error numerator of the current subset minus ``feature``."""
        e = self.engine
        k = feature - 1
        bit = 1 << k
        pv = e.point_num[k]
        total = 0
        for idx, j in enumerate(self.paths):
            c = self.counts[idx] - (1 if e.conflict[j] & bit else 0)
            if c:
                continue
            if e.measure == "path":
                total += e.base[j]
            else:
                total += self.nums[idx] // pv * e.mass_num[j][k]
        return total

    def remove(self, feature: int) -> None:
        e = self.engine
        k = feature - 1
        bit = 1 << k
        if not self.mask & bit:
            raise ValueError(f"feature {feature} is not in the current subset")
        pv = e.point_num[k]
        for idx, j in enumerate(self.paths):
            if e.conflict[j] & bit:
                self.counts[idx] -= 1
            self.nums[idx] = self.nums[idx] // pv * e.mass_num[j][k]
        self.mask &= ~bit
