"""Brute-force reference computations.

Everything here is computed by walking every point of feature space (and,
for families, every subset of features).  Nothing is shared with the
path-based measure engine or the explainers, so agreement between the two
is evidence that both are right.  It is slow on purpose; ``cap`` bounds the
number of points a call may visit.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .model import (DecisionTree, Edge, FeatureSpace, FeatureSpec, Instance, Node)

DEFAULT_CAP = 2 ** 24
MAX_SUBSET_FEATURES = 12


class OracleCapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class BruteReport:
    subset: frozenset[int]
    epsilon: Fraction
    precision: Fraction
    fix_prob: Fraction
    points: int


class _Walker:
    """Leaf lookup with the edge list indexed once."""

    def __init__(self, tree: DecisionTree):
        self.tree = tree
        self.out: dict[str, list[Edge]] = {}
        for e in tree.edges:
            self.out.setdefault(e.parent, []).append(e)

    def leaf(self, x: Sequence) -> str:
        nodes = self.tree.nodes
        nid = self.tree.root
        while nodes[nid].feature is not None:
            value = x[nodes[nid].feature - 1]
            nid = next(e.child for e in self.out[nid] if value in e.allowed)
        return nid


def _weight_table(fs: FeatureSpace) -> tuple[list[dict], int]:
    dens = [math.lcm(*(Fraction(w).denominator for w in f.value_weights())) for f in fs]
    table = [{v: int(w * d) for v, w in zip(f.domain, f.value_weights())} for f, d in zip(fs, dens)]
    return table, math.prod(dens)


def _instance_label(tree: DecisionTree, inst) -> tuple[tuple, object]:
    values = tuple(inst.values if isinstance(inst, Instance) else inst)
    return values, tree.nodes[_Walker(tree).leaf(values)].label


class PointTable:
    """Weighted point counts of one (tree, instance) pair, grouped by agreement pattern.

    ``cells[mask] = [mass predicted c, mass predicted otherwise]`` over the
    points whose set of features agreeing with the instance is exactly
    ``mask``.  Any subset query is then a sum over supersets of its mask.
    """

    def __init__(self, tree: DecisionTree, inst, fs: FeatureSpace | None = None, cap: int = DEFAULT_CAP):
        fs = fs or tree.features
        self.m = fs.m
        npoints = math.prod(len(f.domain) for f in fs)
        if npoints > cap:
            raise OracleCapExceeded(f"feature space has {npoints} points, cap is {cap}")
        self.points = npoints
        self.values, self.label = _instance_label(tree, inst)
        table, self.scale = _weight_table(fs)
        walker = _Walker(tree)
        cells: dict[int, list[int]] = {}
        for x in itertools.product(*(f.domain for f in fs)):
            w = 1
            agree = 0
            for k, xv in enumerate(x):
                w *= table[k][xv]
                if xv == self.values[k]:
                    agree |= 1 << k
            cell = cells.setdefault(agree, [0, 0])
            cell[0 if tree.nodes[walker.leaf(x)].label == self.label else 1] += w
        self.cells = cells

    def sums(self, mask: int) -> tuple[int, int]:
        hit = miss = 0
        for agree, (h, mi) in self.cells.items():
            if agree & mask == mask:
                hit += h
                miss += mi
        return hit, miss

    def report(self, subset: Iterable[int]) -> BruteReport:
        subset = frozenset(subset)
        mask = sum(1 << (i - 1) for i in subset)
        hit, miss = self.sums(mask)
        return BruteReport(
            subset=subset,
            epsilon=Fraction(miss, self.scale),
            precision=Fraction(hit, hit + miss),
            fix_prob=Fraction(hit + miss, self.scale),
            points=self.points,
        )

    def all_error_numerators(self) -> list[int]:
        """Error numerator for every subset mask, by summing over agreement cells."""
        out = [0] * (1 << self.m)
        for agree, (_, miss) in self.cells.items():
            if not miss:
                continue
            sub = agree
            while True:
                out[sub] += miss
                if sub == 0:
                    break
                sub = (sub - 1) & agree
        return out

    def all_precision_parts(self) -> list[tuple[int, int]]:
        hits = [0] * (1 << self.m)
        totals = [0] * (1 << self.m)
        for agree, (h, mi) in self.cells.items():
            sub = agree
            while True:
                hits[sub] += h
                totals[sub] += h + mi
                if sub == 0:
                    break
                sub = (sub - 1) & agree
        return list(zip(hits, totals))


def _path_error(tree: DecisionTree, inst, subset: frozenset[int], fs: FeatureSpace, cap: int) -> tuple[Fraction, int]:
    # Mass of misclassified points x whose leaf is still reached once x is overwritten with
    # v on the subset, i.e. whose branch is consistent with v_S.
    npoints = math.prod(len(f.domain) for f in fs)
    if npoints > cap:
        raise OracleCapExceeded(f"feature space has {npoints} points, cap is {cap}")
    values, label = _instance_label(tree, inst)
    table, scale = _weight_table(fs)
    walker = _Walker(tree)
    total = 0
    for x in itertools.product(*(f.domain for f in fs)):
        leaf = walker.leaf(x)
        if tree.nodes[leaf].label == label:
            continue
        y = tuple(values[k] if k + 1 in subset else x[k] for k in range(len(x)))
        if walker.leaf(y) == leaf:
            total += math.prod(table[k][xv] for k, xv in enumerate(x))
    return Fraction(total, scale), npoints


def brute_measures(tree: DecisionTree, inst, subset: Iterable[int], fs: FeatureSpace | None = None,
                   cap: int = DEFAULT_CAP, measure: str = "joint") -> BruteReport:
    fs = fs or tree.features
    subset = frozenset(subset)
    rep = PointTable(tree, inst, fs, cap).report(subset)
    if measure == "joint":
        return rep
    if measure != "path":
        raise ValueError(f"unknown measure {measure!r}")
    eps, _ = _path_error(tree, inst, subset, fs, cap)
    return BruteReport(subset, eps, rep.precision, rep.fix_prob, rep.points)


def _canonical(sets: Iterable[frozenset[int]]) -> list[frozenset[int]]:
    return sorted(set(sets), key=lambda s: (len(s), sorted(s)))


def _mask_set(mask: int, m: int) -> frozenset[int]:
    return frozenset(k + 1 for k in range(m) if mask >> k & 1)


def _minimal_true(truth: list[bool], m: int) -> list[frozenset[int]]:
    # below[mask]: some subset of mask (mask included) satisfies the predicate
    below = list(truth)
    for mask in range(1 << m):
        if below[mask]:
            continue
        for k in range(m):
            if mask >> k & 1 and below[mask ^ (1 << k)]:
                below[mask] = True
                break
    out = []
    for mask in range(1 << m):
        if truth[mask] and not any(mask >> k & 1 and below[mask ^ (1 << k)] for k in range(m)):
            out.append(_mask_set(mask, m))
    return _canonical(out)


def _relevance_table(tree, inst, delta, fs, measure, cap) -> tuple[list[bool], int]:
    fs = fs or tree.features
    m = fs.m
    if m > MAX_SUBSET_FEATURES:
        raise OracleCapExceeded(f"{m} features; subset enumeration is limited to {MAX_SUBSET_FEATURES}")
    delta = Fraction(delta)
    if measure == "joint":
        pt = PointTable(tree, inst, fs, cap)
        errs = pt.all_error_numerators()
        return [e <= delta * pt.scale for e in errs], m
    truth = []
    for mask in range(1 << m):
        eps, _ = _path_error(tree, inst, _mask_set(mask, m), fs, cap)
        truth.append(eps <= delta)
    return truth, m


def brute_minimal_idrs(tree: DecisionTree, inst, delta, fs: FeatureSpace | None = None,
                       measure: str = "joint", cap: int = DEFAULT_CAP) -> list[frozenset[int]]:
    """Every subset-minimal S with error <= delta, found by checking all 2^m subsets."""
    truth, m = _relevance_table(tree, inst, delta, fs, measure, cap)
    return _minimal_true(truth, m)


def brute_minimal_duals(tree: DecisionTree, inst, delta, fs: FeatureSpace | None = None,
                        measure: str = "joint", cap: int = DEFAULT_CAP) -> list[frozenset[int]]:
    """Every subset-minimal T such that fixing only the complement of T leaves error > delta."""
    truth, m = _relevance_table(tree, inst, delta, fs, measure, cap)
    full = (1 << m) - 1
    dual = [not truth[full & ~mask] for mask in range(1 << m)]
    return _minimal_true(dual, m)


def brute_min_cardinality(tree: DecisionTree, inst, delta, fs: FeatureSpace | None = None,
                          cap: int = DEFAULT_CAP) -> tuple[int, list[frozenset[int]]]:
    """Minimum size of a set with precision >= delta, and all sets of that size."""
    fs = fs or tree.features
    m = fs.m
    if m > MAX_SUBSET_FEATURES:
        raise OracleCapExceeded(f"{m} features; subset enumeration is limited to {MAX_SUBSET_FEATURES}")
    delta = Fraction(delta)
    parts = PointTable(tree, inst, fs, cap).all_precision_parts()
    ok = [mask for mask, (h, t) in enumerate(parts) if h * delta.denominator >= delta.numerator * t]
    best = min(bin(mask).count("1") for mask in ok)
    return best, _canonical(_mask_set(mask, m) for mask in ok if bin(mask).count("1") == best)


def brute_entails(tree: DecisionTree, inst, subset: Iterable[int], fs: FeatureSpace | None = None,
                  cap: int = DEFAULT_CAP) -> bool:
    """Whether every point agreeing with the instance on ``subset`` gets the instance's class."""
    fs = fs or tree.features
    subset = frozenset(subset)
    npoints = math.prod(len(f.domain) for f in fs)
    if npoints > cap:
        raise OracleCapExceeded(f"feature space has {npoints} points, cap is {cap}")
    values, label = _instance_label(tree, inst)
    walker = _Walker(tree)
    choices = [(values[k],) if k + 1 in subset else f.domain for k, f in enumerate(fs)]
    return all(tree.nodes[walker.leaf(x)].label == label for x in itertools.product(*choices))


def berge_transversals(family: Iterable[Iterable[int]]) -> set[frozenset[int]]:
    """Minimal hitting sets by Berge's incremental multiplication."""
    current: set[frozenset[int]] = {frozenset()}
    for edge in family:
        edge = frozenset(edge)
        grown = set()
        for t in current:
            if t & edge:
                grown.add(t)
            else:
                grown.update(t | {e} for e in edge)
        current = {t for t in grown if not any(u < t for u in grown)}
    return current


def brute_duality_holds(cmin: Iterable[Iterable[int]], dmin: Iterable[Iterable[int]]) -> bool:
    cs = {frozenset(s) for s in cmin}
    ds = {frozenset(s) for s in dmin}
    return berge_transversals(ds) == cs and berge_transversals(cs) == ds


def random_tree(n_features: int, domain_sizes: int | Sequence[int] = 2, max_depth: int | None = None,
                n_classes: int = 2, class_bias: float = 0.5, split_prob: float = 0.75,
                max_nodes: int | None = None, weighted: bool = False, seed: int = 0) -> DecisionTree:
    """Seeded random decision tree.

    Parameters
    ----------
    n_features : int
        Number of features ``m``.
    domain_sizes : int or sequence of int
        Domain size per feature (values are ``0 .. size-1``).
    max_depth : int, optional
        Longest root-to-leaf path; defaults to ``n_features``.
    n_classes : int
        Classes are ``0 .. n_classes-1``.
    class_bias : float
        Probability that a leaf is labelled class 0; the remaining classes
        share the rest uniformly.
    split_prob : float
        Chance that a frontier node is split rather than made a leaf.  The
        root is always split.
    max_nodes : int, optional
        Stop splitting once another split would exceed this many nodes.
    weighted : bool
        Draw random positive rational weights instead of uniform ones.
    seed : int
        Seed for :class:`random.Random`; the same arguments always give the
        same tree.

    Nodes are grown from a frontier in random order.  Features with more
    than two values may be tested again further down a branch, on the
    values that still reach it.
    """
    rng = random.Random(seed)
    sizes = [domain_sizes] * n_features if isinstance(domain_sizes, int) else list(domain_sizes)
    if len(sizes) != n_features or min(sizes) < 2:
        raise ValueError("need one domain size >= 2 per feature")
    max_depth = n_features if max_depth is None else max_depth
    feats = []
    for i, size in enumerate(sizes, start=1):
        weights = None
        if weighted:
            raw = [rng.randint(1, 4) for _ in range(size)]
            weights = tuple(Fraction(r, sum(raw)) for r in raw)
        feats.append(FeatureSpec(i, f"x{i}", tuple(range(size)), weights))
    fs = FeatureSpace(tuple(feats))

    def leaf_label() -> int:
        if n_classes == 1 or rng.random() < class_bias:
            return 0
        return rng.randrange(1, n_classes)

    nodes: dict[str, Node] = {}
    edges: list[Edge] = []
    children: dict[str, list[Edge]] = {}
    count = 1
    frontier = [("1", 0, tuple(frozenset(range(s)) for s in sizes))]
    while frontier:
        idx = rng.randrange(len(frontier))
        frontier[idx], frontier[-1] = frontier[-1], frontier[idx]
        nid, depth, reach = frontier.pop()
        splittable = [k for k in range(n_features) if len(reach[k]) >= 2]
        want = nid == "1" or rng.random() < split_prob
        if not splittable or depth >= max_depth or not want or (
                max_nodes is not None and count + 2 > max_nodes):
            nodes[nid] = Node(nid, label=leaf_label())
            continue
        k = rng.choice(splittable)
        values = sorted(reach[k])
        rng.shuffle(values)
        n_blocks = 2 if len(values) == 2 else rng.randint(2, len(values))
        if max_nodes is not None:
            n_blocks = min(n_blocks, max_nodes - count)
        cuts = sorted(rng.sample(range(1, len(values)), n_blocks - 1))
        blocks = [values[a:b] for a, b in zip([0] + cuts, cuts + [len(values)])]
        nodes[nid] = Node(nid, feature=k + 1)
        for block in blocks:
            count += 1
            cid = str(count)
            e = Edge(nid, cid, tuple(sorted(block)))
            edges.append(e)
            children.setdefault(nid, []).append(e)
            nxt = list(reach)
            nxt[k] = frozenset(block)
            frontier.append((cid, depth + 1, tuple(nxt)))
    # edges grouped by parent in creation order keeps children left-to-right
    ordered = tuple(e for nid in sorted(children, key=int) for e in children[nid])
    nodes = {nid: nodes[nid] for nid in sorted(nodes, key=int)}
    return DecisionTree(fs, tuple(range(n_classes)), "1", nodes, ordered)


def random_point(tree: DecisionTree, rng: random.Random) -> tuple:
    return tuple(rng.choice(f.domain) for f in tree.features)
