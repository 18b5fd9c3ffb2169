"""Decision-tree data model: feature spaces, trees, paths and instances.

Trees are read from a JSON document of the form::

    {"features": [{"id": 1, "name": "x1", "domain": [0, 1],
                   "weights": ["1/2", "1/2"]}],
     "classes": [0, 1],
     "root": "1",
     "nodes": {"1": {"feature": 1}, "2": {"leaf": 0}, "3": {"leaf": 1}},
     "edges": [{"from": "1", "to": "2", "allowed": [0]},
               {"from": "1", "to": "3", "allowed": [1]}]}

Weights are optional (uniform when absent) and are parsed exactly.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Hashable, Iterable, Mapping, Sequence

import jsonschema

Value = Hashable

TREE_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["features", "classes", "root", "nodes", "edges"],
    "properties": {
        "features": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["id", "name", "domain"],
                "properties": {
                    "id": {"type": "integer"},
                    "name": {"type": "string"},
                    "domain": {"type": "array", "items": {"type": ["string", "integer"]}},
                    "weights": {"type": "array", "items": {"type": ["string", "integer"]}},
                },
                "additionalProperties": False,
            },
        },
        "classes": {"type": "array", "items": {"type": ["string", "integer"]}},
        "root": {"type": ["string", "integer"]},
        "nodes": {
            "type": "object",
            "additionalProperties": {
                "oneOf": [
                    {
                        "type": "object",
                        "required": ["feature"],
                        "properties": {"feature": {"type": "integer"}},
                        "additionalProperties": False,
                    },
                    {
                        "type": "object",
                        "required": ["leaf"],
                        "properties": {"leaf": {"type": ["string", "integer"]}},
                        "additionalProperties": False,
                    },
                ]
            },
        },
        "edges": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["from", "to", "allowed"],
                "properties": {
                    "from": {"type": ["string", "integer"]},
                    "to": {"type": ["string", "integer"]},
                    "allowed": {"type": "array", "items": {"type": ["string", "integer"]}},
                },
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}


class TreeError(ValueError):
    """Base class for tree document problems."""


class TreeSyntaxError(TreeError):
    def __init__(self, msg: str, line: int, column: int):
        super().__init__(f"{msg} (line {line}, column {column})")
        self.line = line
        self.column = column


class TreeSchemaError(TreeError):
    pass


class TreeValidationError(TreeError):
    def __init__(self, diagnostics: Sequence["Diagnostic"]):
        self.diagnostics = list(diagnostics)
        lines = "; ".join(str(d) for d in self.diagnostics)
        super().__init__(f"invalid decision tree: {lines}")


def as_rational(value: Any) -> Fraction:
    """Parse ``value`` as an exact rational.

    Strings may be ``"p/q"`` or decimals (``"0.03"`` gives ``3/100``).
    Floats go through their shortest repr so that ``0.03`` behaves like
    the string ``"0.03"`` rather than its binary approximation.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational number: {value!r}") from exc
    raise TypeError(f"cannot interpret {type(value).__name__} as a rational")


@dataclass(frozen=True)
class FeatureSpec:
    id: int
    name: str
    domain: tuple[Value, ...]
    weights: tuple[Fraction, ...] | None = None

    def weight(self, value: Value) -> Fraction:
        if self.weights is None:
            return Fraction(1, len(self.domain))
        return self.weights[self.domain.index(value)]

    def mass(self, values: Iterable[Value]) -> Fraction:
        """Total weight of a set of domain values."""
        return sum((self.weight(v) for v in values), Fraction(0))

    def value_weights(self) -> tuple[Fraction, ...]:
        if self.weights is None:
            return (Fraction(1, len(self.domain)),) * len(self.domain)
        return self.weights


@dataclass(frozen=True)
class FeatureSpace:
    features: tuple[FeatureSpec, ...]

    @property
    def m(self) -> int:
        return len(self.features)

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(f.id for f in self.features)

    def __getitem__(self, feature_id: int) -> FeatureSpec:
        return self.features[feature_id - 1]

    def __iter__(self):
        return iter(self.features)

    def __len__(self) -> int:
        return len(self.features)

    def size(self) -> int:
        """Number of points in feature space."""
        n = 1
        for f in self.features:
            n *= len(f.domain)
        return n

    def with_weights(self, weights: Mapping[int, Sequence[Any]]) -> "FeatureSpace":
        """Copy of this space with the given per-feature weights replaced."""
        feats = []
        for f in self.features:
            if f.id in weights:
                f = FeatureSpec(f.id, f.name, f.domain, tuple(as_rational(w) for w in weights[f.id]))
            feats.append(f)
        return FeatureSpace(tuple(feats))

    def diagnostics(self) -> list["Diagnostic"]:
        out = []
        for pos, f in enumerate(self.features, start=1):
            where = f"feature {f.id}"
            if f.id != pos:
                out.append(Diagnostic(None, f"feature ids must be 1..m in order; found {f.id} at position {pos}"))
            if len(f.domain) < 2:
                out.append(Diagnostic(None, f"{where}: domain needs at least 2 values"))
            if len(set(f.domain)) != len(f.domain):
                out.append(Diagnostic(None, f"{where}: domain values are not distinct"))
            if f.weights is not None:
                if len(f.weights) != len(f.domain):
                    out.append(Diagnostic(None, f"{where}: {len(f.weights)} weights for {len(f.domain)} values"))
                if any(w <= 0 for w in f.weights):
                    out.append(Diagnostic(None, f"{where}: weights must be positive"))
                if sum(f.weights) != 1:
                    out.append(Diagnostic(None, f"{where}: weights sum to {sum(f.weights)}, not 1"))
        return out


@dataclass(frozen=True)
class Literal:
    """``x_feature in allowed``."""

    feature: int
    allowed: frozenset

    def holds(self, value: Value) -> bool:
        return value in self.allowed


@dataclass(frozen=True)
class Node:
    id: str
    feature: int | None = None
    label: Value = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


@dataclass(frozen=True)
class Edge:
    parent: str
    child: str
    allowed: tuple[Value, ...]


@dataclass(frozen=True)
class Diagnostic:
    node: str | None
    message: str

    def __str__(self) -> str:
        return f"node {self.node}: {self.message}" if self.node is not None else self.message


@dataclass(frozen=True)
class Path:
    """One root-to-leaf branch.

    ``allowed[k]`` is the cumulative set of values of feature ``k + 1``
    admitted along the branch (the full domain when untested).
    """

    label: Value
    allowed: tuple[frozenset, ...]
    nodes: tuple[str, ...]
    tested: frozenset[int]

    @property
    def leaf(self) -> str:
        return self.nodes[-1]

    def consistent_with(self, values: Sequence[Value], subset: Iterable[int]) -> bool:
        return all(values[i - 1] in self.allowed[i - 1] for i in subset)

    def conflicts(self, values: Sequence[Value]) -> frozenset[int]:
        """Features on which ``values`` falls outside this path."""
        return frozenset(i for i, (a, v) in enumerate(zip(self.allowed, values), start=1) if v not in a)


@dataclass(frozen=True)
class DecisionTree:
    features: FeatureSpace
    classes: tuple[Value, ...]
    root: str
    nodes: Mapping[str, Node]
    edges: tuple[Edge, ...]

    @cached_property
    def children(self) -> dict[str, list[Edge]]:
        out: dict[str, list[Edge]] = {nid: [] for nid in self.nodes}
        for e in self.edges:
            out.setdefault(e.parent, []).append(e)
        return out

    @cached_property
    def paths(self) -> tuple[Path, ...]:
        return tuple(enumerate_paths(self))

    @property
    def n_features(self) -> int:
        return self.features.m

    def __len__(self) -> int:
        return len(self.nodes)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DecisionTree):
            return NotImplemented
        return (self.features, self.classes, self.root, dict(self.nodes), self.edges) == (
            other.features, other.classes, other.root, dict(other.nodes), other.edges)

    def __hash__(self) -> int:
        return hash((self.features, self.classes, self.root, self.edges))


@dataclass(frozen=True)
class Instance:
    values: tuple[Value, ...]
    label: Value = field(default=None)


def _node_id(raw: Any) -> str:
    return str(raw)


def _feature_from_doc(doc: Mapping[str, Any]) -> FeatureSpec:
    weights = doc.get("weights")
    return FeatureSpec(
        id=doc["id"],
        name=doc["name"],
        domain=tuple(doc["domain"]),
        weights=None if weights is None else tuple(as_rational(w) for w in weights),
    )


def tree_from_dict(doc: Mapping[str, Any], validate: bool = True) -> DecisionTree:
    """Build a tree from an already-decoded JSON document."""
    try:
        jsonschema.validate(doc, TREE_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<document>"
        raise TreeSchemaError(f"schema violation at {where}: {exc.message}") from None
    try:
        fs = FeatureSpace(tuple(_feature_from_doc(f) for f in doc["features"]))
    except (ValueError, TypeError) as exc:
        raise TreeSchemaError(f"bad feature weights: {exc}") from None
    nodes = {}
    for raw_id, body in doc["nodes"].items():
        nid = _node_id(raw_id)
        if "feature" in body:
            nodes[nid] = Node(nid, feature=body["feature"])
        else:
            nodes[nid] = Node(nid, label=body["leaf"])
    edges = tuple(Edge(_node_id(e["from"]), _node_id(e["to"]), tuple(e["allowed"])) for e in doc["edges"])
    tree = DecisionTree(fs, tuple(doc["classes"]), _node_id(doc["root"]), nodes, edges)
    if validate:
        diags = validate_tree(tree)
        if diags:
            raise TreeValidationError(diags)
    return tree


def parse_tree(document: str | bytes, validate: bool = True) -> DecisionTree:
    """Parse and validate a JSON tree document."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise TreeSyntaxError(exc.msg, exc.lineno, exc.colno) from None
    return tree_from_dict(doc, validate=validate)


def load_tree(path) -> DecisionTree:
    with open(path, encoding="utf-8") as fh:
        return parse_tree(fh.read())


def tree_to_dict(tree: DecisionTree) -> dict[str, Any]:
    feats = []
    for f in tree.features:
        d: dict[str, Any] = {"id": f.id, "name": f.name, "domain": list(f.domain)}
        if f.weights is not None:
            d["weights"] = [str(w) for w in f.weights]
        feats.append(d)
    nodes = {}
    for nid, node in tree.nodes.items():
        nodes[nid] = {"leaf": node.label} if node.is_leaf else {"feature": node.feature}
    return {
        "features": feats,
        "classes": list(tree.classes),
        "root": tree.root,
        "nodes": nodes,
        "edges": [{"from": e.parent, "to": e.child, "allowed": list(e.allowed)} for e in tree.edges],
    }


def serialize_tree(tree: DecisionTree, indent: int | None = 1) -> str:
    return json.dumps(tree_to_dict(tree), indent=indent)


def validate_tree(tree: DecisionTree, fs: FeatureSpace | None = None) -> list[Diagnostic]:
    """Check every structural invariant; an empty list means the tree is valid."""
    fs = fs or tree.features
    diags = fs.diagnostics()
    domains = {f.id: set(f.domain) for f in fs}

    if len(set(tree.classes)) != len(tree.classes):
        diags.append(Diagnostic(None, "class labels are not distinct"))
    if tree.root not in tree.nodes:
        diags.append(Diagnostic(tree.root, "root node does not exist"))
        return diags

    incoming: dict[str, int] = {nid: 0 for nid in tree.nodes}
    for e in tree.edges:
        for end in (e.parent, e.child):
            if end not in tree.nodes:
                diags.append(Diagnostic(end, "edge references an unknown node"))
        if e.child in incoming:
            incoming[e.child] += 1
    if any(end not in tree.nodes for e in tree.edges for end in (e.parent, e.child)):
        return diags

    for nid, node in tree.nodes.items():
        if node.is_leaf:
            if node.label not in tree.classes:
                diags.append(Diagnostic(nid, f"leaf class {node.label!r} is not a declared class"))
            if tree.children[nid]:
                diags.append(Diagnostic(nid, "leaf has outgoing edges"))
        elif node.feature not in domains:
            diags.append(Diagnostic(nid, f"tests unknown feature {node.feature}"))
        if nid == tree.root:
            if incoming[nid]:
                diags.append(Diagnostic(nid, "root has incoming edges"))
        elif incoming[nid] != 1:
            diags.append(Diagnostic(nid, f"expected exactly one incoming edge, found {incoming[nid]}"))
    if tree.nodes[tree.root].is_leaf:
        diags.append(Diagnostic(tree.root, "tree consists of a single leaf"))

    # Walk from the root carrying the values that can still reach each node.
    seen = set()
    stack = [(tree.root, {i: frozenset(d) for i, d in domains.items()})]
    while stack:
        nid, reach = stack.pop()
        if nid in seen:
            diags.append(Diagnostic(nid, "node reachable along more than one route (cycle or shared child)"))
            continue
        seen.add(nid)
        node = tree.nodes[nid]
        if node.is_leaf or node.feature not in domains:
            continue
        f = node.feature
        out = tree.children[nid]
        if not out:
            diags.append(Diagnostic(nid, "internal node has no children"))
            continue
        covered: set = set()
        for e in out:
            allowed = set(e.allowed)
            if not allowed:
                diags.append(Diagnostic(nid, f"edge to {e.child} has an empty literal"))
            if len(allowed) != len(e.allowed):
                diags.append(Diagnostic(nid, f"edge to {e.child} repeats a value"))
            outside = allowed - domains[f]
            if outside:
                diags.append(Diagnostic(nid, f"edge to {e.child} uses values {sorted(map(str, outside))} outside the domain of feature {f}"))
            unreachable = (allowed & domains[f]) - reach[f]
            if unreachable:
                diags.append(Diagnostic(nid, f"edge to {e.child} allows values {sorted(map(str, unreachable))} that cannot reach this node"))
            overlap = allowed & covered
            if overlap:
                diags.append(Diagnostic(nid, f"child literals overlap on values {sorted(map(str, overlap))}"))
            covered |= allowed
            child_reach = dict(reach)
            child_reach[f] = reach[f] & frozenset(allowed)
            stack.append((e.child, child_reach))
        missing = reach[f] - covered
        if missing:
            diags.append(Diagnostic(nid, f"children do not cover values {sorted(map(str, missing))} of feature {f}"))
    for nid in tree.nodes:
        if nid not in seen:
            diags.append(Diagnostic(nid, "node not reachable from the root"))
    return diags


def _check_point(tree: DecisionTree, values: Sequence[Value]) -> None:
    if len(values) != tree.features.m:
        raise ValueError(f"expected {tree.features.m} values, got {len(values)}")
    for f, v in zip(tree.features, values):
        if v not in f.domain:
            raise ValueError(f"value {v!r} is outside the domain of feature {f.id} ({f.name})")


def leaf_of(tree: DecisionTree, values: Sequence[Value]) -> str:
    """Id of the leaf reached by ``values``."""
    _check_point(tree, values)
    nid = tree.root
    while True:
        node = tree.nodes[nid]
        if node.is_leaf:
            return nid
        v = values[node.feature - 1]
        for e in tree.children[nid]:
            if v in e.allowed:
                nid = e.child
                break
        else:
            raise ValueError(f"no branch of node {nid} admits value {v!r}")


def classify(tree: DecisionTree, values: Sequence[Value]) -> Value:
    return tree.nodes[leaf_of(tree, values)].label


def make_instance(tree: DecisionTree, values: Sequence[Value]) -> Instance:
    values = tuple(values)
    return Instance(values, classify(tree, values))


def enumerate_paths(tree: DecisionTree) -> list[Path]:
    """All root-to-leaf paths, depth-first, children in edge order."""
    full = tuple(frozenset(f.domain) for f in tree.features)
    out = []
    stack = [(tree.root, full, (tree.root,), frozenset())]
    while stack:
        nid, allowed, trail, tested = stack.pop()
        node = tree.nodes[nid]
        if node.is_leaf:
            out.append(Path(node.label, allowed, trail, tested))
            continue
        k = node.feature - 1
        for e in reversed(tree.children[nid]):
            nxt = list(allowed)
            nxt[k] = allowed[k] & frozenset(e.allowed)
            stack.append((e.child, tuple(nxt), trail + (e.child,), tested | {node.feature}))
    return out


def coerce_values(tree: DecisionTree, raw: Sequence[Any]) -> tuple[Value, ...]:
    """Map raw tokens (e.g. CSV strings) onto domain values, matching textually."""
    if len(raw) != tree.features.m:
        raise ValueError(f"expected {tree.features.m} values, got {len(raw)}")
    out = []
    for f, tok in zip(tree.features, raw):
        if tok in f.domain and type(tok) in {type(d) for d in f.domain}:
            out.append(tok)
            continue
        text = str(tok).strip()
        for d in f.domain:
            if str(d) == text:
                out.append(d)
                break
        else:
            raise ValueError(f"value {tok!r} is outside the domain of feature {f.id} ({f.name})")
    return tuple(out)
