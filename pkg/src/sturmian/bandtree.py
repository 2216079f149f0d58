"""The tree of spectral bands over a convergent chain.

Every band of the level-k approximant is either type A (strictly inside a
band one level up) or type B (not A, and strictly inside a band two levels
up); the directed tree of these strict inclusions has q_k vertices per
level, a virtual root for the whole real line, and children that interlace
as B, A, B, ..., A, B.  Its combinatorics depend only on the partial
quotients, not on the coupling, which is what the isomorphism check below
exercises.
"""

from __future__ import annotations

import bisect
import itertools
import json
import random
from dataclasses import dataclass, field

from .contfrac import DEFAULT_BUDGET, ContinuedFraction, PrecisionBudget, convergents
from .spectrum import MAX_Q_DEFAULT, Band, SpectrumApprox, level_bands

__all__ = [
    "BandNode",
    "BandTree",
    "TreeError",
    "build_tree",
    "classify_level",
    "verify_interlacing",
    "InterlacingReport",
    "path_enclosure",
    "injectivity_probe",
    "InjectivityReport",
    "tree_json",
    "tree_dot",
]

ROOT_ID = 0


class TreeError(RuntimeError):
    """A structural invariant of the band tree failed."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass
class BandNode:
    node_id: int
    level: int                    # -1 for the root
    band: Band | None             # None for the root (represents all of R)
    band_type: str                # "A" | "B" | "root"
    parent: int | None
    children: list[int] = field(default_factory=list)

    @property
    def lower(self) -> float:
        return float("-inf") if self.band is None else self.band.lower

    @property
    def upper(self) -> float:
        return float("inf") if self.band is None else self.band.upper


@dataclass
class BandTree:
    cf: ContinuedFraction
    V: float
    depth: int
    nodes: dict[int, BandNode]
    levels: list[list[int]]       # levels[k] = node ids of level k, in band order
    spectra: dict[int, SpectrumApprox]

    @property
    def root(self) -> BandNode:
        return self.nodes[ROOT_ID]

    def node(self, node_id: int) -> BandNode:
        return self.nodes[node_id]

    def path_to(self, node_id: int) -> list[int]:
        """Node ids from the root down to node_id."""
        path = [node_id]
        while self.nodes[path[-1]].parent is not None:
            path.append(self.nodes[path[-1]].parent)
        return path[::-1]

    def level_types(self, k: int) -> str:
        return "".join(self.nodes[i].band_type for i in self.levels[k])

    def shape_signature(self):
        """Coupling-independent combinatorial fingerprint: per node (in a
        canonical order) its type and the shape of its child list."""
        def sig(node_id):
            n = self.nodes[node_id]
            return (n.band_type, tuple(sig(c) for c in n.children))
        return sig(ROOT_ID)


def _strictly_inside(inner: Band, outer: Band, tol: float) -> bool:
    return outer.lower + tol < inner.lower and inner.upper + tol < outer.upper


def _find_parent(band: Band, candidates: list[BandNode], lowers: list[float],
                 tol: float) -> BandNode | None:
    """The unique candidate band strictly containing ``band``, if any.

    Candidates are one level's nodes in band order.  Same-level bands have
    disjoint interiors, so only the rightmost candidate starting at or left
    of the target can strictly contain it: one bisect, one check.
    """
    if len(candidates) == 1 and candidates[0].band is None:
        return candidates[0]  # the root contains everything
    idx = bisect.bisect_right(lowers, band.lower) - 1
    if idx < 0:
        return None
    cand = candidates[idx]
    return cand if _strictly_inside(band, cand.band, tol) else None


def classify_level(tree: BandTree, k: int, budget: PrecisionBudget = DEFAULT_BUDGET) -> None:
    """Assign type A/B and a parent to every level-k node of the tree.

    A band is type A when strictly inside a level-(k-1) band (margin above
    budget.abs_tol on both sides); A takes priority, and only otherwise is
    type B (inside a level-(k-2) band, the root for k <= 1) attempted.
    """
    tol = budget.abs_tol
    if k == 0:
        # the single free-level band is the root's type-A child by convention
        node = tree.nodes[tree.levels[0][0]]
        node.band_type = "A"
        node.parent = ROOT_ID
        tree.root.children.append(node.node_id)
        return
    up1 = [tree.nodes[i] for i in tree.levels[k - 1]]
    if k >= 2:
        up2 = [tree.nodes[i] for i in tree.levels[k - 2]]
    else:
        up2 = [tree.root]
    low1 = [n.band.lower for n in up1]
    low2 = [n.band.lower for n in up2 if n.band is not None]
    for node_id in tree.levels[k]:
        node = tree.nodes[node_id]
        parent = _find_parent(node.band, up1, low1, tol) if up1 else None
        if parent is not None:
            node.band_type = "A"
        else:
            parent = _find_parent(node.band, up2, low2, tol)
            if parent is not None:
                node.band_type = "B"
        if parent is None:
            raise TreeError(
                f"band {node.band.interval()} at level {k} fits neither one nor two levels up",
                diagnostics={
                    "level": k,
                    "band": node.band.interval(),
                    "up1": [n.band.interval() for n in up1 if n.band],
                    "up2": [n.band.interval() for n in up2 if n.band],
                },
            )
        node.parent = parent.node_id
        parent.children.append(node_id)


def _expected_child_counts(tree: BandTree, node: BandNode) -> tuple[int, int]:
    """(number of A-children, number of B-children) demanded by the rules."""
    if node.band_type == "root":
        return (1, 1)
    a_next = tree.cf.quotient(node.level + 1)
    p = a_next - 1 if node.band_type == "A" else a_next
    return (p, p + 1)


def _check_structure(tree: BandTree, budget: PrecisionBudget) -> None:
    qs = [c.q for c in convergents(tree.cf, tree.depth)][1:]  # q_0 .. q_depth
    for k in range(tree.depth + 1):
        if len(tree.levels[k]) != qs[k]:
            raise TreeError(f"level {k} holds {len(tree.levels[k])} nodes, expected q_k={qs[k]}")
    for node in tree.nodes.values():
        node.children.sort(key=lambda i: (tree.nodes[i].band.lower, tree.nodes[i].band.upper))
        if node.band_type == "root":
            kinds = [tree.nodes[i].band_type for i in node.children]
            levels = sorted(tree.nodes[i].level for i in node.children)
            if kinds.count("A") != 1 or kinds.count("B") != 1 or levels != [0, 1]:
                raise TreeError("root must have exactly one level-0 A child and one level-1 B child")
            continue
        a_ok = node.level + 1 <= tree.depth
        b_ok = node.level + 2 <= tree.depth
        if not a_ok:
            continue  # children live beyond the built depth
        want_a, want_b = _expected_child_counts(tree, node)
        a_kids = [i for i in node.children if tree.nodes[i].band_type == "A"]
        b_kids = [i for i in node.children if tree.nodes[i].band_type == "B"]
        if a_ok and len(a_kids) != want_a:
            raise TreeError(
                f"node {node.node_id} (level {node.level}, type {node.band_type}) has "
                f"{len(a_kids)} A-children, expected {want_a}",
                diagnostics={"band": node.band.interval(),
                             "children": [tree.nodes[i].band.interval() for i in a_kids]},
            )
        if b_ok and len(b_kids) != want_b:
            raise TreeError(
                f"node {node.node_id} (level {node.level}, type {node.band_type}) has "
                f"{len(b_kids)} B-children, expected {want_b}",
                diagnostics={"band": node.band.interval(),
                             "children": [tree.nodes[i].band.interval() for i in b_kids]},
            )
        for i in node.children:
            child = tree.nodes[i]
            lvl_gap = child.level - node.level
            if child.band_type == "A" and lvl_gap != 1:
                raise TreeError(f"A-child {i} sits {lvl_gap} levels below its parent")
            if child.band_type == "B" and lvl_gap != 2:
                raise TreeError(f"B-child {i} sits {lvl_gap} levels below its parent")
    report = verify_interlacing(tree, budget)
    if not report.ok:
        raise TreeError("interlacing violated", diagnostics={"violations": report.violations})


def build_tree(cf: ContinuedFraction, V: float, depth: int,
               budget: PrecisionBudget = DEFAULT_BUDGET, *,
               max_q: int = MAX_Q_DEFAULT,
               auto_escalate: bool = True) -> BandTree:
    """Build and fully check the band tree down to the given level.

    Raises TreeError if any structural invariant (populations, typed
    partition, child counts, interlacing) fails; borderline containment is
    retried once at doubled precision before giving up.
    """
    if depth < 2:
        raise ValueError("depth must be >= 2 (type B needs two levels above)")
    try:
        return _build_tree_once(cf, V, depth, budget, max_q)
    except TreeError:
        if not auto_escalate:
            raise
        bumped = PrecisionBudget(bits=max(2 * budget.bits, 107), abs_tol=budget.abs_tol * 1e-2)
        return _build_tree_once(cf, V, depth, bumped, max_q)


def _build_tree_once(cf, V, depth, budget, max_q) -> BandTree:
    nodes = {ROOT_ID: BandNode(ROOT_ID, -1, None, "root", None)}
    tree = BandTree(cf=cf, V=V, depth=depth, nodes=nodes, levels=[], spectra={})
    next_id = itertools.count(ROOT_ID + 1)
    for k in range(depth + 1):
        spec = level_bands(cf, k, V, budget, max_q=max_q)
        tree.spectra[k] = spec
        ids = []
        for band in spec.bands:
            nid = next(next_id)
            nodes[nid] = BandNode(nid, k, band, "", None)
            ids.append(nid)
        tree.levels.append(ids)
        classify_level(tree, k, budget)
    _check_structure(tree, budget)
    return tree


@dataclass(frozen=True)
class InterlacingReport:
    ok: bool
    violations: tuple[str, ...]
    overlap_count: int            # sibling bands that intersect while still ordered
    checked_nodes: int


def verify_interlacing(tree: BandTree, budget: PrecisionBudget = DEFAULT_BUDGET) -> InterlacingReport:
    """Check K(1) < J(1) < K(2) < ... < J(p) < K(p+1) under every node.

    The order is the strict two-endpoint comparison; siblings may overlap
    (small couplings) and such overlaps are counted, not flagged.
    """
    tol = budget.abs_tol
    violations = []
    overlaps = 0
    checked = 0
    for node in tree.nodes.values():
        if not node.children or node.band_type == "root":
            continue
        checked += 1
        kids = [tree.nodes[i] for i in node.children]
        for child in kids:
            if not _strictly_inside(child.band, node.band, tol):
                violations.append(
                    f"node {node.node_id}: child {child.band.interval()} not strictly inside {node.band.interval()}")
        if node.level + 2 > tree.depth:
            continue  # B-children missing below the cut, alternation not checkable
        pattern = [n.band_type for n in kids]
        want = ["B" if i % 2 == 0 else "A" for i in range(len(kids))]
        if pattern != want:
            violations.append(
                f"node {node.node_id}: child type pattern {''.join(pattern)} != {''.join(want)}")
            continue
        for left, right in zip(kids, kids[1:]):
            if not left.band.precedes(right.band, tol):
                violations.append(
                    f"node {node.node_id}: {left.band.interval()} does not precede {right.band.interval()}")
            if left.band.upper > right.band.lower:
                overlaps += 1
    return InterlacingReport(ok=not violations, violations=tuple(violations),
                             overlap_count=overlaps, checked_nodes=checked)


def path_enclosure(tree: BandTree, path: list[int]) -> tuple[float, float]:
    """Enclosure carried by a root path: the band of its last node.

    Validates that the path starts at the root and follows tree edges; each
    extension strictly shrinks the enclosure.
    """
    if not path or path[0] != ROOT_ID:
        raise ValueError("path must start at the root")
    for a, b in zip(path, path[1:]):
        if tree.nodes[b].parent != a:
            raise ValueError(f"{a} -> {b} is not a tree edge")
    last = tree.nodes[path[-1]]
    return (last.lower, last.upper)


@dataclass(frozen=True)
class InjectivityReport:
    depth: int
    n_paths: int
    n_pairs: int
    n_separated: int
    n_undecided: int

    @property
    def undecided_fraction(self) -> float:
        return self.n_undecided / self.n_pairs if self.n_pairs else 0.0


def _maximal_paths(tree: BandTree, depth: int) -> list[int]:
    """Terminal nodes of maximal root paths confined to levels <= depth."""
    leaves = []
    for node in tree.nodes.values():
        if node.band_type == "root" or node.level > depth:
            continue
        if not any(tree.nodes[c].level <= depth for c in node.children):
            leaves.append(node.node_id)
    leaves.sort(key=lambda i: (tree.nodes[i].band.lower, tree.nodes[i].level))
    return leaves


def injectivity_probe(tree: BandTree, depth: int, samples: int = 20000, *,
                      budget: PrecisionBudget = DEFAULT_BUDGET,
                      seed: int = 0) -> InjectivityReport:
    """Probe how well finite depth separates distinct boundary paths.

    For pairs of distinct maximal paths, 'separated' means the terminal
    bands are disjoint (margin abs_tol); overlapping enclosures are
    'undecided' at this depth.  No pair is ever reported as a violation;
    the probe measures resolution, not injectivity itself.
    """
    if depth > tree.depth:
        raise ValueError(f"probe depth {depth} exceeds tree depth {tree.depth}")
    leaves = _maximal_paths(tree, depth)
    pairs = list(itertools.combinations(leaves, 2))
    if len(pairs) > samples:
        rng = random.Random(seed)
        pairs = rng.sample(pairs, samples)
    tol = budget.abs_tol
    separated = 0
    for a, b in pairs:
        na, nb = tree.nodes[a], tree.nodes[b]
        if na.band.upper + tol < nb.band.lower or nb.band.upper + tol < na.band.lower:
            separated += 1
    return InjectivityReport(depth=depth, n_paths=len(leaves), n_pairs=len(pairs),
                             n_separated=separated, n_undecided=len(pairs) - separated)


# -- exports ------------------------------------------------------------------

def _fmt_endpoint(x: float) -> str:
    if x == float("-inf"):
        return "-inf"
    if x == float("inf"):
        return "inf"
    return repr(x)


def tree_json(tree: BandTree) -> str:
    """JSON export with endpoints as shortest round-trip decimal strings."""
    nodes = []
    for nid in sorted(tree.nodes):
        n = tree.nodes[nid]
        nodes.append({
            "id": n.node_id,
            "level": n.level,
            "type": n.band_type,
            "lower": _fmt_endpoint(n.lower),
            "upper": _fmt_endpoint(n.upper),
            "parent": n.parent,
            "children": list(n.children),
        })
    doc = {"cf": str(tree.cf), "V": tree.V, "depth": tree.depth, "nodes": nodes}
    return json.dumps(doc, indent=1) + "\n"


def tree_dot(tree: BandTree) -> str:
    """GraphViz DOT export; A nodes blue, B nodes red."""
    lines = ["digraph bandtree {", "  rankdir=BT;", '  node [shape=box, fontsize=9];']
    for nid in sorted(tree.nodes):
        n = tree.nodes[nid]
        if n.band_type == "root":
            label = "root (R)"
            color = "gray"
        else:
            label = f"L{n.level} {n.band_type} [{n.lower:.6g}, {n.upper:.6g}]"
            color = "blue" if n.band_type == "A" else "red"
        lines.append(f'  n{nid} [label="{label}", color={color}];')
    for nid in sorted(tree.nodes):
        for c in tree.nodes[nid].children:
            lines.append(f"  n{nid} -> n{c};")
    lines.append("}")
    return "\n".join(lines) + "\n"
