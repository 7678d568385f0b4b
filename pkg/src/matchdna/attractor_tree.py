"""Tree-structured classifier over fuzzy CA attractor basins.

Each internal node carries a rule vector evolved by a small genetic
algorithm so that the training subset lands in class-pure attractor
basins.  Basins are grouped into as many clusters as the node has
classes (deterministic k-means over terminal states); pure clusters
become leaves and impure ones recurse on their members.  Classification
routes a pattern by evolving it to its terminal under each node's rules
and following the nearest cluster centroid.

The feedback query maps a play-letter window onto fuzzy cells
(A .2, C .4, G .6, T .8, '-' 0) and answers proceed/veto from the
predicted class.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .fuzzy_ca import RuleSet, SUPPORTED_RULES, terminal_states

TREE_SCHEMA_VERSION = 1

BASIN_QUANTUM = 1e-6
TERMINAL_MAX_STEPS = 80

MAX_DEPTH = 8
MIN_NODE_SIZE = 2

# feedback feature map, one cell per window letter
SYMBOL_LEVELS = {"A": 0.2, "C": 0.4, "G": 0.6, "T": 0.8, "-": 0.0}
FEATURE_MAP_VERSION = "letters-v1"

GOAL = "goal"
THREAT = "threat"

_RULE_POOL = np.array(sorted(SUPPORTED_RULES))


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 50
    generations: int = 40
    mutation_rate: float = 0.05
    crossover_rate: float = 0.8
    rng_seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        for name in ("mutation_rate", "crossover_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.generations < 1:
            raise ValueError("generations must be >= 1")


@dataclass
class Leaf:
    label: int
    pure: bool = True
    size: int = 0


@dataclass
class Internal:
    rules: list
    centroids: np.ndarray
    children: dict = field(default_factory=dict)  # cluster index -> node
    k: int = 0


@dataclass
class FmacaTree:
    root: object
    n_cells: int
    window: int | None = None
    goal_class: int | None = None
    class_names: dict = field(default_factory=dict)

    def depth(self):
        def walk(node):
            if isinstance(node, Leaf):
                return 1
            return 1 + max(walk(c) for c in node.children.values())
        return walk(self.root)


@dataclass(frozen=True)
class FeedbackDecision:
    proceed: bool
    flagged: bool = False
    label: int | None = None


def quantize_terminal(terminal: np.ndarray) -> tuple:
    return tuple(np.round(np.asarray(terminal) / BASIN_QUANTUM).astype(np.int64))


def basin_of(pattern, rules, max_steps: int = TERMINAL_MAX_STEPS):
    """Basin identifier of one pattern: ('ok'|'overflow', quantized terminal).

    Overflow marks trajectories that neither fixed nor revealed a short
    cycle within the step budget; they keep their last state as the id.
    """
    terms, conv = terminal_states(np.atleast_2d(np.asarray(pattern, dtype=float)),
                                  rules, max_steps=max_steps)
    tag = "ok" if conv[0] else "overflow"
    return (tag, quantize_terminal(terms[0]))


def _basin_ids(terminals, converged):
    q = np.round(terminals / BASIN_QUANTUM).astype(np.int64)
    return [("ok" if converged[i] else "overflow", tuple(q[i]))
            for i in range(len(q))]


def basin_purity(basin_ids, labels) -> float:
    """Weighted purity: sum over basins of the majority-class count,
    divided by the number of patterns."""
    if len(basin_ids) == 0:
        raise ValueError("empty subset")
    groups = {}
    for bid, label in zip(basin_ids, labels):
        groups.setdefault(bid, []).append(label)
    total = 0
    for members in groups.values():
        counts = {}
        for label in members:
            counts[label] = counts.get(label, 0) + 1
        total += max(counts.values())
    return total / len(basin_ids)


def fitness(rules, patterns, labels, max_steps: int = TERMINAL_MAX_STEPS) -> float:
    """Purity of the attractor-basin distribution induced by a rule vector."""
    terms, conv = terminal_states(patterns, rules, max_steps=max_steps)
    return basin_purity(_basin_ids(terms, conv), labels)


def group_basins(terminals, k: int, seed=0):
    """Deterministic k-means over terminal vectors.

    Initial centroids are k distinct terminal values chosen by the seeded
    RNG; k silently drops to the number of distinct values when smaller.
    Returns (assignment, centroids).
    """
    terminals = np.asarray(terminals, dtype=float)
    if terminals.ndim != 2 or len(terminals) == 0:
        raise ValueError("terminals must be a non-empty 2-D array")
    if k < 1:
        raise ValueError("k must be >= 1")
    distinct = np.unique(terminals, axis=0)
    k = min(k, len(distinct))
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(distinct), size=k, replace=False)
    centroids = distinct[np.sort(picks)]
    assignment = np.zeros(len(terminals), dtype=np.int64)
    for _ in range(100):
        dists = np.linalg.norm(terminals[:, None, :] - centroids[None, :, :], axis=2)
        new_assignment = np.argmin(dists, axis=1)
        new_centroids = centroids.copy()
        for c in range(k):
            members = terminals[new_assignment == c]
            if len(members):
                new_centroids[c] = members.mean(axis=0)
        if np.array_equal(new_assignment, assignment) and \
                np.allclose(new_centroids, centroids):
            break
        assignment, centroids = new_assignment, new_centroids
    # re-derive the assignment from the returned centroids so that routing
    # a member later reproduces its training-time cluster exactly
    dists = np.linalg.norm(terminals[:, None, :] - centroids[None, :, :], axis=2)
    return np.argmin(dists, axis=1), centroids


def _evolve_rules(patterns, labels, ga: GaConfig, rng, on_generation=None) -> list:
    """GA search for a rule vector maximizing basin purity on the subset."""
    n = patterns.shape[1]
    pop = rng.choice(_RULE_POOL, size=(ga.population_size, n))
    best_rules, best_fit = None, -1.0
    for gen in range(ga.generations):
        fits = np.array([fitness(row, patterns, labels) for row in pop])
        top = int(np.argmax(fits))
        if fits[top] > best_fit:
            best_fit, best_rules = float(fits[top]), pop[top].copy()
        if on_generation is not None:
            on_generation(gen, [int(r) for r in best_rules], best_fit)
        if best_fit >= 1.0:
            break
        nxt = [pop[top].copy()]  # elitism
        while len(nxt) < ga.population_size:
            a = _tournament(pop, fits, rng)
            b = _tournament(pop, fits, rng)
            child = a.copy()
            if n > 1 and rng.random() < ga.crossover_rate:
                point = int(rng.integers(1, n))
                child[point:] = b[point:]
            mutate = rng.random(n) < ga.mutation_rate
            if mutate.any():
                child[mutate] = rng.choice(_RULE_POOL, size=int(mutate.sum()))
            nxt.append(child)
        pop = np.array(nxt)
    return [int(r) for r in best_rules]


def _tournament(pop, fits, rng, size=3):
    idx = rng.integers(0, len(pop), size=size)
    return pop[idx[np.argmax(fits[idx])]]


def _majority(labels) -> int:
    counts = {}
    for label in labels:
        counts[label] = counts.get(label, 0) + 1
    return int(min(sorted(counts), key=lambda c: -counts[c]))


def build_tree(patterns, labels, K: int | None = None,
               ga: GaConfig = GaConfig()) -> FmacaTree:
    """Recursive attractor-basin partitioning of a labeled pattern set."""
    patterns = np.asarray(patterns, dtype=float)
    labels = np.asarray(labels, dtype=np.int64)
    if patterns.ndim != 2 or len(patterns) == 0:
        raise ValueError("training set must be a non-empty 2-D array")
    if len(patterns) != len(labels):
        raise ValueError("patterns and labels must align")
    if np.any(patterns < 0.0) or np.any(patterns > 1.0):
        raise ValueError("features must lie in [0, 1]")
    if K is None:
        K = int(labels.max())
    if np.any(labels < 1) or np.any(labels > K):
        raise ValueError(f"labels must lie in 1..{K}")

    seed_root = np.random.SeedSequence(ga.rng_seed)

    def partition(idx, depth, seed_seq):
        subset_labels = labels[idx]
        present = np.unique(subset_labels)
        if len(present) == 1:
            return Leaf(int(present[0]), pure=True, size=len(idx))
        if depth >= MAX_DEPTH or len(idx) < MIN_NODE_SIZE or \
                len(np.unique(patterns[idx], axis=0)) == 1:
            return Leaf(_majority(subset_labels), pure=False, size=len(idx))
        ga_seed, km_seed, child_seed = seed_seq.spawn(3)
        rng = np.random.default_rng(ga_seed)
        rules = _evolve_rules(patterns[idx], subset_labels, ga, rng)
        terms, _conv = terminal_states(patterns[idx], rules,
                                       max_steps=TERMINAL_MAX_STEPS)
        assignment, centroids = group_basins(terms, len(present), km_seed)
        node = Internal(rules=rules, centroids=centroids, k=len(centroids))
        child_seqs = child_seed.spawn(len(centroids))
        made_progress = len(np.unique(assignment)) > 1
        for c in range(len(centroids)):
            members = idx[assignment == c]
            if len(members) == 0:
                continue
            if not made_progress:
                node.children[c] = Leaf(_majority(labels[members]),
                                        pure=False, size=len(members))
            else:
                node.children[c] = partition(members, depth + 1, child_seqs[c])
        return node

    root = partition(np.arange(len(patterns)), 0, seed_root)
    return FmacaTree(root=root, n_cells=patterns.shape[1])


def classify(tree: FmacaTree, pattern) -> int:
    return int(classify_batch(tree, np.atleast_2d(np.asarray(pattern, float)))[0])


def classify_batch(tree: FmacaTree, patterns) -> np.ndarray:
    """Vectorized routing: whole batches descend the tree level by level."""
    patterns = np.asarray(patterns, dtype=float)
    if patterns.shape[1] != tree.n_cells:
        raise ValueError(f"pattern has {patterns.shape[1]} cells, "
                         f"tree expects {tree.n_cells}")
    out = np.zeros(len(patterns), dtype=np.int64)

    def route(node, idx):
        if not len(idx):
            return
        if isinstance(node, Leaf):
            out[idx] = node.label
            return
        terms, _conv = terminal_states(patterns[idx], node.rules,
                                       max_steps=TERMINAL_MAX_STEPS)
        dists = np.linalg.norm(terms[:, None, :] - node.centroids[None, :, :],
                               axis=2)
        assignment = np.argmin(dists, axis=1)
        fallback = _nearest_leaf_label(node)
        for c in range(len(node.centroids)):
            members = idx[assignment == c]
            child = node.children.get(c)
            if child is None:
                out[members] = fallback  # empty basin at training time
            else:
                route(child, members)

    route(tree.root, np.arange(len(patterns)))
    return out


def _nearest_leaf_label(node) -> int:
    while isinstance(node, Internal):
        node = max(node.children.values(),
                   key=lambda ch: getattr(ch, "size", 0) if isinstance(ch, Leaf) else -1)
    return node.label


# ----- play-window feedback ---------------------------------------------------

def encode_window(window: str) -> np.ndarray:
    try:
        return np.array([SYMBOL_LEVELS[ch] for ch in window])
    except KeyError as err:
        raise ValueError(f"symbol {err.args[0]!r} outside play alphabet") from None


def fit_window_classifier(windows, labels, ga: GaConfig = GaConfig(),
                          class_names=(GOAL, THREAT)) -> FmacaTree:
    """Train a tree on letter windows labeled with class-name strings."""
    if not windows:
        raise ValueError("no training windows")
    width = len(windows[0])
    if any(len(w) != width for w in windows):
        raise ValueError("all training windows must share one length")
    name_to_id = {name: i + 1 for i, name in enumerate(class_names)}
    patterns = np.array([encode_window(w) for w in windows])
    y = np.array([name_to_id[label] for label in labels])
    tree = build_tree(patterns, y, K=len(class_names), ga=ga)
    tree.window = width
    tree.class_names = {v: k for k, v in name_to_id.items()}
    tree.goal_class = name_to_id.get(GOAL)
    return tree


def ca_feedback(tree: FmacaTree, window: str) -> FeedbackDecision:
    """Shot gate: proceed when the window classifies as the goal class.

    A window shorter than the trained width carries no evidence, so the
    decision is proceed, flagged.
    """
    if tree.window is None:
        raise ValueError("tree was not trained on letter windows")
    if len(window) < tree.window:
        return FeedbackDecision(proceed=True, flagged=True)
    window = window[-tree.window:]
    label = classify(tree, encode_window(window))
    if tree.goal_class is None:
        return FeedbackDecision(proceed=True, flagged=True, label=label)
    return FeedbackDecision(proceed=(label == tree.goal_class), label=label)


# ----- serialization ----------------------------------------------------------

def _node_to_dict(node):
    if isinstance(node, Leaf):
        return {"kind": "leaf", "label": int(node.label),
                "pure": bool(node.pure), "size": int(node.size)}
    return {"kind": "internal", "rules": [int(r) for r in node.rules],
            "k": int(node.k),
            "centroids": [list(map(float, c)) for c in node.centroids],
            "children": {str(int(c)): _node_to_dict(ch)
                         for c, ch in sorted(node.children.items())}}


def _node_from_dict(d):
    if d["kind"] == "leaf":
        return Leaf(d["label"], d["pure"], d.get("size", 0))
    node = Internal(rules=list(d["rules"]),
                    centroids=np.array(d["centroids"], dtype=float),
                    k=d["k"])
    node.children = {int(c): _node_from_dict(ch)
                     for c, ch in d["children"].items()}
    return node


def tree_to_dict(tree: FmacaTree) -> dict:
    return {"schema_version": TREE_SCHEMA_VERSION,
            "feature_map": FEATURE_MAP_VERSION,
            "n_cells": tree.n_cells,
            "window": tree.window,
            "goal_class": tree.goal_class,
            "class_names": {str(k): v for k, v in tree.class_names.items()},
            "root": _node_to_dict(tree.root)}


def tree_from_dict(d: dict) -> FmacaTree:
    if d.get("schema_version") != TREE_SCHEMA_VERSION:
        raise ValueError("unsupported tree schema_version")
    return FmacaTree(root=_node_from_dict(d["root"]),
                     n_cells=d["n_cells"],
                     window=d.get("window"),
                     goal_class=d.get("goal_class"),
                     class_names={int(k): v
                                  for k, v in d.get("class_names", {}).items()})


def save_tree(tree: FmacaTree, path):
    with open(path, "w") as fh:
        json.dump(tree_to_dict(tree), fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_tree(path) -> FmacaTree:
    with open(path) as fh:
        return tree_from_dict(json.load(fh))
