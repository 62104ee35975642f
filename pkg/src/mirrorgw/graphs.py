"""Decorated stable graphs and their enumeration.

A decorated graph carries per-vertex (genus, character marking), edges with
half-edge heights, n ordered open leaves, unordered primary leaves, and
unordered dilaton leaves (height >= 2).  Enumeration is complete for fixed
(total genus, #primary leaves, #open leaves): summing the per-vertex
dimension constraint sum(heights at v) = 3 g(v) - 3 + val(v) over vertices
gives |E| + #dilaton <= 3g - 3 + n + ell, which makes everything finite.

The enumeration runs in two stages to stay fast: first the undecorated
(genus, edge multiset) structures up to isomorphism together with their
vertex stabilizers, then leaves/markings/heights deduplicated under each
stabilizer.  A stability prune cuts structures early: a genus-0 vertex
needs valency >= 3 and dilaton leaves can never supply it (they require
3 g(v) - 3 + val(v) >= 2 per leaf already).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations, product

from .errors import ValidationError


@dataclass(frozen=True)
class DecoratedGraph:
    genus: tuple                 # per-vertex genus
    marking: tuple               # per-vertex index into G*
    edges: tuple                 # (v1, v2, k1, k2) with (v1, k1) <= (v2, k2)
    open_leaves: tuple           # ordered: (vertex, height)
    primary_leaves: tuple        # sorted multiset of (vertex, height)
    dilaton_leaves: tuple        # sorted multiset of (vertex, height >= 2)
    aut: int

    @property
    def num_vertices(self) -> int:
        return len(self.genus)

    def total_genus(self) -> int:
        return sum(self.genus) + len(self.edges) - self.num_vertices + 1

    def vertex_heights(self, v: int) -> tuple:
        return self.heights_by_vertex()[v]

    def heights_by_vertex(self) -> tuple:
        """Per-vertex half-edge heights, cached on first use."""
        cached = getattr(self, "_heights", None)
        if cached is None:
            ks = [[] for _ in range(self.num_vertices)]
            for (a, b, ka, kb) in self.edges:
                ks[a].append(ka)
                ks[b].append(kb)
            for (a, k) in self.open_leaves + self.primary_leaves + self.dilaton_leaves:
                ks[a].append(k)
            cached = tuple(tuple(sorted(h)) for h in ks)
            object.__setattr__(self, "_heights", cached)
        return cached


# -- encodings and permutations ------------------------------------------------


def _canonical_edge(v1, v2, k1, k2):
    return (v1, v2, k1, k2) if (v1, k1) <= (v2, k2) else (v2, v1, k2, k1)


def _encode(genus, marking, edges, open_leaves, primary, dilaton):
    return (
        tuple(genus),
        tuple(marking),
        tuple(sorted(_canonical_edge(*e) for e in edges)),
        tuple(open_leaves),
        tuple(sorted(primary)),
        tuple(sorted(dilaton)),
    )


def _inverse(perm):
    inv = [0] * len(perm)
    for i, p in enumerate(perm):
        inv[p] = i
    return inv


def _apply_perm(perm, genus, marking, edges, open_leaves, primary, dilaton):
    inv = _inverse(perm)
    return _encode(
        tuple(genus[i] for i in inv),
        tuple(marking[i] for i in inv),
        [(perm[a], perm[b], ka, kb) for (a, b, ka, kb) in edges],
        tuple((perm[a], k) for (a, k) in open_leaves),
        tuple((perm[a], k) for (a, k) in primary),
        tuple((perm[a], k) for (a, k) in dilaton),
    )


def _label_preserving_perms(genus, marking) -> list:
    """Vertex permutations preserving (genus, marking) pointwise."""
    nv = len(genus)
    classes: dict = {}
    for v in range(nv):
        classes.setdefault((genus[v], marking[v]), []).append(v)
    perms = [tuple(range(nv))]
    for members in classes.values():
        if len(members) == 1:
            continue
        new = []
        for base in perms:
            for sub in permutations(members):
                p = list(base)
                for src, dst in zip(members, sub):
                    p[src] = dst
                new.append(tuple(p))
        perms = new
    return perms


def automorphism_count(graph: DecoratedGraph) -> int:
    """|Aut| = (#admissible vertex permutations) x (edge/leaf symmetries).

    Admissible permutations preserve genus, marking, the edge multiset, and
    the leaf multisets; on top of each, identical edges permute freely, a
    self-loop with equal heights flips, and identical unordered leaves at
    one vertex permute.
    """
    base = _encode(graph.genus, graph.marking, graph.edges,
                   graph.open_leaves, graph.primary_leaves, graph.dilaton_leaves)
    nperm = 0
    for perm in _label_preserving_perms(graph.genus, graph.marking):
        if _apply_perm(perm, graph.genus, graph.marking, graph.edges,
                       graph.open_leaves, graph.primary_leaves,
                       graph.dilaton_leaves) == base:
            nperm += 1

    internal = 1
    edge_classes: dict = {}
    for e in graph.edges:
        key = _canonical_edge(*e)
        edge_classes[key] = edge_classes.get(key, 0) + 1
        v1, v2, k1, k2 = key
        if v1 == v2 and k1 == k2:
            internal *= 2
    for mult in edge_classes.values():
        internal *= _factorial(mult)

    leaf_classes: dict = {}
    for kind, leaves in (("p", graph.primary_leaves), ("d", graph.dilaton_leaves)):
        for leaf in leaves:
            key = (kind, leaf)
            leaf_classes[key] = leaf_classes.get(key, 0) + 1
    for mult in leaf_classes.values():
        internal *= _factorial(mult)

    return nperm * internal


def _factorial(n: int) -> int:
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


# -- stage 1: undecorated structures -------------------------------------------


def _connected(nv: int, pairs) -> bool:
    if nv == 1:
        return True
    adj = {v: set() for v in range(nv)}
    for (a, b) in pairs:
        adj[a].add(b)
        adj[b].add(a)
    seen = {0}
    frontier = [0]
    while frontier:
        v = frontier.pop()
        for u in adj[v]:
            if u not in seen:
                seen.add(u)
                frontier.append(u)
    return len(seen) == nv


def _edge_multisets(nv: int, ne: int):
    pairs = [(a, b) for a in range(nv) for b in range(a, nv)]

    def rec(start, left):
        if left == 0:
            yield []
            return
        for i in range(start, len(pairs)):
            for tail in rec(i, left - 1):
                yield [pairs[i]] + tail

    yield from rec(0, ne)


def _nondecreasing_tuples(total_max: int, parts: int, top: int):
    """Nondecreasing tuples of length parts with entries <= top summing to
    at most total_max."""
    def rec(left, parts_left, minimum):
        if parts_left == 0:
            yield ()
            return
        for v in range(minimum, min(top, left) + 1):
            for tail in rec(left - v, parts_left - 1, v):
                yield (v,) + tail
    yield from rec(total_max, parts, 0)


def _structures(g: int, leaf_budget: int, budget: int):
    """(genus vector, edge multiset) up to isomorphism with stabilizers.

    Prunes by the stability deficiency: each genus-0 vertex needs three
    half-edges and a genus-1 vertex one; leaves can supply at most
    leaf_budget of those in total.
    """
    out = []
    seen = set()
    for nv in range(1, budget + 2):
        perms_all = list(permutations(range(nv)))
        for genus in _nondecreasing_tuples(g, nv, g):
            b1 = g - sum(genus)
            ne = b1 + nv - 1
            if b1 < 0 or ne < 0 or ne > budget:
                continue
            class_perms = _label_preserving_perms(genus, (0,) * nv)
            for pairs in _edge_multisets(nv, ne):
                if not _connected(nv, pairs):
                    continue
                deg = [0] * nv
                for (a, b) in pairs:
                    deg[a] += 1
                    deg[b] += 1
                deficiency = 0
                for v in range(nv):
                    need = 3 - 2 * genus[v] - deg[v]
                    if need > 0:
                        deficiency += need
                if deficiency > leaf_budget:
                    continue
                base = tuple(sorted(tuple(sorted(e)) for e in pairs))
                encs = []
                for p in class_perms:
                    encs.append(tuple(sorted(
                        tuple(sorted((p[a], p[b]))) for (a, b) in pairs)))
                key = (genus, min(encs))
                if key in seen:
                    continue
                seen.add(key)
                stab = [p for p, e in zip(class_perms, encs) if e == base]
                out.append((genus, tuple(pairs), stab))
        del perms_all
    return out


# -- stage 2: decorations ------------------------------------------------------


def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for tail in _compositions(total - first, parts - 1):
            yield (first,) + tail


def _multisets_upto(values, count):
    if count == 0:
        yield ()
        return
    for i, v in enumerate(values):
        for tail in _multisets_upto(values[i:], count - 1):
            yield (v,) + tail


_GRAPH_CACHE: dict = {}


def enumerate_graphs(num_characters: int, g: int, n: int, ell: int) -> list:
    """All stable decorated graphs with total genus g, n ordered open
    leaves, and ell unordered primary leaves, up to isomorphism, each with
    its automorphism count.  Markings run over range(num_characters).
    Graphs violating a per-vertex dimension constraint are pruned."""
    key = (num_characters, g, n, ell)
    if key not in _GRAPH_CACHE:
        _GRAPH_CACHE[key] = list(_enumerate(num_characters, g, n, ell))
    return _GRAPH_CACHE[key]


def _enumerate(num_characters: int, g: int, n: int, ell: int):
    if g < 0 or n < 0 or ell < 0:
        raise ValidationError("negative graph parameters")
    budget = 3 * g - 3 + n + ell
    if budget < 0:
        return
    for (genus, pairs, stab) in _structures(g, n + ell, budget):
        ne = len(pairs)
        yield from _decorate(num_characters, genus, pairs, stab,
                             n, ell, budget - ne)


def _decorate(num_characters, genus, pairs, stab, n, ell, dilaton_budget):
    nv = len(genus)
    deg = [0] * nv
    for (a, b) in pairs:
        deg[a] += 1
        deg[b] += 1

    seen = set()
    for open_assign in product(range(nv), repeat=n):
        for primary_assign in _multisets_upto(tuple(range(nv)), ell):
            base_val = list(deg)
            for a in open_assign:
                base_val[a] += 1
            for a in primary_assign:
                base_val[a] += 1
            max_dil = [max(0, 3 * genus[v] - 3 + base_val[v]) for v in range(nv)]
            for dil_counts in product(
                    *(range(min(c, dilaton_budget) + 1) for c in max_dil)):
                if sum(dil_counts) > dilaton_budget:
                    continue
                val = [base_val[v] + dil_counts[v] for v in range(nv)]
                if any(2 * genus[v] - 2 + val[v] <= 0 for v in range(nv)):
                    continue
                dims = [3 * genus[v] - 3 + val[v] for v in range(nv)]
                if any(d < 0 for d in dims):
                    continue
                if any(2 * dil_counts[v] > dims[v] for v in range(nv)):
                    continue
                yield from _heights_and_markings(
                    num_characters, genus, pairs, stab, open_assign,
                    primary_assign, dil_counts, dims, seen)


def _heights_and_markings(num_characters, genus, pairs, stab, open_assign,
                          primary_assign, dil_counts, dims, seen):
    nv = len(genus)
    slots = [[] for _ in range(nv)]
    for ei, (a, b) in enumerate(pairs):
        slots[a].append(("e", ei, 0))
        slots[b].append(("e", ei, 1))
    for li, a in enumerate(open_assign):
        slots[a].append(("o", li, 0))
    for li, a in enumerate(primary_assign):
        slots[a].append(("p", li, 0))
    for v in range(nv):
        for di in range(dil_counts[v]):
            slots[v].append(("d", (v, di), 0))

    per_vertex = []
    for v in range(nv):
        choices = []
        for comp in _compositions(dims[v], len(slots[v])):
            if all(not (s[0] == "d" and k < 2) for s, k in zip(slots[v], comp)):
                choices.append(comp)
        if not choices:
            return
        per_vertex.append(choices)

    trivial = len(stab) == 1
    for marking in product(range(num_characters), repeat=nv):
        for choice in product(*per_vertex):
            heights = {}
            for v in range(nv):
                for slot, k in zip(slots[v], choice[v]):
                    heights[slot] = k
            edges = tuple(sorted(
                _canonical_edge(a, b, heights[("e", ei, 0)], heights[("e", ei, 1)])
                for ei, (a, b) in enumerate(pairs)))
            open_leaves = tuple((open_assign[li], heights[("o", li, 0)])
                                for li in range(len(open_assign)))
            primary = tuple(sorted((primary_assign[li], heights[("p", li, 0)])
                                   for li in range(len(primary_assign))))
            dilaton = tuple(sorted(
                (v, heights[("d", (v, di), 0)])
                for v in range(nv) for di in range(dil_counts[v])))

            if trivial:
                key = _encode(genus, marking, edges, open_leaves, primary, dilaton)
            else:
                key = min(_apply_perm(p, genus, marking, edges, open_leaves,
                                      primary, dilaton) for p in stab)
            if key in seen:
                continue
            seen.add(key)
            graph = DecoratedGraph(
                genus=genus, marking=marking, edges=edges,
                open_leaves=open_leaves, primary_leaves=primary,
                dilaton_leaves=dilaton, aut=1)
            object.__setattr__(graph, "aut", automorphism_count(graph))
            yield graph
