"""Finite simple undirected graphs, named constructions, and structural tests.

Vertices are always dense 0-based integers.  Constructions coming from the
literature with 1-based labels (e.g. the 10-vertex two-sphere skeleton) are
shifted down on construction; pretty-printers shift back up when asked.
"""

from __future__ import annotations

import json
import math

from .errors import GraphFormatError


class Graph:
    """Immutable simple undirected graph.

    `adj[v]` is a sorted tuple of the neighbors of `v`.  No self-loops,
    no multi-edges; symmetry is enforced at construction time.
    """

    __slots__ = ("n_vertices", "adj", "name", "_adj_sets", "_closed_masks", "_open_masks")

    def __init__(self, n_vertices, edges, name=None):
        if n_vertices < 0:
            raise ValueError("vertex count must be nonnegative")
        nbrs = [set() for _ in range(n_vertices)]
        for u, v in edges:
            if not (0 <= u < n_vertices and 0 <= v < n_vertices):
                raise ValueError(f"edge ({u},{v}) out of range for {n_vertices} vertices")
            if u == v:
                raise ValueError(f"self-loop at vertex {u} not allowed")
            nbrs[u].add(v)
            nbrs[v].add(u)
        self.n_vertices = n_vertices
        self.adj = tuple(tuple(sorted(s)) for s in nbrs)
        self.name = name
        self._adj_sets = tuple(frozenset(s) for s in nbrs)
        self._closed_masks = None
        self._open_masks = None

    # -- basic queries -------------------------------------------------

    @property
    def vertex_count(self):
        return self.n_vertices

    def edges(self):
        """Sorted list of edges as (u, v) pairs with u < v."""
        return [(u, v) for u in range(self.n_vertices) for v in self.adj[u] if u < v]

    @property
    def n_edges(self):
        return sum(len(a) for a in self.adj) // 2

    def degree(self, v):
        return len(self.adj[v])

    def has_edge(self, u, v):
        return v in self._adj_sets[u]

    def adjacent_or_equal(self, u, v):
        return u == v or v in self._adj_sets[u]

    def neighbor_masks(self, closed):
        """Per-vertex neighborhood bitmasks (int); closed masks include the
        vertex itself.  Only available for graphs with at most 63 vertices."""
        if self.n_vertices > 63:
            raise ValueError("bitmask adjacency supports at most 63 vertices")
        if closed:
            if self._closed_masks is None:
                masks = []
                for v in range(self.n_vertices):
                    m = 1 << v
                    for u in self.adj[v]:
                        m |= 1 << u
                    masks.append(m)
                self._closed_masks = tuple(masks)
            return self._closed_masks
        if self._open_masks is None:
            masks = []
            for v in range(self.n_vertices):
                m = 0
                for u in self.adj[v]:
                    m |= 1 << u
                masks.append(m)
            self._open_masks = tuple(masks)
        return self._open_masks

    def connected_components(self):
        """List of components, each a sorted list of vertices."""
        seen = [False] * self.n_vertices
        comps = []
        for s in range(self.n_vertices):
            if seen[s]:
                continue
            stack, comp = [s], []
            seen[s] = True
            while stack:
                v = stack.pop()
                comp.append(v)
                for u in self.adj[v]:
                    if not seen[u]:
                        seen[u] = True
                        stack.append(u)
            comps.append(sorted(comp))
        return comps

    def induced_subgraph(self, kept):
        """Induced subgraph on `kept` (iterable of vertex ids), relabeled
        0..k-1 in sorted order.  Returns (subgraph, old_to_new dict)."""
        kept = sorted(set(kept))
        old_to_new = {v: i for i, v in enumerate(kept)}
        edges = [
            (old_to_new[u], old_to_new[v])
            for u in kept
            for v in self.adj[u]
            if u < v and v in old_to_new
        ]
        return Graph(len(kept), edges, name=self.name), old_to_new

    def relabeled(self, name):
        g = Graph(self.n_vertices, self.edges(), name=name)
        return g

    # -- dunder plumbing ----------------------------------------------

    def __eq__(self, other):
        # labeled equality, deliberately not isomorphism
        return (
            isinstance(other, Graph)
            and self.n_vertices == other.n_vertices
            and self.adj == other.adj
        )

    def __hash__(self):
        return hash((self.n_vertices, self.adj))

    def __repr__(self):
        tag = f" {self.name!r}" if self.name else ""
        return f"<Graph{tag} n={self.n_vertices} m={self.n_edges}>"


def make_graph(n_vertices, edges, name=None):
    """Build a graph from a vertex count and an edge list.

    Duplicate pairs are deduplicated (symmetry is implied); out-of-range ids
    and self-loop pairs raise ValueError.
    """
    return Graph(n_vertices, edges, name=name)


# -- named generators ---------------------------------------------------

#: Edges of the 10-vertex, 16-edge counterexample graph, 1-based as usually
#: drawn (shifted to 0-based on construction).
_COUNTEREXAMPLE10_EDGES = [
    (1, 2), (1, 3), (1, 4), (1, 5),
    (2, 6), (2, 7), (3, 6), (3, 8),
    (4, 7), (4, 9), (5, 8), (5, 9),
    (6, 10), (7, 10), (8, 10), (9, 10),
]


def cycle_graph(k):
    if k < 3:
        raise ValueError("cycle needs at least 3 vertices")
    return Graph(k, [(i, (i + 1) % k) for i in range(k)], name=f"Z_{k}")


def complete_graph(k):
    if k < 1:
        raise ValueError("complete graph needs at least 1 vertex")
    return Graph(k, [(i, j) for i in range(k) for j in range(i + 1, k)], name=f"K_{k}")


def path_graph(k):
    """Path on k vertices (so k-1 edges)."""
    if k < 1:
        raise ValueError("path needs at least 1 vertex")
    return Graph(k, [(i, i + 1) for i in range(k - 1)], name=f"P_{k}")


def hypercube_graph(n):
    """Discrete n-cube: vertices are 0..2^n-1 read as bit strings, edges at
    Hamming distance one.  Labels agree with the colexicographic vertex
    indexing used for singular cubes."""
    if n < 0:
        raise ValueError("hypercube dimension must be nonnegative")
    edges = [
        (q, q | (1 << b))
        for q in range(1 << n)
        for b in range(n)
        if not (q >> b) & 1
    ]
    return Graph(1 << n, edges, name=f"Q_{n}")


def complete_bipartite_graph(s, t):
    if s < 1 or t < 1:
        raise ValueError("both parts must be nonempty")
    return Graph(s + t, [(i, s + j) for i in range(s) for j in range(t)], name=f"K_{{{s},{t}}}")


def counterexample10():
    """The 10-vertex, 16-edge graph whose cubical and path homology differ."""
    return Graph(10, [(u - 1, v - 1) for u, v in _COUNTEREXAMPLE10_EDGES], name="counterexample10")


def generate(kind, *params):
    """Dispatch-style constructor used by the CLI: kind is one of
    cycle/complete/path/hypercube/complete_bipartite/counterexample10."""
    builders = {
        "cycle": cycle_graph,
        "complete": complete_graph,
        "path": path_graph,
        "hypercube": hypercube_graph,
        "complete_bipartite": complete_bipartite_graph,
        "counterexample10": counterexample10,
    }
    if kind not in builders:
        raise ValueError(f"unknown graph kind {kind!r}")
    try:
        return builders[kind](*[int(p) for p in params])
    except TypeError as exc:
        raise ValueError(f"bad parameters for {kind}: {params}") from exc


# -- products and combinations -------------------------------------------

def _pair_label(g, h):
    # row-major: vertex (a, b) of the product gets id a*|V(h)| + b
    return lambda a, b: a * h.n_vertices + b


def box_product(g, h):
    """Cartesian (box) product: step in exactly one factor."""
    lab = _pair_label(g, h)
    edges = []
    for a in range(g.n_vertices):
        for b in range(h.n_vertices):
            for b2 in h.adj[b]:
                if b2 > b:
                    edges.append((lab(a, b), lab(a, b2)))
            for a2 in g.adj[a]:
                if a2 > a:
                    edges.append((lab(a, b), lab(a2, b)))
    return Graph(g.n_vertices * h.n_vertices, edges, name=_product_name("box", g, h))


def strong_product(g, h):
    lab = _pair_label(g, h)
    edges = []
    for a in range(g.n_vertices):
        for b in range(h.n_vertices):
            for b2 in h.adj[b]:
                if b2 > b:
                    edges.append((lab(a, b), lab(a, b2)))
            for a2 in g.adj[a]:
                if a2 > a:
                    edges.append((lab(a, b), lab(a2, b)))
                    for b2 in h.adj[b]:
                        # diagonal steps, both orientations
                        edges.append((lab(a, b), lab(a2, b2)))
    return Graph(g.n_vertices * h.n_vertices, edges, name=_product_name("strong", g, h))


def lexicographic_product(g, h):
    lab = _pair_label(g, h)
    edges = []
    for a in range(g.n_vertices):
        for b in range(h.n_vertices):
            for b2 in h.adj[b]:
                if b2 > b:
                    edges.append((lab(a, b), lab(a, b2)))
            for a2 in g.adj[a]:
                if a2 > a:
                    for b2 in range(h.n_vertices):
                        edges.append((lab(a, b), lab(a2, b2)))
    return Graph(g.n_vertices * h.n_vertices, edges, name=_product_name("lex", g, h))


def _product_name(kind, g, h):
    gn = g.name or "?"
    hn = h.name or "?"
    return f"{kind}({gn},{hn})"


def product(kind, g, h):
    """Dispatch over the three product constructions (box/strong/lexicographic)."""
    if g.n_vertices == 0 or h.n_vertices == 0:
        raise ValueError("products need nonempty factors")
    builders = {
        "box": box_product,
        "strong": strong_product,
        "lexicographic": lexicographic_product,
        "lex": lexicographic_product,
    }
    if kind not in builders:
        raise ValueError(f"unknown product kind {kind!r}")
    return builders[kind](g, h)


def disjoint_sum(g, h):
    """Disjoint union; h's vertices are shifted above g's."""
    off = g.n_vertices
    edges = g.edges() + [(u + off, v + off) for u, v in h.edges()]
    return Graph(off + h.n_vertices, edges, name=_product_name("sum", g, h))


def join_graph(g, h):
    """Join: disjoint sum plus all cross edges."""
    off = g.n_vertices
    edges = g.edges() + [(u + off, v + off) for u, v in h.edges()]
    edges += [(u, off + v) for u in range(off) for v in range(h.n_vertices)]
    return Graph(off + h.n_vertices, edges, name=_product_name("join", g, h))


def cone(g):
    """Join with one new apex vertex (the last vertex of the result)."""
    return join_graph(g, Graph(1, [], name="pt")).relabeled(f"cone({g.name or '?'})")


def suspension(g):
    """Join with two new non-adjacent vertices (the last two of the result)."""
    return join_graph(g, Graph(2, [], name="2pt")).relabeled(f"susp({g.name or '?'})")


def combine(kind, g, h=None):
    """Dispatch over join/disjoint_sum/cone/suspension."""
    if kind == "join":
        return join_graph(g, h)
    if kind == "disjoint_sum":
        return disjoint_sum(g, h)
    if kind == "cone":
        return cone(g)
    if kind == "suspension":
        return suspension(g)
    raise ValueError(f"unknown combination kind {kind!r}")


# -- homomorphisms and structure ------------------------------------------

def is_graph_hom(g, h, f):
    """True iff f (a sequence with f[v] in V(h)) maps every edge of g to an
    edge of h or collapses it to a single vertex."""
    if len(f) != g.n_vertices:
        raise ValueError("map length does not match domain vertex count")
    for v in range(g.n_vertices):
        if not 0 <= f[v] < h.n_vertices:
            raise ValueError(f"image {f[v]} of vertex {v} out of range")
    for u, v in g.edges():
        if f[u] != f[v] and not h.has_edge(f[u], f[v]):
            return False
    return True


def is_chordal(g):
    """Perfect elimination ordering of g, or None if g is not chordal.

    The ordering v_0..v_{m-1} satisfies: the earlier neighbors of each v_j
    form a clique.  Found by maximum cardinality search and then verified,
    so a non-None answer is always a certificate.
    """
    n = g.n_vertices
    weight = [0] * n
    visited = [False] * n
    order = []
    for _ in range(n):
        # max weight, lowest id tie-break
        best = max((w, -v) for v, w in enumerate(weight) if not visited[v])
        v = -best[1]
        visited[v] = True
        order.append(v)
        for u in g.adj[v]:
            if not visited[u]:
                weight[u] += 1
    pos = {v: i for i, v in enumerate(order)}
    for j, v in enumerate(order):
        earlier = [u for u in g.adj[v] if pos[u] < j]
        for i, a in enumerate(earlier):
            for b in earlier[i + 1:]:
                if not g.has_edge(a, b):
                    return None
    return order


def girth(g):
    """Length of a shortest cycle; math.inf for forests."""
    best = math.inf
    for s in range(g.n_vertices):
        dist = {s: 0}
        parent = {s: -1}
        queue = [s]
        while queue:
            nxt = []
            for v in queue:
                for u in g.adj[v]:
                    if u not in dist:
                        dist[u] = dist[v] + 1
                        parent[u] = v
                        nxt.append(u)
                    elif parent[v] != u and parent[u] != v:
                        # non-tree edge: closed walk through the BFS root,
                        # length >= girth, tight when the root lies on a
                        # shortest cycle
                        best = min(best, dist[u] + dist[v] + 1)
            queue = nxt
    return best


# -- serialization ---------------------------------------------------------

def graph_to_json(g):
    doc = {"vertices": g.n_vertices, "edges": [[u, v] for u, v in g.edges()]}
    if g.name:
        doc["name"] = g.name
    return doc


def graph_from_json(doc):
    try:
        n = int(doc["vertices"])
        edges = [(int(u), int(v)) for u, v in doc["edges"]]
        name = doc.get("name")
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphFormatError(f"bad graph JSON: {exc}") from exc
    try:
        return Graph(n, edges, name=name)
    except ValueError as exc:
        raise GraphFormatError(str(exc)) from exc


def parse_edge_list(text):
    """Plain-text format: first line 'p <n>', then one '<u> <v>' per line
    (0-based).  Blank lines and lines starting with '#' are skipped."""
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if n is None:
            if parts[0] != "p" or len(parts) != 2:
                raise GraphFormatError(f"line {lineno}: expected header 'p <n>'")
            try:
                n = int(parts[1])
            except ValueError as exc:
                raise GraphFormatError(f"line {lineno}: bad vertex count") from exc
            continue
        if len(parts) != 2:
            raise GraphFormatError(f"line {lineno}: expected '<u> <v>'")
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError as exc:
            raise GraphFormatError(f"line {lineno}: bad vertex id") from exc
    if n is None:
        raise GraphFormatError("missing 'p <n>' header")
    try:
        return Graph(n, edges)
    except ValueError as exc:
        raise GraphFormatError(str(exc)) from exc


def load_graph(path):
    """Read a graph file; JSON if it parses as JSON, else plain edge list."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise GraphFormatError(f"bad JSON: {exc}") from exc
        return graph_from_json(doc)
    return parse_edge_list(text)
