"""Simplicial complexes up to triangles, their incidence matrices and Hodge Laplacians.

Orientation convention: every edge ``(u, v)`` and triangle ``(u, v, w)`` is
stored with its nodes in increasing node order, and that order is the
reference orientation.  Node order is the order of ``nodes`` as given.
"""
from __future__ import annotations

import csv
import itertools
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp

__all__ = [
    "DanglingSimplex",
    "DuplicateSimplex",
    "SimplicialComplex",
    "IncidencePair",
    "HodgeLaplacians",
    "build_complex",
    "incidence",
    "laplacians",
    "neighborhoods",
    "edge_degrees",
    "max_edge_degree",
    "integer_rank",
    "count_components",
    "fill_triangles",
    "random_complex",
    "load_complex",
    "save_complex",
    "load_flow",
    "save_flow",
]


class DanglingSimplex(ValueError):
    """A simplex references a face that is not part of the complex."""


class DuplicateSimplex(ValueError):
    """Reserved for inputs whose duplicates cannot be merged.

    Repeated edges or triangles (in either orientation) are merged silently by
    :func:`build_complex`, so this is only raised for degenerate tuples such as
    ``(u, u)`` that repeat a node inside one simplex.
    """


@dataclass(frozen=True)
class SimplicialComplex:
    """Nodes, oriented edges and oriented triangles.

    Edges and triangles hold dense node indices, sorted ascending inside each
    tuple and lexicographically across the list.  Use :func:`build_complex`
    rather than constructing this directly.
    """

    nodes: tuple
    edges: tuple[tuple[int, int], ...]
    triangles: tuple[tuple[int, int, int], ...]
    node_index: dict = field(repr=False, compare=False)
    edge_index: dict = field(repr=False, compare=False)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n_nodes, self.n_edges, self.n_triangles)

    def edge_labels(self) -> list[tuple]:
        """Edges as pairs of the original node identifiers."""
        return [(self.nodes[u], self.nodes[v]) for u, v in self.edges]

    def triangle_labels(self) -> list[tuple]:
        return [tuple(self.nodes[i] for i in t) for t in self.triangles]

    def find_edge(self, u: Hashable, v: Hashable) -> tuple[int, int]:
        """Return ``(edge_index, sign)`` for the edge between nodes ``u`` and ``v``.

        ``sign`` is +1 when ``u -> v`` agrees with the reference orientation.
        Raises ``KeyError`` if the edge is absent.
        """
        a, b = self.node_index[u], self.node_index[v]
        if a < b:
            return self.edge_index[(a, b)], 1
        return self.edge_index[(b, a)], -1


@dataclass(frozen=True)
class IncidencePair:
    """Node-edge incidence ``b1`` (N0 x N1) and edge-triangle incidence ``b2`` (N1 x N2)."""

    b1: sp.csr_matrix
    b2: sp.csr_matrix


@dataclass(frozen=True)
class HodgeLaplacians:
    l0: sp.csr_matrix
    l1_lower: sp.csr_matrix
    l1_upper: sp.csr_matrix
    l1: sp.csr_matrix
    incidence: IncidencePair = field(repr=False)

    @property
    def n_edges(self) -> int:
        return self.l1.shape[0]


def _canonical(simplex: Sequence, node_index: dict, kind: str) -> tuple[int, ...]:
    try:
        idx = tuple(sorted(node_index[n] for n in simplex))
    except KeyError as exc:
        raise DanglingSimplex(f"{kind} {tuple(simplex)!r} uses unknown node {exc.args[0]!r}") from None
    if len(set(idx)) != len(idx):
        raise DuplicateSimplex(f"{kind} {tuple(simplex)!r} repeats a node")
    return idx


def build_complex(
    nodes: Iterable[Hashable],
    edges: Iterable[Sequence[Hashable]],
    triangles: Iterable[Sequence[Hashable]] = (),
) -> SimplicialComplex:
    """Canonicalize raw simplex lists into a :class:`SimplicialComplex`.

    Tuples may come in any orientation; they are sorted into reference
    orientation, deduplicated and sorted.  Repeated nodes, edges or triangles
    are merged silently.  Missing faces raise :class:`DanglingSimplex` and are
    never inserted automatically.
    """
    node_list = list(dict.fromkeys(nodes))
    node_index = {n: i for i, n in enumerate(node_list)}

    edge_set = set()
    for e in edges:
        if len(e) != 2:
            raise ValueError(f"edge {tuple(e)!r} must have exactly two nodes")
        edge_set.add(_canonical(e, node_index, "edge"))
    edge_list = sorted(edge_set)
    edge_index = {e: i for i, e in enumerate(edge_list)}

    tri_set = set()
    for t in triangles:
        if len(t) != 3:
            raise ValueError(f"triangle {tuple(t)!r} must have exactly three nodes")
        tri = _canonical(t, node_index, "triangle")
        for face in itertools.combinations(tri, 2):
            if face not in edge_index:
                u, v = (node_list[i] for i in face)
                raise DanglingSimplex(f"triangle {tuple(t)!r} needs missing edge ({u!r}, {v!r})")
        tri_set.add(tri)

    return SimplicialComplex(
        nodes=tuple(node_list),
        edges=tuple(edge_list),
        triangles=tuple(sorted(tri_set)),
        node_index=node_index,
        edge_index=edge_index,
    )


def incidence(cx: SimplicialComplex) -> IncidencePair:
    """Signed incidence matrices with integer entries.

    Column ``(u, v)`` of ``b1`` is -1 at ``u`` and +1 at ``v``.  For triangle
    ``(u, v, w)`` the column of ``b2`` is +1 on ``(u, v)`` and ``(v, w)`` and -1
    on ``(u, w)``, so that ``b1 @ b2 == 0``.
    """
    n0, n1, n2 = cx.shape
    if n1:
        e = np.asarray(cx.edges, dtype=np.int64)
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([np.arange(n1), np.arange(n1)])
        vals = np.concatenate([-np.ones(n1), np.ones(n1)]).astype(np.int64)
        b1 = sp.csr_matrix((vals, (rows, cols)), shape=(n0, n1), dtype=np.int64)
    else:
        b1 = sp.csr_matrix((n0, 0), dtype=np.int64)

    rows, cols, vals = [], [], []
    for j, (u, v, w) in enumerate(cx.triangles):
        for face, sign in (((u, v), 1), ((v, w), 1), ((u, w), -1)):
            rows.append(cx.edge_index[face])
            cols.append(j)
            vals.append(sign)
    b2 = sp.csr_matrix((np.array(vals, dtype=np.int64), (rows, cols)), shape=(n1, n2), dtype=np.int64)
    return IncidencePair(b1=b1, b2=b2)


def laplacians(pair: IncidencePair) -> HodgeLaplacians:
    """Graph Laplacian ``b1 b1^T`` and the lower/upper/full Hodge 1-Laplacians."""
    b1 = pair.b1.astype(np.float64)
    b2 = pair.b2.astype(np.float64)
    l0 = (b1 @ b1.T).tocsr()
    lower = (b1.T @ b1).tocsr()
    upper = (b2 @ b2.T).tocsr()
    for m in (l0, lower, upper):
        m.eliminate_zeros()
        m.sort_indices()
    full = (lower + upper).tocsr()
    full.eliminate_zeros()
    full.sort_indices()
    return HodgeLaplacians(l0=l0, l1_lower=lower, l1_upper=upper, l1=full, incidence=pair)


def _adjacency_lists(cx: SimplicialComplex):
    edges_at_node: list[list[int]] = [[] for _ in range(cx.n_nodes)]
    for i, (u, v) in enumerate(cx.edges):
        edges_at_node[u].append(i)
        edges_at_node[v].append(i)
    tris_at_edge: list[list[int]] = [[] for _ in range(cx.n_edges)]
    for t, tri in enumerate(cx.triangles):
        for face in itertools.combinations(tri, 2):
            tris_at_edge[cx.edge_index[face]].append(t)
    return edges_at_node, tris_at_edge


def neighborhoods(cx: SimplicialComplex, edge: int) -> tuple[set[int], set[int]]:
    """Lower (shared node) and upper (shared triangle) neighbors of an edge.

    Both sets hold edge indices and exclude the edge itself.
    """
    if not 0 <= edge < cx.n_edges:
        raise IndexError(f"edge index {edge} out of range for {cx.n_edges} edges")
    u, v = cx.edges[edge]
    lower = {
        j for j, e in enumerate(cx.edges) if j != edge and (u in e or v in e)
    }
    upper = set()
    for tri in cx.triangles:
        if u in tri and v in tri:
            for face in itertools.combinations(tri, 2):
                upper.add(cx.edge_index[face])
    upper.discard(edge)
    return lower, upper


def edge_degrees(cx: SimplicialComplex) -> np.ndarray:
    """Per-edge degree: number of lower plus upper neighbors."""
    edges_at_node, tris_at_edge = _adjacency_lists(cx)
    deg = np.zeros(cx.n_edges, dtype=np.int64)
    for i, (u, v) in enumerate(cx.edges):
        # each triangle on an edge contributes two upper neighbors
        deg[i] = len(edges_at_node[u]) + len(edges_at_node[v]) - 2 + 2 * len(tris_at_edge[i])
    return deg


def max_edge_degree(cx: SimplicialComplex) -> int:
    return int(edge_degrees(cx).max()) if cx.n_edges else 0


def integer_rank(matrix) -> int:
    """Exact rank of an integer matrix by fraction-free (Bareiss) elimination."""
    a = matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix)
    if a.size == 0:
        return 0
    if a.shape[0] > a.shape[1]:
        a = a.T
    rows = [[int(x) for x in row] for row in a]
    n_rows, n_cols = len(rows), len(rows[0])
    rank, prev = 0, 1
    for col in range(n_cols):
        pivot = next((r for r in range(rank, n_rows) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        p = rows[rank]
        for r in range(rank + 1, n_rows):
            row = rows[r]
            f = row[col]
            rows[r] = [(x * p[col] - f * y) // prev for x, y in zip(row, p)]
        prev = p[col]
        rank += 1
        if rank == n_rows:
            break
    return rank


def count_components(cx: SimplicialComplex) -> int:
    """Connected components of the underlying graph (union-find)."""
    parent = list(range(cx.n_nodes))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in cx.edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
    return len({find(i) for i in range(cx.n_nodes)})


def fill_triangles(cx: SimplicialComplex) -> list[tuple]:
    """All 3-cliques of the edge graph, as triples of node identifiers.

    Listing only: whether to add them to a complex is left to the caller.
    """
    nbrs: list[set[int]] = [set() for _ in range(cx.n_nodes)]
    for u, v in cx.edges:
        nbrs[u].add(v)
        nbrs[v].add(u)
    out = []
    for u, v in cx.edges:
        for w in sorted(nbrs[u] & nbrs[v]):
            if w > v:
                out.append((cx.nodes[u], cx.nodes[v], cx.nodes[w]))
    return out


def random_complex(
    n_nodes: int,
    edge_prob: float,
    triangle_prob: float,
    rng: np.random.Generator | int | None = None,
) -> SimplicialComplex:
    """Erdos-Renyi edges, then each 3-clique kept as a triangle with ``triangle_prob``."""
    rng = np.random.default_rng(rng)
    edges = [
        (u, v) for u, v in itertools.combinations(range(n_nodes), 2) if rng.random() < edge_prob
    ]
    cx = build_complex(range(n_nodes), edges)
    tris = [t for t in fill_triangles(cx) if rng.random() < triangle_prob]
    return build_complex(range(n_nodes), edges, tris)


# ----------------------------------------------------------------------------
# file formats

def load_complex(path: str | Path) -> SimplicialComplex:
    """Read ``{"nodes": [...], "edges": [[u, v], ...], "triangles": [[u, v, w], ...]}``.

    A free-text ``"note"`` key is allowed; any other extra key is rejected.
    """
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected a JSON object")
    extra = set(data) - {"nodes", "edges", "triangles", "note"}
    if extra:
        raise ValueError(f"{path}: unexpected keys {sorted(extra)}")
    if "nodes" not in data or "edges" not in data:
        raise ValueError(f"{path}: 'nodes' and 'edges' are required")
    return build_complex(data["nodes"], data["edges"], data.get("triangles", []))


def complex_to_dict(cx: SimplicialComplex) -> dict:
    return {
        "nodes": list(cx.nodes),
        "edges": [list(e) for e in cx.edge_labels()],
        "triangles": [list(t) for t in cx.triangle_labels()],
    }


def save_complex(cx: SimplicialComplex, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(complex_to_dict(cx), fh, indent=2)
        fh.write("\n")


def _lookup_by_str(cx: SimplicialComplex) -> dict[str, Hashable]:
    return {str(n): n for n in cx.nodes}


def load_flow(cx: SimplicialComplex, path: str | Path) -> np.ndarray:
    """Read an edge-flow CSV with header ``u,v,value``.

    Rows given against the reference orientation (``v,u``) are negated.
    Unknown edges raise ``KeyError``; edges without a row default to 0 with a
    warning.
    """
    by_str = _lookup_by_str(cx)
    flow = np.zeros(cx.n_edges)
    seen = np.zeros(cx.n_edges, dtype=bool)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["u", "v", "value"]:
            raise ValueError(f"{path}: header must be 'u,v,value'")
        for lineno, row in enumerate(reader, start=2):
            u, v = row["u"].strip(), row["v"].strip()
            try:
                idx, sign = cx.find_edge(by_str[u], by_str[v])
            except KeyError:
                raise KeyError(f"{path}:{lineno}: unknown edge ({u}, {v})") from None
            flow[idx] = sign * float(row["value"])
            seen[idx] = True
    missing = int((~seen).sum())
    if missing:
        warnings.warn(f"{path}: {missing} edge(s) missing, set to 0", stacklevel=2)
    return flow


def flow_rows(cx: SimplicialComplex, flow: np.ndarray) -> list[tuple]:
    return [(u, v, float(x)) for (u, v), x in zip(cx.edge_labels(), np.asarray(flow, dtype=float))]


def save_flow(cx: SimplicialComplex, flow: np.ndarray, path: str | Path) -> None:
    flow = np.asarray(flow, dtype=float)
    if flow.shape != (cx.n_edges,):
        raise ValueError(f"flow has shape {flow.shape}, expected ({cx.n_edges},)")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["u", "v", "value"])
        for u, v, x in flow_rows(cx, flow):
            writer.writerow([u, v, repr(x)])
