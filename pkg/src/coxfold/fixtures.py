"""Bundled example objects used by tests, docs, and the CLI.

Everything here is constructed programmatically so ids are stable; the
JSON files under ``data/`` are canonical dumps of these constructions and
serve as golden fixtures.
"""

from __future__ import annotations

from importlib import resources
from typing import Optional

from .coxeter import INF, CoxeterMatrix, alternating_word
from .decomposition import (
    Decomposition,
    Marking,
    SpecialGraph,
    Subgraph,
    assemble,
)
from .graphs import GraphBuilder, GraphPath, LabeledGraph


def data_path(name: str) -> str:
    """Filesystem path of a bundled golden data file."""
    return str(resources.files("coxfold").joinpath("data", name))


def _alternating_path(
    b: GraphBuilder, start: int, letters: tuple[str, ...], end: Optional[int] = None
) -> list[int]:
    """Add a fresh path reading ``letters`` from ``start`` (to ``end`` if
    given, else to a fresh vertex); returns the forward edge ids."""
    ids = []
    cur = start
    for i, letter in enumerate(letters):
        last = i == len(letters) - 1
        nxt = end if (last and end is not None) else b.add_vertex()
        eid, _ = b.add_edge(cur, nxt, letter)
        ids.append(eid)
        cur = nxt
    return ids


def two_path_special_graph() -> tuple[SpecialGraph, CoxeterMatrix]:
    """Two special paths sharing one extremal vertex: type {s,t} with
    exponent 6 and type {t,u} with exponent 7."""
    matrix = CoxeterMatrix(
        ("s", "t", "u"), {("s", "t"): 6, ("t", "u"): 7, ("s", "u"): INF}
    )
    b = GraphBuilder("involutive")
    v0 = b.add_vertex()
    cur = v0
    p1 = []
    for letter in alternating_word("s", "t", 5):
        nxt = b.add_vertex()
        eid, _ = b.add_edge(cur, nxt, letter)
        p1.append(eid)
        cur = nxt
    v5 = cur
    b.add_edge(v0, v0, "t")
    b.add_edge(v5, v5, "t")
    p2 = []
    for letter in alternating_word("t", "u", 6):
        nxt = b.add_vertex()
        eid, _ = b.add_edge(cur, nxt, letter)
        p2.append(eid)
        cur = nxt
    w6 = cur
    b.add_edge(v5, v5, "u")
    b.add_edge(w6, w6, "t")
    g = b.build()
    sg = SpecialGraph(
        g,
        (GraphPath(g, tuple(p1)), GraphPath(g, tuple(p2))),
        (frozenset(("s", "t")), frozenset(("t", "u"))),
    )
    return sg, matrix


def glued_two_path_decomposition() -> Decomposition:
    """The two-path special graph attached to a small wedge at one vertex."""
    sg, matrix = two_path_special_graph()
    gb = GraphBuilder("involutive")
    g0 = gb.add_vertex()
    gb.add_edge(g0, g0, "s")
    gb.add_edge(g0, g0, "t")
    gb.add_edge(g0, g0, "u")
    gamma = gb.build()
    anchor = min(sg.graph.vertices)
    return assemble(matrix, gamma, sg, (anchor,), (), {anchor: g0}, {}, basepoint=g0)


def three_component_decomposition() -> Decomposition:
    """Three Delta components glued to a rank-4 wedge at one point each.

    Frozen expectations: c2 = 4 + 3 = 7 and c_star = 4 + 3 + 1 = 8, with
    b(Gamma) = 4, cc(Delta) = 3, and one simple closed special path
    contributing b(Delta minus loops) = 1.
    """
    matrix = CoxeterMatrix(
        ("s", "t", "u"), {("s", "t"): 6, ("t", "u"): 7, ("s", "u"): INF}
    )
    b = GraphBuilder("involutive")
    anchors = []
    paths = []
    types = []
    for _ in range(2):  # two open type-{s,t} components
        a0 = b.add_vertex()
        cur = a0
        ids = []
        for letter in alternating_word("s", "t", 5):
            nxt = b.add_vertex()
            eid, _ = b.add_edge(cur, nxt, letter)
            ids.append(eid)
            cur = nxt
        b.add_edge(a0, a0, "t")
        b.add_edge(cur, cur, "t")
        anchors.append(a0)
        paths.append(tuple(ids))
        types.append(frozenset(("s", "t")))
    z0 = b.add_vertex()  # one closed type-{t,u} component
    cur = z0
    ids = []
    letters = alternating_word("t", "u", 6)
    for i, letter in enumerate(letters):
        nxt = z0 if i == len(letters) - 1 else b.add_vertex()
        eid, _ = b.add_edge(cur, nxt, letter)
        ids.append(eid)
        cur = nxt
    b.add_edge(z0, z0, "u")
    b.add_edge(z0, z0, "t")
    anchors.append(z0)
    paths.append(tuple(ids))
    types.append(frozenset(("t", "u")))
    g = b.build()
    sg = SpecialGraph(g, tuple(GraphPath(g, p) for p in paths), tuple(types))

    gb = GraphBuilder("involutive")
    g0 = gb.add_vertex()
    for label in ("s", "t", "u", "s"):
        gb.add_edge(g0, g0, label)
    gamma = gb.build()
    return assemble(
        matrix,
        gamma,
        sg,
        anchors,
        (),
        {a: g0 for a in anchors},
        {},
        basepoint=g0,
    )


def _long_path_special(m: int) -> tuple[SpecialGraph, list[int], list[int]]:
    """One open type-{s,t} special path of length m - 1 with boundary
    t-loops; returns (graph, vertex ids along the path, edge ids)."""
    b = GraphBuilder("involutive")
    verts = [b.add_vertex()]
    edges = []
    cur = verts[0]
    for letter in alternating_word("s", "t", m - 1):
        nxt = b.add_vertex()
        eid, _ = b.add_edge(cur, nxt, letter)
        verts.append(nxt)
        edges.append(eid)
        cur = nxt
    b.add_edge(verts[0], verts[0], "t")
    b.add_edge(verts[-1], verts[-1], "t")
    g = b.build()
    sg = SpecialGraph(
        g, (GraphPath(g, tuple(edges)),), (frozenset(("s", "t")),)
    )
    return sg, verts, edges


def tame_two_anchor_fixture() -> tuple[Decomposition, Marking, dict[str, GraphPath]]:
    """Tame fixture with a discrete two-vertex F (exponent 64).

    Gamma is an s-loop plus a t-edge; F holds the second and last path
    vertices, attached injectively.  The marking is empty.
    """
    m = 64
    matrix = CoxeterMatrix(("s", "t"), {("s", "t"): m})
    sg, verts, edges = _long_path_special(m)
    gb = GraphBuilder("involutive")
    g0 = gb.add_vertex()
    g1 = gb.add_vertex()
    gb.add_edge(g0, g1, "t")
    gb.add_edge(g0, g0, "s")
    gamma = gb.build()
    d = assemble(
        matrix,
        gamma,
        sg,
        (verts[1], verts[-1]),
        (),
        {verts[1]: g0, verts[-1]: g1},
        {},
        basepoint=g0,
    )
    th = d.theta.graph
    bp = d.theta.basepoint
    s_loop = next(
        eid
        for eid in th.edges_at(bp)
        if th.edge(eid).label == "s" and th.is_loop(eid)
    )
    down = d.delta_emap[sg.graph.inv(edges[0])]
    t_loop_x0 = next(
        eid
        for eid in th.geometric_edges()
        if th.is_loop(eid)
        and th.edge(eid).label == "t"
        and th.edge(eid).alpha == d.delta_vmap[verts[0]]
    )
    up = d.delta_emap[edges[0]]
    witnesses = {
        "s": GraphPath(th, (s_loop,), start=bp),
        "t": GraphPath(
            th,
            (s_loop, down, t_loop_x0, up, s_loop),
            start=bp,
        ),
    }
    return d, Marking.empty(), witnesses


def tame_marked_fixture() -> tuple[Decomposition, Marking, dict[str, GraphPath]]:
    """Tame fixture with an F-edge and a nonempty marking (exponent 128).

    Three path vertices attach to the single Gamma vertex, gluing a short
    stretch of the special path into a marked cycle in Theta.
    """
    m = 128
    matrix = CoxeterMatrix(("s", "t"), {("s", "t"): m})
    sg, verts, edges = _long_path_special(m)
    g = sg.graph
    gb = GraphBuilder("involutive")
    g0 = gb.add_vertex()
    s_loop_gamma, _ = gb.add_edge(g0, g0, "s")
    t_loop_gamma, _ = gb.add_edge(g0, g0, "t")
    gamma = gb.build()
    x1, x2, x5 = verts[1], verts[2], verts[5]
    e2 = g.geometric(edges[1])  # the t-edge from x1 to x2
    d = assemble(
        matrix,
        gamma,
        sg,
        (x1, x2, x5),
        (e2,),
        {x1: g0, x2: g0, x5: g0},
        {e2: t_loop_gamma},
        basepoint=g0,
    )
    th = d.theta.graph
    bp = d.theta.basepoint
    omega_vertices = {d.delta_vmap[v] for v in (x1, verts[3], verts[4], x5)}
    omega_edges = {d.bar_edge(g.geometric(edges[k])) for k in (1, 2, 3, 4)}
    marking = Marking(Subgraph(frozenset(omega_vertices), frozenset(omega_edges)))
    witnesses = {
        "s": GraphPath(th, (d.gamma_emap[0],), start=bp),
        "t": GraphPath(th, (d.gamma_emap[2],), start=bp),
    }
    return d, marking, witnesses


def full_standard_fixture(n: int) -> tuple[Decomposition, Marking, dict[str, GraphPath]]:
    """(D_X, empty) for X = S: a wedge of one loop per generator, empty
    Delta, exponents exactly at the 6 * 2^n threshold."""
    gens = tuple(f"s{i}" for i in range(1, n + 1))
    entries = {(a, bb): 6 * 2 ** n for a in gens for bb in gens if a < bb}
    matrix = CoxeterMatrix(gens, entries)
    gb = GraphBuilder("involutive")
    g0 = gb.add_vertex()
    loop_ids = {}
    for s in gens:
        eid, _ = gb.add_edge(g0, g0, s)
        loop_ids[s] = eid
    gamma = gb.build()
    d = assemble(matrix, gamma, SpecialGraph.empty(), (), (), {}, {}, basepoint=g0)
    th = d.theta.graph
    bp = d.theta.basepoint
    witnesses = {
        s: GraphPath(th, (d.gamma_emap[loop_ids[s]],), start=bp) for s in gens
    }
    return d, Marking.empty(), witnesses


def halving_fixture(m: int) -> Decomposition:
    """A simple closed type-{s,t} special path of length m - 1 with one
    boundary loop, glued to a one-vertex Gamma; halving its type drops the
    potential by one."""
    if m % 2 != 0 or m < 6:
        raise ValueError("halving fixtures use even m >= 6")
    matrix = CoxeterMatrix(("s", "t"), {("s", "t"): m})
    b = GraphBuilder("involutive")
    z0 = b.add_vertex()
    cur = z0
    ids = []
    letters = alternating_word("s", "t", m - 1)
    for i, letter in enumerate(letters):
        nxt = z0 if i == len(letters) - 1 else b.add_vertex()
        eid, _ = b.add_edge(cur, nxt, letter)
        ids.append(eid)
        cur = nxt
    b.add_edge(z0, z0, "t")
    g = b.build()
    sg = SpecialGraph(g, (GraphPath(g, tuple(ids)),), (frozenset(("s", "t")),))
    gb = GraphBuilder("involutive")
    g0 = gb.add_vertex()
    gamma = gb.build()
    return assemble(matrix, gamma, sg, (z0,), (), {z0: g0}, {}, basepoint=g0)
