"""Tests for special graphs, decompositions, tameness, and surgery."""

import json

import pytest

from coxfold.coxeter import INF, CoxeterMatrix
from coxfold.decomposition import (
    Marking,
    SpecialGraph,
    Subgraph,
    assemble,
    check_tame,
    complexity,
    decomposition_to_dot,
    decomposition_to_json_dict,
    forest_check,
    halve_special_type,
    load_decomposition,
    o3_coverage_check,
    o3_inequality_chain,
    omega_neighborhood,
    potential,
    saturate_marking,
    sub_betti,
    unfold_components,
    unfold_isolated,
    unfold_merge,
    validate_special,
)
from coxfold.fixtures import (
    data_path,
    glued_two_path_decomposition,
    halving_fixture,
    tame_marked_fixture,
    tame_two_anchor_fixture,
    three_component_decomposition,
    two_path_special_graph,
    full_standard_fixture,
)
from coxfold.graphs import GraphBuilder, GraphPath, betti, canonical_json, euler


class TestValidateSpecial:
    def test_two_path_fixture_passes(self):
        sg, matrix = two_path_special_graph()
        report = validate_special(sg, matrix)
        assert report.ok, report.failures

    def test_missing_loop_breaks_delta6(self):
        sg, matrix = two_path_special_graph()
        g = sg.graph
        # drop the t-loop at the left end of the first path
        first = sg.special_paths[0]
        left = first.alpha
        loops = [eid for eid in g.geometric_edges() if g.is_loop(eid) and g.edge(eid).alpha == left]
        keep = set(g.edge_ids)
        for geo in loops[:1]:
            keep -= {geo, g.inv(geo)}
        from coxfold.graphs import LabeledGraph

        g2 = LabeledGraph(g.mode, g.vertices, [g.edge(e) for e in sorted(keep)])
        sg2 = SpecialGraph(
            g2,
            tuple(GraphPath(g2, p.edges) for p in sg.special_paths),
            sg.types,
        )
        report = validate_special(sg2, matrix)
        assert not (
            report.conditions["Delta6"][0] and report.conditions["Delta5"][0]
        )

    def test_short_path_breaks_delta1(self):
        matrix = CoxeterMatrix(("s", "t"), {("s", "t"): 3})
        b = GraphBuilder("involutive")
        v0, v1 = b.add_vertex(), b.add_vertex()
        eid, _ = b.add_edge(v0, v1, "s")
        b.add_edge(v0, v0, "t")
        b.add_edge(v1, v1, "t")
        g = b.build()
        sg = SpecialGraph(g, (GraphPath(g, (eid,)),), (frozenset(("s", "t")),))
        report = validate_special(sg, matrix)
        assert not report.conditions["Delta1"][0]


class TestAssemble:
    def test_euler_additivity(self):
        d = three_component_decomposition()
        chi_f = len(d.f_vertices) - len(d.f_edges)
        assert euler(d.theta.graph) == euler(d.gamma) + euler(d.delta.graph) - chi_f

    def test_bar_maps_cover_delta(self):
        d = glued_two_path_decomposition()
        th = d.theta.graph
        for v in d.delta.graph.vertices:
            assert d.delta_vmap[v] in th.vertices
        for eid in d.delta.graph.edge_ids:
            assert th.has_edge(d.delta_emap[eid])

    def test_rejects_bad_attachment(self):
        sg, matrix = two_path_special_graph()
        b = GraphBuilder("involutive")
        g0 = b.add_vertex()
        gamma = b.build()
        anchor = min(sg.graph.vertices)
        with pytest.raises(ValueError):
            assemble(matrix, gamma, sg, (anchor,), (), {anchor: 99}, {})


class TestComplexity:
    def test_three_component_values(self):
        d = three_component_decomposition()
        c = complexity(d)
        assert c.as_tuple() == (8, 7, 0, 3, 22, 26, 0)
        assert c.c_star == 8
        assert potential(d) == 8

    def test_potential_identity_everywhere(self):
        for d in (
            glued_two_path_decomposition(),
            three_component_decomposition(),
            halving_fixture(8),
        ):
            # potential() asserts its own defining identity internally
            assert potential(d) == complexity(d).c_star

    def test_ordering_ignores_c_star(self):
        a = complexity(three_component_decomposition())
        assert (a < a) is False
        assert a == a


class TestTameness:
    def test_two_anchor_fixture_is_tame(self):
        d, marking, witnesses = tame_two_anchor_fixture()
        report = check_tame(d, marking, witnesses)
        assert report.ok, report.statuses
        assert complexity(d, marking).as_tuple() == (3, 3, 0, 2, 65, 67, 0)

    def test_marked_fixture_is_tame(self):
        d, marking, witnesses = tame_marked_fixture()
        report = check_tame(d, marking, witnesses)
        assert report.ok, report.statuses
        assert complexity(d, marking).as_tuple() == (4, 4, 0, 2, 129, 130, 7)

    def test_without_witnesses_theta_is_open(self):
        d, marking, _ = tame_two_anchor_fixture()
        report = check_tame(d, marking, None)
        assert report.statuses["Theta"] == "not verified"
        assert report.numeric_ok()

    def test_omega_neighborhood_monotone(self):
        d, marking, _ = tame_marked_fixture()
        sizes = []
        for k in range(4):
            omega_k, tilde_k = omega_neighborhood(d, marking, k)
            sizes.append((len(omega_k.edges), len(tilde_k.edges)))
        assert sizes == sorted(sizes)

    def test_forest_and_coverage_conclusions(self):
        d, marking, _ = tame_marked_fixture()
        assert forest_check(d, marking)
        assert o3_coverage_check(d, marking)

    def test_inequality_chain_all_steps_hold(self):
        d, marking, _ = tame_marked_fixture()
        for step in o3_inequality_chain(d, marking):
            assert step["ok"], step

    def test_chain_needs_nonempty_marking(self):
        d, marking, _ = tame_two_anchor_fixture()
        with pytest.raises(ValueError):
            o3_inequality_chain(d, marking)

    def test_saturation_is_stable_on_tame_marking(self):
        d, marking, _ = tame_marked_fixture()
        saturated = saturate_marking(d, marking)
        assert saturated.omega.edges >= marking.omega.edges
        th = d.theta.graph
        before = len(marking.omega.edges)
        from coxfold.decomposition import sub_euler

        assert len(saturated.omega.edges) + 8 * sub_euler(th, saturated.omega) <= (
            before + 8 * sub_euler(th, marking.omega)
        )


class TestUnfoldings:
    def test_u1_collapses_f_components(self):
        d, marking, _ = tame_two_anchor_fixture()
        d2 = unfold_components(d)
        assert len(d2.f_vertices) == 2
        assert complexity(d2).as_tuple()[:5] == complexity(d).as_tuple()[:5]

    def test_u2_merges_components(self):
        d, _, _ = tame_two_anchor_fixture()
        xs = sorted(d.f_vertices)
        path = _delta_path_between(d, xs[0], xs[1])
        d2 = unfold_merge(d, xs[0], xs[1], path)
        assert len(_f_comps(d2)) == len(_f_comps(d)) - 1
        assert complexity(d2).as_tuple()[:5] == complexity(d).as_tuple()[:5]

    def test_u3_moves_attachment_out(self):
        d, _, _ = tame_two_anchor_fixture()
        v = max(d.f_vertices)
        eid = next(
            e for e in d.delta.graph.edge_ids if d.delta.graph.edge(e).alpha == v
        )
        d2 = unfold_isolated(d, v, eid)
        assert d2.p_vertices[v] not in d.gamma.vertices
        assert complexity(d2).as_tuple()[:5] == complexity(d).as_tuple()[:5]

    def test_u2_rejects_same_component(self):
        d, _, _ = tame_two_anchor_fixture()
        x = min(d.f_vertices)
        with pytest.raises(ValueError):
            unfold_merge(d, x, x, GraphPath(d.delta.graph, (), start=x))


class TestHalving:
    def test_halves_exponent_and_length(self):
        d = halving_fixture(8)
        d2, report = halve_special_type(d, ("s", "t"))
        assert d2.matrix.entry("s", "t") == 4
        assert len(d2.delta.special_paths[0].edges) == 3

    def test_bad_pair_rejected(self):
        d = halving_fixture(8)
        with pytest.raises(ValueError):
            halve_special_type(d, ("s", "s"))

    def test_small_halving_reports_delta1_failure(self):
        d2, report = halve_special_type(halving_fixture(6), ("s", "t"))
        assert not report.conditions["Delta1"][0]

    def test_large_halving_stays_special(self):
        d2, report = halve_special_type(halving_fixture(12), ("s", "t"))
        assert report.ok, report.failures


class TestSerialization:
    @pytest.mark.parametrize(
        "name",
        [
            "glued_two_path",
            "three_component",
            "tame_two_anchor",
            "tame_marked",
            "halving_m12",
        ],
    )
    def test_golden_files_round_trip_exactly(self, name):
        path = data_path(name + ".json")
        d, marking, witnesses = load_decomposition(path)
        regenerated = canonical_json(
            decomposition_to_json_dict(d, marking, witnesses)
        )
        with open(path, "r", encoding="utf-8") as fh:
            assert fh.read() == regenerated

    def test_loaded_fixture_matches_builder(self):
        d, marking, witnesses = load_decomposition(data_path("tame_marked.json"))
        built, built_marking, _ = tame_marked_fixture()
        assert complexity(d, marking) == complexity(built, built_marking)
        assert check_tame(d, marking, witnesses).ok

    def test_dot_export_has_clusters(self):
        dot = decomposition_to_dot(three_component_decomposition())
        assert "cluster_gamma" in dot
        assert "cluster_delta" in dot


class TestFullStandard:
    @pytest.mark.parametrize("n", [2, 3])
    def test_c1_is_rank(self, n):
        d, marking, witnesses = full_standard_fixture(n)
        assert complexity(d, marking).c1 == n
        assert check_tame(d, marking, witnesses).ok


def _f_comps(d):
    from coxfold.decomposition import _f_components

    return _f_components(d)


def _delta_path_between(d, x, y):
    """Shortest edge path between two Delta vertices, by BFS."""
    g = d.delta.graph
    prev = {x: None}
    frontier = [x]
    while frontier and y not in prev:
        nxt = []
        for v in frontier:
            for eid in g.edges_at(v):
                w = g.edge(eid).omega
                if w not in prev:
                    prev[w] = eid
                    nxt.append(w)
        frontier = nxt
    edges = []
    cur = y
    while prev[cur] is not None:
        eid = prev[cur]
        edges.append(eid)
        cur = g.edge(eid).alpha
    return GraphPath(g, tuple(reversed(edges)), start=x)
