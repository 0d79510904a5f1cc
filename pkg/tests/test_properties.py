"""Seeded random-instance checks of the engine against the oracle."""

from conftest import has_long_cycle

from guarded_match.config import MatchConfig
from guarded_match.nogood import NogoodStore
from guarded_match.oracle import bfs_order, brute_force_enumerate
from guarded_match.plan import MatchingOrder
from guarded_match.search import build_plan, match_query

ALL = MatchConfig(emit_embeddings=True)
NONE = MatchConfig(
    use_reservation=False, use_nv=False, use_ne=False, use_backjump=False
)


def test_engine_matches_oracle(instances):
    for query, data in instances(40, seed=101):
        truth = brute_force_enumerate(query, data).embeddings
        result = match_query(query, data, ALL)
        assert result.complete
        assert result.embedding_count == len(truth)
        assert set(result.embeddings) == truth


def test_matching_order_does_not_change_results(instances):
    for query, data in instances(15, seed=7):
        greedy = match_query(query, data, ALL)
        order = MatchingOrder(tuple(bfs_order(query)))
        bfs = match_query(query, data, ALL, order=order)
        assert sorted(bfs.embeddings) == sorted(greedy.embeddings)


def test_audited_nogoods_are_valid(instances):
    recorded = 0
    for query, data in instances(25, seed=55):
        store = NogoodStore(audit=True)
        match_query(query, data, MatchConfig(), store=store)
        gcs = build_plan(query, data, MatchConfig())
        by_position = [
            {(p, emb[u]) for p, u in enumerate(gcs.order.order)}
            for emb in brute_force_enumerate(query, data).embeddings
        ]
        for entry in store.audit_log:
            pairs = set(entry.assignments)
            if entry.kind == "nv":
                pairs.add(entry.slot)
            else:
                i, v, j, w = entry.slot
                pairs |= {(i, v), (j, w)}
            assert not any(pairs <= full for full in by_position), entry
            recorded += 1
    assert recorded > 0


def test_debug_checks_hold_on_random_instances(instances):
    checks = 0
    for query, data in instances(20, seed=13):
        store = NogoodStore()
        cfg = MatchConfig(debug_checks=True, emit_embeddings=True)
        result = match_query(query, data, cfg, store=store)
        truth = brute_force_enumerate(query, data).embeddings
        assert set(result.embeddings) == truth
        checks += store.encoding_checks
    assert checks > 0


def test_bounding_sets_explain_candidates_without_edge_nogoods(instances):
    for query, data in instances(20, seed=29):
        cfg = MatchConfig(debug_checks=True, use_ne=False, emit_embeddings=True)
        result = match_query(query, data, cfg)
        assert set(result.embeddings) == brute_force_enumerate(query, data).embeddings


def test_guards_strictly_reduce_recursions_on_cyclic_queries(instances):
    pool = instances(
        80,
        seed=404,
        min_data=28,
        max_data=40,
        min_query=6,
        max_query=8,
        max_labels=2,
    )
    cyclic = [(q, d) for q, d in pool if has_long_cycle(q)]
    assert len(cyclic) >= 20
    limit = {"embedding_limit": 5000}
    lower = 0
    for query, data in cyclic:
        guarded = match_query(query, data, MatchConfig(**limit))
        plain = match_query(query, data, NONE.model_copy(update=limit))
        assert guarded.embedding_count == plain.embedding_count
        assert guarded.stats.recursions <= plain.stats.recursions
        lower += guarded.stats.recursions < plain.stats.recursions
    assert 2 * lower >= len(cyclic), (lower, len(cyclic))
