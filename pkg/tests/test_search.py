import pytest
from conftest import SAMPLE_EMBEDDING, clique

from guarded_match.config import DEFAULT_EMBEDDING_LIMIT, MatchConfig, toggle_matrix
from guarded_match.graph import Graph
from guarded_match.nogood import ConflictKind, NogoodRecord, NogoodStore
from guarded_match.oracle import brute_force_enumerate
from guarded_match.plan import DisconnectedQueryError, MatchingOrder
from guarded_match.search import (
    MatchStats,
    SearchControl,
    SearchEngine,
    Termination,
    match_query,
    prepare_gcs,
)

NONE = MatchConfig(
    use_reservation=False, use_nv=False, use_ne=False, use_backjump=False
)


def test_sample_single_embedding(sample_query, sample_data):
    result = match_query(sample_query, sample_data, MatchConfig(emit_embeddings=True))
    assert result.complete
    assert result.embedding_count == 1
    assert result.embeddings == [SAMPLE_EMBEDDING]


def test_sample_identity_order_records_and_backjump(sample_query, sample_data):
    store = NogoodStore(audit=True)
    result = match_query(
        sample_query,
        sample_data,
        MatchConfig(emit_embeddings=True),
        order=MatchingOrder.identity(5),
        store=store,
    )
    assert result.embeddings == [SAMPLE_EMBEDDING]
    # u2 -> v6 fails whatever was assigned before it
    assert store.nv[(2, 6)] == NogoodRecord(0, 0, 0)
    assert store.nv[(2, 7)].mask == 0b1
    assert store.nv[(0, 0)].mask == 0
    assert store.ne[(2, 7, 4, 0)].mask == 0b1
    assert store.ne[(2, 7, 4, 1)].mask == 0
    assert store.ne[(2, 7, 3, 10)].mask == 0b1

    stats = result.stats
    assert stats.backjumps == 1
    assert stats.pruned_reservation == 1
    assert stats.pruned_injectivity == 1
    assert stats.pruned_nv >= 2
    assert stats.pruned_ne >= 1
    assert store.audit_log


def test_debug_checks_verify_nogood_encoding(sample_query, sample_data):
    store = NogoodStore()
    result = match_query(
        sample_query,
        sample_data,
        MatchConfig(debug_checks=True),
        order=MatchingOrder.identity(5),
        store=store,
    )
    assert result.embedding_count == 1
    assert store.encoding_checks >= 2


def test_triangle_in_k4():
    result = match_query(clique(3), clique(4), MatchConfig(emit_embeddings=True))
    assert result.embedding_count == 24
    assert len(set(result.embeddings)) == 24


def test_absent_label_gives_nothing():
    result = match_query(clique(3, label=9), clique(5))
    assert result.embedding_count == 0
    assert result.complete
    assert result.stats.recursions == 1


def test_single_vertex_query():
    data = Graph.from_edges([0] * 5, [])
    result = match_query(Graph.from_edges([0], []), data)
    assert result.embedding_count == 5
    assert result.stats.recursions == 6


def test_embedding_limit():
    cfg = MatchConfig(embedding_limit=100, emit_embeddings=True)
    result = match_query(clique(3), clique(8), cfg)
    assert result.embedding_count == 100
    assert result.termination is Termination.EMBEDDING_LIMIT
    assert len(set(result.embeddings)) == 100
    truth = brute_force_enumerate(clique(3), clique(8)).embeddings
    assert set(result.embeddings) <= truth


def test_limit_above_total_completes():
    result = match_query(clique(3), clique(4), MatchConfig(embedding_limit=1000))
    assert result.embedding_count == 24
    assert result.termination is Termination.COMPLETE


def test_time_limit():
    cfg = MatchConfig(time_limit=0.05, use_reservation=False)
    result = match_query(clique(4), clique(30), cfg)
    assert result.termination is Termination.TIME_LIMIT
    assert not result.complete
    assert result.embedding_count < 30 * 29 * 28 * 27


def test_sink_sees_every_embedding():
    seen = []
    result = match_query(clique(3), clique(5), sink=seen.append)
    assert len(seen) == result.embedding_count == 60


def test_disconnected_query_rejected(sample_data):
    query = Graph.from_edges([0, 0, 1], [(0, 1)])
    with pytest.raises(DisconnectedQueryError):
        match_query(query, sample_data)


def test_every_toggle_combination_agrees_with_oracle(instances):
    for query, data in instances(12, seed=3):
        truth = brute_force_enumerate(query, data).embeddings
        recursions = {}
        for cfg in toggle_matrix(MatchConfig(emit_embeddings=True)):
            result = match_query(query, data, cfg)
            assert len(result.embeddings) == len(set(result.embeddings))
            assert set(result.embeddings) == truth, cfg.label()
            recursions[cfg.label()] = result.stats.recursions
        assert recursions["all"] <= recursions["none"]


def test_guards_never_grow_the_tree(sample_query, sample_data):
    guarded = match_query(sample_query, sample_data)
    plain = match_query(sample_query, sample_data, NONE)
    assert guarded.stats.recursions <= plain.stats.recursions
    assert plain.stats.pruned_nv == plain.stats.pruned_ne == 0
    assert plain.stats.backjumps == 0


def test_stats_merge_and_prune_ratio():
    a = MatchStats(recursions=3, candidates=8, pruned_nv=2)
    b = MatchStats(recursions=2, candidates=2, pruned_ne=2, embeddings=7)
    a.merge(b)
    assert a.recursions == 5
    assert a.embeddings == 0
    ratio = a.prune_ratio()
    assert ratio["nv"] == pytest.approx(2 / 12)
    assert ratio["ne"] == pytest.approx(2 / 12)
    assert MatchStats().prune_ratio()["nv"] == 0.0


def test_default_limit_stops_at_exactly_that_many():
    seen = []
    cfg = MatchConfig(embedding_limit=DEFAULT_EMBEDDING_LIMIT)
    result = match_query(clique(4), clique(30), cfg, sink=seen.append)
    assert result.embedding_count == len(seen) == 100_000
    assert result.termination is Termination.EMBEDDING_LIMIT


def test_debug_checks_catch_unrestored_state(monkeypatch):
    explore = SearchEngine._explore

    def leaky(self, depth, frames, bounds, targets, only=None):
        outcome = explore(self, depth, frames, bounds, targets, only)
        if depth == 2:
            self.embedding[0] = -1
        return outcome

    monkeypatch.setattr(SearchEngine, "_explore", leaky)
    with pytest.raises(AssertionError, match="not restored"):
        match_query(clique(3), clique(4), MatchConfig(debug_checks=True))


def test_bound_check_rejects_unexplained_removal(sample_query, sample_data):
    cfg = MatchConfig(debug_checks=True, use_ne=False)
    gcs = prepare_gcs(sample_query, sample_data, cfg)
    engine = SearchEngine(gcs, cfg, SearchControl(cfg))
    v = gcs.candidates[0][0]
    with pytest.raises(AssertionError, match="bounding set"):
        engine._check_bound(0, v, 1, [], 0)


def test_conflicts_go_through_conflict_mask(sample_query, sample_data, monkeypatch):
    import guarded_match.search as search

    kinds = []
    real = search.conflict_mask

    def spy(kind, k, **context):
        kinds.append(kind)
        return real(kind, k, **context)

    monkeypatch.setattr(search, "conflict_mask", spy)
    result = match_query(sample_query, sample_data, order=MatchingOrder.identity(5))
    assert result.embedding_count == 1
    assert {
        ConflictKind.INJECTIVITY,
        ConflictKind.RESERVATION,
        ConflictKind.NOGOOD,
    } <= set(kinds)
