import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import lexical_penalty_pair
from stcons.corpus_io import NBestEntry, NBestList
from stcons.errors import RescoreError
from stcons.lexicon import from_probs
from stcons.rescoring import RescoreMode, rescore, tie_break_key

LEX_ST = from_probs({("a", "x"): 0.8, ("a", "y"): 0.2, ("b", "y"): 0.9, ("b", "x"): 0.1}, ("en", "de"))
LEX_TS = from_probs({("x", "a"): 0.7, ("x", "b"): 0.3, ("y", "b"): 0.6, ("y", "a"): 0.4}, ("de", "en"))


def oracle_penalty(s, t):
    return lexical_penalty_pair(s.split(), t.split(), LEX_ST.table, LEX_ST.floor_logprob, LEX_TS.table, LEX_TS.floor_logprob)


def paired(*pairs):
    return NBestList("u", tuple(NBestEntry(k + 1, s, t) for k, (s, t) in enumerate(pairs)))


def test_singleton():
    r = rescore(paired(("a", "x")), LEX_ST, LEX_TS)
    assert (r.selected.transcript, r.selected.translation, r.selected.origin) == ("a", "x", (1, 1))


def test_oov_candidate_loses():
    r = rescore(paired(("a b", "x y"), ("a b", "x qqq")), LEX_ST, LEX_TS)
    assert r.selected.origin == (1, 1)
    b = r.ranking[1]
    assert b.penalty == pytest.approx(oracle_penalty("a b", "x qqq"))
    assert b.penalty > r.ranking[0].penalty


def test_cross_two_by_two_matches_enumeration():
    nb = NBestList("u", (
        NBestEntry(1, transcript="a"), NBestEntry(2, transcript="b"),
        NBestEntry(1, translation="y"), NBestEntry(2, translation="x"),
    ))
    r = rescore(nb, LEX_ST, LEX_TS, RescoreMode.CROSS)
    assert len(r.ranking) == 4
    best = min(itertools.product(["a", "b"], ["y", "x"]), key=lambda p: oracle_penalty(*p))
    assert (r.selected.transcript, r.selected.translation) == best
    assert r.selected.origin == (1, 2)


def test_identical_candidates_pick_rank_one():
    r = rescore(paired(("a", "x"), ("a", "x"), ("a", "x")), LEX_ST, LEX_TS)
    assert r.selected.origin == (1, 1)


def test_joint_score_breaks_ties():
    nb = NBestList("u", (NBestEntry(1, "a", "x", joint_score=-3.0), NBestEntry(2, "a", "x", joint_score=-1.0)))
    assert rescore(nb, LEX_ST, LEX_TS).selected.origin == (2, 2)


def test_errors():
    with pytest.raises(RescoreError, match="empty"):
        rescore(NBestList("u", ()), LEX_ST, LEX_TS)
    with pytest.raises(RescoreError, match="translation"):
        rescore(NBestList("u", (NBestEntry(1, transcript="a"),)), LEX_ST, LEX_TS, RescoreMode.CROSS)
    with pytest.raises(RescoreError, match="paired"):
        rescore(NBestList("u", (NBestEntry(1, transcript="a"),)), LEX_ST, LEX_TS, RescoreMode.PAIRED)


sentence_s = st.lists(st.sampled_from(["a", "b", "c"]), max_size=3).map(" ".join)
sentence_t = st.lists(st.sampled_from(["x", "y", "z"]), max_size=3).map(" ".join)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(sentence_s, sentence_t), min_size=1, max_size=6), st.tuples(sentence_s, sentence_t))
def test_selection_properties(pairs, extra):
    r = rescore(paired(*pairs), LEX_ST, LEX_TS)
    # re-scan the ranking
    assert r.selected == min(r.ranking, key=tie_break_key).candidate
    assert r.penalty == min(c.penalty for c in r.ranking)
    assert (r.selected.transcript, r.selected.translation) in pairs
    for c in r.ranking:
        assert c.penalty == pytest.approx(oracle_penalty(c.candidate.transcript, c.candidate.translation), abs=1e-12)
    grown = rescore(paired(*pairs, extra), LEX_ST, LEX_TS)
    assert grown.selected in (r.selected, grown.ranking[-1].candidate)
