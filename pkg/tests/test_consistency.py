import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stcons.consistency import (
    combined_dialog,
    combined_from_values,
    correlation_from_values,
    direction_penalty,
    error_correlation,
    lexical_consistency,
    surface_consistency,
)
from stcons.corpus_io import Corpus, Utterance
from stcons.errors import MetricError
from stcons.lexicon import from_probs


def corpus(*pairs, refs=None):
    refs = refs or [(None, None)] * len(pairs)
    return Corpus(tuple(Utterance(f"u{k}", s, t, rs, rt) for k, ((s, t), (rs, rt)) in enumerate(zip(pairs, refs))))


def identity_lexicons(words):
    probs = {(w, w): 1.0 for w in words}
    return from_probs(probs, ("en", "de")), from_probs(probs, ("de", "en"))


HALF_ST = from_probs({("a", "x"): 0.5, ("a", "y"): 0.5}, ("en", "de"))
HALF_TS = from_probs({("x", "a"): 0.5, ("x", "b"): 0.5}, ("de", "en"))


# ------------------------------------------------------------------ lexical


def test_identity_lexicon_scores_zero():
    st_, ts = identity_lexicons(["hello", "world"])
    r = lexical_consistency(corpus(("hello world", "hello world")), st_, ts)
    assert r.score == 0.0 and (r.n, r.m) == (2, 2)


def test_half_probability_gives_log2():
    r = lexical_consistency(corpus(("a", "x")), HALF_ST, HALF_TS)
    assert r.score == pytest.approx(math.log(2), abs=1e-15)


def test_oov_contributes_minus_floor():
    lex_st = from_probs({("a", "x"): 1.0, ("b", "y"): 0.5, ("b", "z"): 0.5}, ("en", "de"))
    assert direction_penalty(["x"], ["a"], lex_st) == 0.0
    assert direction_penalty(["x", "qqq"], ["a"], lex_st) == -lex_st.floor_logprob
    # empty source side falls back to the floor for every target word
    assert direction_penalty(["x", "y"], [], lex_st) == -2 * lex_st.floor_logprob


def test_corpus_normalization_uses_word_totals():
    r = lexical_consistency(corpus(("a", "x"), ("a a a", "x")), HALF_ST, HALF_TS)
    assert (r.n, r.m) == (2, 4)
    assert r.direction_ts == pytest.approx(sum(p.t_to_s for p in r.per_utterance) / 2)
    assert r.direction_st == pytest.approx(sum(p.s_to_t for p in r.per_utterance) / 4)
    assert r.score == pytest.approx(0.5 * (r.direction_ts + r.direction_st))


def test_lexical_errors():
    with pytest.raises(MetricError, match="undefined"):
        lexical_consistency(corpus(("", "")), HALF_ST, HALF_TS)
    with pytest.raises(MetricError, match="mirror"):
        lexical_consistency(corpus(("a", "x")), HALF_ST, HALF_ST)


words_s = st.lists(st.sampled_from(["a", "b", "c"]), min_size=1, max_size=4).map(" ".join)
words_t = st.lists(st.sampled_from(["x", "y", "z"]), min_size=1, max_size=4).map(" ".join)
LEX_ST = from_probs({("a", "x"): 0.7, ("a", "y"): 0.3, ("b", "y"): 0.6, ("b", "z"): 0.4, ("c", "z"): 1.0}, ("en", "de"))
LEX_TS = from_probs({("x", "a"): 0.9, ("x", "b"): 0.1, ("y", "b"): 0.8, ("y", "c"): 0.2, ("z", "c"): 1.0}, ("de", "en"))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(words_s, words_t), min_size=1, max_size=8), st.randoms())
def test_lexical_order_invariant(pairs, rnd):
    shuffled = list(pairs)
    rnd.shuffle(shuffled)
    a = lexical_consistency(corpus(*pairs), LEX_ST, LEX_TS).score
    b = lexical_consistency(corpus(*shuffled), LEX_ST, LEX_TS).score
    assert a == pytest.approx(b, rel=1e-12, abs=1e-15)


def test_lexical_strictly_worsens():
    # "x" has best source log-prob log .7 given "a"; "y" only log .3
    better = lexical_consistency(corpus(("a", "x x")), LEX_ST, LEX_TS).score
    worse = lexical_consistency(corpus(("a", "x y")), LEX_ST, LEX_TS).score
    assert worse > better


# ------------------------------------------------------------------ surface


def test_surface_examples():
    assert surface_consistency(corpus(("Bill Gross", "Bill Gross"), ("guten Morgen", "guten Morgen"))).score == 1.0
    assert surface_consistency(corpus(("abcde", "vwxyz"))).score == 0.0
    r = surface_consistency(corpus(("Bill Gross ok", "Bill Gross ja")))
    assert r.score == pytest.approx(1 - 4 / 26, abs=1e-15)
    assert (r.total_del, r.total_ins, r.total_shift, r.total_len) == (2, 2, 0, 26)


def test_surface_pooled_not_averaged():
    r = surface_consistency(corpus(("Bill Gross", "Bill Gross"), ("abcde", "vwxyz")))
    assert r.score == pytest.approx(1 - 10 / 30)


def test_surface_all_empty_is_error():
    with pytest.raises(MetricError):
        surface_consistency(corpus(("", ""), ("", "")))


texts = st.text(alphabet="ab AB", max_size=20)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(texts, texts), min_size=1, max_size=5))
def test_surface_swap_symmetric(pairs):
    if all(not s and not t for s, t in pairs):
        return
    a = surface_consistency(corpus(*pairs))
    b = surface_consistency(corpus(*[(t, s) for s, t in pairs]))
    assert a.score == b.score
    assert (a.total_del, a.total_ins, a.total_shift) == (b.total_ins, b.total_del, b.total_shift)


# ------------------------------------------------------------------ correlation and combined


def test_correlation_examples():
    assert correlation_from_values([0, 0.2, 0.5], [0, 0.3, 0.6]).tau == 1.0
    assert correlation_from_values([0, 0.2, 0.5], [0.6, 0.3, 0]).tau == -1.0
    # C=2, D=0, one pair tied on the WER side only: tau-b = 2/sqrt(3*2)
    assert correlation_from_values([0, 0, 0.4], [0.1, 0.2, 0.9]).tau == pytest.approx(2 / math.sqrt(6), abs=1e-15)


def test_correlation_undefined_is_flagged():
    r = correlation_from_values([0.0, 0.0, 0.0], [0.1, 0.2, 0.3])
    assert r.undefined and r.tau is None and "transcript WER" in r.reason


def test_correlation_on_corpus():
    refs = [("a b c d", "one two three four"), ("a b c d", "one two three four"), ("a b c d", "one two three four")]
    hyps = [("a b c d", "one two three four"), ("a b x d", "one two thr four"), ("x y c d", "one zzzzz xx four")]
    r = error_correlation(corpus(*hyps, refs=refs))
    assert r.wer_clipped_values == (0.0, 0.25, 0.5)
    assert r.tau == 1.0
    with pytest.raises(MetricError, match="reference"):
        error_correlation(corpus(*hyps))
    with pytest.raises(MetricError, match="two"):
        error_correlation(corpus(hyps[0], refs=refs[:1]))


def test_combined_examples():
    assert combined_from_values([0.2], [0.5]).score == pytest.approx(0.4)
    assert combined_from_values([1.0, 1.0], [0.0, 0.3]).score == 0.0
    perfect = corpus(("a b", "x y"), ("c", "z"), refs=[("a b", "x y"), ("c", "z")])
    assert combined_dialog(perfect).score == 1.0
    with pytest.raises(MetricError, match="reference"):
        combined_dialog(corpus(("a", "b")))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=10))
def test_combined_per_utterance_bound(values):
    r = combined_from_values([w for w, _ in values], [c for _, c in values])
    for (w, c), p in zip(values, r.per_utterance):
        assert 0.0 <= p <= min(1 - w, 1 - c) + 1e-15
    assert 0.0 <= r.score <= 1.0
