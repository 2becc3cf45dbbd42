import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import model1_em
from stcons import lexicon
from stcons.errors import LexiconError
from stcons.lexicon import Bitext, from_probs, logprob, source_sums, train

HAND = [(("a", "b"), ("x", "y")), (("a",), ("x",))]


def test_single_pair_is_certain():
    lex = train(Bitext.from_pairs([(["a"], ["x"])]), iterations=1, null_word=False)
    assert lex.table == {("a", "x"): 0.0}
    assert logprob(lex, "a", "x") == 0.0


def test_hand_example_one_iteration():
    lex = train(Bitext.from_pairs(HAND), iterations=1, null_word=False)
    p = {k: math.exp(v) for k, v in lex.table.items()}
    assert p[("a", "x")] == pytest.approx(0.75, abs=1e-12)
    assert p[("a", "y")] == pytest.approx(0.25, abs=1e-12)
    assert p[("b", "x")] == pytest.approx(0.5, abs=1e-12)
    assert p[("b", "y")] == pytest.approx(0.5, abs=1e-12)


def test_hand_example_converges():
    # p(y|b) approaches 1 only harmonically (about 1 - 1/(2k) after k iterations)
    oracle = model1_em(HAND, 1000)
    assert oracle[("a", "x")] > 1 - 1e-3 and oracle[("b", "y")] > 1 - 1e-3
    lex = train(Bitext.from_pairs(HAND), iterations=20, null_word=False)
    assert math.exp(lex.logprob("a", "x")) == pytest.approx(1.0, abs=1e-3)
    lex = train(Bitext.from_pairs(HAND), iterations=1000, null_word=False)
    assert math.exp(lex.logprob("a", "x")) == pytest.approx(1.0, abs=1e-3)
    assert math.exp(lex.logprob("b", "y")) == pytest.approx(1.0, abs=1e-3)
    assert math.exp(lex.logprob("b", "y")) == pytest.approx(oracle[("b", "y")], rel=1e-9)


def random_bitext(seed, n=40, vocab=8):
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(n):
        ls, lt = rng.integers(1, 6, size=2)
        pairs.append(([f"s{k}" for k in rng.integers(0, vocab, ls)], [f"t{k}" for k in rng.integers(0, vocab, lt)]))
    return pairs


@pytest.mark.parametrize("null", [False, True])
def test_matches_dense_em_oracle(null):
    pairs = random_bitext(3)
    lex = train(Bitext.from_pairs(pairs), iterations=4, null_word=null)
    oracle = model1_em(pairs, 4, null=null)
    for (e, f), lp in lex.table.items():
        assert math.exp(lp) == pytest.approx(max(oracle[(e, f)], 1e-12), rel=1e-9, abs=1e-15)


@pytest.mark.parametrize("null,diag", [(False, False), (True, False), (True, True), (False, True)])
def test_normalization_and_likelihood(null, diag):
    lex = train(Bitext.from_pairs(random_bitext(7)), iterations=8, null_word=null, diagonal_prior=diag)
    for total in source_sums(lex).values():
        assert abs(total - 1) < 1e-6
    ll = lex.meta["log_likelihood"]
    assert len(ll) == 9
    assert all(b >= a - 1e-9 for a, b in zip(ll, ll[1:]))
    assert all(v <= 0 for v in lex.table.values())
    assert lex.floor_logprob == min(lex.table.values())


def test_deterministic():
    bt = Bitext.from_pairs(random_bitext(11))
    a = train(bt, iterations=5, diagonal_prior=True)
    b = train(bt, iterations=5, diagonal_prior=True)
    assert list(a.table.items()) == list(b.table.items())


def test_diagonal_prior_prefers_monotone_alignment():
    pairs = [(("a", "b"), ("x", "y"))] * 3
    plain = train(Bitext.from_pairs(pairs), iterations=5, null_word=False)
    diag = train(Bitext.from_pairs(pairs), iterations=5, null_word=False, diagonal_prior=True)
    assert plain.logprob("a", "x") == pytest.approx(math.log(0.5))
    assert diag.logprob("a", "x") > math.log(0.6)


def test_bitext_skips_empty_sides():
    bt = Bitext.from_pairs([(["a"], []), ([], ["x"]), (["a"], ["x"])])
    assert len(bt) == 1 and bt.skipped_pairs == 2


def test_train_errors():
    with pytest.raises(LexiconError):
        train(Bitext.from_pairs([]))
    with pytest.raises(LexiconError):
        train(Bitext.from_pairs(HAND), iterations=0)


def test_floor_lookup():
    lex = from_probs({("a", "x"): 0.99, ("a", "y"): 0.01, ("b", "x"): 1.0})
    # floor found by scanning the table directly
    assert lex.floor_logprob == min(math.log(p) for p in (0.99, 0.01, 1.0))
    assert logprob(lex, "b", "y") == math.log(0.01)
    assert logprob(lex, "zzz", "x") == lex.floor_logprob
    assert logprob(lex, "a", "qqq") == lex.floor_logprob


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.sampled_from("abcd"), st.sampled_from("wxyz")), min_size=1, max_size=12))
def test_lookup_never_below_floor(pairs):
    lex = train(Bitext.from_pairs([([s], [t]) for s, t in pairs] + [(["a", "b"], ["w", "x"])]), iterations=3)
    for s in "abcde":
        for t in "wxyzq":
            v = lex.logprob(s, t)
            assert v >= lex.floor_logprob
            if (s, t) not in lex.table:
                assert v == lex.floor_logprob


def test_save_load_round_trip(tmp_path):
    lex = train(Bitext.from_pairs(random_bitext(5)), iterations=3, direction=("en", "de"))
    lexicon.save(lex, tmp_path / "l.tsv")
    back = lexicon.load(tmp_path / "l.tsv")
    assert back.table == lex.table
    assert back.floor_logprob == lex.floor_logprob
    assert back.direction == ("en", "de")
    rows = [l for l in (tmp_path / "l.tsv").read_text().splitlines() if not l.startswith("#")]
    assert len(rows) == len(lex.table)
    assert rows == sorted(rows, key=lambda r: tuple(r.split("\t")[:2]))


def test_single_entry_round_trip(tmp_path):
    lex = train(Bitext.from_pairs([(["a"], ["x"])]), iterations=1, null_word=False)
    lexicon.save(lex, tmp_path / "l.tsv")
    assert lexicon.load(tmp_path / "l.tsv").table == {("a", "x"): 0.0}


def test_load_rejects_bad_sum(tmp_path):
    p = tmp_path / "l.tsv"
    p.write_text(f"#direction=s-t\n#floor={math.log(0.2)!r}\na\tx\t{math.log(1.0)!r}\na\ty\t{math.log(0.2)!r}\n")
    with pytest.raises(LexiconError, match="sum"):
        lexicon.load(p)


def test_load_rejects_floor_mismatch_and_bad_rows(tmp_path):
    p = tmp_path / "l.tsv"
    p.write_text("#direction=s-t\n#floor=-1.0\na\tx\t0.0\n")
    with pytest.raises(LexiconError, match="floor"):
        lexicon.load(p)
    p.write_text("#direction=s-t\na\tx\n")
    with pytest.raises(LexiconError, match=":2:"):
        lexicon.load(p)
