"""Tests for the native probability providers (unigram + Kneser-Ney n-gram).

The Kneser-Ney conditionals are checked against a hand-computed fixture
table for a five-sentence corpus.  The fixture values were derived with
an independent exact-arithmetic oracle (a direct fractions.Fraction
transcription of the interpolated KN formulas that counts every order
straight from the padded sentences); the oracle lives in this file and
the frozen fractions are asserted against BOTH the oracle and the
implementation, so neither can drift.
"""
from __future__ import annotations

import math
import random
from fractions import Fraction

import pytest

from acceptability import (
    BOS,
    EOS,
    UNK,
    ExperimentType,
    NgramModel,
    NumericalError,
    RecordProvider,
    TestSentence,
    UnigramModel,
    UsageError,
    ValidationError,
    dumps_model,
    load_model,
    perplexity,
    save_model,
    score_bi,
    score_uni,
    train_ngram,
    train_unigram,
)

# ---------------------------------------------------------------------------
# independent exact-arithmetic oracle
# ---------------------------------------------------------------------------


def _oracle_raw_counts(corpus, order, k):
    """k-gram counts at positions whose final token is a real token or EOS."""
    counts = {}
    for sent in corpus:
        seq = (BOS,) * (order - 1) + tuple(sent) + (EOS,)
        for p in range(order - 1, len(seq)):
            g = seq[p - k + 1:p + 1]
            counts[g] = counts.get(g, 0) + 1
    return counts


def _oracle_cont_counts(corpus, order, k):
    """N1+(. h w) for level k, from the distinct (k+1)-gram types."""
    cont = {}
    for g in _oracle_raw_counts(corpus, order, k + 1):
        key = (g[1:-1], g[-1])
        cont[key] = cont.get(key, 0) + 1
    return cont


def _oracle_p(w, h, level, corpus, order, d, pred_vocab):
    if level == 0:
        return Fraction(1, len(pred_vocab)) if w in pred_vocab else Fraction(0)
    if level == order:
        counts = _oracle_raw_counts(corpus, order, order)
        followers = {g[-1]: c for g, c in counts.items() if g[:-1] == h}
    else:
        cont = _oracle_cont_counts(corpus, order, level)
        followers = {hw[1]: c for hw, c in cont.items() if hw[0] == h}
    total = sum(followers.values())
    if total == 0:
        return _oracle_p(w, h[1:], level - 1, corpus, order, d, pred_vocab)
    lam = d * len(followers) / total
    c = followers.get(w, 0)
    lower = _oracle_p(w, h[1:], level - 1, corpus, order, d, pred_vocab)
    return Fraction(max(c - d, 0)) / total + lam * lower


def oracle_cond(w, h, corpus, order, d, pred_vocab):
    h = tuple(h)[-(order - 1):] if order > 1 else ()
    return _oracle_p(w, h, len(h) + 1, corpus, order, d, pred_vocab)


FIXTURE_CORPUS = [
    ("the", "cat", "sat"),
    ("the", "cat", "ran"),
    ("the", "dog", "sat"),
    ("a", "dog", "ran"),
    ("the", "bird", "sang"),
]
FIXTURE_PRED = set(w for s in FIXTURE_CORPUS for w in s) | {UNK, EOS}
D = Fraction(3, 4)

# hand-computed conditionals, order 2, discount 3/4, min_count 1
FIXTURE_ORDER2 = {
    ("the", (BOS,)): Fraction(3751, 5600),
    ("a", (BOS,)): Fraction(391, 5600),
    ("cat", (BOS,)): Fraction(111, 5600),
    ("dog", (BOS,)): Fraction(33, 800),
    (UNK, (BOS,)): Fraction(81, 5600),
    (EOS, (BOS,)): Fraction(351, 5600),
    ("cat", ("the",)): Fraction(3133, 8960),
    ("dog", ("the",)): Fraction(179, 1280),
    ("bird", ("the",)): Fraction(893, 8960),
    ("the", ("the",)): Fraction(333, 8960),
    (EOS, ("the",)): Fraction(1053, 8960),
    (UNK, ("the",)): Fraction(243, 8960),
    ("sat", ("cat",)): Fraction(73, 320),
    ("ran", ("cat",)): Fraction(73, 320),
    (EOS, ("cat",)): Fraction(351, 2240),
    (EOS, ("sat",)): Fraction(3151, 4480),
    (EOS, ("sang",)): Fraction(911, 2240),
    ("dog", ("a",)): Fraction(113, 320),
    # unseen histories back off to the continuation-unigram level
    ("sat", (UNK,)): Fraction(11, 80),
    ("the", (EOS,)): Fraction(37, 560),
    # the continuation-unigram level itself (empty history)
    ("the", ()): Fraction(37, 560),
    ("dog", ()): Fraction(11, 80),
    (EOS, ()): Fraction(117, 560),
    (UNK, ()): Fraction(27, 560),
}

FIXTURE_ORDER3 = {
    ("sat", ("the", "cat")): Fraction(379, 1280),
    ("ran", ("the", "cat")): Fraction(379, 1280),
    (EOS, ("cat", "sat")): Fraction(13933, 17920),
    ("dog", (BOS, "the")): Fraction(857, 5120),
    ("sat", (UNK, "cat")): Fraction(73, 320),
    ("cat", (BOS, BOS)): Fraction(333, 22400),
}


def fixture_model(order=2, min_count=1):
    return train_ngram(FIXTURE_CORPUS, order=order, discount=0.75,
                       min_count=min_count)


class TestKneserNeyFixture:
    @pytest.mark.parametrize("table,order", [(FIXTURE_ORDER2, 2),
                                             (FIXTURE_ORDER3, 3)])
    def test_frozen_values_match_oracle(self, table, order):
        for (w, h), expected in table.items():
            got = oracle_cond(w, h, FIXTURE_CORPUS, order, D, FIXTURE_PRED)
            assert got == expected, (w, h)

    @pytest.mark.parametrize("table,order", [(FIXTURE_ORDER2, 2),
                                             (FIXTURE_ORDER3, 3)])
    def test_implementation_matches_frozen_values(self, table, order):
        model = fixture_model(order=order)
        for (w, h), expected in table.items():
            got = model.cond_prob(w, h)
            assert got == pytest.approx(float(expected), rel=1e-9, abs=1e-12), (w, h)

    def test_oov_word_scores_as_unknown(self):
        model = fixture_model()
        assert model.cond_prob("zebra", ("the",)) == model.cond_prob(UNK, ("the",))
        assert model.cond_prob("sat", ("zebra",)) == model.cond_prob("sat", (UNK,))

    def test_unseen_history_backs_off_fully(self):
        model = fixture_model()
        for w in model.prediction_vocab():
            assert model.cond_prob(w, (EOS,)) == model.cond_prob(w, ())

    def test_conditionals_in_unit_interval(self):
        model = fixture_model(order=3)
        rng = random.Random(7)
        syms = sorted(model.vocab) + [UNK, BOS, EOS]
        for _ in range(300):
            h = tuple(rng.choice(syms) for _ in range(2))
            for w in model.prediction_vocab():
                p = model.cond_prob(w, h)
                assert 0.0 < p <= 1.0


class TestNormalization:
    @pytest.mark.parametrize("order", [2, 3])
    def test_sums_to_one_over_every_history(self, order):
        model = fixture_model(order=order)
        syms = sorted(model.vocab) + [UNK, BOS, EOS]
        pred = model.prediction_vocab()

        def histories(depth, prefix=()):
            if depth == 0:
                yield prefix
                return
            for s in syms:
                yield from histories(depth - 1, prefix + (s,))

        for h in histories(order - 1):
            total = math.fsum(model.cond_prob(w, h) for w in pred)
            assert total == pytest.approx(1.0, abs=1e-9), h

    @pytest.mark.parametrize("order", [4, 5])
    def test_sums_to_one_sampled_histories(self, order):
        model = fixture_model(order=order)
        syms = sorted(model.vocab) + [UNK, BOS, EOS]
        pred = model.prediction_vocab()
        rng = random.Random(order)
        for _ in range(150):
            h = tuple(rng.choice(syms) for _ in range(order - 1))
            total = math.fsum(model.cond_prob(w, h) for w in pred)
            assert total == pytest.approx(1.0, abs=1e-9), h

    def test_total_sentence_mass_at_most_one(self):
        # exhaustive over all sentences of length <= 3 from a 2-word vocab
        corpus = [("a", "b"), ("b", "a"), ("a",)]
        for order in (2, 3):
            model = train_ngram(corpus, order=order, min_count=1)
            words = sorted(model.vocab) + [UNK]
            total = 0.0
            for length in (1, 2, 3):
                def sentences(depth, prefix=()):
                    if depth == 0:
                        yield prefix
                        return
                    for w in words:
                        yield from sentences(depth - 1, prefix + (w,))
                for sent in sentences(length):
                    total += math.exp(score_uni(model, sent).total_lp)
            assert total <= 1.0 + 1e-9


class TestScoreUni:
    def test_record_shape_and_total(self):
        model = fixture_model()
        rec = score_uni(model, ("the", "cat", "sat"), sentence_id="f1")
        assert rec.n_target_tokens == 3
        assert [t.t for t in rec.tokens] == ["the", "cat", "sat"]
        expected = (math.log(3751 / 5600) + math.log(3133 / 8960)
                    + math.log(73 / 320) + math.log(3151 / 4480))
        assert rec.total_lp == pytest.approx(expected, rel=1e-12)
        assert rec.provider == "ngram-kn"

    def test_end_term_folded_into_final_token(self):
        model = fixture_model()
        full = score_uni(model, ("the", "cat", "sat"))
        prefix = score_uni(model, ("the", "cat", "sat"), include_end=False)
        for a, b in zip(full.tokens[:-1], prefix.tokens[:-1]):
            assert a.lp == b.lp
        end_lp = math.log(3151 / 4480)
        assert full.tokens[-1].lp == pytest.approx(
            prefix.tokens[-1].lp + end_lp, rel=1e-12)

    def test_single_token_prefix_is_one_conditional(self):
        model = fixture_model()
        rec = score_uni(model, ("the",), include_end=False)
        assert rec.total_lp == pytest.approx(math.log(3751 / 5600), rel=1e-12)

    def test_chain_rule_identity(self):
        model3 = fixture_model(order=3)
        model5 = fixture_model(order=5)
        words = sorted(model3.vocab)
        rng = random.Random(11)
        for model in (model3, model5):
            for _ in range(30):
                ctx = tuple(rng.choice(words)
                            for _ in range(rng.randrange(1, 6)))
                tgt = tuple(rng.choice(words)
                            for _ in range(rng.randrange(1, 6)))
                lhs = score_uni(model, tgt, ctx).total_lp
                rhs = (score_uni(model, ctx + tgt).total_lp
                       - score_uni(model, ctx, include_end=False).total_lp)
                assert lhs == pytest.approx(rhs, abs=1e-9)

    def test_order2_context_touches_first_token_only(self):
        model = fixture_model(order=2)
        plain = score_uni(model, ("the", "cat", "sat"))
        with_ctx = score_uni(model, ("the", "cat", "sat"),
                             ("a", "dog", "ran"))
        assert with_ctx.tokens[0].lp != plain.tokens[0].lp
        for a, b in zip(with_ctx.tokens[1:], plain.tokens[1:]):
            assert a.lp == b.lp

    def test_empty_target_rejected(self):
        with pytest.raises(ValidationError):
            score_uni(fixture_model(), ())


class TestScoreBi:
    def test_palindromic_corpus_bi_equals_forward(self):
        # every training sentence is its own reverse, so the backward
        # table coincides with the forward one and for a palindromic
        # target the position-averaged score equals the prefix score
        corpus = [("a", "b", "a"), ("b", "a", "b"),
                  ("a", "a", "a"), ("b", "b", "b")]
        model = train_ngram(corpus, order=2, min_count=1)
        for w, h in [("a", ("b",)), ("b", (BOS,)), ("a", ())]:
            assert model.cond_prob(w, h, "fwd") == model.cond_prob(w, h, "bwd")
        target = ("a", "b", "a")
        bi = score_bi(model, target)
        fwd = score_uni(model, target, include_end=False)
        assert bi.total_lp == pytest.approx(fwd.total_lp, rel=1e-12)
        assert bi.direction == "bi"
        assert bi.n_target_tokens == 3

    def test_no_end_marker_term(self):
        model = fixture_model()
        rec = score_bi(model, ("the", "cat", "sat"))
        fwd = model.token_logprobs(("the", "cat", "sat"))
        bwd = model.token_logprobs(("sat", "cat", "the"), direction="bwd")[::-1]
        for tok, f, b in zip(rec.tokens, fwd, bwd):
            assert tok.lp == pytest.approx(0.5 * (f + b), rel=1e-12)

    def test_corrupted_position_drops_most(self):
        corpus = [("a", "b", "c", "d", "e")] * 20 + [("x", "x", "x")] * 2
        model = train_ngram(corpus, order=2, min_count=1)
        clean = score_bi(model, ("a", "b", "c", "d", "e"))
        dirty = score_bi(model, ("a", "b", "x", "d", "e"))
        drops = [c.lp - d.lp for c, d in zip(clean.tokens, dirty.tokens)]
        assert max(range(5), key=lambda i: drops[i]) == 2

    def test_context_moves_forward_component_only(self):
        model = fixture_model(order=3)
        target = ("the", "cat", "sat")
        ctx = ("a", "dog", "ran")
        bi_none = score_bi(model, target)
        bi_ctx = score_bi(model, target, ctx)
        uni_none = score_uni(model, target, include_end=False)
        uni_ctx = score_uni(model, target, ctx, include_end=False)
        for i in range(3):
            bi_diff = bi_ctx.tokens[i].lp - bi_none.tokens[i].lp
            fwd_diff = uni_ctx.tokens[i].lp - uni_none.tokens[i].lp
            assert bi_diff == pytest.approx(0.5 * fwd_diff, abs=1e-12)
        # beyond the model order the forward component is local too
        assert bi_ctx.tokens[2].lp == bi_none.tokens[2].lp


class TestUnigramModel:
    def test_worked_example_min_count_one(self):
        # corpus "a a b": vocab {a, b}, V = 3 with unknown, delta = 1
        model = train_unigram([("a", "a", "b")], delta=1.0, min_count=1)
        assert model.prob("a") == pytest.approx(0.5, rel=1e-12)
        assert model.prob("b") == pytest.approx(2 / 6, rel=1e-12)
        assert model.prob("zebra") == pytest.approx(1 / 6, rel=1e-12)

    def test_worked_example_min_count_two(self):
        # "b" falls below the count threshold and becomes unknown mass
        model = train_unigram([("a", "a", "b")], delta=1.0, min_count=2)
        assert model.vocab == frozenset({"a"})
        assert model.prob("a") == pytest.approx(3 / 5, rel=1e-12)
        assert model.prob("b") == pytest.approx(2 / 5, rel=1e-12)

    def test_distribution_sums_to_one(self):
        model = train_unigram(FIXTURE_CORPUS, min_count=1)
        total = math.fsum(model.prob(w) for w in model.prediction_vocab())
        assert total == pytest.approx(1.0, abs=1e-9)
        for w in model.prediction_vocab():
            assert model.prob(w) > 0.0

    def test_sentence_logprob_is_token_sum(self):
        model = train_unigram(FIXTURE_CORPUS, min_count=1)
        tokens = ("the", "zebra", "sat")
        expected = sum(model.logprob(t) for t in tokens)
        assert model.sentence_logprob(tokens) == pytest.approx(expected, rel=1e-12)

    def test_parameter_validation(self):
        with pytest.raises(UsageError):
            train_unigram([("a",)], delta=0.0)
        with pytest.raises(UsageError):
            train_unigram([("a",)], min_count=0)
        with pytest.raises(ValidationError):
            train_unigram([])


class TestPerplexity:
    def test_uniform_model_gives_vocabulary_size(self):
        # a zero-count unigram is exactly the uniform distribution
        uniform = UnigramModel(counts={}, total=0, delta=1.0,
                               vocab=frozenset({"a", "b", "c"}))
        assert perplexity(uniform, [("a", "b"), ("c",)]) == pytest.approx(
            4.0, rel=1e-12)

    def test_single_token_heldout_inverts_probability(self):
        model = train_unigram(FIXTURE_CORPUS, min_count=1)
        assert perplexity(model, [("the",)]) == pytest.approx(
            1.0 / model.prob("the"), rel=1e-12)

    def test_ngram_counts_end_marker_events(self):
        model = fixture_model()
        rec = score_uni(model, ("the", "cat"))
        assert perplexity(model, [("the", "cat")]) == pytest.approx(
            math.exp(-rec.total_lp / 3), rel=1e-12)

    def test_empty_heldout_rejected(self):
        with pytest.raises(ValidationError):
            perplexity(fixture_model(), [])


class TestTraining:
    def test_parameter_validation(self):
        with pytest.raises(UsageError):
            train_ngram(FIXTURE_CORPUS, order=1)
        with pytest.raises(UsageError):
            train_ngram(FIXTURE_CORPUS, order=6)
        with pytest.raises(UsageError):
            train_ngram(FIXTURE_CORPUS, order=2, discount=1.0)
        with pytest.raises(UsageError):
            train_ngram(FIXTURE_CORPUS, order=2, min_count=0)
        with pytest.raises(ValidationError):
            train_ngram([], order=2)

    def test_min_count_two_maps_rare_words_to_unknown(self):
        model = train_ngram(FIXTURE_CORPUS, order=2, min_count=2)
        assert "a" not in model.vocab          # appears once
        assert "the" in model.vocab
        assert model.cond_prob("sat", ("a",)) == model.cond_prob("sat", (UNK,))

    def test_training_is_deterministic(self):
        a = train_ngram(list(FIXTURE_CORPUS), order=3, min_count=1)
        b = train_ngram(list(reversed(FIXTURE_CORPUS))[::-1], order=3,
                        min_count=1)
        assert dumps_model(a) == dumps_model(b)


class TestModelFiles:
    def test_ngram_roundtrip_preserves_probabilities(self, tmp_path):
        model = fixture_model(order=3)
        path = tmp_path / "model.json"
        save_model(model, path)
        loaded = load_model(path)
        assert isinstance(loaded, NgramModel)
        rng = random.Random(3)
        syms = sorted(model.vocab) + [UNK, BOS, EOS]
        for _ in range(50):
            w = rng.choice(model.prediction_vocab())
            h = tuple(rng.choice(syms) for _ in range(2))
            assert loaded.cond_prob(w, h) == model.cond_prob(w, h)
        assert dumps_model(loaded) == dumps_model(model)

    def test_unigram_roundtrip(self, tmp_path):
        model = train_unigram(FIXTURE_CORPUS, min_count=2)
        path = tmp_path / "unigram.json"
        save_model(model, path)
        loaded = load_model(path)
        assert isinstance(loaded, UnigramModel)
        for w in list(model.prediction_vocab()) + ["zebra"]:
            assert loaded.prob(w) == model.prob(w)
        assert dumps_model(loaded) == dumps_model(model)

    def test_unsupported_format_version_rejected(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text('{"format_version": 99, "type": "ngram-kn"}')
        with pytest.raises(ValidationError, match="format_version"):
            load_model(path)

    def test_unknown_model_type_rejected(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text('{"format_version": 1, "type": "rnn"}')
        with pytest.raises(ValidationError, match="rnn"):
            load_model(path)

    def test_invalid_json_names_path(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text("{not json")
        with pytest.raises(ValidationError) as err:
            load_model(path)
        assert str(path) in str(err.value)


def _sentence(sid, target, real=None, rand=None):
    real = real or ["a dog ran", "the dog sat", "the bird sang"]
    return TestSentence(
        id=sid, target=tuple(target.split()),
        real_context=tuple(tuple(s.split()) for s in real),
        random_context=tuple(tuple(s.split()) for s in rand) if rand else None,
        origin="original", degradation_level=0,
    )


class TestProviders:
    def test_ngram_provider_scores_variants(self):
        model = fixture_model()
        sent = _sentence("s1", "the cat sat",
                         real=["a dog ran", "the dog sat", "the bird sang"])
        rec_none = model.score(sent, ExperimentType.NONE)
        rec_real = model.score(sent, ExperimentType.REAL)
        assert rec_none.sentence_id == "s1"
        assert rec_none.context_variant is ExperimentType.NONE
        assert rec_real.total_lp != rec_none.total_lp
        bi = model.score(sent, ExperimentType.NONE, direction="bi")
        assert bi.direction == "bi"
        assert model.capabilities() == {"uni", "bi"}

    def test_missing_random_context_is_an_error(self):
        model = fixture_model()
        sent = _sentence("s1", "the cat sat")
        with pytest.raises(ValidationError, match="random_context"):
            model.score(sent, ExperimentType.RANDOM)

    def test_unigram_provider_ignores_context_but_checks_it(self):
        uni = train_unigram(FIXTURE_CORPUS, min_count=1)
        sent = _sentence("s1", "the cat sat",
                         real=["a dog ran", "the dog sat", "the bird sang"])
        rec_none = uni.score(sent, ExperimentType.NONE)
        rec_real = uni.score(sent, ExperimentType.REAL)
        assert rec_none.total_lp == rec_real.total_lp
        assert rec_none.provider == "unigram"
        with pytest.raises(ValidationError):
            uni.score(sent, ExperimentType.NONE, direction="bi")
        with pytest.raises(ValidationError):
            uni.score(sent, ExperimentType.RANDOM)

    def test_record_provider_replays_and_reports_gaps(self):
        model = fixture_model()
        sent = _sentence("s1", "the cat sat")
        rec = model.score(sent, ExperimentType.NONE)
        provider = RecordProvider([rec])
        assert provider.score(sent, ExperimentType.NONE) is rec
        assert provider.capabilities() == {"uni"}
        assert provider.provider_tag == "ngram-kn"
        with pytest.raises(ValidationError, match="real"):
            provider.score(sent, ExperimentType.REAL)
        with pytest.raises(ValidationError, match="duplicate"):
            RecordProvider([rec, rec])
