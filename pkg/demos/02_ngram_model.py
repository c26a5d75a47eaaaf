"""The native interpolated Kneser-Ney n-gram model.

Shows training, conditional probabilities and backoff, the normalization
property, chain-rule scoring with a prepended context, bidirectional
pseudo-likelihood scoring, and model save/load round-trips.

    python3 demos/02_ngram_model.py
"""
import math
import tempfile
from pathlib import Path

from acceptability import (
    EOS,
    UNK,
    load_corpus,
    load_model,
    perplexity,
    save_model,
    score_bi,
    score_uni,
    toy_corpus_path,
    train_ngram,
)

corpus = load_corpus(toy_corpus_path())
sentences = [s for doc in corpus for s in doc]
train, heldout = sentences[:1500], sentences[1500:]

model = train_ngram(train, order=3, discount=0.75, min_count=2)
print(f"order-3 model: vocab {len(model.vocab)} words, "
      f"{len(heldout)}-sentence heldout perplexity "
      f"{perplexity(model, heldout):.2f}")
print(f"order-2 heldout perplexity "
      f"{perplexity(train_ngram(train, order=2), heldout):.2f}")
print(f"order-5 heldout perplexity "
      f"{perplexity(train_ngram(train, order=5), heldout):.2f}")

# conditionals: observed history, partially observed, and unseen.
# Unseen histories back off toward the continuation unigram, and
# out-of-vocabulary words map to the unknown token.
print()
for w, h in [("cat", ("the",)), ("cat", ("the", "hungry")),
             ("cat", (UNK, UNK)), ("cat", ()), ("zebra", ("the",))]:
    print(f"P({w!r:8} | {' '.join(h) or '<empty>':12}) = "
          f"{model.cond_prob(w, h):.6f}")

# every conditional distribution sums to 1 over the prediction
# vocabulary (vocab + unknown + end marker), whatever the history:
pv = model.prediction_vocab()
for h in [("the",), ("hungry", "fox"), (UNK, "garden"), (EOS, EOS)]:
    total = math.fsum(model.cond_prob(w, h) for w in pv)
    print(f"sum over {len(pv)} continuations after {h}: {total:.12f}")

# chain-rule scoring: a prepended context conditions the first target
# tokens but contributes nothing to the total itself
print()
target = ("the", "cat", "slept", "near", "the", "barn")
context = ("the", "hungry", "cat", "waited", "in", "the", "garden")
bare = score_uni(model, target)
cond = score_uni(model, target, context)
print("target:", " ".join(target))
print(f"  lp without context: {bare.total_lp:8.3f}")
print(f"  lp given context:   {cond.total_lp:8.3f}"
      "   (only the first tokens' conditionals change)")
for b, c in zip(bare.tokens, cond.tokens):
    marker = "  <- context reaches here" if b.lp != c.lp else ""
    print(f"    {b.t:<8} {b.lp:8.3f} {c.lp:8.3f}{marker}")

# bidirectional pseudo-likelihood: each token is scored by the mean of
# a forward and a backward conditional (the total is a confidence
# score, not a log-probability -- it does not normalize).  Corrupt one
# word and look at where the damage lands: the forward scorer cannot
# see the corruption from the left, so tokens before it are untouched,
# while the bidirectional scorer also dings the left neighbor, whose
# right context is now broken.
print()
good = ("a", "gentle", "teacher", "helped", "the", "child")
bad = ("a", "gentle", "meadow", "helped", "the", "child")
print("lp(corrupted) - lp(original), per position "
      "(corruption at index 2):")
for scorer, tag in ((score_uni, "uni"), (score_bi, "bi ")):
    g, b = scorer(model, good), scorer(model, bad)
    deltas = [bb.lp - gg.lp for gg, bb in zip(g.tokens, b.tokens)]
    print(f"  {tag} " + " ".join(f"{d:7.3f}" for d in deltas))

# save / load round-trip: the serialized file stores raw counts, so a
# reloaded model reproduces scores bit for bit
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "model.json"
    save_model(model, path)
    reloaded = load_model(path)
    assert score_uni(reloaded, target).total_lp == bare.total_lp
    print(f"\nround-trip through {path.name}: scores identical "
          f"({path.stat().st_size / 1024:.0f} KiB)")
