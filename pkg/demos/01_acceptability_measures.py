"""The five acceptability measures, and why raw log-probability isn't one.

A language model assigns every sentence a log-probability.  Raw LP is a
poor acceptability score because longer sentences always lose; the other
four measures are different ways of removing the length (and word
frequency) confound:

    LP      = log P(s)
    MeanLP  = LP / |s|
    PenLP   = LP / ((5 + |s|) / 6)**alpha      (alpha = 0.8)
    NormLP  = -LP / log Pu(s)
    SLOR    = (LP - log Pu(s)) / |s|

where Pu is a unigram model of the same training corpus.  Run from the
repo root after `pip install -e .`:

    python3 demos/01_acceptability_measures.py
"""
import math

from acceptability import (
    load_corpus,
    measures_from_record,
    score_uni,
    toy_corpus_path,
    train_ngram,
    train_unigram,
)
from acceptability.measures import MEASURE_NAMES

corpus = load_corpus(toy_corpus_path())
sentences = [s for doc in corpus for s in doc]
model = train_ngram(sentences, order=3)
unigram = train_unigram(sentences)

# a short fluent sentence, a long fluent one, and a word-salad version
# of the long one (same bag of words, shuffled)
short = ("the", "cat", "slept", "near", "the", "barn")
long_good = ("the", "old", "farmer", "wandered", "behind", "the", "meadow",
             "meanwhile", "the", "bird", "sang")
long_bad = ("behind", "sang", "the", "the", "farmer", "bird", "meanwhile",
            "meadow", "old", "wandered", "the")


def measure(sent):
    record = score_uni(model, sent)
    return measures_from_record(record, unigram.sentence_logprob(sent))


print(f"{'sentence':<12}" + "".join(f"{m:>9}" for m in MEASURE_NAMES))
rows = {}
for name, sent in (("short", short), ("long-good", long_good),
                   ("long-bad", long_bad)):
    rows[name] = measure(sent)
    print(f"{name:<12}" + "".join(f"{getattr(rows[name], m):>9.3f}"
                                  for m in MEASURE_NAMES))

print()
# Raw LP ranks the short sentence above the long fluent one -- pure
# length bias, nothing to do with acceptability:
print("LP prefers the short sentence:",
      rows["short"].lp > rows["long-good"].lp)

# Every normalized measure still puts the fluent long sentence above its
# shuffled twin (same words, same length, same unigram mass):
for m in MEASURE_NAMES:
    good, bad = getattr(rows["long-good"], m), getattr(rows["long-bad"], m)
    print(f"{m:>8}: long-good {'beats' if good > bad else 'LOSES TO'} "
          f"long-bad   ({good:7.3f} vs {bad:7.3f})")

# SLOR also corrects for word frequency.  Two equally well-formed
# sentences, one built from the corpus's most frequent words and one
# from its rarest: MeanLP punishes the rare vocabulary, SLOR does not,
# because the unigram term subtracts exactly that cost.
freq_sent = ("the", "child", "watched", "the", "rabbit")
rare_sent = ("yesterday", "the", "tired", "gardener", "smiled")
f, r = measure(freq_sent), measure(rare_sent)
print()
print(f"{'':<14}{'frequent-words':>16}{'rare-words':>14}{'gap':>9}")
print(f"{'MeanLP':<14}{f.mean_lp:>16.3f}{r.mean_lp:>14.3f}"
      f"{f.mean_lp - r.mean_lp:>9.3f}")
print(f"{'SLOR':<14}{f.slor:>16.3f}{r.slor:>14.3f}{f.slor - r.slor:>9.3f}")
print(f"{'unigram/word':<14}"
      f"{unigram.sentence_logprob(freq_sent) / len(freq_sent):>16.3f}"
      f"{unigram.sentence_logprob(rare_sent) / len(rare_sent):>14.3f}")
assert math.isclose(f.slor, f.mean_lp
                    - unigram.sentence_logprob(freq_sent) / len(freq_sent))
print("\nSLOR == MeanLP - (unigram lp per word), so the frequency cost "
      "cancels out.")
