#!/usr/bin/env python3
# Copyright 2026 The DualTOD Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Builds data/fluency.json: add-one smoothed bigram log-probabilities.

Counts come from the user turns and delexicalized responses of a synthetic
corpus (`dualtod gen`). Every single thesaurus substitution of a sentence is
also counted at a reduced weight so rewrites are not scored as unseen text.
"""
import argparse
import collections
import json
import math


def substitutions(tokens, thesaurus):
    for i in range(len(tokens)):
        for key, alts in thesaurus.items():
            n = len(key)
            if tuple(tokens[i:i + n]) == key:
                for alt in alts:
                    yield tokens[:i] + alt + tokens[i + n:]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--corpus", required=True)
    ap.add_argument("--thesaurus", required=True)
    ap.add_argument("--out", required=True)
    ap.add_argument("--sub-weight", type=float, default=0.25)
    args = ap.parse_args()

    with open(args.thesaurus) as f:
        thesaurus = {tuple(k.split()): [a.split() for a in v] for k, v in json.load(f).items()}

    sentences = set()
    with open(args.corpus) as f:
        for line in f:
            if line.strip():
                for turn in json.loads(line)["turns"]:
                    sentences.add(tuple(turn["user"].split()))
                    sentences.add(tuple(turn["response_delex"].split()))

    counts = collections.Counter()
    def add(tokens, w):
        seq = ["<s>"] + list(tokens) + ["</s>"]
        for a, b in zip(seq, seq[1:]):
            counts[(a, b)] += w

    for s in sorted(sentences):
        add(s, 1.0)
        for alt in substitutions(list(s), thesaurus):
            add(alt, args.sub_weight)

    history = collections.Counter()
    vocab = set()
    for (a, b), c in counts.items():
        history[a] += c
        vocab.update((a, b))
    v = len(vocab)
    out = {
        "default": round(math.log(1.0 / v), 6),
        "backoff": {a: round(math.log(1.0 / (history[a] + v)), 6) for a in sorted(history)},
        "bigrams": {f"{a} {b}": round(math.log((c + 1.0) / (history[a] + v)), 6)
                    for (a, b), c in sorted(counts.items())},
    }
    with open(args.out, "w") as f:
        json.dump(out, f, indent=0, sort_keys=True)
        f.write("\n")


if __name__ == "__main__":
    main()
