#!/usr/bin/env python3
"""Writes a deterministic synthetic English-like corpus for char-LM runs."""
import argparse
import random

SUBJECTS = ["the cat", "a dog", "the old man", "my sister", "the river", "a small bird",
            "the committee", "our neighbour", "the machine", "every child", "the market",
            "a stranger", "the teacher", "the wind", "his brother"]
VERBS = ["saw", "followed", "ignored", "carried", "found", "watched", "built", "crossed",
         "remembered", "painted", "lost", "opened", "called", "fixed", "sold"]
OBJECTS = ["the house", "a letter", "the bridge", "an apple", "the old road", "a red box",
           "the garden", "the last train", "a quiet song", "the window", "the small boat",
           "a heavy stone", "the map", "the door", "a bright lamp"]
TAILS = ["", "", "", " in the morning", " after dark", " near the hill", " without a word",
         " again", " for a while", " before the rain", " at noon"]
JOINS = [" and then ", " but ", " because ", " while ", ", so "]


def clause(rng):
    return f"{rng.choice(SUBJECTS)} {rng.choice(VERBS)} {rng.choice(OBJECTS)}{rng.choice(TAILS)}"


def sentence(rng):
    s = clause(rng)
    if rng.random() < 0.4:
        s += rng.choice(JOINS) + clause(rng)
    s = s[0].upper() + s[1:]
    return s + rng.choice([".", ".", ".", "!", "?"])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data/corpus.txt")
    ap.add_argument("--bytes", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=1234)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    out, size, para = [], 0, []
    while size < args.bytes:
        para.append(sentence(rng))
        if len(para) >= rng.randint(3, 7):
            text = " ".join(para) + "\n"
            out.append(text)
            size += len(text)
            para = []
    with open(args.out, "w", encoding="ascii", newline="\n") as f:
        f.write("".join(out)[: args.bytes])


if __name__ == "__main__":
    main()
