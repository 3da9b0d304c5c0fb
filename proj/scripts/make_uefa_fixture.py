#!/usr/bin/env python3
"""Builds data/uefa2013_tweets.tsv, the team-coefficient fixture corpus.

Every tweet's text is a run of +1 lexicon tokens, so its score equals its
token count. Per team the corpus mixes exactly two adjacent integer scores,
chosen so the team's (score sum, tweet count) hits the published ATSS ratio
exactly:

    sum = n_hi * hi + (count - n_hi) * (hi - 1)

The per-team numbers below therefore reproduce the expected coefficients
with integer arithmetic alone.
"""

import pathlib

# team, country, tweet_count, n_hi, hi_score  (remaining tweets score hi-1)
TEAMS = [
    ("Bayern Munich", "Germany", 200, 117, 37),      # 7317 / 200 = 36.585
    ("Borussia Dortmund", "Germany", 200, 117, 34),  # 6717 / 200 = 33.585
    ("Real Madrid", "Spain", 500, 271, 30),          # 14771 / 500 = 29.542
    ("Barcelona", "Spain", 500, 271, 28),            # 13771 / 500 = 27.542
    ("Paris Saint Germain", "France", 500, 175, 28), # 13675 / 500 = 27.35
    ("Juventus", "Italy", 1000, 883, 26),            # 25883 / 1000 = 25.883
    ("Malaga", "Spain", 1000, 542, 26),              # 25542 / 1000 = 25.542
    ("Galatasaray", "Turkey", 1000, 40, 25),         # 24040 / 1000 = 24.04
]

# All score +1 in data/lexicon_default.tsv.
POOL = ["goal", "win", "great", "champion", "victory",
        "amazing", "brilliant", "superb", "fantastic", "best"]


def text_for(score: int, offset: int) -> str:
    return " ".join(POOL[(offset + i) % len(POOL)] for i in range(score))


def main() -> None:
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "uefa2013_tweets.tsv"
    lines = []
    tweet_no = 0
    for team, country, count, n_hi, hi in TEAMS:
        total = 0
        for i in range(count):
            score = hi if i < n_hi else hi - 1
            total += score
            tweet_no += 1
            lines.append(f"u{tweet_no:05d}\t{team}\t{country}\t{text_for(score, i)}")
        expect_sum = n_hi * hi + (count - n_hi) * (hi - 1)
        assert total == expect_sum, (team, total, expect_sum)
        print(f"{team:22s} sum={total:6d} count={count:5d} atss={total / count}")
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {out} ({tweet_no} tweets)")


if __name__ == "__main__":
    main()
