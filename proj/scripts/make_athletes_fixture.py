#!/usr/bin/env python3
"""Builds data/athletes_sample.csv, the athlete-level demo dataset.

80 rows of (athlete_id, country, sport, year, age, height, weight, medal)
with a seeded generator. Height drives the medal label (taller rows medal
more often) so the classifier has signal, and ~15% of height/weight cells
are blanked out so imputation has work to do.
"""

import pathlib
import random

COUNTRIES = ["USA", "GER", "KEN", "AUS"]
SPORTS = ["Athletics", "Swimming", "Rowing"]
YEARS = [2000, 2004, 2008, 2012]


def main() -> None:
    rng = random.Random(20130525)
    rows = []
    for i in range(1, 81):
        country = COUNTRIES[rng.randrange(len(COUNTRIES))]
        sport = SPORTS[rng.randrange(len(SPORTS))]
        year = YEARS[rng.randrange(len(YEARS))]
        age = rng.randrange(18, 36)
        height = round(rng.gauss(178, 9), 1)
        weight = round(height - 105 + rng.gauss(0, 6), 1)
        talent = (height - 178) / 9 + rng.gauss(0, 0.8)
        if talent > 1.6:
            medal = "Gold"
        elif talent > 1.2:
            medal = "Silver"
        elif talent > 0.9:
            medal = "Bronze"
        else:
            medal = "No medal"
        h = "" if rng.random() < 0.15 else height
        w = "" if rng.random() < 0.15 else weight
        rows.append(f"a{i:03d},{country},{sport},{year},{age},{h},{w},{medal}")
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "athletes_sample.csv"
    out.write_text(
        "athlete_id,country,sport,year,age,height,weight,medal\n" + "\n".join(rows) + "\n",
        encoding="utf-8",
    )
    missing = sum(r.split(",")[5] == "" for r in rows) + sum(r.split(",")[6] == "" for r in rows)
    medals = sum(not r.endswith("No medal") for r in rows)
    print(f"wrote {out}: 80 rows, {missing} missing cells, {medals} medal rows")


if __name__ == "__main__":
    main()
