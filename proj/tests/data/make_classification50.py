"""Regenerates classification50.csv (fixed seed, standard library only)."""
import math
import random

rng = random.Random(20240601)
rows = []
for i in range(50):
    x = [round(rng.uniform(-2, 2), 4) for _ in range(3)]
    logit = 2.0 * x[0] - 1.0 * x[1] + 0.5 * x[2] + 0.3
    label = 1 if rng.random() < 1.0 / (1.0 + math.exp(-logit)) else 0
    rows.append((i + 1, *x, label))

with open("classification50.csv", "w", newline="") as f:
    f.write("id,experience,test_score,referrals,hired\n")
    for r in rows:
        f.write(",".join(str(v) for v in r) + "\n")
