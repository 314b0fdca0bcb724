#!/usr/bin/env python3
"""Regenerates the synthetic scenario weeks shipped in this directory.

The output is deterministic; rerunning overwrites the .toml files with
identical content.  Run from the repository root:

    python3 scenarios/generate_weeks.py
"""

import random
from pathlib import Path

HORIZON = 7200  # five working days, in minutes
STATIONS = 4
UTILISATION = 0.95  # share of the horizon each station's schedule fills

# Sequence-dependent changeover minutes, shared by every week (same shop floor).
_rng = random.Random(7)
SETUP = [[0 if i == j else _rng.randrange(10, 41, 5) for j in range(8)] for i in range(8)]

WEEKS = [
    # id, seed, capacity, demand weights (product -> share), initial buffer, PAS minutes per unit
    ("w01", 101, 1000, {5: 0.50, 8: 0.25, 1: 0.15, 7: 0.10},
     [40, 90, 80, 70, 120, 90, 30, 50], [1] * 8),
    ("w02", 102, 1200, {2: 0.30, 3: 0.15, 5: 0.20, 6: 0.20, 8: 0.15},
     [50, 40, 30, 60, 60, 40, 80, 30], [1] * 8),
    ("w03", 103, 800, {1: 0.35, 2: 0.25, 4: 0.25, 7: 0.15},
     [30, 40, 60, 40, 70, 60, 30, 60], [1, 1, 1, 1, 1, 1, 1, 1]),
    ("w04", 104, 1000, {3: 0.30, 4: 0.20, 5: 0.35, 8: 0.15},
     [60, 50, 40, 30, 80, 70, 60, 40], [1] * 8),
    ("w05", 105, 900, {1: 0.20, 3: 0.20, 6: 0.25, 7: 0.15, 8: 0.20},
     [40, 70, 40, 60, 50, 30, 40, 40], [1] * 8),
    ("w06", 106, 1100, {2: 0.25, 4: 0.25, 5: 0.30, 6: 0.20},
     [70, 40, 60, 40, 60, 50, 70, 60], [1] * 8),
    ("week42", 142, 950, {5: 0.45, 8: 0.30, 1: 0.15, 7: 0.10},
     [50, 80, 70, 80, 100, 80, 40, 40], [1] * 8),
]


def schedule(rng, weights):
    products = sorted(weights)
    shares = [weights[p] for p in products]
    budget = HORIZON * UTILISATION
    items = []
    used = 0
    while True:
        p = rng.choices(products, shares)[0]
        qty = rng.randrange(20, 61, 5)
        minutes = rng.randrange(4, 8)
        if used + qty * minutes > budget:
            break
        items.append((p, qty, minutes))
        used += qty * minutes
    return items


def render(week):
    wid, seed, capacity, weights, initial, pas = week
    rng = random.Random(seed)
    lines = [
        f'id = "{wid}"',
        f"planning_horizon_minutes = {HORIZON}",
        f"buffer_capacity = {capacity}",
        f"initial_buffer = {initial}",
        f"pas_minutes_per_unit = {pas}",
        "setup_matrix = [",
    ]
    lines += [f"    {row}," for row in SETUP]
    lines.append("]")
    for _ in range(STATIONS):
        lines.append("")
        lines.append("[[stations]]")
        lines.append("# [product, quantity, minutes per unit]")
        lines.append("schedule = [")
        for p, q, m in schedule(rng, weights):
            lines.append(f"    [{p}, {q}, {m}],")
        lines.append("]")
    return "\n".join(lines) + "\n"


def main():
    here = Path(__file__).resolve().parent
    for week in WEEKS:
        (here / f"{week[0]}.toml").write_text(render(week))


if __name__ == "__main__":
    main()
