#!/usr/bin/env python3
"""Write the synthetic electricity-load fixtures used by the tests.

Both files follow the distribution layout: semicolon separated, comma decimal
mark, quoted header, interval-ending 15-minute timestamps.

  eld_small.txt   6 clients x 192 steps (2014-01-01 00:15 .. 2014-01-03 00:00)
  eld_days.txt   80 clients x 384 steps (2014-01-01 00:15 .. 2014-01-05 00:00)
"""

import argparse
import datetime as dt
import math
import random
from pathlib import Path

START = dt.datetime(2014, 1, 1, 0, 15)
STEP = dt.timedelta(minutes=15)


def fmt(v):
    return f"{v:.6g}".replace(".", ",")


def write(path, clients, rows):
    with open(path, "w", newline="\n") as f:
        f.write('""' + "".join(f';"{c}"' for c in clients) + "\n")
        for i, values in enumerate(rows):
            stamp = (START + i * STEP).strftime("%Y-%m-%d %H:%M:%S")
            f.write(f'"{stamp}"' + "".join(";" + fmt(v) for v in values) + "\n")


def small(path):
    # Exact values chosen so the tests can assert them: client c, slot s ->
    # c + (s % 96) / 8, with MT_003 slot 0 = 2.5 written as "2,5".
    clients = [f"MT_{c:03d}" for c in range(1, 7)]
    rows = []
    for s in range(192):
        rows.append([round(c + (s % 96) / 8 + (0.5 if (c, s) == (2, 0) else 0.0), 6) for c in range(6)])
    write(path, clients, rows)


SHAPES = {
    "residential": lambda h: 0.4 + 1.2 * math.exp(-((h - 7.5) ** 2) / 2) + 2.0 * math.exp(-((h - 19.5) ** 2) / 3),
    "commercial": lambda h: 3.0 if 8 <= h < 18 else 0.45,
    "night": lambda h: 2.5 if h < 6 or h >= 22 else 0.6,
    "industrial": lambda h: 5.0 + (0.8 if 6 <= h < 14 else 0.0),
}


def days(path, seed):
    # Meter-like data: every client mixes the four shapes with its own
    # weights, and each day re-draws part of the mix, shifts the clock by up
    # to +-2 h and adds 30 % multiplicative slot noise, so days agree only
    # loosely on which clients look alike.
    rng = random.Random(seed)
    names = list(SHAPES)
    n_clients = 80
    clients = [f"MT_{c:03d}" for c in range(1, n_clients + 1)]
    mixes = []
    for _ in range(n_clients - 1):
        w = [rng.gammavariate(0.5, 1.0) for _ in names]
        total = sum(w)
        mixes.append([x / total for x in w])
    scale = [math.exp(rng.gauss(0.0, 0.6)) for _ in range(n_clients - 1)]
    daily = []
    for day in range(4):
        per_client = []
        for c in range(n_clients - 1):
            fresh = [rng.gammavariate(0.5, 1.0) for _ in names]
            total = sum(fresh)
            keep = rng.uniform(0.3, 0.9)
            mix = [keep * a + (1 - keep) * b / total for a, b in zip(mixes[c], fresh)]
            per_client.append((mix, rng.uniform(-2.0, 2.0), scale[c] * math.exp(rng.gauss(0.0, 0.3))))
        daily.append(per_client)
    rows = []
    for s in range(4 * 96):
        day = s // 96
        hour = ((s % 96) + 1) * 0.25
        row = []
        for c in range(n_clients - 1):
            mix, shift, amp = daily[day][c]
            h = (hour + shift) % 24
            base = sum(w * SHAPES[k](h) for w, k in zip(mix, names))
            row.append(round(max(0.0, amp * base * (1.0 + rng.gauss(0.0, 0.3))), 4))
        row.append(0.0)  # never consumes: dropped by the daily-view slicer
        rows.append(row)
    write(path, clients, rows)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "tests" / "data"))
    ap.add_argument("--seed", type=int, default=2014)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    small(out / "eld_small.txt")
    days(out / "eld_days.txt", args.seed)


if __name__ == "__main__":
    main()
