#!/usr/bin/env python3
"""Writes a synthetic temperature log in the Intel Berkeley lab format.

Columns: date time epoch moteid temperature humidity light voltage.
"""
import math
import random
import sys

MOTES = 10
EPOCHS = 400


def main(path):
    rng = random.Random(2004)
    pos = [(2 + 36 * ((k * 0.618) % 1), 2 + 27 * ((k * 0.382) % 1)) for k in range(MOTES)]
    with open(path, "w", newline="\n") as out:
        for epoch in range(1, EPOCHS + 1):
            base = 19.0 + 2.0 * math.sin(2 * math.pi * epoch / 240.0)
            common = rng.gauss(0.0, 0.6)
            for mote in range(1, MOTES + 1):
                x, y = pos[mote - 1]
                local = 0.08 * x - 0.05 * y
                temp = base + local + common * (0.5 + 0.05 * mote) + rng.gauss(0.0, 0.3 + 0.04 * mote)
                seconds = epoch * 31
                stamp = "2004-02-28 %02d:%02d:%02d.%05d" % (seconds // 3600 % 24, seconds // 60 % 60,
                                                            seconds % 60, rng.randrange(100000))
                if rng.random() < 0.02:
                    out.write("%s %d %d\n" % (stamp, epoch, mote))
                    continue
                out.write("%s %d %d %.4f %.4f %.2f %.5f\n" % (
                    stamp, epoch, mote, temp, 38.0 + rng.gauss(0, 1), 45.0 + rng.random() * 50,
                    2.6 + 0.1 * rng.random()))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "lab_log.txt")
