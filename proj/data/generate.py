#!/usr/bin/env python3
"""Regenerates the sample point files in this directory."""

import math
from pathlib import Path

HERE = Path(__file__).resolve().parent


def write(name, header, points, note):
    lines = [f"# {note}", header]
    lines += [f"{x!r} {y!r}" for x, y in points]
    (HERE / name).write_text("\n".join(lines) + "\n")


def spiral(n=50):
    pts = []
    for i in range(n + 1):
        t = 1.0 + i / n
        phi = 6.0 * math.pi / math.log(2.0) * math.log(t)
        pts.append((phi * math.cos(phi), phi * math.sin(phi)))
    return pts


def flower(alpha, n):
    pts = []
    for i in range(n + 1):
        phi = 2.0 * math.pi * i / (n + 1)
        r = 1.0 + math.cos(18.0 * phi) * math.sin(4.0 * phi) / alpha
        pts.append((r * math.cos(phi), r * math.sin(phi)))
    return pts


def circle(n):
    return [(math.cos(2.0 * math.pi * i / n), math.sin(2.0 * math.pi * i / n)) for i in range(n)]


if __name__ == "__main__":
    write("spiral.txt", "open 0.05 0.05 0.05 0.05", spiral(),
          "spiral r = phi, phi = 6 pi log(t) / log 2, t = 1 + i/50")
    write("flower8.txt", "closed", flower(8.0, 60),
          "flower r = 1 + cos(18 phi) sin(4 phi) / 8, phi = 2 pi i / 61")
    write("flower2.txt", "closed", flower(2.0, 100),
          "flower r = 1 + cos(18 phi) sin(4 phi) / 2, phi = 2 pi i / 101")
    write("circle.txt", "closed", circle(32), "unit circle, 32 points")
    write("segment.txt", "open 1 0.5 1 0.5", [(0.0, 0.0), (1.0, 0.5)], "straight segment")
