"""Writes the part-hierarchy fixture: 5 concepts x 10 train and 10 test PNGs.

Every concept shares the same outer outline distribution (a jittered star
with many spikes), so outlines collide between all concepts. Concepts differ
only in the small parts drawn inside the outline.
"""
import math
import random
import sys
from pathlib import Path

from PIL import Image, ImageDraw

SIZE = 96
INK = 255


def outline(rng, d):
    n = 2 * rng.randint(9, 12)
    cx, cy = SIZE / 2 + rng.uniform(-2, 2), SIZE / 2 + rng.uniform(-2, 2)
    pts = []
    for i in range(n):
        a = 2 * math.pi * (i + rng.uniform(-0.2, 0.2)) / n
        r = rng.uniform(38, 45) if i % 2 == 0 else rng.uniform(26, 33)
        pts.append((cx + r * math.cos(a), cy + r * math.sin(a)))
    d.line(pts + [pts[0]], fill=INK, width=3, joint="curve")
    return cx, cy


def circle(d, x, y, r):
    d.ellipse([x - r, y - r, x + r, y + r], outline=INK, width=3)


def square(d, x, y, h):
    d.rectangle([x - h, y - h, x + h, y + h], outline=INK, width=3)


def triangle(d, x, y, r):
    pts = [(x + r * math.cos(a), y + r * math.sin(a)) for a in (-math.pi / 2, math.pi / 6, 5 * math.pi / 6)]
    d.line(pts + [pts[0]], fill=INK, width=3, joint="curve")


def parts(concept, d, cx, cy, rng):
    j = lambda: rng.uniform(-1.5, 1.5)
    if concept == "ring":
        circle(d, cx + j(), cy + j(), 11)
    elif concept == "box":
        square(d, cx + j(), cy + j(), 10)
    elif concept == "tri":
        triangle(d, cx + j(), cy + 2 + j(), 13)
    elif concept == "eyes":
        circle(d, cx - 11 + j(), cy + j(), 6)
        circle(d, cx + 11 + j(), cy + j(), 6)
    elif concept == "nested":
        square(d, cx + j(), cy + j(), 14)
        circle(d, cx + j(), cy + j(), 5)


def main(out):
    rng = random.Random(7)
    for split in ("train", "test"):
        for concept in ("box", "eyes", "nested", "ring", "tri"):
            folder = Path(out) / split / concept
            folder.mkdir(parents=True, exist_ok=True)
            for i in range(10):
                img = Image.new("L", (SIZE, SIZE), 0)
                d = ImageDraw.Draw(img)
                cx, cy = outline(rng, d)
                parts(concept, d, cx, cy, rng)
                img.save(folder / f"{i:02d}.png", optimize=True)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/parts")
