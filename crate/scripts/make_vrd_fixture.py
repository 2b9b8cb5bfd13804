"""Writes the synthetic relationship fixture: 100 training and 100 test scenes.

Each scene holds two relation triples on a 640x480 canvas, one in each half.
Detections 0,1 form the first triple and 2,3 the second. Every predicate has
fixed subject/object categories and a geometry whose qualitative relations
(topology, placement, size band) never vary, so a test pair encodes exactly
like the training pairs of its predicate. "near" and "beside" share both
categories and geometry, so they are indistinguishable by construction.
"""
import json
import random
import sys

PREDICATES = ["on", "in", "wears", "under", "near", "beside"]


def u(rng, a, b):
    return round(rng.uniform(a, b), 1)


def layout(pred, rng, x0):
    """Two boxes (subject, object) inside the 300-px-wide strip starting at x0."""
    if pred == "on":
        tw, th = u(rng, 150, 200), u(rng, 60, 80)
        tx, ty = x0 + u(rng, 10, 290 - tw), u(rng, 200, 380)
        cw, ch = u(rng, 30, 40), u(rng, 35, 45)
        cx = tx + tw / 2 + u(rng, -3, 3) - cw / 2
        return ("cup", [cx, ty - ch, cx + cw, ty]), ("table", [tx, ty, tx + tw, ty + th])
    if pred == "in":
        bw, bh = u(rng, 120, 160), u(rng, 80, 100)
        bx, by = x0 + u(rng, 10, 290 - bw), u(rng, 50, 370)
        a = u(rng, 20, 30)
        ax = bx + bw / 2 + u(rng, -3, 3) - a / 2
        ay = by + bh / 2 + u(rng, -3, 3) - a / 2
        return ("apple", [ax, ay, ax + a, ay + a]), ("bowl", [bx, by, bx + bw, by + bh])
    if pred == "wears":
        pw, ph = u(rng, 60, 80), u(rng, 180, 220)
        px, py = x0 + u(rng, 10, 290 - pw), u(rng, 30, 250)
        hw, hh = u(rng, 40, 50), u(rng, 25, 30)
        hx = px + pw / 2 + u(rng, -3, 3) - hw / 2
        hy = py - 10
        return ("hat", [hx, hy, hx + hw, hy + hh]), ("person", [px, py, px + pw, py + ph])
    if pred == "under":
        cw, ch = u(rng, 80, 100), u(rng, 90, 110)
        cx, cy = x0 + u(rng, 10, 290 - cw), u(rng, 20, 300)
        b = u(rng, 30, 40)
        bx = cx + cw / 2 + u(rng, -3, 3) - b / 2
        by = cy + ch + u(rng, 5, 10)
        return ("ball", [bx, by, bx + b, by + b]), ("chair", [cx, cy, cx + cw, cy + ch])
    # near / beside
    dw, dh = u(rng, 80, 100), u(rng, 50, 60)
    kw, kh = round(dw * rng.uniform(0.95, 1.05), 1), round(dh * rng.uniform(0.95, 1.05), 1)
    gap = u(rng, 20, 40)
    dx, dy = x0 + u(rng, 5, 295 - dw - gap - kw), u(rng, 50, 400)
    kx, ky = dx + dw + gap, dy + u(rng, -3, 3)
    return ("dog", [dx, dy, dx + dw, dy + dh]), ("cat", [kx, ky, kx + kw, ky + kh])


def scene(image_id, rng):
    while True:
        a, b = rng.choice(PREDICATES), rng.choice(PREDICATES)
        if a != b and not {a, b} <= {"near", "beside"}:
            break
    dets, triples = [], []
    for pred, x0 in ((a, 0), (b, 330)):
        (sl, sb), (ol, ob) = layout(pred, rng, x0)
        i = len(dets)
        dets += [{"bbox": [round(v, 1) for v in sb], "label": sl},
                 {"bbox": [round(v, 1) for v in ob], "label": ol}]
        triples.append([i, pred, i + 1])
    return {"image_id": image_id, "width": 640, "height": 480, "detections": dets, "triples": triples}


def main(out_dir):
    rng = random.Random(20240611)
    for split in ("train", "test"):
        with open(f"{out_dir}/synthetic_{split}.jsonl", "w") as f:
            for i in range(100):
                f.write(json.dumps(scene(f"{split}-{i:03d}", rng)) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/vrd")
