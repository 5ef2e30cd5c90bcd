"""Reference feature table for tests/fixtures/bars6.svg.

Written independently of the Rust extractor: element geometry is transcribed
by hand from the fixture, colours go through colorsys, and MDS uses
numpy.linalg.eigh. Output: crates/core/tests/fixtures/bars6_features.csv
"""

import colorsys
import csv
import math
import pathlib

import numpy as np

W, H = 400.0, 300.0
DIAG = math.hypot(W, H)
GAP = 0.01 * DIAG

# id, x, y, w, h, fill rgba, stroke rgb or None, stroke width
BARS = [
    ("b1", 40, 100, 38, 150, (70, 130, 180, 1.0), None, 1.0),
    ("b2", 80, 150, 38, 100, (70, 130, 180, 1.0), None, 1.0),
    ("b3", 120, 60, 38, 190, (255, 0, 0, 0.5), None, 1.0),
    ("b4", 200, 120, 38, 130, (44, 160, 44, 1.0), (0, 0, 0), 2.0),
    ("b5", 240, 200, 38, 50, (44, 160, 44, 1.0), None, 1.0),
    ("b6", 320, 90, 38, 160, (255, 127, 14, 1.0), None, 1.0),
]

NAMES = [
    "type_code", "fill_hue_sin", "fill_hue_cos", "fill_saturation", "fill_lightness",
    "stroke_hue_sin", "stroke_hue_cos", "stroke_saturation", "stroke_lightness",
    "stroke_width", "bbox_width", "bbox_height", "area",
    "centroid_x", "centroid_y", "bbox_left", "bbox_right", "bbox_top", "bbox_bottom",
    "mds_contact_1", "mds_contact_2", "mds_region_1", "mds_region_2",
]
PERIODIC = {1, 2, 5, 6}
CANVAS_X = {13, 15, 16}
CANVAS_Y = {14, 17, 18}


def over_white(r, g, b, a):
    return tuple(int(math.floor(a * c + (1 - a) * 255 + 0.5)) for c in (r, g, b))


def hsl(rgb):
    h, l, s = colorsys.rgb_to_hls(*(c / 255 for c in rgb))
    return h * 360.0, s, l


def colour_dims(rgb):
    h, s, l = hsl(rgb)
    t = math.radians(h)
    return [math.sin(t), math.cos(t), s, l]


def mds(dist):
    n = len(dist)
    d2 = dist ** 2
    j = np.eye(n) - np.ones((n, n)) / n
    b = -0.5 * j @ d2 @ j
    vals, vecs = np.linalg.eigh(b)
    order = np.argsort(-vals, kind="stable")
    out = np.zeros((n, 2))
    top = max(vals[order[0]], 0.0)
    for axis, k in enumerate(order[:2]):
        lam = vals[k]
        if lam <= 0 or lam <= top * 1e-10:
            continue
        col = vecs[:, k] * math.sqrt(lam)
        first = next((v for v in col if abs(v) > 1e-9), 0.0)
        if first < 0:
            col = -col
        out[:, axis] = col
    return out


def geodesic(adj):
    n = len(adj)
    inf = 10 ** 9
    d = [[0 if i == j else (1 if adj[i][j] else inf) for j in range(n)] for i in range(n)]
    for k in range(n):
        for i in range(n):
            for j in range(n):
                d[i][j] = min(d[i][j], d[i][k] + d[k][j])
    finite = [v for row in d for v in row if v < inf]
    diam = max(finite)
    return np.array([[v if v < inf else diam + 1 for v in row] for row in d], float)


def main():
    n = len(BARS)
    boxes = [(x, x + w, y, y + h) for _, x, y, w, h, *_ in BARS]
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            a, b = boxes[i], boxes[j]
            if (a[0] - GAP <= b[1] + GAP and b[0] - GAP <= a[1] + GAP
                    and a[2] - GAP <= b[3] + GAP and b[2] - GAP <= a[3] + GAP):
                adj[i][j] = 1
    contact = mds(geodesic(adj))
    # no bar contains another, so every bar sits directly on the canvas
    region = mds(np.zeros((n, n)))

    raw, mask = [], []
    for i, (_, x, y, w, h, fill, stroke, sw) in enumerate(BARS):
        row = [None] * 23
        row[0] = 0.0  # rect is the first kind
        row[1:5] = colour_dims(over_white(*fill))
        if stroke is not None:
            row[5:9] = colour_dims(stroke)
            row[9] = sw
        row[10], row[11], row[12] = w, h, w * h
        l, r, t, btm = boxes[i]
        row[13], row[14] = (l + r) / 2, (t + btm) / 2
        row[15], row[16], row[17], row[18] = l, r, t, btm
        row[19], row[20] = contact[i]
        row[21], row[22] = region[i]
        raw.append(row)

    norm = [[None] * 23 for _ in range(n)]
    for d in range(23):
        present = [raw[i][d] for i in range(n) if raw[i][d] is not None]
        lo, hi = (min(present), max(present)) if present else (0, 0)
        for i in range(n):
            v = raw[i][d]
            if v is None:
                continue
            if d in PERIODIC:
                norm[i][d] = (v + 1) / 2
            elif d in CANVAS_X:
                norm[i][d] = min(max(v / W, 0), 1)
            elif d in CANVAS_Y:
                norm[i][d] = min(max(v / H, 0), 1)
            elif hi - lo <= 1e-9 * max(1, abs(lo), abs(hi)):
                norm[i][d] = 0.5
            else:
                norm[i][d] = (v - lo) / (hi - lo)

    out = pathlib.Path(__file__).resolve().parents[2] / "crates/core/tests/fixtures/bars6_features.csv"
    with out.open("w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["element_id"] + NAMES)
        for (bar_id, *_), row in zip(BARS, norm):
            w.writerow([bar_id] + ["" if v is None else f"{v:.12f}" for v in row])
    print(np.round(contact, 6))


if __name__ == "__main__":
    main()
