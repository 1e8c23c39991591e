#!/usr/bin/env python3
"""Writes the bundled world grids: data/office.world and data/empty_room.world.

Office: 56 m x 45 m at 0.25 m per cell. A ring corridor (2 m wide) with a central cross corridor,
rooms between them, furniture blocks in some rooms. Every room opens onto each corridor it touches
and about half of the room pairs sharing a wall get a connecting door, so the layout has cycles.
"""
import argparse
import pathlib
from collections import deque

RES = 0.25
W, H = 224, 180
DOOR = 4


def office():
    g = [[False] * W for _ in range(H)]  # True = wall
    for x in range(W):
        g[0][x] = g[H - 1][x] = True
    for y in range(H):
        g[y][0] = g[y][W - 1] = True
    for x in (23, 32, 70, 107, 116, 154, 191, 200):
        for y in range(H):
            g[y][x] = True
    for y in (19, 28, 57, 85, 94, 123, 151, 160):
        for x in range(W):
            g[y][x] = True
    corridors = [(24, 20, 31, 159), (192, 20, 199, 159), (24, 20, 199, 27), (24, 152, 199, 159),
                 (108, 20, 115, 159), (24, 86, 199, 93)]
    for x0, y0, x1, y1 in corridors:
        for y in range(y0, y1 + 1):
            for x in range(x0, x1 + 1):
                g[y][x] = False

    label = [[-1] * W for _ in range(H)]
    regions = 0
    for y in range(H):
        for x in range(W):
            if g[y][x] or label[y][x] >= 0:
                continue
            q = deque([(x, y)])
            label[y][x] = regions
            while q:
                cx, cy = q.popleft()
                for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                    nx, ny = cx + dx, cy + dy
                    if not g[ny][nx] and label[ny][nx] < 0:
                        label[ny][nx] = regions
                        q.append((nx, ny))
            regions += 1
    corridor_region = label[24][30]

    # Wall cells separating two regions, grouped by (region pair, orientation).
    shared = {}
    for y in range(1, H - 1):
        for x in range(1, W - 1):
            if not g[y][x]:
                continue
            for (ax, ay), (bx, by), orient in (((x - 1, y), (x + 1, y), "v"), ((x, y - 1), (x, y + 1), "h")):
                a, b = label[ay][ax], label[by][bx]
                if a >= 0 and b >= 0 and a != b:
                    key = (min(a, b), max(a, b), orient)
                    shared.setdefault(key, []).append((x, y))

    for (a, b, orient), cells in sorted(shared.items()):
        if len(cells) < DOOR + 4:
            continue
        touches_corridor = corridor_region in (a, b)
        if not touches_corridor and (a * 7 + b * 3) % 2 == 1:
            continue
        cells.sort(key=lambda c: (c[1], c[0]) if orient == "v" else (c[0], c[1]))
        mid = len(cells) // 2
        for (x, y) in cells[mid - DOOR // 2: mid + DOOR // 2]:
            g[y][x] = False

    # Furniture: a 7 x 5 block in the middle of every third room.
    centres = {}
    for y in range(H):
        for x in range(W):
            r = label[y][x]
            if r >= 0 and r != corridor_region:
                sx, sy, n = centres.get(r, (0, 0, 0))
                centres[r] = (sx + x, sy + y, n + 1)
    for r, (sx, sy, n) in sorted(centres.items()):
        if r % 3 != 0 or n < 600:
            continue
        cx, cy = sx // n, sy // n
        for y in range(cy - 2, cy + 3):
            for x in range(cx - 3, cx + 4):
                g[y][x] = True
    return [["#" if c else "." for c in row] for row in g]


def empty_room():
    w, h = 80, 64
    return [["#" if x in (0, w - 1) or y in (0, h - 1) else "." for x in range(w)] for y in range(h)]


def write(path, g):
    with open(path, "w") as f:
        f.write(f"{len(g[0])} {len(g)} {RES}\n")
        for row in g:
            f.write("".join(row) + "\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out-dir", default=str(pathlib.Path(__file__).resolve().parent.parent / "data"))
    args = ap.parse_args()
    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write(out / "office.world", office())
    write(out / "empty_room.world", empty_room())


if __name__ == "__main__":
    main()
