"""Deliberately plain re-implementation of the graph segmentation merge rules.

Used as an oracle: nested loops, explicit member lists instead of a
union-find forest, no numpy. It shares only the rules (8-neighbour order,
weight, predicate, tie-break, min-size pass, first-touch numbering) with the
production code.
"""

import math


def reference_segment(pixels, k, min_size):
    """``pixels`` is a list of rows of (r, g, b); returns a list of rows of ids."""
    h, w = len(pixels), len(pixels[0])

    edges = []  # (weight, construction index, a, b)
    for y in range(h):
        for x in range(w):
            for dy, dx in ((0, 1), (1, 0), (1, 1), (1, -1)):
                ny, nx = y + dy, x + dx
                if 0 <= ny < h and 0 <= nx < w:
                    p, q = pixels[y][x], pixels[ny][nx]
                    d2 = sum((int(p[c]) - int(q[c])) ** 2 for c in range(3))
                    edges.append((math.sqrt(d2), len(edges), y * w + x, ny * w + nx))
    edges.sort()

    comp_of = list(range(h * w))
    members = {i: [i] for i in range(h * w)}
    internal = {i: 0.0 for i in range(h * w)}

    def merge(ca, cb, weight):
        if len(members[ca]) < len(members[cb]):
            ca, cb = cb, ca
        for v in members[cb]:
            comp_of[v] = ca
        members[ca].extend(members.pop(cb))
        internal[ca] = max(internal[ca], internal.pop(cb), weight)

    for weight, _, a, b in edges:
        ca, cb = comp_of[a], comp_of[b]
        if ca == cb:
            continue
        tau_a = internal[ca] + k / len(members[ca])
        tau_b = internal[cb] + k / len(members[cb])
        if weight <= min(tau_a, tau_b):
            merge(ca, cb, weight)

    if min_size > 1:
        for weight, _, a, b in edges:
            ca, cb = comp_of[a], comp_of[b]
            if ca != cb and (len(members[ca]) < min_size or len(members[cb]) < min_size):
                merge(ca, cb, weight)

    numbering = {}
    out = []
    for y in range(h):
        row = []
        for x in range(w):
            c = comp_of[y * w + x]
            if c not in numbering:
                numbering[c] = len(numbering)
            row.append(numbering[c])
        out.append(row)
    return out
