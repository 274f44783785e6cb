"""Read/write parity-check matrices in the standard alist text format."""

from __future__ import annotations

import numpy as np

from .protograph import LiftedCode, code_from_dense


def write_alist(code: LiftedCode) -> str:
    col_deg = [len(v) for v in code.var_neighbors]
    row_deg = [len(c) for c in code.check_neighbors]
    max_col, max_row = max(col_deg), max(row_deg)
    lines = [f"{code.n} {code.m}", f"{max_col} {max_row}",
             " ".join(map(str, col_deg)), " ".join(map(str, row_deg))]
    for v in range(code.n):
        entries = [str(int(c) + 1) for c in code.var_neighbors[v]]
        entries += ["0"] * (max_col - len(entries))
        lines.append(" ".join(entries))
    for c in range(code.m):
        entries = [str(int(v) + 1) for v in code.check_neighbors[c]]
        entries += ["0"] * (max_row - len(entries))
        lines.append(" ".join(entries))
    return "\n".join(lines) + "\n"


def read_alist(text: str) -> LiftedCode:
    tokens = text.split()
    if len(tokens) < 4:
        raise ValueError("truncated alist file")
    pos = 0

    def take(count):
        nonlocal pos
        if pos + count > len(tokens):
            raise ValueError("truncated alist file")
        out = [int(t) for t in tokens[pos:pos + count]]
        pos += count
        return out

    n, m = take(2)
    max_col, max_row = take(2)
    col_deg = take(n)
    row_deg = take(m)
    # MacKay-style files pad every entry line to the max degree with zeros;
    # some writers emit unpadded lines. Disambiguate by total token count.
    padded_total = 4 + n + m + max_col * n + max_row * m
    unpadded_total = 4 + n + m + sum(col_deg) + sum(row_deg)
    if len(tokens) == padded_total:
        col_counts = [max_col] * n
        row_counts = [max_row] * m
    elif len(tokens) == unpadded_total:
        col_counts = col_deg
        row_counts = row_deg
    else:
        raise ValueError("alist token count matches neither padded nor unpadded layout")
    H = np.zeros((m, n), dtype=np.uint8)
    for v in range(n):
        for c in take(col_counts[v]):
            if c > 0:
                H[c - 1, v] = 1
    for _c in range(m):
        take(row_counts[_c])  # row section is redundant; verified via degrees below
    if [int(d) for d in H.sum(axis=0)] != col_deg:
        raise ValueError("alist column degrees inconsistent with entries")
    if [int(d) for d in H.sum(axis=1)] != row_deg:
        raise ValueError("alist row degrees inconsistent with entries")
    return code_from_dense(H)
