"""Protographs, circulant lifting to parity-check matrices, and GF(2) encoders."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ProtographError(ValueError):
    pass


class LiftingError(ValueError):
    pass


@dataclass(frozen=True)
class Protograph:
    """Base matrix of edge multiplicities between check rows and variable columns."""

    b: np.ndarray  # shape (rows, cols), non-negative ints

    def __post_init__(self):
        b = np.asarray(self.b, dtype=np.int64)
        object.__setattr__(self, "b", b)
        if b.ndim != 2 or b.size == 0:
            raise ProtographError("base matrix must be a non-empty 2-D array")
        if (b < 0).any():
            raise ProtographError("negative edge multiplicity")
        if (b.sum(axis=1) == 0).any():
            raise ProtographError("disconnected check node (zero row)")
        if (b.sum(axis=0) == 0).any():
            raise ProtographError("disconnected variable node (zero column)")

    @property
    def rows(self) -> int:
        return self.b.shape[0]

    @property
    def cols(self) -> int:
        return self.b.shape[1]

    @property
    def design_rate(self) -> float:
        return 1.0 - self.b.shape[0] / self.b.shape[1]

    def to_text(self) -> str:
        lines = [f"{self.rows} {self.cols}"]
        lines += [" ".join(str(int(x)) for x in row) for row in self.b]
        return "\n".join(lines) + "\n"


def parse_protograph(text: str) -> Protograph:
    """Parse the protograph text format: header "rows cols" then the base matrix."""
    lines = [ln for ln in (raw.strip() for raw in text.splitlines()) if ln]
    if not lines:
        raise ProtographError("empty protograph file")
    head = lines[0].split()
    if len(head) != 2:
        raise ProtographError(f"line 1: expected 'rows cols', got {lines[0]!r}")
    try:
        rows, cols = int(head[0]), int(head[1])
    except ValueError:
        raise ProtographError(f"line 1: non-integer dimensions {lines[0]!r}") from None
    if rows < 1 or cols < 1:
        raise ProtographError("line 1: dimensions must be positive")
    if len(lines) != 1 + rows:
        raise ProtographError(f"expected {rows} matrix lines, got {len(lines) - 1}")
    b = np.zeros((rows, cols), dtype=np.int64)
    for i in range(rows):
        parts = lines[1 + i].split()
        if len(parts) != cols:
            raise ProtographError(f"line {i + 2}: expected {cols} entries, got {len(parts)}")
        try:
            vals = [int(p) for p in parts]
        except ValueError:
            raise ProtographError(f"line {i + 2}: non-integer entry") from None
        if any(v < 0 for v in vals):
            raise ProtographError(f"line {i + 2}: negative entry")
        b[i] = vals
    proto = Protograph(b)
    if proto.design_rate <= 0:
        raise ProtographError("non-positive design rate")
    return proto


@dataclass
class LiftedCode:
    """A lifted LDPC code: sparse H as adjacency lists plus a systematic encoder."""

    n: int
    m: int
    var_neighbors: list  # var_neighbors[v]: np.ndarray of check indices
    check_neighbors: list  # check_neighbors[c]: np.ndarray of variable indices
    proto_col: np.ndarray  # protograph column of each variable node (-1 if untracked)
    k: int = field(init=False)
    _generator: np.ndarray = field(init=False, repr=False)  # (k, n) uint8
    _info_cols: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        try:
            k, gen, info_cols = derive_encoder(self.to_dense())
        except ValueError:  # full column rank: only the zero codeword exists
            k, gen, info_cols = 0, np.zeros((0, self.n), dtype=np.uint8), np.zeros(0, np.int64)
        self.k = k
        self._generator = gen
        self._info_cols = info_cols

    def to_dense(self) -> np.ndarray:
        H = np.zeros((self.m, self.n), dtype=np.uint8)
        for c, vs in enumerate(self.check_neighbors):
            H[c, vs] = 1
        return H

    def encode(self, u: np.ndarray) -> np.ndarray:
        """Map information bits (..., k) to codewords (..., n) over GF(2)."""
        u = np.asarray(u, dtype=np.uint8)
        if u.shape[-1] != self.k:
            raise ValueError(f"expected {self.k} information bits, got {u.shape[-1]}")
        return (u @ self._generator) % 2

    def syndrome(self, c: np.ndarray) -> np.ndarray:
        """H @ c^T over GF(2); zero iff c is a codeword."""
        c = np.asarray(c, dtype=np.uint8)
        out = np.zeros(c.shape[:-1] + (self.m,), dtype=np.uint8)
        for chk, vs in enumerate(self.check_neighbors):
            out[..., chk] = c[..., vs].sum(axis=-1) % 2
        return out

    def is_codeword(self, c: np.ndarray) -> np.ndarray:
        return ~self.syndrome(c).any(axis=-1)


def _adjacency_from_dense(H: np.ndarray):
    m, n = H.shape
    var_neighbors = [np.flatnonzero(H[:, v]).astype(np.int64) for v in range(n)]
    check_neighbors = [np.flatnonzero(H[c]).astype(np.int64) for c in range(m)]
    return var_neighbors, check_neighbors


def code_from_dense(H: np.ndarray, proto_col: np.ndarray | None = None) -> LiftedCode:
    H = np.asarray(H, dtype=np.uint8)
    m, n = H.shape
    if proto_col is None:
        proto_col = np.full(n, -1, dtype=np.int64)
    var_nb, chk_nb = _adjacency_from_dense(H)
    return LiftedCode(n=n, m=m, var_neighbors=var_nb, check_neighbors=chk_nb,
                      proto_col=np.asarray(proto_col, dtype=np.int64))


def gf2_row_reduce(H: np.ndarray):
    """Row-reduce H over GF(2). Returns (reduced matrix, pivot column list)."""
    A = np.array(H, dtype=np.uint8) % 2
    m, n = A.shape
    pivots = []
    r = 0
    for col in range(n):
        if r >= m:
            break
        rows = np.flatnonzero(A[r:, col]) + r
        if rows.size == 0:
            continue
        if rows[0] != r:
            A[[r, rows[0]]] = A[[rows[0], r]]
        elim = np.flatnonzero(A[:, col])
        elim = elim[elim != r]
        A[elim] ^= A[r]
        pivots.append(col)
        r += 1
    return A, pivots


def derive_encoder(H: np.ndarray):
    """Systematic encoder from H by GF(2) Gaussian elimination.

    Returns (k, G, info_cols) with G of shape (k, n) so that every u @ G % 2
    satisfies H @ c^T = 0. Information bits occupy the non-pivot columns.
    """
    H = np.asarray(H, dtype=np.uint8)
    m, n = H.shape
    A, pivots = gf2_row_reduce(H)
    rank = len(pivots)
    k = n - rank
    if k == 0:
        raise ValueError("zero-rate code: H has full column rank")
    pivots = np.asarray(pivots, dtype=np.int64)
    info_cols = np.setdiff1d(np.arange(n), pivots)
    G = np.zeros((k, n), dtype=np.uint8)
    G[np.arange(k), info_cols] = 1
    # pivot bit of row r solves c[pivots[r]] = sum over free columns of A[r, free] * u
    G[:, pivots] = A[:rank, info_cols].T
    return k, G, info_cols


def _count_bad_column_pairs(check_neighbors, n: int) -> int:
    """Number of variable pairs sharing >= 2 checks (each such pair is a 4-cycle)."""
    pair_counts: dict = {}
    for vs in check_neighbors:
        vs = np.sort(vs)
        for a_idx in range(len(vs)):
            for b_idx in range(a_idx + 1, len(vs)):
                key = (int(vs[a_idx]), int(vs[b_idx]))
                pair_counts[key] = pair_counts.get(key, 0) + 1
    return sum(1 for v in pair_counts.values() if v >= 2)


def _find_four_cycle_edges(check_neighbors):
    """One (check, variable) edge per variable pair that closes a 4-cycle."""
    pair_check: dict = {}
    offending = []
    for c, vs in enumerate(check_neighbors):
        vs = np.sort(vs)
        for a_idx in range(len(vs)):
            for b_idx in range(a_idx + 1, len(vs)):
                key = (int(vs[a_idx]), int(vs[b_idx]))
                if key in pair_check:
                    offending.append((c, key[0]))
                else:
                    pair_check[key] = c
    return offending


def _disjoint_permutations(rng, Z: int, count: int, max_tries: int = 200) -> list:
    """`count` random permutations of [Z] that disagree pointwise (no parallel edges)."""
    for _ in range(max_tries):
        perms = [rng.permutation(Z) for _ in range(count)]
        stacked = np.stack(perms)
        if all(len(np.unique(stacked[:, z])) == count for z in range(Z)):
            return perms
    raise LiftingError(f"could not place {count} pointwise-distinct permutations")


def lift(p: Protograph, Z: int, seed: int, girth_retries: int = 50) -> LiftedCode:
    """Lift a protograph by random Z x Z permutation blocks.

    Each multiplicity-e base entry expands to e permutation sub-blocks that
    disagree in every position (so the lifted graph has no parallel edges).
    4-cycles are then removed by local edge swaps inside the permutation
    blocks (degree-preserving), up to `girth_retries` repair sweeps; the
    swap-count-minimal graph seen is kept if repair does not finish.
    """
    if Z < 1:
        raise LiftingError("lifting factor must be >= 1")
    if int(p.b.max()) > Z:
        raise LiftingError(f"multiplicity {int(p.b.max())} exceeds lifting factor {Z}")
    rng = np.random.default_rng(seed)
    n, m = Z * p.cols, Z * p.rows
    proto_col = np.repeat(np.arange(p.cols), Z)

    perms = {}
    for i in range(p.rows):
        for j in range(p.cols):
            e = int(p.b[i, j])
            if e:
                perms[(i, j)] = _disjoint_permutations(rng, Z, e)

    def build_H():
        H = np.zeros((m, n), dtype=np.uint8)
        z = np.arange(Z)
        for (i, j), plist in perms.items():
            for perm in plist:
                H[i * Z + perm, j * Z + z] = 1
        return H

    def try_swap(c: int, v: int) -> bool:
        """Swap edge (c, v) with another edge of the same permutation block."""
        i, j = c // Z, v // Z
        r1, z1 = c % Z, v % Z
        plist = perms.get((i, j))
        if not plist:
            return False
        which = next((w for w, perm in enumerate(plist) if perm[z1] == r1), None)
        if which is None:
            return False
        perm = plist[which]
        others = [q for w, q in enumerate(plist) if w != which]
        for z2 in rng.permutation(Z)[:20]:
            if z2 == z1:
                continue
            a, b = perm[z1], perm[z2]
            # keep pointwise disjointness with sibling permutations
            if any(q[z1] == b or q[z2] == a for q in others):
                continue
            perm[z1], perm[z2] = b, a
            return True
        return False

    best = None
    best_bad = None
    for _ in range(max(1, girth_retries)):
        H = build_H()
        var_nb, chk_nb = _adjacency_from_dense(H)
        bad_edges = _find_four_cycle_edges(chk_nb)
        if best_bad is None or len(bad_edges) < best_bad:
            best, best_bad = (H, var_nb, chk_nb), len(bad_edges)
        if not bad_edges:
            break
        for c, v in bad_edges:
            try_swap(c, v)
    H, var_nb, chk_nb = best
    return LiftedCode(n=n, m=m, var_neighbors=var_nb, check_neighbors=chk_nb,
                      proto_col=proto_col)


def girth(code: LiftedCode, cap: int = 12) -> int:
    """Shortest cycle length in the Tanner graph via per-variable BFS (cap if none found)."""
    best = cap + 2
    for start in range(code.n):
        # BFS over the bipartite graph; nodes: ('v', i) / ('c', i)
        dist = {("v", start): 0}
        frontier = [(("v", start), None)]
        depth = 0
        while frontier and depth <= cap // 2:
            nxt = []
            for (kind, idx), parent in frontier:
                nbrs = code.var_neighbors[idx] if kind == "v" else code.check_neighbors[idx]
                okind = "c" if kind == "v" else "v"
                for nb in nbrs:
                    node = (okind, int(nb))
                    if node == parent:
                        continue
                    if node in dist:
                        cyc = dist[(kind, idx)] + dist[node] + 1
                        if cyc < best:
                            best = cyc
                    else:
                        dist[node] = dist[(kind, idx)] + 1
                        nxt.append((node, (kind, idx)))
            frontier = nxt
            depth += 1
    return best if best <= cap else cap + 2


def build_repetition_baseline(inner: LiftedCode) -> LiftedCode:
    """Length-doubling construction: codewords are (c, c) for inner codewords c.

    H' = [[H_inner, 0], [I, I]], so a rate-1/2 inner code yields a rate-1/4 code
    of twice the length.
    """
    Hi = inner.to_dense()
    mi, ni = Hi.shape
    H = np.zeros((mi + ni, 2 * ni), dtype=np.uint8)
    H[:mi, :ni] = Hi
    H[mi:, :ni] = np.eye(ni, dtype=np.uint8)
    H[mi:, ni:] = np.eye(ni, dtype=np.uint8)
    proto_col = np.concatenate([inner.proto_col, inner.proto_col + (inner.proto_col.max() + 1)])
    return code_from_dense(H, proto_col)
