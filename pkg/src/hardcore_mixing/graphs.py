"""d-regular bipartite graphs, closures, and the bipartite expansion constant.

Vertex ids are 0..N-1; the id order is the fixed linear order used for all
tie-breaking (the degree algorithm's ordering).  Parity classes are called
the even and odd class; every edge joins the two classes and both classes
have size M = N/2.

A set A inside one class has neighbourhood N(A) in the other class and
external closure [A] = {x in A's class : N(x) subseteq N(A)}.  A is *small*
when 2*|[A]| <= M (exact integer comparison).  The bipartite expansion
constant is the exact minimum of (|N(A)|-|[A]|)/|N(A)| over nonempty small
A in either class; graphs where no nonempty small set exists get an explicit
sentinel (None) instead of an infinite minimum.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import sqrt
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import CapExceededError, InvalidParameterError, MixedParityError

# Construction caps: adjacency is materialized as an (N, d) array, so N is
# memory-bound long before the id space (64-bit) runs out.
MAX_GRAPH_VERTICES = 1 << 20
# Exhaustive per-class subset scans default to M <= 24 (2^24 subsets).
DEFAULT_SCAN_CAP = 24
# Kernel bitmasks pack one class into a single 64-bit word.
KERNEL_CLASS_LIMIT = 63


@dataclass(frozen=True)
class VertexSet:
    """Dense vertex set: an N-bit mask plus its universe size.

    Set algebra is word-parallel on python ints, so union/intersection/
    difference/cardinality cost O(N / wordsize).
    """

    bits: int
    universe: int

    def __post_init__(self) -> None:
        if self.bits < 0 or self.bits >> self.universe:
            raise InvalidParameterError(
                f"vertex ids out of range 0..{self.universe - 1}"
            )

    @classmethod
    def from_ids(cls, ids: Iterable[int], universe: int) -> "VertexSet":
        bits = 0
        for v in ids:
            if not 0 <= v < universe:
                raise InvalidParameterError(f"vertex id {v} outside 0..{universe - 1}")
            bits |= 1 << v
        return cls(bits, universe)

    @classmethod
    def empty(cls, universe: int) -> "VertexSet":
        return cls(0, universe)

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __contains__(self, v: int) -> bool:
        return 0 <= v < self.universe and (self.bits >> v) & 1 == 1

    def __iter__(self) -> Iterator[int]:
        bits = self.bits
        while bits:
            low = bits & -bits
            yield low.bit_length() - 1
            bits ^= low

    def __bool__(self) -> bool:
        return self.bits != 0

    def union(self, other: "VertexSet") -> "VertexSet":
        return VertexSet(self.bits | other.bits, self.universe)

    def intersection(self, other: "VertexSet") -> "VertexSet":
        return VertexSet(self.bits & other.bits, self.universe)

    def difference(self, other: "VertexSet") -> "VertexSet":
        return VertexSet(self.bits & ~other.bits, self.universe)

    def issubset(self, other: "VertexSet") -> bool:
        return self.bits & ~other.bits == 0

    def add(self, v: int) -> "VertexSet":
        return VertexSet(self.bits | (1 << v), self.universe)

    def remove(self, v: int) -> "VertexSet":
        return VertexSet(self.bits & ~(1 << v), self.universe)

    def ids(self) -> tuple[int, ...]:
        return tuple(self)

    def __repr__(self) -> str:
        return f"VertexSet({sorted(self)}, universe={self.universe})"


class BipartiteGraph:
    """Immutable d-regular bipartite graph with labelled parity classes."""

    def __init__(
        self,
        adjacency: Sequence[Sequence[int]],
        even_ids: Iterable[int],
        name: str = "graph",
    ) -> None:
        n = len(adjacency)
        if n == 0 or n % 2 != 0:
            raise InvalidParameterError("need a nonempty even number of vertices")
        if n > MAX_GRAPH_VERTICES:
            raise CapExceededError(
                f"graph on {n} vertices exceeds construction cap {MAX_GRAPH_VERTICES}"
            )
        even = sorted(set(even_ids))
        if any(not 0 <= v < n for v in even):
            raise InvalidParameterError("even-class ids outside 0..N-1")
        even_mark = np.zeros(n, dtype=bool)
        even_mark[even] = True
        odd = [v for v in range(n) if not even_mark[v]]
        if len(even) != len(odd):
            raise InvalidParameterError(
                f"parity classes must have equal size, got {len(even)} vs {len(odd)}"
            )
        degrees = {len(set(nbrs)) for nbrs in adjacency}
        if len(degrees) != 1:
            raise InvalidParameterError("graph is not regular")
        (d,) = degrees
        if d < 1:
            raise InvalidParameterError("degree must be >= 1")
        adj = np.empty((n, d), dtype=np.int64)
        for v, nbrs in enumerate(adjacency):
            uniq = sorted(set(nbrs))
            if len(uniq) != len(nbrs):
                raise InvalidParameterError(f"duplicate neighbour at vertex {v}")
            for w in uniq:
                if not 0 <= w < n or w == v:
                    raise InvalidParameterError(f"bad neighbour {w} at vertex {v}")
                if even_mark[v] == even_mark[w]:
                    raise InvalidParameterError(
                        f"edge {v}-{w} joins two vertices of the same parity class"
                    )
            adj[v] = uniq
        for v in range(n):
            for w in adj[v]:
                if v not in adj[w]:
                    raise InvalidParameterError(f"edge {v}-{w} is not symmetric")

        self.name = name
        self.num_vertices = n
        self.half_size = n // 2
        self.degree = d
        self.even_class: tuple[int, ...] = tuple(even)
        self.odd_class: tuple[int, ...] = tuple(odd)
        self._adj = adj
        self._adj.setflags(write=False)
        self._is_even = even_mark
        self._is_even.setflags(write=False)
        # Position of each vertex inside its class list.
        pos = np.zeros(n, dtype=np.int64)
        for i, v in enumerate(self.even_class):
            pos[v] = i
        for i, v in enumerate(self.odd_class):
            pos[v] = i
        self._class_pos = pos
        self._class_pos.setflags(write=False)
        # Global-id neighbour bitmasks (python ints, any N).
        self._nbr_bits: tuple[int, ...] = tuple(
            int(sum(1 << int(w) for w in adj[v])) for v in range(n)
        )
        self._scan_cache: dict[str, tuple] = {}

    # -- basic queries ----------------------------------------------------

    @property
    def n(self) -> int:
        return self.num_vertices

    @property
    def m(self) -> int:
        return self.half_size

    def neighbors(self, v: int) -> tuple[int, ...]:
        return tuple(int(w) for w in self._adj[v])

    def neighbor_bits(self, v: int) -> int:
        return self._nbr_bits[v]

    def is_even_vertex(self, v: int) -> bool:
        return bool(self._is_even[v])

    def even_set(self) -> VertexSet:
        return VertexSet.from_ids(self.even_class, self.num_vertices)

    def odd_set(self) -> VertexSet:
        return VertexSet.from_ids(self.odd_class, self.num_vertices)

    def side_of(self, A: VertexSet) -> str:
        """'even', 'odd', or raise for mixed/nonsensical sets; '∅' -> 'even'."""
        if A.universe != self.num_vertices:
            raise InvalidParameterError("vertex set universe does not match graph")
        has_even = any(self._is_even[v] for v in A)
        has_odd = any(not self._is_even[v] for v in A)
        if has_even and has_odd:
            raise MixedParityError("set spans both parity classes")
        return "odd" if has_odd else "even"

    # -- kernel-facing compact views --------------------------------------

    def class_masks(self, side: str) -> np.ndarray:
        """uint64 neighbour masks of `side`-class vertices in class positions.

        Entry i is the bitmask (over opposite-class positions) of the
        neighbours of the i-th vertex of the chosen class.
        """
        if self.half_size > KERNEL_CLASS_LIMIT:
            raise CapExceededError(
                f"class size {self.half_size} exceeds 64-bit kernel mask limit"
            )
        key = f"masks-{side}"
        if key not in self._scan_cache:
            cls = self.even_class if side == "even" else self.odd_class
            masks = np.zeros(len(cls), dtype=np.uint64)
            for i, v in enumerate(cls):
                bits = 0
                for w in self.neighbors(v):
                    bits |= 1 << int(self._class_pos[w])
                masks[i] = bits
            masks.setflags(write=False)
            self._scan_cache[key] = masks
        return self._scan_cache[key]

    def class_nbr_positions(self, side: str) -> np.ndarray:
        """(M, d) int64 array: row i lists, as opposite-class positions, the
        neighbours of the i-th vertex of `side`'s class."""
        key = f"nbrpos-{side}"
        if key not in self._scan_cache:
            cls = self.even_class if side == "even" else self.odd_class
            out = np.empty((len(cls), self.degree), dtype=np.int64)
            for i, v in enumerate(cls):
                out[i] = [self._class_pos[w] for w in self.neighbors(v)]
            out.setflags(write=False)
            self._scan_cache[key] = out
        return self._scan_cache[key]

    def class_vertex(self, side: str, pos: int) -> int:
        cls = self.even_class if side == "even" else self.odd_class
        return cls[pos]

    def class_position(self, v: int) -> int:
        return int(self._class_pos[v])

    def set_from_class_mask(self, side: str, mask: int) -> VertexSet:
        cls = self.even_class if side == "even" else self.odd_class
        bits = 0
        m = int(mask)
        while m:
            low = m & -m
            bits |= 1 << cls[low.bit_length() - 1]
            m ^= low
        return VertexSet(bits, self.num_vertices)

    def class_mask_of(self, A: VertexSet, side: str | None = None) -> int:
        if side is None:
            side = self.side_of(A)
        mask = 0
        for v in A:
            if (side == "even") != bool(self._is_even[v]):
                raise MixedParityError(f"vertex {v} is not in the {side} class")
            mask |= 1 << int(self._class_pos[v])
        return mask

    def __repr__(self) -> str:
        return (
            f"BipartiteGraph({self.name!r}, N={self.num_vertices}, "
            f"d={self.degree})"
        )


# -- constructors ---------------------------------------------------------


def build_hypercube(d: int) -> BipartiteGraph:
    """The d-dimensional hypercube on {0,1}^d; vertices adjacent iff they
    differ on exactly one coordinate.  Parity class = popcount parity."""
    if not isinstance(d, int) or d < 1:
        raise InvalidParameterError(f"hypercube dimension must be a positive integer, got {d}")
    if (1 << d) > MAX_GRAPH_VERTICES:
        raise InvalidParameterError(
            f"2^{d} vertices exceed construction cap {MAX_GRAPH_VERTICES}"
        )
    n = 1 << d
    adjacency = [[v ^ (1 << i) for i in range(d)] for v in range(n)]
    evens = [v for v in range(n) if v.bit_count() % 2 == 0]
    return BipartiteGraph(adjacency, evens, name=f"hypercube:d={d}")


def build_even_torus(L: int, d: int) -> BipartiteGraph:
    """The even discrete torus on {0..L-1}^d; strings adjacent iff they
    differ by 1 (mod L) on exactly one coordinate.

    L must be even or the coordinate-sum bipartition fails.  For L = 2 the
    +1 and -1 moves coincide; the doubled edges collapse, the graph is
    d-regular and coincides with the d-cube.  For even L >= 4 it is
    2d-regular, and `degree` reports that true regularity degree.
    """
    if not isinstance(L, int) or L < 2:
        raise InvalidParameterError(f"torus side must be an integer >= 2, got {L}")
    if L % 2 != 0:
        raise InvalidParameterError(f"torus side must be even (bipartiteness), got {L}")
    if not isinstance(d, int) or d < 1:
        raise InvalidParameterError(f"torus dimension must be a positive integer, got {d}")
    n = L**d
    if n > MAX_GRAPH_VERTICES:
        raise InvalidParameterError(
            f"{L}^{d} vertices exceed construction cap {MAX_GRAPH_VERTICES}"
        )

    def to_id(coords: tuple[int, ...]) -> int:
        vid = 0
        for c in coords:
            vid = vid * L + c
        return vid

    def coords_of(vid: int) -> list[int]:
        out = []
        for _ in range(d):
            out.append(vid % L)
            vid //= L
        return out[::-1]

    adjacency = []
    evens = []
    for v in range(n):
        cs = coords_of(v)
        nbrs = set()
        for i in range(d):
            for step in (1, L - 1):
                w = cs.copy()
                w[i] = (w[i] + step) % L
                nbrs.add(to_id(tuple(w)))
        adjacency.append(sorted(nbrs))
        if sum(cs) % 2 == 0:
            evens.append(v)
    return BipartiteGraph(adjacency, evens, name=f"torus:L={L},d={d}")


# -- neighbourhoods and closures -----------------------------------------


def neighborhood(g: BipartiteGraph, A: VertexSet, allow_mixed: bool = False) -> VertexSet:
    """N(A) = union of N(w) over w in A.  Single-parity A unless allow_mixed."""
    if not allow_mixed:
        g.side_of(A)  # raises on mixed parity
    bits = 0
    for v in A:
        bits |= g.neighbor_bits(v)
    return VertexSet(bits, g.num_vertices)


def closure(g: BipartiteGraph, A: VertexSet) -> VertexSet:
    """External closure [A] = {x in A's class : N(x) subseteq N(A)}.

    [∅] = ∅ by convention.  Guarantees A ⊆ [A] and N([A]) = N(A).
    """
    side = g.side_of(A)
    if not A:
        return VertexSet.empty(g.num_vertices)
    na = neighborhood(g, A).bits
    cls = g.even_class if side == "even" else g.odd_class
    bits = 0
    for x in cls:
        if g.neighbor_bits(x) & ~na == 0:
            bits |= 1 << x
    return VertexSet(bits, g.num_vertices)


def is_small(g: BipartiteGraph, A: VertexSet) -> bool:
    """True iff 2*|[A]| <= M (the exact form of |[A]| <= M/2)."""
    return 2 * len(closure(g, A)) <= g.half_size


# -- bipartite expansion constant ----------------------------------------


def bipartite_expansion_constant(
    g: BipartiteGraph,
    scan_cap: int = DEFAULT_SCAN_CAP,
    want_argmin: bool = False,
):
    """Exact min of (|N(A)|-|[A]|)/|N(A)| over nonempty small A, both classes.

    Returns a Fraction, or None when no nonempty small set exists (so the
    minimum would run over the empty family).  With want_argmin=True returns
    (delta, argmin_set) instead; the argmin is one attaining set.
    """
    if g.half_size > scan_cap:
        raise CapExceededError(
            f"class size {g.half_size} exceeds the exhaustive scan cap {scan_cap}; "
            "use a known analytic lower bound for this graph instead"
        )
    best: Fraction | None = None
    best_set: VertexSet | None = None
    for side in ("even", "odd"):
        _, num, den, mask = side_scan(g, side)
        if den > 0:
            cand = Fraction(num, den)
            if best is None or cand < best:
                best = cand
                best_set = g.set_from_class_mask(side, mask)
    if want_argmin:
        return best, best_set
    return best


def hypercube_delta_lower_bound(d: int, constant: float) -> float:
    """constant / sqrt(d): the analytic expansion lower-bound shape for the
    d-cube.  The constant is caller configuration, not a published value."""
    if d < 1:
        raise InvalidParameterError("d must be >= 1")
    if constant <= 0:
        raise InvalidParameterError("constant must be positive")
    return constant / sqrt(d)


def side_scan(g: BipartiteGraph, side: str) -> tuple[np.ndarray, int, int, int]:
    """Exhaustive subset scan of one parity class (cached on the graph).

    Returns (hist, num, den, argmin_mask) where hist[s, a, gg] counts the
    subsets A of the scanned class with |A| = s, |[A]| = a, |N(A)| = gg,
    and num/den is the minimum of (gg-a)/gg over nonempty small A
    (den = 0 when no such A exists).
    """
    key = f"scan-{side}"
    if key not in g._scan_cache:
        from .kernels import subset_scan

        if g.half_size > KERNEL_CLASS_LIMIT:
            raise CapExceededError(
                f"class size {g.half_size} exceeds 64-bit kernel mask limit"
            )
        nbr_idx = g.class_nbr_positions(side)
        hist, num, den, mask = subset_scan(nbr_idx, g.half_size, g.half_size)
        hist.setflags(write=False)
        g._scan_cache[key] = (hist, int(num), int(den), int(mask))
    return g._scan_cache[key]


# -- text import/export ----------------------------------------------------

FORMAT_HEADER = "bipartite"


def export_graph_text(g: BipartiteGraph) -> str:
    """Plain-text form: header "bipartite d N", then one line per even
    vertex listing its odd neighbours by id.

    The export canonically relabels: even vertices become ids 0..M-1 (in
    even-class order), odd vertices M..N-1 (in odd-class order).
    """
    lines = [f"{FORMAT_HEADER} {g.degree} {g.num_vertices}"]
    odd_pos = {v: g.half_size + i for i, v in enumerate(g.odd_class)}
    for v in g.even_class:
        lines.append(" ".join(str(odd_pos[w]) for w in g.neighbors(v)))
    return "\n".join(lines) + "\n"


def import_graph_text(text: str, name: str = "file") -> BipartiteGraph:
    """Parse the plain-text format produced by :func:`export_graph_text`."""
    rows = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not rows:
        raise InvalidParameterError("empty graph file")
    head = rows[0].split()
    if len(head) != 3 or head[0] != FORMAT_HEADER:
        raise InvalidParameterError(f"bad header {rows[0]!r}; expected 'bipartite d N'")
    try:
        d, n = int(head[1]), int(head[2])
    except ValueError as exc:
        raise InvalidParameterError(f"bad header numbers in {rows[0]!r}") from exc
    if n <= 0 or n % 2 != 0:
        raise InvalidParameterError(f"vertex count must be positive and even, got {n}")
    m = n // 2
    if len(rows) - 1 != m:
        raise InvalidParameterError(
            f"expected {m} even-vertex lines after the header, got {len(rows) - 1}"
        )
    adjacency: list[list[int]] = [[] for _ in range(n)]
    for i, row in enumerate(rows[1:]):
        try:
            nbrs = [int(tok) for tok in row.split()]
        except ValueError as exc:
            raise InvalidParameterError(f"bad neighbour list on line {i + 2}") from exc
        for w in nbrs:
            if not m <= w < n:
                raise InvalidParameterError(
                    f"even vertex {i} lists neighbour {w} outside the odd range {m}..{n - 1}"
                )
            adjacency[i].append(w)
            adjacency[w].append(i)
    return BipartiteGraph(adjacency, range(m), name=name)


def parse_graph_spec(spec: str) -> BipartiteGraph:
    """Build a graph from a CLI spec:  hypercube:d=4 | torus:L=4,d=2 | file:PATH."""
    kind, _, rest = spec.partition(":")
    if kind == "hypercube":
        params = _parse_kv(rest, {"d"})
        return build_hypercube(int(params["d"]))
    if kind == "torus":
        params = _parse_kv(rest, {"L", "d"})
        return build_even_torus(int(params["L"]), int(params["d"]))
    if kind == "file":
        if not rest:
            raise InvalidParameterError("file: graph spec needs a path")
        with open(rest, "r", encoding="utf-8") as fh:
            return import_graph_text(fh.read(), name=f"file:{rest}")
    raise InvalidParameterError(
        f"unknown graph spec {spec!r}; expected hypercube:d=K, torus:L=K,d=K, or file:PATH"
    )


def _parse_kv(rest: str, required: set[str]) -> dict[str, str]:
    params: dict[str, str] = {}
    for item in rest.split(","):
        key, sep, val = item.partition("=")
        if not sep or not val:
            raise InvalidParameterError(f"bad graph parameter {item!r}")
        params[key.strip()] = val.strip()
    missing = required - params.keys()
    extra = params.keys() - required
    if missing or extra:
        raise InvalidParameterError(
            f"graph spec needs exactly {sorted(required)}, got {sorted(params)}"
        )
    return params
