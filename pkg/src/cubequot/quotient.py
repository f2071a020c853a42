"""Coordinate-permutation groups acting on F_2^k and the resulting quotients.

Permutations are tuples of 0-based images: ``g[i]`` is where coordinate ``i``
goes.  Composition follows function composition, ``(g*h)[i] = g[h[i]]``, so
``act(g*h, x) == act(g, act(h, x))``.  Text formats (generator files, the
CLI) use the usual 1-based notation instead.
"""

from __future__ import annotations

import math
import re
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.csgraph import shortest_path

from .cube import MAX_K, popcount

DEFAULT_ORDER_CAP = 1 << 20
DEFAULT_BUDGET = 1 << 30
EXACT_PAIR_K = 14
DEFAULT_SAMPLES = 1_000_000

Perm = tuple


# ----------------------------------------------------------------------------
# permutations and groups


def _validate_perm(perm: Sequence[int], k: int) -> Perm:
    perm = tuple(int(v) for v in perm)
    if len(perm) != k or sorted(perm) != list(range(k)):
        raise ValueError(f"malformed permutation of {k} coordinates: {perm}")
    return perm


def identity_perm(k: int) -> Perm:
    return tuple(range(k))


def compose(g: Perm, h: Perm) -> Perm:
    """g after h."""
    return tuple(g[i] for i in h)


def inverse(g: Perm) -> Perm:
    inv = [0] * len(g)
    for i, gi in enumerate(g):
        inv[gi] = i
    return tuple(inv)


def cycles_to_perm(cycles: Iterable[Sequence[int]], k: int) -> Perm:
    """Build a permutation from 1-based cycles, e.g. ``[(1, 2, 3)]``."""
    img = list(range(k))
    seen: set[int] = set()
    for cyc in cycles:
        cyc = [int(c) - 1 for c in cyc]
        for c in cyc:
            if not 0 <= c < k:
                raise ValueError(f"coordinate {c + 1} out of range 1..{k}")
            if c in seen:
                raise ValueError(f"coordinate {c + 1} appears in two cycles")
            seen.add(c)
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            img[a] = b
    return _validate_perm(img, k)


_CYCLE_RE = re.compile(r"\(([^()]*)\)")


def parse_permutation(text: str, k: int) -> Perm:
    """Parse ``"(1 2 3)(4 5)"`` cycle notation or a 1-based image list ``"2 3 1 4 5"``.

    Entries may be separated by spaces or commas; ``"()"`` is the identity.
    """
    text = text.strip()
    if text.startswith("("):
        if _CYCLE_RE.sub("", text).strip():
            raise ValueError(f"cannot parse cycle notation {text!r}")
        cycles = [
            [int(t) for t in re.split(r"[,\s]+", body.strip()) if t]
            for body in _CYCLE_RE.findall(text)
        ]
        return cycles_to_perm(cycles, k)
    images = [int(t) - 1 for t in re.split(r"[,\s]+", text) if t]
    return _validate_perm(images, k)


def read_generators(path, k: int) -> list[Perm]:
    """Read a generator file: one permutation per line, ``#`` starts a comment."""
    gens = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            gens.append(parse_permutation(line, k))
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
    return gens


def format_cycles(g: Perm) -> str:
    """1-based cycle notation, identity as ``()``."""
    seen, out = set(), []
    for start in range(len(g)):
        if start in seen or g[start] == start:
            continue
        cyc, i = [], start
        while i not in seen:
            seen.add(i)
            cyc.append(i + 1)
            i = g[i]
        out.append("(" + " ".join(map(str, cyc)) + ")")
    return "".join(out) or "()"


@dataclass(frozen=True)
class PermGroup:
    k: int
    generators: tuple[Perm, ...]
    elements: tuple[Perm, ...]
    transitive: bool

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def element_array(self) -> np.ndarray:
        """``(order, k)`` int array of images."""
        return np.array(self.elements, dtype=np.int64).reshape(self.order, self.k)

    def images(self, x: int) -> np.ndarray:
        """gx for every element g, as an int64 array."""
        E = self.element_array
        out = np.zeros(self.order, dtype=np.int64)
        for i in range(self.k):
            if (x >> i) & 1:
                out |= np.int64(1) << E[:, i]
        return out

    def images_many(self, xs: np.ndarray) -> np.ndarray:
        """``(order, len(xs))`` array of g x for all g and all xs."""
        xs = np.asarray(xs, dtype=np.int64)
        E = self.element_array
        out = np.zeros((self.order, xs.size), dtype=np.int64)
        for i in range(self.k):
            bit = ((xs >> i) & 1).astype(np.int64)
            out |= bit[None, :] << E[:, i][:, None]
        return out


def group_from_generators(k: int, gens: Iterable[Sequence[int]], order_cap: int = DEFAULT_ORDER_CAP) -> PermGroup:
    """Enumerate the group generated by ``gens`` by breadth-first closure.

    Raises instead of truncating when the order would exceed ``order_cap``.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if order_cap < 1:
        raise ValueError("order_cap must be >= 1")
    gens = tuple(_validate_perm(g, k) for g in gens)
    e = identity_perm(k)
    seen = {e}
    elements = [e]
    queue = deque([e])
    while queue:
        h = queue.popleft()
        for g in gens:
            gh = compose(g, h)
            if gh not in seen:
                if len(seen) >= order_cap:
                    raise OverflowError(
                        f"group order exceeds order_cap={order_cap}; raise the cap to continue"
                    )
                seen.add(gh)
                elements.append(gh)
                queue.append(gh)

    orbit = {0}
    frontier = [0]
    while frontier:
        i = frontier.pop()
        for g in gens:
            if g[i] not in orbit:
                orbit.add(g[i])
                frontier.append(g[i])
    return PermGroup(k, gens, tuple(elements), len(orbit) == k)


def cyclic_shift(k: int) -> Perm:
    """The shift (1, 2, ..., k): coordinate i moves to i + 1."""
    return tuple((i + 1) % k for i in range(k))


def trivial_group(k: int) -> PermGroup:
    return group_from_generators(k, [])


def cyclic_group(k: int) -> PermGroup:
    return group_from_generators(k, [cyclic_shift(k)])


def dihedral_group(k: int) -> PermGroup:
    reflection = tuple(k - 1 - i for i in range(k))
    return group_from_generators(k, [cyclic_shift(k), reflection])


def symmetric_group(k: int, order_cap: int = DEFAULT_ORDER_CAP) -> PermGroup:
    gens = [cyclic_shift(k)]
    if k > 1:
        gens.append(cycles_to_perm([(1, 2)], k))
    return group_from_generators(k, gens, order_cap)


def make_group(spec: str, k: int, generators_file=None, order_cap: int = DEFAULT_ORDER_CAP) -> PermGroup:
    """Named constructor: ``cyclic``, ``dihedral``, ``symmetric``, ``trivial`` or ``file``."""
    if generators_file is not None or spec == "file":
        if generators_file is None:
            raise ValueError("group 'file' needs a generators file")
        return group_from_generators(k, read_generators(generators_file, k), order_cap)
    builders = {
        "cyclic": lambda: cyclic_group(k),
        "dihedral": lambda: dihedral_group(k),
        "symmetric": lambda: symmetric_group(k, order_cap),
        "trivial": lambda: trivial_group(k),
    }
    if spec not in builders:
        raise ValueError(f"unknown group {spec!r}; expected one of {sorted(builders)} or 'file'")
    return builders[spec]()


def act(g: Sequence[int], x: int) -> int:
    """gx = (x_{g^-1(1)}, ..., x_{g^-1(k)}): bit i of x moves to position g[i]."""
    out = 0
    for i, gi in enumerate(g):
        if (x >> i) & 1:
            out |= 1 << gi
    return out


# ----------------------------------------------------------------------------
# quotients


@dataclass
class QuotientSpace:
    group: PermGroup
    reps: np.ndarray
    orbit_of: np.ndarray
    orbit_sizes: np.ndarray
    dist: np.ndarray | None = None

    @property
    def k(self) -> int:
        return self.group.k

    @property
    def q(self) -> int:
        return len(self.reps)

    @property
    def measure(self) -> np.ndarray:
        """Orbit masses under the normalized counting measure."""
        return self.orbit_sizes / float(1 << self.k)

    def ensure_distances(self) -> np.ndarray:
        if self.dist is None:
            self.dist = quotient_distance_matrix(self)
        return self.dist

    def members(self, a: int) -> np.ndarray:
        return np.flatnonzero(self.orbit_of == a)

    def lift(self, orbits) -> np.ndarray:
        """Boolean mask on F_2^k of the union of the given orbit indices."""
        sel = np.zeros(self.q, dtype=bool)
        sel[np.asarray(list(orbits), dtype=np.int64)] = True
        return sel[self.orbit_of]

    def edge_weights(self) -> np.ndarray:
        """Pair weights (1/k) sum_j E_x [pair (G(x+e_j), Gx)], as a q x q matrix."""
        k, q = self.k, self.q
        x = np.arange(1 << k, dtype=np.int64)
        w = np.zeros((q, q))
        for j in range(k):
            np.add.at(w, (self.orbit_of[x ^ (1 << j)], self.orbit_of), 1.0)
        return w / (k * float(1 << k))

    def report(self, include_distances: bool = False) -> dict:
        out = {
            "k": self.k,
            "group_order": self.group.order,
            "transitive": self.group.transitive,
            "orbit_count": self.q,
            "orbit_sizes": [int(s) for s in self.orbit_sizes],
            "representatives": [int(r) for r in self.reps],
        }
        if include_distances:
            out["distances"] = self.ensure_distances().astype(int).tolist()
        return out


def canonical_reps(G: PermGroup, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """Numerically minimal element of the orbit of every x in F_2^k."""
    k = G.k
    if k > MAX_K:
        raise ValueError(f"k={k} exceeds max_k={MAX_K}")
    if G.order * (1 << k) > budget:
        raise MemoryError(
            f"|G| * 2^k = {G.order * (1 << k)} exceeds the compute budget {budget}"
        )
    x = np.arange(1 << k, dtype=np.int64)
    best = x.copy()
    bits = [((x >> i) & 1) for i in range(k)]
    for g in G.elements:
        gx = np.zeros_like(x)
        for i, gi in enumerate(g):
            gx |= bits[i] << gi
        np.minimum(best, gx, out=best)
    return best


def build_quotient(G: PermGroup, with_distances: bool = False, budget: int = DEFAULT_BUDGET) -> QuotientSpace:
    canon = canonical_reps(G, budget)
    reps, orbit_of = np.unique(canon, return_inverse=True)
    sizes = np.bincount(orbit_of, minlength=len(reps))
    Q = QuotientSpace(G, reps.astype(np.int64), orbit_of.astype(np.int64), sizes.astype(np.int64))
    if with_distances:
        Q.dist = quotient_distance_matrix(Q, budget)
    return Q


def quotient_distance(G: PermGroup, x: int, y: int) -> int:
    """min over g in G of the Hamming distance between gx and y."""
    for v in (x, y):
        if v < 0 or v >> G.k:
            raise ValueError(f"{v} is not a point of F_2^{G.k}")
    return int(popcount(G.images(x) ^ np.int64(y)).min())


def quotient_distance_matrix(Q: QuotientSpace, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """Min-over-group distances between all orbit representatives."""
    q, order = Q.q, Q.group.order
    if q * q * order > budget:
        raise MemoryError(f"q^2 |G| = {q * q * order} exceeds the compute budget {budget}")
    imgs = Q.group.images_many(Q.reps)  # (order, q)
    D = np.empty((q, q), dtype=np.int64)
    chunk = max(1, (1 << 22) // max(1, order * q))
    for s in range(0, q, chunk):
        block = imgs[:, s : s + chunk]  # (order, c)
        d = popcount(block[:, :, None] ^ Q.reps[None, None, :]).min(axis=0)
        D[s : s + chunk] = d
    return D


def quotient_distance_bfs(Q: QuotientSpace) -> np.ndarray:
    """Shortest paths on the graph joining orbit(x) and orbit(x + e_j)."""
    k = Q.k
    x = np.arange(1 << k, dtype=np.int64)
    rows = np.concatenate([Q.orbit_of] * k)
    cols = np.concatenate([Q.orbit_of[x ^ (1 << j)] for j in range(k)])
    keep = rows != cols
    adj = coo_matrix((np.ones(int(keep.sum())), (rows[keep], cols[keep])), shape=(Q.q, Q.q)).tocsr()
    D = shortest_path(adj, method="D", directed=False, unweighted=True)
    if not np.all(np.isfinite(D)):
        raise ArithmeticError("quotient graph is disconnected")
    return D.astype(np.int64)


# ----------------------------------------------------------------------------
# measures


@dataclass
class OrbitPairMeasure:
    q: int
    weights: np.ndarray
    stderr: np.ndarray | None = None
    exact: bool = True
    samples: int = 0

    def marginals(self) -> tuple[np.ndarray, np.ndarray]:
        return self.weights.sum(axis=1), self.weights.sum(axis=0)


def noise_smooth(h: np.ndarray, p: float) -> np.ndarray:
    """(T h)(x) = sum_y p^d(x,y) (1-p)^(k-d(x,y)) h(y), along axis 0.

    Applied one coordinate at a time, i.e. the product form of the kernel;
    this never goes through the Fourier transform.
    """
    h = np.array(h, dtype=np.float64, copy=True)
    n = h.shape[0]
    tail = h.shape[1:]
    step = 1
    while step < n:
        v = h.reshape((n // (2 * step), 2, step) + tail)
        a0 = v[:, 0].copy()
        a1 = v[:, 1].copy()
        v[:, 0] = (1 - p) * a0 + p * a1
        v[:, 1] = p * a0 + (1 - p) * a1
        step *= 2
    return h


def theta_mass(k: int, p: float, left: np.ndarray, right: np.ndarray) -> float:
    """theta^p(left x right) for boolean masks on F_2^k, evaluated exactly."""
    _check_p(p)
    smoothed = noise_smooth(np.asarray(right, dtype=np.float64), p)
    return float(np.dot(np.asarray(left, dtype=np.float64), smoothed)) / float(1 << k)


def _check_p(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"noise rate p must lie in [0, 1], got {p}")


def pushforward_theta(
    Q: QuotientSpace,
    p: float,
    exact_limit: int = EXACT_PAIR_K,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
) -> OrbitPairMeasure:
    """theta^p pushed down to pairs of orbits.

    Exact for ``k <= exact_limit``; otherwise estimated from ``samples`` draws
    of (x, x + noise) with per-entry standard errors.
    """
    _check_p(p)
    k, q = Q.k, Q.q
    if k <= exact_limit:
        W = np.zeros((q, q))
        n = 1 << k
        P = csr_matrix((np.ones(n), (Q.orbit_of, np.arange(n))), shape=(q, n))
        chunk = max(1, (1 << 22) // n)
        for s in range(0, q, chunk):
            cols = np.arange(s, min(q, s + chunk))
            ind = (Q.orbit_of[:, None] == cols[None, :]).astype(np.float64)
            W[:, cols] = P @ noise_smooth(ind, p)
        return OrbitPairMeasure(q, W / float(n))
    if samples < 1:
        raise ValueError("samples must be positive")
    rng = np.random.default_rng(seed)
    x = rng.integers(0, 1 << k, size=samples, dtype=np.int64)
    flips = np.zeros(samples, dtype=np.int64)
    for j in range(k):
        flips |= (rng.random(samples) < p).astype(np.int64) << j
    y = x ^ flips
    W = np.zeros((q, q))
    np.add.at(W, (Q.orbit_of[x], Q.orbit_of[y]), 1.0)
    W /= samples
    return OrbitPairMeasure(q, W, np.sqrt(W * (1 - W) / samples), exact=False, samples=samples)


@dataclass
class PairFraction:
    value: float
    stderr: float
    exact: bool
    samples: int
    bound: float = field(default=float("nan"))
    hypothesis_holds: bool = True

    @property
    def within_bound(self) -> bool:
        return self.value <= self.bound


def far_pair_estimate(
    Q: QuotientSpace,
    eta: float,
    exact_limit: int = EXACT_PAIR_K,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
) -> PairFraction:
    """Fraction of pairs (x, y) whose quotient distance is at most eta * k.

    ``bound`` is 2^(-k/3); ``hypothesis_holds`` records whether
    |G| <= 2^(k/2), the regime where that bound is expected.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    k = Q.k
    radius = eta * k
    bound = 2.0 ** (-k / 3)
    ok = Q.group.order <= 2.0 ** (k / 2)
    if Q.dist is not None or k <= exact_limit:
        D = Q.ensure_distances()
        close = D <= radius + 1e-12
        s = Q.orbit_sizes.astype(np.float64)
        val = float(s @ close.astype(np.float64) @ s) / float(1 << (2 * k))
        return PairFraction(val, 0.0, True, 0, bound, ok)
    if samples < 1:
        raise ValueError("samples must be positive")
    rng = np.random.default_rng(seed)
    x = rng.integers(0, 1 << k, size=samples, dtype=np.int64)
    y = rng.integers(0, 1 << k, size=samples, dtype=np.int64)
    hits = 0
    chunk = max(1, (1 << 22) // Q.group.order)
    for s in range(0, samples, chunk):
        imgs = Q.group.images_many(x[s : s + chunk])
        d = popcount(imgs ^ y[None, s : s + chunk]).min(axis=0)
        hits += int(np.count_nonzero(d <= radius + 1e-12))
    val = hits / samples
    return PairFraction(val, math.sqrt(val * (1 - val) / samples), False, samples, bound, ok)


def far_pair_fraction(Q: QuotientSpace, eta: float, **kw) -> float:
    return far_pair_estimate(Q, eta, **kw).value


def is_metric(D: np.ndarray) -> bool:
    """Exact metric axioms for an integer distance matrix."""
    D = np.asarray(D)
    n = D.shape[0]
    if not np.array_equal(D, D.T):
        return False
    if np.any(np.diag(D) != 0) or np.any(D[~np.eye(n, dtype=bool)] <= 0):
        return False
    for m in range(n):
        if np.any(D > D[:, m][:, None] + D[m, :][None, :]):
            return False
    return True
