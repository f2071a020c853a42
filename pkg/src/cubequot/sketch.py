"""Monte Carlo harness for (s, D)-sketchability.

Sketch bits come from a randomly shifted, quantized Gaussian projection:
bit i of x is the parity of floor((<g_i, x> + u_i) / w) with w = 4r.  Two
labels are declared "small" (0) when they differ in fewer than tau * s bits,
where tau is the midpoint of the per-bit disagreement rates measured at
distances r and D r with the same hash functions.

Randomness is counter based: a trial's hash functions come from Philox
streams keyed by (seed, trial, purpose), so trials can be run in any order
and give the same report.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .embed import FiniteMetric, hilbert_sqrt_embed, negative_type_test

THRESHOLD = 3 / 5
WINDOW_FACTOR = 4.0
CALIBRATION_PAIRS = 256
MIN_TRIALS = 100

_PROJ, _OFFSET, _CALIB = 0, 1, 2


def _stream(seed: int, trial: int, purpose: int) -> np.random.Generator:
    ss = np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, trial, purpose])
    return np.random.Generator(np.random.Philox(ss))


@dataclass
class HashDraw:
    """One random sketch map together with its calibrated threshold."""

    proj: np.ndarray  # (s, dim)
    offsets: np.ndarray  # (s,)
    window: float
    tau: float

    @property
    def s(self) -> int:
        return self.proj.shape[0]

    def sketch(self, points: np.ndarray) -> np.ndarray:
        """(n, s) boolean labels."""
        z = (np.atleast_2d(points) @ self.proj.T + self.offsets) / self.window
        return (np.floor(z).astype(np.int64) & 1).astype(bool)

    def decide(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """0 ("small") where labels differ in fewer than tau*s bits, else 1."""
        ham = np.count_nonzero(a != b, axis=-1)
        return (ham >= self.tau * self.s).astype(np.int8)


@dataclass
class SketchScheme:
    s: int
    r: float
    D: float
    seed: int
    dim: int
    window: float
    calibration_pairs: int = CALIBRATION_PAIRS

    def __post_init__(self):
        if self.s < 1:
            raise ValueError("sketch size s must be >= 1")
        if self.r <= 0:
            raise ValueError("scale r must be positive")
        if self.D < 1:
            raise ValueError("gap D must be >= 1")
        if self.dim < 0:
            raise ValueError("dimension must be nonnegative")

    def draw(self, trial: int) -> HashDraw:
        dim = max(self.dim, 1)
        proj = _stream(self.seed, trial, _PROJ).standard_normal((self.s, dim))
        if self.dim == 0:
            proj[:] = 0.0
        offsets = _stream(self.seed, trial, _OFFSET).uniform(0.0, self.window, self.s)
        draw = HashDraw(proj[:, : max(self.dim, 1)], offsets, self.window, 0.5)
        near, far = self._calibrate(draw, trial)
        draw.tau = 0.5 * (near + far)
        return draw

    def _calibrate(self, draw: HashDraw, trial: int) -> tuple[float, float]:
        """Per-bit disagreement rates of ``draw`` at distances r and D r."""
        rng = _stream(self.seed, trial, _CALIB)
        dim = max(self.dim, 1)
        rates = []
        for t in (self.r, self.D * self.r):
            base = rng.standard_normal((self.calibration_pairs, dim)) * self.window
            v = rng.standard_normal((self.calibration_pairs, dim))
            v /= np.linalg.norm(v, axis=1, keepdims=True)
            rates.append(float(np.mean(draw.sketch(base) != draw.sketch(base + t * v))))
        return rates[0], rates[1]

    def params(self) -> dict:
        return {"s": self.s, "r": self.r, "D": self.D, "seed": self.seed, "w": self.window, "dim": self.dim}


def build_euclidean_sketch(points, r: float, D: float, s: int, seed: int) -> SketchScheme:
    """Sketch scheme for a finite point set in R^m at scale r and gap D."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if not np.all(np.isfinite(pts)):
        raise ValueError("points must be finite")
    if r <= 0 or D < 1 or s < 1:
        raise ValueError(f"invalid parameters r={r}, D={D}, s={s}")
    return SketchScheme(int(s), float(r), float(D), int(seed), pts.shape[1], WINDOW_FACTOR * float(r))


@dataclass
class SketchReport:
    near_success: float | None  # worst pair; None when there are no near pairs
    far_success: float | None
    near_mean: float | None
    far_mean: float | None
    trials: int
    near_pairs: int
    far_pairs: int
    r: float
    D: float
    params: dict = field(default_factory=dict)
    tau_mean: float = float("nan")

    @staticmethod
    def _se(p: float | None, trials: int) -> float | None:
        return None if p is None else float(np.sqrt(p * (1 - p) / trials))

    @property
    def near_stderr(self) -> float | None:
        return self._se(self.near_success, self.trials)

    @property
    def far_stderr(self) -> float | None:
        return self._se(self.far_success, self.trials)

    @property
    def near_vacuous(self) -> bool:
        return self.near_pairs == 0

    @property
    def far_vacuous(self) -> bool:
        return self.far_pairs == 0

    def margin(self, side: str) -> float | None:
        """(rate - 3/5) in standard errors; inf for a zero-variance rate above 3/5."""
        p = self.near_success if side == "near" else self.far_success
        if p is None:
            return None
        se = self._se(p, self.trials)
        if se == 0:
            return np.inf if p > THRESHOLD else -np.inf
        return (p - THRESHOLD) / se

    def to_dict(self) -> dict:
        return {
            "near_success": self.near_success,
            "far_success": self.far_success,
            "near_mean": self.near_mean,
            "far_mean": self.far_mean,
            "near_stderr": self.near_stderr,
            "far_stderr": self.far_stderr,
            "near_pairs": self.near_pairs,
            "far_pairs": self.far_pairs,
            "near_vacuous": self.near_vacuous,
            "far_vacuous": self.far_vacuous,
            "trials": self.trials,
            "r": self.r,
            "D": self.D,
            "tau_mean": self.tau_mean,
            "scheme": self.params,
        }


def simulate(scheme: SketchScheme, data, trials: int, kernel=None, r: float | None = None, D: float | None = None) -> SketchReport:
    """Empirical success rates of the sketch over near and far pairs.

    ``data`` is a point array or a FiniteMetric of negative type (sketched
    through its sqrt-embedding).  Pairs are classified by ``kernel``
    (Euclidean distance between the points by default) against ``r`` and
    ``D * r`` (the scheme's own by default); pairs in between are not
    scored.  Each trial draws fresh hash functions.  The reported success
    rates are the worst over pairs, as the definition takes an infimum;
    means over pairs are reported alongside.
    """
    if trials < MIN_TRIALS:
        raise ValueError(f"need at least {MIN_TRIALS} trials, got {trials}")
    if isinstance(data, FiniteMetric):
        pts = hilbert_sqrt_embed(data)
    else:
        pts = np.atleast_2d(np.asarray(data, dtype=np.float64))
    if pts.shape[1] != scheme.dim and not (scheme.dim == 0 and pts.shape[1] == 0):
        raise ValueError(f"scheme built for dimension {scheme.dim}, points have {pts.shape[1]}")
    n = pts.shape[0]
    if kernel is None:
        kernel = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    kernel = np.asarray(kernel, dtype=np.float64)
    r = scheme.r if r is None else float(r)
    D = scheme.D if D is None else float(D)
    iu, ju = np.triu_indices(n, 1)
    K = kernel[iu, ju]
    near = K <= r
    far = K > D * r
    ni, nj = iu[near], ju[near]
    fi, fj = iu[far], ju[far]
    near_hits = np.zeros(ni.size, dtype=np.int64)
    far_hits = np.zeros(fi.size, dtype=np.int64)
    taus = np.empty(trials)
    for t in range(trials):
        draw = scheme.draw(t)
        taus[t] = draw.tau
        if ni.size == 0 and fi.size == 0:
            continue
        bits = draw.sketch(pts) if pts.shape[1] else np.zeros((n, scheme.s), dtype=bool)
        near_hits += draw.decide(bits[ni], bits[nj]) == 0
        far_hits += draw.decide(bits[fi], bits[fj]) == 1

    def summary(hits):
        if hits.size == 0:
            return None, None
        rate = hits / trials
        return float(rate.min()), float(rate.mean())

    ns, nm = summary(near_hits)
    fs, fm = summary(far_hits)
    return SketchReport(ns, fs, nm, fm, trials, int(ni.size), int(fi.size), r, D, scheme.params(), float(taus.mean()))


def sketch_negative_type(M: FiniteMetric, r: float, D: float, s: int, seed: int, trials: int = 1000) -> SketchReport:
    """Sketch a negative-type metric through its sqrt-embedding into l_2.

    The Euclidean sketch runs at scale sqrt(r) with gap sqrt(D); success is
    scored against the original metric's thresholds r and D r.
    """
    ok, lam = negative_type_test(M)
    if not ok:
        raise ValueError(f"metric is not of negative type (min eigenvalue {lam:.3g})")
    pts = hilbert_sqrt_embed(M)
    scheme = build_euclidean_sketch(pts, np.sqrt(r), np.sqrt(D), s, seed)
    return simulate(scheme, pts, trials, kernel=M.d, r=r, D=D)


def bit_disagreement_rate(scheme: SketchScheme, distance: float, trials: int = 200, pairs: int = 64, seed: int = 0) -> tuple[float, float]:
    """Empirical per-bit disagreement at a given Euclidean distance, with its standard error."""
    rng = np.random.default_rng(seed)
    dim = max(scheme.dim, 1)
    vals = []
    for t in range(trials):
        draw = scheme.draw(t)
        base = rng.standard_normal((pairs, dim)) * scheme.window
        v = rng.standard_normal((pairs, dim))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        vals.append(np.mean(draw.sketch(base) != draw.sketch(base + distance * v)))
    vals = np.asarray(vals)
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(vals.size))
