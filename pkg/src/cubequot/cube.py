"""Bit-level primitives and Fourier analysis on the Hamming cube F_2^k.

Points of F_2^k are Python ints / numpy integer arrays read as bitmasks:
bit ``j`` (0-based) holds coordinate ``j + 1``.  Subsets ``A`` of the
coordinates are bitmasks too, so the Walsh function is

    W_A(x) = (-1) ** popcount(A & x).

All integrals are against the normalized counting measure ``mu`` on the cube.
The analysis transform therefore divides by ``2**k`` and the synthesis
transform is an unweighted sum.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

MAX_K = 24
PARSEVAL_TOL = 1e-9

__all__ = [
    "MAX_K",
    "CubeFunction",
    "Spectrum",
    "popcount",
    "hamming_distance",
    "walsh_eval",
    "walsh_function",
    "wht",
    "fwht",
    "spectrum",
    "convolve",
    "variance",
    "check_invariance",
    "save_cube_function",
    "load_cube_function",
]


def popcount(a):
    """Number of set bits, elementwise for arrays."""
    if isinstance(a, (int, np.integer)):
        return int(a).bit_count()
    return np.bitwise_count(np.asarray(a))


def _check_k(k: int, max_k: int = MAX_K) -> None:
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ValueError(f"dimension k must be a positive integer, got {k!r}")
    if k > max_k:
        raise ValueError(f"k={k} exceeds the dense-array cap max_k={max_k}")


def _check_point(x: int, k: int, what: str = "point") -> None:
    if x < 0 or x >> k:
        raise ValueError(f"{what} {x} is not a bitmask of length k={k}")


@dataclass(frozen=True)
class CubeFunction:
    """A real function on F_2^k stored densely; ``values[x]`` is f(x)."""

    k: int
    values: np.ndarray

    def __post_init__(self):
        _check_k(self.k)
        vals = np.array(self.values, dtype=np.float64)
        if vals.shape != (1 << self.k,):
            raise ValueError(
                f"expected {1 << self.k} values for k={self.k}, got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("CubeFunction values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, k: int, fn) -> "CubeFunction":
        return cls(k, np.array([fn(x) for x in range(1 << k)], dtype=np.float64))

    @classmethod
    def indicator(cls, k: int, points) -> "CubeFunction":
        vals = np.zeros(1 << k)
        vals[np.asarray(list(points), dtype=np.int64)] = 1.0
        return cls(k, vals)

    @classmethod
    def sign_of(cls, k: int, mask: np.ndarray) -> "CubeFunction":
        """The +-1 function ``(-1) ** 1_Omega`` for a boolean mask of Omega."""
        mask = np.asarray(mask, dtype=bool)
        return cls(k, np.where(mask, -1.0, 1.0))

    @property
    def size(self) -> int:
        return 1 << self.k

    def mean(self) -> float:
        return float(self.values.mean())

    def l2_norm(self) -> float:
        """Norm in L_2(mu)."""
        return float(np.sqrt(np.mean(self.values**2)))

    def __add__(self, other: "CubeFunction") -> "CubeFunction":
        _same_k(self, other)
        return CubeFunction(self.k, self.values + other.values)

    def __sub__(self, other: "CubeFunction") -> "CubeFunction":
        _same_k(self, other)
        return CubeFunction(self.k, self.values - other.values)

    def __mul__(self, c: float) -> "CubeFunction":
        return CubeFunction(self.k, self.values * float(c))

    __rmul__ = __mul__


@dataclass(frozen=True)
class Spectrum:
    """Fourier coefficients; ``coeffs[A]`` is the coefficient at subset A."""

    k: int
    coeffs: np.ndarray

    def __post_init__(self):
        _check_k(self.k)
        c = np.array(self.coeffs, dtype=np.float64)
        if c.shape != (1 << self.k,):
            raise ValueError(
                f"expected {1 << self.k} coefficients for k={self.k}, got shape {c.shape}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def levels(self) -> np.ndarray:
        """|A| for every index A."""
        return popcount(np.arange(1 << self.k, dtype=np.int64))

    def energy(self) -> float:
        return float(np.sum(self.coeffs**2))


def _same_k(a, b) -> None:
    if a.k != b.k:
        raise ValueError(f"dimension mismatch: k={a.k} vs k={b.k}")


def hamming_distance(x: int, y: int, k: int | None = None, k_y: int | None = None) -> int:
    """Hamming distance between two points given as bitmasks.

    ``k`` and ``k_y`` are the dimensions the two points live in; when both
    are given they must agree.
    """
    if k is not None and k_y is not None and k != k_y:
        raise ValueError(f"dimension mismatch: k={k} vs k={k_y}")
    if k is not None:
        _check_point(x, k)
        _check_point(y, k)
    return (int(x) ^ int(y)).bit_count()


def walsh_eval(A: int, x: int, k: int | None = None) -> int:
    """W_A(x) in {-1, +1}."""
    if k is not None:
        _check_point(A, k, "subset")
        _check_point(x, k)
    return -1 if (int(A) & int(x)).bit_count() & 1 else 1


def walsh_function(A: int, k: int) -> CubeFunction:
    _check_point(A, k, "subset")
    x = np.arange(1 << k, dtype=np.int64)
    return CubeFunction(k, 1.0 - 2.0 * (popcount(A & x) & 1))


def fwht(a: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard butterfly along axis 0.

    Returns ``out[A] = sum_x a[x] * W_A(x)``.  Extra trailing axes are
    transformed independently.  Fixed stage order, so results do not depend
    on anything but the input.
    """
    a = np.array(a, dtype=np.float64, copy=True)
    n = a.shape[0]
    if n < 1 or n & (n - 1):
        raise ValueError(f"transform length must be a power of two, got {n}")
    tail = a.shape[1:]
    h = 1
    while h < n:
        v = a.reshape((n // (2 * h), 2, h) + tail)
        lo = v[:, 0].copy()
        v[:, 0] += v[:, 1]
        v[:, 1] = lo - v[:, 1]
        h *= 2
    return a


def wht(f, direction: str = "analysis"):
    """Walsh-Hadamard transform in O(k 2^k).

    ``analysis`` maps a CubeFunction to its Spectrum (dividing by 2**k);
    ``synthesis`` maps a Spectrum back to a CubeFunction.
    """
    if direction == "analysis":
        if not isinstance(f, CubeFunction):
            f = _from_raw(f, CubeFunction)
        return Spectrum(f.k, fwht(f.values) / f.size)
    if direction == "synthesis":
        if not isinstance(f, Spectrum):
            f = _from_raw(f, Spectrum)
        return CubeFunction(f.k, fwht(f.coeffs))
    raise ValueError(f"direction must be 'analysis' or 'synthesis', got {direction!r}")


def _from_raw(values, cls):
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[0] if values.ndim == 1 else 0
    if n < 2 or n & (n - 1):
        raise ValueError(f"size must be a power of two >= 2, got {values.shape}")
    return cls(n.bit_length() - 1, values)


def spectrum(f: CubeFunction) -> Spectrum:
    return wht(f, "analysis")


def convolve(f: CubeFunction, g: CubeFunction) -> CubeFunction:
    """(f*g)(x) = E_y f(y) g(x+y), computed as a product of spectra."""
    _same_k(f, g)
    prod = spectrum(f).coeffs * spectrum(g).coeffs
    return wht(Spectrum(f.k, prod), "synthesis")


def variance(f: CubeFunction, tol: float = PARSEVAL_TOL) -> float:
    """Var_mu[f], cross-checked against the nonconstant Fourier mass."""
    direct = float(np.mean(f.values**2) - np.mean(f.values) ** 2)
    c = spectrum(f).coeffs
    fourier = float(np.sum(c[1:] ** 2))
    scale = max(1.0, float(np.mean(f.values**2)))
    if abs(direct - fourier) > tol * scale:
        raise ArithmeticError(
            f"variance mismatch: direct {direct!r} vs Fourier {fourier!r}"
        )
    return max(fourier, 0.0)


def permutation_of_points(perm: Sequence[int], k: int) -> np.ndarray:
    """Image of every point of F_2^k under the coordinate permutation ``perm``.

    ``perm[i]`` is the 0-based image of coordinate ``i``.  The point gx has
    coordinate ``perm[i]`` equal to coordinate ``i`` of x.
    """
    x = np.arange(1 << k, dtype=np.int64)
    out = np.zeros_like(x)
    for i, gi in enumerate(perm):
        out |= ((x >> i) & 1) << int(gi)
    return out


def check_invariance(f: CubeFunction, perm: Sequence[int]) -> bool:
    """True iff f(gy) == f(y) for every y, compared exactly."""
    perm = list(perm)
    if sorted(perm) != list(range(f.k)):
        raise ValueError(f"{perm} is not a permutation of {f.k} coordinates")
    gy = permutation_of_points(perm, f.k)
    return bool(np.array_equal(f.values[gy], f.values))


# Serialization.  Text layout:
#   line 1: "cubefunction <version> <k>"
#   then 2**k lines, one repr() float per line (shortest round-trip repr).
# Binary layout: magic b"CUBF", uint32 version, uint32 k, then 2**k
# little-endian float64 values.

FORMAT_VERSION = 1
_MAGIC = b"CUBF"


def save_cube_function(f: CubeFunction, path, binary: bool = False) -> None:
    path = Path(path)
    if binary:
        with path.open("wb") as fh:
            fh.write(_MAGIC + struct.pack("<II", FORMAT_VERSION, f.k))
            fh.write(f.values.astype("<f8").tobytes())
        return
    lines = [f"cubefunction {FORMAT_VERSION} {f.k}"]
    lines.extend(repr(float(v)) for v in f.values)
    path.write_text("\n".join(lines) + "\n")


def load_cube_function(path) -> CubeFunction:
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] == _MAGIC:
        version, k = struct.unpack("<II", raw[4:12])
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported cubefunction version {version}")
        vals = np.frombuffer(raw[12:], dtype="<f8")
        return CubeFunction(k, vals.astype(np.float64))
    lines = raw.decode().split()
    if len(lines) < 3 or lines[0] != "cubefunction":
        raise ValueError(f"{path}: not a cubefunction file")
    version, k = int(lines[1]), int(lines[2])
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported cubefunction version {version}")
    return CubeFunction(k, np.array([float(v) for v in lines[3:]]))
