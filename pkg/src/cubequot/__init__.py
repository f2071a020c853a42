"""Fourier analysis on F_2^k, coordinate-permutation quotients, l_1 distortion and sketching."""

__version__ = "0.1.0"
