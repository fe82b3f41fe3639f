"""Truncated Laurent series on the unit circle and the Riemann splitting operators.

A function on the circle is stored by its values at the 2N roots of unity
``lam_j = exp(2 pi i j / 2N)``.  Its modes ``c_k``, ``k = -N .. N-1``, satisfy
``phi(lam_j) = sum_k c_k lam_j**k``.  Mode ``-N`` doubles as the Nyquist mode
and is always treated as a negative (outside-analytic) mode.

The private ``_*`` kernels act on the last axis of an array so that a batch of
independent problems can be processed in one call; the public functions wrap
them for single :class:`CircleFunction` values.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import constants
from .errors import (
    NearZeroOnCircle,
    NonzeroIndex,
    PhaseJumpTooLarge,
    SpectralTailWarning,
    TArgumentOutOfDisk,
)


def circle_points(N: int) -> np.ndarray:
    """The 2N sample points on the unit circle."""
    M = 2 * N
    return np.exp(2j * np.pi * np.arange(M) / M)


def mode_numbers(N: int) -> np.ndarray:
    """Integer mode index of each FFT slot (0..N-1, -N..-1)."""
    M = 2 * N
    return np.rint(np.fft.fftfreq(M) * M).astype(int)


def _to_modes(samples):
    return np.fft.fft(samples, axis=-1) / samples.shape[-1]


def _to_samples(modes):
    return np.fft.ifft(modes, axis=-1) * modes.shape[-1]


def _split_modes(modes):
    """Coefficient-space H+/H-: modes = lam*hp + hm."""
    N = modes.shape[-1] // 2
    hp = np.zeros_like(modes)
    hp[..., : N - 1] = modes[..., 1:N]
    hm = np.where(mode_numbers(N) <= 0, modes, 0.0)
    return hp, hm


def _h_split(samples):
    hp, hm = _split_modes(_to_modes(samples))
    return _to_samples(hp), _to_samples(hm)


def _project_plus(samples):
    """Drop negative modes."""
    N = samples.shape[-1] // 2
    modes = _to_modes(samples)
    return _to_samples(np.where(mode_numbers(N) >= 0, modes, 0.0))


def _project_minus(samples):
    """Drop positive modes."""
    N = samples.shape[-1] // 2
    modes = _to_modes(samples)
    return _to_samples(np.where(mode_numbers(N) <= 0, modes, 0.0))


def _phase_increments(samples, floor=constants.INDEX_FLOOR, jump_max=constants.PHASE_JUMP_MAX):
    """Phase increments between cyclically adjacent samples.

    Raises when a sample is below ``floor`` or an increment exceeds ``jump_max``.
    For batched input the checks are reported through the returned mask instead.
    """
    mags = np.abs(samples)
    near_zero = np.any(mags <= floor, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.angle(np.roll(samples, -1, axis=-1) / samples)
    too_coarse = np.any(np.abs(d) >= jump_max, axis=-1)
    return d, near_zero, too_coarse


def _winding(samples, floor=constants.INDEX_FLOOR, jump_max=constants.PHASE_JUMP_MAX):
    """Batched winding numbers plus failure masks (near_zero, too_coarse)."""
    d, near_zero, too_coarse = _phase_increments(samples, floor, jump_max)
    n = np.rint(np.sum(d, axis=-1) / (2 * np.pi)).astype(int)
    return n, near_zero, too_coarse


def _continuous_log(samples):
    """log along the samples with the phase unwrapped by nearest-branch selection.

    Only periodic when the winding number is zero.
    """
    d = np.angle(np.roll(samples, -1, axis=-1) / samples)
    phase0 = np.angle(samples[..., :1])
    phase = phase0 + np.concatenate(
        [np.zeros_like(phase0), np.cumsum(d[..., :-1], axis=-1)], axis=-1
    )
    return np.log(np.abs(samples)) + 1j * phase


def _mult_split(samples):
    """M+/M- on samples: phi = mplus/mminus with mplus(0) = 1 (index must be 0)."""
    psi = _continuous_log(samples)
    hp, hm = _split_modes(_to_modes(psi))
    lam_hp = np.roll(hp, 1, axis=-1)  # multiplication by lam; hp[N-1] is 0 so nothing wraps
    return np.exp(_to_samples(lam_hp)), np.exp(-_to_samples(hm))


def _birkhoff(samples, floor=constants.INDEX_FLOOR, jump_max=constants.PHASE_JUMP_MAX):
    """Batched phi = lam**n * aplus/aminus; returns (n, aplus, aminus, near_zero, too_coarse)."""
    n, near_zero, too_coarse = _winding(samples, floor, jump_max)
    N = samples.shape[-1] // 2
    lam = circle_points(N)
    reduced = samples * lam ** (-n[..., None])
    ap, am = _mult_split(reduced)
    return n, ap, am, near_zero, too_coarse


@dataclass(frozen=True, eq=False)
class CircleFunction:
    """An analytic function on the unit circle, held by its 2N samples."""

    samples: np.ndarray

    def __post_init__(self):
        s = np.array(self.samples, dtype=complex)
        if s.ndim != 1 or s.size < 2 or s.size % 2:
            raise ValueError("need an even, positive number of samples")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    # construction
    @classmethod
    def from_function(cls, f: Callable[[np.ndarray], np.ndarray], N: int = constants.DEFAULT_N):
        lam = circle_points(N)
        return cls(np.broadcast_to(np.asarray(f(lam), dtype=complex), lam.shape))

    @classmethod
    def from_modes(cls, modes, N: int | None = None):
        """From a ``{k: c_k}`` mapping (needs N) or an array ordered k = -N..N-1."""
        if isinstance(modes, dict):
            if N is None:
                raise ValueError("N is required for dict input")
            c = np.zeros(2 * N, dtype=complex)
            for k, v in modes.items():
                if not -N <= k < N:
                    raise ValueError(f"mode {k} outside [-{N}, {N - 1}]")
                c[k % (2 * N)] = v
        else:
            c = np.fft.ifftshift(np.asarray(modes, dtype=complex))
        return cls(_to_samples(c))

    @classmethod
    def constant(cls, c, N: int = constants.DEFAULT_N):
        return cls(np.full(2 * N, c, dtype=complex))

    @classmethod
    def monomial(cls, k: int, c=1.0, N: int = constants.DEFAULT_N):
        return cls.from_function(lambda lam: c * lam**k, N)

    # views
    @property
    def N(self) -> int:
        return self.samples.size // 2

    @property
    def points(self) -> np.ndarray:
        return circle_points(self.N)

    @property
    def fft_modes(self) -> np.ndarray:
        return _to_modes(self.samples)

    @property
    def modes(self) -> np.ndarray:
        """Coefficients ordered k = -N .. N-1."""
        return np.fft.fftshift(self.fft_modes)

    @property
    def ks(self) -> np.ndarray:
        return np.arange(-self.N, self.N)

    def mode(self, k: int) -> complex:
        return complex(self.fft_modes[k % (2 * self.N)])

    def __call__(self, lam):
        """Evaluate the Laurent series at arbitrary nonzero points."""
        lam = np.asarray(lam, dtype=complex)
        zero = lam == 0
        with np.errstate(all="ignore"):
            out = np.sum(self.modes * np.where(zero, 1, lam)[..., None] ** self.ks, axis=-1)
        # at 0 only a Taylor series makes sense: its value is the mode-0 coefficient
        return np.where(zero, self.fft_modes[0], out)

    def taylor(self, lam):
        """Sum of the modes ``k >= 0`` only: the value of a plus-function inside the disk.

        Roundoff in the (ideally zero) negative modes would be amplified by ``lam**k``.
        """
        lam = np.asarray(lam, dtype=complex)
        c = self.fft_modes[: self.N]
        return np.polynomial.polynomial.polyval(lam, c)

    def laurent_minus(self, mu):
        """Sum of the modes ``k <= 0`` only: a minus-function outside the disk."""
        mu = np.asarray(mu, dtype=complex)
        c = np.concatenate([self.fft_modes[:1], self.fft_modes[: self.N - 1: -1]])
        return np.polynomial.polynomial.polyval(1 / mu, c)

    def tail_fraction(self) -> float:
        a = np.abs(self.fft_modes)
        total = a.sum()
        if total == 0.0:
            return 0.0
        tail = np.abs(mode_numbers(self.N)) >= constants.TAIL_START * self.N
        return float(a[tail].sum() / total)

    def check_tail(self, ratio: float = constants.TAIL_RATIO) -> bool:
        ok = self.tail_fraction() < ratio
        if not ok:
            warnings.warn(
                f"spectral tail holds {self.tail_fraction():.2e} of the mode mass",
                SpectralTailWarning,
                stacklevel=2,
            )
        return ok

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.samples)))

    # arithmetic is pointwise on samples
    def _other(self, other):
        if isinstance(other, CircleFunction):
            if other.N != self.N:
                raise ValueError("truncation orders differ")
            return other.samples
        return other

    def __add__(self, other):
        return CircleFunction(self.samples + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return CircleFunction(self.samples - self._other(other))

    def __rsub__(self, other):
        return CircleFunction(self._other(other) - self.samples)

    def __mul__(self, other):
        return CircleFunction(self.samples * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return CircleFunction(self.samples / self._other(other))

    def __rtruediv__(self, other):
        return CircleFunction(self._other(other) / self.samples)

    def __neg__(self):
        return CircleFunction(-self.samples)

    def times_lambda_power(self, n: int) -> "CircleFunction":
        return CircleFunction(self.samples * self.points**n)

    def __repr__(self):
        return f"CircleFunction(N={self.N}, max|.|={self.max_abs():.3g})"


def h_split(phi: CircleFunction) -> tuple[CircleFunction, CircleFunction]:
    """Additive splitting ``phi = lam*hplus + hminus``.

    ``hplus`` keeps modes k >= 0 (``hplus_k = phi_{k+1}``), ``hminus`` keeps k <= 0.
    """
    hp, hm = _h_split(phi.samples)
    return CircleFunction(hp), CircleFunction(hm)


def winding_index(
    phi: CircleFunction,
    floor: float = constants.INDEX_FLOOR,
    jump_max: float = constants.PHASE_JUMP_MAX,
) -> int:
    """Winding number of ``phi`` around 0 from the accumulated sample phase."""
    n, near_zero, too_coarse = _winding(phi.samples, floor, jump_max)
    if near_zero:
        raise NearZeroOnCircle(f"|phi| <= {floor:g} at a sample")
    if too_coarse:
        raise PhaseJumpTooLarge("adjacent samples differ in phase by more than the allowed jump")
    return int(n)


def mult_split(phi: CircleFunction) -> tuple[CircleFunction, CircleFunction]:
    """Multiplicative splitting ``phi = mplus/mminus`` of an index-0 function.

    ``mplus`` is analytic and invertible inside with ``mplus(0) = 1``; ``mminus``
    is analytic and invertible outside.  The identity holds exactly on the samples;
    the mode supports hold up to the aliasing of the log, which the tail check bounds.
    """
    n = winding_index(phi)
    if n != 0:
        raise NonzeroIndex(f"index is {n}, expected 0")
    mp, mm = _mult_split(phi.samples)
    return CircleFunction(mp), CircleFunction(mm)


def birkhoff_factor(phi: CircleFunction) -> tuple[int, CircleFunction, CircleFunction]:
    """``phi = lam**n * aplus/aminus`` with n the winding index."""
    n = winding_index(phi)
    aplus, aminus = mult_split(phi.times_lambda_power(-n))
    return n, aplus, aminus


def compose_gluing(g, sigma: CircleFunction, derivative: bool = False) -> CircleFunction:
    """Sample-wise ``lam -> g(lam, sigma(lam))`` (or ``dg/dt`` with ``derivative=True``)."""
    lam = sigma.points
    if not np.all(g.t_ok(lam, sigma.samples)):
        raise TArgumentOutOfDisk(f"sigma leaves the t-disk of radius {g.delta:g}")
    f = g.dt if derivative else g.eval
    return CircleFunction(f(lam, sigma.samples))
