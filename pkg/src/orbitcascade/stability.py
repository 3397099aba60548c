"""Closed-form stability analysis of the cascaded maneuver ring.

Covers the pairwise stability condition, forward and bilateral collision
transfer functions, the block-circulant eigenvalues of the ring, lifetime
(maneuver-count) formulas, the minimum safe spacing and the resulting
constellation size bound.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, HorizonError, PoleError, SingularityError


@dataclass(frozen=True)
class PolicyParams:
    """Linearized sensitivities of a maneuver policy.

    alpha1: to the safe distance (1/s^2)
    alpha2: to the satellite's own mean motion (1/s)
    alpha3: to the relative velocity with its leader (1/s)
    """

    alpha1: float
    alpha2: float
    alpha3: float

    def __post_init__(self):
        for name in ("alpha1", "alpha2", "alpha3"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite")
            object.__setattr__(self, name, float(v))
        if self.alpha1 <= 0:
            raise DomainError("alpha1 must be > 0")
        if self.alpha3 <= 0:
            raise DomainError("alpha3 must be > 0")

    def require_pairwise(self) -> None:
        if not self.alpha2 > self.alpha3:
            raise DomainError("pairwise analysis requires alpha2 > alpha3 > 0")

    @property
    def margin(self) -> float:
        return self.alpha2**2 - self.alpha3**2 - 2.0 * self.alpha1

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.alpha1, self.alpha2, self.alpha3)


@dataclass(frozen=True)
class StabilityVerdict:
    stable: bool
    margin: float
    max_real_eig: Optional[float] = None


@dataclass(frozen=True)
class ComplexGain:
    re: float
    im: float

    def __post_init__(self):
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise DomainError("transfer gain is not finite")

    def __complex__(self):
        return complex(self.re, self.im)

    def __abs__(self):
        return math.hypot(self.re, self.im)

    @classmethod
    def of(cls, z: complex) -> "ComplexGain":
        z = complex(z)
        return cls(z.real, z.imag)


def stability_verdict(p: PolicyParams, n: Optional[int] = None) -> StabilityVerdict:
    """Any-size stability of the pairwise ring: ``alpha2² - alpha3² - 2 alpha1 >= 0``.

    If ``n`` is given, the largest non-structural eigenvalue real part of the
    ``n``-satellite ring is reported alongside.
    """
    p.require_pairwise()
    margin = p.margin
    mre = max_real_part(p, n) if n is not None else None
    return StabilityVerdict(stable=bool(margin >= 0.0), margin=margin, max_real_eig=mre)


def _pole_check(den: complex) -> None:
    if abs(den) == 0.0:
        raise PoleError("transfer function evaluated at a pole")


def transfer_gain(p: PolicyParams, lam: complex) -> ComplexGain:
    """Forward collision transfer function (α1 + α3 λ)/(α1 + α2 λ + λ²)."""
    lam = complex(lam)
    if math.isinf(abs(lam)):
        return ComplexGain(0.0, 0.0)
    num = p.alpha1 + p.alpha3 * lam
    den = p.alpha1 + p.alpha2 * lam + lam * lam
    _pole_check(den)
    return ComplexGain.of(num / den)


def bilateral_transfer_gain(p: PolicyParams, lam: complex) -> ComplexGain:
    """Bilateral transfer function (α1 + α3 λ)/(2α1 + 2α3 λ + λ²)."""
    lam = complex(lam)
    if math.isinf(abs(lam)):
        return ComplexGain(0.0, 0.0)
    num = p.alpha1 + p.alpha3 * lam
    den = 2.0 * p.alpha1 + 2.0 * p.alpha3 * lam + lam * lam
    _pole_check(den)
    return ComplexGain.of(num / den)


def sup_gain_imag_axis(p: PolicyParams) -> float:
    """sup over real μ of |H(iμ)|.

    With s = μ², |H|² = (α1² + α3² s)/(s² + (α2² - 2α1) s + α1²). Its stationary
    point solves α3² s² + 2α1² s + α1²·margin = 0, which has a positive root only
    when the margin is negative; otherwise the sup is |H(0)| = 1.
    """
    a1, a2, a3 = p.as_tuple()
    margin = p.margin
    if margin >= 0.0:
        return 1.0
    s = (-(a1**2) + math.sqrt(a1**4 - a3**2 * a1**2 * margin)) / a3**2
    num = a1**2 + a3**2 * s
    den = s * s + (a2**2 - 2.0 * a1) * s + a1**2
    return math.sqrt(num / den)


def _stable_quadratic_roots(b: np.ndarray, c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Roots of λ² + bλ + c = 0 without cancellation (complex, vectorized)."""
    disc = np.sqrt(b * b - 4.0 * c + 0j)
    # pick the sign that makes |b + sign·disc| large
    sgn = np.where((np.conj(b) * disc).real >= 0.0, 1.0, -1.0)
    q = -0.5 * (b + sgn * disc)
    r1 = q
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = np.where(q != 0, c / np.where(q != 0, q, 1.0), 0.0)
    return r1, r2


def ring_block_roots(p: PolicyParams, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-block eigenvalue pairs, block ``i`` (0-based) using ``z^((n-1)i mod n)``."""
    if int(n) != n or n < 2:
        raise DomainError("ring size n must be an integer >= 2")
    p.require_pairwise()
    i = np.arange(n)
    k = ((n - 1) * i) % n
    zk = np.exp(2j * np.pi * k / n)
    zk[k == 0] = 1.0
    b = p.alpha2 - p.alpha3 * zk
    c = p.alpha1 * (1.0 - zk)
    return _stable_quadratic_roots(b, c)


def _sort_eigs(lams: np.ndarray) -> np.ndarray:
    order = np.lexsort((lams.imag, lams.real))
    return lams[order]


def ring_eigenvalues(p: PolicyParams, n: int) -> np.ndarray:
    """All 2n eigenvalues of the pairwise ring matrix, ascending real part."""
    r1, r2 = ring_block_roots(p, n)
    return _sort_eigs(np.concatenate([r1, r2]))


def _non_structural(p: PolicyParams, n: int) -> np.ndarray:
    r1, r2 = ring_block_roots(p, n)
    # block 0 is z^0 = 1: roots are exactly -(α2-α3) and 0; drop the zero
    zero_first = abs(r1[0]) <= abs(r2[0])
    head = np.array([r2[0] if zero_first else r1[0]])
    return np.concatenate([head, r1[1:], r2[1:]])


def max_real_part(p: PolicyParams, n: int) -> float:
    """Largest eigenvalue real part, excluding the single uniform-rotation zero mode."""
    return float(np.max(_non_structural(p, n).real))


def lifetime_time_of_nth(
    h_gain: float, t0: float, n_maneuvers: int, at_unity: bool = False
) -> float:
    """Time at which the N-th cascaded maneuver is triggered.

    t(N) = t0 (1 - h^-N) / (1 - h^-1). At h = 1 the formula is singular; pass
    ``at_unity=True`` to get the limit N·t0 instead of an error.
    """
    if not h_gain > 0:
        raise DomainError("h_gain must be positive")
    if not t0 > 0:
        raise DomainError("t0 must be positive")
    if n_maneuvers < 1:
        raise DomainError("n_maneuvers must be >= 1")
    if h_gain == 1.0:
        if at_unity:
            return n_maneuvers * t0
        raise SingularityError("h_gain = 1 is singular; pass at_unity=True for N*t0")
    inv = 1.0 / h_gain
    return t0 * (1.0 - inv**n_maneuvers) / (1.0 - inv)


def blowup_horizon(h_gain: float, t0: float) -> float:
    """Finite time at which the maneuver count diverges (h > 1)."""
    if not h_gain > 1.0:
        raise DomainError("blow-up horizon exists only for h_gain > 1")
    return t0 / (1.0 - 1.0 / h_gain)


def maneuver_count(h_gain: float, t0: float, t: float) -> float:
    """Number of maneuvers triggered by time t (real-valued inverse of t(N))."""
    if not h_gain > 1.0:
        raise DomainError("maneuver_count requires h_gain > 1")
    if not t0 > 0:
        raise DomainError("t0 must be positive")
    if t < 0:
        raise DomainError("t must be non-negative")
    if t >= blowup_horizon(h_gain, t0):
        raise HorizonError("t is at or beyond the blow-up horizon")
    return math.log(t0 / (t0 - t * (1.0 - 1.0 / h_gain))) / math.log(h_gain)


def _spacing_gain(p: PolicyParams, lam: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Spacing response per unit rate deviation, |Δθ/ω| = |1 - z|/|λ|, of ring mode (λ, z).

    Equals |(1 - H(λ))/λ| wherever H(λ) = z. Evaluating it from z stays exact
    when α1 = α3(α2 - α3), where H has a cancelling pole-zero pair and the
    rational form is 0/0. The structural mode (λ = 0, z = 1) takes its limit
    (α2 - α3)/α1 along the locus.
    """
    lam, z = np.broadcast_arrays(np.asarray(lam), np.asarray(z))
    mag = np.abs(lam)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.abs(1.0 - z) / mag
    return np.where(mag == 0.0, (p.alpha2 - p.alpha3) / p.alpha1, g)


def _locus_root(p: PolicyParams, phi: np.ndarray) -> np.ndarray:
    """Both roots of H(λ) = e^{iφ}, stacked along a new first axis."""
    z = np.exp(1j * np.asarray(phi, dtype=float))
    b = p.alpha2 - p.alpha3 * z
    c = p.alpha1 * (1.0 - z)
    r1, r2 = _stable_quadratic_roots(b, c)
    return np.stack([r1, r2])


def _locus_gain(p: PolicyParams, phi: np.ndarray) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    z = np.exp(1j * phi)
    z = np.where(phi == 0.0, 1.0 + 0j, z)
    return np.max(_spacing_gain(p, _locus_root(p, phi), z), axis=0)


def safe_distance_bound(p: PolicyParams, c_max: float, n: Optional[int] = None) -> float:
    """Minimum safe spacing (rad) for a stable pairwise policy.

    With ``n`` given, maximizes the spacing gain over the non-structural ring
    modes with negative real part. Without ``n``, the maximum is taken over the
    whole eigenvalue locus {λ : H(λ) = e^{iφ}}, which bounds every ring size.
    """
    p.require_pairwise()
    if not p.margin >= 0.0:
        raise DomainError("safe distance is defined only for stable policies")
    if not c_max > 0:
        raise DomainError("c_max must be positive")
    if n is not None:
        r1, r2 = ring_block_roots(p, n)
        k = ((n - 1) * np.arange(n)) % n
        z = np.exp(2j * np.pi * k / n)
        z[k == 0] = 1.0
        lams = np.concatenate([r1, r2])
        zs = np.concatenate([z, z])
        # drop the single structural zero of the z = 1 block
        zero_first = abs(r1[0]) <= abs(r2[0])
        keep = np.ones(2 * n, dtype=bool)
        keep[0 if zero_first else n] = False
        lams, zs = lams[keep], zs[keep]
        decaying = lams.real < 0
        if not decaying.any():
            raise DomainError("no decaying ring modes")
        return float(c_max * np.max(_spacing_gain(p, lams[decaying], zs[decaying])))
    return c_max * _locus_sup(p)


def _locus_sup(p: PolicyParams) -> float:
    phi = np.linspace(0.0, 2.0 * np.pi, 4097)
    g = _locus_gain(p, phi)
    j = int(np.argmax(g))
    best = float(g[j])
    lo, hi = phi[max(j - 1, 0)], phi[min(j + 1, phi.size - 1)]
    if hi > lo:
        res = minimize_scalar(
            lambda x: -float(_locus_gain(p, np.array([x]))[0]),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-12},
        )
        best = max(best, -float(res.fun))
    return best


def safe_gain_imag_axis(p: PolicyParams) -> float:
    """sup over real μ of |(1 - H(iμ))/(iμ)|, closed form in s = μ²."""
    a1, a2, a3 = p.as_tuple()
    b2 = (a2 - a3) ** 2
    c = a2**2 - 2.0 * a1
    disc = b2 * b2 + a1**2 - b2 * c
    s = max(0.0, -b2 + math.sqrt(max(disc, 0.0)))
    return math.sqrt((s + b2) / (s * s + c * s + a1**2))


def capacity_bound(
    delta_theta_safe: float, phase_factor_f: int, per_sat_gbps: float = 20.0
) -> tuple[int, float]:
    """Largest constellation size strictly below 2πF/Δθ_safe, and its capacity.

    A ratio within a few ulps of an integer k is taken to be exactly k, so a
    spacing given as 2πF/k yields k - 1 whichever way the division rounded.
    """
    if not delta_theta_safe > 0:
        raise DomainError("delta_theta_safe must be positive")
    if int(phase_factor_f) != phase_factor_f or phase_factor_f < 1:
        raise DomainError("phase_factor_f must be an integer >= 1")
    ratio = 2.0 * math.pi * phase_factor_f / delta_theta_safe
    nearest = round(ratio)
    if abs(ratio - nearest) <= 4.0 * sys.float_info.epsilon * ratio:
        ratio = float(nearest)
    max_sats = max(0, math.ceil(ratio) - 1)
    return max_sats, max_sats * per_sat_gbps
