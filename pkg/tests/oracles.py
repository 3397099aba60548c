"""Independent reference implementations used as test oracles."""
import math

import numpy as np
from hypothesis import strategies as st

from orbitcascade.stability import PolicyParams


def random_triple(rng, stable, scale=1.0, margin_frac=(0.05, 0.95)):
    """A pairwise triple with alpha2 > alpha3 > 0 on the requested side of the boundary.

    ``margin_frac`` keeps alpha1 a fixed fraction away from the boundary value
    (alpha2² - alpha3²)/2 so verdicts are not decided by rounding.
    """
    a2 = rng.uniform(0.5, 2.0) * scale
    a3 = rng.uniform(0.1, 0.9) * a2
    lim = 0.5 * (a2**2 - a3**2)
    lo, hi = margin_frac
    a1 = lim * (1.0 - rng.uniform(lo, hi)) if stable else lim * (1.0 + rng.uniform(lo, 2.0))
    return PolicyParams(a1, a2, a3)


def dense_ring_matrix(p, n, kind="pairwise"):
    """Assemble the 2n x 2n system matrix of the linearized ring, interleaved state."""
    a1, a2, a3 = p.as_tuple()
    A = np.zeros((2 * n, 2 * n))
    for i in range(n):
        lead = (i - 1) % n
        nxt = (i + 1) % n
        th, om = 2 * i, 2 * i + 1
        A[th, 2 * lead + 1] += 1.0
        A[th, om] -= 1.0
        if kind == "pairwise":
            A[om, th] += a1
            A[om, om] -= a2
            A[om, 2 * lead + 1] += a3
        else:
            A[om, th] += a1
            A[om, 2 * nxt] -= a1
            A[om, 2 * lead + 1] += a3
            A[om, om] -= 2 * a3
            A[om, 2 * nxt + 1] += a3
    return A


def multiset_distance(a, b):
    """Max distance under the best matching of two equal-size complex multisets."""
    from scipy.optimize import linear_sum_assignment

    a = np.asarray(a)
    b = np.asarray(b)
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())


def brute_force_min_spacing(P, S, F):
    total = P * S
    phases = [
        (2 * math.pi * k / S + 2 * math.pi * F * p / total) % (2 * math.pi)
        for p in range(P)
        for k in range(S)
    ]
    best = 2 * math.pi
    for i in range(len(phases)):
        for j in range(i + 1, len(phases)):
            d = abs(phases[i] - phases[j]) % (2 * math.pi)
            best = min(best, d, 2 * math.pi - d)
    return best


@st.composite
def policy_triples(draw, stable=None):
    a2 = draw(st.floats(0.05, 20.0))
    a3 = a2 * draw(st.floats(0.01, 0.99))
    lim = 0.5 * (a2**2 - a3**2)
    if stable is None:
        f = draw(st.floats(0.01, 3.0))
    elif stable:
        f = draw(st.floats(0.01, 0.99))
    else:
        f = draw(st.floats(1.01, 3.0))
    return PolicyParams(lim * f, a2, a3)


def random_tle_record(rng):
    """A TleRecord whose every field is exactly representable in the fixed-column layout.

    Decimal fields are drawn as integers and scaled, so the value the emitter
    prints is the value the parser reads back.
    """
    from orbitcascade.ingest import TleRecord, with_checksums

    def implied(rng):
        if rng.random() < 0.1:
            return 0.0
        mant = int(rng.integers(10000, 100000))
        exp = int(rng.integers(-9, 10))
        sign = "-" if rng.random() < 0.5 else ""
        return float(f"{sign}0.{mant:05d}e{exp}")

    letters = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
    piece = "".join(rng.choice(list(letters), size=int(rng.integers(1, 4))))
    rec = TleRecord(
        norad_id=int(rng.integers(0, 100000)),
        classification=str(rng.choice(["U", "C", "S"])),
        intl_designator=f"{int(rng.integers(0, 100)):02d}{int(rng.integers(1, 1000)):03d}{piece}",
        epoch_year=int(rng.integers(1957, 2057)),
        epoch_day=int(rng.integers(100_000_000, 36_700_000_000)) / 1e8,
        ndot=float(int(rng.integers(-99_999_999, 100_000_000))) / 1e8,
        nddot=implied(rng),
        bstar=implied(rng),
        ephemeris_type=int(rng.integers(0, 10)),
        element_set_no=int(rng.integers(0, 10000)),
        inclination_deg=int(rng.integers(0, 1_800_001)) / 1e4,
        raan_deg=int(rng.integers(0, 3_600_000)) / 1e4,
        eccentricity=int(rng.integers(0, 10**7)) / 1e7,
        arg_perigee_deg=int(rng.integers(0, 3_600_000)) / 1e4,
        mean_anomaly_deg=int(rng.integers(0, 3_600_000)) / 1e4,
        mean_motion_rev_day=int(rng.integers(1_000_000_00, 1_700_000_000)) / 1e8,
        rev_number=int(rng.integers(0, 100000)),
        line1_checksum=0,
        line2_checksum=0,
    )
    return with_checksums(rec)


def mutate_checksum_digits(text):
    """Every two-line text obtained by replacing one checksum digit with a different digit."""
    lines = text.split("\n")
    out = []
    for li in range(2):
        orig = lines[li][68]
        for d in "0123456789":
            if d != orig:
                new = list(lines)
                new[li] = lines[li][:68] + d
                out.append((li + 1, "\n".join(new)))
    return out


def imag_axis_sweep_sup(p, points=20001):
    """sup over μ > 0 of |H(iμ)| by a dense log grid refined with a bounded 1-D search.

    Uses only the rational transfer function, never the closed-form resonance.
    """
    from scipy.optimize import minimize_scalar

    a1, a2, a3 = p.as_tuple()
    lo = 1e-4 * min(math.sqrt(a1), a2, a1 / a2)
    hi = 1e4 * max(math.sqrt(a1), a2, a1 / a3)
    x = np.linspace(math.log(lo), math.log(hi), points)

    def gain(logmu):
        s = 1j * np.exp(logmu)
        return np.abs((a1 + a3 * s) / (a1 + a2 * s + s * s))

    g = gain(x)
    j = int(np.argmax(g))
    best = float(g[j])
    if 0 < j < points - 1:
        res = minimize_scalar(lambda v: -float(gain(v)), bounds=(x[j - 1], x[j + 1]),
                              method="bounded", options={"xatol": 1e-13})
        best = max(best, -float(res.fun))
    return best


def exact_charpoly_roots(A, digits=40):
    """Eigenvalues of a float matrix via its exact rational characteristic polynomial.

    The matrix entries are converted to rationals without rounding, the
    polynomial is formed symbolically, and its roots are found at ``digits``
    decimal digits.
    """
    import mpmath
    import sympy

    M = sympy.Matrix(A.shape[0], A.shape[1], [sympy.Rational(float(v)) for v in A.ravel()])
    lam = sympy.Symbol("lam")
    coeffs = sympy.Poly(M.charpoly(lam).as_expr(), lam).all_coeffs()
    with mpmath.workdps(digits):
        roots = mpmath.polyroots([mpmath.mpf(sympy.Rational(c).p) / sympy.Rational(c).q for c in coeffs],
                                 maxsteps=2000, extraprec=4 * digits)
        return np.array([complex(r) for r in roots])
