"""Shannon's 1959 sphere-packing lower bound and its pulsed-jamming extension.

For a code of length ``n`` and rate ``R`` the bound is the probability that
white Gaussian noise pushes the transmitted point outside a circular cone of
half-angle ``theta`` around it, where the cone's solid angle is the fraction
``2**(-nR)`` of the whole sphere.  With the signal at distance ``sqrt(n) A``
(``A**2 = 2 R Eb/N0``), the noise split into its axial part ``x`` and the
norm of the ``n - 1`` orthogonal components::

    P = Phi(-sqrt(n) A) + int_0^inf phi(x - sqrt(n) A) Qchi2_{n-1}((x tan theta)^2) dx

Everything is carried in the log domain so very small bounds stay finite.
"""

from dataclasses import dataclass
from math import inf, lgamma, log, pi, sqrt

import numpy as np
from scipy import integrate, optimize, special

LOG_HALF = log(0.5)


class BoundError(RuntimeError):
    """Quadrature failed to converge."""


def _log_cap_fraction(theta: float, n: int) -> float:
    """log of (solid angle of a cone of half-angle theta) / (full solid angle)."""
    a = (n - 1) / 2.0
    s2 = np.sin(theta) ** 2
    if s2 == 0.0:
        return -inf if theta < 1.0 else 0.0
    inc = special.betainc(a, 0.5, s2)
    # 1 - inc from the complementary form, accurate when inc is near 1
    comp = special.betainc(0.5, a, np.cos(theta) ** 2) if inc > 0.5 else 1.0 - inc
    if theta <= pi / 2:
        return LOG_HALF + (log(inc) if inc <= 0.5 else float(np.log1p(-comp)))
    return LOG_HALF + float(np.log1p(comp))


def cone_half_angle(n: int, rate: float) -> float:
    """Solve cap_fraction(theta) = 2**(-n rate) by bisection."""
    target = -n * rate * log(2.0)
    if target > LOG_HALF:
        raise ValueError("n * rate must be >= 1")
    lo, hi = 1e-300, pi / 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _log_cap_fraction(mid, n) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * hi:
            break
    return 0.5 * (lo + hi)


def _log_gammaincc(a: float, z: float) -> float:
    """log of the regularized upper incomplete gamma function."""
    q = special.gammaincc(a, z)
    if q > 1e-250:
        return log(q)
    # continued fraction (modified Lentz) for z > a + 1
    tiny = 1e-300
    b = z + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        d = tiny if abs(d) < tiny else d
        c = b + an / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            break
    else:
        raise BoundError("incomplete gamma continued fraction did not converge")
    return -z + a * log(z) - lgamma(a) + log(h)


def _log_norm_pdf(x: float) -> float:
    return -0.5 * x * x - 0.5 * log(2.0 * pi)


@dataclass(frozen=True)
class _Sp59Problem:
    n: int
    mu: float
    tan_theta: float

    def log_integrand(self, x: float) -> float:
        a = (self.n - 1) / 2.0
        z = 0.5 * (x * self.tan_theta) ** 2
        return _log_norm_pdf(x - self.mu) + _log_gammaincc(a, z)

    def log_tail(self) -> float:
        return special.log_ndtr(-self.mu)

    def peak(self):
        hi = self.mu + 40.0
        grid = np.linspace(0.0, hi, 801)
        vals = np.array([self.log_integrand(x) for x in grid])
        i = int(np.argmax(vals))
        lo_b, hi_b = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
        if hi_b > lo_b:
            res = optimize.minimize_scalar(lambda x: -self.log_integrand(x), bounds=(lo_b, hi_b),
                                           method="bounded", options={"xatol": 1e-10})
            if -res.fun > vals[i]:
                return float(res.x), float(-res.fun)
        return float(grid[i]), float(vals[i])


def _problem(rate: float, n: int, ebn0_db: float) -> _Sp59Problem:
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 0.0 < rate <= 1.0:
        raise ValueError("rate must lie in (0, 1]")
    if not np.isfinite(ebn0_db):
        raise ValueError("Eb/N0 must be finite")
    theta = cone_half_angle(n, rate)
    A = sqrt(2.0 * rate * 10.0 ** (ebn0_db / 10.0))
    return _Sp59Problem(n, sqrt(n) * A, float(np.tan(theta)))


def _combine(log_int: float, log_tail: float) -> float:
    return float(np.logaddexp(log_int, log_tail))


def log_sp59(rate: float, n: int, ebn0_db: float, method: str = "adaptive") -> float:
    """Natural log of the SP59 bound.  ``method`` is ``"adaptive"`` (QUADPACK)
    or ``"fixed"`` (composite Gauss-Legendre on a truncated window)."""
    prob = _problem(rate, n, ebn0_db)
    x0, lmax = prob.peak()

    def f(x):
        return np.exp(prob.log_integrand(x) - lmax)

    if method == "adaptive":
        pts = [max(x0, 1e-12)]
        left, e1 = integrate.quad(f, 0.0, pts[0], epsabs=1e-10, epsrel=1e-10, limit=500)
        right, e2 = integrate.quad(f, pts[0], inf, epsabs=1e-10, epsrel=1e-10, limit=500)
        val, err = left + right, e1 + e2
        if not np.isfinite(val) or val <= 0 or err > 1e-6 * val + 1e-10:
            raise BoundError(f"adaptive quadrature did not converge (value {val}, error {err})")
    elif method == "fixed":
        # window where the integrand is within exp(-60) of its peak
        lo = x0
        step = 0.25
        while lo > 0.0 and prob.log_integrand(lo) - lmax > -60.0:
            lo = max(lo - step, 0.0)
            step *= 1.5
        hi = x0
        step = 0.25
        while prob.log_integrand(hi) - lmax > -60.0:
            hi += step
            step *= 1.5
        nodes, weights = np.polynomial.legendre.leggauss(40)
        edges = np.linspace(lo, hi, 257)
        val = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            xs = 0.5 * (b - a) * nodes + 0.5 * (a + b)
            val += 0.5 * (b - a) * float(np.dot(weights, [f(x) for x in xs]))
        if not np.isfinite(val) or val <= 0:
            raise BoundError("fixed-order quadrature produced a non-positive value")
    else:
        raise ValueError(f"unknown quadrature method {method!r}")
    return _combine(lmax + log(val), prob.log_tail())


def sp59(rate: float, n: int, ebn0_db: float, method: str = "adaptive") -> float:
    """Shannon 1959 sphere-packing lower bound on the codeword error rate."""
    return float(np.exp(log_sp59(rate, n, ebn0_db, method)))


def combined_ebn0_db(ebn0_db: float, ebj0_db: float, rho: float) -> float:
    """Eb/N0 equivalent to thermal noise plus in-pulse jamming."""
    if ebj0_db == inf:
        return ebn0_db
    inv = 10.0 ** (-ebn0_db / 10.0) + 1.0 / (10.0 ** (ebj0_db / 10.0) * rho)
    return -10.0 * np.log10(inv)


def esplb(rate: float, n: int, ebn0_db: float, ebj0_db: float, rho: float, method: str = "adaptive") -> float:
    """Sphere-packing bound for pulsed jamming with pulses spanning whole codewords,
    no interleaving and perfect jammer state information."""
    if not 0.0 < rho <= 1.0:
        raise ValueError("rho must lie in (0, 1]")
    jammed = sp59(rate, n, combined_ebn0_db(ebn0_db, ebj0_db, rho), method)
    if rho == 1.0:
        return jammed
    return rho * jammed + (1.0 - rho) * sp59(rate, n, ebn0_db, method)


def interpolate_crossing(x_db, values, target: float) -> float:
    """dB value where a decreasing curve crosses ``target``, by linear
    interpolation of ``log10(values)``.  Returns nan when not bracketed."""
    x = np.asarray(x_db, dtype=float)
    v = np.asarray(values, dtype=float)
    lt = np.log10(target)
    for i in range(len(x) - 1):
        a, b = v[i], v[i + 1]
        if a > 0 and b > 0 and (a - target) * (b - target) <= 0 and a != b:
            la, lb = np.log10(a), np.log10(b)
            return float(x[i] + (lt - la) * (x[i + 1] - x[i]) / (lb - la))
    return float("nan")


def bound_crossing(fn, target: float, lo: float, hi: float) -> float:
    """Solve ``fn(x) = target`` for a decreasing ``fn`` by bisection on [lo, hi]."""
    f_lo, f_hi = fn(lo), fn(hi)
    if not f_hi <= target <= f_lo:
        return float("nan")
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if fn(mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-6:
            break
    return 0.5 * (lo + hi)


def gap_db(sim_x_db, sim_values, bound_fn, target: float, lo: float = -10.0, hi: float = 40.0) -> float:
    """dB distance between a simulated curve and a bound at a fixed error rate."""
    return interpolate_crossing(sim_x_db, sim_values, target) - bound_crossing(bound_fn, target, lo, hi)
