"""One-dimensional probability laws with exact tails and partial moments.

Every law used by the tail-bound machinery lives here: two-point laws,
finite lattices, binomial-type sums, centered (optionally scaled) Poisson
laws, Gaussians, Weibulls, and empirical samples.  The operations the
bound evaluators need are

* ``survival(t)``            P(X > t)
* ``plus_moment(t, a)``      E[(X - t)_+^a]   for a in {0} or [1, 8]
* ``neg_plus_moment(t)``     E[(t - X)_+]
* ``mean_var()``             first two moments
* ``quantile(p)``            inf{x : P(X <= x) >= p}
* ``partial_quantile_integral(u)``  integral of the quantile function on [0, u]
* ``log_mgf(lam)``           log E[exp(lam X)]

and they are either closed form or carry truncation error far below
1e-12 of total mass.  All distributions are immutable after construction
and every method is pure, so instances are safe to share across threads.
"""

from __future__ import annotations

import csv
import math
from typing import Sequence

import numpy as np
from scipy import integrate, special

__all__ = [
    "Dist",
    "TwoPoint",
    "Lattice",
    "BinomSum",
    "CenteredPoisson",
    "Gaussian",
    "Weibull",
    "Empirical",
    "DistError",
    "UnsupportedOrder",
    "DivergentMoment",
    "MGFDiverges",
    "ParseError",
    "parse_dist",
    "convolve_iid",
    "MAX_ORDER",
]

MAX_ORDER = 8.0

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_SQRT_HALF_PI = math.sqrt(0.5 * math.pi)

# Poisson supports are truncated once the remaining tail drops below this.
_POISSON_TAIL = 1e-15

# Continuous laws are reduced to this many mean-preserving bins when a
# finite-support view is required (splicing, lattice convolution).
_FINITE_VIEW_ATOMS = 4096


class DistError(Exception):
    """Base class for distribution-layer failures."""


class UnsupportedOrder(DistError):
    """Raised when a partial-moment order is outside {0} union [1, 8]."""


class DivergentMoment(DistError):
    """Raised when a requested moment does not exist for the law."""


class MGFDiverges(DistError):
    """Raised when E[exp(lam X)] is infinite for every lam > 0."""


class ParseError(DistError):
    """Distribution mini-language rejection, carrying token and position."""

    def __init__(self, message: str, text: str, position: int):
        self.text = text
        self.position = position
        super().__init__(f"{message} at position {position} in {text!r}")


def _validate_order(alpha: float) -> float:
    alpha = float(alpha)
    if alpha == 0.0:
        return 0.0
    if 1.0 <= alpha <= MAX_ORDER:
        return alpha
    raise UnsupportedOrder(
        f"order {alpha} outside the supported range {{0}} union [1, {MAX_ORDER:g}]"
    )


def _phi(z: float) -> float:
    return math.exp(-0.5 * z * z) / _SQRT_2PI


def _norm_sf(z: float) -> float:
    return 0.5 * math.erfc(z / math.sqrt(2.0))


# ---------------------------------------------------------------------------
# Base class
# ---------------------------------------------------------------------------


class Dist:
    """Immutable one-dimensional law.  Subclasses fill in the kernel ops."""

    kind: str = "abstract"

    # -- core queries -------------------------------------------------------

    def survival(self, t: float) -> float:
        """P(X > t), non-increasing in t, valued in [0, 1]."""
        raise NotImplementedError

    def cdf(self, x: float) -> float:
        return 1.0 - self.survival(x)

    def plus_moment(self, t: float, alpha: float) -> float:
        """E[(X - t)_+^alpha] with the convention 0^0 = 0 below t.

        Order 0 therefore coincides with ``survival``.
        """
        raise NotImplementedError

    def neg_plus_moment(self, t: float) -> float:
        """E[(t - X)_+], the first-order lower partial moment."""
        raise NotImplementedError

    def mean_var(self) -> tuple[float, float]:
        raise NotImplementedError

    def mean(self) -> float:
        return self.mean_var()[0]

    def quantile(self, p: float) -> float:
        """Generalized inverse inf{x : F(x) >= p}.

        p = 0 and p = 1 return the support endpoints, with ``-inf`` /
        ``+inf`` markers for unbounded laws.
        """
        raise NotImplementedError

    def partial_quantile_integral(self, u: float) -> float:
        """Integral of the quantile function over [0, u]; equals the mean at u=1."""
        raise NotImplementedError

    def upper_mean_integral(self, c: float) -> float:
        """E[X 1{X > c}]; used for mean-preserving discretizations."""
        raise NotImplementedError

    def log_mgf(self, lam: float) -> float:
        """log E[exp(lam X)], or +inf when the expectation diverges at lam."""
        raise NotImplementedError

    def negate(self) -> "Dist":
        """Law of -X."""
        raise NotImplementedError

    # -- structure ----------------------------------------------------------

    def is_finite(self) -> bool:
        return False

    def atoms(self) -> tuple[np.ndarray, np.ndarray]:
        raise DistError(f"{self.kind} law has no finite atom list")

    def finite_view(self, n_atoms: int = _FINITE_VIEW_ATOMS) -> "Lattice":
        """Finite-support stand-in for the law.

        Exact for finitely supported kinds.  Continuous kinds are reduced
        to ``n_atoms`` probability bins, each represented by an atom at
        the bin's conditional mean, so the total mean is preserved exactly
        up to the <= 1e-12 mass dropped in the extreme tails.
        """
        if self.is_finite():
            xs, ps = self.atoms()
            return Lattice(xs, ps, _validated=True)
        return _bin_continuous(self, n_atoms)


# ---------------------------------------------------------------------------
# Finitely supported laws
# ---------------------------------------------------------------------------


class _FiniteDist(Dist):
    """Shared kernel for laws with a finite, sorted support."""

    __slots__ = ("xs", "ps", "_cdf", "_sf", "_mean", "_m2")

    def _init_arrays(self, xs, ps, validated: bool = False):
        xs = np.asarray(xs, dtype=np.float64)
        ps = np.asarray(ps, dtype=np.float64)
        if xs.ndim != 1 or xs.shape != ps.shape or xs.size == 0:
            raise ValueError("support and probabilities must be equal-length 1-D arrays")
        if not validated:
            if np.any(ps < -1e-15):
                raise ValueError("negative probability mass")
            order = np.argsort(xs, kind="stable")
            xs, ps = xs[order], np.maximum(ps[order], 0.0)
            # merge duplicate support points, drop zero-mass atoms
            keep = np.concatenate(([True], np.diff(xs) > 0))
            if not keep.all():
                idx = np.cumsum(keep) - 1
                merged = np.zeros(int(idx[-1]) + 1)
                np.add.at(merged, idx, ps)
                xs, ps = xs[keep], merged
            pos = ps > 0.0
            if not pos.all():
                xs, ps = xs[pos], ps[pos]
            total = float(ps.sum())
            if abs(total - 1.0) > 1e-12:
                raise ValueError(f"probabilities sum to {total!r}, not 1 within 1e-12")
        self.xs = xs
        self.ps = ps
        self._cdf = np.cumsum(ps)
        # suffix sums computed right-to-left so deep tails keep relative accuracy
        self._sf = np.cumsum(ps[::-1])[::-1]
        self._mean = float(np.dot(ps, xs))
        self._m2 = float(np.dot(ps, xs * xs))

    def is_finite(self) -> bool:
        return True

    def atoms(self) -> tuple[np.ndarray, np.ndarray]:
        return self.xs, self.ps

    def survival(self, t: float) -> float:
        i = int(np.searchsorted(self.xs, t, side="right"))
        if i >= self.xs.size:
            return 0.0
        return float(min(1.0, self._sf[i]))

    def plus_moment(self, t: float, alpha: float) -> float:
        alpha = _validate_order(alpha)
        if alpha == 0.0:
            return self.survival(t)
        i = int(np.searchsorted(self.xs, t, side="right"))
        if i >= self.xs.size:
            return 0.0
        d = self.xs[i:] - t
        if alpha == 1.0:
            return float(np.dot(self.ps[i:], d))
        return float(np.dot(self.ps[i:], d**alpha))

    def neg_plus_moment(self, t: float) -> float:
        i = int(np.searchsorted(self.xs, t, side="left"))
        if i == 0:
            return 0.0
        return float(np.dot(self.ps[:i], t - self.xs[:i]))

    def mean_var(self) -> tuple[float, float]:
        return self._mean, max(self._m2 - self._mean * self._mean, 0.0)

    def quantile(self, p: float) -> float:
        if p <= 0.0:
            return float(self.xs[0])
        if p >= 1.0:
            return float(self.xs[-1])
        # tiny slack so an atom whose cumulative mass is p up to roundoff counts
        i = int(np.searchsorted(self._cdf, p - 1e-12, side="left"))
        return float(self.xs[min(i, self.xs.size - 1)])

    def partial_quantile_integral(self, u: float) -> float:
        if u <= 0.0:
            return 0.0
        u = min(u, 1.0)
        hi = np.minimum(self._cdf, u)
        lo = np.concatenate(([0.0], hi[:-1]))
        return float(np.dot(self.xs, hi - lo))

    def upper_mean_integral(self, c: float) -> float:
        i = int(np.searchsorted(self.xs, c, side="right"))
        if i >= self.xs.size:
            return 0.0
        return float(np.dot(self.ps[i:], self.xs[i:]))

    def log_mgf(self, lam: float) -> float:
        with np.errstate(divide="ignore"):
            logs = np.log(self.ps) + lam * self.xs
        return float(special.logsumexp(logs))

    def negate(self) -> "Lattice":
        return Lattice(-self.xs[::-1], self.ps[::-1], _validated=True)


class Lattice(_FiniteDist):
    """Finite law given by sorted support points and probabilities."""

    kind = "lattice"

    def __init__(self, values, probs, _validated: bool = False):
        self._init_arrays(values, probs, validated=_validated)

    @classmethod
    def from_csv(cls, path: str) -> "Lattice":
        """Read ``value,prob`` rows; a non-numeric first row is treated as a header."""
        values, probs = [], []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row:
                    continue
                try:
                    v, p = float(row[0]), float(row[1])
                except (ValueError, IndexError):
                    if not values:
                        continue  # header line
                    raise ValueError(f"bad lattice row {row!r} in {path}")
                values.append(v)
                probs.append(p)
        if not values:
            raise ValueError(f"no lattice rows found in {path}")
        return cls(values, probs)

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["value", "prob"])
            for v, p in zip(self.xs, self.ps):
                writer.writerow([f"{v:.17g}", f"{p:.17g}"])

    def __repr__(self):
        return f"Lattice({self.xs.size} atoms on [{self.xs[0]:g}, {self.xs[-1]:g}])"


class TwoPoint(_FiniteDist):
    """Law on two atoms {a, b} with a < 0 <= b and p = P(X = b)."""

    kind = "twopoint"

    def __init__(self, a: float, b: float, p: float):
        a, b, p = float(a), float(b), float(p)
        if not (a < 0.0 <= b):
            raise ValueError(f"two-point law requires a < 0 <= b, got a={a}, b={b}")
        if not (0.0 <= p <= 1.0):
            raise ValueError(f"p={p} outside [0, 1]")
        self.a, self.b, self.p = a, b, p
        self._init_arrays([a, b], [1.0 - p, p], validated=True)

    @classmethod
    def zero_mean(cls, a: float, b: float) -> "TwoPoint":
        """The mean-zero law on {a, b}: P(X = b) = -a / (b - a)."""
        return cls(a, b, -a / (b - a))

    def log_mgf(self, lam: float) -> float:
        return float(
            np.logaddexp(math.log1p(-self.p) + lam * self.a, math.log(self.p) + lam * self.b)
            if 0.0 < self.p < 1.0
            else lam * (self.b if self.p == 1.0 else self.a)
        )

    def __repr__(self):
        return f"TwoPoint(a={self.a:g}, b={self.b:g}, p={self.p:g})"


class Empirical(_FiniteDist):
    """Uniform law over an observed sample (no smoothing)."""

    kind = "empirical"

    def __init__(self, sample: Sequence[float]):
        sample = np.asarray(sample, dtype=np.float64)
        if sample.ndim != 1 or sample.size == 0:
            raise ValueError("sample must be a non-empty 1-D array")
        self._init_arrays(sample, np.full(sample.size, 1.0 / sample.size))

    @classmethod
    def from_csv(cls, path: str) -> "Empirical":
        values = []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row:
                    continue
                try:
                    values.append(float(row[0]))
                except ValueError:
                    if values:
                        raise ValueError(f"bad sample row {row!r} in {path}")
        if not values:
            raise ValueError(f"no sample rows found in {path}")
        return cls(values)


class BinomSum(_FiniteDist):
    """Exact law of the sum of n i.i.d. copies of a two-point law.

    The support is the n+1 points k*b + (n-k)*a and the weights are
    binomial, evaluated in log space so large n cannot overflow.
    """

    kind = "binomsum"

    def __init__(self, n: int, base: TwoPoint):
        n = int(n)
        if n < 1:
            raise ValueError("n must be a positive integer")
        if n > (1 << 22):
            raise OverflowError(f"n={n} support too large to materialize")
        self.n = n
        self.base = base
        k = np.arange(n + 1, dtype=np.float64)
        values = k * base.b + (n - k) * base.a
        if base.p <= 0.0 or base.p >= 1.0:
            probs = np.zeros(n + 1)
            probs[-1 if base.p >= 1.0 else 0] = 1.0
        else:
            log_pmf = (
                special.gammaln(n + 1)
                - special.gammaln(k + 1)
                - special.gammaln(n - k + 1)
                + k * math.log(base.p)
                + (n - k) * math.log1p(-base.p)
            )
            probs = np.exp(log_pmf)
        self._init_arrays(values, probs, validated=True)

    def log_mgf(self, lam: float) -> float:
        return self.n * self.base.log_mgf(lam)

    def __repr__(self):
        return f"BinomSum(n={self.n}, base={self.base!r})"


class CenteredPoisson(_FiniteDist):
    """The law y * (Poisson(v2 / y) - v2 / y): mean zero, variance y * v2.

    The Poisson support is truncated at the smallest K whose remaining
    tail mass is below 1e-15, with the pmf accumulated by a rising
    recursion in log space.
    """

    kind = "cpoisson"

    def __init__(self, v2: float, y: float = 1.0):
        v2, y = float(v2), float(y)
        if v2 <= 0.0 or y <= 0.0:
            raise ValueError("centered Poisson requires v2 > 0 and y > 0")
        self.v2 = v2
        self.y = y
        self.rate = v2 / y
        log_pmf = [-self.rate]
        log_rate = math.log(self.rate)
        k = 0
        # stop once a geometric bound on the remaining tail is negligible:
        # past the mode, P(N > k) <= pmf(k+1) / (1 - rate/(k+2))
        while True:
            k += 1
            log_pmf.append(log_pmf[-1] + log_rate - math.log(k))
            if k + 1 > self.rate:
                ratio = self.rate / (k + 2)
                log_tail = log_pmf[-1] + log_rate - math.log(k + 1) - math.log1p(-ratio)
                if log_tail < math.log(_POISSON_TAIL) - 3.0:
                    break
            if k > 10_000_000:  # pragma: no cover - rate bound guard
                raise OverflowError("Poisson truncation did not converge")
        ks = np.arange(k + 1, dtype=np.float64)
        pmf = np.exp(np.array(log_pmf))
        # fold the summation roundoff (and the < 1e-16 analytic tail) into
        # the modal atom; its centered value is near zero, so moments move
        # by far less than the mass correction itself
        pmf[int(np.argmax(pmf))] += 1.0 - math.fsum(pmf)
        self._init_arrays(y * (ks - self.rate), pmf, validated=True)

    def mean_var(self) -> tuple[float, float]:
        return 0.0, self.y * self.v2

    def log_mgf(self, lam: float) -> float:
        return self.rate * math.expm1(lam * self.y) - lam * self.y * self.rate

    def __repr__(self):
        return f"CenteredPoisson(v2={self.v2:g}, y={self.y:g})"


# ---------------------------------------------------------------------------
# Gaussian
# ---------------------------------------------------------------------------

# Coefficient pairs (A_k, B_k) with
#   E[(Z - u)_+^k] = A_k(u) * P(Z > u) + B_k(u) * phi(u)
# generated by the integration-by-parts recursion
#   J_{k+1}(u) = k J_{k-1}(u) - u J_k(u),
# seeded by J_0 = 1 - Phi(u) and J_1 = phi(u) - u (1 - Phi(u)).
# Coefficients are exact small integers, so the recursion is applied to the
# polynomials once, not to floating-point values at every call.


def _build_plus_moment_polys(kmax: int):
    a = [np.array([1.0]), np.array([0.0, -1.0])]
    b = [np.array([0.0]), np.array([1.0])]

    def shift(c):  # multiply polynomial by u
        return np.concatenate(([0.0], c))

    def add(c1, c2):
        if c1.size < c2.size:
            c1 = np.concatenate((c1, np.zeros(c2.size - c1.size)))
        else:
            c2 = np.concatenate((c2, np.zeros(c1.size - c2.size)))
        return c1 + c2

    for k in range(1, kmax):
        a.append(add(k * a[k - 1], -shift(a[k])))
        b.append(add(k * b[k - 1], -shift(b[k])))
    return a, b


_PM_POLY_A, _PM_POLY_B = _build_plus_moment_polys(int(MAX_ORDER))


def _std_plus_moment_int(u: float, k: int) -> float:
    """E[(Z - u)_+^k] for standard normal Z and integer k."""
    a = float(np.polynomial.polynomial.polyval(u, _PM_POLY_A[k]))
    b = float(np.polynomial.polynomial.polyval(u, _PM_POLY_B[k]))
    if u <= 0.0:
        # both terms are non-negative here, no cancellation
        return a * _norm_sf(u) + b * _phi(u)
    # scaled form keeps relative accuracy in the far right tail
    mills = _SQRT_HALF_PI * special.erfcx(u / math.sqrt(2.0))
    return _phi(u) * (a * mills + b)


def _std_plus_moment_quad(u: float, alpha: float) -> float:
    """Quadrature fallback for non-integer orders."""
    if u >= 0.0:
        val, _ = integrate.quad(
            lambda s: s**alpha * math.exp(-u * s - 0.5 * s * s),
            0.0,
            np.inf,
            epsabs=1e-14,
            epsrel=1e-11,
            limit=200,
        )
        return _phi(u) * val
    val, _ = integrate.quad(
        lambda z: (z - u) ** alpha * _phi(z),
        u,
        np.inf,
        epsabs=1e-14,
        epsrel=1e-11,
        limit=200,
    )
    return val


class Gaussian(Dist):
    """Normal law with mean ``mu`` and standard deviation ``sd`` > 0."""

    kind = "gauss"

    def __init__(self, mu: float, sd: float):
        mu, sd = float(mu), float(sd)
        if sd <= 0.0:
            raise ValueError("sd must be positive")
        self.mu, self.sd = mu, sd

    def survival(self, t: float) -> float:
        return _norm_sf((t - self.mu) / self.sd)

    def plus_moment(self, t: float, alpha: float) -> float:
        alpha = _validate_order(alpha)
        u = (t - self.mu) / self.sd
        if alpha == 0.0:
            return _norm_sf(u)
        if alpha == int(alpha):
            return self.sd**alpha * _std_plus_moment_int(u, int(alpha))
        return self.sd**alpha * _std_plus_moment_quad(u, alpha)

    def neg_plus_moment(self, t: float) -> float:
        return self.sd * _std_plus_moment_int((self.mu - t) / self.sd, 1)

    def mean_var(self) -> tuple[float, float]:
        return self.mu, self.sd * self.sd

    def quantile(self, p: float) -> float:
        if p <= 0.0:
            return -math.inf
        if p >= 1.0:
            return math.inf
        return self.mu + self.sd * float(special.ndtri(p))

    def partial_quantile_integral(self, u: float) -> float:
        if u <= 0.0:
            return 0.0
        if u >= 1.0:
            return self.mu
        return self.mu * u - self.sd * _phi(float(special.ndtri(u)))

    def upper_mean_integral(self, c: float) -> float:
        z = (c - self.mu) / self.sd
        return self.mu * _norm_sf(z) + self.sd * _phi(z)

    def log_mgf(self, lam: float) -> float:
        return self.mu * lam + 0.5 * (self.sd * lam) ** 2

    def negate(self) -> "Gaussian":
        return Gaussian(-self.mu, self.sd)

    def __repr__(self):
        return f"Gaussian(mu={self.mu:g}, sd={self.sd:g})"


# ---------------------------------------------------------------------------
# Weibull
# ---------------------------------------------------------------------------


class Weibull(Dist):
    """Weibull law: P(X > t) = exp(-(t/scale)^shape) for t >= 0.

    With V = (X/scale)^shape standard exponential, partial moments reduce
    to integrals against exp(-v), which is how they are evaluated.
    """

    kind = "weibull"

    def __init__(self, shape: float, scale: float):
        shape, scale = float(shape), float(scale)
        if shape <= 0.0 or scale <= 0.0:
            raise ValueError("shape and scale must be positive")
        self.shape, self.scale = shape, scale

    def survival(self, t: float) -> float:
        if t <= 0.0:
            return 1.0
        return math.exp(-((t / self.scale) ** self.shape))

    def plus_moment(self, t: float, alpha: float) -> float:
        alpha = _validate_order(alpha)
        if alpha == 0.0:
            return self.survival(t)
        s, k = self.scale, self.shape
        v_lo = (max(t, 0.0) / s) ** k
        val, _ = integrate.quad(
            lambda v: (s * v ** (1.0 / k) - t) ** alpha * math.exp(-v),
            v_lo,
            np.inf,
            epsabs=1e-14,
            epsrel=1e-11,
            limit=200,
        )
        return val

    def neg_plus_moment(self, t: float) -> float:
        if t <= 0.0:
            return 0.0
        s, k = self.scale, self.shape
        v_hi = (t / s) ** k
        val, _ = integrate.quad(
            lambda v: (t - s * v ** (1.0 / k)) * math.exp(-v),
            0.0,
            v_hi,
            epsabs=1e-14,
            epsrel=1e-11,
            limit=200,
        )
        return val

    def mean_var(self) -> tuple[float, float]:
        g1 = special.gamma(1.0 + 1.0 / self.shape)
        g2 = special.gamma(1.0 + 2.0 / self.shape)
        mean = self.scale * g1
        return mean, self.scale**2 * (g2 - g1 * g1)

    def quantile(self, p: float) -> float:
        if p <= 0.0:
            return 0.0
        if p >= 1.0:
            return math.inf
        return self.scale * (-math.log1p(-p)) ** (1.0 / self.shape)

    def partial_quantile_integral(self, u: float) -> float:
        if u <= 0.0:
            return 0.0
        a = 1.0 + 1.0 / self.shape
        if u >= 1.0:
            return self.scale * float(special.gamma(a))
        t_u = -math.log1p(-u)
        return self.scale * float(special.gamma(a) * special.gammainc(a, t_u))

    def upper_mean_integral(self, c: float) -> float:
        a = 1.0 + 1.0 / self.shape
        v_c = (max(c, 0.0) / self.scale) ** self.shape
        return self.scale * float(special.gamma(a) * special.gammaincc(a, v_c))

    def log_mgf(self, lam: float) -> float:
        if lam <= 0.0:
            raise ValueError("log_mgf is provided for lam >= 0 only")
        if self.shape < 1.0:
            raise MGFDiverges(f"Weibull(shape={self.shape:g} < 1) has no finite MGF")
        if self.shape == 1.0:
            if lam >= 1.0 / self.scale:
                return math.inf
            return -math.log1p(-lam * self.scale)
        # log of int_0^inf exp(lam*scale*v^(1/k) - v) dv, Laplace-stabilized
        s, k = self.scale, self.shape

        def g(v):
            return lam * s * v ** (1.0 / k) - v

        v_star = (lam * s / k) ** (k / (k - 1.0))
        g_max = g(max(v_star, 1e-300))
        val, _ = integrate.quad(
            lambda v: math.exp(g(v) - g_max), 0.0, np.inf, epsabs=1e-14, epsrel=1e-11, limit=200
        )
        return g_max + math.log(val)

    def negate(self) -> Lattice:
        return self.finite_view().negate()

    def __repr__(self):
        return f"Weibull(shape={self.shape:g}, scale={self.scale:g})"


# ---------------------------------------------------------------------------
# Discretization of continuous laws
# ---------------------------------------------------------------------------


def _bin_continuous(d: Dist, n_atoms: int) -> Lattice:
    """Mean-exact binning: one atom per bin at the bin's conditional mean."""
    eps = 1e-12 / 2.0
    lo, hi = d.quantile(eps), d.quantile(1.0 - eps)
    if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
        raise DistError(f"cannot bin {d!r} on a degenerate range [{lo}, {hi}]")
    edges = np.linspace(lo, hi, n_atoms + 1)
    sf = np.array([d.survival(e) for e in edges])
    um = np.array([d.upper_mean_integral(e) for e in edges])
    mean = d.mean()
    # interior bins, plus the two tail lumps so mass totals exactly one
    probs = np.concatenate(([1.0 - sf[0]], sf[:-1] - sf[1:], [sf[-1]]))
    mass_int = np.concatenate(([mean - um[0]], um[:-1] - um[1:], [um[-1]]))
    keep = probs > 1e-300
    centers = mass_int[keep] / probs[keep]
    return Lattice(centers, probs[keep])


# ---------------------------------------------------------------------------
# Convolution of i.i.d. two-point laws
# ---------------------------------------------------------------------------


def convolve_iid(d: TwoPoint, n: int) -> Dist:
    """Exact lattice law of the sum of n independent copies of ``d``.

    n = 1 returns ``d`` itself; otherwise the result is the shifted,
    scaled binomial materialized by :class:`BinomSum`.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return d
    return BinomSum(n, d)


# ---------------------------------------------------------------------------
# Mini-language parser
# ---------------------------------------------------------------------------

_KIND_KEYS = {
    "twopoint": {"a", "b", "p"},
    "binomsum": {"n", "a", "b", "p"},
    "cpoisson": {"v2", "y"},
    "gauss": {"mu", "sd"},
    "weibull": {"shape", "scale"},
    "lattice": {"file"},
    "empirical": {"file"},
}


def parse_dist(text: str) -> Dist:
    """Parse the ``kind:key=val,key=val`` distribution mini-language.

    Examples: ``twopoint:a=-0.25,b=1,p=0.2``, ``binomsum:n=100,a=-0.01,b=1``,
    ``cpoisson:v2=4,y=1``, ``gauss:mu=0,sd=2``, ``weibull:shape=2,scale=1.5``,
    ``lattice:file=path.csv``.  Rejections name the offending token and its
    character position.
    """
    head, sep, rest = text.partition(":")
    kind = head.strip()
    if kind not in _KIND_KEYS:
        raise ParseError(f"unknown distribution kind {kind!r}", text, 0)
    if not sep:
        raise ParseError(f"missing ':' after kind {kind!r}", text, len(head))
    allowed = _KIND_KEYS[kind]
    params: dict[str, str] = {}
    pos = len(head) + 1
    for token in rest.split(","):
        if token.strip() == "":
            raise ParseError("empty parameter token", text, pos)
        key, eq, value = token.partition("=")
        key = key.strip()
        if not eq:
            raise ParseError(f"expected key=value, got {token.strip()!r}", text, pos)
        if key not in allowed:
            raise ParseError(f"unknown key {key!r} for kind {kind!r}", text, pos)
        if key in params:
            raise ParseError(f"duplicate key {key!r}", text, pos)
        params[key] = value.strip()
        pos += len(token) + 1

    def need(*names):
        for name in names:
            if name not in params:
                raise ParseError(f"missing required key {name!r} for kind {kind!r}", text, len(text))

    def num(name, conv=float):
        raw = params[name]
        try:
            return conv(raw)
        except ValueError:
            raise ParseError(f"bad numeric value {raw!r} for key {name!r}", text, text.find(raw))

    if kind == "twopoint":
        need("a", "b", "p")
        return TwoPoint(num("a"), num("b"), num("p"))
    if kind == "binomsum":
        need("n", "a", "b")
        a, b = num("a"), num("b")
        p = num("p") if "p" in params else -a / (b - a)
        return BinomSum(num("n", int), TwoPoint(a, b, p))
    if kind == "cpoisson":
        need("v2")
        return CenteredPoisson(num("v2"), num("y") if "y" in params else 1.0)
    if kind == "gauss":
        need("mu", "sd")
        return Gaussian(num("mu"), num("sd"))
    if kind == "weibull":
        need("shape", "scale")
        return Weibull(num("shape"), num("scale"))
    if kind == "lattice":
        need("file")
        return Lattice.from_csv(params["file"])
    need("file")
    return Empirical.from_csv(params["file"])
