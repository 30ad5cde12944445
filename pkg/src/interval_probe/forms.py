"""Closed-form and sampled functions of one real variable.

Initial data u0, u1 and boundary inputs eta are carried as small immutable
objects (a tag plus parameters) instead of arrays, so that a problem can be
re-gridded for any candidate length without interpolating its data.  Only
``Sampled`` profiles interpolate, and they do so linearly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


class ProfileError(ValueError):
    """A profile cannot provide the requested quantity."""


class Profile:
    """Base class: a real function of one variable, evaluable on arrays."""

    tag = "profile"

    def __call__(self, x):
        raise NotImplementedError

    def derivative(self, order: int = 1) -> "Profile":
        raise ProfileError(f"{self.tag} profile has no closed-form derivative")

    @property
    def is_zero(self) -> bool:
        return False

    @property
    def closed_form(self) -> bool:
        return True

    def sine_moment(self, omega: float, length: float) -> float | None:
        """Exact value of the integral of f(x) sin(omega x) over [0, length], or None."""
        return None

    def describe(self) -> str:
        return self.tag

    def __add__(self, other: "Profile") -> "Profile":
        return Sum((self, other))

    def __mul__(self, factor: float) -> "Profile":
        return Scaled(self, float(factor))

    __rmul__ = __mul__


def _int_cos(mu: float, length: float) -> float:
    # integral of cos(mu x) over [0, length], continuous through mu = 0
    return length * float(np.sinc(mu * length / np.pi))


def _int_sin(mu: float, length: float) -> float:
    # integral of sin(mu x) over [0, length] = 2 sin^2(mu l / 2) / mu
    return 0.5 * mu * length**2 * float(np.sinc(mu * length / (2 * np.pi))) ** 2


@dataclass(frozen=True)
class Harmonic(Profile):
    """a*sin(omega*x) + b*cos(omega*x)."""

    a: float
    b: float
    omega: float

    tag = "harmonic"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        if self.a:
            out = out + self.a * np.sin(self.omega * x)
        if self.b:
            out = out + self.b * np.cos(self.omega * x)
        return out

    def derivative(self, order: int = 1) -> Profile:
        h: Harmonic = self
        for _ in range(order):
            h = Harmonic(-h.b * h.omega, h.a * h.omega, h.omega)
        return h

    @property
    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def sine_moment(self, omega: float, length: float) -> float:
        w, k = self.omega, omega
        # sin(wx) sin(kx) = [cos((w-k)x) - cos((w+k)x)] / 2
        # cos(wx) sin(kx) = [sin((k+w)x) + sin((k-w)x)] / 2
        s = 0.5 * (_int_cos(w - k, length) - _int_cos(w + k, length))
        c = 0.5 * (_int_sin(k + w, length) + _int_sin(k - w, length))
        return self.a * s + self.b * c

    def mode_index(self, length: float, tol: float = 1e-9) -> int | None:
        """Index n with omega = n*pi/length when this is a pure Dirichlet sine mode."""
        if self.b != 0 or self.a == 0:
            return None
        n = self.omega * length / np.pi
        k = round(n)
        if k >= 1 and abs(n - k) <= tol * max(1.0, abs(n)):
            return int(k)
        return None

    def describe(self) -> str:
        if self.b == 0:
            return f"sine:{self.a!r},{self.omega!r}"
        return f"harmonic:{self.a!r},{self.b!r},{self.omega!r}"


def Sine(amplitude: float, omega: float) -> Harmonic:
    """amplitude * sin(omega * x)."""
    return Harmonic(float(amplitude), 0.0, float(omega))


@dataclass(frozen=True)
class Polynomial(Profile):
    """sum_k coeffs[k] * x**k."""

    coeffs: tuple[float, ...]

    tag = "poly"

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs) or (0.0,))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.polynomial.polynomial.polyval(x, self.coeffs) + np.zeros_like(x)

    def derivative(self, order: int = 1) -> Profile:
        return Polynomial(tuple(np.polynomial.polynomial.polyder(self.coeffs, order)))

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def sine_moment(self, omega: float, length: float) -> float:
        if self.is_zero:
            return 0.0
        if omega == 0:
            return 0.0
        k, L = omega, length
        sin_kl, cos_kl = np.sin(k * L), np.cos(k * L)
        # S_m = int x^m sin(kx), C_m = int x^m cos(kx) over [0, L], by parts
        S, C = [(1 - cos_kl) / k], [sin_kl / k]
        for m in range(1, len(self.coeffs)):
            S.append(-(L**m) * cos_kl / k + m / k * C[m - 1])
            C.append((L**m) * sin_kl / k - m / k * S[m - 1])
        return float(sum(c * s for c, s in zip(self.coeffs, S)))

    def describe(self) -> str:
        if self.is_zero:
            return "zero"
        return "poly:" + ",".join(repr(c) for c in self.coeffs)


def zero() -> Polynomial:
    return Polynomial((0.0,))


@dataclass(frozen=True)
class Scaled(Profile):
    base: Profile
    factor: float

    tag = "scaled"

    def __call__(self, x):
        return self.factor * self.base(x)

    def derivative(self, order: int = 1) -> Profile:
        return Scaled(self.base.derivative(order), self.factor)

    @property
    def is_zero(self) -> bool:
        return self.factor == 0 or self.base.is_zero

    @property
    def closed_form(self) -> bool:
        return self.base.closed_form

    def sine_moment(self, omega, length):
        m = self.base.sine_moment(omega, length)
        return None if m is None else self.factor * m

    def describe(self) -> str:
        return f"{self.factor!r}*({self.base.describe()})"


@dataclass(frozen=True)
class Sum(Profile):
    terms: tuple[Profile, ...]
    label: str | None = None

    tag = "sum"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for t in self.terms:
            out = out + t(x)
        return out

    def derivative(self, order: int = 1) -> Profile:
        return Sum(tuple(t.derivative(order) for t in self.terms))

    @property
    def is_zero(self) -> bool:
        return all(t.is_zero for t in self.terms)

    @property
    def closed_form(self) -> bool:
        return all(t.closed_form for t in self.terms)

    def sine_moment(self, omega, length):
        total = 0.0
        for t in self.terms:
            m = t.sine_moment(omega, length)
            if m is None:
                return None
            total += m
        return total

    def describe(self) -> str:
        if self.label:
            return self.label
        return " + ".join(t.describe() for t in self.terms)


def sine_cubed(amplitude: float, omega: float = 1.0) -> Sum:
    """amplitude * sin(omega*t)**3, expanded as (3 sin(wt) - sin(3wt)) / 4."""
    A = float(amplitude)
    return Sum(
        (Sine(0.75 * A, omega), Sine(-0.25 * A, 3 * omega)),
        label=f"sin3:{A!r},{float(omega)!r}",
    )


@dataclass(frozen=True, eq=False)
class Sampled(Profile):
    """Nodal values on increasing abscissae, linearly interpolated."""

    x: np.ndarray
    values: np.ndarray

    tag = "sampled"

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        v = np.array(self.values, dtype=float)
        if x.ndim != 1 or x.shape != v.shape:
            raise ProfileError("sampled profile needs matching 1-D abscissae and values")
        if x.size < 3:
            raise ProfileError("sampled profile needs at least 3 values")
        if np.any(np.diff(x) <= 0):
            raise ProfileError("sampled abscissae must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ProfileError("sampled values must be finite")
        x.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", v)

    def __call__(self, x):
        return np.interp(np.asarray(x, dtype=float), self.x, self.values)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.values)

    @property
    def closed_form(self) -> bool:
        return False

    def describe(self) -> str:
        return f"sampled[{self.x.size}]"


@dataclass(frozen=True)
class Mirrored(Profile):
    """base(x) for x <= about; parity * base(2*about - x) beyond.

    parity = -1 gives the odd (antisymmetric) extension about ``about``,
    parity = +1 the even one.  The odd extension is forced to 0 at ``about``.
    """

    base: Profile
    about: float
    parity: int = -1

    tag = "mirrored"

    def __post_init__(self):
        if self.parity not in (-1, 1):
            raise ProfileError("parity must be +1 or -1")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        a = self.about
        left = self.base(np.minimum(x, a))
        right = self.parity * self.base(2 * a - x)
        out = np.where(x <= a, left, right)
        if self.parity == -1:
            out = np.where(x == a, 0.0, out)
        return out

    def derivative(self, order: int = 1) -> Profile:
        parity = self.parity * (-1) ** order
        return Mirrored(self.base.derivative(order), self.about, parity)

    @property
    def is_zero(self) -> bool:
        return self.base.is_zero

    @property
    def closed_form(self) -> bool:
        return self.base.closed_form

    def describe(self) -> str:
        kind = "odd" if self.parity == -1 else "even"
        return f"mirror[{kind}@{self.about!r}]({self.base.describe()})"


def sine_modes(length: float, amplitudes: Sequence[float]) -> Profile:
    """sum_k amplitudes[k-1] * sin(k*pi*x/length)."""
    terms = tuple(
        Sine(a, k * np.pi / length) for k, a in enumerate(amplitudes, start=1) if a != 0
    )
    return Sum(terms) if terms else zero()
