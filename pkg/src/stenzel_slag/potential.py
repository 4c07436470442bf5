"""Stenzel Kaehler potential and the induced Kaehler structure on the quadric.

The radial potential ``u`` of the Stenzel metric is encoded through
``U(t) = u(cosh t)``, whose derivative satisfies

    d/dt (U'(t))**n = c * n * sinh(t)**(n - 1),

integrated here with the constant chosen so that ``U'(0) = 0``.  ``U'`` is
tabulated once by adaptive quadrature and interpolated with cubic Hermite
splines whose node slopes come straight from the ODE.  Near the zero section
``u'`` and ``u''`` are evaluated from a power series in ``x = r**2 - 1``
which is generated from the same ODE written in the variable ``s = cosh t``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from functools import cached_property, lru_cache
from pathlib import Path

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from .hyperbolic import F_factor, sinhc  # noqa: F401  (F_factor re-exported)

__all__ = [
    "PotentialTable",
    "PotentialRangeError",
    "DomainError",
    "build_potential",
    "u_derivatives",
    "hermitian_matrix",
    "kahler_form",
    "metric",
    "omega_matrix",
    "metric_matrix",
    "K_factor",
    "F_factor",
]

# Series branch for u', u'' is used when r**2 - 1 < _SERIES_SWITCH.
_SERIES_SWITCH = 0.1
_SERIES_ORDER = 26
_LOG_FLOAT_MAX = 700.0


class PotentialRangeError(ValueError):
    """Requested t lies outside the tabulated (or representable) range."""


class DomainError(ValueError):
    """Argument outside the mathematical domain (e.g. r**2 < 1)."""


def _series_coefficients(n: int, order: int) -> np.ndarray:
    """Taylor coefficients of y(x) = u'(1 + x) / c**(1/n).

    With s = cosh t the ODE becomes ``(s**2 - 1) y' + s y = y**(1 - n)``,
    independent of c.  Coefficients follow from matching powers of x, using
    the J.C.P. Miller recurrence for the power y**(1 - n).
    """
    p = 1 - n
    a = [1.0]
    b = [1.0]
    for k in range(1, order + 1):
        rest = sum(((p + 1) * j - k) * a[j] * b[k - j] for j in range(1, k)) / k
        a_k = (rest - k * a[k - 1]) / (2 * k + n)
        a.append(a_k)
        b.append(p * a_k + rest)
    return np.array(a)


@dataclass(frozen=True)
class PotentialTable:
    """Tabulated solution of the Stenzel ODE.

    Only ``u_prime`` (values of U' on ``t_grid``) is stored; U'' is recovered
    from the ODE, so the table is exactly reproducible from its JSON form.
    """

    n: int
    c: float
    t_max: float
    tol: float
    t_grid: np.ndarray = field(repr=False)
    u_prime: np.ndarray = field(repr=False)
    second_derivative: str = "ode"

    def __post_init__(self):
        if self.second_derivative not in ("ode", "spline"):
            raise ValueError("second_derivative must be 'ode' or 'spline'")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not self.c > 0:
            raise ValueError("c must be positive")
        if np.any(np.diff(self.u_prime) <= 0):
            raise ValueError("tabulated U' is not strictly increasing")

    # --- one-dimensional data -------------------------------------------

    @cached_property
    def _spline(self) -> CubicHermiteSpline:
        return CubicHermiteSpline(self.t_grid, self.u_prime, self._ode_second(self.t_grid, self.u_prime))

    @cached_property
    def _spline_slope(self) -> CubicSpline:
        return CubicSpline(self.t_grid, self.u_prime).derivative()

    def independent(self) -> "PotentialTable":
        """Copy whose U'' is the derivative of a cubic spline through the table.

        With U'' taken from the ODE the Monge-Ampere equation holds by
        construction; this variant lets the Calabi-Yau ratio test the
        tabulated values themselves.
        """
        return replace(self, second_derivative="spline")

    @cached_property
    def _series(self) -> np.ndarray:
        return _series_coefficients(self.n, _SERIES_ORDER)

    @property
    def c_root(self) -> float:
        """c**(1/n), the value of u'(1)."""
        return self.c ** (1.0 / self.n)

    def _ode_second(self, t, up):
        t = np.asarray(t, dtype=float)
        up = np.asarray(up, dtype=float)
        # U'' = c sinh^{n-1} / U'^{n-1}; the ratio sinh/U' tends to c^{-1/n}.
        small = t < 1e-8
        ratio = np.where(small, 1.0 / self.c_root, np.sinh(np.where(small, 1.0, t)) / np.where(small, 1.0, up))
        return self.c * ratio ** (self.n - 1)

    def _check_t(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise DomainError("t must be non-negative")
        if np.any(t > self.t_max * (1 + 1e-14)):
            raise PotentialRangeError(f"t = {np.max(t):.6g} exceeds table range t_max = {self.t_max}")
        return t

    def Uprime(self, t):
        """U'(t) from the table."""
        t = self._check_t(t)
        out = self._spline(t)
        return out[()] if np.ndim(out) == 0 else out

    def Udoubleprime(self, t):
        """U''(t), from the ODE applied to the tabulated U'."""
        t = self._check_t(t)
        out = self._ode_second(t, self._spline(t))
        return out[()] if np.ndim(out) == 0 else out

    # --- derivatives of u in the variable r**2 --------------------------

    def u_from_excess(self, x):
        """(u'(1 + x), u''(1 + x)) for x = r**2 - 1 >= 0."""
        x = np.asarray(x, dtype=float)
        if np.any(x < -1e-12):
            raise DomainError("r**2 < 1 is off the quadric")
        x = np.maximum(x, 0.0)
        small = x < _SERIES_SWITCH
        coeffs = self._series
        up_s = np.polynomial.polynomial.polyval(x, coeffs)
        upp_s = np.polynomial.polynomial.polyval(x, np.arange(1, coeffs.size) * coeffs[1:])
        # t = arccosh(1 + x) written to stay accurate for small x
        t = np.where(small, 1.0, np.arccosh(1.0 + np.where(small, 1.0, x)))
        if np.any(~small):
            self._check_t(t[~small])
        up_t = self._spline(t)
        upp_t = self._ode_second(t, up_t) if self.second_derivative == "ode" else self._spline_slope(t)
        sh, ch = np.sinh(t), np.cosh(t)
        up_d = up_t / sh
        upp_d = (upp_t * sh - up_t * ch) / sh**3
        up = np.where(small, self.c_root * up_s, up_d)
        upp = np.where(small, self.c_root * upp_s, upp_d)
        if up.ndim == 0:
            return float(up), float(upp)
        return up, upp

    def u_derivatives(self, r2):
        """(u'(r2), u''(r2)); see :func:`u_derivatives`."""
        r2 = np.asarray(r2, dtype=float)
        if np.any(r2 < 1 - 1e-12):
            raise DomainError("u is only defined for r**2 >= 1")
        return self.u_from_excess(r2 - 1.0)

    @cached_property
    def omega_sign(self) -> int:
        """Global sign making g = omega(., I.) positive; probed at z = e1, v = e2."""
        z = np.zeros(self.n + 1, dtype=complex)
        z[0] = 1.0
        v = np.zeros_like(z)
        v[1] = 1.0
        s = _raw_sesquilinear(self, z, v[None, :], (1j * v)[None, :])[0, 0]
        return 1 if -2.0 * s.imag > 0 else -1

    # --- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "c": self.c,
            "t_max": self.t_max,
            "tol": self.tol,
            "t_grid": [float(v) for v in self.t_grid],
            "u_prime": [float(v) for v in self.u_prime],
        }

    def to_json(self, path: str | Path | None = None) -> str:
        text = json.dumps(self.to_dict())
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_dict(cls, data: dict) -> "PotentialTable":
        return cls(
            n=int(data["n"]),
            c=float(data["c"]),
            t_max=float(data["t_max"]),
            tol=float(data["tol"]),
            t_grid=np.asarray(data["t_grid"], dtype=float),
            u_prime=np.asarray(data["u_prime"], dtype=float),
        )

    @classmethod
    def from_json(cls, path: str | Path) -> "PotentialTable":
        return cls.from_dict(json.loads(Path(path).read_text()))


@lru_cache(maxsize=32)
def build_potential(n: int, c: float = 1.0, t_max: float = 16.0, tol: float = 1e-12, grid_size: int = 8001) -> PotentialTable:
    """Tabulate U'(t) = (c n int_0^t sinh(s)**(n-1) ds)**(1/n) on [0, t_max].

    Each grid cell is integrated by adaptive Gauss-Kronrod quadrature
    (``scipy.integrate.quad``) with relative tolerance ``tol`` and the cell
    integrals are accumulated.  Results are cached per argument tuple.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not c > 0:
        raise ValueError("c must be positive")
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    if not 0 < tol < 1:
        raise ValueError("tol must lie in (0, 1)")
    if (n - 1) * t_max + math.log(c * n + 1.0) > _LOG_FLOAT_MAX:
        raise PotentialRangeError(f"sinh(t_max)**{n - 1} overflows double precision")

    t = np.linspace(0.0, t_max, grid_size)

    def integrand(s):
        return math.sinh(s) ** (n - 1)

    cells = np.empty(grid_size - 1)
    for i in range(grid_size - 1):
        cells[i], _ = quad(integrand, t[i], t[i + 1], epsabs=0.0, epsrel=max(tol, 1e-14), limit=50)
    integral = np.concatenate([[0.0], np.cumsum(cells)])
    up = (c * n * integral) ** (1.0 / n)
    if not np.all(np.isfinite(up)):
        raise PotentialRangeError("U' overflowed; reduce t_max")
    return PotentialTable(n=n, c=float(c), t_max=float(t_max), tol=float(tol), t_grid=t, u_prime=up)


def u_derivatives(table: PotentialTable, r2):
    """u'(r2) and u''(r2) with t = arccosh(r2).

    u'  = U'(t) / sinh t
    u'' = (U''(t) sinh t - U'(t) cosh t) / sinh(t)**3
    """
    return table.u_derivatives(r2)


def _excess(z: np.ndarray) -> float:
    # r**2 - 1 for a quadric point
    return float(np.vdot(z, z).real - 1.0)


def hermitian_matrix(table: PotentialTable, z: np.ndarray) -> np.ndarray:
    """Levi form h_ij = d^2 u(r^2) / dz_i dzbar_j = u'' zbar_i z_j + u' delta_ij."""
    z = np.asarray(z, dtype=complex)
    up, upp = table.u_from_excess(_excess(z))
    return upp * np.outer(z.conj(), z) + up * np.eye(z.size)


def _raw_sesquilinear(table, z, V, W):
    h = hermitian_matrix(table, z)
    return np.asarray(V) @ h @ np.asarray(W).conj().T


def omega_matrix(table: PotentialTable, z, V, W=None) -> np.ndarray:
    """Matrix of omega(v_a, w_b) for rows of V and W (W defaults to V)."""
    W = V if W is None else W
    s = _raw_sesquilinear(table, z, np.atleast_2d(V), np.atleast_2d(W))
    return table.omega_sign * (-2.0) * s.imag


def metric_matrix(table: PotentialTable, z, V, W=None) -> np.ndarray:
    """Matrix of g(v_a, w_b) = omega(v_a, I w_b)."""
    W = V if W is None else W
    return omega_matrix(table, z, V, 1j * np.atleast_2d(W))


def kahler_form(table: PotentialTable, z, v, w) -> float:
    """omega_Stz(v, w) at z for tangent vectors v, w."""
    return float(omega_matrix(table, z, v, w)[0, 0])


def metric(table: PotentialTable, z, v, w) -> float:
    """Kaehler metric g(v, w) = omega(v, I w)."""
    return float(metric_matrix(table, z, v, w)[0, 0])


def K_factor(table: PotentialTable, norm_xi):
    """u'(cosh 2|xi|) sinh(2|xi|) / |xi|, the radial factor of the moment map on conormal bundles.

    Equal to U'(2|xi|)/|xi| on the table branch and to 2 u'(1) at |xi| = 0.
    """
    r = np.asarray(norm_xi, dtype=float)
    if np.any(r < 0):
        raise DomainError("norm_xi must be non-negative")
    x = 2.0 * np.sinh(r) ** 2  # cosh(2r) - 1
    up, _ = table.u_from_excess(x)
    out = up * 2.0 * sinhc(2.0 * r)
    return out[()] if np.ndim(out) == 0 else out
