"""Closed forms for the exponent functions a, b, c and their tilt derivatives.

The conditional expectation of the exponential-quadratic payoff is
exp(a(tau) x^2 / 2 + b(tau) x + c(tau)) where the three functions solve

    da/dtau / 2 = (lam A / 2) e^{-lam tau} - lam a + a^2 / 2
    db/dtau     = a b - lam b
    dc/dtau     = (a + b^2) / 2

with a(0) = 2(spd_quad + theta a2), b(0) = spd_lin + theta a1 and
c(0) = theta a0; theta is an exponential tilt on the terminal dividend
whose derivative at 0 produces the dividend-weighted expectations that
price the stock.  The Riccati equation linearises through a = -g'/g into
a second-order equation solved by Bessel functions of the scaled
argument z(u) = z0 e^{-lam u / 2}, z0 = 2 sqrt(A/lam):

    g(u)  = e^{-lam u} [alpha J2(z) - beta Y2(z)]
    g'(u) = -(lam z / 2) e^{-lam u} [alpha J1(z) - beta Y1(z)]

The identity J1 Y2 - J2 Y1 = -2/(pi z) forces g(0) = lam/pi for every
admissible parameter set.  Everything is evaluated through the scaled
combinations z^2 J2, z^2 * (z Y1), z^2 Y2, which stay representable even
when e^{-lam u} underflows, and a(tau) is always computed from the
closed form; the adaptive integrator here exists purely as an
independent cross-check.

In the known-parameter limit the forcing term vanishes (A = 0) and g is
elementary: g(u) = c1 + c2 e^{-2 lam u}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from . import bessel
from .model import DerivedConstants, InvalidParamsError, ModelParams

G_FLOOR = 1e-12
C_QUADRATURE_TOL = 1e-9


class DegenerateGError(ArithmeticError):
    """g(tau) vanished on the requested range (pole of a)."""


class QuadratureToleranceError(ArithmeticError):
    """Richardson estimate of the c-integral error exceeds tolerance."""


class StepSizeUnderflowError(ArithmeticError):
    """The cross-check integrator stalled (pole of a on the range)."""


@dataclass(frozen=True)
class OdeInputs:
    theta: float
    params: ModelParams
    consts: DerivedConstants
    tau_max: float = 10.0
    n_grid: int = 2001

    def __post_init__(self) -> None:
        if not self.tau_max > 0.0:
            raise InvalidParamsError("tau_max must be positive")
        if self.n_grid < 3 or self.n_grid % 2 == 0:
            raise InvalidParamsError("n_grid must be odd and >= 3 (Simpson)")


@dataclass(frozen=True)
class OdeSolution:
    """Grid values of a, b, c and their tilt derivatives at the input theta."""

    taus: np.ndarray
    a_vals: np.ndarray
    b_vals: np.ndarray
    c_vals: np.ndarray
    da_vals: np.ndarray
    db_vals: np.ndarray
    dc_vals: np.ndarray

    def __post_init__(self) -> None:
        for arr in (self.taus, self.a_vals, self.b_vals, self.c_vals,
                    self.da_vals, self.db_vals, self.dc_vals):
            arr.setflags(write=False)


def _g_derivs(u, theta: float, params: ModelParams, consts: DerivedConstants):
    """g, g', and their tilt derivatives on an array of times u >= 0."""
    lam = consts.lam
    a2 = params.a2
    chat = consts.spd_quad + theta * a2
    u = np.asarray(u, dtype=float)

    if consts.age_norm == 0.0:
        # elementary limit: g = c1 + c2 e^{-2 lam u}
        g0 = lam / np.pi
        e = np.exp(-2.0 * lam * u)
        c2 = chat * g0 / lam
        g = (g0 - c2) + c2 * e
        gdot = -2.0 * lam * c2 * e
        dg = (a2 * g0 / lam) * (e - 1.0)
        dgdot = -2.0 * a2 * g0 * e
        return g, gdot, dg, dgdot

    big_a = consts.age_norm
    z0 = 2.0 * np.sqrt(big_a / lam)
    sqrt_la = np.sqrt(lam * big_a)
    j1_0, j2_0 = bessel.j1(z0), bessel.j2(z0)
    y1_0, y2_0 = bessel.y1(z0), bessel.y2(z0)
    alpha = sqrt_la * y1_0 - 2.0 * chat * y2_0
    beta = sqrt_la * j1_0 - 2.0 * chat * j2_0
    dalpha = -2.0 * a2 * y2_0
    dbeta = -2.0 * a2 * j2_0

    z = z0 * np.exp(-0.5 * lam * u)
    z2 = z * z
    j1_z, j2_z = bessel.j1(z), bessel.j2(z)
    w1_z = bessel.y1_scaled(z)   # z Y1(z)
    w2_z = bessel.y2_scaled(z)   # z^2 Y2(z)

    # e^{-lam u} = z^2 / z0^2 replaces the explicit exponential so that the
    # products with the singular Y factors never overflow.
    inv = 1.0 / (z0 * z0)
    g = inv * (alpha * z2 * j2_z - beta * w2_z)
    gdot = -0.5 * lam * inv * (alpha * z2 * z * j1_z - beta * z2 * w1_z)
    dg = inv * (dalpha * z2 * j2_z - dbeta * w2_z)
    dgdot = -0.5 * lam * inv * (dalpha * z2 * z * j1_z - dbeta * z2 * w1_z)
    return g, gdot, dg, dgdot


def g_closed(u, theta: float, params: ModelParams, consts: DerivedConstants):
    """(g, g') at times u >= 0; raises DegenerateGError where |g| < 1e-12."""
    g, gdot, _, _ = _g_derivs(u, theta, params, consts)
    if np.any(np.abs(g) < G_FLOOR) or np.any(g <= 0.0):
        raise DegenerateGError("g vanishes on the requested range")
    return g, gdot


def _cumulative_simpson(f: np.ndarray, h: float) -> np.ndarray:
    """Cumulative integral on a uniform grid with an odd number of nodes.

    Even nodes accumulate composite Simpson panels; odd nodes add a cubic
    (4-point) half-panel so the local error stays O(h^5) everywhere.
    """
    out = np.empty_like(f)
    out[0] = 0.0
    out[2::2] = np.cumsum(h / 3.0 * (f[0:-2:2] + 4.0 * f[1:-1:2] + f[2::2]))
    n = len(f)
    idx = np.arange(1, n, 2)
    fwd = idx[idx + 2 <= n - 1]
    out[fwd] = out[fwd - 1] + h / 24.0 * (9.0 * f[fwd - 1] + 19.0 * f[fwd]
                                          - 5.0 * f[fwd + 1] + f[fwd + 2])
    bwd = idx[idx + 2 > n - 1]
    out[bwd] = out[bwd - 1] + h / 24.0 * (f[bwd - 3] - 5.0 * f[bwd - 2]
                                          + 19.0 * f[bwd - 1] + 9.0 * f[bwd])
    return out


def abc_eval(inputs: OdeInputs) -> OdeSolution:
    """Evaluate a, b, c and tilt derivatives from the closed forms."""
    params, consts, theta = inputs.params, inputs.consts, inputs.theta
    lam = consts.lam
    taus = np.linspace(0.0, inputs.tau_max, inputs.n_grid)

    g, gdot, dg, dgdot = _g_derivs(taus, theta, params, consts)
    if np.any(np.abs(g) < G_FLOOR) or np.any(g <= 0.0):
        raise DegenerateGError("g vanishes on [0, tau_max]")

    a = -gdot / g
    da = -dgdot / g + gdot / (g * g) * dg

    b0 = consts.spd_lin + theta * params.a1
    emlt = np.exp(-lam * taus)
    b = b0 * g[0] * emlt / g
    db = (params.a1 * g[0] * emlt / g
          + b0 * emlt * (dg[0] / g - g[0] / (g * g) * dg))

    h = taus[1] - taus[0]
    fc = 0.5 * (a + b * b)
    fdc = 0.5 * (da + 2.0 * b * db)
    c = theta * params.a0 + _cumulative_simpson(fc, h)
    dc = params.a0 + _cumulative_simpson(fdc, h)

    # Richardson check of the c quadrature against the half-density grid
    if inputs.n_grid >= 5 and (inputs.n_grid - 1) % 4 == 0:
        c_half = theta * params.a0 + _cumulative_simpson(fc[::2], 2.0 * h)
        est = np.max(np.abs(c[::2] - c_half)) / 15.0
        if est > C_QUADRATURE_TOL:
            raise QuadratureToleranceError(
                f"c-quadrature Richardson estimate {est:.2e} exceeds "
                f"{C_QUADRATURE_TOL:.0e}; refine n_grid")

    return OdeSolution(taus=taus, a_vals=a, b_vals=b, c_vals=c,
                       da_vals=da, db_vals=db, dc_vals=dc)


def abc_numeric(inputs: OdeInputs) -> OdeSolution:
    """Integrate the coupled system with adaptive RK45 (cross-check only).

    The tilt-derivative block is the linearisation of the base system:
    d(da)/dtau = 2(a - lam) da, and so on.  Local tolerance 1e-10.
    """
    params, consts, theta = inputs.params, inputs.consts, inputs.theta
    lam, big_a = consts.lam, consts.age_norm

    def rhs(t, y):
        a, b, c, da, db, dc = y
        return (lam * big_a * np.exp(-lam * t) - 2.0 * lam * a + a * a,
                a * b - lam * b,
                0.5 * (a + b * b),
                2.0 * (a - lam) * da,
                da * b + (a - lam) * db,
                0.5 * (da + 2.0 * b * db))

    y0 = (2.0 * (consts.spd_quad + theta * params.a2),
          consts.spd_lin + theta * params.a1,
          theta * params.a0,
          2.0 * params.a2, params.a1, params.a0)
    taus = np.linspace(0.0, inputs.tau_max, inputs.n_grid)
    sol = solve_ivp(rhs, (0.0, inputs.tau_max), y0, t_eval=taus,
                    method="RK45", rtol=1e-10, atol=1e-14,
                    max_step=min(0.01, inputs.tau_max / 64.0))
    if not sol.success:
        raise StepSizeUnderflowError(f"RK45 failed: {sol.message}")
    a, b, c, da, db, dc = sol.y
    return OdeSolution(taus=taus, a_vals=a, b_vals=b, c_vals=c,
                       da_vals=da, db_vals=db, dc_vals=dc)
