"""Adaptive integration of the radial profile equation.

The second-order equation is integrated in the explicit form

    v'' = -(m-1) v'^2 / v - (n-1) v'/r - (alpha v + beta r v') v^(1-m) / (n-1)

with state (v, v'), starting from a fourth-order series at a small radius
r0 = r0_scale * eta^((m-1)/2) because the origin is a regular singular point
of the r-form.  An embedded Runge-Kutta pair with dense output supplies the
adaptive steps; the stored grid is the union of the accepted steps and a
log-uniform refinement so that downstream quadratures resolve the identity
checks.  Runs end in one of three statuses:

    Global(r_max)       integration reached r_max,
    BlowUp(r_star)      v crossed the cap 1e12*eta, or the step size
                        underflowed while v was still rising,
    StepFailure(r_fail) the controller stalled without blow-up indicators.

Profiles are immutable; solving is a pure function of (params, numerics).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline

from .core_params import SolitonParams, validate

__all__ = [
    "ProfileStatus",
    "RadialProfile",
    "ResidualReport",
    "series_start",
    "solve_profile",
    "residuals",
    "write_profile_csv",
    "write_profile_json",
    "load_profile",
]

BLOWUP_CAP = 1e12          # v > cap * eta counts as blow-up
DEFAULT_R0_SCALE = 1e-6
DEFAULT_POINTS_PER_DECADE = 1100  # refinement density; keeps trapezoid defects near 1e-7

PROFILE_CSV_HEADER = "r,v,dv"


@dataclass(frozen=True)
class ProfileStatus:
    kind: str      # Global | BlowUp | StepFailure
    radius: float  # r_max, r_star or r_fail respectively


@dataclass(frozen=True)
class ResidualReport:
    max_ode_residual: float
    max_integral_residual: float
    grid_points: int


class RadialProfile:
    """Sampled solution (r, v, v') with status and tolerances.

    step_indices marks the subset of grid points that were accepted
    integrator steps; points between them were filled from dense output.
    Arrays are read-only views.
    """

    def __init__(
        self,
        params: SolitonParams,
        r: np.ndarray,
        v: np.ndarray,
        dv: np.ndarray,
        status: ProfileStatus,
        rtol: float,
        atol: float,
        step_indices: np.ndarray,
    ):
        r = np.asarray(r, dtype=float)
        v = np.asarray(v, dtype=float)
        dv = np.asarray(dv, dtype=float)
        if not np.all(np.diff(r) > 0.0):
            raise ValueError("grid radii must be strictly increasing")
        if not np.all(v > 0.0):
            raise ValueError("profile values must stay positive")
        for a in (r, v, dv):
            a.setflags(write=False)
        self.params = params
        self.r = r
        self.v = v
        self.dv = dv
        self.status = status
        self.rtol = float(rtol)
        self.atol = float(atol)
        self.step_indices = np.asarray(step_indices, dtype=int)
        self.step_indices.setflags(write=False)
        self._spline: CubicHermiteSpline | None = None

    @property
    def r0(self) -> float:
        return float(self.r[0])

    def value_at(self, radius, derivative: bool = False):
        """v at arbitrary radii: series below r0, Hermite interpolation on
        the grid.  Radii beyond the last grid point raise (no extrapolation).
        With derivative=True returns the pair (v, v')."""
        radius = np.asarray(radius, dtype=float)
        if np.any(radius > self.r[-1] * (1.0 + 1e-12)):
            raise ValueError(
                f"radius beyond profile grid end {self.r[-1]!r}; no extrapolation"
            )
        if np.any(radius < 0.0):
            raise ValueError("radius must be nonnegative")
        if self._spline is None:
            self._spline = CubicHermiteSpline(self.r, self.v, self.dv)
        p = self.params
        v2 = second_derivative_at_origin(p)
        small = radius < self.r[0]
        clipped = np.clip(radius, self.r[0], self.r[-1])
        out = np.where(small, p.eta + 0.5 * v2 * radius**2, self._spline(clipped))
        if not derivative:
            return float(out) if out.ndim == 0 else out
        dout = np.where(small, v2 * radius, self._spline(clipped, 1))
        if out.ndim == 0:
            return float(out), float(dout)
        return out, dout


def second_derivative_at_origin(params: SolitonParams) -> float:
    n = params.n
    return -params.alpha * params.eta ** (2.0 - params.m) / (n * (n - 1))


def series_start(params: SolitonParams, r0: float) -> tuple[float, float]:
    """Taylor start at r0: v = eta + v''(0) r0^2 / 2, v' = v''(0) r0.

    v''(0) = -alpha eta^(2-m) / (n (n-1)) follows from the equation at the
    origin with v'(0) = 0, where the v'/r term contributes (n-1) v''(0).
    Truncation error is O(r0^4) because the profile is even in r.
    """
    if not (r0 > 0.0):
        raise ValueError(f"r0 must be positive, got {r0!r}")
    v2 = second_derivative_at_origin(params)
    return params.eta + 0.5 * v2 * r0 * r0, v2 * r0


def _rhs(n: int, m: float, alpha: float, beta: float):
    one_m = 1.0 - m

    def f(r, y):
        v, dv = y
        if v <= 0.0:
            # force step rejection instead of complex powers
            return [dv, np.nan]
        vpp = (
            -(m - 1.0) * dv * dv / v
            - (n - 1) * dv / r
            - (alpha * v + beta * r * dv) * v**one_m / (n - 1)
        )
        return [dv, vpp]

    return f


def solve_profile(
    params: SolitonParams,
    r_max: float,
    rtol: float = 1e-9,
    atol: float | None = None,
    r0_scale: float = DEFAULT_R0_SCALE,
    points_per_decade: int = DEFAULT_POINTS_PER_DECADE,
) -> RadialProfile:
    """Integrate the profile equation from the series start to r_max.

    The returned grid unions the accepted adaptive steps with a log-uniform
    refinement (points_per_decade) filled from dense output, so later
    geometry evaluations and quadratures work on stored points only.
    The solver reports whatever trajectory the initial data generates;
    it makes no uniqueness claim.
    """
    check = validate(params)
    if not check.ok:
        raise ValueError("invalid parameters: " + "; ".join(check.violations))
    if not (r_max > 0.0):
        raise ValueError(f"r_max must be positive, got {r_max!r}")
    eta = params.eta
    if atol is None:
        # far below any attainable profile scale (deep tails reach ~1e-13 eta),
        # so the error control stays effectively relative everywhere
        atol = 1e-30 * eta
    r0 = r0_scale * eta ** ((params.m - 1.0) / 2.0)
    if r0 >= r_max:
        raise ValueError(f"r0 = {r0!r} must be below r_max = {r_max!r}")
    v0, dv0 = series_start(params, r0)
    cap = BLOWUP_CAP * eta

    def hit_cap(r, y):
        return y[0] - cap

    hit_cap.terminal = True
    hit_cap.direction = 1

    sol = solve_ivp(
        _rhs(params.n, params.m, params.alpha, params.beta),
        (r0, r_max),
        (v0, dv0),
        method="RK45",
        rtol=rtol,
        atol=atol,
        dense_output=True,
        events=(hit_cap,),
    )

    if sol.status == 1:
        status = ProfileStatus("BlowUp", float(sol.t_events[0][0]))
    elif sol.status == 0:
        status = ProfileStatus("Global", float(r_max))
    else:
        # controller stall: blow-up if v was still climbing, else a stall
        rising = sol.y[1, -1] > 0.0 and sol.y[0, -1] > eta
        kind = "BlowUp" if rising else "StepFailure"
        status = ProfileStatus(kind, float(sol.t[-1]))

    r_end = sol.t[-1] if sol.status != 1 else float(sol.t_events[0][0])
    steps = sol.t[sol.t <= r_end]
    decades = max(np.log10(r_end / r0), 1e-9)
    n_refine = max(int(np.ceil(decades * points_per_decade)), 2)
    refine = np.geomspace(r0, r_end, n_refine)
    grid = np.union1d(steps, refine)
    vals = sol.sol(grid)
    v, dv = vals[0], vals[1]

    # defensive: truncate anything past a positivity loss
    bad = np.flatnonzero(v <= 0.0)
    if bad.size:
        cut = bad[0]
        if cut < 10:
            raise RuntimeError("profile lost positivity immediately; inspect parameters")
        grid, v, dv = grid[:cut], v[:cut], dv[:cut]
        status = ProfileStatus("StepFailure", float(grid[-1]))

    step_indices = np.searchsorted(grid, steps[steps <= grid[-1]])
    return RadialProfile(params, grid, v, dv, status, rtol, atol, step_indices)


def _triple_indices(npts: int) -> np.ndarray:
    """(npts, 3) consecutive triples: centered for interior points, the
    first/last triple reused at the ends."""
    if npts < 3:
        raise ValueError("need at least 3 points")
    left = np.clip(np.arange(npts) - 1, 0, npts - 3)
    return left[:, None] + np.arange(3)[None, :]


def _quintic_second_derivative(r: np.ndarray, v: np.ndarray, dv: np.ndarray) -> np.ndarray:
    """v'' at each point of a grid, from the unique quintic matching (v, v')
    at three consecutive points.  Truncation O(h^4)."""
    npts = len(r)
    idx = _triple_indices(npts)
    rt = r[idx]
    scale = rt[:, 2] - rt[:, 0]
    xi = (rt - r[:, None]) / scale[:, None]  # eval point at xi = 0

    A = np.zeros((npts, 6, 6))
    B = np.zeros((npts, 6))
    powers = np.arange(6)
    for j in range(3):
        x = xi[:, j][:, None]
        A[:, 2 * j, :] = x**powers
        A[:, 2 * j + 1, 1:] = powers[1:] * x ** (powers[1:] - 1)
        B[:, 2 * j] = v[idx[:, j]]
        B[:, 2 * j + 1] = dv[idx[:, j]] * scale
    coeffs = np.linalg.solve(A, B[:, :, None])[:, :, 0]
    return 2.0 * coeffs[:, 2] / scale**2


def _quadratic_first_derivative(r: np.ndarray, f: np.ndarray) -> np.ndarray:
    """f' at each point from the Lagrange quadratic through its triple."""
    idx = _triple_indices(len(r))
    x0, x1, x2 = r[idx[:, 0]], r[idx[:, 1]], r[idx[:, 2]]
    f0, f1, f2 = f[idx[:, 0]], f[idx[:, 1]], f[idx[:, 2]]
    x = r
    return (
        f0 * (2.0 * x - x1 - x2) / ((x0 - x1) * (x0 - x2))
        + f1 * (2.0 * x - x0 - x2) / ((x1 - x0) * (x1 - x2))
        + f2 * (2.0 * x - x0 - x1) / ((x2 - x0) * (x2 - x1))
    )


def residuals(profile: RadialProfile) -> ResidualReport:
    """Pointwise and integral-form defects of a stored profile.

    The pointwise residual reconstructs v'' from (v, v') at the accepted
    step points and compares it with the equation's right side, normalized
    by |alpha v| + |beta r v'| plus a small floor.  The integral defect
    tests

        (n-1) r^(n-1) v^(m-1) v'  =  -beta r^n v + (n beta - alpha) * I(r),
        I(r) = integral of z^(n-1) v(z) from 0 to r,

    with composite trapezoid over the stored grid and the 0-to-r0 stub
    integrated analytically from the series start; it is normalized by the
    largest participating term so total cancellations do not divide by zero.
    """
    p = profile.params
    r, v, dv = profile.r, profile.v, profile.dv
    if len(r) < 10:
        raise ValueError("residuals need at least 10 grid points")
    n, m, alpha, beta = p.n, p.m, p.alpha, p.beta

    si = profile.step_indices
    rs, vs, dvs = r[si], v[si], dv[si]
    vpp_data = _quintic_second_derivative(rs, vs, dvs)
    # where v is flat to roundoff across a triple the quintic coefficients
    # cancel catastrophically; there dv still has full relative precision
    # and the local steps are tiny, so differentiate dv directly instead
    idx = _triple_indices(len(rs))
    span = (np.max(vs[idx], axis=1) - np.min(vs[idx], axis=1)) / np.max(
        np.abs(vs[idx]), axis=1
    )
    flat = span < 1e-9
    if np.any(flat):
        vpp_data = np.where(flat, _quadratic_first_derivative(rs, dvs), vpp_data)
    vpp_ode = (
        -(m - 1.0) * dvs * dvs / vs
        - (n - 1) * dvs / rs
        - (alpha * vs + beta * rs * dvs) * vs ** (1.0 - m) / (n - 1)
    )
    floor = 1e-3 * p.eta * max(1.0, abs(alpha) + abs(beta))
    den = np.abs(alpha * vs) + np.abs(beta * rs * dvs) + floor
    max_ode = float(np.max(np.abs(vpp_data - vpp_ode) / den))

    lhs = (n - 1) * r ** (n - 1) * v ** (m - 1.0) * dv
    integrand = r ** (n - 1) * v
    segs = 0.5 * np.diff(r) * (integrand[:-1] + integrand[1:])
    v2 = second_derivative_at_origin(p)
    stub = p.eta * r[0] ** n / n + v2 * r[0] ** (n + 2) / (2 * (n + 2))
    integral = stub + np.concatenate(([0.0], np.cumsum(segs)))
    term1 = -beta * r**n * v
    term2 = (n * beta - alpha) * integral
    rhs = term1 + term2
    den = np.maximum.reduce([np.abs(lhs), np.abs(rhs), np.abs(term1), np.abs(term2)])
    defect = np.where(den > 1e-280, np.abs(lhs - rhs) / np.where(den > 0, den, 1.0), 0.0)
    max_integral = float(np.max(defect))

    return ResidualReport(max_ode, max_integral, len(r))


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_profile_csv(profile: RadialProfile, path) -> None:
    with open(path, "w") as fh:
        fh.write(PROFILE_CSV_HEADER + "\n")
        for r, v, dv in zip(profile.r, profile.v, profile.dv):
            fh.write(f"{_fmt(r)},{_fmt(v)},{_fmt(dv)}\n")


def write_profile_json(profile: RadialProfile, path) -> None:
    p = profile.params
    doc = {
        "params": {
            "n": p.n,
            "m": p.m,
            "alpha": p.alpha,
            "beta": p.beta,
            "rho": p.rho,
            "eta": p.eta,
        },
        "status": {"kind": profile.status.kind, "radius": profile.status.radius},
        "rtol": profile.rtol,
        "atol": profile.atol,
        "grid_points": len(profile.r),
        "step_indices": profile.step_indices.tolist(),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_profile(csv_path, json_path) -> RadialProfile:
    """Rebuild a profile from its CSV and sidecar, bit-for-bit."""
    with open(json_path) as fh:
        doc = json.load(fh)
    pd = doc["params"]
    params = SolitonParams(
        n=int(pd["n"]), m=pd["m"], alpha=pd["alpha"], beta=pd["beta"], eta=pd["eta"], rho=pd["rho"]
    )
    data = np.loadtxt(csv_path, delimiter=",", skiprows=1)
    return RadialProfile(
        params,
        data[:, 0],
        data[:, 1],
        data[:, 2],
        ProfileStatus(doc["status"]["kind"], doc["status"]["radius"]),
        doc["rtol"],
        doc["atol"],
        np.asarray(doc["step_indices"], dtype=int),
    )
