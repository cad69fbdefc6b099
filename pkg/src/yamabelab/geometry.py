"""Curvature quantities of the conformal metric carried by a profile.

For soliton runs (m = (n-2)/(n+2), rho present) the metric v^(4/(n+2)) dx^2
has, along the radial profile,

    q     = r v'/v,
    psi_s = 1 + (1-m)/2 * q                (radial derivative of psi = w^(1/2)
                                            with respect to the arclength-like
                                            coordinate s~),
    R     = rho + 2 beta psi_s             (= (1-m)(alpha + beta q)),
    K1    = (1 - psi_s^2)/w                (tangent 2-planes),
    K0    = -R_r / (2 beta r v^(1-m))      (radial 2-planes).

K1 is evaluated in the algebraically identical factored form
-(1-m) q (1 + (1-m) q / 4)/w, which avoids the 1-(1+x)^2 cancellation near
the origin.  K0's numerator R_r is taken along the trajectory (the v'' needed
is substituted from the profile equation, which cancels beta), and a second,
independent evaluation of R_r through its source-integral representation is
recorded as a cross-check.

The scale-invariant profile w = r^2 v^(1-m), as a function of s = log r,
obeys an autonomous second-order equation; w_log_dynamics integrates it for
long-range continuation where direct r-integration would waste steps.

Self-similar solutions of u_t = (n-1)/m * Laplacian(u^m) are evaluated from
the profile by the Forward/Backward/Eternal scalings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .core_params import SolitonParams, validate
from .profile_solver import RadialProfile

__all__ = [
    "GeometryCurves",
    "LogDynamics",
    "SelfSimilarSpec",
    "compute_geometry",
    "scalar_curvature",
    "sectional_curvatures",
    "consistency_check_w",
    "w_log_dynamics",
    "log_handoff",
    "extrapolate_origin",
    "self_similar_eval",
    "pde_residual",
    "write_geometry_csv",
]

GEOMETRY_CSV_HEADER = "r,v,w,R,K0,K1,psi_s"


@dataclass(frozen=True)
class GeometryCurves:
    """Derived curves on the profile grid.

    k0_quadrature is the independent source-integral evaluation of K0;
    k0_agreement is the sup-norm-normalized discrepancy between the two
    (pointwise relative error is meaningless where K0 crosses zero)."""

    params: SolitonParams
    r: np.ndarray
    v: np.ndarray
    w: np.ndarray
    R: np.ndarray
    K0: np.ndarray
    K1: np.ndarray
    psi_s: np.ndarray
    s_tilde: np.ndarray
    k0_quadrature: np.ndarray
    k0_agreement: float


def _require_soliton(params: SolitonParams, what: str) -> None:
    if params.rho is None:
        raise ValueError(f"{what} requires soliton parameters (rho present)")


def scalar_curvature(profile: RadialProfile) -> np.ndarray:
    """R on the grid, R = (1-m)(alpha + beta r v'/v) = rho + 2 beta psi_s.

    The second arrangement is used so the stored identity with psi_s holds
    bitwise.  The r -> 0 limit is alpha (1-m) = 2 beta + rho."""
    p = profile.params
    _require_soliton(p, "scalar curvature")
    q = profile.r * profile.dv / profile.v
    psi_s = 1.0 + 0.5 * (1.0 - p.m) * q
    return p.rho + 2.0 * p.beta * psi_s


def _k0_trajectory(profile: RadialProfile) -> np.ndarray:
    # K0 = -R_r/(2 beta r v^(1-m)); R_r = (1-m) beta (q'), and substituting
    # v'' from the equation cancels beta, leaving a formula finite at r -> 0.
    p = profile.params
    n, m = p.n, p.m
    r, v, dv = profile.r, profile.v, profile.dv
    one_m = 1.0 - m
    vpp = (
        -(m - 1.0) * dv * dv / v
        - (n - 1) * dv / r
        - (p.alpha * v + p.beta * r * dv) * v**one_m / (n - 1)
    )
    lv = dv / v
    return -one_m * (lv / r + vpp / v - lv * lv) / (2.0 * v**one_m)


def _k0_quadrature(profile: RadialProfile, R: np.ndarray) -> np.ndarray:
    """K0 via the source-integral representation of R_r.

    R satisfies the elliptic equation (n-1) Lap_g R + beta r R_r
    + R(R - rho) = 0 with Lap_g the Laplacian of the metric
    v^(4/(n+2)) dx^2; written out in the Euclidean radial variable,

        R_rr + ((n-1)/r + 2m v'/v) R_r + (beta/(n-1)) r v^(1-m) R_r
            = -(1/(n-1)) v^(1-m) R (R - rho),

    whose integrating factor is r^(n-1) v^(2m) e^I.  Hence

    R_r(r) = -J(r)/r^(n-1) / v(r)^(2m) where
    J(r) = int_0^r z^(n-1) Q(z) e^(I(z)-I(r)) dz,
    Q = v^(1+m) R (R - rho)/(n-1),
    I(r) = beta/(n-1) int_0^r tau v^(1-m) dtau.

    The shifted exponent keeps every factor <= 1 for beta > 0, so nothing
    overflows even when I(r) grows like r^2.  Trapezoid segments; the first
    segment uses the analytic r^n/n stub."""
    p = profile.params
    n, m, beta, rho = p.n, p.m, p.beta, p.rho
    r, v = profile.r, profile.v
    Q = v ** (1.0 + m) * R * (R - rho) / (n - 1)
    g = r ** (n - 1) * Q
    tau_x = r * v ** (1.0 - m)
    dI = (beta / (n - 1)) * 0.5 * np.diff(r) * (tau_x[:-1] + tau_x[1:])

    J = np.empty_like(r)
    J[0] = r[0] ** n * Q[0] / n
    dr = np.diff(r)
    for k in range(1, len(r)):
        shift = math.exp(-dI[k - 1])
        J[k] = shift * (J[k - 1] + 0.5 * dr[k - 1] * g[k - 1]) + 0.5 * dr[k - 1] * g[k]
    # K0 = -R_r/(2 beta r v^(1-m)); the v^(2m) from the integrating factor
    # combines with v^(1-m) into v^(1+m)
    return J / (2.0 * beta * r**n * v ** (1.0 + m))


def sectional_curvatures(profile: RadialProfile) -> tuple[np.ndarray, np.ndarray]:
    """(K0, K1) on the grid; see compute_geometry for the recorded cross-check."""
    curves = compute_geometry(profile)
    return curves.K0, curves.K1


def compute_geometry(profile: RadialProfile) -> GeometryCurves:
    """All curvature curves plus the K0 cross-check in one pass."""
    p = profile.params
    _require_soliton(p, "geometry")
    if p.beta == 0.0:
        raise ValueError("sectional curvature needs beta != 0")
    r, v, dv = profile.r, profile.v, profile.dv
    m = p.m
    one_m = 1.0 - m
    q = r * dv / v
    psi_s = 1.0 + 0.5 * one_m * q
    w = r * r * v**one_m
    R = p.rho + 2.0 * p.beta * psi_s
    # factored (1 - psi_s^2)/w, exact in the small-q regime
    K1 = -one_m * q * (1.0 + 0.25 * one_m * q) / w
    K0 = _k0_trajectory(profile)
    K0_quad = _k0_quadrature(profile, R)
    scale = max(float(np.max(np.abs(K0))), float(np.max(np.abs(K0_quad))), 1e-300)
    agreement = float(np.max(np.abs(K0 - K0_quad)) / scale)

    s = np.log(r)
    psi = np.sqrt(w)
    seg = 0.5 * np.diff(s) * (psi[:-1] + psi[1:])
    s_tilde = psi[0] + np.concatenate(([0.0], np.cumsum(seg)))

    return GeometryCurves(
        params=p,
        r=r,
        v=v,
        w=w,
        R=R,
        K0=K0,
        K1=K1,
        psi_s=psi_s,
        s_tilde=s_tilde,
        k0_quadrature=K0_quad,
        k0_agreement=agreement,
    )


def consistency_check_w(profile: RadialProfile) -> float:
    """Worse of two finite-difference defects of the stored w curve:
    w'(r) against 2 r v^(1-m) psi_s, and w_s (log-radius derivative)
    against (w/beta)(R - rho).  Sup-norm normalized."""
    p = profile.params
    _require_soliton(p, "w consistency check")
    if p.beta == 0.0:
        raise ValueError("w consistency check needs beta != 0")
    r, v = profile.r, profile.v
    one_m = 1.0 - p.m
    w = r * r * v**one_m
    q = r * profile.dv / v
    psi_s = 1.0 + 0.5 * one_m * q
    R = p.rho + 2.0 * p.beta * psi_s

    def central(x, y):
        hl = x[1:-1] - x[:-2]
        hr = x[2:] - x[1:-1]
        return (y[2:] * hl**2 - y[:-2] * hr**2 + y[1:-1] * (hr**2 - hl**2)) / (
            hl * hr * (hl + hr)
        )

    a1 = 2.0 * r * v**one_m * psi_s
    d1 = np.max(np.abs(central(r, w) - a1[1:-1])) / np.max(np.abs(a1))
    s = np.log(r)
    a2 = (w / p.beta) * (R - p.rho)
    d2 = np.max(np.abs(central(s, w) - a2[1:-1])) / np.max(np.abs(a2))
    return float(max(d1, d2))


@dataclass(frozen=True)
class LogDynamics:
    """Continuation of w (called w~ in log-radius form) along s = log r."""

    s: np.ndarray
    w_tilde: np.ndarray
    w_tilde_s: np.ndarray
    R: np.ndarray
    status: str  # Completed | Stopped


def log_handoff(profile: RadialProfile, r_h: float) -> tuple[float, tuple[float, float]]:
    """Initial data (s0, (w~, w~_s)) for w_log_dynamics taken from a profile."""
    idx = int(np.searchsorted(profile.r, r_h))
    idx = min(max(idx, 0), len(profile.r) - 1)
    r = float(profile.r[idx])
    v = float(profile.v[idx])
    dv = float(profile.dv[idx])
    one_m = 1.0 - profile.params.m
    wt = r * r * v**one_m
    wts = wt * (2.0 + one_m * r * dv / v)
    return math.log(r), (wt, wts)


def w_log_dynamics(
    params: SolitonParams,
    s_range: tuple[float, float],
    w_init: tuple[float, float],
    rtol: float = 1e-10,
    atol: float = 1e-12,
    samples_per_unit: int = 40,
) -> LogDynamics:
    """Integrate the autonomous log-radius equation

        w~_ss = (1-2m)/(1-m) w~_s^2/w~ - beta/(n-1) w~ w~_s
                - rho/(n-1) w~^2 + 2(n-2-nm)/(1-m) w~

    from (w~, w~_s) at s_range[0] to s_range[1].  Internally the state is
    W = log w~ (positivity is structural and the stiff quadratic terms are
    tamed); the equation requires soliton parameters.  Integration stops
    with status Stopped if w~ collapses toward 0 or w~_s diverges.
    """
    _require_soliton(params, "log-radius dynamics")
    check = validate(params)
    if not check.ok:
        raise ValueError("invalid parameters: " + "; ".join(check.violations))
    wt0, wts0 = w_init
    if not (wt0 > 0.0):
        raise ValueError(f"w~ must be positive at handoff, got {wt0!r}")
    n, m = params.n, params.m
    alpha, beta = params.alpha, params.beta
    one_m = 1.0 - m
    s0, s1 = s_range

    def rhs(s, y):
        W, Ws = y
        e = math.exp(W)
        Wss = (
            -m * (Ws - 2.0) ** 2 / one_m
            - (n - 2) * (Ws - 2.0)
            - e * (one_m * alpha - 2.0 * beta + beta * Ws) / (n - 1)
        )
        return [Ws, Wss]

    def collapse(s, y):
        return y[0] + 60.0  # w~ below e^-60

    collapse.terminal = True
    collapse.direction = -1

    def runaway(s, y):
        return abs(y[1]) - 1e3

    runaway.terminal = True
    runaway.direction = 1

    sol = solve_ivp(
        rhs,
        (s0, s1),
        (math.log(wt0), wts0 / wt0),
        method="RK45",
        rtol=rtol,
        atol=atol,
        dense_output=True,
        events=(collapse, runaway),
    )
    s_end = sol.t[-1]
    count = max(int(math.ceil((s_end - s0) * samples_per_unit)), 2)
    s = np.linspace(s0, s_end, count)
    W, Ws = sol.sol(s)
    wt = np.exp(W)
    return LogDynamics(
        s=s,
        w_tilde=wt,
        w_tilde_s=wt * Ws,
        R=params.rho + params.beta * Ws,
        status="Completed" if sol.status == 0 else "Stopped",
    )


def extrapolate_origin(r: np.ndarray, y: np.ndarray) -> float:
    """Limit of an even curve at r = 0 from three small-radius samples.

    Fits y = c0 + c1 r^2 + c2 r^4 through points near r[0]*{1, sqrt(10), 10}
    (spread over a decade for conditioning) and returns c0."""
    if len(r) < 3:
        raise ValueError("need at least 3 grid points")
    targets = r[0] * np.array([1.0, math.sqrt(10.0), 10.0])
    idx = np.unique(np.searchsorted(r, targets))
    while len(idx) < 3:  # degenerate tiny grids
        idx = np.unique(np.concatenate([idx, [min(idx[-1] + 1, len(r) - 1)]]))
        if idx[-1] == len(r) - 1 and len(idx) < 3:
            idx = np.arange(3)
            break
    ri, yi = r[idx[:3]], y[idx[:3]]
    x = (ri / ri[-1]) ** 2
    A = np.vander(x, 3, increasing=True)
    c = np.linalg.solve(A, yi)
    return float(c[0])


@dataclass(frozen=True)
class SelfSimilarSpec:
    """One of the three time-scaled solution families built from a profile.

    Forward:  u(x,t) = t^(-a) v(x t^(-b)),        needs a = (2b-1)/(1-m), t > 0
    Backward: u(x,t) = (T-t)^a v(x (T-t)^b),      needs a = (2b+1)/(1-m) > 0, t < T
    Eternal:  u(x,t) = e^(-a t) v(x e^(-b t)),    needs a = 2b/(1-m)
    """

    kind: str  # Forward | Backward | Eternal
    params: SolitonParams
    T: float | None = None

    def check(self) -> None:
        m, alpha, beta = self.params.m, self.params.alpha, self.params.beta
        one_m = 1.0 - m
        want = {
            "Forward": (2.0 * beta - 1.0) / one_m,
            "Backward": (2.0 * beta + 1.0) / one_m,
            "Eternal": 2.0 * beta / one_m,
        }
        if self.kind not in want:
            raise ValueError(f"unknown kind {self.kind!r}")
        target = want[self.kind]
        if abs(alpha - target) > 1e-9 * max(1.0, abs(target)):
            raise ValueError(
                f"{self.kind} scaling requires alpha = {target!r}, got {alpha!r}"
            )
        if self.kind == "Backward":
            if not (alpha > 0.0):
                raise ValueError("Backward scaling requires alpha > 0")
            if self.T is None or not (self.T > 0.0):
                raise ValueError("Backward scaling requires a positive horizon T")


def self_similar_eval(spec: SelfSimilarSpec, profile: RadialProfile, x, t: float):
    """u(x, t) by radial interpolation of the profile; x is a scalar radius
    or a coordinate vector.  Scaled radii beyond the stored grid raise."""
    spec.check()
    alpha, beta = spec.params.alpha, spec.params.beta
    xr = np.asarray(x, dtype=float)
    radius = float(np.sqrt(np.sum(xr * xr))) if xr.ndim else abs(float(xr))
    if spec.kind == "Forward":
        if not (t > 0.0):
            raise ValueError("Forward scaling needs t > 0")
        return t ** (-alpha) * profile.value_at(radius * t ** (-beta))
    if spec.kind == "Backward":
        if not (t < spec.T):
            raise ValueError("Backward scaling needs t < T")
        tau = spec.T - t
        return tau**alpha * profile.value_at(radius * tau**beta)
    return math.exp(-alpha * t) * profile.value_at(radius * math.exp(-beta * t))


def pde_residual(
    spec: SelfSimilarSpec,
    profile: RadialProfile,
    r_points: np.ndarray,
    t_points: np.ndarray,
    h_r: float,
    h_t: float,
) -> float:
    """Normalized defect of u_t = (n-1)/m * Laplacian(u^m) on an (r, t)
    lattice, by central differences in both variables; radial Laplacian
    f'' + (n-1)/r f'.  Sup-norm normalized; returns 0 for an identically
    flat lattice."""
    spec.check()
    n, m = spec.params.n, spec.params.m
    coef = (n - 1) / m
    res = []
    scale = []
    for t in np.asarray(t_points, dtype=float):
        for r in np.asarray(r_points, dtype=float):
            u_c = self_similar_eval(spec, profile, r, t)
            u_tp = self_similar_eval(spec, profile, r, t + h_t)
            u_tm = self_similar_eval(spec, profile, r, t - h_t)
            u_rp = self_similar_eval(spec, profile, r + h_r, t)
            u_rm = self_similar_eval(spec, profile, r - h_r, t)
            ut = (u_tp - u_tm) / (2.0 * h_t)
            f_c, f_p, f_m = u_c**m, u_rp**m, u_rm**m
            lap = (f_p - 2.0 * f_c + f_m) / h_r**2 + (n - 1) / r * (f_p - f_m) / (
                2.0 * h_r
            )
            res.append(ut - coef * lap)
            scale.append(abs(ut) + abs(coef * lap))
    top = float(np.max(np.abs(res)))
    bottom = float(np.max(scale))
    return top / bottom if bottom > 0.0 else 0.0


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_geometry_csv(curves: GeometryCurves, path) -> None:
    with open(path, "w") as fh:
        fh.write(GEOMETRY_CSV_HEADER + "\n")
        for row in zip(curves.r, curves.v, curves.w, curves.R, curves.K0, curves.K1, curves.psi_s):
            fh.write(",".join(_fmt(x) for x in row) + "\n")
