"""Asymptotic verification: observed limits vs closed-form targets, plus the
invariant battery.

Limits are estimated by a Cauchy-tail criterion (value at the largest radius
plus the oscillation width over the last decade); no convergence rate is
assumed.  Verdicts are three-valued: Pass when the observed value is within
5% of the target, Inconclusive when it is not but the tail has visibly not
settled, Fail otherwise.  Strict pointwise inequalities get a 1e-6 relative
slack; any violation beyond that marks the whole report Fail.

Reports are plain data with stable JSON ordering; verify() is a pure
function of (params, numerics), so identical inputs give identical reports.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .core_params import (
    SolitonParams,
    TheoreticalPredictions,
    blowup_certificate,
    classify,
    predictions,
    validate,
)
from .geometry import GeometryCurves, compute_geometry
from .profile_solver import RadialProfile, _rhs, solve_profile

__all__ = [
    "LimitEstimate",
    "InvariantRecord",
    "AsymptoticReport",
    "estimate_limits",
    "invariant_battery",
    "w_equation_defect",
    "verify",
    "report_to_json",
]

STRICT_SLACK = 1e-6      # relative slack on strict pointwise inequalities
LIMIT_TOLERANCE = 0.05   # relative tolerance on limit values at the tail


@dataclass(frozen=True)
class LimitEstimate:
    value: float
    tail_width: float  # max minus min over the last decade of radii
    converged: bool    # tail width below 10x the integration tolerance


@dataclass(frozen=True)
class InvariantRecord:
    name: str
    applicable: bool
    margin: float      # normalized violation; <= threshold means satisfied
    location: float    # radius of the worst point
    threshold: float
    ok: bool


@dataclass(frozen=True)
class Verdict:
    verdict: str       # Pass | Fail | Inconclusive
    rel_err: float | None


@dataclass(frozen=True)
class AsymptoticReport:
    params: SolitonParams
    variant: str
    validity: str
    observed: dict
    predicted: TheoreticalPredictions
    verdicts: dict
    invariant_log: tuple
    overall: str  # Pass | Inconclusive | Fail


def estimate_limits(curves: GeometryCurves, profile: RadialProfile) -> dict:
    """Tail values and Cauchy widths for the tracked quantities.

    Needs a Global profile reaching r >= 100 so a last-decade window exists
    away from the core."""
    if profile.status.kind != "Global":
        raise ValueError(f"limits need a Global profile, got {profile.status.kind}")
    r = profile.r
    if r[-1] < 100.0:
        raise ValueError("limits need a profile reaching r >= 100")
    tail = r >= r[-1] / 10.0
    q = r * profile.dv / profile.v

    quantities = {
        "w": curves.w,
        "R": curves.R,
        "K0": curves.K0,
        "K1": curves.K1,
        "rvp_over_v": q,
    }
    safe_log = np.log(np.maximum(r, np.e))  # w/log r only meaningful at large r
    quantities["w_over_logr"] = curves.w / safe_log
    k = profile.params.k
    if k is not None:
        quantities["r2v2k"] = r * r * profile.v ** (2.0 * k)

    out = {}
    for name, curve in quantities.items():
        window = curve[tail]
        value = float(curve[-1])
        width = float(np.max(window) - np.min(window))
        converged = width <= 10.0 * profile.rtol * max(abs(value), 1e-300)
        out[name] = LimitEstimate(value=value, tail_width=width, converged=converged)
    return out


def _record(name, applicable, margin=0.0, location=0.0, threshold=STRICT_SLACK):
    margin = float(margin)
    return InvariantRecord(
        name=name,
        applicable=bool(applicable),
        margin=margin,
        location=float(location),
        threshold=threshold,
        ok=(not applicable) or margin <= threshold,
    )


def _worst(values: np.ndarray, r: np.ndarray) -> tuple[float, float]:
    i = int(np.argmax(values))
    return float(values[i]), float(r[i])


def invariant_battery(profile: RadialProfile, curves: GeometryCurves | None) -> tuple:
    """Every pointwise monitor, with normalized margins and worst locations.

    Monitors that do not apply to the regime are recorded as not applicable
    rather than silently dropped."""
    p = profile.params
    n, m, alpha, beta = p.n, p.m, p.alpha, p.beta
    r, v, dv = profile.r, profile.v, profile.dv
    q = r * dv / v
    sup = lambda a: max(float(np.max(np.abs(a))), 1e-300)
    records = []

    records.append(_record("v-positive", True, -np.min(v) / p.eta, r[int(np.argmin(v))]))

    ratio_ok = beta != 0.0 and m * alpha / beta <= (n - 2)
    neg_guard = alpha < 0.0 and ratio_ok
    pos_guard = alpha > 0.0 and (ratio_ok or alpha >= n * beta)
    if pos_guard:
        margin, loc = _worst(dv / sup(dv), r)
        records.append(_record("dv-sign", True, margin, loc))
    elif neg_guard:
        margin, loc = _worst(-dv / sup(dv), r)
        records.append(_record("dv-sign", True, margin, loc))
    else:
        records.append(_record("dv-sign", False))

    if p.k is not None and (pos_guard or neg_guard):
        margin, loc = _worst(-(1.0 + p.k * q), r)
        records.append(_record("v-plus-krv-positive", True, margin, loc))
    else:
        records.append(_record("v-plus-krv-positive", False))

    w = r * r * v ** (1.0 - m)
    if alpha > 0.0 and alpha >= n * beta:
        bound = 2.0 * n * (n - 1) / (alpha * (1.0 - m))
        margin, loc = _worst(w / bound - 1.0, r)
        records.append(_record("w-upper-global", True, margin, loc))
        combo = (alpha / (n * (n - 1))) * w + q
        margin, loc = _worst(combo / sup(q), r)
        records.append(_record("w-q-combo", True, margin, loc))
    else:
        records.append(_record("w-upper-global", False))
        records.append(_record("w-q-combo", False))

    cls = classify(p)
    covered = cls.validity == "CoveredByTheorems"
    shrinking = cls.variant == "Shrinking"

    if covered and shrinking:
        a0 = (n - 1) * (n - 2) / p.rho
        margin, loc = _worst(w / a0 - 1.0, r)
        records.append(_record("w-upper-shrinking", True, margin, loc))
    else:
        records.append(_record("w-upper-shrinking", False))

    if covered:
        lim = 2.0 / (1.0 - m)
        hi = np.max(q) / lim
        lo = (-lim - np.min(q)) / lim
        if hi >= lo:
            records.append(_record("rvp-range", True, hi, r[int(np.argmax(q))]))
        else:
            records.append(_record("rvp-range", True, lo, r[int(np.argmin(q))]))
        psi = 1.0 + 0.5 * (1.0 - m) * q
        margin_hi = float(np.max(psi)) - 1.0
        margin_lo = -float(np.min(psi))
        if margin_hi >= margin_lo:
            records.append(_record("psi-range", True, margin_hi, r[int(np.argmax(psi))]))
        else:
            records.append(_record("psi-range", True, margin_lo, r[int(np.argmin(psi))]))
    else:
        records.append(_record("rvp-range", False))
        records.append(_record("psi-range", False))

    if covered and curves is not None:
        for name, K in (("K0-positive", curves.K0), ("K1-positive", curves.K1)):
            margin, loc = _worst(-K / sup(K), r)
            records.append(_record(name, True, margin, loc))
        if alpha > 0.0:
            top = alpha * (1.0 - m)
            hi = (np.max(curves.R) - top) / top
            lo = -np.min(curves.R) / top
            if hi >= lo:
                records.append(_record("R-range", True, hi, r[int(np.argmax(curves.R))]))
            else:
                records.append(_record("R-range", True, lo, r[int(np.argmin(curves.R))]))
        else:
            records.append(_record("R-range", False))
        dR = np.diff(curves.R)
        margin, loc = _worst(dR / sup(dR), r[1:])
        records.append(_record("R-monotone", True, margin, loc))
        dw = np.diff(curves.w)
        margin, loc = _worst(-dw / sup(dw), r[1:])
        records.append(_record("w-monotone", True, margin, loc))
        if shrinking:
            margin, loc = _a3_tail_margin(r, curves.w)
            records.append(_record("wss-tail-vanishing", True, margin, loc, threshold=0.05))
        else:
            records.append(_record("wss-tail-vanishing", False, threshold=0.05))
    else:
        for name in ("K0-positive", "K1-positive", "R-range", "R-monotone", "w-monotone"):
            records.append(_record(name, False))
        records.append(_record("wss-tail-vanishing", False, threshold=0.05))

    if profile.status.kind == "BlowUp" and alpha < 0.0 and beta <= 0.0:
        cert = blowup_certificate(p)
        if cert.radius_bound is not None:
            records.append(
                _record(
                    "blowup-soundness",
                    True,
                    profile.status.radius / cert.radius_bound - 1.0,
                    profile.status.radius,
                )
            )
        else:
            records.append(_record("blowup-soundness", False))
    else:
        records.append(_record("blowup-soundness", False))

    return tuple(records)


def _a3_tail_margin(r: np.ndarray, w: np.ndarray) -> tuple[float, float]:
    # second log-radius derivative of w must die out along the tail
    s = np.log(r)
    hl = s[1:-1] - s[:-2]
    hr = s[2:] - s[1:-1]
    wss = 2.0 * (w[:-2] * hr - w[1:-1] * (hl + hr) + w[2:] * hl) / (hl * hr * (hl + hr))
    tail = r[1:-1] >= r[-1] / 10.0
    denom = max(float(np.max(np.abs(wss))), 1e-300)
    vals = np.abs(wss[tail]) / denom
    i = int(np.argmax(vals))
    return float(vals[i]), float(r[1:-1][tail][i])


def w_equation_defect(
    profile: RadialProfile,
    s_span: tuple[float, float] = (np.log(0.1), np.log(100.0)),
    num_points: int = 1400,
) -> float:
    """Finite-difference defect of the autonomous log-radius equation on a
    uniform s grid: a cross-check that a radial-equation trajectory also
    satisfies the equation the log-radius variable w~ = r^2 v^(1-m) obeys.

    Initial data come from the profile at the window's left edge; the
    window itself is re-integrated (still the radial equation, never the
    log-radius one) at a tolerance well below the profile's, because the
    quantity being measured is the O(h^2) truncation of the central
    difference and stored dense-output wiggle at the profile's own rtol
    would otherwise put a floor under it.  w~ and w~_s are exact algebra
    in (v, v'); only w~_ss is differenced, so halving the spacing shrinks
    the defect about fourfold."""
    p = profile.params
    if p.rho is None:
        raise ValueError("the log-radius equation needs soliton parameters")
    n, m, beta, rho = p.n, p.m, p.beta, p.rho
    one_m = 1.0 - m
    s = np.linspace(s_span[0], s_span[1], num_points)
    r = np.exp(s)
    if r[-1] > profile.r[-1]:
        raise ValueError("s_span reaches beyond the profile grid")
    r_start = r[0] / 1.05
    y0 = profile.value_at(r_start, derivative=True)
    sol = solve_ivp(
        _rhs(p.n, p.m, p.alpha, p.beta),
        (r_start, r[-1]),
        y0,
        method="RK45",
        rtol=1e-12,
        atol=1e-30 * p.eta,
        t_eval=r,
    )
    if sol.status != 0:
        raise RuntimeError(f"window re-integration failed: {sol.message}")
    v, dv = sol.y
    wt = r * r * v**one_m
    ws = wt * (2.0 + one_m * r * dv / v)
    h = s[1] - s[0]
    wss = (ws[2:] - ws[:-2]) / (2.0 * h)
    wm, wsm = wt[1:-1], ws[1:-1]
    rhs = (
        (1.0 - 2.0 * m) / one_m * wsm * wsm / wm
        - beta / (n - 1) * wm * wsm
        - rho / (n - 1) * wm * wm
        + 2.0 * (n - 2 - n * m) / one_m * wm
    )
    return float(np.max(np.abs(wss - rhs)) / max(np.max(np.abs(rhs)), 1e-300))


def _verdict(pred: float, est: LimitEstimate, curve_scale: float) -> Verdict:
    denom = max(abs(pred), 0.1 * curve_scale, 1e-12)
    rel_err = abs(est.value - pred) / denom
    if rel_err < LIMIT_TOLERANCE:
        return Verdict("Pass", rel_err)
    # Fail asserts a settled contradiction: the last decade's drift must be
    # well under the remaining gap, otherwise the curve may still be heading
    # for the target and the honest answer is Inconclusive.
    if est.tail_width <= 0.1 * abs(est.value - pred):
        return Verdict("Fail", rel_err)
    return Verdict("Inconclusive", rel_err)


def verify(
    params: SolitonParams,
    r_max: float = 1e4,
    rtol: float = 1e-9,
    atol: float | None = None,
) -> AsymptoticReport:
    """solve -> geometry -> limits -> verdicts -> battery, aggregated.

    Refuses the certified blow-up regime (alpha < 0, beta <= 0); that path
    goes through the certificate plus blow-up detection instead."""
    check = validate(params)
    if not check.ok:
        raise ValueError("invalid parameters: " + "; ".join(check.violations))
    if params.alpha < 0.0 and params.beta <= 0.0:
        raise ValueError(
            "no global solution exists for alpha < 0, beta <= 0; use the blow-up certificate path"
        )
    if params.rho is None:
        raise ValueError("verification needs soliton parameters (rho present)")
    cls = classify(params)
    profile = solve_profile(params, r_max=r_max, rtol=rtol, atol=atol)
    if profile.status.kind != "Global":
        raise RuntimeError(
            f"solver did not reach r_max: {profile.status.kind} at r = {profile.status.radius}"
        )
    curves = compute_geometry(profile)
    observed = estimate_limits(curves, profile)
    pred = predictions(params, strict=False)

    sup = lambda a: float(np.max(np.abs(a)))
    pred_map = {
        "w": (pred.w_limit, sup(curves.w)),
        "R": (pred.R_limit, sup(curves.R)),
        "K0": (pred.K0_limit, sup(curves.K0)),
        "K1": (pred.K1_limit, sup(curves.K1)),
        "rvp_over_v": (pred.rvp_over_v_limit, sup(profile.r * profile.dv / profile.v)),
        "w_over_logr": (pred.w_over_logr_limit, sup(curves.w)),
    }
    verdicts = {}
    for name, (target, scale) in pred_map.items():
        if target is not None and name in observed:
            verdicts[name] = _verdict(target, observed[name], scale)
    if "r2v2k" in observed and pred.r2v2k_limit_exists:
        est = observed["r2v2k"]
        rel_width = est.tail_width / max(abs(est.value), 1e-300)
        verdicts["r2v2k"] = Verdict(
            "Pass" if rel_width < LIMIT_TOLERANCE else "Inconclusive", rel_width
        )

    log = invariant_battery(profile, curves)
    bad_invariant = any(not rec.ok for rec in log)
    bad_verdict = any(v.verdict == "Fail" for v in verdicts.values())
    undecided = any(v.verdict == "Inconclusive" for v in verdicts.values())
    if bad_invariant or bad_verdict:
        overall = "Fail"
    elif undecided:
        overall = "Inconclusive"
    else:
        overall = "Pass"

    return AsymptoticReport(
        params=params,
        variant=cls.variant,
        validity=cls.validity,
        observed=observed,
        predicted=pred,
        verdicts=verdicts,
        invariant_log=log,
        overall=overall,
    )


def report_to_json(report: AsymptoticReport) -> str:
    """Stable-ordered JSON document for a report."""
    p = report.params
    doc = {
        "params": {
            "n": p.n,
            "m": p.m,
            "alpha": p.alpha,
            "beta": p.beta,
            "rho": p.rho,
            "eta": p.eta,
        },
        "variant": report.variant,
        "validity": report.validity,
        "observed": {
            name: {
                "value": est.value,
                "tail_width": est.tail_width,
                "converged": est.converged,
            }
            for name, est in report.observed.items()
        },
        "predicted": {
            "w_limit": report.predicted.w_limit,
            "w_over_logr_limit": report.predicted.w_over_logr_limit,
            "r2v2k_limit_exists": report.predicted.r2v2k_limit_exists,
            "rvp_over_v_limit": report.predicted.rvp_over_v_limit,
            "R_at_zero": report.predicted.R_at_zero,
            "R_limit": report.predicted.R_limit,
            "K_at_zero": report.predicted.K_at_zero,
            "K0_limit": report.predicted.K0_limit,
            "K1_limit": report.predicted.K1_limit,
            "R_upper": report.predicted.R_upper,
            "w_upper": report.predicted.w_upper,
        },
        "verdicts": {
            name: {"verdict": v.verdict, "rel_err": v.rel_err}
            for name, v in report.verdicts.items()
        },
        "invariants": [
            {
                "name": rec.name,
                "applicable": rec.applicable,
                "margin": rec.margin,
                "location": rec.location,
                "threshold": rec.threshold,
                "ok": rec.ok,
            }
            for rec in report.invariant_log
        ],
        "overall": report.overall,
    }
    return json.dumps(doc, sort_keys=True, indent=1)
