"""Experiment drivers behind the command-line interface.

Each driver takes an :class:`ExperimentConfig` and returns a :class:`RunResult`
holding the rendered output files; nothing here touches the filesystem, which
keeps reruns byte-comparable.
"""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .config import ExperimentConfig
from .development import (
    BeamInterval,
    DevPoint,
    NotFound as BeamNotFound,
    RotatedFamily,
    SplitEvent,
    certificate_to_billiard_orbit,
    dev_step,
    find_periodic_in_beam,
    lambda_level,
    make_interval,
    t_bound,
)
from .drag import ParityError, StepTooLarge, drag_orbit
from .geometry import GeometryError, PlanarIsometry, Rhombus, VertexHit, polygon_of
from .partition import (
    GoodInterval,
    NotFound,
    build_partition,
    critical_gamma,
    feasible,
    find_good_interval,
    fit_growth_exponent,
    partition_diameter,
)
from .rotation import (
    Unresolved,
    cf_expand,
    hitting_bound,
    hitting_exact,
    random_alpha,
)
from .unfolding import BudgetExceeded, complexity, propagate_beams

TARGET_EXPONENT = 2.0 / math.sqrt(3.0)


class PreconditionError(RuntimeError):
    """Maps to exit code 2."""


@dataclass
class RunResult:
    files: Dict[str, str] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)
    exit_code: int = 0


def _json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


def _csv(header: List[str], rows, comments: Optional[List[str]] = None) -> str:
    buf = io.StringIO()
    for line in comments or []:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in r])
    return buf.getvalue()


# -- complexity ---------------------------------------------------------------


def _complexity_report(cfg: ExperimentConfig, res: RunResult, n_max: Optional[int] = None):
    table = cfg.table()
    n_max = cfg.n_max if n_max is None else n_max
    try:
        rep = complexity(table, n_max, node_budget=cfg.node_budget, tol=cfg.tol)
    except BudgetExceeded as exc:
        res.warnings.append(f"node budget exhausted: {exc}; output is partial")
        res.exit_code = 3
        rep = exc.partial
    if rep.unmatched:
        res.warnings.append(f"{rep.unmatched} diagonals without a time-reversed partner")
    return table, rep


def cmd_complexity(cfg: ExperimentConfig) -> RunResult:
    res = RunResult()
    table, rep = _complexity_report(cfg, res)
    verts = sorted(rep.per_vertex)
    header = ["n"] + [f"Q_v{v}" for v in verts] + ["P_n"]
    rows = [[n] + [rep.Q(v, n) for v in verts] + [rep.P(n, cfg.oriented)] for n in range(cfg.n_max + 1)]
    res.files["complexity.csv"] = _csv(header, rows)
    diag_rows = []
    for v in verts:
        for g in sorted(rep.per_vertex[v], key=lambda g: (g.reflections, g.direction)):
            diag_rows.append([g.source, g.direction, g.reflections, g.target, " ".join(map(str, g.itinerary))])
    res.files["diagonals.csv"] = _csv(
        ["source_vertex", "direction_radians", "reflections", "target_vertex", "itinerary"], diag_rows)
    return res


def cmd_exponent(cfg: ExperimentConfig, series: Optional[Dict[int, float]] = None) -> RunResult:
    res = RunResult()
    table = None
    if series is None:
        table, rep = _complexity_report(cfg, res)
        series = {n: rep.P(n, cfg.oriented) for n in range(max(cfg.n_min, 1), cfg.n_max + 1)}
    try:
        fit = fit_growth_exponent(series)
    except ValueError as exc:
        raise PreconditionError(f"cannot fit an exponent: {exc}") from None
    report = {
        "n_range": [min(series), max(series)],
        "points": len(series),
        "exponent": fit.exponent,
        "r_squared": fit.r_squared,
        "degenerate": fit.degenerate,
        "critical_gamma": critical_gamma(),
        "target_exponent": TARGET_EXPONENT,
        "margin": fit.exponent - TARGET_EXPONENT,
    }
    if table is not None:
        poly = polygon_of(table)
        angles = [poly.vertex_angle(i) for i in range(poly.n_sides)]
        rational = all(_rational_multiple_of_pi(a) for a in angles)
        report["rational_angles"] = rational
        # rational tables grow quadratically; flag a fit that lands in that window
        report["masur_window"] = [1.5, 2.5]
        report["masur_flag"] = bool(rational and 1.5 <= fit.exponent <= 2.5)
    res.files["exponent.json"] = _json(report)
    return res


def _rational_multiple_of_pi(angle: float, max_q: int = 1000) -> bool:
    f = Fraction(angle / math.pi).limit_denominator(max_q)
    return abs(float(f) - angle / math.pi) < 1e-12


# -- partitions ---------------------------------------------------------------


def _partition(cfg: ExperimentConfig, res: RunResult):
    rh = cfg.rhombus()
    try:
        beams = propagate_beams(rh, cfg.apex, cfg.n_max, cfg.node_budget, cfg.tol)
    except BudgetExceeded as exc:
        res.warnings.append(f"node budget exhausted: {exc}; partition is partial")
        res.exit_code = 3
        beams = exc.partial
    return rh, build_partition(beams.diagonals, rh.vertex_angle(cfg.apex), cfg.n_max)


def cmd_partition(cfg: ExperimentConfig) -> RunResult:
    res = RunResult()
    rh, p = _partition(cfg, res)
    comments = [f"n={p.n}", f"vertex_angle={p.vertex_angle!r}", f"apex={cfg.apex}",
                f"diameter={partition_diameter(p)!r}"]
    res.files["partition.csv"] = _csv(["cut_point", "index"], zip(p.cut_points, p.indices), comments)
    return res


def cmd_good_interval(cfg: ExperimentConfig) -> RunResult:
    res = RunResult()
    _, p = _partition(cfg, res)
    g = find_good_interval(p, cfg.gamma, cfg.c)
    if isinstance(g, GoodInterval):
        out = {"status": "found", **g.as_record()}
    else:
        out = {"status": "not_found", "reason": g.reason, "detail": g.detail, "stats": g.stats}
        res.warnings.append(f"good interval not found ({g.reason})")
    res.files["good_interval.json"] = _json(out)
    return res


# -- rotations ----------------------------------------------------------------


def _alphas(cfg: ExperimentConfig):
    if isinstance(cfg.alpha, str):
        rng = cfg.rng(1)
        return [random_alpha(rng, cfg.alpha_bits) for _ in range(cfg.n_alphas)], cfg.alpha_bits
    return [cfg.alpha], None


def cmd_hitting(cfg: ExperimentConfig) -> RunResult:
    res = RunResult()
    alphas, bits = _alphas(cfg)
    rows = []
    for i, a in enumerate(alphas):
        cf = cf_expand(a, 200, bits)
        for mu in cfg.mu_grid:
            bound = hitting_bound(cf, mu)
            L = hitting_exact(a, mu, cfg.hitting_cap)
            if isinstance(L, Unresolved):
                res.warnings.append(f"alpha {i}, mu {mu}: unresolved within cap {cfg.hitting_cap}")
                rows.append([i, float(a), mu, "unresolved", bound, ""])
                continue
            if L > bound:
                res.warnings.append(f"alpha {i}, mu {mu}: L_exact {L} exceeds bound {bound}")
            rows.append([i, float(a), mu, L, bound, L * mu ** (2.0 + cfg.epsilon)])
    res.files["hitting.csv"] = _csv(["alpha_id", "alpha", "mu", "L_exact", "L_bound", "ratio"], rows)
    return res


# -- development map ----------------------------------------------------------


def _orbit_record(orbit) -> dict:
    return {"start": list(orbit.start), "direction": list(orbit.direction), "period": orbit.period,
            "itinerary": list(orbit.itinerary), "length": orbit.length,
            "closure_residual": orbit.closure_residual}


def _drag_record(out) -> dict:
    rec = {"status": out.status, "steps": out.steps, "max_residual": out.max_residual,
           "final_orbit": _orbit_record(out.final_orbit)}
    if out.encounter:
        e = out.encounter
        rec["vertex"] = e.vertex
        rec["offset"] = e.offset
        rec["gap"] = e.gap
        rec["new_diagonal"] = e.diagonal.as_record()
    return rec


def _search_and_drag(cfg: ExperimentConfig, fam: RotatedFamily, I: BeamInterval, mu: float,
                     target, res: RunResult) -> dict:
    T = t_bound(fam, mu, cfg.C, cfg.epsilon)
    steps = int(min(cfg.max_steps, math.ceil(T)))
    out = {"mu": mu, "T_mu": T, "max_steps": steps,
           "interval": {"level": I.level, "side": I.side, "s_lo": I.s_lo, "s_hi": I.s_hi, "lambda": I.mu}}
    r = find_periodic_in_beam(fam, I, steps)
    if isinstance(r, SplitEvent):
        out["search"] = {"status": "split", "at_step": r.at_step, "vertex": r.vertex,
                         "vertex_fraction": r.vertex_fraction}
        res.warnings.append(f"beam split at step {r.at_step}")
        return out
    if isinstance(r, BeamNotFound):
        out["search"] = {"status": "not_found", "steps": r.steps}
        res.warnings.append(f"no periodic orbit within {r.steps} steps")
        return out
    out["search"] = {"status": "found", **r.as_record(), "steps_at_success": r.q,
                     "within_T": r.q <= T}
    orbit = certificate_to_billiard_orbit(fam, r)
    out["orbit"] = _orbit_record(orbit)
    step = cfg.drag_step * fam.side_length
    if target is not None:
        d = orbit.direction
        n = (-d[1], d[0])
        side = (target[0] - orbit.start[0]) * n[0] + (target[1] - orbit.start[1]) * n[1]
        step = math.copysign(step, side if side != 0 else 1.0)
    try:
        dr = drag_orbit(fam.base, orbit, step, cfg.max_drags, fam.tol)
        out["drag"] = _drag_record(dr)
    except (ParityError, StepTooLarge, GeometryError, ValueError) as exc:
        out["drag"] = {"status": "error", "error": str(exc)}
        res.warnings.append(f"drag failed: {exc}")
    return out


def cmd_dev_orbit(cfg: ExperimentConfig) -> RunResult:
    res = RunResult()
    rh = cfg.rhombus()
    fam = RotatedFamily(rh, cfg.pair, cfg.tol)
    rng = cfg.rng(2)
    rec = {"alpha": fam.alpha, "pair": cfg.pair, "lambda_X0": lambda_level(fam, 0),
           "rational_flag": fam.rational_flag()}
    mu = cfg.beam_mu
    sides = [j for j in range(4) if _left_facing(fam, 0, j)]
    j = sides[int(rng.integers(len(sides)))]
    fr = fam.placement(0, j)
    width = mu / abs(fr.units[j][1])
    if width >= fam.side_length:
        raise PreconditionError(f"beam_mu {mu} exceeds the vertical extent of side {j}")
    s0 = float(rng.uniform(0.0, fam.side_length - width))
    I = make_interval(fam, 0, j, s0, s0 + width)
    rec.update(_search_and_drag(cfg, fam, I, mu, None, res))
    res.files["dev_orbit.json"] = _json(rec)
    return res


def _left_facing(fam: RotatedFamily, level: int, side: int) -> bool:
    fr = fam.frame(level, 0)
    return -fr.units[side][1] * fr.orientation > 0


# -- the full experiment ------------------------------------------------------


def pipeline_mu(n: int, gamma: float, c: float) -> float:
    return 0.5 * c * n ** (1.0 / (gamma + 1.0) - gamma - 1.0)


def cmd_pipeline(cfg: ExperimentConfig) -> RunResult:
    res = RunResult()
    gc = critical_gamma()
    if not cfg.gamma < gc:
        raise PreconditionError(
            f"gamma = {cfg.gamma} is not below the critical value {gc!r}: the feasibility inequality "
            "(-3-eps)(1/(gamma+1) - gamma - 1) < 1/(gamma+1) fails for small eps")
    n = cfg.n_max
    if n < 1:
        raise PreconditionError("n_max must be >= 1")
    story: Dict[str, object] = {"gamma": cfg.gamma, "critical_gamma": gc, "c": cfg.c, "n": n,
                                "feasible_at_epsilon": feasible(cfg.gamma, cfg.epsilon),
                                "angle": cfg.resolved_angle(), "shape": cfg.shape, "apex": cfg.apex}
    rh, p = _partition(cfg, res)
    angle = rh.vertex_angle(cfg.apex)
    story["partition"] = {"size": len(p), "diameter": partition_diameter(p),
                          "size_bound": n ** (cfg.gamma + 1.0), "diameter_bound": cfg.c / n}

    g = find_good_interval(p, cfg.gamma, cfg.c)
    if isinstance(g, NotFound):
        # keep going with the widest partition interval so later stages still report
        ivs = p.intervals()
        left, right, li, ri = max(ivs, key=lambda t: t[1] - t[0])
        story["good_interval"] = {"status": "not_found", "reason": g.reason, "detail": g.detail,
                                  "fallback": True, "left": left, "right": right,
                                  "left_index": li, "right_index": ri}
        res.warnings.append(f"good interval not found ({g.reason}); using the widest interval")
    else:
        left, right = g.left, g.right
        story["good_interval"] = {"status": "found", "fallback": False, **g.as_record()}

    mu = pipeline_mu(n, cfg.gamma, cfg.c)
    story["mu"] = mu
    width = (right - left) * angle
    mid = 0.5 * (left + right) * angle
    # turn the table so the middle ray of the angular beam is horizontal
    heading = rh.vertex_frame(cfg.apex) + mid
    base = Rhombus(rh.half_diagonal_h, rh.half_diagonal_v, PlanarIsometry(-heading))
    fam = RotatedFamily(base, cfg.pair, cfg.tol)
    r0 = mu / (2.0 * math.sin(0.5 * width)) if width < math.pi else 0.0
    pt = DevPoint(0, cfg.apex, 0.0)
    dist, steps = 0.0, 0
    beam = {"start_distance_needed": r0}
    while dist < r0 or steps == 0:
        st = dev_step(fam, pt)
        if isinstance(st, VertexHit):
            beam["status"] = "middle_ray_hit_vertex"
            break
        dist += st.travel
        steps += 1
        pt = st.point
        if steps > cfg.max_steps:
            beam["status"] = "too_far"
            break
    beam.update({"crossings": steps, "distance": dist})
    story["beam"] = beam
    if "status" in beam:
        res.warnings.append(f"could not place the parallel beam: {beam['status']}")
        res.files["pipeline.json"] = _json(story)
        return res
    fr = fam.placement(pt.level, pt.side)
    half = 0.5 * mu / abs(fr.units[pt.side][1])
    lo, hi = pt.s - half, pt.s + half
    if lo <= 0.0 or hi >= fam.side_length:
        beam["status"] = "straddles_vertex"
        res.warnings.append("the parallel beam straddles a vertex where it starts")
        res.files["pipeline.json"] = _json(story)
        return res
    beam["status"] = "placed"
    I = make_interval(fam, pt.level, pt.side, lo, hi)
    apex_pt = base.vertices[cfg.apex]
    if cfg.drag_target == "apex":
        target = apex_pt
    else:
        # a far point on the boundary ray of the angular beam
        edge = left if cfg.drag_target == "left" else right
        th = base.vertex_frame(cfg.apex) + edge * angle
        far = max(r0, fam.side_length)
        target = (apex_pt[0] + far * math.cos(th), apex_pt[1] + far * math.sin(th))
    stage = _search_and_drag(cfg, fam, I, mu, target, res)
    stage["drag_target"] = cfg.drag_target
    story["search"] = stage
    drag = stage.get("drag", {})
    if drag.get("status") == "vertex_encounter":
        d = drag["new_diagonal"]
        inside = False
        if d["source_vertex"] == cfg.apex:
            inside = left * angle <= d["direction_radians"] <= right * angle
        story["new_diagonal_inside_I"] = inside
    res.files["pipeline.json"] = _json(story)
    return res
