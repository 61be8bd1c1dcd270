"""Verification suite: structural properties plus empirical decay slopes.

Each check produces a CheckResult with status "pass", "fail", or "n/a"
(with the reason recorded); nothing is skipped silently.  The quick suite
runs reduced lambda ranges and grid budgets, the full suite the stated
desk-scale parameters including damped sweeps and atom checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import diagnostics
from .damping import build_damping, detect_special_form
from .errors import DegeneratePhase, OscDecayError
from .newton import bisectrix_coordinate, polyhedron, vertex_reports
from .operators import (
    CutoffSpec,
    discretize,
    dyadic_cover,
    dyadic_piece,
    l2_norm,
    log_spaced,
    lp_norm_estimate,
    sweep,
)
from .errors import EmptyPiece
from .phase import format_phase, parse_phase
from .poly import BivariatePolynomial, mixed_hessian
from .puiseux import classify_roots, puiseux_roots, vertex_crosscheck


@dataclass
class CheckResult:
    name: str
    status: str  # "pass" | "fail" | "n/a"
    measured: dict = field(default_factory=dict)
    note: str = ""

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "measured": self.measured,
            "note": self.note,
        }


@dataclass
class SuiteReport:
    suite: str
    phase: str
    checks: list[CheckResult]

    @property
    def ok(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def to_json_dict(self) -> dict:
        return {
            "suite": self.suite,
            "phase": self.phase,
            "ok": self.ok,
            "checks": [c.to_json_dict() for c in self.checks],
        }

    def table(self) -> str:
        lines = [f"{'check':34s} {'status':6s} note"]
        for c in self.checks:
            lines.append(f"{c.name:34s} {c.status:6s} {c.note}")
        lines.append(f"overall: {'pass' if self.ok else 'FAIL'}")
        return "\n".join(lines)


def _random_polynomial(rng) -> BivariatePolynomial:
    terms = {}
    for _ in range(rng.integers(1, 7)):
        k = int(rng.integers(0, 6))
        l = int(rng.integers(0, 6))
        num = int(rng.integers(-20, 21))
        den = int(rng.integers(1, 12))
        if num:
            terms[(k, l)] = Fraction(num, den)
    return BivariatePolynomial(terms)


def check_parser_roundtrip(S: BivariatePolynomial, seed: int) -> CheckResult:
    rng = np.random.default_rng(seed)
    for i in range(40):
        P = _random_polynomial(rng)
        if parse_phase(format_phase(P)) != P:
            return CheckResult(
                "parser_roundtrip", "fail", note=f"mismatch on {format_phase(P)!r}"
            )
    if parse_phase(format_phase(S)) != S:
        return CheckResult("parser_roundtrip", "fail", note="mismatch on the phase")
    return CheckResult("parser_roundtrip", "pass", {"cases": 41})


def check_reports(S: BivariatePolynomial) -> tuple[CheckResult, list]:
    try:
        reports = vertex_reports(S)
    except DegeneratePhase as exc:
        return CheckResult("analysis_reports", "fail", note=str(exc)), []
    ok = all(r.p > 1 and 0 < r.decay <= Fraction(1, 2) for r in reports)
    return (
        CheckResult(
            "analysis_reports",
            "pass" if ok else "fail",
            {"n_vertices": len(reports)},
        ),
        reports,
    )


def check_crosscheck(H: BivariatePolynomial) -> tuple[CheckResult, object]:
    try:
        tree = classify_roots(puiseux_roots(H))
        report = vertex_crosscheck(H, tree)
    except OscDecayError as exc:
        return CheckResult("vertex_crosscheck", "fail", note=str(exc)), None
    return CheckResult("vertex_crosscheck", "pass", report.to_json_dict()), tree


def check_conjugate_closure(tree) -> CheckResult:
    if tree is None or not tree.groups:
        return CheckResult("conjugate_closure", "n/a", note="no nontrivial roots")
    for g in tree.groups:
        for cls in g.classes:
            c = cls.coefficient
            if abs(c.imag) <= 1e-9 * (1 + abs(c)):
                continue
            partner = [
                o
                for o in g.classes
                if abs(o.coefficient - c.conjugate()) <= 1e-6 * (1 + abs(c))
            ]
            if not partner or partner[0].count != cls.count:
                return CheckResult(
                    "conjugate_closure",
                    "fail",
                    note=f"class {c!r} at exponent {g.exponent} has no conjugate",
                )
    return CheckResult("conjugate_closure", "pass")


def check_residual_valuation(H: BivariatePolynomial, tree) -> CheckResult:
    if tree is None or not tree.roots:
        return CheckResult("residual_valuation", "n/a", note="no nontrivial roots")
    xs = np.exp(np.linspace(math.log(1e-3), math.log(0.1), 25))
    worst = math.inf
    for root in tree.roots:
        res = np.abs(H.eval(xs + 0j, root.evaluate(xs)))
        scale = np.abs(H.eval(xs + 0j, np.zeros_like(xs) + 0j)) + 1.0
        if np.max(res / scale) < 1e-12:
            continue  # exact root, residual at round-off
        good = res > 0
        slope = np.polyfit(np.log(xs[good]), np.log(res[good]), 1)[0]
        worst = min(worst, slope)
        if slope < float(root.truncation_order) - 0.25:
            return CheckResult(
                "residual_valuation",
                "fail",
                {"slope": slope, "order": float(root.truncation_order)},
            )
    measured = {} if worst is math.inf else {"min_slope": worst}
    return CheckResult("residual_valuation", "pass", measured)


def check_damping_reality(tree) -> CheckResult:
    if tree is None or not tree.roots:
        return CheckResult("damping_reality", "n/a", note="no nontrivial roots")
    D = build_damping(tree, len(tree.groups), 1.0)
    t = np.linspace(-0.5, 0.5, 100)
    vals = D.factor_values(t[:, None], t[None, :])
    rel = np.max(np.abs(vals.imag) / (1.0 + np.abs(vals)))
    status = "pass" if rel <= 1e-10 else "fail"
    return CheckResult("damping_reality", status, {"max_rel_imag": float(rel)})


def check_partition_of_unity(S, cutoff, seed: int) -> CheckResult:
    op = discretize(S, cutoff, 60.0, grid_budget=512, min_points=96)
    rng = np.random.default_rng(seed)
    f = rng.standard_normal(op.shape[1])
    full = op.apply(f)
    acc = np.zeros_like(full)
    for j, k, s1, s2 in dyadic_cover(op):
        try:
            acc += dyadic_piece(op, j, k, s1, s2).apply(f)
        except EmptyPiece:
            continue
    rel = float(np.max(np.abs(acc - full)) / np.max(np.abs(full)))
    return CheckResult(
        "partition_of_unity", "pass" if rel <= 1e-8 else "fail", {"rel_error": rel}
    )


def check_estimator_agreement(S, cutoff, budget: int, seed: int) -> CheckResult:
    op = discretize(S, cutoff, 150.0, grid_budget=budget)
    a = l2_norm(op, seed=seed).value
    b = lp_norm_estimate(op, 2.0, seed=seed + 1).value
    rel = abs(a - b) / a if a else 0.0
    return CheckResult(
        "estimator_p2_agreement",
        "pass" if rel <= 1e-4 else "fail",
        {"l2": a, "lp": b, "rel_diff": rel},
    )


def check_van_der_corput(S, cutoff, budget: int, seed: int) -> CheckResult:
    H = mixed_hessian(S)
    w = cutoff.half_width
    t = np.linspace(-w, w, 151)
    vals = H.eval(t[:, None], t[None, :])
    mask = cutoff.values(t[:, None], t[None, :]) > 1e-12
    inside = vals[mask]
    lo, hi = float(np.min(np.abs(inside))), float(np.max(np.abs(inside)))
    if lo <= 1e-9 * hi or np.min(inside) * np.max(inside) < 0:
        return CheckResult(
            "van_der_corput", "n/a", note="Hessian vanishes or changes sign on support"
        )
    rep = diagnostics.van_der_corput_check(
        S, cutoff, (lo * 0.999, hi * 1.001), log_spaced(30, 300, 5),
        grid_budget=budget, seed=seed,
    )
    return CheckResult(
        "van_der_corput",
        "pass" if rep.constant <= 20.0 else "fail",
        {"constant": rep.constant},
    )


def check_almost_orthogonality(S, budget: int, seed: int) -> CheckResult:
    try:
        rep = diagnostics.almost_orthogonality_check(
            S, (-2, -2), (-2, -3), 200.0, grid_budget=budget, seed=seed
        )
        rep0 = diagnostics.almost_orthogonality_check(
            S, (-2, -2), (-2, -5), 200.0, grid_budget=budget, seed=seed
        )
    except OscDecayError as exc:
        return CheckResult("almost_orthogonality", "n/a", note=str(exc))
    ok = rep.ratio <= 20.0 and rep0.composed_norm == 0.0
    return CheckResult(
        "almost_orthogonality",
        "pass" if ok else "fail",
        {"adjacent_ratio": rep.ratio, "disjoint_norm": rep0.composed_norm},
    )


def predicted_l2_decay(S: BivariatePolynomial) -> Fraction:
    """Sharp L^2 decay exponent from the bisectrix of N(S''_xy)."""
    t = bisectrix_coordinate(polyhedron(mixed_hessian(S)))
    return Fraction(1) / (2 * (1 + t))


def check_l2_slope(S, cutoff, lam_grid, budget, seed, tol=0.08) -> CheckResult:
    predicted = -float(predicted_l2_decay(S))
    cut = CutoffSpec(cutoff.half_width, "box")  # acceptance sweep window
    res = sweep(S, cut, None, 2.0, lam_grid, grid_budget=budget, seed=seed)
    if res.fitted_slope is None:
        return CheckResult("l2_decay_slope", "fail", note="too few valid samples")
    ok = abs(res.fitted_slope - predicted) <= tol
    return CheckResult(
        "l2_decay_slope",
        "pass" if ok else "fail",
        {"slope": res.fitted_slope, "predicted": predicted, "stderr": res.slope_stderr},
    )


def check_damped_slope(S, tree, reports, cutoff, lam_grid, budget, seed, tol=0.06) -> CheckResult:
    candidates = [r for r in reports if r.damped_re_z is not None]
    if tree is None or not candidates:
        return CheckResult("damped_decay_slope", "n/a", note="no vertex with A_r > 0")
    rep = candidates[-1]
    damping = build_damping(tree, rep.r, complex(float(rep.damped_re_z)))
    cut = CutoffSpec(cutoff.half_width, "box")  # acceptance sweep window
    res = sweep(S, cut, damping, 2.0, lam_grid, grid_budget=budget, seed=seed)
    if res.fitted_slope is None:
        return CheckResult("damped_decay_slope", "fail", note="too few valid samples")
    predicted = -float(rep.damped_sigma)
    ok = abs(res.fitted_slope - predicted) <= tol
    return CheckResult(
        "damped_decay_slope",
        "pass" if ok else "fail",
        {"slope": res.fitted_slope, "predicted": predicted, "vertex": rep.r},
    )


def check_critical_l1(tree, reports, cutoff) -> CheckResult:
    candidates = [r for r in reports if r.critical_neg_re_z is not None and r.A >= 1]
    if tree is None or not candidates:
        return CheckResult("critical_l1", "n/a", note="no vertex with A_r >= 1")
    rep = candidates[-1]
    if detect_special_form(tree, rep.r) is not None:
        return CheckResult(
            "critical_l1", "n/a", note="single-root special form; atom check applies"
        )
    damping = build_damping(tree, rep.r, complex(float(rep.critical_neg_re_z)))
    crep = diagnostics.critical_exponent_l1_check(damping, cutoff, n_x=2000)
    ok = crep.stable and (
        crep.pointwise_constant is None or math.isfinite(crep.pointwise_constant)
    )
    return CheckResult(
        "critical_l1", "pass" if ok else "fail", crep.to_json_dict()
    )


def check_atoms(S, tree, cutoff, budget, seed, trials, lam_grid) -> CheckResult:
    if tree is None:
        return CheckResult("h1e_atoms", "n/a", note="no cluster tree")
    special = detect_special_form(tree, 1)
    if special is None:
        return CheckResult("h1e_atoms", "n/a", note="damping is not of single-root form")
    root, _ = special
    rep = diagnostics.h1e_atom_check(
        S, root, tree, lam_grid, trials=trials, cutoff=cutoff,
        grid_budget=budget, seed=seed,
    )
    ok = rep.growth_ratio <= 2.0 and rep.max_cancellation_residual <= 1e-12
    return CheckResult("h1e_atoms", "pass" if ok else "fail", rep.to_json_dict())


def check_determinism(S, cutoff, seed: int) -> CheckResult:
    from .cli import sweep_csv_text

    grid = log_spaced(30.0, 120.0, 6)
    r1 = sweep(S, cutoff, None, 2.0, grid, grid_budget=512, min_points=96, seed=seed)
    r2 = sweep(S, cutoff, None, 2.0, grid, grid_budget=512, min_points=96, seed=seed)
    same = sweep_csv_text(r1) == sweep_csv_text(r2)
    return CheckResult("determinism", "pass" if same else "fail")


def run_suite(
    phase_text: str,
    suite: str = "quick",
    cutoff: CutoffSpec | None = None,
    grid_budget: int = 4096,
    lambda_max: float = 3000.0,
    lambda_count: int = 12,
    seed: int = 0,
    atom_trials: int = 50,
) -> SuiteReport:
    cutoff = cutoff or CutoffSpec()
    S = parse_phase(phase_text)
    checks: list[CheckResult] = []
    checks.append(check_parser_roundtrip(S, seed))
    rep_check, reports = check_reports(S)
    checks.append(rep_check)
    if rep_check.status == "fail":
        return SuiteReport(suite, format_phase(S), checks)
    H = mixed_hessian(S)
    cc_check, tree = check_crosscheck(H)
    checks.append(cc_check)
    checks.append(check_conjugate_closure(tree))
    checks.append(check_residual_valuation(H, tree))
    checks.append(check_damping_reality(tree))
    checks.append(check_partition_of_unity(S, cutoff, seed))
    if suite == "quick":
        budget = min(1536, grid_budget)
        lam_grid = log_spaced(30.0, min(720.0, lambda_max), min(8, lambda_count))
        slope_tol = 0.08
    else:
        budget = grid_budget
        lam_grid = log_spaced(30.0, lambda_max, lambda_count)
        slope_tol = 0.05
    checks.append(check_estimator_agreement(S, cutoff, min(budget, 1024), seed))
    checks.append(check_van_der_corput(S, cutoff, min(budget, 1024), seed))
    checks.append(check_almost_orthogonality(S, min(budget, 1024), seed))
    checks.append(check_l2_slope(S, cutoff, lam_grid, budget, seed, tol=slope_tol))
    if suite == "full":
        checks.append(
            check_damped_slope(S, tree, reports, cutoff, lam_grid, budget, seed)
        )
        checks.append(check_critical_l1(tree, reports, cutoff))
        checks.append(
            check_atoms(
                S, tree, cutoff, budget, seed, atom_trials,
                [1e2, 1e3, 1e4],
            )
        )
    checks.append(check_determinism(S, cutoff, seed))
    return SuiteReport(suite, format_phase(S), checks)
