"""Experiment drivers behind the CLI verbs; each returns a validated Report."""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .couplings import CouplingVector, dual, membership, s4_orbit
from .elliptic import DomainError, EllipticParams, lattice_constants
from .kernelops import hs_norm_finite
from .report import Comparison, Criterion, Report
from .special import (
    SPECIAL_CASES,
    closed_form_eigenvalues,
    closed_form_singular_values,
    resolve_preset,
)
from .spectra import heun_spectrum, hs_svd, rank_one_case

EXPERIMENTS = ("spectrum", "svd", "orbit", "special-cases", "rank-one", "tau-probe")


class ConfigError(ValueError):
    """Invalid experiment configuration (maps to exit code 2)."""


@dataclass
class ExperimentConfig:
    experiment: str = "spectrum"
    r: float = 1.0
    alpha: float = 1.0
    epsilon: float = 1e-15
    basis_size: int = 48
    quad_size: int = 48
    g: tuple | None = None
    preset: str | None = None
    out: str | None = None
    format: str = "json"
    seed: int = 0
    k: int = 6
    samples: int = 0
    tol: float = 1e-8
    jobs: int = 1

    def validate(self) -> "ExperimentConfig":
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        for name in ("r", "alpha", "epsilon", "tol"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be a positive finite number (got {v!r})")
        if self.r * self.alpha < 0.05:
            raise ConfigError(f"r*alpha = {self.r * self.alpha} too small: nome too close to 1")
        for name, low in (("basis_size", 4), ("quad_size", 4), ("k", 1), ("jobs", 1)):
            v = getattr(self, name)
            if not isinstance(v, int) or v < low:
                raise ConfigError(f"{name} must be an integer >= {low} (got {v!r})")
        if not isinstance(self.samples, int) or self.samples < 0:
            raise ConfigError(f"samples must be a non-negative integer (got {self.samples!r})")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"format must be json or csv (got {self.format!r})")
        if self.preset is not None:
            try:
                preset_g = resolve_preset(self.preset).g
            except KeyError as exc:
                raise ConfigError(str(exc.args[0])) from None
            if self.g is not None and tuple(map(float, self.g)) != preset_g:
                raise ConfigError("give either g or preset, not both")
            self.g = preset_g
        if self.g is not None:
            try:
                g = tuple(float(v) for v in self.g)
            except (TypeError, ValueError):
                raise ConfigError(f"g must be four numbers (got {self.g!r})") from None
            if len(g) != 4 or not all(math.isfinite(v) for v in g):
                raise ConfigError(f"g must be four finite numbers (got {self.g!r})")
            self.g = g
        needs_g = {"spectrum", "svd", "orbit"}
        if self.experiment in needs_g and self.g is None:
            raise ConfigError(f"experiment {self.experiment!r} needs --g or --preset")
        return self

    def params(self) -> EllipticParams:
        return lattice_constants(self.r, self.alpha, self.epsilon)

    def echo(self) -> dict:
        out = {k: v for k, v in asdict(self).items()}
        out["g"] = list(self.g) if self.g is not None else None
        return out


def _timed(fn):
    def wrapper(config: ExperimentConfig, params: EllipticParams | None = None) -> Report:
        config.validate()
        start = time.perf_counter()
        report = fn(config, params or config.params())
        report.wall_time = time.perf_counter() - start
        report.validate()
        return report

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _rel_dev(values, reference) -> float:
    values = np.asarray(values, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if values.size == 0:
        return 0.0
    return float(np.max(np.abs(values - reference) / np.maximum(np.abs(reference), 1e-300)))


# ---------------------------------------------------------------------------
# seeded sampling of coupling vectors
# ---------------------------------------------------------------------------


def sample_couplings(rng: np.random.Generator, count: int, region: str = "pi_r", margin: float = 0.05) -> list[CouplingVector]:
    """Rejection-sample g in region 'pi_r', 'pi_g' or 'rank-one' (s_g = 0, g in Pi).

    ``margin`` keeps samples away from the set boundaries.
    """
    out = []
    while len(out) < count:
        if region == "rank-one":
            g0, g1 = rng.uniform(-0.5 + margin, 1.5, size=2)
            g2 = rng.uniform(-1.0, 0.5 - margin)
            g = CouplingVector((g0, g1, g2, -(g0 + g1 + g2)))
            flags = membership(g)
            keys = ("g0", "g1", "g0_dual", "g1_dual")
            if flags.in_pi and min(flags.margins[k] for k in keys) > margin:
                out.append(g)
            continue
        g = CouplingVector(tuple(rng.uniform(-0.5 + margin, 2.0, size=4)))
        flags = membership(g)
        keys = ["g0", "g1", "g0_dual", "g1_dual", "s_g"]
        ok = flags.in_pi_r
        if region == "pi_g":
            ok = flags.in_pi_g
            keys.append("pi_g_extra")
        elif region != "pi_r":
            raise ValueError(f"unknown region {region!r}")
        if ok and min(flags.margins[k] for k in keys) > margin:
            out.append(g)
    return out


# ---------------------------------------------------------------------------
# single-coupling runs
# ---------------------------------------------------------------------------


def _spectrum_comparisons(
    report: Report, params: EllipticParams, g: CouplingVector, spec, k: int, tol: float, quantity: str
) -> None:
    """Compare the first k eigenvalues with a closed form when one is known."""
    cf = closed_form_eigenvalues(g) or closed_form_eigenvalues(dual(g))
    n = np.arange(k)
    ref = cf(n, params) if cf else None
    for i in range(min(k, len(spec.eigenvalues))):
        report.add(
            Comparison(
                quantity, i, float(spec.eigenvalues[i]),
                None if ref is None else float(ref[i]),
                cf.formula_id if cf else None,
                "closed-form" if cf else "none",
                i < spec.converged_count,
            )
        )
    if cf:
        kk = min(k, spec.converged_count)
        status_note = "" if kk == k else f"only {kk} of {k} converged"
        crit = Criterion.threshold(
            f"{quantity} closed form, n<{k}", cf.formula_id,
            _rel_dev(spec.eigenvalues[:kk], ref[:kk]), tol, status_note,
        )
        if kk < k and crit.status == "pass":
            crit.status = "inconclusive"
        report.check(crit)


def _fmt(g: CouplingVector) -> str:
    return "(" + ",".join(f"{v:g}" for v in g.g) + ")"


def _new_report(name: str, config: ExperimentConfig, params: EllipticParams) -> Report:
    report = Report(name, config.echo())
    report.extra["lattice"] = {"nome": params.nome, "p": params.p, "eta": params.eta, "e": list(params.e)}
    return report


@_timed
def run_spectrum(config: ExperimentConfig, params: EllipticParams) -> Report:
    """Heun spectrum of one coupling, with closed-form and duality comparisons."""
    g = CouplingVector(config.g)
    report = _new_report("spectrum", config, params)
    flags = membership(g)
    report.extra["membership"] = flags.to_json()
    spec = heun_spectrum(g, config.basis_size, params)
    report.extra["spectrum"] = spec.to_json()
    if not spec.proven_regime:
        report.extra["warning"] = "g outside Pi_r: eigenvector structure not covered by the duality theory"
    _spectrum_comparisons(report, params, g, spec, config.k, config.tol, f"E{_fmt(g)}")
    gp = dual(g)
    if membership(gp).in_tilde_pi:
        spec_p = heun_spectrum(gp, config.basis_size, params)
        kk = min(config.k, spec.converged_count, spec_p.converged_count)
        for i in range(kk):
            report.add(Comparison("E_dual", i, float(spec_p.eigenvalues[i]), float(spec.eigenvalues[i]),
                                  "sigma(H(g))=sigma(H(g'))", "cross-method", True))
        crit = Criterion.threshold(
            "duality E_n(g) = E_n(g')", "sigma(H(g))=sigma(H(g'))",
            _rel_dev(spec_p.eigenvalues[:kk], spec.eigenvalues[:kk]), config.tol,
        )
        if not flags.in_pi_r:
            crit.status, crit.detail = "info", "g outside Pi_r: informative only"
        report.check(crit)
    return report


@_timed
def run_svd(config: ExperimentConfig, params: EllipticParams) -> Report:
    """Singular values of the integral operator with closed-form and Parseval checks."""
    g = CouplingVector(config.g)
    report = _new_report("svd", config, params)
    flags = membership(g)
    report.extra["membership"] = flags.to_json()
    if not flags.in_pi:
        raise DomainError(f"g = {g.g} is outside Pi: kernel not square integrable")
    modes = config.k if flags.in_pi_r else 0
    res = hs_svd(g, config.quad_size, params, modes=modes, basis_size=config.basis_size)
    report.extra["svd"] = res.to_json()
    cf = closed_form_singular_values(g)
    k = min(max(config.k, 9 if cf else config.k), len(res.singular_values))
    ref = cf(np.arange(k), params) if cf else None
    for i in range(k):
        report.add(Comparison("nu", i, float(res.singular_values[i]),
                              None if ref is None else float(ref[i]),
                              cf.formula_id if cf else None,
                              "closed-form" if cf else "none", i < res.converged_count))
    for i, mu in enumerate(res.signed_values):
        report.add(Comparison("mu", i, float(mu), None, None, "none", True))
    if cf:
        kk = min(k, res.converged_count)
        crit = Criterion.threshold(f"nu_n closed form, n<{k}", cf.formula_id,
                                   _rel_dev(res.singular_values[:kk], ref[:kk]), config.tol)
        if kk < k and crit.status == "pass":
            crit.status, crit.detail = "inconclusive", f"only {kk} of {k} converged"
        report.check(crit)
    finite, norm2 = hs_norm_finite(g, params)
    partial = float(np.sum(res.singular_values[: res.converged_count] ** 2))
    report.check(Criterion.threshold("Parseval sum nu^2 = ||Psi||^2", "parseval",
                                     abs(norm2 - partial) / norm2, 1e-8))
    report.check(Criterion("sign convention d_n(g;0) > 0", "sign[d_n(g;0)]",
                           "pass" if res.sign_convention_ok else "fail"))
    return report


# ---------------------------------------------------------------------------
# orbit invariance
# ---------------------------------------------------------------------------


@_timed
def run_orbit_invariance(config: ExperimentConfig, params: EllipticParams) -> Report:
    """Spectra of all 24 orbit members; pairwise agreement on the first k eigenvalues."""
    g = CouplingVector(config.g)
    report = _new_report("orbit", config, params)
    flags = membership(g)
    report.extra["membership"] = flags.to_json()
    orbit = s4_orbit(g)

    def solve(item):
        w, gw = item
        if not membership(gw).in_tilde_pi:
            return None
        return heun_spectrum(gw, config.basis_size, params)

    with ThreadPoolExecutor(max_workers=config.jobs) as pool:
        spectra = list(pool.map(solve, orbit))

    k = config.k
    members = []
    base = spectra[0]
    for (w, gw), spec in zip(orbit, spectra):
        mflags = membership(gw)
        entry = {"element": w.one_line(), "name": w.name, "g": gw.to_json(), "membership": mflags.to_json()}
        if spec is not None:
            entry["eigenvalues"] = spec.eigenvalues[:k].tolist()
            entry["converged_count"] = spec.converged_count
        members.append(entry)
    report.extra["members"] = members

    admissible = [s for s in spectra if s is not None]
    kk = min(k, *(s.converged_count for s in admissible)) if admissible else 0
    if kk == 0 or base is None:
        report.check(Criterion("orbit spectra agree", "sigma(H(g))=sigma(H(w g))", "inconclusive",
                               detail="no converged eigenvalues to compare"))
        return report

    stack = np.array([s.eigenvalues[:kk] for s in admissible])
    pairwise = float(np.max((stack.max(axis=0) - stack.min(axis=0)) / np.abs(stack).max(axis=0)))
    for (w, gw), spec in zip(orbit, spectra):
        if spec is None:
            continue
        for i in range(kk):
            report.add(Comparison(f"E[{w.one_line()}]", i, float(spec.eigenvalues[i]),
                                  float(base.eigenvalues[i]), "sigma(H(g))=sigma(H(w g))", "cross-method", True))
    crit = Criterion.threshold(f"orbit spectra agree on first {kk}", "sigma(H(g))=sigma(H(w g))", pairwise, config.tol)
    if kk < k and crit.status == "pass":
        crit.status, crit.detail = "inconclusive", f"only {kk} of {k} converged"
    if not flags.in_pi_g:
        skipped = sum(s is None for s in spectra)
        crit.status = "inconclusive"
        crit.detail = f"g outside Pi_G: comparison informative only ({skipped} members outside Pi~)"
    report.check(crit)

    # members carrying a closed form, e.g. (3,1,1,1)/2 in the orbit of (1,1,0,1)
    seen = set()
    for (w, gw), spec in zip(orbit, spectra):
        cf = closed_form_eigenvalues(gw)
        if spec is None or cf is None or gw.g in seen:
            continue
        seen.add(gw.g)
        n = min(k, spec.converged_count)
        report.check(Criterion.threshold(f"E_n{_fmt(gw)} closed form in orbit", cf.formula_id,
                                         _rel_dev(spec.eigenvalues[:n], cf(np.arange(n), params)), config.tol))
    return report


# ---------------------------------------------------------------------------
# special cases and rank-one
# ---------------------------------------------------------------------------


def _rank_one_checks(report: Report, g: CouplingVector, params: EllipticParams, config: ExperimentConfig) -> None:
    res = rank_one_case(g, params, m=config.basis_size)
    report.extra.setdefault("rank_one", []).append(res.to_json())
    label = _fmt(g)
    for name, val in (("E0_dual", res.e0_dual), ("E0_galerkin", res.e0_galerkin)):
        report.add(Comparison(f"{name}{label}", 0, val, res.e0_closed_form, "E0[rank-one]", "closed-form", True))
    report.check(Criterion.threshold(f"functional identity {label}", "identity[rank-one]",
                                     res.identity_residual, 1e-10))
    report.check(Criterion.threshold(f"E0 routes agree {label}", "E0[rank-one]", res.max_route_spread(), config.tol))


@_timed
def run_special_cases(config: ExperimentConfig, params: EllipticParams) -> Report:
    """Every exactly solvable case against its closed form."""
    report = _new_report("special-cases", config, params)
    for g, kind in SPECIAL_CASES:
        gv = CouplingVector(g)
        if kind == "svd":
            cf = closed_form_singular_values(gv)
            res = hs_svd(gv, config.quad_size, params)
            n = 9
            ref = cf(np.arange(n), params)
            for i in range(n):
                report.add(Comparison(f"nu{_fmt(gv)}", i, float(res.singular_values[i]), float(ref[i]),
                                      cf.formula_id, "closed-form", i < res.converged_count))
            kk = min(n, res.converged_count)
            crit = Criterion.threshold(f"nu_n{_fmt(gv)}, n<=8", cf.formula_id,
                                       _rel_dev(res.singular_values[:kk], ref[:kk]), config.tol)
            if kk < n and crit.status == "pass":
                crit.status, crit.detail = "inconclusive", f"only {kk} of {n} converged"
            report.check(crit)
        else:
            for member in (gv, dual(gv)):
                spec = heun_spectrum(member, config.basis_size, params)
                _spectrum_comparisons(report, params, member, spec, 7, config.tol, quantity=f"E{_fmt(member)}")
    for g in ((0.0, 0.0, 0.0, 0.0), resolve_preset("rank-one").g):
        _rank_one_checks(report, CouplingVector(g), params, config)
    return report


@_timed
def run_rank_one(config: ExperimentConfig, params: EllipticParams) -> Report:
    """Rank-one (s_g = 0) checks for g and/or seeded random samples."""
    report = _new_report("rank-one", config, params)
    targets = []
    if config.g is not None:
        targets.append(CouplingVector(config.g))
    count = config.samples or (0 if targets else 5)
    targets += sample_couplings(np.random.default_rng(config.seed), count, "rank-one")
    for g in targets:
        if abs(g.s_g) > 1e-14:
            raise ConfigError(f"rank-one needs s_g = 0 (g = {g.g} has s_g = {g.s_g})")
        _rank_one_checks(report, g, params, config)
    return report


# ---------------------------------------------------------------------------
# pairing / ordering probe
# ---------------------------------------------------------------------------


@dataclass
class TauVerdict:
    g: list
    verdict: str
    converged_count: int
    nu_gap_margin: float
    mu: list = field(default_factory=list)
    pairing: list = field(default_factory=list)
    notes: list = field(default_factory=list)


def probe_point(g: CouplingVector, config: ExperimentConfig, params: EllipticParams) -> TauVerdict:
    """Evidence for distinct decreasing nu_n, mu_m > 0 and identity pairing at one g."""
    res = hs_svd(g, config.quad_size, params, modes=config.k, basis_size=config.basis_size)
    kc = res.converged_count
    nu = res.singular_values[:kc]
    notes = []
    # ordering is decidable only where gaps exceed the convergence tolerance
    gaps = (nu[:-1] - nu[1:]) / nu[:-1] if kc > 1 else np.zeros(0)
    margin = float(gaps.min()) if gaps.size else math.inf
    verdict = "evidence"
    if kc < 2 or len(res.signed_values) < min(config.k, 2):
        verdict = "inconclusive"
        notes.append(f"only {kc} converged singular values")
    elif margin <= 1e-9:
        verdict = "inconclusive" if margin > -1e-9 else "counterexample-candidate"
        notes.append(f"smallest relative nu gap {margin:.2e}")
    mu = np.asarray(res.signed_values)
    if np.any(mu <= 0):
        verdict = "counterexample-candidate"
        notes.append(f"non-positive mu at m = {np.flatnonzero(mu <= 0).tolist()}")
    elif mu.size > 1 and np.any(np.diff(mu) >= 0):
        verdict = "counterexample-candidate"
        notes.append("mu not strictly decreasing")
    if res.pairing != list(range(len(res.pairing))):
        verdict = "counterexample-candidate"
        notes.append(f"pairing {res.pairing} is not the identity")
    return TauVerdict(g.to_json(), verdict, kc, margin, mu.tolist(), list(res.pairing), notes)


@_timed
def run_tau_probe(config: ExperimentConfig, params: EllipticParams) -> Report:
    """Reports evidence on ordering and pairing; never asserts the conjecture."""
    report = _new_report("tau-probe", config, params)
    targets = []
    if config.g is not None:
        g = CouplingVector(config.g)
        if not membership(g).in_pi_r:
            raise ConfigError(f"tau-probe needs g in Pi_r (got {g.g})")
        targets.append(g)
    count = config.samples or (0 if targets else 20)
    targets += sample_couplings(np.random.default_rng(config.seed), count, "pi_r")
    with ThreadPoolExecutor(max_workers=config.jobs) as pool:
        verdicts = list(pool.map(lambda g: probe_point(g, config, params), targets))
    report.extra["points"] = [asdict(v) for v in verdicts]
    for v in verdicts:
        gv = CouplingVector(v.g)
        for i, mu in enumerate(v.mu):
            report.add(Comparison(f"mu{_fmt(gv)}", i, mu, None, None, "none", True))
        status = {"evidence": "pass", "inconclusive": "inconclusive"}.get(v.verdict, "inconclusive")
        detail = v.verdict + (": " + "; ".join(v.notes) if v.notes else "")
        report.check(Criterion(f"ordering/pairing at {_fmt(gv)}", "tau_g=id, mu decreasing", status,
                               max_deviation=None, tolerance=None, detail=detail))
    report.extra["summary"] = {
        verdict: sum(v.verdict == verdict for v in verdicts)
        for verdict in ("evidence", "inconclusive", "counterexample-candidate")
    }
    return report


RUNNERS = {
    "spectrum": run_spectrum,
    "svd": run_svd,
    "orbit": run_orbit_invariance,
    "special-cases": run_special_cases,
    "rank-one": run_rank_one,
    "tau-probe": run_tau_probe,
}


def run(config: ExperimentConfig) -> Report:
    config.validate()
    return RUNNERS[config.experiment](config)
