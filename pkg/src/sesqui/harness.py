"""Batch driver: run the property checks of every module over a parameter grid.

Each grid point ``(q, N, p)`` gets its own generator seeded by
``(seed, point index)``, so reports do not depend on scheduling.  Reports
are written with a fixed float format (17 significant digits) and contain
no timestamps, which makes them byte-identical across runs.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable

import numpy as np
import yaml

from .algebra import make_context, operator_norm, schatten_norm
from .coherent import (
    coherent_lowering_defect,
    empirical_radius,
    evaluate_coherent,
    full_depth_value,
    radius,
)
from .eigen import (
    eigenstate_construct,
    independence_rank,
    is_eigenstate,
)
from .errors import NumericalError, ValidationError
from .forms import (
    Flavor,
    continuity_constant,
    dual,
    form_norm,
    make_trace_form,
    pullback,
)
from .gns import (
    biorthogonality_check,
    build_gns,
    cyclic_rank,
    gns_eigen_transport,
    homomorphism_defect,
    overlap_matrix,
    reconstruction_defect,
    star_defect,
    xi_vectors,
)
from .quon import (
    QuonModel,
    beta,
    beta_closed_form,
    beta_factorial,
    build_quon,
    diagonal_similarity,
    eta_ladder,
    gamma_sq,
    ladder_forms,
    lowering_defect,
    number_eigen_defect,
    qmutator_defect,
    quon_norm_report,
    random_similarity,
    vacuum_form,
    vacuum_kernel_dim,
    eta_kernel_dim,
)

__all__ = [
    "SCHEMA_VERSION",
    "SECTIONS",
    "ConfigError",
    "Similarity",
    "Tolerances",
    "RunConfig",
    "load_config",
    "config_from_mapping",
    "run_point",
    "run_suite",
    "sweep_rows",
    "sweep_table",
    "errata",
    "dumps",
    "SuiteResult",
]

SCHEMA_VERSION = "sesqui-report/1"
SECTIONS = ("algebra", "forms", "eigen", "ladder", "coherent", "gns")
SIMILARITY_KINDS = ("none", "diagonal", "random")
MAX_LEVELS = 40


class ConfigError(ValidationError):
    pass


@dataclass(frozen=True)
class Similarity:
    kind: str = "diagonal"
    entries: tuple[float, ...] | None = None
    strength: float = 0.3


@dataclass(frozen=True)
class Tolerances:
    eigen: float = 1e-10
    defect: float = 1e-8
    ladder: float = 1e-10
    coherent: float = 1e-8
    gns: float = 1e-10
    transport: float = 1e-12
    overlap: float = 1e-10
    radius: float = 0.01
    rank_tol: float | None = None


@dataclass(frozen=True)
class RunConfig:
    q: tuple[float, ...] = (-1.0, -0.5, 0.0, 0.5, 0.9, 1.0)
    levels: tuple[int, ...] = (4, 8, 12)
    p: tuple[float, ...] = (2.0, 4.0)
    similarity: Similarity = field(default_factory=Similarity)
    tolerances: Tolerances = field(default_factory=Tolerances)
    seed: int = 0
    output_dir: Path = Path("reports")
    checks: tuple[str, ...] = SECTIONS
    workers: int = 4

    def grid(self) -> list[tuple[float, int, float]]:
        return list(itertools.product(self.q, self.levels, self.p))


# -- configuration ----------------------------------------------------------

def _real(x, name: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(f"{name} must be a number, got {x!r}")
    x = float(x)
    if not math.isfinite(x):
        raise ConfigError(f"{name} must be finite, got {x}")
    return x


def _integer(x, name: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ConfigError(f"{name} must be an integer, got {x!r}")
    return x


def _list(x, name: str) -> list:
    if not isinstance(x, (list, tuple)) or not x:
        raise ConfigError(f"{name} must be a non-empty list")
    return list(x)


def _check_keys(mapping: dict, allowed, where: str) -> None:
    if not isinstance(mapping, dict):
        raise ConfigError(f"{where} must be a mapping")
    extra = sorted(set(mapping) - set(allowed))
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(map(str, extra))}")


def _similarity(raw: dict, levels) -> Similarity:
    _check_keys(raw, ("kind", "entries", "strength"), "similarity")
    kind = raw.get("kind", "diagonal")
    if kind not in SIMILARITY_KINDS:
        raise ConfigError(f"similarity.kind must be one of {SIMILARITY_KINDS}, got {kind!r}")
    entries = raw.get("entries")
    if entries is not None:
        entries = tuple(_real(e, "similarity.entries[]") for e in _list(entries, "similarity.entries"))
        if any(e == 0.0 for e in entries):
            raise ConfigError("similarity.entries must be nonzero")
        if len(entries) < max(levels) + 1:
            raise ConfigError(f"similarity.entries needs at least {max(levels) + 1} values")
    strength = _real(raw.get("strength", 0.3), "similarity.strength")
    if not 0.0 < strength < 1.0:
        raise ConfigError("similarity.strength must lie in (0, 1)")
    return Similarity(kind, entries, strength)


def _tolerances(raw: dict) -> Tolerances:
    names = [f for f in Tolerances.__dataclass_fields__]
    _check_keys(raw, names, "tolerances")
    vals = {}
    for k, v in raw.items():
        if k == "rank_tol" and v is None:
            continue
        x = _real(v, f"tolerances.{k}")
        if x <= 0.0:
            raise ConfigError(f"tolerances.{k} must be positive")
        vals[k] = x
    return Tolerances(**vals)


def config_from_mapping(raw: dict | None, **overrides) -> RunConfig:
    """Validate a parsed config mapping; ``overrides`` (CLI flags) win when not None."""
    raw = dict(raw or {})
    _check_keys(raw, ("q", "levels", "p", "similarity", "tolerances", "seed", "output_dir",
                      "checks", "workers"), "config")
    for k, v in overrides.items():
        if v is not None:
            raw[k] = v
    d = RunConfig()
    qs = tuple(_real(x, "q[]") for x in _list(raw.get("q", d.q), "q"))
    if any(not -1.0 <= x <= 1.0 for x in qs):
        raise ConfigError("every q must lie in [-1, 1]")
    levels = tuple(_integer(x, "levels[]") for x in _list(raw.get("levels", d.levels), "levels"))
    if any(not 2 <= n <= MAX_LEVELS for n in levels):
        raise ConfigError(f"every N must lie in [2, {MAX_LEVELS}]")
    ps = tuple(_real(x, "p[]") for x in _list(raw.get("p", d.p), "p"))
    if any(x < 2.0 for x in ps):
        raise ConfigError("every p must be >= 2")
    seed = _integer(raw.get("seed", d.seed), "seed")
    if seed < 0:
        raise ConfigError("seed must be non-negative")
    workers = _integer(raw.get("workers", d.workers), "workers")
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    checks = tuple(_list(raw.get("checks", d.checks), "checks"))
    bad = [c for c in checks if c not in SECTIONS]
    if bad:
        raise ConfigError(f"unknown check section(s): {bad}; choose from {SECTIONS}")
    out = raw.get("output_dir", d.output_dir)
    if not isinstance(out, (str, Path)) or not str(out):
        raise ConfigError("output_dir must be a path")
    return RunConfig(
        q=qs,
        levels=levels,
        p=ps,
        similarity=_similarity(raw.get("similarity") or {}, levels),
        tolerances=_tolerances(raw.get("tolerances") or {}),
        seed=seed,
        output_dir=Path(out),
        checks=tuple(c for c in SECTIONS if c in checks),
        workers=workers,
    )


def load_config(path: str | Path | None, **overrides) -> RunConfig:
    raw = None
    if path is not None:
        try:
            raw = yaml.safe_load(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"malformed YAML in {path}: {exc}") from exc
        if raw is not None and not isinstance(raw, dict):
            raise ConfigError("config file must hold a mapping")
    return config_from_mapping(raw, **overrides)


# -- serialization ----------------------------------------------------------

def _fmt(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return "%.17g" % x


def _plain(obj):
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return [_plain(x) for x in obj.tolist()]
    if isinstance(obj, Path):
        return obj.as_posix()
    return obj


def dumps(obj, indent: int = 0) -> str:
    """JSON with every float written as ``%.17g`` (non-finite values as strings)."""
    obj = _plain(obj)
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(_plain(x), (dict, list, tuple)) for x in obj):
            return "[" + ", ".join(dumps(x) for x in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(x, indent + 1) for x in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def _write_csv(path: Path, columns: list[str], rows: list[dict]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in columns])
    path.write_text(buf.getvalue())


# -- checks -----------------------------------------------------------------

NUMERICAL = (np.linalg.LinAlgError, NumericalError, FloatingPointError, ZeroDivisionError)


class _Section:
    """Collects check records; exceptions inside a check become 'error' records."""

    def __init__(self, name: str):
        self.name = name
        self.records: list[dict] = []
        self.skipped: str | None = None

    def check(self, name: str, anchor: str, fn: Callable[[], Any], tol: float,
              compare: str = "<=") -> None:
        rec = {"check": name, "anchor": anchor}
        try:
            value = fn()
        except NUMERICAL as exc:
            rec.update(status="error", error=f"{type(exc).__name__}: {exc}")
            self.records.append(rec)
            return
        if compare == "<=":
            ok = value <= tol
        elif compare == "==":
            ok = value == tol
        else:
            raise ValueError(compare)
        rec.update(value=value, tol=tol, compare=compare, status="pass" if ok else "fail")
        self.records.append(rec)

    def note(self, name: str, value) -> None:
        self.records.append({"check": name, "status": "info", "value": value})

    def as_dict(self) -> dict:
        if self.skipped:
            return {"status": self.skipped, "checks": self.records}
        return {"checks": self.records}


def _random_matrix(rng: np.random.Generator, d: int) -> np.ndarray:
    return (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / math.sqrt(2)


def _random_weight(rng: np.random.Generator, d: int, rank: int | None = None) -> np.ndarray:
    g = rng.normal(size=(d, rank or d)) + 1j * rng.normal(size=(d, rank or d))
    return g @ g.conj().T / d


def _algebra_section(s: _Section, d: int, p: float, rng, tol: Tolerances) -> None:
    ctx = make_context(d, p)
    a = ctx.element(_random_matrix(rng, d))
    b = ctx.element(_random_matrix(rng, d))
    e = ctx.identity()
    q = p / (p - 1)
    s.check("normalized trace of identity", "tau(e) = 1",
            lambda: abs(np.trace(e.matrix) / d - 1.0), 1e-15)
    s.check("identity has unit p-norm", "||e||_p = 1", lambda: abs(schatten_norm(e) - 1.0), 1e-14)
    s.check("involution is isometric", "||a*||_p = ||a||_p",
            lambda: abs(schatten_norm(a.H) - schatten_norm(a)) / schatten_norm(a), 1e-13)
    s.check("left module bound", "||a b||_p <= ||a||_0 ||b||_p",
            lambda: max(schatten_norm(a @ b) - operator_norm(a) * schatten_norm(b), 0.0), 1e-12)
    s.check("right module bound", "||a b||_p <= ||a||_p ||b||_0",
            lambda: max(schatten_norm(a @ b) - schatten_norm(a) * operator_norm(b), 0.0), 1e-12)
    s.check("Hoelder inequality", "|tau(a b)| <= ||a||_p ||b||_p'",
            lambda: max(abs(np.trace(a.matrix @ b.matrix)) / d
                        - schatten_norm(a) * schatten_norm(b, q), 0.0), 1e-12)


def _forms_section(s: _Section, d: int, p: float, rng, tol: Tolerances) -> None:
    ctx = make_context(d, p)
    f = make_trace_form(_random_weight(rng, d), Flavor.RIGHT, ctx, normalize=True)
    a, x, y = (ctx.element(_random_matrix(rng, d)) for _ in range(3))
    gamma = continuity_constant(f)
    s.check("positivity", "phi(a, a) >= 0", lambda: max(-f(a, a).real, abs(f(a, a).imag)), 1e-12)
    s.check("module identity", "phi(a x, y) = phi(x, a* y)",
            lambda: abs(f(a @ x, y) - f(x, a.H @ y)), 1e-12)
    s.check("continuity", "|phi(x, y)| <= gamma ||x||_p ||y||_p",
            lambda: max(abs(f(x, y)) - gamma * schatten_norm(x) * schatten_norm(y), 0.0), 1e-12)
    psi = dual(f)
    s.check("dual form", "psi(x, y) = phi(y*, x*)", lambda: abs(psi(x, y) - f(y.H, x.H)), 1e-12)
    pb = pullback(f, a)
    s.check("pullback", "phi_a(x, y) = phi(x a, y a)", lambda: abs(pb(x, y) - f(x @ a, y @ a)), 1e-11)
    small = make_trace_form(_random_weight(rng, 3), Flavor.RIGHT, make_context(3, p), normalize=True)
    fn = form_norm(small, starts=8, seed=int(rng.integers(2 ** 31)))
    s.note("form norm marker", fn.marker)
    s.check("form norm below continuity constant", "||phi|| <= gamma",
            lambda: max(fn.value - fn.upper * (1 + 1e-12), 0.0), 0.0)
    # by Hoelder duality the supremum equals gamma; the ascent should reach it
    s.check("form norm estimate reaches gamma", "||phi|| = ||W||_{p/(p-2)}",
            lambda: abs(fn.value - fn.upper) / fn.upper, 1e-6)


def _eigen_section(s: _Section, p: float, rng, tol: Tolerances) -> None:
    d = 3
    ctx = make_context(d, p)
    a = ctx.element(_random_matrix(rng, d))
    lam = np.linalg.eigvals(a.matrix)[0]
    f = eigenstate_construct(a, lam)
    rep = is_eigenstate(f, a, tol.eigen, tol.defect)
    s.check("constructed eigenstate residual", "phi(a - lam e, a - lam e) = 0",
            lambda: rep.residual, tol.eigen)
    s.check("factorization", "phi(b, a) = phi(e, a) phi(b, e)",
            lambda: rep.factorization_defect, tol.defect)
    s.check("dual statements", "phi(b, a) = lam phi(b, e) <=> psi(b, a*) = conj(lam) psi(b, e)",
            lambda: max(rep.dual_defects), tol.defect)
    s.check("modulus identity", "phi(a, a) = |lam|^2", lambda: rep.modulus_check, tol.eigen)
    h = ctx.element(a.matrix + a.matrix.conj().T)
    hl = np.linalg.eigvalsh(h.matrix)[-1]
    hrep = is_eigenstate(eigenstate_construct(h, hl), h, tol.eigen, tol.defect)
    s.check("Hermitian eigenvalue is real", "a = a* => lam real",
            lambda: hrep.hermitian_imag, tol.eigen)
    g = make_trace_form(_random_weight(rng, d), Flavor.RIGHT, ctx)
    grep = is_eigenstate(g, a, tol.eigen, tol.defect)
    s.check("criterion agrees with factorization", "residual = 0 <=> factorization holds",
            lambda: int(grep.is_eigenstate != (grep.factorization_defect <= tol.defect)), 0, "==")
    s.check("dual statements agree in status", "(i) <=> (ii) <=> (iii) <=> (iv)",
            lambda: int(len(set(grep.statements)) != 1), 0, "==")


def _ladder_section(s: _Section, m: QuonModel, label: str, tol: Tolerances) -> None:
    N = m.levels
    L = m.valid_depth
    qm = qmutator_defect(m)
    s.check(f"{label}: q-mutator below the top level", "x0 y0 - q y0 x0 = e",
            lambda: float(np.abs(qm[:-1]).max()), tol.ladder)
    s.check(f"{label}: number eigen defect", "phi_l(b, n0) = beta_l phi_l(b, e)",
            lambda: max(number_eigen_defect(m, l) for l in range(L + 1)), tol.ladder)
    s.check(f"{label}: lowering defect", "phi_l(a x0, b x0) = beta_l^2 phi_{l-1}(a, b)",
            lambda: max(lowering_defect(m, l) for l in range(1, L + 1)), tol.ladder)
    etas = [eta_ladder(m, l) for l in range(L + 1)]
    s.check(f"{label}: eta number defect", "eta_l(b, n0*) = beta_l eta_l(b, e)",
            lambda: max(e.number_defect for e in etas), tol.ladder)
    s.check(f"{label}: eta lowering defect", "eta_l(a y0*, b y0*) = beta_l^2 eta_{l-1}(a, b)",
            lambda: max(e.lowering_defect for e in etas[1:]), tol.ladder)
    forms = ladder_forms(m)
    if m.q == -1:
        s.check(f"{label}: fermionic collapse beta_2", "beta_2 = 1 + q = 0",
                lambda: abs(beta(m.q, 2)), 0.0)
        w0 = float(np.abs(forms[0].weight).max())
        ny = operator_norm(m.y0) ** 2
        s.check(f"{label}: fermionic collapse forms", "phi_l = 0 for l >= 2",
                lambda: max((float(np.abs(forms[l].weight).max()) / (ny ** l * w0)
                             for l in range(2, L + 1)), default=0.0), tol.ladder)
        s.check(f"{label}: ladder rank", "rank(phi_0 ... phi_{N-2}) = 2",
                lambda: independence_rank(forms), min(2, L + 1), "==")
    else:
        s.check(f"{label}: ladder independence", "rank(phi_0 ... phi_{N-2}) = N - 1",
                lambda: independence_rank(forms), N - 1, "==")


def _norm_checks(s: _Section, m: QuonModel) -> None:
    r = quon_norm_report(m)
    s.note("norm of a_q", r.norm_aq)
    if m.q == -1:
        s.check("fermion norm", "||a_{-1}||_0 = 1", lambda: abs(r.norm_aq - 1.0), 1e-15)
    elif m.q == 1:
        s.check("boson growth", "||a_1||_0^2 = N", lambda: abs(r.norm_aq_sq - m.levels) / m.levels, 1e-14)
    else:
        s.check("quon norm bound", "||a_q||_0^2 <= 2 / (1 - q)",
                lambda: max(r.norm_aq_sq - r.bound_sq, 0.0), 0.0)


def _z_for(m: QuonModel) -> complex:
    return 2.0 if m.q == 1 else 0.3 * radius(m).rho


def _coherent_section(s: _Section, m: QuonModel, label: str, rng, tol: Tolerances) -> None:
    if m.q == -1:
        s.skipped = "skipped: q=-1 undefined"
        return
    z = _z_for(m)
    s.note(f"{label}: z", z)
    s.check(f"{label}: coherent lowering defect", "Phi_z(a x0, b x0) = z Phi_z(a, b)",
            lambda: coherent_lowering_defect(m, z), tol.coherent)

    def tail_excess():
        worst = -math.inf
        for _ in range(5):
            a = m.context.element(_random_matrix(rng, m.dim))
            b = m.context.element(_random_matrix(rng, m.dim))
            cv = evaluate_coherent(m, z, a, b)
            dropped = abs(full_depth_value(m, z, a, b) - cv.value)
            worst = max(worst, dropped - cv.tail - 1e-13 * abs(cv.value))
        return max(worst, 0.0)

    s.check(f"{label}: tail bound dominates remainder", "|Phi_z - Phi_z^(L)| <= tail(L)",
            tail_excess, 0.0)
    if m.q != 1:
        r = radius(m)
        s.check(f"{label}: radius ratio test", "rho' = lim beta_{l+1}^2",
                lambda: abs(empirical_radius(m.q) - r.rho_prime) / r.rho_prime, tol.radius)


def _gns_section(s: _Section, m: QuonModel, pseudo: QuonModel | None, rng, tol: Tolerances) -> None:
    d = m.dim
    rt = tol.rank_tol
    f0 = vacuum_form(m)
    g0 = build_gns(f0, rt)
    s.check("rank-one quotient dimension", "dim H_phi = d for rank-one W", lambda: g0.dim, d, "==")
    s.check("reconstruction", "phi(a, b) = <pi(a) xi, pi(b) xi>", lambda: reconstruction_defect(g0), tol.gns)
    probes = [m.x0, m.y0, m.context.element(_random_matrix(rng, d))]
    s.check("star property", "pi(a*) = pi(a)*", lambda: star_defect(g0, probes), tol.gns)
    s.check("homomorphism", "pi(a b) = pi(a) pi(b)",
            lambda: homomorphism_defect(g0, [(probes[i], probes[j]) for i in range(3) for j in range(3)]),
            tol.gns)
    s.check("cyclic vector", "span pi(A) xi = H_phi", lambda: cyclic_rank(g0), g0.dim, "==")
    k = min(d, 4)
    ctx = make_context(k, m.context.p)
    ge = build_gns(make_trace_form(np.eye(k), Flavor.RIGHT, ctx), rt)
    s.check("faithful quotient dimension", "dim H_phi = d^2 for W = e", lambda: ge.dim, k * k, "==")
    s.check("faithful reconstruction", "phi(a, b) = <pi(a) xi, pi(b) xi>",
            lambda: reconstruction_defect(ge), tol.gns)
    # a generic rank-one weight has rounding-level (not exactly zero) null eigenvalues
    gr = build_gns(make_trace_form(_random_weight(rng, k, 1), Flavor.RIGHT, ctx), rt)
    s.check("generic rank-one quotient dimension", "dim H_phi = d for rank-one W",
            lambda: gr.dim, k, "==")
    if m.valid_depth >= 1:
        f1 = ladder_forms(m, 1)[1]
        tr = gns_eigen_transport(build_gns(f1, rt), m.n0)
        s.check("eigenstate transport", "phi(a - lam e, a - lam e) = ||pi(a) xi - lam xi||^2",
                lambda: tr.identity_defect, tol.transport)
    L = m.valid_depth
    xi = xi_vectors(m, L, g0)
    ov = overlap_matrix(xi.vectors)
    bf = np.array([beta_factorial(m.q, l) for l in range(L + 1)])
    s.check("xi reproduces ladder forms", "phi_l(a, b) = <pi_0(a) xi_l, pi_0(b) xi_l>",
            lambda: max(xi.defects), tol.gns)
    s.check("xi orthogonality", "<xi_k, xi_l> = 0 for k != l", lambda: ov.max_offdiag, tol.overlap)
    s.check("xi norms", "<xi_l, xi_l> = beta_l!",
            lambda: float(np.max(np.abs(ov.diagonal - bf) / np.maximum(bf, 1.0))), tol.overlap)
    if pseudo is None:
        return
    if pseudo.q == -1 or vacuum_kernel_dim(pseudo) != 1 or eta_kernel_dim(pseudo) != 1:
        s.note("biorthogonality", "skipped: vacuum kernel not one-dimensional")
        return
    br = biorthogonality_check(pseudo, pseudo.valid_depth)
    scale = abs(br.vacuum_overlap)
    s.check("biorthogonality intertwiners", "T pi(a) = a T, T unitary", lambda: br.intertwiner_defect, tol.gns)
    s.check("biorthogonality", "<xi_k, nu_l> = 0 for k != l", lambda: br.max_offdiag, tol.overlap)
    s.check("biorthogonal norms", "<xi_l, nu_l> = beta_l! <xi_0, nu_0>",
            lambda: float(np.max(np.abs(br.diagonal - br.beta_factorials * br.diagonal[0])
                                 / np.maximum(br.beta_factorials * scale, 1.0))), tol.overlap)


def _pseudo_model(cfg: RunConfig, q: float, N: int, p: float, rng) -> QuonModel | None:
    sim = cfg.similarity
    if sim.kind == "none":
        return None
    if sim.kind == "diagonal":
        S = diagonal_similarity(N, None if sim.entries is None else sim.entries[:N + 1])
    else:
        S = random_similarity(N, rng, sim.strength)
    return build_quon(q, N, S, p)


def errata(q: float | None = None) -> list[dict]:
    """The four printed-vs-derived discrepancies, with values at ``q`` when given."""
    out = [
        {
            "flag": "beta_closed_form",
            "printed": "beta_l = (1 - q^(l+1)) / (1 - q)",
            "normative": "beta_l = (1 - q^l) / (1 - q) from beta_0 = 0, beta_l = 1 + q beta_(l-1)",
        },
        {
            "flag": "rho_prime",
            "printed": "rho' = 1 / (1 - q)",
            "normative": "rho' = lim beta_(l+1)^2 = 1 / (1 - q)^2",
        },
        {
            "flag": "eta_recursion_index",
            "printed": "eta_l(a, b) = phi_(l-1)(a x0*, b x0*)",
            "normative": "eta_l(a, b) = eta_(l-1)(a x0*, b x0*)",
        },
        {
            "flag": "quon_norm_bound",
            "printed": "||a_q|| <= 2 / (1 - q)",
            "normative": "||a_q||^2 <= 2 / (1 - q)",
        },
    ]
    if q is not None and abs(q) < 1:
        out[0]["values"] = {"printed_beta_1": (1 - q ** 2) / (1 - q), "recursion_beta_1": beta(q, 1)}
        out[1]["values"] = {"printed": 1 / (1 - q), "limit": 1 / (1 - q) ** 2}
        out[3]["values"] = {"bound": 2 / (1 - q), "sqrt_bound": math.sqrt(2 / (1 - q))}
    return out


def run_point(cfg: RunConfig, index: int, q: float, N: int, p: float) -> dict:
    """All enabled checks at one grid point."""
    rng = np.random.default_rng([cfg.seed, index])
    tol = cfg.tolerances
    sections: dict[str, dict] = {}
    herm = build_quon(q, N, None, p)
    pseudo = _pseudo_model(cfg, q, N, p, rng)
    models = [("hermitian", herm)] + ([("pseudo", pseudo)] if pseudo is not None else [])
    for name in cfg.checks:
        s = _Section(name)
        try:
            if name == "algebra":
                _algebra_section(s, N + 1, p, rng, tol)
            elif name == "forms":
                _forms_section(s, N + 1, p, rng, tol)
            elif name == "eigen":
                _eigen_section(s, p, rng, tol)
            elif name == "ladder":
                for label, m in models:
                    _ladder_section(s, m, label, tol)
                _norm_checks(s, herm)
            elif name == "coherent":
                for label, m in models:
                    _coherent_section(s, m, label, rng, tol)
            elif name == "gns":
                _gns_section(s, herm, pseudo, rng, tol)
        except NUMERICAL as exc:
            s.records.append({"check": f"{name} section", "status": "error",
                              "error": f"{type(exc).__name__}: {exc}"})
        sections[name] = s.as_dict()
    return {
        "schema": SCHEMA_VERSION,
        "point": {"index": index, "q": q, "N": N, "p": p, "seed": cfg.seed,
                  "similarity": cfg.similarity.kind},
        "sections": sections,
        "errata": errata(q),
    }


def _first_problem(report: dict) -> dict | None:
    for sec, body in report["sections"].items():
        for rec in body["checks"]:
            if rec["status"] in ("fail", "error"):
                return {"section": sec, **rec}
    return None


@dataclass
class SuiteResult:
    exit_code: int
    reports: list[dict]
    first_failure: dict | None
    files: list[Path]

    @property
    def message(self) -> str:
        if self.first_failure is None:
            return f"all checks passed at {len(self.reports)} grid point(s)"
        f = self.first_failure
        pt = f["point"]
        head = "numerical failure" if f["status"] == "error" else "check failed"
        detail = f.get("error") or f"got {f.get('value')!r}, required {f.get('compare')} {f.get('tol')!r}"
        return (f"{head} at q={pt['q']}, N={pt['N']}, p={pt['p']}: {f['section']}/{f['check']} "
                f"[anchor: {f['anchor'] if 'anchor' in f else f['check']}] ({detail})")


def _point_name(r: dict) -> str:
    pt = r["point"]
    return f"point_{pt['index']:03d}_q{pt['q']:+.3f}_N{pt['N']}_p{pt['p']:g}.json"


def run_suite(cfg: RunConfig, write: bool = True) -> SuiteResult:
    """Run every grid point (concurrently), then write reports in grid order."""
    grid = cfg.grid()
    with ThreadPoolExecutor(max_workers=cfg.workers) as ex:
        reports = list(ex.map(lambda a: run_point(cfg, a[0], *a[1]), enumerate(grid)))
    first = None
    code = 0
    for r in reports:
        prob = _first_problem(r)
        if prob is not None:
            first = {**prob, "point": r["point"]}
            code = 3 if prob["status"] == "error" else 2
            break
    files = []
    if write:
        out = cfg.output_dir
        out.mkdir(parents=True, exist_ok=True)
        for r in reports:
            path = out / _point_name(r)
            path.write_text(dumps(r) + "\n")
            files.append(path)
        rows = []
        for r in reports:
            recs = [rec for body in r["sections"].values() for rec in body["checks"]]
            n_fail = sum(rec["status"] == "fail" for rec in recs)
            n_err = sum(rec["status"] == "error" for rec in recs)
            prob = _first_problem(r)
            rows.append({
                "schema": SCHEMA_VERSION, **{k: r["point"][k] for k in ("q", "N", "p")},
                "checks": sum(rec["status"] != "info" for rec in recs),
                "failed": n_fail, "errors": n_err,
                "status": "pass" if prob is None else prob["status"],
                "first_failure": "" if prob is None else f"{prob['section']}/{prob['check']}",
                "anchor": "" if prob is None else prob.get("anchor", ""),
                "coherent": r["sections"].get("coherent", {}).get("status", ""),
            })
        summary = out / "summary.csv"
        _write_csv(summary, ["schema", "q", "N", "p", "checks", "failed", "errors", "status",
                             "first_failure", "anchor", "coherent"], rows)
        files.append(summary)
        files.append(_write_errata(cfg))
    return SuiteResult(code, reports, first, files)


def _write_errata(cfg: RunConfig) -> Path:
    path = cfg.output_dir / "errata.json"
    body = {
        "schema": SCHEMA_VERSION,
        "note": "documentation only; never a failure",
        "flags": errata(),
        "values": [{"q": q, "flags": errata(q)} for q in cfg.q],
    }
    path.write_text(dumps(body) + "\n")
    return path


# -- sweep table ------------------------------------------------------------

def sweep_columns() -> list[str]:
    schema = json.loads(resources.files("sesqui").joinpath("data/sweep_schema.json").read_text())
    return [c["name"] for c in schema["columns"]]


def sweep_rows(q: float, N: int, p: float) -> list[dict]:
    """Rows l = 0 .. N-2 for the Hermitian model at one grid point."""
    m = build_quon(q, N, None, p)
    L = m.valid_depth
    xi = xi_vectors(m, L)
    ov = overlap_matrix(xi.vectors)
    O = ov.matrix
    norms = np.sqrt(np.abs(np.diag(O)))
    nr = quon_norm_report(m)
    if q == -1:
        rho = None
        coh = None
    else:
        r = radius(m)
        rho = r.rho
        coh = coherent_lowering_defect(m, _z_for(m))
    rows = []
    for l in range(L + 1):
        off = [abs(O[k, l]) / (norms[k] * norms[l]) for k in range(L + 1)
               if k != l and norms[k] > 0 and norms[l] > 0]
        rows.append({
            "schema": SCHEMA_VERSION, "q": q, "N": N, "p": p, "l": l,
            "beta": beta(q, l),
            "beta_closed_form": beta_closed_form(q, l),
            "beta_factorial": beta_factorial(q, l),
            "gamma_sq": gamma_sq(q, l),
            "number_eigen_defect": number_eigen_defect(m, l),
            "lowering_defect": lowering_defect(m, l) if l >= 1 else None,
            "xi_norm_sq": float(ov.diagonal[l]),
            "max_offdiag_overlap": max(off, default=0.0),
            "coherent_lowering_defect": coh,
            "rho": rho,
            "norm_aq": nr.norm_aq,
            "norm_aq_sq": nr.norm_aq_sq,
            "norm_bound_sq": nr.bound_sq,
        })
    return rows


def sweep_table(cfg: RunConfig, write: bool = True) -> tuple[list[dict], Path | None]:
    grid = cfg.grid()
    with ThreadPoolExecutor(max_workers=cfg.workers) as ex:
        chunks = list(ex.map(lambda g: sweep_rows(*g), grid))
    rows = [r for c in chunks for r in c]
    path = None
    if write:
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
        path = cfg.output_dir / "sweep.csv"
        _write_csv(path, sweep_columns(), rows)
        _write_errata(cfg)
    return rows, path
