"""Acceptance criteria 1-11 at their stated tolerances.

Each criterion prints one ``PASS``/``FAIL`` line (also collected into the
pytest terminal summary).  Run directly with ``python3 tests/test_acceptance.py``.
"""

import filecmp
import math
import sys
import tempfile
from pathlib import Path

import numpy as np
import pytest

from sesqui import (
    beta,
    beta_closed_form,
    beta_factorial,
    biorthogonality_check,
    build_gns,
    build_quon,
    coherent_lowering_defect,
    diagonal_similarity,
    eigenstate_construct,
    empirical_radius,
    eta_ladder,
    evaluate_coherent,
    gamma_sq,
    gns_eigen_transport,
    independence_rank,
    is_eigenstate,
    ladder_forms,
    lowering_defect,
    make_context,
    make_trace_form,
    number_eigen_defect,
    overlap_matrix,
    quon_norm_report,
    radius,
    reconstruction_defect,
    rho_prime_limit,
    xi_vectors,
)
from sesqui.coherent import full_depth_value
from sesqui.gns import homomorphism_defect, star_defect
from sesqui.harness import config_from_mapping, run_suite

QS = [-1.0, -0.5, 0.0, 0.5, 0.9, 1.0]
LEVELS = [4, 8, 12]
PS = [2.0, 4.0]

RESULTS = {}


def _rand(rng, d):
    return (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / math.sqrt(2)


def _psd(rng, d, rank):
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    return g @ g.conj().T / d


def criterion_1():
    worst_beta = worst_gamma = 0.0
    for q in QS:
        for l in range(1, 11):
            expect = l if q == 1 else (1 - q ** l) / (1 - q)
            worst_beta = max(worst_beta, abs(beta(q, l) - expect), abs(beta_closed_form(q, l) - beta(q, l)))
        for n in range(0, 11):
            worst_gamma = max(worst_gamma, abs(gamma_sq(q, n) - beta(q, n + 1)))
    ok = worst_beta <= 1e-13 and worst_gamma <= 1e-14 and all(beta(q, 0) == 0 for q in QS)
    return ok, f"max |beta - closed form| = {worst_beta:.2e}, max |gamma^2 - beta_(n+1)| = {worst_gamma:.2e}"


def _eigen_instances():
    """100 instances per d in {2, 3, 4}: even ones constructed eigenstates, odd ones random weights."""
    for d in (2, 3, 4):
        ctx = make_context(d)
        for i in range(100):
            rng = np.random.default_rng([d, i])
            a = ctx.element(_rand(rng, d))
            if i % 2 == 0:
                lam = np.linalg.eigvals(a.matrix)[rng.integers(d)]
                yield d, a, eigenstate_construct(a, lam), True
            else:
                yield d, a, make_trace_form(_psd(rng, d, int(rng.integers(1, d + 1))), ctx=ctx), False


def criterion_2():
    agree = constructed_ok = True
    worst_constructed = 0.0
    n_eig = n = 0
    for _, a, f, constructed in _eigen_instances():
        rep = is_eigenstate(f, a, tol=1e-10, defect_tol=1e-8)
        n += 1
        n_eig += rep.is_eigenstate
        agree &= (rep.residual <= 1e-10) == (rep.factorization_defect <= 1e-8)
        if constructed:
            worst_constructed = max(worst_constructed, rep.residual)
            constructed_ok &= rep.residual <= 1e-10
    return agree and constructed_ok, (f"{n} instances ({n_eig} eigenstates), criterion <=> factorization on all; "
                                      f"max constructed residual {worst_constructed:.2e}")


def criterion_3():
    agree = True
    worst_mod = worst_imag = 0.0
    for d, a, f, constructed in _eigen_instances():
        rep = is_eigenstate(f, a, tol=1e-10, defect_tol=1e-8)
        agree &= len(set(rep.statements)) == 1
        if rep.is_eigenstate:
            worst_mod = max(worst_mod, rep.modulus_check)
    for d in (2, 3, 4):
        ctx = make_context(d)
        for i in range(100):
            rng = np.random.default_rng([d, i, 1])
            m = _rand(rng, d)
            h = ctx.element(m + m.conj().T)
            lam = np.linalg.eigvalsh(h.matrix)[rng.integers(d)]
            rep = is_eigenstate(eigenstate_construct(h, lam), h)
            worst_imag = max(worst_imag, rep.hermitian_imag)
            worst_mod = max(worst_mod, rep.modulus_check)
    ok = agree and worst_mod <= 1e-10 and worst_imag <= 1e-10
    return ok, f"four statements agree: {agree}; max modulus gap {worst_mod:.2e}; max |Im lam| {worst_imag:.2e}"


def criterion_4():
    worst = {"number": 0.0, "lowering": 0.0, "eta": 0.0}
    for q in QS:
        for N in LEVELS:
            for p in PS:
                for S in (None, diagonal_similarity(N)):
                    m = build_quon(q, N, S, p)
                    for l in range(N - 1):
                        worst["number"] = max(worst["number"], number_eigen_defect(m, l))
                        eta = eta_ladder(m, l)
                        worst["eta"] = max(worst["eta"], eta.number_defect)
                        if l:
                            worst["lowering"] = max(worst["lowering"], lowering_defect(m, l))
                            worst["eta"] = max(worst["eta"], eta.lowering_defect)
    ok = all(v <= 1e-10 for v in worst.values())
    return ok, ", ".join(f"max {k} defect {v:.2e}" for k, v in worst.items())


def criterion_5():
    bad = []
    for q in QS:
        for N in LEVELS:
            for S in (None, diagonal_similarity(N)):
                forms = ladder_forms(build_quon(q, N, S))
                r = independence_rank(forms)
                expect = 2 if q == -1 else N - 1
                if r != expect:
                    bad.append((q, N, r))
    collapse = beta(-1, 2) == 0 and all(
        np.abs(f.weight).max() == 0 for f in ladder_forms(build_quon(-1, 12))[2:])
    return not bad and collapse, f"rank mismatches {bad}; q=-1 beta_2 = 0 collapse: {collapse}"


def criterion_6():
    worst_low = 0.0
    tail_ok = True
    worst_ratio = 0.0
    for q in (0.0, 0.5, 0.9, 1.0):
        m = build_quon(q, 12)
        z = 2.0 if q == 1 else 0.3 * radius(m).rho
        worst_low = max(worst_low, coherent_lowering_defect(m, z))
        rng = np.random.default_rng(int(q * 10))
        for i in range(100):
            a = m.context.element(_rand(rng, 13))
            b = m.context.element(_rand(rng, 13))
            # a loose eps forces a genuine truncation on half the draws
            cv = evaluate_coherent(m, z, a, b, eps=1e-6 if i % 2 else 1e-12)
            dropped = abs(full_depth_value(m, z, a, b) - cv.value)
            tail_ok &= dropped <= cv.tail + 1e-13 * abs(cv.value)
        if q != 1:
            worst_ratio = max(worst_ratio, abs(empirical_radius(q, l=100) / rho_prime_limit(q) - 1))
    ok = worst_low <= 1e-8 and tail_ok and worst_ratio <= 0.01
    return ok, (f"max lowering defect {worst_low:.2e}; tail dominates: {tail_ok}; "
                f"max ratio-test error {worst_ratio:.2e} (q = 1 has rho' = inf)")


def criterion_7():
    worst = {"reconstruction": 0.0, "star": 0.0, "homomorphism": 0.0, "transport": 0.0}
    dims_ok = True
    for d in (2, 3, 5, 8, 13):
        ctx = make_context(d)
        rng = np.random.default_rng(d)
        probes = [ctx.element(_rand(rng, d)) for _ in range(3)]
        for W, expect in ((np.eye(d), d * d), (_psd(rng, d, 1), d)):
            g = build_gns(make_trace_form(W, ctx=ctx))
            dims_ok &= g.dim == expect
            worst["reconstruction"] = max(worst["reconstruction"], reconstruction_defect(g))
            worst["star"] = max(worst["star"], star_defect(g, probes))
            worst["homomorphism"] = max(worst["homomorphism"],
                                        homomorphism_defect(g, [(x, y) for x in probes for y in probes]))
    for d in (2, 3, 4):
        ctx = make_context(d)
        for i in range(20):
            rng = np.random.default_rng([d, i, 7])
            a = ctx.element(_rand(rng, d))
            f = eigenstate_construct(a, np.linalg.eigvals(a.matrix)[0]) if i % 2 else \
                make_trace_form(_psd(rng, d, d), ctx=ctx)
            tr = gns_eigen_transport(build_gns(f), a)
            worst["transport"] = max(worst["transport"], tr.identity_defect)
    for q in (0.0, 0.5, 0.9):
        m = build_quon(q, 8)
        for l, f in enumerate(ladder_forms(m, 3)):
            worst["transport"] = max(worst["transport"], gns_eigen_transport(build_gns(f), m.n0).identity_defect)
    ok = dims_ok and worst["transport"] <= 1e-12 and all(
        v <= 1e-10 for k, v in worst.items() if k != "transport")
    return ok, f"dimensions exact: {dims_ok}; " + ", ".join(f"{k} {v:.2e}" for k, v in worst.items())


def criterion_8():
    worst_off = worst_diag = 0.0
    for q in QS:
        for N in LEVELS:
            m = build_quon(q, N)
            ov = overlap_matrix(xi_vectors(m, N - 2).vectors)
            bf = np.array([beta_factorial(q, l) for l in range(N - 1)])
            worst_off = max(worst_off, ov.max_offdiag)
            worst_diag = max(worst_diag, float(np.max(np.abs(ov.diagonal - bf) / np.maximum(bf, 1.0))))
    return worst_off <= 1e-10 and worst_diag <= 1e-10, \
        f"max normalized off-diagonal {worst_off:.2e}, max relative diagonal error {worst_diag:.2e}"


def criterion_9():
    worst_off = worst_diag = worst_map = 0.0
    for q in QS:
        if q == -1:
            continue  # ker(x0) is not a ray at q = -1
        for N in LEVELS:
            r = biorthogonality_check(build_quon(q, N, diagonal_similarity(N)), N - 2)
            bf = r.beta_factorials
            worst_off = max(worst_off, r.max_offdiag)
            worst_diag = max(worst_diag, float(np.max(np.abs(r.diagonal - bf) / np.maximum(bf, 1.0))))
            worst_map = max(worst_map, r.intertwiner_defect)
    ok = worst_off <= 1e-10 and worst_diag <= 1e-10 and worst_map <= 1e-10
    return ok, (f"max normalized off-diagonal {worst_off:.2e}, max relative diagonal error {worst_diag:.2e}, "
                f"intertwiner defect {worst_map:.2e} (q = -1 excluded)")


def criterion_10():
    fermion = all(quon_norm_report(build_quon(-1, N)).norm_aq == 1.0 for N in range(2, 41))
    bound_ok = True
    for q in (-0.9, -0.5, 0.0, 0.5, 0.9, 0.99):
        for N in range(2, 41):
            r = quon_norm_report(build_quon(q, N))
            bound_ok &= r.norm_aq_sq <= r.bound_sq
    boson = max(abs(quon_norm_report(build_quon(1, N)).norm_aq_sq / N - 1) for N in range(2, 41))
    ok = fermion and bound_ok and boson <= 1e-13
    return ok, f"||a_-1|| = 1: {fermion}; ||a_q||^2 <= 2/(1-q): {bound_ok}; max | ||a_1||^2 / N - 1 | {boson:.2e}"


def criterion_11():
    with tempfile.TemporaryDirectory() as tmp:
        dirs = [Path(tmp) / "a", Path(tmp) / "b"]
        codes = []
        for out, workers in zip(dirs, (4, 1)):
            cfg = config_from_mapping(None, output_dir=str(out), seed=2024, workers=workers)
            codes.append(run_suite(cfg).exit_code)
        names = sorted(p.name for p in dirs[0].iterdir())
        same = names == sorted(p.name for p in dirs[1].iterdir())
        _, mismatch, errors = filecmp.cmpfiles(dirs[0], dirs[1], names, shallow=False)
        same &= not mismatch and not errors
    return same and codes == [0, 0], f"{len(names)} report files byte-identical: {same}; exit codes {codes}"


CRITERIA = {
    1: ("beta ladder", criterion_1),
    2: ("eigenstate criterion", criterion_2),
    3: ("dual equivalences", criterion_3),
    4: ("quon ladder defects", criterion_4),
    5: ("ladder independence", criterion_5),
    6: ("coherent forms", criterion_6),
    7: ("GNS", criterion_7),
    8: ("orthogonality", criterion_8),
    9: ("biorthogonality", criterion_9),
    10: ("norm bounds", criterion_10),
    11: ("determinism", criterion_11),
}


def _run(k):
    name, fn = CRITERIA[k]
    ok, detail = fn()
    line = f"criterion {k:2d} ({name}): {'PASS' if ok else 'FAIL'} - {detail}"
    RESULTS[k] = line
    print(line)
    return ok, line


@pytest.mark.parametrize("k", sorted(CRITERIA), ids=[f"criterion_{k}" for k in sorted(CRITERIA)])
def test_criterion(k):
    ok, line = _run(k)
    assert ok, line


if __name__ == "__main__":
    results = [_run(k)[0] for k in sorted(CRITERIA)]
    sys.exit(0 if all(results) else 1)
