"""Acceptance criteria 1-9, one test each, at the stated tolerances."""
import time

import numpy as np

from deltasing.catalog import (
    LABELS,
    closed_form_point,
    denominator_guard,
    full_catalog,
    generic_rank_sample,
    min_pairwise_distance,
    q3_denominator,
    q4_denominator,
    rank_deficiency_search,
)
from deltasing.curve import branch, factor_identity_residual, newton_roots
from deltasing.geometry import circle_circle_branch
from deltasing.linalg import singular_values
from deltasing.mechanism import (
    DELTA_CONSTRAINT_NAMES,
    TILDE,
    ParameterSet,
    build_crank_slider,
    build_delta,
    crank_slider_configuration,
)
from deltasing.symmetry import ELEMENTS, act, constraint_mixing_matrix, orbit
from deltasing.witness import DEFAULT_HALF_WIDTH, certify, crank_slider_witness, path_samples, witness_paths

from test_geometry import brute_force_circles, degenerate_family


def test_criterion_1_catalog(acceptance):
    params = ParameterSet(3, 5, 0.5)
    t0 = time.perf_counter()
    records = full_catalog(params)
    m = build_delta(params)
    pts = [r.config for r in records]
    worst_res = max(m.residual_max(x) for x in pts)
    svs = [singular_values(m.constraints.jacobian(x)) for x in pts]
    ranks = {r.rank for r in records}
    r12 = max(s[11] / s[0] for s in svs)
    r11 = min(s[10] / s[0] for s in svs)
    dmin = min_pairwise_distance(pts)
    elapsed = time.perf_counter() - t0
    ok = (len(records) == 24 and len(orbit([closed_form_point(l, params) for l in LABELS])) == 24 and dmin > 1e-3
          and worst_res <= 1e-9 * params.b**2 and ranks == {11} and r12 <= 1e-10 and r11 >= 1e-6 and elapsed < 1.0)
    acceptance(1, ok, f"24 points, min distance {dmin:.4g}, max residual {worst_res:.2e}, rank {sorted(ranks)}, "
                      f"max s12/s1 {r12:.2e}, min s11/s1 {r11:.3g}, {elapsed:.3f} s")
    assert ok


def test_criterion_2_free_action(acceptance):
    params = ParameterSet(3, 5, 0.5)
    records = full_catalog(params)
    min_disp = min(np.linalg.norm(act(g, r.config) - r.config) for r in records for g in ELEMENTS if not g.is_identity)
    sizes = [len(orbit([closed_form_point(l, params)])) for l in LABELS]
    ok = min_disp >= 1e-6 and sizes == [6, 6, 6, 6]
    acceptance(2, ok, f"min displacement {min_disp:.4g}, orbit sizes {sizes}")
    assert ok


def test_criterion_3_certificates(acceptance):
    t0 = time.perf_counter()
    worst_ratio, worst_res, count, problems = np.inf, 0.0, 0, []
    for abd in ((3, 5, 0.5), (2, 3, 0.25)):
        params = ParameterSet(*abd)
        m = build_delta(params)
        system = build_delta(params, TILDE).constraints
        for rec in full_catalog(params):
            cert = certify(m, rec.config, samples=41, half_width=DEFAULT_HALF_WIDTH)
            if cert.half_widths != (DEFAULT_HALF_WIDTH,) * 4:
                problems.append(f"{rec.name} window shrunk")
            # independent resampling at exactly 41 points over |t - t0| <= 0.05
            for path in witness_paths(rec.config, params):
                res = max(r for _, _, r in path_samples(path, system, 41))
                worst_res = max(worst_res, res / params.b**2)
            if cert.span_rank != 4:
                problems.append(f"{rec.name} span {cert.span_rank}")
            worst_ratio = min(worst_ratio, cert.sigma_ratio)
            count += 1
    elapsed = time.perf_counter() - t0
    ok = not problems and count == 48 and worst_res <= 1e-8 and worst_ratio > 1e-6 and elapsed < 10.0
    acceptance(3, ok, f"{count} certificates, min s4/s1 {worst_ratio:.4g}, max residual/b^2 {worst_res:.2e}, "
                      f"{elapsed:.2f} s {problems or ''}")
    assert ok


def test_criterion_4_generic_regularity(acceptance):
    params = ParameterSet(3, 5, 0.5)
    rows = generic_rank_sample(params, 100, min_distance=0.1, rng_seed=2024)
    generic_ok = all(rank == 12 for _, rank, _ in rows)
    min_ratio = min(ratio for _, _, ratio in rows)
    catalog = full_catalog(params)
    cands = rank_deficiency_search(build_delta(params), 1000, 60, rng_seed=0, catalog=catalog)
    far = [c for c in cands if c.match_distance > 1e-4]
    distinct = len({c.match for c in cands if c.match})
    ok = generic_ok and not far and len(cands) > 0
    acceptance(4, ok, f"100 generic points rank 12: {generic_ok} (min s12/s1 {min_ratio:.3g}); "
                      f"search: {len(cands)}/1000 converged, {distinct} distinct catalog points, {len(far)} unmatched")
    assert ok


def test_criterion_5_invariance(acceptance):
    m = build_delta(ParameterSet(3, 5, 0.5))
    worst = 0.0
    s_ok = False
    for g in ELEMENTS:
        A, res = constraint_mixing_matrix(m, g, n_points=200)
        worst = max(worst, res)
        if str(g) == "s":
            neg = {DELTA_CONSTRAINT_NAMES[i] for i in range(12) if abs(A[i, i] + 1) < 1e-10}
            s_ok = neg == {"l3", "l6"} and np.allclose(A, np.diag(np.diag(A)), atol=1e-10)
    ok = worst <= 1e-10 and s_ok
    acceptance(5, ok, f"max mixing residual {worst:.2e}, A_s diagonal with -1 at l3, l6: {s_ok}")
    assert ok


def test_criterion_6_denominators(acceptance):
    rng = np.random.default_rng(6)
    min_u = min_u3 = np.inf
    max_disc = -np.inf
    for _ in range(10_000):
        a = rng.uniform(0.01, 10)
        p = ParameterSet(a, rng.uniform(0.01, 10), rng.uniform(1e-3, 1 - 1e-3) * a)
        guard = denominator_guard(p)
        # independent evaluation of the denominators alongside the guard
        min_u = min(min_u, q4_denominator(p), guard["q4_denominator"])
        min_u3 = min(min_u3, q3_denominator(p), guard["q3_denominator"])
        max_disc = max(max_disc, guard["discriminant"], 36 * p.d**2 * (p.d**2 - p.a**2))
    ok = min_u > 0 and min_u3 > 0 and max_disc < 0
    acceptance(6, ok, f"min q4 denominator {min_u:.4g}, min q3 denominator {min_u3:.4g}, "
                      f"max discriminant {max_disc:.3g}")
    assert ok


def test_criterion_7_crank_slider(acceptance):
    cert = crank_slider_witness(1.0, 1.0)
    m = build_crank_slider(1.0, 2.0)
    rng = np.random.default_rng(7)
    sig2 = []
    for _ in range(10_000):
        x = crank_slider_configuration(1.0, 2.0, rng.uniform(0, 2 * np.pi), int(rng.choice([-1, 1])))
        assert m.residual_max(x) < 1e-12
        sig2.append(singular_values(m.constraints.jacobian(x))[1])
    min_sig2 = min(sig2)
    at_point = np.allclose(cert.point, [0.0, 1.0, 0.0], atol=1e-12)
    ok = (at_point and cert.span_rank == 2 and cert.local_dimension == 1 and cert.jacobian_rank == 1
          and min_sig2 > 1e-3)
    acceptance(7, ok, f"l1 = l2 = 1 at {np.round(cert.point, 12).tolist()}: span {cert.span_rank} > dim 1, Jacobian rank {cert.jacobian_rank}; "
                      f"(1,2): min sigma2 over 10^4 samples {min_sig2:.6g}")
    assert ok


def test_criterion_8_geometry_oracle(acceptance):
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(100):
        r0, r = rng.uniform(0.5, 3, size=2)
        D = rng.uniform(abs(r0 - r) + 0.05, r0 + r - 0.05)
        ang = rng.uniform(0, 2 * np.pi)
        P = D * np.array([np.cos(ang), np.sin(ang)])
        ref = brute_force_circles(r0, P, r)
        for br in (1, -1):
            z = circle_circle_branch(r0, lambda t: P, lambda t: r, br)
            worst = max(worst, min(np.linalg.norm(z - s) for s in ref))
    worst_lim = 0.0
    for _ in range(20):
        r0, v, center, gap = degenerate_family(rng)
        closed = r0 / np.hypot(*v) * np.array([-v[1], v[0]])
        for br in (1, -1):
            z = circle_circle_branch(r0, center, branch=br, t=0.0, gap=gap)
            worst_lim = max(worst_lim, np.linalg.norm(z - br * closed))
    ok = worst <= 1e-9 and worst_lim <= 1e-8
    acceptance(8, ok, f"transversal max deviation {worst:.2e}, degenerate limit max deviation {worst_lim:.2e}")
    assert ok


def test_criterion_9_curve(acceptance):
    # 101 x 101 grid on [-1, 1] x (-0.2, 1), the y interval open at both ends
    res = factor_identity_residual(np.linspace(-1, 1, 101), np.linspace(-0.2, 1, 103)[1:-1])
    roots = newton_roots(box=0.1, grid=21)
    dev = max(abs(y - branch(x)) for x, y in roots)
    ok = res <= 1e-12 and dev <= 1e-8 and len(roots) > 0
    acceptance(9, ok, f"factor residual {res:.2e}, {len(roots)} Newton roots, max distance to branch {dev:.2e}")
    assert ok
