"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

The per-criterion lines are also collected into the "acceptance criteria"
section of the terminal summary.
"""

import cmath
import math
import time

import numpy as np
import pytest

from intelligent_spin import dynamics as dy
from intelligent_spin import intelligent_states as ist
from intelligent_spin import wavepacket as wp

from oracles import cartesian_to_y1, y1_values

ETAS_1 = [0.1, 0.5, 0.9, 0.3 + 0.2j]


@pytest.fixture
def report(record_property):
    def emit(number, ok, detail):
        record_property("detail", detail)
        print(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return emit


def states_1():
    for eta in ETAS_1:
        for l in range(1, 21):
            yield eta, ist.solve_intelligent(l, eta)


def test_criterion_01_eigenvalue_law(report):
    start = time.perf_counter()
    worst = 0.0
    for eta, states in states_1():
        root = cmath.sqrt(1 - eta ** 2)
        worst = max(worst, max(abs(s.w - s.k * root) for s in states))
    elapsed = time.perf_counter() - start
    report(1, worst < 1e-8 and elapsed < 10, f"max |w - k r| = {worst:.2e}, {elapsed:.2f}s")


def test_criterion_02_minimum_uncertainty(report):
    worst = 0.0
    for eta, states in states_1():
        if isinstance(eta, complex):
            continue
        for s in states:
            r = ist.expectations(s)
            worst = max(worst, abs(r.product - r.robertson_bound) / max(r.robertson_bound, 1e-12))
    report(2, worst < 1e-9, f"max relative defect = {worst:.2e}")


def test_criterion_03_squeezing_ratio(report):
    worst = 0.0
    for eta, states in states_1():
        for s in states:
            if abs(s.k) == s.l:
                continue
            r = ist.expectations(s)
            if r.var_Lx > 0 and r.var_Ly > 0:
                worst = max(worst, abs(r.var_Lx / r.var_Ly - abs(eta) ** 2))
    report(3, worst < 1e-9, f"max | varX/varY - |eta|^2 | = {worst:.2e}")


def test_criterion_04_deformed_algebra(report):
    etas = [0.0, 0.3, 0.5, 0.9, -0.7, 0.3 + 0.2j, 0.5j, 0.9 * cmath.exp(2j), -0.4 - 0.4j]
    worst = 0.0
    for eta in etas:
        for l in range(11):
            l3, lp, lm = ist.su2_generators(l, eta)
            for err in (l3 @ lp - lp @ l3 - lp, l3 @ lm - lm @ l3 + lm, lp @ lm - lm @ lp - 2 * l3):
                worst = max(worst, float(np.max(np.abs(err))))
    report(4, worst < 1e-12, f"verbatim sign convention closes the algebra, max entry error {worst:.2e}")


def test_criterion_05_parent_consistency(report):
    thetas = np.linspace(0, math.pi, 20)
    phis = np.linspace(0, 2 * math.pi, 40, endpoint=False)
    details, ok = [], True
    for N, eta, l_max in [(5.0, 0.5, 40), (10.0, 0.9, 50)]:
        packet = wp.parent_coefficients(N, eta, l_max=l_max)
        err = float(np.max(np.abs(wp.evaluate_grid(packet, thetas, phis) - wp.parent_amplitude(N, eta, thetas[:, None], phis[None, :]))))
        norm_err = abs(float(np.sum(np.abs(packet.coeffs) ** 2)) - 1)
        ok &= err < 1e-8 and norm_err < 1e-10
        details.append(f"(N={N:g}, eta={eta}): pointwise {err:.1e}, norm {norm_err:.1e}")
    report(5, ok, "; ".join(details))


def test_criterion_06_mean_lz(report):
    worst = 0.0
    for N in (1.0, 5.0, 20.0):
        for eta in (0.2, 0.5, 1.0):
            lz = wp.parent_coefficients(N, eta).moments().mean_Lz.real
            worst = max(worst, abs(lz - eta * (N / math.tanh(2 * N) - 0.5)))
    lz20 = wp.parent_coefficients(20.0, 0.5).moments().mean_Lz.real
    report(6, worst < 1e-8 and abs(lz20 - 9.75) < 1e-6, f"max error {worst:.2e}; N=20, eta=0.5 gives {lz20:.10f}")


def test_criterion_07_ladder_family(report):
    start = time.perf_counter()
    parent = wp.parent_coefficients(20.0, 0.5, l_max=80)
    packet = wp.raise_family(parent, 10)
    elapsed = time.perf_counter() - start
    low = float(packet.shell_weights()[:10].sum())
    resid = wp.annihilator_residual(packet)
    r = packet.moments()
    defect = abs(r.product - r.robertson_bound) / r.robertson_bound
    ok = low < 1e-14 and resid < 1e-7 and defect < 1e-7 and elapsed < 60
    report(7, ok, f"l<10 weight {low:.1e}, eigen residual {resid:.1e}, uncertainty defect {defect:.1e}, {elapsed:.2f}s at l_max=80")


def test_criterion_08_nilpotency(report):
    rng = np.random.default_rng(8)
    th = rng.uniform(0, math.pi, 100)
    ph = rng.uniform(0, 2 * math.pi, 100)
    worst = 0.0
    for eta in (0.3, 0.5, 0.3 + 0.2j):
        _, plus, _ = ist.su2_generators(1, eta)
        twice = plus @ plus @ cartesian_to_y1(wp.exponent_vector(eta))
        worst = max(worst, float(np.max(np.abs(twice @ y1_values(th, ph)))))
    report(8, worst < 1e-10, f"max |L+^2 v| = {worst:.1e} at 100 points")


def test_criterion_09_full_revival(report):
    packet = wp.parent_coefficients(20.0, 0.5)
    clock = dy.EvolutionClock()
    a = abs(dy.autocorrelation(packet, clock.t_rev, clock) - 1)
    c = float(np.max(np.abs(dy.evolve(packet, clock.t_rev, clock).coeffs - packet.coeffs)))
    report(9, a < 1e-12 and c < 1e-12, f"|A(T)-1| = {a:.1e}, max coefficient change {c:.1e}, T = {clock.t_rev:.6f}")


def test_criterion_10_five_clones(report):
    start = time.perf_counter()
    details, ok = [], True
    for k in (0, 10, 20):
        packet = wp.family_member(20.0, 0.5, k)
        rep = dy.fractional_snapshot(packet, 1, 10)
        radius = dy.lump_radius(wp.density_grid(packet))
        ok &= rep.lump_count == 5 and rep.min_separation > 2 * radius
        details.append(f"k={k}: {rep.lump_count} lumps, sep {rep.min_separation:.3f} vs 2r {2 * radius:.3f}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 120
    report(10, ok, "; ".join(details) + f"; {elapsed:.2f}s")


def test_criterion_11_clone_count_law(report):
    packet = wp.parent_coefficients(20.0, 0.5)
    rows = []
    for m, n in dy.coprime_fractions(7):
        rep = dy.fractional_snapshot(packet, m, n)
        rows.append((m, n, rep.expected, rep.lump_count))
    bad = [r for r in rows if r[2] != r[3]]
    report(11, not bad, f"{len(rows)} fractions checked, mismatches {bad}")


def test_criterion_12_radcliffe_direction(report):
    l = 5
    worst_vec = worst_ann = 0.0
    for t0, p0 in [(math.pi / 3, math.pi / 6), (math.pi / 2, math.pi / 4)]:
        eta = ist.radcliffe_eta(t0, p0)
        top = ist.solve_intelligent(l, eta)[-1]
        r = ist.expectations(top)
        want = l * np.array([math.sin(t0) * math.cos(p0), math.sin(t0) * math.sin(p0), math.cos(t0)])
        got = np.array([r.mean_Lx.real, r.mean_Ly.real, r.mean_Lz.real])
        worst_vec = max(worst_vec, float(np.max(np.abs(got - want))))
        u, v, _ = ist.radcliffe_frame(t0, p0)
        worst_ann = max(worst_ann, float(np.linalg.norm(ist.directional_operator(l, u + 1j * v) @ top.coeffs)))
    report(12, worst_vec < 1e-8 and worst_ann < 1e-8, f"vector error {worst_vec:.1e}, frame annihilation {worst_ann:.1e}")


def test_criterion_13_covariance_variant(report):
    eta = 0.5 * cmath.exp(1j * math.pi / 6)
    variants = {
        "halved <{Lx,Ly}>/2 - <Lx><Ly>": lambda r: 2.0 * r.covariance,
        "unhalved <{Lx,Ly}> - <Lx><Ly>": lambda r: r.covariance_unhalved,
    }
    worst = {}
    for name, term in variants.items():
        errs = []
        for l in (1, 2):
            for s in ist.solve_intelligent(l, eta):
                r = ist.expectations(s)
                errs.append(abs(r.product - 0.25 * (r.mean_Lz.real ** 2 + term(r) ** 2)))
        worst[name] = max(errs)
    passing = [name for name, e in worst.items() if e < 1e-9]
    detail = f"passing variant: {passing}; worst errors " + ", ".join(f"{n}: {e:.1e}" for n, e in worst.items())
    report(13, len(passing) == 1, detail)
