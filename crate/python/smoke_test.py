#!/usr/bin/env python3
"""End-to-end exercise of the `bowley` extension module.

Run from anywhere; the module (bowley.so) is expected next to this file,
and the sample panel is read from the repository's test data.
"""

import math
import os
import sys

HERE = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, HERE)

import bowley

FIXTURE = os.path.join(
    HERE, "..", "crates", "core", "tests", "data", "cobb_douglas_1899_1922.csv"
)


def close(found, reference, tol, what):
    err = abs(found - reference) / max(abs(reference), 1e-300)
    assert err < tol, f"{what}: {found} vs {reference} (rel err {err:.3e})"


def main():
    assert isinstance(bowley.__version__, str) and bowley.__version__

    # Panel ingestion and the CSV round trip.
    with open(FIXTURE) as f:
        text = f.read()
    panel = bowley.Panel.from_csv(text)
    assert len(panel) == 24
    assert panel.origin_year == 1899
    assert panel.times()[0] == 0.0
    again = bowley.Panel.from_csv(panel.to_csv())
    assert again.labor == panel.labor
    assert again.production == panel.production
    print("panel ok:", repr(panel))

    # Exponential fits per series and the elasticities they imply.
    labor, capital, production = bowley.fit_exponential_panel(panel)
    close(labor.b, 0.0254889324592252, 1e-9, "labor rate")
    close(capital.b, 0.0647319590506725, 1e-9, "capital rate")
    close(production.b, 0.0359300951823600, 1e-9, "production rate")
    alpha, beta, kind = bowley.crs_elasticities(
        [0.02549605, 0.06472564, 0.03592651]
    )
    close(alpha, 0.7341175376, 1e-9, "alpha")
    close(beta, 0.2658824627, 1e-9, "beta")
    assert kind == "crs-attainable"
    close(
        bowley.beta_given_alpha([0.02549605, 0.06472564, 0.03592651], 1.0),
        0.16114881212,
        1e-9,
        "beta at alpha=1",
    )
    print(f"exponential fits ok: rates {labor.b:.6f} {capital.b:.6f} {production.b:.6f}")

    # Scale-only surface calibration.
    fit = bowley.fit_cobb_douglas(panel, mode="fixed", alpha=1.0, beta=0.16114881212)
    close(fit.model.scale, 0.4710156, 0.01, "fixed-exponent scale")
    assert fit.converged
    print(f"cobb-douglas scale ok: A = {fit.model.scale:.7f}, RSS = {fit.rss:.2f}")

    # Self-starting logistic recovery on a clean synthetic series.
    b, x0, n = 0.08, 2.0, 180.0
    ts = [float(t) for t in range(70)]
    xs = [n / (1.0 + (n / x0 - 1.0) * math.exp(-b * t)) for t in ts]
    logi = bowley.fit_logistic(ts, xs)
    assert logi.converged
    close(logi.b, b, 1e-6, "logistic rate")
    close(logi.x0, x0, 1e-6, "logistic x0")
    close(logi.n, n, 1e-6, "logistic capacity")
    print(f"logistic recovery ok: {logi!r}")

    # The classic panel has no visible capital plateau; the fit must say so.
    _, capital_logi, _ = bowley.fit_logistic_panel(panel)
    assert capital_logi.near_degenerate
    print(f"plateau-free capital flagged ok: N = {capital_logi.n:.3e}")

    # Flow invariants: orthogonal exponents freeze the product.
    rates = [0.03, 0.07, 0.05]
    start = [2.0, 3.0, 4.0]
    a = [1.0, 1.0, -2.0]  # a . rates = 0
    level0 = bowley.general_invariant_value(start, a, start)
    for t in (5.0, 15.0, 25.0):
        state = [s * math.exp(r * t) for s, r in zip(start, rates)]
        close(
            bowley.general_invariant_value(start, a, state),
            level0,
            1e-10,
            f"invariant at t={t}",
        )
    assert abs(bowley.orthogonality_residual(a, rates)) < 1e-15
    print("exponential invariant ok")

    # Rectifier: psi round trip and the pushforward identity.
    caps = [150.0, 220.0, 300.0]
    point = [30.0, 80.0, 10.0]
    squashed = bowley.psi_forward(caps, point)
    back = bowley.psi_inverse(caps, squashed)
    for p, q in zip(point, back):
        close(q, p, 1e-12, "psi round trip")
    pushed = bowley.pushforward_field(rates, caps, squashed)
    for r, cap, xt, got in zip(rates, caps, squashed, pushed):
        close(got, r * xt * (1.0 - xt / cap), 1e-12, "pushforward")
    print("rectifier ok")

    # Numeric share of a Python-side surface equals its exponent.
    surface = bowley.CobbDouglas(1.01, alpha, beta)
    s_l, s_k = bowley.numeric_wage_share(
        lambda l, k: surface.eval(l, k), 140.0, 260.0
    )
    close(s_l, alpha, 1e-9, "numeric wage share")
    close(s_k, beta, 1e-9, "numeric capital share")
    print(f"numeric shares ok: s_L = {s_l:.9f}, s_K = {s_k:.9f}")

    # Drifting share along logistic flows, with the surface as a cross-check.
    triple = []
    for rb, rx0, rn in ((0.078, 2.1, 176.0), (0.078, 1.6, 230.0), (0.046, 11.3, 211.0)):
        txs = [rn / (1.0 + (rn / rx0 - 1.0) * math.exp(-rb * t)) for t in ts]
        triple.append(bowley.fit_logistic(ts, txs))
    lab, cap, prod = triple
    trajectory = bowley.logistic_share_trajectory(lab, cap, prod, ts)
    assert max(trajectory) / min(trajectory) > 1.01
    lp = bowley.trajectory_surface(lab, cap, prod)
    for t, expected in zip(ts, trajectory):
        close(
            lp.wage_share(lab.eval(t), cap.eval(t)),
            expected,
            1e-10,
            f"share route at t={t}",
        )
    mean, max_dev, rel_range = bowley.share_constancy(trajectory)
    assert rel_range > 0.01
    print(
        f"logistic share drift ok: {min(trajectory):.4f}..{max(trajectory):.4f}, "
        f"relative range {rel_range:.4f}"
    )

    # S-shaped reduction at zero bend is plain Cobb-Douglas.
    for l, k in ((0.7, 0.4), (13.0, 9.0), (155.0, 230.0)):
        flat = bowley.CobbDouglas(0.85, 1.0 - 0.38, 0.38)
        assert bowley.eval_s_shaped(0.85, 0.0, 0.38, k, l) == flat.eval(l, k)
    print("zero-bend reduction ok")

    print("OK")


if __name__ == "__main__":
    main()
