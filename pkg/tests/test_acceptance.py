"""Exit criteria of the build, one test per criterion.

Each test prints a single ``CRITERION n PASS|FAIL: ...`` line (also collected in
the terminal summary) and then asserts. Tolerances are the stated ones.
Run standalone with ``python3 tests/test_acceptance.py``.
"""

import math
import sys
import tempfile
import warnings
from pathlib import Path

import numpy as np
import pytest
from scipy import integrate

from torireform.chaos import lyapunov_max, lyapunov_two_trajectory, regime_thresholds
from torireform.cli import main as cli_main
from torireform.duality import check_trajectory_duality
from torireform.elliptic import complete_K, jacobi_am_unwrapped, jacobi_sncndn
from torireform.lindstedt import (PendulumOrbitConstants, composite_accuracy,
                                  leading_order_residual, loglog_slope)
from torireform.symplectic import (Order, StepperConfig, integrate_array, self_convergence_ratio,
                                   step)
from torireform.sweep import RunConfig, run_sweep
from torireform.system import DualParams, OscillatorParams, PhaseState

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # standalone run
    ACCEPTANCE_LINES = []

pytestmark = pytest.mark.acceptance


def report(n, ok, detail):
    line = f"CRITERION {n} {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line, flush=True)
    return ok


def test_criterion_1_regime_sequence():
    cfg = RunConfig(omega0=1.0, omega=2.0, epsilon_grid=[0.5, 10.0, 150.0, 500.0],
                    stepper=StepperConfig(1e-3), horizon=2000.0, renorm_interval=1.0)
    frac = {row.epsilon: row.fraction_chaotic for row in run_sweep(cfg).rows}
    checks = {
        0.5: frac[0.5] == 0.0,
        10.0: frac[10.0] >= 0.5,
        150.0: 0.0 < frac[150.0] <= 0.5,
        500.0: frac[500.0] <= 0.1,
    }
    detail = ", ".join(f"eps={e:g}: {frac[e]:.4f} ({'ok' if ok else 'out of band'})"
                       for e, ok in checks.items())
    assert report(1, all(checks.values()), f"fraction_chaotic {detail}")


def test_criterion_2_duality_equivalence():
    params = OscillatorParams(1.0, 2.0, 10.0)
    s0 = PhaseState(0.1, 0.0)
    dev = {lam: check_trajectory_duality(params, lam, s0, 50.0, StepperConfig(1e-3)) for lam in (1.0, 4.0, 25.0)}
    half = {lam: check_trajectory_duality(params, lam, s0, 50.0, StepperConfig(5e-4)) for lam in (4.0, 25.0)}
    below = all(d < 1e-4 for d in dev.values())
    exact = dev[1.0] < 1e-12
    ratios = {lam: dev[lam] / half[lam] if half[lam] > 0 else math.inf for lam in half}
    shrink = all(3.5 <= r <= 4.5 for r in ratios.values())
    detail = (f"deviation {', '.join(f'lambda={l:g}: {d:.2e}' for l, d in dev.items())} (<1e-4: {below}); "
              f"lambda=1 < 1e-12: {exact}; dt-halving ratio "
              f"{', '.join(f'lambda={l:g}: {r:.3g}' for l, r in ratios.items())} (~4x: {shrink})")
    assert report(2, below and exact and shrink, detail)


def test_criterion_3_leading_order_residual():
    prm = DualParams(alpha=5.0, omega0=1.0, omega=2.0, lambda_=100.0)
    c = PendulumOrbitConstants.from_A(prm, 1.0)
    r1 = leading_order_residual(prm, c, np.arange(20001) * 1e-3)
    r2 = leading_order_residual(prm, c, np.arange(40001) * 5e-4)
    ok = r1 < 1e-4 and 3.7 <= r1 / r2 <= 4.3
    assert report(3, ok, f"residual(h=1e-3)={r1:.3e} (<1e-4), residual(h=5e-4)={r2:.3e}, ratio={r1 / r2:.3f}")


def test_criterion_4_dual_series_convergence():
    base = DualParams(alpha=5.0, omega0=1.0, omega=2.0, lambda_=25.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        pairs = composite_accuracy(base, [25.0, 100.0, 400.0], 0.2, 8.0, 2.0, StepperConfig(1e-3))
    errors = [e for _, e in pairs]
    slope = loglog_slope(pairs)
    ok = errors[0] > errors[1] > errors[2] and slope <= -1.5
    assert report(4, ok, f"errors {', '.join(f'{e:.3e}' for e in errors)}, log-log slope {slope:.3f} (<= -1.5)")


def _ode_sncndn(u, k):
    def rhs(_, y):
        return [y[1] * y[2], -y[0] * y[2], -k * k * y[0] * y[1]]
    return integrate.solve_ivp(rhs, (0, u), [0.0, 1.0, 1.0], method="DOP853", rtol=1e-13, atol=1e-14).y[:, -1]


def test_criterion_5_special_functions():
    rng = np.random.default_rng(2024)
    u = rng.uniform(-100, 100, 10_000)
    k = rng.uniform(0, 0.999, 10_000)
    trip = np.array([jacobi_sncndn(ui, ki) for ui, ki in zip(u, k)])
    sn, cn, dn = trip.T
    id1 = np.max(np.abs(sn ** 2 + cn ** 2 - 1))
    id2 = np.max(np.abs(dn ** 2 + k ** 2 * sn ** 2 - 1))
    k0 = abs(complete_K(0.0) - math.pi / 2)
    ode = max(np.max(np.abs(np.array(jacobi_sncndn(uu, kk)) - _ode_sncndn(uu, kk)))
              for uu, kk in ((0.7, 0.6), (2.3, 0.3), (5.0, 0.9)))
    qp = max(abs(jacobi_am_unwrapped(ui + 2 * complete_K(ki), ki) - jacobi_am_unwrapped(ui, ki) - math.pi)
             for ui, ki in zip(u[:2000], k[:2000]))
    ok = id1 < 1e-12 and id2 < 1e-12 and k0 < 1e-15 and ode < 1e-10 and qp < 1e-10
    assert report(5, ok, f"sn2+cn2 {id1:.1e}, dn2+k2sn2 {id2:.1e}, |K(0)-pi/2| {k0:.1e}, "
                         f"ODE oracle {ode:.1e}, am quasi-period {qp:.1e}")


def test_criterion_6_integrator():
    driven = OscillatorParams(1.0, 2.0, 10.0)
    s0 = PhaseState(0.1, 0.0)
    r2 = self_convergence_ratio(driven, s0, 10.0, 0.01, Order.STRANG2)
    r4 = self_convergence_ratio(driven, s0, 10.0, 0.01, Order.YOSHIDA4)
    harmonic = OscillatorParams(1.0, 2.0, 0.0)
    dt = 1e-3
    drifts = {}
    for order in Order:
        traj = integrate_array(harmonic, PhaseState(1.0, 0.0), 1000.0, StepperConfig(dt, order))
        energy = 0.5 * traj[:, 1] ** 2 + 0.5 * traj[:, 2] ** 2
        n = int(round(2 * math.pi / dt))
        # secular drift: change of the period-averaged energy between first and last period
        drifts[order] = (abs(energy[-n:].mean() - energy[:n].mean()), np.max(np.abs(energy - 0.5)))
    rev = 0.0
    for order in Order:
        for q, p, t in ((0.1, 0.0, 0.0), (2.5, -7.0, 3.3), (-1.0, 20.0, 41.0)):
            back = step(driven, step(driven, PhaseState(q, p, t), dt, order), -dt, order)
            rev = max(rev, abs(back.q - q), abs(back.p - p))
    drift_ok = all(d < 1e-8 for d, _ in drifts.values())
    ok = 3.7 <= r2 <= 4.3 and 14 <= r4 <= 18 and drift_ok and rev < 1e-12
    s, y = drifts[Order.STRANG2], drifts[Order.YOSHIDA4]
    assert report(6, ok, f"ratio order2 {r2:.3f} [3.7,4.3], order4 {r4:.3f} [14,18]; energy drift over t=1000 "
                         f"order2 {s[0]:.1e} (bounded oscillation {s[1]:.1e}), order4 {y[0]:.1e} "
                         f"(max dev {y[1]:.1e}); reversibility {rev:.1e}")


def test_criterion_7_lyapunov():
    cfg = StepperConfig(1e-3)
    T = 2000.0
    zero = lyapunov_max(OscillatorParams(1.0, 2.0, 0.0), PhaseState(0.1, 0.0), T, 1.0, cfg)
    chaotic = OscillatorParams(1.0, 2.0, 10.0)
    tangent = lyapunov_max(chaotic, PhaseState(0.1, 0.0), T, 1.0, cfg)
    shadow = lyapunov_two_trajectory(chaotic, PhaseState(0.1, 0.0), T, 1.0, cfg, delta=1e-9)
    theta_r = regime_thresholds(T)[0]
    rel = abs(tangent.exponent - shadow.exponent) / abs(shadow.exponent)
    ok = abs(zero.exponent) < theta_r and rel <= 0.2
    assert report(7, ok, f"eps=0 exponent {zero.exponent:.2e} (|.|<{theta_r:.4f}); eps=10 tangent "
                         f"{tangent.exponent:.5f} vs two-trajectory {shadow.exponent:.5f}, rel diff {rel:.2%}")


def test_criterion_8_determinism(tmp_path=None):
    import json
    root = Path(tmp_path or tempfile.mkdtemp())
    config = root / "cfg.json"
    config.write_text(json.dumps({"epsilon_grid": [0.5, 10.0], "horizon": 200.0, "n_periods": 50,
                                  "seed": 42, "jitter": 1e-6, "workers": 2}))
    outputs = []
    for name in ("run1", "run2"):
        assert cli_main(["sweep", "--config", str(config), "--output-dir", str(root / name)]) == 0
        outputs.append({p.name: p.read_bytes() for p in sorted((root / name).iterdir())})
    same = outputs[0] == outputs[1]
    assert report(8, same, f"{len(outputs[0])} files, byte-identical: {same}")


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
