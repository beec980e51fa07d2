"""Self-contained oracle-agreement and invariant checks.

The same battery backs the `validate` CLI command and the test suite. Each
check returns a CheckResult; the suite passes only if every check does.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import dynamics, protocols
from .dynamics import SystemParams, evolve_critical, spectral_info, steady_state
from .gaussian import GaussianState, mean_photons, thermal_state
from .metrology import (
    HomodyneSetting,
    differentiate_at_zero_shift,
    fi_homodyne,
    qfi,
    qfi_fidelity_oracle,
    qfi_terms,
    snr_photon_counting,
)
from .oracle import lyapunov_rk4
from .protocols import ResourceBudget


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    tolerance: str
    detail: str


# Parameter battery (omega0, epsilon, gamma, n_bath) spanning every dynamical
# regime: below the eigenvalue split, at the exceptional point, in the
# transient window, near/at criticality, and above threshold.
BATTERY: tuple[tuple[float, float, float, float], ...] = (
    (1.0, 0.0, 1.0, 0.0),
    (1.0, 0.5, 1.0, 0.0),
    (1.0, 0.9, 1.0, 0.5),
    (1.0, 0.99, 1.0, 0.0),
    (1.0, 1.0, 1.0, 0.0),
    (1.0, 1.0, 1.0, 1.0),
    (1.0, 1.0000001, 1.0, 0.0),
    (1.0, 1.05, 1.0, 0.0),
    (1.0, 1.2, 1.0, 0.0),
    (1.0, 1.2, 1.0, 1.0),
    (1.0, 1.2, 0.8, 0.3),
    (0.5, 1.0, 2.0, 1.5),
    (1.0, 0.2, 3.0, 0.0),
    (3.0, 3.1, 1.0, 0.5),
    (1.0, 1.4, 1.0, 0.0),
    (1.0, 0.9975 * math.sqrt(2.0), 1.0, 0.0),
    (1.0, math.sqrt(2.0), 1.0, 1.0),
    (1.0, 1.6, 1.0, 0.0),
    (1.0, 1.6, 1.0, 2.0),
    (1.0, 2.0, 0.0, 0.0),
    (1.0, 0.5, 0.0, 0.0),
    (2.0, 1.0, 0.5, 0.0),
)


def battery_params() -> list[SystemParams]:
    return [SystemParams(w, e, g, n_bath=n) for (w, e, g, n) in BATTERY]


def _horizon(params: SystemParams, cap: float = 40.0) -> float:
    """Comparison horizon min(10 / Re(lambda_-), cap / slowest-rate-unit)."""
    lam = spectral_info(params).lambda_minus.real
    scale = max(params.gamma, abs(params.omega), params.epsilon)
    if lam > 1e-9 * scale:
        return min(10.0 / lam, cap / scale)
    return min(8.0 / scale, cap / scale)


def _rel_state_diff(a: GaussianState, b: GaussianState) -> float:
    scale = max(float(np.linalg.norm(b.sigma)), 1.0)
    return max(
        float(np.linalg.norm(a.sigma - b.sigma)), float(np.linalg.norm(a.v - b.v))
    ) / scale


def check_rk4_agreement() -> CheckResult:
    """Analytic propagator vs RK4 Lyapunov over all regimes."""
    worst = 0.0
    worst_at = ""
    for params in battery_params():
        t_max = _horizon(params)
        state0 = thermal_state(params.n_bath)
        for frac in (0.02, 0.2, 1.0):
            t = frac * t_max
            analytic = evolve_critical(params, state0, t)
            numeric = lyapunov_rk4(params, state0, t, verify_step=False)
            diff = _rel_state_diff(analytic, numeric)
            if diff > worst:
                worst, worst_at = diff, f"eps={params.epsilon:g} t={t:.3g}"
        if worst > 1e-6:
            break  # grossly broken; no need to finish the battery
    return CheckResult(
        "dynamics.rk4_agreement",
        worst <= 1e-8,
        "<= 1e-8 relative",
        f"worst {worst:.2e} at {worst_at}",
    )


def check_semigroup() -> CheckResult:
    """evolve(t1 + t2) equals evolve(t2) after evolve(t1)."""
    worst = 0.0
    for params in battery_params():
        t_max = _horizon(params, cap=10.0)
        state0 = thermal_state(params.n_bath)
        for (f1, f2) in ((0.3, 0.5), (0.05, 0.9), (0.45, 0.45)):
            t1, t2 = f1 * t_max, f2 * t_max
            direct = evolve_critical(params, state0, t1 + t2)
            stepped = evolve_critical(params, evolve_critical(params, state0, t1), t2)
            worst = max(worst, _rel_state_diff(stepped, direct))
    return CheckResult(
        "dynamics.semigroup", worst <= 1e-9, "<= 1e-9 relative", f"worst {worst:.2e}"
    )


def check_exceptional_continuity() -> CheckResult:
    """Propagation is continuous through the exceptional point."""
    worst = 0.0
    for gamma in (1.0, 0.5):
        base = SystemParams(1.0, 1.0, gamma, n_bath=0.5)
        state0 = thermal_state(base.n_bath)
        for t in (0.5, 2.0, 8.0):
            mid = evolve_critical(base, state0, t)
            for sign in (-1.0, 1.0):
                near = SystemParams(1.0, 1.0 * (1.0 + sign * 1e-7), gamma, n_bath=0.5)
                off = evolve_critical(near, state0, t)
                scale = max(float(np.linalg.norm(mid.sigma)), 1.0)
                worst = max(worst, float(np.linalg.norm(off.sigma - mid.sigma)) / scale)
    return CheckResult(
        "dynamics.exceptional_continuity",
        worst <= 1e-5,
        "<= 1e-5 relative",
        f"worst {worst:.2e}",
    )


def check_steady_state_residual() -> CheckResult:
    """A Sigma_ss + Sigma_ss A^T + D vanishes."""
    worst = 0.0
    for params in battery_params():
        if params.epsilon >= params.epsilon_c * (1.0 - 1e-9):
            continue
        A, D = dynamics.drift_and_diffusion(params)
        sig = steady_state(params).sigma
        res = A @ sig + sig @ A.T + D
        worst = max(worst, float(np.max(np.abs(res))) / max(float(np.max(np.abs(sig))), 1.0))
    return CheckResult(
        "dynamics.steady_state_residual",
        worst <= 1e-10,
        "<= 1e-10 relative",
        f"worst {worst:.2e}",
    )


def check_photon_monotonicity() -> CheckResult:
    """N(t) grows monotonically inside the transient window (n_bath = 0)."""
    ok = True
    detail = []
    for eps in (1.2, 1.4, 0.9975 * math.sqrt(2.0)):
        params = SystemParams(1.0, eps, 1.0)
        t_max = _horizon(params, cap=60.0)
        grid = np.linspace(0.0, t_max, 1000)
        values = [dynamics.mean_photons_vs_time(params, float(t)) for t in grid]
        drops = sum(1 for a, b in zip(values, values[1:]) if b < a - 1e-12 * max(a, 1.0))
        if drops:
            ok = False
            detail.append(f"eps={eps:g}: {drops} drops")
    return CheckResult(
        "dynamics.photon_monotonicity",
        ok,
        "non-decreasing on 1000-point grid",
        "; ".join(detail) or "monotone for all transient drives",
    )


def check_physicality() -> CheckResult:
    """Evolved covariances satisfy the uncertainty relation."""
    worst = 0.0
    for params in battery_params():
        state0 = thermal_state(params.n_bath)
        t_max = _horizon(params, cap=20.0)
        for frac in (0.01, 0.1, 0.5, 1.0):
            st = evolve_critical(params, state0, frac * t_max)
            scale = max(1.0, float(np.max(np.abs(st.sigma))) ** 2)
            worst = max(worst, (1.0 - st.det_sigma) / scale)
    return CheckResult(
        "dynamics.physicality",
        worst <= 1e-10,
        "det(sigma) >= 1 - 1e-10 (scale-relative)",
        f"worst violation {worst:.2e}",
    )


def _pair_battery():
    """Derivative pairs used by the measurement-bound checks."""
    pairs = []
    for (params, t) in (
        (SystemParams(1.0, 1.2, 1.0), 2.0),
        (SystemParams(1.0, 1.2, 1.0, n_bath=1.0), 1.5),
        (SystemParams(1.0, 1.4, 1.0), 8.0),
        (SystemParams(1.0, 0.9, 1.0), 3.0),
    ):
        pairs.append(("cqs", protocols.cqs_pair(params, t)))
        pairs.append(("cqs_steady", protocols.cqs_steady_pair(params)))
    pqs = SystemParams(1.0, 0.0, 1.0)
    from .gaussian import DisplacementAmplitude, SqueezeParam

    for (a, r, t) in ((2.0, 1.0, 0.5), (0.0, 2.0, 0.8), (1.0, 0.5, 1.5)):
        pairs.append(
            ("pqs", protocols.pqs_pair(DisplacementAmplitude(a), SqueezeParam(r), pqs, t))
        )
    return pairs


def check_measurement_bounds() -> CheckResult:
    """Homodyne FI and photon-counting SNR never exceed the QFI."""
    worst = 0.0
    for label, pair in _pair_battery():
        info = qfi(pair)
        for psi in np.linspace(0.0, math.pi, 64, endpoint=False):
            ratio = fi_homodyne(pair, HomodyneSetting(float(psi))) / info
            worst = max(worst, ratio)
        if float(np.linalg.norm(pair.state.v)) < 1e-12:
            worst = max(worst, snr_photon_counting(pair) / info)
    return CheckResult(
        "metrology.measurement_bounds",
        worst <= 1.0 + 1e-6,
        "FI, SNR <= QFI (1 + 1e-6)",
        f"max ratio {worst:.9f}",
    )


def check_qfi_fidelity_agreement() -> CheckResult:
    """QFI formula vs closed-form fidelity quotient."""
    worst = 0.0
    cases: list[tuple[str, Callable[[float], GaussianState]]] = []
    for (params, t) in ((SystemParams(1.0, 1.2, 1.0), 2.0), (SystemParams(1.0, 1.4, 1.0), 6.0)):
        start = thermal_state(params.n_bath)
        cases.append(
            (f"cqs eps={params.epsilon:g}", lambda d, p=params, s=start, tt=t: evolve_critical(p.with_shift(d), s, tt))
        )
    from .gaussian import DisplacementAmplitude, SqueezeParam

    pqs = SystemParams(1.0, 0.0, 1.0)
    start = protocols.pqs_input_state(DisplacementAmplitude(2.0), SqueezeParam(1.0))
    cases.append(("pqs", lambda d: dynamics.evolve_passive(pqs.with_shift(d), start, 0.7)))
    for label, family in cases:
        reference = qfi(differentiate_at_zero_shift(family))
        estimate = qfi_fidelity_oracle(family, 1e-4)
        worst = max(worst, abs(estimate - reference) / reference)
    return CheckResult(
        "metrology.qfi_fidelity_agreement",
        worst <= 1e-4,
        "<= 1e-4 relative",
        f"worst {worst:.2e}",
    )


def check_qfi_symplectic_invariance() -> CheckResult:
    """QFI is unchanged by a fixed symplectic congruence of state and derivative."""
    from .gaussian import SqueezeParam, rotation_matrix, squeeze_matrix
    from .metrology import DerivativePair

    rng_angles = (0.3, 1.1)
    worst = 0.0
    for _, pair in _pair_battery()[:6]:
        base = qfi(pair)
        for th in rng_angles:
            S = rotation_matrix(th) @ squeeze_matrix(SqueezeParam(0.6)) @ rotation_matrix(-0.2)
            moved = DerivativePair(
                GaussianState(S @ pair.state.v, S @ pair.state.sigma @ S.T),
                S @ pair.dv,
                S @ pair.dsigma @ S.T,
            )
            worst = max(worst, abs(qfi(moved) - base) / base)
    return CheckResult(
        "metrology.symplectic_invariance",
        worst <= 1e-9,
        "<= 1e-9 relative",
        f"worst {worst:.2e}",
    )


def check_fd_convergence() -> CheckResult:
    """Richardson error estimate shrinks at least 4x when the step halves."""
    params = SystemParams(1.0, 1.2, 1.0)
    start = thermal_state(0.0)

    def family(d: float) -> GaussianState:
        return evolve_critical(params.with_shift(d), start, 2.0)

    e1 = differentiate_at_zero_shift(family, h=1e-3).error_estimate
    e2 = differentiate_at_zero_shift(family, h=5e-4).error_estimate
    ratio = e1 / e2 if e2 > 0 else math.inf
    # The ratio is 4 up to O(h^2) contamination from higher-order terms.
    return CheckResult(
        "metrology.fd_convergence",
        ratio >= 4.0 * (1.0 - 1e-3),
        "error estimate ratio >= 4 per halving (1e-3 slack)",
        f"ratio {ratio:.6f}",
    )


def check_bound_gate() -> CheckResult:
    """Every protocol report respects the dissipative precision bound."""
    from .gaussian import DisplacementAmplitude, SqueezeParam

    reports = []
    p0 = SystemParams(1.0, 0.0, 1.0)
    eps = protocols.epsilon_opt(100.0, p0)
    cqs = protocols.ProtocolSpec(
        protocols.ProtocolKind.CQS,
        SystemParams(1.0, eps, 1.0),
        ResourceBudget(n_max=100.0, total_time=10.0, t_pm=0.0),
    )
    for t in (1.0, 50.0, 400.0):
        reports.append(protocols.total_qfi(cqs, t))
    pqs = protocols.ProtocolSpec(
        protocols.ProtocolKind.PQS, p0, ResourceBudget(n_max=100.0, total_time=10.0, t_pm=0.0)
    )
    for t in (0.1, 0.8, 2.0):
        reports.append(protocols.total_qfi(pqs, t))
    worst = max(r.total_qfi / r.bound_value for r in reports)
    return CheckResult(
        "protocols.bound_gate",
        worst <= 1.0 + 1e-6,
        "total QFI <= bound (1 + 1e-6)",
        f"max ratio {worst:.6f}",
    )


def check_cqs_qfi_monotone() -> CheckResult:
    """Transient CQS QFI grows toward the steady state."""
    params = SystemParams(1.0, 1.4, 1.0)
    lam = spectral_info(params).lambda_minus.real
    grid = np.linspace(0.5, 10.0 / lam, 40)
    values = [protocols.cqs_qfi(params, float(t)) for t in grid]
    drops = sum(1 for a, b in zip(values, values[1:]) if b < a * (1.0 - 1e-9))
    return CheckResult(
        "protocols.cqs_qfi_monotone",
        drops == 0,
        "non-decreasing over the transient",
        f"{drops} drops over 40 samples",
    )


def check_omega0_optimality() -> CheckResult:
    """The steady-state QFI rate coefficient peaks at omega0 = gamma."""
    gamma = 1.0
    z = 0.995  # fixed (epsilon/epsilon_c)^2

    def coeff(w0: float) -> float:
        eps_c_sq = w0 * w0 + gamma * gamma
        eps_sq = z * eps_c_sq
        return w0 * w0 / ((2.0 * eps_c_sq - eps_sq) * eps_sq)

    grid = np.geomspace(0.25, 4.0, 41)
    values = [coeff(float(w)) for w in grid]
    best = grid[int(np.argmax(values))]
    ok = abs(best - 1.0) <= 0.12 and coeff(1.0) >= max(values) * (1.0 - 1e-9)
    return CheckResult(
        "protocols.omega0_optimality",
        ok,
        "argmax omega0 = gamma on [0.25, 4] grid",
        f"grid argmax at omega0 = {best:.3f}",
    )


def check_homodyne_near_optimality() -> CheckResult:
    """Optimized homodyne nearly saturates the steady-state CQS QFI."""
    p0 = SystemParams(1.0, 0.0, 1.0)
    eps = protocols.epsilon_opt(100.0, p0)
    pair = protocols.cqs_steady_pair(SystemParams(1.0, eps, 1.0))
    _, best = protocols.best_homodyne(pair)
    ratio = best / qfi(pair)
    return CheckResult(
        "protocols.homodyne_near_optimality",
        ratio >= 0.95,
        "max_psi FI / QFI >= 0.95",
        f"ratio {ratio:.4f}",
    )


def check_temperature_invariance() -> CheckResult:
    """Steady-state QFI is temperature-invariant while photons scale by 1+2n_B."""
    p0 = SystemParams(1.0, 0.0, 1.0)
    eps = protocols.epsilon_opt(100.0, p0)
    cold = SystemParams(1.0, eps, 1.0)
    hot = SystemParams(1.0, eps, 1.0, n_bath=1.0)
    qfi_ratio = protocols.cqs_qfi_steady(hot) / protocols.cqs_qfi_steady(cold)
    n_ratio = dynamics.steady_state_photons(hot) / dynamics.steady_state_photons(cold)
    ok = 0.9 <= qfi_ratio <= 1.1 and abs(n_ratio / 3.0 - 1.0) <= 0.05
    return CheckResult(
        "protocols.temperature_invariance",
        ok,
        "QFI ratio in [0.9, 1.1]; photon ratio ~ 3 within 5%",
        f"QFI ratio {qfi_ratio:.4f}, photon ratio {n_ratio:.4f}",
    )


def check_beyond_threshold() -> CheckResult:
    """Equal-budget lossless comparison: below threshold beats the quench."""
    n_max, total = 1000.0, 1.0
    w0 = math.sqrt(n_max) / total
    below = SystemParams(w0, w0 * (1.0 - 1e-6), 0.0)
    i_below = protocols.cqs_qfi(below, total)
    u = math.log(4.0 * n_max) / (2.0 * total)
    w0_above = 0.05 * u
    above = SystemParams(w0_above, protocols.beyond_threshold_epsilon(n_max, total, w0_above), 0.0)
    i_above = protocols.beyond_threshold_qfi(above, total)
    ratio = i_below / i_above
    return CheckResult(
        "protocols.beyond_threshold_suboptimal",
        ratio > 1.0,
        "below-threshold QFI exceeds the quench QFI",
        f"ratio {ratio:.2f} (log^2(4N)/9 = {math.log(4*n_max)**2/9:.2f})",
    )


ALL_CHECKS: tuple[Callable[[], CheckResult], ...] = (
    check_rk4_agreement,
    check_semigroup,
    check_exceptional_continuity,
    check_steady_state_residual,
    check_photon_monotonicity,
    check_physicality,
    check_measurement_bounds,
    check_qfi_fidelity_agreement,
    check_qfi_symplectic_invariance,
    check_fd_convergence,
    check_bound_gate,
    check_cqs_qfi_monotone,
    check_omega0_optimality,
    check_homodyne_near_optimality,
    check_temperature_invariance,
    check_beyond_threshold,
)


def run_checks(pattern: str | None = None) -> list[CheckResult]:
    """Run all checks whose name contains `pattern` (all if None)."""
    results = []
    for check in ALL_CHECKS:
        name = check.__name__.replace("check_", "")
        if pattern and pattern not in name and pattern not in check.__name__:
            continue
        results.append(check())
    return results
