"""Mean-field energy surface, stationary branches, and phase classification.

In the thermodynamic limit the atomic levels 2 and 3 and the two modes
acquire coherent amplitudes psi2, psi3 (real, per atom) and phi_a,
phi_b (real, per sqrt(atom)).  Minimizing over the mode amplitudes
first gives the elimination relations

    phi_a = -2*g1*psi1*psi3/omega_a,   phi_b = -2*g2*psi1*psi2/omega_b,

with psi1 = sqrt(1 - psi2^2 - psi3^2) >= 0 (gauge choice), and leaves
the scaled ground-state energy per atom over the unit disc:

    E(psi2, psi3) = omega21*psi2^2 + omega31*psi3^2
                    - (4*g1^2/omega_a) * psi1^2 * psi3^2
                    - (4*g2^2/omega_b) * psi1^2 * psi2^2.

Its stationary points fall into four families: the normal state
(psi2 = psi3 = 0), one-branch condensates (left: psi3 != 0, right:
psi2 != 0), a fully mixed family that exists only on the degenerate
line alpha = beta with omega21 = omega31 (where the energy has a
continuous valley psi2^2 + psi3^2 = const), and a generic mixed
stationary point off that line which is never a minimum and is kept
for diagnostics only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError
from .model import (
    ModelParams,
    PhaseLabel,
    alpha_beta,
    critical_g1,
    critical_g2,
    mu_left,
    mu_right,
    renormalized_critical_g1,
    renormalized_critical_g2,
)

__all__ = [
    "MeanFieldSolution",
    "energy",
    "gradient",
    "stationarity_brackets",
    "on_degenerate_line",
    "stationary_branches",
    "classify",
    "brute_force_minimize",
]

# Tolerance for sitting on the degenerate line alpha = beta (relative).
DEGENERATE_LINE_RTOL = 1e-9
# Exact-tie tolerance between left and right condensate energies.
ENERGY_TIE_TOL = 1e-12
# Squared-amplitude threshold below which the oracle calls a component zero.
_ORACLE_AMP_SQ_TOL = 1e-5

_DEGENERACY = {
    PhaseLabel.NORMAL: 1,
    PhaseLabel.LEFT_SR: 2,
    PhaseLabel.RIGHT_SR: 2,
    PhaseLabel.LEFT_RIGHT_SR: 4,
}


@dataclass(frozen=True)
class MeanFieldSolution:
    """One stationary point of the mean-field energy surface.

    ``degeneracy`` counts the sign-related copies of the solution
    (1, 2, or 4).  ``bistable`` flags points where both one-branch
    condensates exist and are locally stable, so the reported label is
    selected by a (possibly tiny) energy difference.  ``physical`` is
    False only for the generic mixed stationary point, which is never a
    minimum.  ``degenerate_valley`` marks the fully degenerate line,
    where a continuous valley of minima connects the reported solution
    to every other weight split between the two branches.
    """

    psi1: float
    psi2: float
    psi3: float
    phi_a: float
    phi_b: float
    energy: float
    phase: PhaseLabel
    bistable: bool = False
    degeneracy: int = 1
    physical: bool = True
    degenerate_valley: bool = False


def energy(params: ModelParams, psi2, psi3):
    """Scaled ground-state energy per atom at (psi2, psi3).

    Accepts scalars or numpy arrays.  Raises DomainError when
    psi2^2 + psi3^2 exceeds 1 (beyond roundoff).
    """
    psi2 = np.asarray(psi2, dtype=float)
    psi3 = np.asarray(psi3, dtype=float)
    total = psi2 ** 2 + psi3 ** 2
    if np.any(total > 1.0 + 1e-12):
        raise DomainError("psi2^2 + psi3^2 must not exceed 1")
    value = _energy_raw(params, psi2, psi3)
    if value.ndim == 0:
        return float(value)
    return value


def _energy_raw(params: ModelParams, psi2, psi3):
    # No domain check; callers guarantee psi2^2 + psi3^2 <= 1.
    a = 4.0 * params.g1 ** 2 / params.omega_a
    b = 4.0 * params.g2 ** 2 / params.omega_b
    s2 = psi2 ** 2
    s3 = psi3 ** 2
    psi1_sq = 1.0 - s2 - s3
    return (
        params.omega21 * s2
        + params.omega31 * s3
        - a * psi1_sq * s3
        - b * psi1_sq * s2
    )


def stationarity_brackets(params: ModelParams, psi2, psi3):
    """The two bracket factors whose zeros (or psi = 0) give stationarity.

    gradient = (2*psi2*bracket2, 2*psi3*bracket3) with

        bracket2 = omega21 + a*psi3^2 + b*psi2^2 - b*psi1^2
        bracket3 = omega31 + b*psi2^2 + a*psi3^2 - a*psi1^2

    and a = 4*g1^2/omega_a, b = 4*g2^2/omega_b.
    """
    a = 4.0 * params.g1 ** 2 / params.omega_a
    b = 4.0 * params.g2 ** 2 / params.omega_b
    s2 = np.asarray(psi2, dtype=float) ** 2
    s3 = np.asarray(psi3, dtype=float) ** 2
    psi1_sq = 1.0 - s2 - s3
    bracket2 = params.omega21 + a * s3 + b * s2 - b * psi1_sq
    bracket3 = params.omega31 + b * s2 + a * s3 - a * psi1_sq
    return bracket2, bracket3


def gradient(params: ModelParams, psi2, psi3):
    """Analytic gradient of :func:`energy` with respect to (psi2, psi3)."""
    bracket2, bracket3 = stationarity_brackets(params, psi2, psi3)
    g2c = 2.0 * np.asarray(psi2, dtype=float) * bracket2
    g3c = 2.0 * np.asarray(psi3, dtype=float) * bracket3
    if g2c.ndim == 0:
        return float(g2c), float(g3c)
    return g2c, g3c


def _elimination_phi(params: ModelParams, psi1: float, psi2: float, psi3: float):
    phi_a = -2.0 * params.g1 * psi1 * psi3 / params.omega_a
    phi_b = -2.0 * params.g2 * psi1 * psi2 / params.omega_b
    return phi_a, phi_b


def _solution(params, psi2, psi3, phase, *, energy_value=None, degeneracy=None,
              physical=True, bistable=False, degenerate_valley=False):
    psi1 = math.sqrt(max(0.0, 1.0 - psi2 ** 2 - psi3 ** 2))
    phi_a, phi_b = _elimination_phi(params, psi1, psi2, psi3)
    if energy_value is None:
        energy_value = energy(params, psi2, psi3)
    return MeanFieldSolution(
        psi1=psi1,
        psi2=float(psi2),
        psi3=float(psi3),
        phi_a=phi_a,
        phi_b=phi_b,
        energy=float(energy_value),
        phase=phase,
        bistable=bistable,
        degeneracy=degeneracy if degeneracy is not None else _DEGENERACY[phase],
        physical=physical,
        degenerate_valley=degenerate_valley,
    )


def _left_energy(params: ModelParams) -> float:
    mu = mu_left(params)
    return -params.omega31 * (1.0 - mu) ** 2 / (4.0 * mu)


def _right_energy(params: ModelParams) -> float:
    mu = mu_right(params)
    return -params.omega21 * (1.0 - mu) ** 2 / (4.0 * mu)


def _left_solutions(params: ModelParams, signs=(1.0, -1.0)):
    mu = mu_left(params)
    amp = math.sqrt(max(0.0, (1.0 - mu) / 2.0))
    e = _left_energy(params)
    return [
        _solution(params, 0.0, sign * amp, PhaseLabel.LEFT_SR, energy_value=e)
        for sign in signs
    ]


def _right_solutions(params: ModelParams, signs=(1.0, -1.0)):
    mu = mu_right(params)
    amp = math.sqrt(max(0.0, (1.0 - mu) / 2.0))
    e = _right_energy(params)
    return [
        _solution(params, sign * amp, 0.0, PhaseLabel.RIGHT_SR, energy_value=e)
        for sign in signs
    ]


def _balanced_solutions(params: ModelParams, sign_pairs=((1, 1), (1, -1), (-1, 1), (-1, -1)),
                        bistable=False):
    # Symmetric split of the degenerate valley: psi2^2 = psi3^2 = (1-mu)/4.
    mul = mu_left(params)
    mur = mu_right(params)
    amp3 = math.sqrt(max(0.0, 1.0 - mul)) / 2.0
    amp2 = math.sqrt(max(0.0, 1.0 - mur)) / 2.0
    e = _left_energy(params)
    return [
        _solution(
            params, s2 * amp2, s3 * amp3, PhaseLabel.LEFT_RIGHT_SR,
            energy_value=e, bistable=bistable, degenerate_valley=True,
        )
        for s2, s3 in sign_pairs
    ]


def on_degenerate_line(params: ModelParams, rtol: float = DEGENERATE_LINE_RTOL) -> bool:
    """True when alpha = beta and omega21 = omega31 within tolerance.

    Both conditions are needed for the fully mixed stationary family to
    exist; on the line they imply mu_left = mu_right.
    """
    if params.g1 <= 0.0 or params.g2 <= 0.0:
        return False
    alpha, beta = alpha_beta(params)
    if abs(alpha - beta) > rtol * max(alpha, beta):
        return False
    return abs(params.omega21 - params.omega31) <= rtol * max(params.omega21, params.omega31)


def _generic_mixed_squares(params: ModelParams):
    """Squared amplitudes of the generic mixed stationary point (alpha != beta)."""
    alpha, beta = alpha_beta(params)
    denom = (alpha - beta) ** 2
    s2 = (2.0 * alpha * (params.omega21 - beta) - (params.omega31 - alpha) * (alpha + beta)) / denom
    s3 = (2.0 * beta * (params.omega31 - alpha) - (params.omega21 - beta) * (alpha + beta)) / denom
    return s2, s3


def _both_branches_locally_stable(params: ModelParams) -> bool:
    """Both condensates exist and each is strictly stable against the other.

    Left condensate stability against right-branch condensation means
    g2 < renormalized_critical_g2(g1), and mirrored for the right.  The
    same inequalities are the positivity conditions of the mean-field
    Hessian transverse to each condensate.
    """
    if params.g1 < critical_g1(params) or params.g2 < critical_g2(params):
        return False
    if params.g2 >= renormalized_critical_g2(params):
        return False
    if params.g1 >= renormalized_critical_g1(params):
        return False
    return True


def _point_bistable(params: ModelParams) -> bool:
    if on_degenerate_line(params):
        # The degenerate valley is a single connected ground manifold,
        # not a pair of competing local minima.
        return False
    return _both_branches_locally_stable(params)


def stationary_branches(params: ModelParams) -> list[MeanFieldSolution]:
    """Every stationary point of the energy surface at these parameters.

    Sign-related copies are returned as separate entries.  The generic
    mixed point (present only off the degenerate line, and only when
    its squared amplitudes are admissible) is flagged physical=False:
    it is a saddle and never wins the classification.
    """
    bistable = _point_bistable(params)
    out = [_solution(params, 0.0, 0.0, PhaseLabel.NORMAL, energy_value=0.0,
                     bistable=bistable)]
    if params.g1 >= critical_g1(params):
        out.extend(replace(s, bistable=bistable) for s in _left_solutions(params))
    if params.g2 >= critical_g2(params):
        out.extend(replace(s, bistable=bistable) for s in _right_solutions(params))
    degenerate = on_degenerate_line(params)
    if degenerate and mu_left(params) < 1.0:
        out.extend(_balanced_solutions(params, bistable=bistable))
    if not degenerate and params.g1 > 0.0 and params.g2 > 0.0:
        alpha, beta = alpha_beta(params)
        if abs(alpha - beta) > DEGENERATE_LINE_RTOL * max(alpha, beta):
            s2, s3 = _generic_mixed_squares(params)
            if s2 > 1e-12 and s3 > 1e-12 and s2 + s3 <= 1.0 + 1e-12:
                p2 = math.sqrt(s2)
                p3 = math.sqrt(min(s3, 1.0 - s2))
                for sign2 in (1.0, -1.0):
                    for sign3 in (1.0, -1.0):
                        out.append(
                            _solution(params, sign2 * p2, sign3 * p3,
                                      PhaseLabel.LEFT_RIGHT_SR,
                                      degeneracy=4, physical=False,
                                      bistable=bistable)
                        )
    return out


def classify(params: ModelParams) -> MeanFieldSolution:
    """Global minimum of the energy surface, as a canonical representative.

    Returns the positive-sign copy of the winning branch.  On the
    degenerate line with mu < 1 the symmetric mixed split is returned
    (any other valley point has the same energy).  Off the line, an
    exact left/right tie (|dE| <= 1e-12) is resolved toward the larger
    total excitation psi2^2 + psi3^2 and flagged bistable.
    """
    gc1 = critical_g1(params)
    gc2 = critical_g2(params)
    has_left = params.g1 >= gc1
    has_right = params.g2 >= gc2

    if on_degenerate_line(params) and params.g1 > 0.0 and mu_left(params) < 1.0:
        sol = _balanced_solutions(params, sign_pairs=((1, 1),))[0]
        return replace(sol, bistable=False)

    bistable = _point_bistable(params)
    e_left = _left_energy(params) if has_left else math.inf
    e_right = _right_energy(params) if has_right else math.inf

    if has_left and has_right and abs(e_left - e_right) <= ENERGY_TIE_TOL \
            and min(e_left, e_right) < 0.0:
        mul = mu_left(params)
        mur = mu_right(params)
        # Total excitation (1-mu)/2 is larger for the smaller mu.
        winner = "left" if mul < mur else "right"
        bistable = True
    elif e_left < e_right and e_left < 0.0:
        winner = "left"
    elif e_right <= e_left and e_right < 0.0:
        winner = "right"
    else:
        winner = "normal"

    if winner == "left":
        sol = _left_solutions(params, signs=(1.0,))[0]
    elif winner == "right":
        sol = _right_solutions(params, signs=(1.0,))[0]
    else:
        sol = _solution(params, 0.0, 0.0, PhaseLabel.NORMAL, energy_value=0.0)
    return replace(sol, bistable=bistable)


# ---------------------------------------------------------------------------
# Brute-force oracle


def brute_force_minimize(params: ModelParams, resolution: int = 400) -> MeanFieldSolution:
    """Locate the global minimum by dense grid search plus local refinement.

    The (psi2, psi3) unit disc is sampled on a resolution x resolution
    grid; the best cells of several symmetry sectors are then refined
    by a shrinking-window search down to ~1e-10 in position, which
    pins the energy far below the 1e-8 contract.  Independent of the
    closed-form branch logic, so it serves as its oracle.
    """
    if resolution < 100:
        raise ValueError(f"resolution must be >= 100, got {resolution}")
    xs = np.linspace(-1.0, 1.0, resolution)
    p2, p3 = np.meshgrid(xs, xs, indexing="ij")
    inside = p2 ** 2 + p3 ** 2 <= 1.0
    values = np.full(p2.shape, np.inf)
    values[inside] = _energy_raw(params, p2[inside], p3[inside])

    # Refine from the best cell overall, the best cell of each
    # one-branch sector, and the origin, so nearly degenerate wells are
    # all polished and compared.
    starts = [(0.0, 0.0)]
    flat = np.argmin(values)
    starts.append((p2.flat[flat], p3.flat[flat]))
    sector2 = np.where(p2 ** 2 >= p3 ** 2, values, np.inf)
    sector3 = np.where(p3 ** 2 >= p2 ** 2, values, np.inf)
    for sector in (sector2, sector3):
        flat = np.argmin(sector)
        if np.isfinite(sector.flat[flat]):
            starts.append((p2.flat[flat], p3.flat[flat]))

    window = 2.0 * (xs[1] - xs[0])
    best = None
    for start in starts:
        refined = _refine(params, start, window)
        if best is None or refined[0] < best[0]:
            best = refined
    _, b2, b3 = best

    # Canonical signs: the surface is even in each amplitude separately.
    b2, b3 = abs(b2), abs(b3)
    s2, s3 = b2 ** 2, b3 ** 2
    if s2 < _ORACLE_AMP_SQ_TOL and s3 < _ORACLE_AMP_SQ_TOL:
        label = PhaseLabel.NORMAL
        b2 = b3 = 0.0
    elif s3 >= _ORACLE_AMP_SQ_TOL > s2:
        label = PhaseLabel.LEFT_SR
        b2 = 0.0
    elif s2 >= _ORACLE_AMP_SQ_TOL > s3:
        label = PhaseLabel.RIGHT_SR
        b3 = 0.0
    else:
        label = PhaseLabel.LEFT_RIGHT_SR
    return _solution(params, b2, b3, label, bistable=_point_bistable(params))


def _refine(params: ModelParams, start, window, npts: int = 41, shrink: float = 0.25,
            stop: float = 1e-10):
    c2, c3 = start
    best = (float(_energy_raw(params, np.asarray(c2), np.asarray(c3))), c2, c3)
    w = window
    while w > stop:
        g2s = np.linspace(best[1] - w, best[1] + w, npts)
        g3s = np.linspace(best[2] - w, best[2] + w, npts)
        p2, p3 = np.meshgrid(g2s, g3s, indexing="ij")
        inside = p2 ** 2 + p3 ** 2 <= 1.0
        if np.any(inside):
            vals = np.full(p2.shape, np.inf)
            vals[inside] = _energy_raw(params, p2[inside], p3[inside])
            flat = np.argmin(vals)
            if vals.flat[flat] < best[0]:
                best = (float(vals.flat[flat]), float(p2.flat[flat]), float(p3.flat[flat]))
        w *= shrink
    return best
