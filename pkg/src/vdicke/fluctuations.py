"""Quadratic fluctuation forms and their Bogoliubov eigenfrequencies.

Fluctuations about any mean-field branch split into independent
two-mode blocks of the form

    h = w1 * c'c + w2 * d'd + lam * (c' + c)(d' + d),

whose excitation energies follow in closed form,

    eps_pm^2 = ( w1^2 + w2^2 +- sqrt((w1^2 - w2^2)^2 + 16 lam^2 w1 w2) ) / 2.

The lower branch crosses zero at lam_c = sqrt(w1*w2)/2; beyond that the
squared frequency goes negative and the block is dynamically unstable.
Every diagonalization is cross-checked against a numerically independent
route: the eigenvalues of the 4x4 symplectic dynamical matrix in the
quadrature representation.

About the normal state the two blocks carry the bare frequencies and
couplings of the two branches.  About a one-branch condensate the other
branch's block keeps its mode frequency but acquires a shifted
transition frequency and a dressed coupling; its zero mode reproduces
the renormalized critical coupling of :mod:`vdicke.model`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BracketError, DomainError
from .model import ModelParams, critical_g1, critical_g2, mu_left, mu_right

__all__ = [
    "QuadraticBosonForm",
    "FluctuationSpectrum",
    "diagonalize",
    "normal_phase_forms",
    "right_branch_form",
    "left_branch_form",
    "critical_coupling_by_zero_mode",
]

# Agreement required between the closed form and the symplectic route.
_CROSS_CHECK_TOL = 1e-10


@dataclass(frozen=True)
class QuadraticBosonForm:
    """Two bosonic modes with a position-position bilinear coupling."""

    freq1: float
    freq2: float
    coupling: float

    def __post_init__(self):
        if self.freq1 <= 0.0 or self.freq2 <= 0.0:
            raise ValueError("mode frequencies of a quadratic form must be positive")


@dataclass(frozen=True)
class FluctuationSpectrum:
    """Eigenfrequencies of one quadratic form.

    ``eps_minus_sq`` keeps the raw squared lower frequency; it is the
    quantity that changes sign at a phase boundary, and it is negative
    exactly when ``stable`` is False (eps_minus is then reported as 0).
    """

    eps_minus: float
    eps_plus: float
    stable: bool
    eps_minus_sq: float


def _closed_form_squares(form: QuadraticBosonForm) -> tuple[float, float]:
    w1sq = form.freq1 ** 2
    w2sq = form.freq2 ** 2
    root = math.sqrt((w1sq - w2sq) ** 2 + 16.0 * form.coupling ** 2 * form.freq1 * form.freq2)
    return 0.5 * (w1sq + w2sq - root), 0.5 * (w1sq + w2sq + root)


def _symplectic_squares(form: QuadraticBosonForm) -> tuple[float, float]:
    # Quadratures z = (x1, x2, p1, p2): the potential block carries the
    # coupling, the kinetic block is diagonal, and the motion is
    # z' = K z with K = [[0, T], [-V, 0]].  Eigenvalues of K come in
    # pairs +-i*eps, so -lambda^2 recovers the squared frequencies
    # whatever their sign.
    w1, w2, lam = form.freq1, form.freq2, form.coupling
    v = np.array([[w1, 2.0 * lam], [2.0 * lam, w2]])
    t = np.diag([w1, w2])
    zeros = np.zeros((2, 2))
    k = np.block([[zeros, t], [-v, zeros]])
    eigenvalues = np.linalg.eigvals(k)
    squares = np.sort(np.real(-eigenvalues ** 2))
    return 0.5 * (squares[0] + squares[1]), 0.5 * (squares[2] + squares[3])


def diagonalize(form: QuadraticBosonForm) -> FluctuationSpectrum:
    """Eigenfrequencies from the closed form, verified symplectically.

    Raises RuntimeError if the two independent routes disagree beyond
    1e-10 (scaled); that would indicate an internal inconsistency, not
    a property of the input.
    """
    lo_sq, hi_sq = _closed_form_squares(form)
    lo_num, hi_num = _symplectic_squares(form)
    scale = max(1.0, abs(hi_sq))
    if abs(lo_sq - lo_num) > _CROSS_CHECK_TOL * scale or abs(hi_sq - hi_num) > _CROSS_CHECK_TOL * scale:
        raise RuntimeError(
            f"closed-form and symplectic eigenfrequencies disagree: "
            f"({lo_sq}, {hi_sq}) vs ({lo_num}, {hi_num})"
        )
    stable = lo_sq >= -1e-12 * scale
    eps_minus = math.sqrt(lo_sq) if lo_sq > 0.0 else 0.0
    return FluctuationSpectrum(
        eps_minus=eps_minus,
        eps_plus=math.sqrt(hi_sq),
        stable=stable,
        eps_minus_sq=lo_sq,
    )


def normal_phase_forms(params: ModelParams) -> tuple[QuadraticBosonForm, QuadraticBosonForm]:
    """Fluctuation blocks about the normal state: (left, right)."""
    left = QuadraticBosonForm(params.omega_a, params.omega31, params.g1)
    right = QuadraticBosonForm(params.omega_b, params.omega21, params.g2)
    return left, right


def right_branch_form(params: ModelParams) -> QuadraticBosonForm:
    """Right-branch block about the left condensate (requires g1 >= critical_g1).

    The transition frequency is shifted up by the condensate's depletion
    of the shared ground level and the coupling is dressed:

        freq2 = omega21 + omega31*(1 - mu_l)/(2*mu_l),
        coupling = g2 * sqrt((1 + mu_l)/2).
    """
    if params.g1 < critical_g1(params):
        raise DomainError(
            f"right_branch_form requires g1 >= {critical_g1(params)!r}; got g1 = {params.g1!r}"
        )
    mu = mu_left(params)
    shifted = params.omega21 + params.omega31 * (1.0 - mu) / (2.0 * mu)
    dressed = params.g2 * math.sqrt((1.0 + mu) / 2.0)
    return QuadraticBosonForm(params.omega_b, shifted, dressed)


def left_branch_form(params: ModelParams) -> QuadraticBosonForm:
    """Left-branch block about the right condensate (mirror of right_branch_form)."""
    if params.g2 < critical_g2(params):
        raise DomainError(
            f"left_branch_form requires g2 >= {critical_g2(params)!r}; got g2 = {params.g2!r}"
        )
    mu = mu_right(params)
    shifted = params.omega31 + params.omega21 * (1.0 - mu) / (2.0 * mu)
    dressed = params.g1 * math.sqrt((1.0 + mu) / 2.0)
    return QuadraticBosonForm(params.omega_a, shifted, dressed)


def critical_coupling_by_zero_mode(form_family, bracket, tol: float = 1e-12) -> float:
    """Bisection root of eps_minus^2(g) = 0 over a coupling bracket.

    ``form_family`` maps a coupling value to a QuadraticBosonForm.  The
    bracket must straddle the sign change; otherwise BracketError.  The
    returned root is accurate to well below 1e-10 absolute.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise BracketError(f"bracket must satisfy lo < hi, got ({lo}, {hi})")
    f_lo = diagonalize(form_family(lo)).eps_minus_sq
    f_hi = diagonalize(form_family(hi)).eps_minus_sq
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo > 0.0) == (f_hi > 0.0):
        raise BracketError(
            f"eps_minus^2 has the same sign at both bracket ends ({f_lo}, {f_hi})"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = diagonalize(form_family(mid)).eps_minus_sq
        if f_mid == 0.0:
            return mid
        if (f_mid > 0.0) == (f_lo > 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
        if hi - lo <= tol:
            break
    return 0.5 * (lo + hi)
