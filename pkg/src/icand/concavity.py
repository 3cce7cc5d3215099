"""Local-concavity verification for the buzzers protocol.

Optimality of the protocol reduces to showing that sending one weak signal
can never lower the total (signal information + expected optimal cost).  In
concealed-information form this becomes the nonnegativity of a window
integral: tilt the measure by an unbiased signal of weakness ``eps`` from
sender ``s``, which shifts the sender's start time by ``-gamma0`` or
``+gamma1``, and integrate the concavity defect of ``phi(x) = x ln x``
applied to the transcript densities of the base and tilted protocols.
Outside the window ``[-gamma0, gamma1]`` (sender's start time at 0) the
defect integrates to a nonnegative left part and an exactly-zero right
tail, so the window carries all the content.

The canonical family reduces the general verification to three parameters:
``k`` players, sender ``s``, and a base mass ``beta``.  Its sender-block
masses satisfy ``mass(e_s) = exp(gamma0) * beta`` with ``gamma0`` itself
depending on that mass, a fixed point solved here by iteration.  The window
deficits of the family obey cubic laws in ``eps`` whose coefficients are
evaluated by :func:`taylor_coefficient`; the deficits themselves are always
computed from exact densities and the cubic laws serve only as predictions
to compare against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .buzzers import BuzzersProtocol, SegmentedDensity, transcript_density
from .errors import (
    AssumptionViolationError,
    InvalidDistributionError,
    MalformedInputError,
    ToleranceError,
)
from .measures import LN2, ZERO_MASS, InputDistribution, InputLabel, _xlogx
from .quadrature import integrate_segments

__all__ = [
    "CanonicalMeasure",
    "Perturbation",
    "ConcavityReport",
    "OutsideWindowChecks",
    "WindowDeficits",
    "gamma0_of",
    "gamma1_of",
    "perturb",
    "perturbed_densities",
    "canonical_window_forms",
    "window_deficits",
    "deficit_external",
    "deficit_internal",
    "taylor_coefficient",
    "outside_window_checks",
    "weakness_budget",
    "merge_tail_players",
    "concavity_report",
    "verify_grid",
    "GridRow",
]

_SAME_AVERAGE_TOL = 1e-11


def gamma0_of(beta_s: float, eps: float) -> float:
    """Left window edge: ln((1 + eps b) / (1 - eps (1-b))) for b = Pr[X_s=1]."""
    if not 0.0 <= eps < 1.0 or 1.0 - eps * (1.0 - beta_s) <= 0.0:
        raise MalformedInputError(f"eps={eps} out of range for beta_s={beta_s}")
    return math.log((1.0 + eps * beta_s) / (1.0 - eps * (1.0 - beta_s)))


def gamma1_of(beta_s: float, eps: float) -> float:
    """Right window edge: ln((1 + eps (1-b)) / (1 - eps b))."""
    if not 0.0 <= eps < 1.0 or 1.0 - eps * beta_s <= 0.0:
        raise MalformedInputError(f"eps={eps} out of range for beta_s={beta_s}")
    return math.log((1.0 + eps * (1.0 - beta_s)) / (1.0 - eps * beta_s))


@dataclass(frozen=True)
class CanonicalMeasure:
    """Three-parameter reduced family: first ``s-1`` basis masses ``beta``,
    remaining ones ``exp(gamma0(eps)) * beta``, rest of the mass on
    all-zeros.  ``gamma0`` is tied to the sender's own mass, so the family
    is implicitly parameterized by the signal weakness ``eps``."""

    k: int
    s: int
    beta: float

    def __post_init__(self):
        if self.k < 2:
            raise MalformedInputError(f"k={self.k} < 2")
        if not 1 <= self.s <= self.k:
            raise MalformedInputError(f"sender {self.s} outside 1..{self.k}")
        if not 0.0 < self.beta < 1.0 / self.k:
            raise InvalidDistributionError(
                f"beta={self.beta} outside (0, 1/k) for k={self.k}"
            )

    def gamma0(self, eps: float) -> float:
        """Fixed point of g = gamma0_of(exp(g) beta, eps)."""
        g = 0.0
        for _ in range(200):
            g_new = gamma0_of(math.exp(g) * self.beta, eps)
            if abs(g_new - g) <= 1e-16 * max(1.0, abs(g_new)):
                return g_new
            g = g_new
        raise MalformedInputError("gamma0 fixed point did not converge")

    def beta_s(self, eps: float) -> float:
        return math.exp(self.gamma0(eps)) * self.beta

    def gamma1(self, eps: float) -> float:
        return gamma1_of(self.beta_s(eps), eps)

    def measure(self, eps: float) -> InputDistribution:
        bs = self.beta_s(eps)
        mass_zeros = 1.0 - (self.s - 1) * self.beta - (self.k - self.s + 1) * bs
        if mass_zeros < -ZERO_MASS:
            raise InvalidDistributionError(
                f"canonical family infeasible: mass(all-zeros) = {mass_zeros:.3e} "
                f"for k={self.k}, s={self.s}, beta={self.beta}, eps={eps}"
            )
        mass = {InputLabel.zeros(self.k): max(mass_zeros, 0.0)}
        for i in range(1, self.k + 1):
            mass[InputLabel.basis(self.k, i)] = self.beta if i < self.s else bs
        return InputDistribution(self.k, mass)

    def sender_times(self, eps: float) -> tuple[float, ...]:
        """Start times shifted so the sender block sits at zero."""
        g0 = self.gamma0(eps)
        return tuple(-g0 if i < self.s else 0.0 for i in range(1, self.k + 1))

    def weakness_budget(self, c: float = 1.0) -> float:
        return weakness_budget(self.k, self.beta, c)


def weakness_budget(k: int, beta: float, c: float = 1.0) -> float:
    """Admissible signal weakness ``c k^-20 min(beta, 1-k beta)^3``.

    The constant is a proof artifact and astronomically small; verification
    sweeps use larger weakness values and monitor the quartic residual
    instead, which is the checkable content of the cubic law.
    """
    return float(c * k**-20 * min(beta, 1.0 - k * beta) ** 3)


@dataclass(frozen=True)
class Perturbation:
    """A sender's unbiased weak signal as a pair of tilted measures.

    Conditioning on the signal multiplies masses by ``1 +/- eps beta_s`` /
    ``1 -/+ eps zeta_s`` (zeros/ones rows of the sender), which moves the
    sender's start time to ``-gamma0`` or ``+gamma1`` while every other
    start time stays put.
    """

    sender: int
    eps: float
    gamma0: float
    gamma1: float
    beta_s: float
    zeta_s: float
    mu: InputDistribution
    mu0: InputDistribution
    mu1: InputDistribution
    base_protocol: BuzzersProtocol
    protocol0: BuzzersProtocol
    protocol1: BuzzersProtocol


def perturb(
    mu: InputDistribution,
    s: int,
    eps: float,
    protocol: BuzzersProtocol | None = None,
) -> Perturbation:
    """Tilt ``mu`` by the weakness-``eps`` unbiased signal of player ``s``.

    ``protocol`` defaults to the measure's own buzzers protocol shifted so
    that player ``s`` starts at time zero.
    """
    if not 1 <= s <= mu.k:
        raise MalformedInputError(f"sender {s} outside 1..{mu.k}")
    beta_s = mu.beta(s)
    zeta_s = 1.0 - beta_s
    g0 = gamma0_of(beta_s, eps)
    g1 = gamma1_of(beta_s, eps)

    def tilt(plus_on_zero: bool) -> InputDistribution:
        mass = {}
        for lab, m in zip(mu.labels, mu.vector):
            if m <= 0.0:
                continue
            if lab.bits[s - 1] == 0:
                factor = 1.0 + eps * beta_s if plus_on_zero else 1.0 - eps * beta_s
            else:
                factor = 1.0 - eps * zeta_s if plus_on_zero else 1.0 + eps * zeta_s
            mass[lab] = m * factor
        return InputDistribution(mu.k, mass)

    if protocol is None:
        base = BuzzersProtocol.from_measure(mu)
        base = base.shifted(-base.player_times[s - 1])
    else:
        base = protocol
    times = list(base.player_times)
    t0 = list(times)
    t0[s - 1] -= g0
    t1 = list(times)
    t1[s - 1] += g1
    return Perturbation(
        sender=s,
        eps=eps,
        gamma0=g0,
        gamma1=g1,
        beta_s=beta_s,
        zeta_s=zeta_s,
        mu=mu,
        mu0=tilt(True),
        mu1=tilt(False),
        base_protocol=base,
        protocol0=BuzzersProtocol(tuple(t0)),
        protocol1=BuzzersProtocol(tuple(t1)),
    )


def perturbed_densities(
    pert: Perturbation,
) -> tuple[SegmentedDensity, SegmentedDensity]:
    """Exact transcript densities of the two tilted protocols, with the
    perturbation window edges inserted as breakpoints."""
    base_t_s = pert.base_protocol.player_times[pert.sender - 1]
    edges = (base_t_s - pert.gamma0, base_t_s, base_t_s + pert.gamma1)
    return (
        transcript_density(pert.mu0, pert.protocol0, extra_breakpoints=edges),
        transcript_density(pert.mu1, pert.protocol1, extra_breakpoints=edges),
    )


# ---------------------------------------------------------------------------
# window integrands
# ---------------------------------------------------------------------------


def _density_tensor(
    times: np.ndarray, bits: np.ndarray, masses: np.ndarray, t: np.ndarray
) -> np.ndarray:
    """V[t, m, x] = mass_x e^{-Phi_x(t)} [x_m = 0] [t >= t_m]."""
    active = np.maximum(t[:, None] - times[None, :], 0.0)
    zeros_mask = (bits == 0).astype(float)
    phi = active @ zeros_mask.T
    v = masses[None, :] * np.exp(-phi)
    started = t[:, None] >= times[None, :]
    return v[:, None, :] * zeros_mask.T[None, :, :] * started[:, :, None]


def _concavity_integrand(pert: Perturbation):
    """Vector integrand [external defect, per-player internal defects].

    Values are in nats; integrals are divided by ln 2 at the reporting
    boundary.
    """
    bits = np.array([lab.bits for lab in pert.mu.labels])
    k = pert.mu.k
    triples = [
        (np.asarray(p.player_times), bits, m.vector)
        for p, m in (
            (pert.base_protocol, pert.mu),
            (pert.protocol0, pert.mu0),
            (pert.protocol1, pert.mu1),
        )
    ]
    class_onehot = np.stack([(bits.T == 0), (bits.T == 1)], axis=1).astype(float)

    def f(ts: np.ndarray) -> np.ndarray:
        V = [_density_tensor(times, b, m, ts) for times, b, m in triples]
        mix = [v.sum(axis=2) for v in V]
        per_x = (
            _xlogx(V[0]) - 0.5 * (_xlogx(V[1]) + _xlogx(V[2]))
        ).sum(axis=(1, 2))
        ext = (
            _xlogx(mix[0]) - 0.5 * (_xlogx(mix[1]) + _xlogx(mix[2]))
        ).sum(axis=1) - per_x
        g = [np.einsum("tmx,ibx->timb", v, class_onehot) for v in V]
        per_j = (
            _xlogx(g[0]) - 0.5 * (_xlogx(g[1]) + _xlogx(g[2]))
        ).sum(axis=(2, 3)) - per_x[:, None]
        return np.concatenate([ext[:, None], per_j], axis=1)

    return f


def _breakpoints_in(pert: Perturbation, lo: float, hi: float) -> list[float]:
    pts = {lo, hi}
    for proto in (pert.base_protocol, pert.protocol0, pert.protocol1):
        for t in proto.player_times:
            if lo < t < hi:
                pts.add(float(t))
    return sorted(pts)


def _window_probability(times, label: InputLabel, lo: float, hi: float) -> float:
    """Pr[buzz time lands in [lo, hi]] for one input: survival difference."""
    zeros = np.array([b == 0 for b in label.bits], dtype=float)
    tt = np.asarray(times)

    def survival(t: float) -> float:
        return float(np.exp(-np.maximum(t - tt, 0.0) @ zeros))

    return survival(lo) - survival(hi)


def check_same_average(pert: Perturbation, tol: float = _SAME_AVERAGE_TOL) -> float:
    """Per-input window mass equals the average of the tilted window masses.

    This identity is what cancels every linear phi-term in the window
    integrals; it is asserted, not assumed.  Returns the worst residual.
    """
    lo = pert.base_protocol.player_times[pert.sender - 1] - pert.gamma0
    hi = pert.base_protocol.player_times[pert.sender - 1] + pert.gamma1
    worst = 0.0
    for lab, m, m0, m1 in zip(
        pert.mu.labels, pert.mu.vector, pert.mu0.vector, pert.mu1.vector
    ):
        lhs = m * _window_probability(pert.base_protocol.player_times, lab, lo, hi)
        rhs = 0.5 * (
            m0 * _window_probability(pert.protocol0.player_times, lab, lo, hi)
            + m1 * _window_probability(pert.protocol1.player_times, lab, lo, hi)
        )
        worst = max(worst, abs(lhs - rhs))
    if worst > tol:
        raise ToleranceError(
            f"window-mass average identity violated by {worst:.3e} (tol {tol})"
        )
    return worst


@dataclass(frozen=True)
class WindowDeficits:
    """Window integrals of the concavity defect, in bits."""

    external: float
    internal: float
    per_player: tuple[float, ...]
    same_average_residual: float
    quadrature_error: float


def window_deficits(
    mu: InputDistribution,
    s: int,
    eps: float,
    *,
    protocol: BuzzersProtocol | None = None,
    rtol: float = 1e-9,
    atol: float = 1e-15,
) -> WindowDeficits:
    """Integrate the external and internal concavity defects over the window.

    ``mu`` must put no mass on the all-ones input (remove it first; the
    protocol does not change).
    """
    if mu.mass_ones > ZERO_MASS:
        raise AssumptionViolationError(
            "window deficits are defined for measures with no all-ones mass; "
            "condition it away first"
        )
    pert = perturb(mu, s, eps, protocol=protocol)
    residual = check_same_average(pert)
    t_s = pert.base_protocol.player_times[s - 1]
    lo, hi = t_s - pert.gamma0, t_s + pert.gamma1
    vals, err = integrate_segments(
        _concavity_integrand(pert),
        _breakpoints_in(pert, lo, hi),
        rtol=rtol,
        atol=atol,
    )
    vals = vals / LN2
    return WindowDeficits(
        external=float(vals[0]),
        internal=float(vals[1:].sum()),
        per_player=tuple(float(v) for v in vals[1:]),
        same_average_residual=residual,
        quadrature_error=float(err / LN2),
    )


def deficit_external(canonical: CanonicalMeasure, eps: float, **kw) -> float:
    """Window deficit of the external condition for the canonical family."""
    return window_deficits(
        canonical.measure(eps),
        canonical.s,
        eps,
        protocol=BuzzersProtocol(canonical.sender_times(eps)),
        **kw,
    ).external


def deficit_internal(canonical: CanonicalMeasure, eps: float, **kw) -> float:
    """Window deficit of the internal condition (summed over players)."""
    return window_deficits(
        canonical.measure(eps),
        canonical.s,
        eps,
        protocol=BuzzersProtocol(canonical.sender_times(eps)),
        **kw,
    ).internal


def taylor_coefficient(k: int, s: int, beta: float, which: str) -> float:
    """Leading cubic-law coefficient: deficit ~ coefficient * eps^3.

    External: (k+5s-6)(1-2 beta) beta / (12 (1-beta) ln 2).  Internal for
    k = 2 equals the external value; for k >= 3 it is
    (k+5s-6)((3k-2) beta^2 - 4(k-1) beta + k-1) beta /
    (12 (1-beta)(1-2 beta) ln 2).
    """
    if k < 2 or not 1 <= s <= k:
        raise MalformedInputError(f"bad (k, s) = ({k}, {s})")
    if not 0.0 < beta < 1.0 / k:
        raise InvalidDistributionError(f"beta={beta} outside (0, 1/k)")
    if which == "ext" or (which == "int" and k == 2):
        return (k + 5 * s - 6) * (1 - 2 * beta) * beta / (12 * (1 - beta) * LN2)
    if which == "int":
        poly = (3 * k - 2) * beta**2 - 4 * (k - 1) * beta + (k - 1)
        return (k + 5 * s - 6) * poly * beta / (12 * (1 - beta) * (1 - 2 * beta) * LN2)
    raise MalformedInputError(f"which must be 'ext' or 'int', got {which!r}")


# ---------------------------------------------------------------------------
# outside-window checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OutsideWindowChecks:
    left_value: float
    left_ok: bool
    right_value: float
    right_ok: bool
    eps2_bound: float | None
    eps2_gap_value: float | None
    eps2_ok: bool | None
    eps2_skip_reason: str | None


def outside_window_checks(
    mu: InputDistribution,
    s: int,
    eps: float,
    *,
    protocol: BuzzersProtocol | None = None,
    right_width: float = 5.0,
    rtol: float = 1e-9,
    atol: float = 1e-15,
) -> OutsideWindowChecks:
    """Sign checks outside the window, plus the quadratic left-gap bound.

    The left part integrates the external defect from the earliest start
    time to ``-gamma0`` (below the earliest start everything is zero) and
    must be nonnegative.  The right tail beyond ``gamma1`` vanishes
    identically.  When the sender has a positive start-time gap ``L`` to
    the previous player and ``gamma0 <= L/2``, the defect on that gap is
    at least ``(1 - e^{-(s-1)L/2}) m(0) m(e_s) eps^2 / (2(s-1))``.
    """
    if mu.mass_ones > ZERO_MASS:
        raise AssumptionViolationError("remove the all-ones mass first")
    pert = perturb(mu, s, eps, protocol=protocol)
    f = _concavity_integrand(pert)
    t_s = pert.base_protocol.player_times[s - 1]
    lo_edge = t_s - pert.gamma0
    hi_edge = t_s + pert.gamma1

    t_min = min(pert.base_protocol.player_times)
    left = 0.0
    if lo_edge > t_min:
        vals, _ = integrate_segments(
            f, _breakpoints_in(pert, t_min, lo_edge), rtol=rtol, atol=atol
        )
        left = float(vals[0] / LN2)
    right_vals, _ = integrate_segments(
        f, _breakpoints_in(pert, hi_edge, hi_edge + right_width), rtol=rtol, atol=atol
    )
    right = float(right_vals[0] / LN2)

    eps2_bound = eps2_gap = eps2_ok = None
    skip = None
    earlier = [t for t in pert.base_protocol.player_times if t < t_s - ZERO_MASS]
    if s < 2 or not earlier:
        skip = "no earlier start time (s = 1 or no gap)"
    else:
        t_prev = max(earlier)
        gap_len = t_s - t_prev
        if pert.gamma0 > gap_len / 2.0:
            skip = f"gamma0 = {pert.gamma0:.3e} exceeds half the gap {gap_len:.3e}"
        else:
            n_before = sum(
                1 for t in pert.base_protocol.player_times if t < t_s - ZERO_MASS
            )
            bound = (
                (1.0 - math.exp(-n_before * gap_len / 2.0))
                * mu.mass_zeros
                * mu.e_mass(s)
                / (2.0 * n_before)
                * eps**2
            )
            vals, _ = integrate_segments(
                f, _breakpoints_in(pert, t_prev, lo_edge), rtol=rtol, atol=atol
            )
            eps2_gap = float(vals[0] / LN2)
            eps2_bound = bound
            eps2_ok = eps2_gap >= bound - 1e-10

    return OutsideWindowChecks(
        left_value=left,
        left_ok=left >= -1e-12,
        right_value=right,
        right_ok=abs(right) <= 1e-12,
        eps2_bound=eps2_bound,
        eps2_gap_value=eps2_gap,
        eps2_ok=eps2_ok,
        eps2_skip_reason=skip,
    )


def merge_tail_players(mu: InputDistribution, keep: int) -> InputDistribution:
    """Fold players ``keep+1 .. k`` into the all-zeros mass.

    Used for the merge-invariance check: when the dropped players' basis
    masses all exceed the kept sender block and the window ends before
    their start times, the external window deficit is unchanged.
    """
    if not 2 <= keep < mu.k:
        raise MalformedInputError(f"keep={keep} outside 2..{mu.k - 1}")
    if mu.mass_ones > ZERO_MASS:
        raise AssumptionViolationError("remove the all-ones mass first")
    mass = {InputLabel.zeros(keep): mu.mass_zeros
            + sum(mu.e_mass(j) for j in range(keep + 1, mu.k + 1))}
    for i in range(1, keep + 1):
        mass[InputLabel.basis(keep, i)] = mu.e_mass(i)
    return InputDistribution(keep, mass)


# ---------------------------------------------------------------------------
# closed-form window densities for the canonical family
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WindowDensityForms:
    """Literal piecewise-exponential mixture densities on the window.

    These are the explicit case tables for the canonical family (base and
    both tilted protocols); they exist to cross-validate the generic
    density machinery, which must agree pointwise to 1e-12.
    """

    k: int
    s: int
    beta: float
    eps: float
    gamma0: float
    gamma1: float

    def _common(self):
        ebeta = math.exp(self.gamma0) * self.beta
        zeta = 1.0 - ebeta
        return ebeta, zeta

    def base(self, m: int, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        k, s, beta = self.k, self.s, self.beta
        ebeta, _ = self._common()
        out = np.zeros_like(t)
        neg = (t >= -self.gamma0) & (t < 0.0)
        pos = (t >= 0.0) & (t <= self.gamma1)
        if m <= s - 1:
            a = (s - 1) * (t[neg] + self.gamma0)
            out[neg] = (1 - (s - 1) * beta + (s - 2) * ebeta * np.exp(t[neg])) * np.exp(-a)
        b = k * t[pos] + (s - 1) * self.gamma0
        out[pos] = (
            1 - (s - 1) * beta - (k - s + 1) * ebeta + (k - 1) * ebeta * np.exp(t[pos])
        ) * np.exp(-b)
        return out

    def tilted0(self, m: int, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        k, s, beta = self.k, self.s, self.beta
        ebeta, zeta = self._common()
        out = np.zeros_like(t)
        neg = (t >= -self.gamma0) & (t < 0.0)
        pos = (t >= 0.0) & (t <= self.gamma1)
        if m <= s:
            a = (s - 1) * (t[neg] + self.gamma0)
            out[neg] = (
                (1 - self.eps * zeta)
                * ((1 - ebeta - (s - 1) * beta) * np.exp(-t[neg]) + (s - 1) * ebeta)
                * np.exp(-a)
            )
        out[pos] = (1 - self.eps * zeta) * self.base(m, t[pos])
        return out

    def tilted1(self, m: int, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        k, s, beta = self.k, self.s, self.beta
        ebeta, zeta = self._common()
        out = np.zeros_like(t)
        if m == self.s:
            return out
        neg = (t >= -self.gamma0) & (t < 0.0)
        pos = (t >= 0.0) & (t <= self.gamma1)
        damp = 1 - self.eps * ebeta
        if m <= s - 1:
            a = (s - 1) * (t[neg] + self.gamma0)
            out[neg] = (
                1
                + ebeta * damp * ((s - 2) * np.exp(t[neg]) - (s - 1) * math.exp(-self.gamma0))
            ) * np.exp(-a)
        b = k * t[pos] + (s - 1) * self.gamma0
        out[pos] = (
            1
            + ebeta
            * damp
            * ((k - 2) * np.exp(t[pos]) - (s - 1) * math.exp(-self.gamma0) - k + s)
        ) * np.exp(t[pos]) * np.exp(-b)
        return out


def canonical_window_forms(canonical: CanonicalMeasure, eps: float) -> WindowDensityForms:
    return WindowDensityForms(
        k=canonical.k,
        s=canonical.s,
        beta=canonical.beta,
        eps=eps,
        gamma0=canonical.gamma0(eps),
        gamma1=canonical.gamma1(eps),
    )


# ---------------------------------------------------------------------------
# reports and grid runs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConcavityReport:
    k: int
    s: int
    beta: float
    eps: float
    window: tuple[float, float]
    ext_deficit: float
    int_deficit: float
    taylor_ext: float
    taylor_int: float
    residual_ext: float
    residual_int: float
    outside: OutsideWindowChecks | None

    def to_json_obj(self) -> dict:
        out = {
            "k": self.k,
            "s": self.s,
            "beta": self.beta,
            "eps": self.eps,
            "window": list(self.window),
            "ext_deficit": self.ext_deficit,
            "int_deficit": self.int_deficit,
            "taylor_ext": self.taylor_ext,
            "taylor_int": self.taylor_int,
            "residual_ext": self.residual_ext,
            "residual_int": self.residual_int,
        }
        if self.outside is not None:
            out["outside"] = {
                "left_value": self.outside.left_value,
                "left_ok": self.outside.left_ok,
                "right_value": self.outside.right_value,
                "right_ok": self.outside.right_ok,
                "eps2_ok": self.outside.eps2_ok,
                "eps2_skip_reason": self.outside.eps2_skip_reason,
            }
        return out


def concavity_report(
    canonical: CanonicalMeasure, eps: float, *, with_outside: bool = True
) -> ConcavityReport:
    mu = canonical.measure(eps)
    proto = BuzzersProtocol(canonical.sender_times(eps))
    deficits = window_deficits(mu, canonical.s, eps, protocol=proto)
    g0 = canonical.gamma0(eps)
    g1 = canonical.gamma1(eps)
    te = taylor_coefficient(canonical.k, canonical.s, canonical.beta, "ext") * eps**3
    ti = taylor_coefficient(canonical.k, canonical.s, canonical.beta, "int") * eps**3
    outside = (
        outside_window_checks(mu, canonical.s, eps, protocol=proto)
        if with_outside
        else None
    )
    return ConcavityReport(
        k=canonical.k,
        s=canonical.s,
        beta=canonical.beta,
        eps=eps,
        window=(-g0, g1),
        ext_deficit=deficits.external,
        int_deficit=deficits.internal,
        taylor_ext=te,
        taylor_int=ti,
        residual_ext=deficits.external - te,
        residual_int=deficits.internal - ti,
        outside=outside,
    )


@dataclass(frozen=True)
class GridRow:
    k: int
    s: int
    beta: float
    eps: float
    feasible: bool
    skip_reason: str | None
    report: ConcavityReport | None


def verify_grid(
    k_values,
    beta_values,
    eps_values,
    *,
    senders=None,
    with_outside: bool = False,
) -> list[GridRow]:
    """Evaluate the concavity reports over a parameter grid.

    Infeasible combinations (beta outside (0, 1/k), or negative all-zeros
    mass at the requested weakness) are reported as skipped rows rather
    than silently dropped.
    """
    rows = []
    for k in k_values:
        for s in senders if senders is not None else range(1, k + 1):
            if s > k:
                continue
            for beta in beta_values:
                for eps in eps_values:
                    try:
                        canonical = CanonicalMeasure(k=k, s=s, beta=beta)
                        report = concavity_report(canonical, eps, with_outside=with_outside)
                    except InvalidDistributionError as exc:
                        rows.append(
                            GridRow(k, s, beta, eps, False, str(exc), None)
                        )
                        continue
                    rows.append(GridRow(k, s, beta, eps, True, None, report))
    return rows
