"""The continuous-time buzzers protocol for multiparty AND and its exact cost.

Player ``i`` with private bit 0 arms an exponential-clock buzzer at start
time ``t_i = ln(m_i / m_min)``, where ``m_i`` is the measure of the basis
input ``e_i`` and ``m_min`` the smallest such mass.  The first buzz ends the
protocol with output 0; eternal silence means every bit was 1.  A transcript
is therefore either ``(t, m)`` (player ``m`` buzzed first at time ``t``) or
the silent outcome, which has probability one exactly on the all-ones input.

Transcript densities factor per input as ``f_x(t, m) = exp(-Phi_x(t))`` for
``t >= t_m`` and ``x_m = 0`` (zero otherwise), with ``Phi_x`` the total time
already spent by active players.  Internal and external information costs
are computed by piecewise quadrature of the conditional-entropy integrands
against these densities; the unbounded tail is mapped onto (0, 1] by
``u = exp(-(t - t_last))``, where the integrand extends continuously.

Measures with mass on the all-ones input are costed by conditioning that
point away and scaling by its complement, matching the protocol-equivalence
convention used throughout this package (the start times only depend on
ratios of basis masses, so the conditioned measure runs the same protocol).
Zero basis masses force the corresponding bit to zero almost surely; such
players are deleted and the reduced instance is costed in their place, with
the deleted players contributing nothing.  Such measures are degenerate for
the protocol family (their start times are undefined), and no optimality is
claimed for the reduced values; the interior cost is continuous up to the
boundary but does not extend to these conventions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MalformedInputError, TrivialInstanceError, ZeroEMassError
from .measures import LN2, ZERO_MASS, InputDistribution, InputLabel, _xlogx
from .quadrature import integrate

__all__ = [
    "StartTimes",
    "BuzzersProtocol",
    "SegmentedDensity",
    "ICReport",
    "start_times",
    "phi",
    "transcript_density",
    "cost_under",
    "information_cost",
    "closed_form_uniform",
]

#: Start times closer than this (relative) collapse into one breakpoint.
_TIME_DEDUPE = 1e-14


@dataclass(frozen=True)
class StartTimes:
    """Sorted buzzer start times with the player permutation that sorts them.

    ``sorted_times[0] == 0`` and ``order[r]`` is the 1-based player whose
    start time is ``sorted_times[r]``.  ``per_player[i-1]`` is player i's
    start time.
    """

    sorted_times: tuple[float, ...]
    order: tuple[int, ...]
    per_player: tuple[float, ...]


def start_times(mu: InputDistribution) -> StartTimes:
    """Start times ``ln(m_i / m_min)`` for a measure with positive basis masses."""
    e = np.array([mu.e_mass(i) for i in range(1, mu.k + 1)])
    if np.all(e <= ZERO_MASS):
        raise TrivialInstanceError("all basis masses vanish; no start times")
    if np.any(e <= ZERO_MASS):
        raise ZeroEMassError([i + 1 for i in np.flatnonzero(e <= ZERO_MASS)])
    order = np.argsort(e, kind="stable")
    times = np.log(e / e[order[0]])
    return StartTimes(
        sorted_times=tuple(float(times[j]) for j in order),
        order=tuple(int(j) + 1 for j in order),
        per_player=tuple(float(t) for t in times),
    )


@dataclass(frozen=True)
class BuzzersProtocol:
    """A buzzers protocol is fully described by one start time per player."""

    player_times: tuple[float, ...]

    def __post_init__(self):
        if len(self.player_times) < 1 or not all(
            np.isfinite(t) for t in self.player_times
        ):
            raise MalformedInputError("start times must be finite")

    @property
    def k(self) -> int:
        return len(self.player_times)

    @classmethod
    def from_measure(cls, mu: InputDistribution) -> "BuzzersProtocol":
        return cls(start_times(mu).per_player)

    def shifted(self, offset: float) -> "BuzzersProtocol":
        """Same protocol with every start time moved by ``offset``; the
        exponential clocks are memoryless, so costs are invariant."""
        return BuzzersProtocol(tuple(t + offset for t in self.player_times))


def phi(label: InputLabel, t: float, times: StartTimes | BuzzersProtocol) -> float:
    """Total active time before ``t``: sum of max(t - t_i, 0) over players
    with bit 0."""
    per_player = (
        times.per_player if isinstance(times, StartTimes) else times.player_times
    )
    if label.k != len(per_player):
        raise MalformedInputError("label and start times disagree on k")
    return float(
        sum(max(t - ti, 0.0) for ti, b in zip(per_player, label.bits) if b == 0)
    )


# ---------------------------------------------------------------------------
# density machinery (arrays; labels as bit matrices so reduced instances with
# a single player never need a public InputDistribution)
# ---------------------------------------------------------------------------


def _phi_matrix(times: np.ndarray, zeros_mask: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Phi_x(t) for every (t, x); ``zeros_mask[x, i]`` marks x_i == 0."""
    active = np.maximum(t[:, None] - times[None, :], 0.0)
    return active @ zeros_mask.T


def _dedupe_sorted(values: np.ndarray) -> np.ndarray:
    out = [float(values[0])]
    for v in values[1:]:
        if v - out[-1] > _TIME_DEDUPE * max(1.0, abs(v)):
            out.append(float(v))
    return np.array(out)


@dataclass(frozen=True)
class SegmentedDensity:
    """Piecewise-exponential transcript densities ``f_x(t, m) = a e^{-ct}``.

    Segment ``j`` spans ``[breakpoints[j], breakpoints[j+1])``; the last
    segment extends to infinity.  Within a segment the density value does not
    depend on which player ``m`` buzzes; ``m`` only gates validity
    (``x_m = 0`` and ``t >= t_m``).  Coefficients are stored as logs so that
    extreme start-time spreads cannot overflow.
    """

    labels: tuple[InputLabel, ...]
    masses: tuple[float, ...]
    protocol: BuzzersProtocol
    breakpoints: tuple[float, ...]
    log_coeff: np.ndarray  # (n_seg, n_x); log a
    rates: np.ndarray  # (n_seg, n_x); c = number of active zero-players
    valid_m: np.ndarray  # (n_seg, k) bool; start time reached
    atom: np.ndarray  # (n_x,); silent-outcome probability

    def _segment_of(self, t: np.ndarray) -> np.ndarray:
        return np.clip(
            np.searchsorted(self.breakpoints, t, side="right") - 1,
            0,
            len(self.breakpoints) - 1,
        )

    def coefficient(self, segment: int, label: InputLabel) -> tuple[float, float]:
        """(a, c) of ``f_x`` on a segment; ``a`` may overflow to inf for
        extreme instances, in which case use ``log_coeff`` directly."""
        x = self.labels.index(label)
        return float(np.exp(self.log_coeff[segment, x])), float(self.rates[segment, x])

    def evaluate(self, label: InputLabel, m: int, t) -> np.ndarray:
        """Density ``f_x(t, m)`` for player ``m`` (1-based) buzzing first."""
        x = self.labels.index(label)
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        if label.bits[m - 1] == 1:
            return np.zeros_like(tt)
        seg = self._segment_of(tt)
        vals = np.exp(self.log_coeff[seg, x] - self.rates[seg, x] * tt)
        vals[tt < self.protocol.player_times[m - 1]] = 0.0
        return vals

    def mixture(self, m: int, t) -> np.ndarray:
        """f(t, m) = sum_x mass_x f_x(t, m)."""
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros_like(tt)
        for lab, w in zip(self.labels, self.masses):
            if w > 0:
                out += w * self.evaluate(lab, m, tt)
        return out

    def total_mass(self, label: InputLabel) -> float:
        """``sum_m int f_x dt + atom`` from the stored segment coefficients.

        Within a segment the number of players able to buzz on input ``x``
        equals the decay rate ``c``, so each segment contributes
        ``a (e^{-c lo} - e^{-c hi})`` and the final segment ``a e^{-c lo}``.
        A correct representation sums to 1 for every input.
        """
        x = self.labels.index(label)
        total = float(self.atom[x])
        bp = self.breakpoints
        for j in range(len(bp)):
            c = self.rates[j, x]
            n_senders = sum(
                1
                for m in range(self.protocol.k)
                if self.valid_m[j, m] and label.bits[m] == 0
            )
            if n_senders == 0:
                continue
            assert n_senders == int(round(c))
            la = self.log_coeff[j, x]
            lo = bp[j]
            if j + 1 < len(bp):
                total += float(np.exp(la - c * lo) - np.exp(la - c * bp[j + 1]))
            else:
                total += float(np.exp(la - c * lo))
        return total


def transcript_density(
    mu: InputDistribution,
    protocol: BuzzersProtocol | None = None,
    extra_breakpoints: tuple[float, ...] = (),
) -> SegmentedDensity:
    """Exact symbolic transcript density of running ``protocol`` on ``mu``.

    When ``protocol`` is omitted it is derived from ``mu`` (which then needs
    positive basis masses).
    """
    proto = protocol if protocol is not None else BuzzersProtocol.from_measure(mu)
    if proto.k != mu.k:
        raise MalformedInputError("protocol and measure disagree on k")
    labels = mu.labels
    bits = np.array([lab.bits for lab in labels])
    zeros_mask = (bits == 0).astype(float)
    times = np.asarray(proto.player_times)

    points = np.concatenate([times, np.asarray(extra_breakpoints, dtype=float)])
    bp = _dedupe_sorted(np.sort(points))
    seg_lo = bp
    n_seg, n_x = len(bp), len(labels)
    rates = np.zeros((n_seg, n_x))
    log_coeff = np.full((n_seg, n_x), -np.inf)
    valid = np.zeros((n_seg, proto.k), dtype=bool)
    for j, lo in enumerate(seg_lo):
        started = times <= lo + _TIME_DEDUPE * max(1.0, abs(lo))
        valid[j] = started
        c = zeros_mask @ started.astype(float)
        phi_lo = np.maximum(lo - times, 0.0) @ zeros_mask.T
        rates[j] = c
        log_coeff[j] = -phi_lo + c * lo
    atom = np.array([1.0 if lab.weight == lab.k else 0.0 for lab in labels])
    return SegmentedDensity(
        labels=labels,
        masses=tuple(float(m) for m in mu.vector),
        protocol=proto,
        breakpoints=tuple(float(b) for b in bp),
        log_coeff=log_coeff,
        rates=rates,
        valid_m=valid,
        atom=atom,
    )


# ---------------------------------------------------------------------------
# information cost
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ICReport:
    """Internal/external information cost in bits with per-player breakdown."""

    external_bits: float
    internal_bits: float
    per_player_bits: tuple[float, ...]
    concealed_internal_bits: float
    concealed_external_bits: float
    quadrature_error_estimate: float

    def to_json_obj(self) -> dict:
        return {
            "external_bits": self.external_bits,
            "internal_bits": self.internal_bits,
            "per_player_bits": list(self.per_player_bits),
            "concealed_internal_bits": self.concealed_internal_bits,
            "concealed_external_bits": self.concealed_external_bits,
            "quadrature_error_estimate": self.quadrature_error_estimate,
        }


def _entropy_arr(w: np.ndarray) -> float:
    """Shannon entropy of a nonnegative vector summing to ~1, in nats."""
    return float(-_xlogx(w).sum())


def _cond_entropy_profile(
    times: np.ndarray,
    bits: np.ndarray,
    masses: np.ndarray,
    *,
    rtol: float,
    atol: float,
) -> tuple[np.ndarray, float]:
    """[H(X|T), H(X|T, X_1), ..., H(X|T, X_k)] in nats for transcript T.

    Only the buzz part of the transcript integrates; the silent atom is a
    point posterior (all-ones) and contributes nothing.
    """
    k = times.size
    keep = masses > ZERO_MASS
    bits = bits[keep]
    w = masses[keep]
    n_x = w.size
    zeros_mask = (bits == 0).astype(float)
    # class_onehot[i, b, x] = 1 if bits[x, i] == b
    class_onehot = np.stack([(bits.T == 0), (bits.T == 1)], axis=1).astype(float)

    bp = _dedupe_sorted(np.sort(times))

    def make_integrand(valid: np.ndarray, tail_from: float | None):
        m_mask = zeros_mask[:, valid].T  # (n_m, n_x)

        def f(ts: np.ndarray) -> np.ndarray:
            if tail_from is None:
                t = ts
            else:
                # u-substitution for the tail: t = t_last - ln u, dt = du/u;
                # the 1/u factor is folded into the log-densities
                t = tail_from - np.log(ts)
            phi_vals = _phi_matrix(times, zeros_mask, t)
            logv = np.log(w)[None, :] - phi_vals
            if tail_from is not None:
                logv -= np.log(ts)[:, None]
            V = np.exp(logv)[:, None, :] * m_mask[None, :, :]  # (n_t, n_m, n_x)
            f_m = V.sum(axis=2)
            with np.errstate(divide="ignore", invalid="ignore"):
                logV = np.where(V > 0, np.log(np.where(V > 0, V, 1.0)), 0.0)
                ext = np.where(
                    V > 0, V * (np.log(np.where(f_m > 0, f_m, 1.0))[:, :, None] - logV), 0.0
                ).sum(axis=(1, 2))
                g = np.einsum("tmx,ibx->timb", V, class_onehot)
                gx = np.einsum("timb,ibx->timx", g, class_onehot)
                per = np.where(
                    V[:, None, :, :] > 0,
                    V[:, None, :, :]
                    * (np.log(np.where(gx > 0, gx, 1.0)) - logV[:, None, :, :]),
                    0.0,
                ).sum(axis=(2, 3))
            return np.concatenate([ext[:, None], per], axis=1)

        return f

    total = np.zeros(1 + k)
    err = 0.0
    for lo, hi in zip(bp[:-1], bp[1:]):
        if hi - lo <= _TIME_DEDUPE * max(1.0, abs(hi)):
            continue
        valid = times <= lo + _TIME_DEDUPE * max(1.0, abs(lo))
        vals, e = integrate(
            make_integrand(valid, None), float(lo), float(hi), rtol=rtol, atol=atol
        )
        total += vals
        err += e
    t_last = float(bp[-1])
    vals, e = integrate(
        make_integrand(np.ones(k, dtype=bool), t_last), 0.0, 1.0, rtol=rtol, atol=atol
    )
    total += vals
    err += e
    if n_x == 0:
        total[:] = 0.0
    return total, err


def _entropy_given_player_arr(bits: np.ndarray, w: np.ndarray, i0: int) -> float:
    """H(X | X_i) in nats from arrays."""
    total = 0.0
    for b in (0, 1):
        sel = bits[:, i0] == b
        pb = float(w[sel].sum())
        if pb <= ZERO_MASS:
            continue
        total += pb * _entropy_arr(w[sel] / pb)
    return total


def _cost_arrays(
    times: np.ndarray,
    bits: np.ndarray,
    masses: np.ndarray,
    *,
    rtol: float,
    atol: float,
) -> tuple[float, np.ndarray, float]:
    """(external, per-player internal terms, error estimate), all in bits."""
    k = times.size
    cond, err = _cond_entropy_profile(times, bits, masses, rtol=rtol, atol=atol)
    hx = _entropy_arr(masses)
    ext = (hx - cond[0]) / LN2
    per = np.array(
        [
            (_entropy_given_player_arr(bits, masses, i) - cond[1 + i]) / LN2
            for i in range(k)
        ]
    )
    return ext, per, err / LN2


def cost_under(
    protocol: BuzzersProtocol,
    mu: InputDistribution,
    *,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> ICReport:
    """Exact cost of running a fixed protocol on inputs drawn from ``mu``.

    No reductions are applied: the silent atom (all-ones inputs) is costed
    exactly, and zero masses anywhere are fine because the protocol is given.
    This is the primitive behind the measure-continuity checks.
    """
    if protocol.k != mu.k:
        raise MalformedInputError("protocol and measure disagree on k")
    bits = np.array([lab.bits for lab in mu.labels])
    times = np.asarray(protocol.player_times, dtype=float)
    ext, per, err = _cost_arrays(times, bits, mu.vector, rtol=rtol, atol=atol)
    internal = float(per.sum())
    hx = mu.entropy()
    hxi = sum(mu.entropy_given_player(i) for i in range(1, mu.k + 1))
    return ICReport(
        external_bits=float(ext),
        internal_bits=internal,
        per_player_bits=tuple(float(v) for v in per),
        concealed_internal_bits=float(hxi - internal),
        concealed_external_bits=float(hx - ext),
        quadrature_error_estimate=float(err),
    )


def _reduced_cost(
    mu: InputDistribution, *, rtol: float, atol: float
) -> tuple[float, np.ndarray, float]:
    """Cost pieces for a measure with no all-ones mass, removing zero-mass
    players first.  Returns (external, per-player internal, error) in bits."""
    k = mu.k
    e = np.array([mu.e_mass(i) for i in range(1, k + 1)])
    zero_players = np.flatnonzero(e <= ZERO_MASS)
    if zero_players.size == k:
        return 0.0, np.zeros(k), 0.0

    keep = np.flatnonzero(e > ZERO_MASS)
    bits_full = np.array([lab.bits for lab in mu.labels])
    masses = mu.vector
    live = masses > ZERO_MASS
    # every live label has zeros on the removed players (their basis mass is
    # zero and all-ones is gone), so projection cannot merge labels
    bits = bits_full[live][:, keep]
    w = masses[live]
    w = w / w.sum()
    e_kept = e[keep]
    times = np.log(e_kept / e_kept.min())
    ext, per_kept, err = _cost_arrays(times, bits, w, rtol=rtol, atol=atol)

    # deleted players contribute nothing: the reported quantity is the
    # reduced instance's own cost (their bits are almost surely zero)
    per = np.zeros(k)
    per[keep] = per_kept
    return ext, per, err


def information_cost(
    mu: InputDistribution, *, rtol: float = 1e-10, atol: float = 1e-12
) -> ICReport:
    """Internal and external information cost of the buzzers protocol on ``mu``.

    Mass on the all-ones input is conditioned away first and the cost scaled
    by the remaining probability (the conditioned measure induces the same
    protocol).  Concealed information is reported against the original
    measure's entropies.
    """
    mu_r, c_ones = mu.without_all_ones()
    scale = 1.0 - c_ones
    ext, per, err = _reduced_cost(mu_r, rtol=rtol, atol=atol)
    ext *= scale
    per = per * scale
    internal = float(per.sum())
    hx = mu.entropy()
    hxi = sum(mu.entropy_given_player(i) for i in range(1, mu.k + 1))
    return ICReport(
        external_bits=float(ext),
        internal_bits=internal,
        per_player_bits=tuple(float(v) for v in per),
        concealed_internal_bits=float(hxi - internal),
        concealed_external_bits=float(hx - ext),
        quadrature_error_estimate=float(err * scale),
    )


def closed_form_uniform(k: int) -> tuple[float, float]:
    """(external, internal) cost in bits for the uniform basis measure.

    External is ``log2(k) - log2(k-1)``; internal is
    ``(k-2) (log2(k-1) - log2(k-2))``, which vanishes at k = 2.
    """
    if k < 2:
        raise MalformedInputError(f"need at least two players, got k={k}")
    ext = float(np.log2(k) - np.log2(k - 1))
    if k == 2:
        return ext, 0.0
    return ext, float((k - 2) * (np.log2(k - 1) - np.log2(k - 2)))
