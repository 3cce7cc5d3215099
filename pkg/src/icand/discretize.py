"""Conventional finite-round protocol approximating the buzzers protocol.

Time is cut into slots of length ``delta`` starting at the earliest start
time; in slot ``r`` every player whose start time has been reached and whose
bit is 0 sends, in player order, a bit that is 1 with probability
``1 - exp(-overlap)``, where ``overlap`` is that player's active time inside
the slot (a player joins at the first slot boundary past their start time,
an O(delta) rounding of the continuous schedule).  The first 1 ends the
protocol with output 0.  If nothing fired by the horizon ``T``, all players
reveal their inputs and output the AND exactly, so the protocol is zero
error for every slot size.

Transcripts are tracked as equivalence classes (slot, buzzing player; or
silence followed by the revealed input): any representation inducing the
same posterior walk has the same information cost.  Costs are computed by
exact summation over this finite transcript space, which makes the module
an independent oracle for the quadrature path: as ``delta`` shrinks and the
horizon grows, both converge to the continuous values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .buzzers import ICReport, start_times
from .errors import MalformedInputError, ResolutionError
from .measures import LN2, ZERO_MASS, InputDistribution, _xlogx

__all__ = ["DiscreteProtocol", "ProtocolNode", "build", "exact_ic"]


@dataclass(frozen=True)
class ProtocolNode:
    """One node of the protocol tree over transcript classes."""

    posterior: InputDistribution
    depth: int
    terminal: bool
    output: int | None
    children: tuple[tuple[float, "ProtocolNode"], ...]


@dataclass(frozen=True)
class DiscreteProtocol:
    """Slot schedule plus the exact finite transcript distribution.

    ``leaf_slot[l]``, ``leaf_player[l]`` identify buzz leaf ``l`` and
    ``leaf_prob[l, x]`` is its probability on input ``x`` (canonical label
    order restricted to the support); ``silent_prob[x]`` is the probability
    of reaching the reveal stage.
    """

    mu: InputDistribution
    delta: float
    horizon: float
    n_slots: int
    slots: tuple[tuple[int, ...], ...]  # active players (1-based) per slot
    support: tuple
    leaf_slot: np.ndarray
    leaf_player: np.ndarray
    leaf_prob: np.ndarray
    silent_prob: np.ndarray

    @property
    def k(self) -> int:
        return self.mu.k

    def root(self, max_nodes: int = 250_000) -> ProtocolNode:
        """Materialize the protocol tree (small instances only)."""
        est = sum(len(a) + 2 for a in self.slots) + 2 * len(self.support)
        if est > max_nodes:
            raise ResolutionError(
                f"tree of ~{est} nodes exceeds cap {max_nodes}; increase delta"
            )
        bits = np.array([lab.bits for lab in self.support])
        w = np.array([self.mu.mass(lab) for lab in self.support])
        q = math.exp(-self.delta)
        p = 1.0 - q

        def posterior_of(vec: np.ndarray) -> InputDistribution:
            vec = np.maximum(vec, 0.0)
            return InputDistribution(
                self.mu.k, dict(zip(self.support, vec / vec.sum()))
            )

        def build_node(r: int, reach: np.ndarray, depth: int) -> ProtocolNode:
            if r == self.n_slots:
                total = reach.sum()
                children = []
                for j, lab in enumerate(self.support):
                    if reach[j] <= ZERO_MASS:
                        continue
                    leaf = ProtocolNode(
                        posterior=posterior_of(np.eye(len(self.support))[j]),
                        depth=depth + 1,
                        terminal=True,
                        output=int(lab.weight == lab.k),
                        children=(),
                    )
                    children.append((float(reach[j] / total), leaf))
                return ProtocolNode(
                    posterior=posterior_of(reach),
                    depth=depth,
                    terminal=False,
                    output=None,
                    children=tuple(children),
                )
            children = []
            total = reach.sum()
            stay = reach.copy()
            for m in self.slots[r]:
                can_fire = (bits[:, m - 1] == 0).astype(float)
                fire = stay * can_fire * p
                mass = fire.sum()
                if mass > ZERO_MASS:
                    leaf = ProtocolNode(
                        posterior=posterior_of(fire),
                        depth=depth + 1,
                        terminal=True,
                        output=0,
                        children=(),
                    )
                    children.append((float(mass / total), leaf))
                stay = stay * np.where(can_fire > 0, q, 1.0)
            child = build_node(r + 1, stay, depth + 1)
            children.append((float(stay.sum() / total), child))
            return ProtocolNode(
                posterior=posterior_of(reach),
                depth=depth,
                terminal=False,
                output=None,
                children=tuple(children),
            )

        return build_node(0, w.copy(), 0)


def build(
    mu: InputDistribution,
    delta: float,
    horizon: float,
    *,
    max_leaves: int = 5_000_000,
) -> DiscreteProtocol:
    """Construct the discrete protocol (exact transcript distribution).

    ``horizon`` must leave at least one time unit past the last start time.
    The construction is exact; nothing is sampled.
    """
    if delta <= 0.0:
        raise MalformedInputError(f"slot length {delta} must be positive")
    times = np.asarray(start_times(mu).per_player)
    if horizon < times.max() + 1.0:
        raise MalformedInputError(
            f"horizon {horizon} too small; need at least {times.max() + 1.0}"
        )
    n_slots = int(math.ceil(horizon / delta))

    support = mu.support()
    bits = np.array([lab.bits for lab in support])
    w = np.array([mu.mass(lab) for lab in support])
    zeros = (bits == 0).astype(float)  # (n_x, k)

    # slot r admits players whose start time is at most r * delta
    join_slot = np.ceil(np.maximum(times, 0.0) / delta - 1e-12).astype(int)
    slots = tuple(
        tuple(int(i) + 1 for i in np.flatnonzero(join_slot <= r))
        for r in range(n_slots)
    )
    n_leaves = sum(len(a) for a in slots)
    if n_leaves > max_leaves:
        raise ResolutionError(
            f"{n_leaves} transcript classes exceed the cap {max_leaves}; "
            "increase delta or lower the horizon"
        )

    q = math.exp(-delta)
    log_q = -delta
    p = 1.0 - q

    # phases of constant active set; within one, survivals are geometric
    boundaries = sorted({0, n_slots, *[int(j) for j in join_slot if 0 <= j < n_slots]})
    leaf_slot = np.empty(n_leaves, dtype=np.int64)
    leaf_player = np.empty(n_leaves, dtype=np.int64)
    leaf_prob = np.empty((n_leaves, len(support)))
    log_surv = np.zeros(len(support))  # log Pr[silent through slots < r | x]
    pos = 0
    for b0, b1 in zip(boundaries[:-1], boundaries[1:]):
        active = [i for i in range(mu.k) if join_slot[i] <= b0]
        if not active:
            continue  # nobody can fire; survival unchanged
        n_active = zeros[:, active].sum(axis=1)  # zero-players active, per x
        length = b1 - b0
        r_off = np.arange(length)
        # survival entering slot b0 + r_off
        surv = np.exp(log_surv[None, :] + r_off[:, None] * log_q * n_active[None, :])
        prefix = np.zeros(len(support))
        for m in active:
            fires = (bits[:, m] == 0).astype(float)
            probs = surv * (np.exp(log_q * prefix) * fires * p)[None, :]
            sl = slice(pos, pos + length)
            leaf_slot[sl] = b0 + r_off
            leaf_player[sl] = m + 1
            leaf_prob[sl] = probs
            pos += length
            prefix += fires
        log_surv += length * log_q * n_active
    leaf_slot = leaf_slot[:pos]
    leaf_player = leaf_player[:pos]
    leaf_prob = leaf_prob[:pos]
    silent = np.exp(log_surv)

    return DiscreteProtocol(
        mu=mu,
        delta=float(delta),
        horizon=float(horizon),
        n_slots=n_slots,
        slots=slots,
        support=support,
        leaf_slot=leaf_slot,
        leaf_player=leaf_player,
        leaf_prob=leaf_prob,
        silent_prob=silent,
    )


def exact_ic(proto: DiscreteProtocol) -> ICReport:
    """Exact internal/external information cost by leafwise summation.

    Reveal leaves are point posteriors and contribute nothing to the
    conditional entropies; buzz leaves are summed exactly.  No quadrature
    and no sampling anywhere, so the error estimate is zero.
    """
    mu = proto.mu
    bits = np.array([lab.bits for lab in proto.support])
    w = np.array([mu.mass(lab) for lab in proto.support])

    V = proto.leaf_prob * w[None, :]
    f = V.sum(axis=1)
    live = V > 0
    logV = np.where(live, np.log(np.where(live, V, 1.0)), 0.0)
    h_x_pi = float(
        np.where(live, V * (np.log(np.where(f > 0, f, 1.0))[:, None] - logV), 0.0).sum()
    )

    def h_of(vec) -> float:
        return float(-_xlogx(np.asarray(vec)).sum())

    h_x = h_of(w)
    external = (h_x - h_x_pi) / LN2

    per = []
    for i in range(mu.k):
        cls = bits[:, i]
        h_x_xi = 0.0
        for b in (0, 1):
            pb = float(w[cls == b].sum())
            if pb > ZERO_MASS:
                h_x_xi += pb * h_of(w[cls == b] / pb)
        g = np.stack([V[:, cls == b].sum(axis=1) for b in (0, 1)], axis=1)
        gx = g[:, cls]
        h_x_pi_xi = float(
            np.where(live, V * (np.log(np.where(gx > 0, gx, 1.0)) - logV), 0.0).sum()
        )
        per.append((h_x_xi - h_x_pi_xi) / LN2)

    internal = float(sum(per))
    hxi_total = sum(mu.entropy_given_player(i) for i in range(1, mu.k + 1))
    return ICReport(
        external_bits=float(external),
        internal_bits=internal,
        per_player_bits=tuple(float(v) for v in per),
        concealed_internal_bits=float(hxi_total - internal),
        concealed_external_bits=float(mu.entropy() - external),
        quadrature_error_estimate=0.0,
    )
