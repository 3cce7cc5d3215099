"""Signal algebra: posteriors, classification, splitting, simulation."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from icand.errors import (
    ConditioningError,
    NonTerminationError,
    SplittingError,
)
from icand.measures import InputDistribution, canonical_labels
from icand.signals import (
    Signal,
    WeakSignal,
    classify,
    posterior,
    sample_terminal_posteriors,
    signal_info_external,
    signal_info_internal,
    simulate_signal,
    split,
)

MU_NO11 = InputDistribution.two_party(1 / 3, 1 / 3, 1 / 3, 0.0)


@st.composite
def two_party_measures(draw):
    raw = draw(st.lists(st.floats(0.01, 1.0), min_size=4, max_size=4))
    v = np.array(raw) / np.sum(raw)
    return InputDistribution(2, dict(zip(canonical_labels(2), v)))


@st.composite
def signals(draw):
    return Signal(
        sender=draw(st.integers(1, 2)),
        p0_given_0=draw(st.floats(0.05, 0.95)),
        p0_given_1=draw(st.floats(0.05, 0.95)),
    )


def brute_force_internal(mu, sig):
    """Independent oracle: enumerate the dense joint of (X, B) and sum
    conditional mutual informations player by player."""
    total = 0.0
    for i in range(1, mu.k + 1):
        for b in (0, 1):
            pb = sum(m for lab, m in zip(mu.labels, mu.vector) if lab.bits[i - 1] == b)
            if pb < 1e-14:
                continue
            acc = 0.0
            pairs = [
                (m / pb, sig.p0_given(lab.bits[sig.sender - 1]))
                for lab, m in zip(mu.labels, mu.vector)
                if lab.bits[i - 1] == b and m > 0
            ]
            pc = sum(w * p for w, p in pairs)
            for w, p in pairs:
                for c, q in ((0, p), (1, 1 - p)):
                    joint = w * q
                    marg = pc if c == 0 else 1 - pc
                    if joint > 0 and marg > 0:
                        acc += joint * math.log2(joint / (w * marg))
            total += pb * acc
    return total


def brute_force_external(mu, sig):
    acc = 0.0
    pc = sig.prob0(mu)
    for lab, m in zip(mu.labels, mu.vector):
        if m <= 0:
            continue
        p = sig.p0_given(lab.bits[sig.sender - 1])
        for c, q in ((0, p), (1, 1 - p)):
            joint = m * q
            marg = pc if c == 0 else 1 - pc
            if joint > 0 and marg > 0:
                acc += joint * math.log2(joint / (m * marg))
    return acc


class TestPosterior:
    def test_uninformative_signal_fixes_measure(self):
        sig = WeakSignal(sender=1, eps=0.0).to_signal(MU_NO11)
        for b in (0, 1):
            post = posterior(MU_NO11, sig, b)
            assert post.statistical_distance(MU_NO11) < 1e-14

    def test_full_revelation(self):
        mu = InputDistribution.two_party(0.25, 0.25, 0.25, 0.25)
        sig = Signal(sender=1, p0_given_0=1.0, p0_given_1=0.0)
        post = posterior(mu, sig, 0)
        assert post.mass("00") == pytest.approx(0.5)
        assert post.mass("01") == pytest.approx(0.5)
        assert post.mass("10") == 0.0

    def test_weak_signal_bayes_arithmetic(self):
        # direct Bayes arithmetic for WeakSignal(sender=2, eps=0.3) on the
        # no-11 measure: beta_2 = 1/3
        sig = WeakSignal(sender=2, eps=0.3).to_signal(MU_NO11)
        p00 = (1 + 0.3 * (1 / 3)) / 2
        p01 = (1 - 0.3 * (2 / 3)) / 2
        z = (1 / 3) * p00 + (1 / 3) * p01 + (1 / 3) * p00
        post = posterior(MU_NO11, sig, 0)
        assert post.mass("00") == pytest.approx((1 / 3) * p00 / z, abs=1e-14)
        assert post.mass("01") == pytest.approx((1 / 3) * p01 / z, abs=1e-14)
        assert post.mass("10") == pytest.approx((1 / 3) * p00 / z, abs=1e-14)

    def test_weak_signal_bayes_monte_carlo(self):
        # sample (X, B) and compare the empirical conditional law
        sig = WeakSignal(sender=2, eps=0.3).to_signal(MU_NO11)
        rng = np.random.default_rng(123)
        n = 200_000
        xs = rng.choice(3, size=n, p=[1 / 3, 1 / 3, 1 / 3])  # 00, 01, 10
        x2 = np.array([0, 1, 0])[xs]
        p0 = np.where(x2 == 0, sig.p0_given_0, sig.p0_given_1)
        b = (rng.random(n) >= p0).astype(int)
        post = posterior(MU_NO11, sig, 0)
        sel = xs[b == 0]
        counts = np.bincount(sel, minlength=3) / sel.size
        expected = [post.mass("00"), post.mass("01"), post.mass("10")]
        np.testing.assert_allclose(counts, expected, atol=5e-3)

    def test_zero_probability_branch(self):
        sig = Signal(sender=1, p0_given_0=1.0, p0_given_1=1.0)
        with pytest.raises(ConditioningError):
            posterior(MU_NO11, sig, 1)

    @given(two_party_measures(), signals())
    @settings(max_examples=60, deadline=None)
    def test_martingale(self, mu, sig):
        p0 = sig.prob0(mu)
        if not 1e-9 < p0 < 1 - 1e-9:
            return
        mix = p0 * posterior(mu, sig, 0).vector + (1 - p0) * posterior(mu, sig, 1).vector
        np.testing.assert_allclose(mix, mu.vector, atol=1e-12)


class TestInfo:
    def test_zero_weakness_zero_info(self):
        sig = WeakSignal(sender=1, eps=0.0).to_signal(MU_NO11)
        assert signal_info_internal(MU_NO11, sig) == pytest.approx(0.0, abs=1e-12)
        assert signal_info_external(MU_NO11, sig) == pytest.approx(0.0, abs=1e-12)

    def test_constant_signal_external_zero(self):
        sig = Signal(sender=1, p0_given_0=1.0, p0_given_1=1.0)
        assert signal_info_external(MU_NO11, sig) == pytest.approx(0.0, abs=1e-12)

    def test_revealing_signal_on_anticorrelated_support(self):
        # on support {01, 10} either player's bit determines the input, so
        # a revealing signal adds nothing given the conditioning bit
        mu = InputDistribution.two_party(0.0, 0.5, 0.5, 0.0)
        sig = Signal(sender=1, p0_given_0=1.0, p0_given_1=0.0)
        assert signal_info_internal(mu, sig) == pytest.approx(0.0, abs=1e-12)

    def test_matches_brute_force(self):
        sig = WeakSignal(sender=1, eps=0.1).to_signal(MU_NO11)
        assert signal_info_internal(MU_NO11, sig) == pytest.approx(
            brute_force_internal(MU_NO11, sig), abs=1e-12
        )
        assert signal_info_external(MU_NO11, sig) == pytest.approx(
            brute_force_external(MU_NO11, sig), abs=1e-12
        )

    @given(two_party_measures(), signals())
    @settings(max_examples=40, deadline=None)
    def test_brute_force_agreement_random(self, mu, sig):
        assert signal_info_internal(mu, sig) == pytest.approx(
            brute_force_internal(mu, sig), abs=1e-12
        )


class TestClassify:
    def test_weak_signal_profile(self):
        profile = classify(MU_NO11, WeakSignal(sender=1, eps=0.25).to_signal(MU_NO11))
        assert profile.unbiased
        assert profile.noncrossing
        # weakness = eps * max(beta, zeta) over the support
        assert profile.weakness == pytest.approx(0.25 * (2 / 3), abs=1e-12)

    def test_zero_eps(self):
        profile = classify(MU_NO11, WeakSignal(sender=2, eps=0.0).to_signal(MU_NO11))
        assert profile.unbiased and profile.noncrossing
        assert profile.weakness == 0.0

    def test_deterministic_signal_weakness_one(self):
        mu = InputDistribution.two_party(0.25, 0.25, 0.25, 0.25)
        profile = classify(mu, Signal(sender=1, p0_given_0=1.0, p0_given_1=0.0))
        assert profile.weakness == 1.0

    @given(two_party_measures(), st.integers(1, 2), st.floats(0.0, 0.9))
    @settings(max_examples=60, deadline=None)
    def test_weak_signals_always_unbiased(self, mu, sender, eps):
        profile = classify(mu, WeakSignal(sender=sender, eps=eps).to_signal(mu))
        assert profile.unbiased


class TestSplit:
    def test_midpoint_recovers_weak_signal(self):
        sig = WeakSignal(sender=1, eps=0.2).to_signal(MU_NO11)
        rho0 = posterior(MU_NO11, sig, 0)
        rho1 = posterior(MU_NO11, sig, 1)
        again = split(MU_NO11, sig, MU_NO11, rho0, rho1)
        assert again.p0_given_0 == pytest.approx(sig.p0_given_0, abs=1e-10)
        assert again.p0_given_1 == pytest.approx(sig.p0_given_1, abs=1e-10)
        np.testing.assert_allclose(
            posterior(MU_NO11, again, 0).vector, rho0.vector, atol=1e-10
        )

    def test_degenerate_constant(self):
        sig = WeakSignal(sender=1, eps=0.2).to_signal(MU_NO11)
        out = split(MU_NO11, sig, MU_NO11, MU_NO11, MU_NO11)
        assert out.p0_given_0 == 0.5 and out.p0_given_1 == 0.5

    def test_near_endpoint_still_valid(self):
        sig = WeakSignal(sender=1, eps=0.2).to_signal(MU_NO11)
        rho0 = posterior(MU_NO11, sig, 0)
        rho1 = posterior(MU_NO11, sig, 1)
        t = 1e-8  # rho close to rho0 but strictly inside
        vec = (1 - t) * rho0.vector + t * rho1.vector
        rho = InputDistribution(2, dict(zip(MU_NO11.labels, vec)))
        out = split(MU_NO11, sig, rho, rho0, rho1)
        p0 = out.prob0(rho)
        assert p0 > 1 - 1e-7
        np.testing.assert_allclose(
            posterior(rho, out, 0).vector, rho0.vector, atol=1e-9
        )

    def test_endpoint_rejected(self):
        sig = WeakSignal(sender=1, eps=0.2).to_signal(MU_NO11)
        rho0 = posterior(MU_NO11, sig, 0)
        rho1 = posterior(MU_NO11, sig, 1)
        with pytest.raises(SplittingError):
            split(MU_NO11, sig, rho0, rho0, rho1)

    def test_off_segment_rejected(self):
        sig = WeakSignal(sender=1, eps=0.2).to_signal(MU_NO11)
        rho0 = posterior(MU_NO11, sig, 0)
        rho1 = posterior(MU_NO11, sig, 1)
        off = InputDistribution.two_party(0.7, 0.1, 0.2, 0.0)
        with pytest.raises(SplittingError):
            split(MU_NO11, sig, off, rho0, rho1)


REVEALING = Signal(sender=1, p0_given_0=1.0, p0_given_1=0.0)


class TestSimulation:
    def test_single_step_when_already_weak(self):
        sig = WeakSignal(sender=1, eps=0.15).to_signal(MU_NO11)
        trace = simulate_signal(MU_NO11, sig, eps=0.2, rng=np.random.default_rng(0))
        assert len(trace.steps) == 1
        step = trace.steps[0]
        assert step.signal.p0_given_0 == pytest.approx(sig.p0_given_0, abs=1e-12)
        assert step.signal.p0_given_1 == pytest.approx(sig.p0_given_1, abs=1e-12)

    def test_steps_classify_and_chain(self):
        rng = np.random.default_rng(42)
        trace = simulate_signal(MU_NO11, REVEALING, eps=0.3, rng=rng, snap_tol=1e-3)
        assert len(trace.steps) >= 2
        mu0 = posterior(MU_NO11, REVEALING, 0)
        mu1 = posterior(MU_NO11, REVEALING, 1)
        current = MU_NO11
        seg = mu1.vector - mu0.vector
        j = int(np.argmax(np.abs(seg)))
        for step in trace.steps:
            profile = classify(current, step.signal)
            assert profile.unbiased
            assert profile.noncrossing
            assert profile.weakness <= 0.3 * (1 + 1e-9)
            # posterior consistent with the realized bit
            expected = posterior(current, step.signal, step.bit)
            assert expected.statistical_distance(step.posterior) < 1e-9
            # stays on the segment [mu0, mu1]
            t = (step.posterior.vector[j] - mu0.vector[j]) / seg[j]
            assert -1e-9 <= t <= 1 + 1e-9
            recon = mu0.vector + t * seg
            np.testing.assert_allclose(recon, step.posterior.vector, atol=1e-9)
            current = step.posterior
        assert trace.terminal in (mu0, mu1)

    def test_terminal_two_point_law(self):
        rng = np.random.default_rng(7)
        sample = sample_terminal_posteriors(
            MU_NO11, REVEALING, eps=0.2, rng=rng, n_traces=4000, snap_tol=1e-6
        )
        assert sample.prob0_exact == pytest.approx(2 / 3, abs=1e-12)
        assert sample.tv_distance() < 0.03
        assert sample.max_weakness <= 0.2 * (1 + 1e-9)

    def test_sampler_matches_trace_dynamics(self):
        # same seed, same walk law: the scalar and vector paths agree on the
        # terminal label distribution at coarse statistics
        rng = np.random.default_rng(11)
        terminals = []
        for _ in range(200):
            tr = simulate_signal(
                MU_NO11, REVEALING, eps=0.25, rng=rng, snap_tol=1e-4, validate=False
            )
            terminals.append(tr.terminal.mass("10") > 0.5)
        frac1 = np.mean(terminals)
        assert abs(frac1 - 1 / 3) < 0.12

    def test_non_termination_cap(self):
        with pytest.raises(NonTerminationError):
            simulate_signal(
                MU_NO11,
                REVEALING,
                eps=0.01,
                rng=np.random.default_rng(3),
                max_steps=10,
                validate=False,
            )

    def test_degenerate_signal(self):
        sig = Signal(sender=1, p0_given_0=1.0, p0_given_1=1.0)
        trace = simulate_signal(MU_NO11, sig, eps=0.1, rng=np.random.default_rng(0))
        assert trace.steps == ()
        assert trace.terminal == MU_NO11

    def test_trace_json(self):
        trace = simulate_signal(
            MU_NO11, REVEALING, eps=0.4, rng=np.random.default_rng(5), snap_tol=1e-2
        )
        obj = trace.to_json_obj()
        assert obj["eps"] == 0.4
        assert len(obj["steps"]) == len(trace.steps)
