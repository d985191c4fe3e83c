import numpy as np
import pytest

from numbergame.agents import (
    AgentSpec,
    emit_labels,
    emit_prediction,
)
from numbergame.engine import posterior, predictive
from numbergame.errors import InputError
from numbergame.fitting import fit
from numbergame.metrics import project
from numbergame.registry import HypothesisSpace
from numbergame.stimuli import StimulusPresentation, expand_prefixes, \
    tenenbaum99_sets


def pres(examples, stimulus_id="x"):
    return StimulusPresentation(stimulus_id, "tenenbaum99", len(examples),
                                tuple(examples))


class TestPrediction:
    def test_bayesian_matches_engine(self, t99_100):
        agent = AgentSpec(kind="bayesian", alpha=0.8, beta=1.7)
        r = emit_prediction(agent, t99_100, pres((16, 8, 2, 64)))
        expected = predictive(posterior(t99_100, (16, 8, 2, 64),
                                        alpha=0.8, beta=1.7))
        assert np.abs(r.curve - expected).max() < 1e-15
        assert r.key.stimulus_id == "x" and r.key.n == 4

    def test_map_only_is_indicator(self, t99_100):
        agent = AgentSpec(kind="map-only")
        r = emit_prediction(agent, t99_100, pres((16, 8, 2, 64)))
        assert set(np.unique(r.curve)) <= {0.0, 1.0}
        idx = t99_100.index_of_label("powers of 2")
        support = t99_100.hypotheses[idx].support
        assert {y + 1 for y in np.flatnonzero(r.curve)} == support

    def test_narrowest_compatible(self, t99_100):
        # the tightest superset of {16, 8, 2, 64} is exactly powers of 2
        agent = AgentSpec(kind="narrowest-compatible")
        r = emit_prediction(agent, t99_100, pres((16, 8, 2, 64)))
        idx = t99_100.index_of_label("powers of 2")
        support = t99_100.hypotheses[idx].support
        assert {y + 1 for y in np.flatnonzero(r.curve)} == support

    def test_uniform_noise_baseline(self, t99_100):
        agent = AgentSpec(kind="uniform-noise")
        r = emit_prediction(agent, t99_100, pres((16,)))
        assert (r.curve == 0.5).all()

    def test_incompatible_examples_skipped(self, t99_100):
        idx = t99_100.index_of_label("even numbers")
        tiny = HypothesisSpace(task=t99_100.task, domain=t99_100.domain,
                               hypotheses=(t99_100.hypotheses[idx],),
                               prior=(1.0,))
        agent = AgentSpec(kind="bayesian")
        assert emit_prediction(agent, tiny, pres((3,))) is None

    def test_seed_determinism(self, t99_100):
        a = AgentSpec(kind="bayesian", noise=0.1, seed=5)
        b = AgentSpec(kind="bayesian", noise=0.1, seed=5)
        c = AgentSpec(kind="bayesian", noise=0.1, seed=6)
        p = pres((16, 8))
        ra = emit_prediction(a, t99_100, p)
        rb = emit_prediction(b, t99_100, p)
        rc = emit_prediction(c, t99_100, p)
        assert (ra.curve == rb.curve).all()
        assert not (ra.curve == rc.curve).all()

    def test_zero_noise_ignores_seed(self, t99_100):
        a = emit_prediction(AgentSpec(seed=1), t99_100, pres((16,)))
        b = emit_prediction(AgentSpec(seed=99), t99_100, pres((16,)))
        assert (a.curve == b.curve).all()

    def test_noise_stays_in_bounds(self, t99_100):
        agent = AgentSpec(kind="bayesian", noise=0.5, seed=3)
        r = emit_prediction(agent, t99_100, pres((16, 8, 2, 64)))
        assert r.curve.min() >= 0.0 and r.curve.max() <= 1.0

    def test_noise_amplitude_validated(self):
        with pytest.raises(InputError):
            AgentSpec(noise=0.6)

    def test_unknown_kind_rejected(self):
        with pytest.raises(InputError):
            AgentSpec(kind="psychic")


class TestLabels:
    def test_projection_equivalence_with_full_k(self, t99_100):
        # keeping every compatible hypothesis as a label and projecting
        # back must reproduce the hypothesis-averaged curve exactly
        agent = AgentSpec(kind="bayesian", alpha=1.0, beta=1.0)
        for examples in [(16,), (60, 80), (16, 8, 2, 64), (16, 23, 19, 20)]:
            p = pres(examples)
            readout = emit_labels(agent, t99_100, p, k=len(t99_100))
            proj = project(readout, t99_100.domain)
            expected = emit_prediction(agent, t99_100, p).curve
            assert np.abs(proj.curve - expected).max() < 1e-12

    def test_top_k_ranked_by_mass(self, t99_100):
        agent = AgentSpec(kind="bayesian")
        readout = emit_labels(agent, t99_100, pres((16, 8, 2, 64)), k=3)
        assert len(readout.entries) == 3
        assert readout.entries[0].label == "powers of 2"
        confidences = [e.raw_confidence for e in readout.entries]
        assert confidences == sorted(confidences, reverse=True)

    def test_weights_renormalized(self, t99_100):
        agent = AgentSpec(kind="bayesian")
        readout = emit_labels(agent, t99_100, pres((16, 8)), k=5)
        assert sum(e.weight for e in readout.entries) == pytest.approx(1.0)
        assert readout.matched_mass == 1.0

    def test_k_exceeding_compatible_returns_all(self, t99_100):
        agent = AgentSpec(kind="bayesian")
        readout = emit_labels(agent, t99_100, pres((16, 8, 2, 64)), k=10 ** 6)
        compat = sum(1 for h in t99_100.hypotheses
                     if {16, 8, 2, 64} <= h.support)
        assert len(readout.entries) == compat

    def test_invalid_k(self, t99_100):
        with pytest.raises(InputError):
            emit_labels(AgentSpec(), t99_100, pres((16,)), k=0)


class TestRoundTrip:
    def test_fit_recovers_agent_parameters(self, t99_100):
        agent = AgentSpec(kind="bayesian", alpha=2.0, beta=0.5)
        readouts = [emit_prediction(agent, t99_100, p)
                    for p in expand_prefixes(tenenbaum99_sets())]
        readouts = [r for r in readouts if r is not None]
        result = fit(readouts, t99_100)
        assert abs(result.alpha - 2.0) / 2.0 < 0.05
        assert abs(result.beta - 0.5) / 0.5 < 0.05
