import math

import numpy as np
import pytest

from bayescausal.dgp import DgpConfig, ObservedData, generate_complete, mask
from bayescausal.dists import RngState
from bayescausal.errors import ArgumentError
from bayescausal.estimands import (
    cate_draws,
    estimand_from_spec,
    ite_draws,
    ite_matrix,
    mc_conditional_mean,
    parse_which,
    pate_bb,
    pate_closed,
    pate_draws,
    pate_ecdf,
    pate_mc,
    sate_draws,
    write_estimand_draws,
    write_estimand_summaries,
)
from bayescausal.model import ParamVector
from bayescausal.sampler import PosteriorDraws, SamplerConfig, run_chain

from conftest import combined_mcse

TRUTH = ParamVector(eta=0.0, tau=1.0, beta01=10.0, beta11=-4.0, sigma1=1.0, beta00=5.0, beta10=5.0, sigma0=1.0, rho=0.0)


def hand_chain(params, data, ym=None):
    ym = np.zeros((len(params), len(data))) if ym is None else ym
    return PosteriorDraws.from_params(params, ym, data)


TWO = ObservedData([3.0, 5.0], [1, 0], [0.0, 1.0])


class TestSampleEstimands:
    def test_ite_sign_follows_arm(self):
        chain = hand_chain([TRUTH], TWO, ym=np.array([[1.0, 9.0]]))
        assert ite_draws(chain, 0).values[0] == 2.0  # treated: y - ym
        assert ite_draws(chain, 1).values[0] == 4.0  # control: ym - y
        assert sate_draws(chain).values[0] == 3.0

    def test_ite_index_range(self):
        chain = hand_chain([TRUTH], TWO)
        with pytest.raises(ArgumentError):
            ite_draws(chain, 2)
        with pytest.raises(ArgumentError):
            ite_draws(chain, -1)

    def test_sate_is_mean_of_ites(self, default_chain):
        sate = sate_draws(default_chain).values
        ites = np.column_stack([ite_draws(default_chain, i).values for i in range(default_chain.n)])
        assert np.allclose(sate, ites.mean(axis=1), rtol=0, atol=1e-12)
        assert np.array_equal(ites, ite_matrix(default_chain))


class TestPopulationEstimands:
    def test_cate_at_truth(self):
        chain = hand_chain([TRUTH], TWO)
        assert cate_draws(chain, 0.0).values[0] == 5.0
        assert cate_draws(chain, 1.0).values[0] == -4.0
        assert pate_closed(chain).values[0] == 5.0

    def test_closed_form_uses_eta(self):
        chain = hand_chain([TRUTH.replace(eta=1.0)], TWO)
        assert pate_closed(chain).values[0] == -4.0

    def test_ecdf_two_points(self):
        assert pate_ecdf(hand_chain([TRUTH], TWO)).values[0] == 0.5

    def test_bb_given_weights(self):
        chain = hand_chain([TRUTH], TWO)
        assert pate_bb(chain, None, weights=[0.25, 0.75]).values[0] == pytest.approx(-1.75, abs=1e-15)

    def test_bb_uniform_weights_is_ecdf(self, default_chain):
        n = default_chain.n
        assert np.array_equal(pate_bb(default_chain, None, weights=np.full(n, 1 / n)).values, pate_ecdf(default_chain).values)

    def test_ecdf_permutation_invariant(self):
        d = ObservedData([1.0, 2.0, 3.0], [1, 0, 1], [0.3, -1.0, 2.0])
        rev = ObservedData(d.y[::-1], d.a[::-1], d.l[::-1])
        p = [TRUTH, TRUTH.replace(beta11=2.0)]
        assert np.allclose(pate_ecdf(hand_chain(p, d)).values, pate_ecdf(hand_chain(p, rev)).values, atol=1e-14)

    def test_bb_weights_fresh_per_draw(self):
        chain = hand_chain([TRUTH] * 3, TWO)
        v = pate_bb(chain, RngState(1)).values
        assert len(set(v.tolist())) == 3

    def test_mc_degenerate_covariate_law(self):
        chain = hand_chain([TRUTH.replace(tau=0.0, eta=0.37), TRUTH.replace(tau=0.0, eta=-2.0)], TWO)
        assert np.array_equal(pate_mc(chain, 1000, RngState(0)).values, pate_closed(chain).values)

    def test_mc_per_draw_error_bound(self, default_chain):
        mc = pate_mc(default_chain, 1000, RngState(5)).values
        closed = pate_closed(default_chain).values
        slope = default_chain.param("beta11") - default_chain.param("beta10")
        bound = 5 * np.abs(slope) * default_chain.param("tau") / math.sqrt(1000)
        assert np.mean(np.abs(mc - closed) <= bound) >= 0.99

    def test_mc_chunking_does_not_change_results(self, default_chain):
        a = pate_mc(default_chain, 50, RngState(2), chunk=512).values
        b = pate_mc(default_chain, 50, RngState(2), chunk=512).values
        assert np.array_equal(a, b)

    def test_mc_needs_positive_S(self):
        with pytest.raises(ArgumentError):
            pate_mc(hand_chain([TRUTH], TWO), 0, RngState(0))


class TestConditionalMean:
    def test_zero_noise(self):
        assert mc_conditional_mean(TRUTH.replace(sigma1=0.0), 0.5, 1, 7, RngState(0)) == 8.0

    def test_large_sample(self):
        assert abs(mc_conditional_mean(TRUTH, 0.0, 1, 10**6, RngState(1)) - 10.0) < 0.005

    @pytest.mark.parametrize("B", [1, 10, 100])
    def test_variance_scales_inverse_in_B(self, B):
        gen = RngState(B).generator()
        reps = np.array([mc_conditional_mean(TRUTH.replace(sigma0=2.0), 0.0, 0, B, gen) for _ in range(4000)])
        # variance of a sample variance over 4000 normal draws: relative sd sqrt(2/3999)
        assert reps.var(ddof=1) == pytest.approx(4.0 / B, rel=5 * math.sqrt(2 / 3999))

    def test_bad_arguments(self):
        with pytest.raises(ArgumentError):
            mc_conditional_mean(TRUTH, 0.0, 2, 10, RngState(0))
        with pytest.raises(ArgumentError):
            mc_conditional_mean(TRUTH, 0.0, 1, 0, RngState(0))


class TestAtDefaults:
    def test_backend_ordering(self, default_chain):
        ecdf = np.std(pate_ecdf(default_chain).values)
        assert ecdf < np.std(pate_bb(default_chain, RngState(0, 2)).values)
        assert ecdf < np.std(pate_mc(default_chain, 1000, RngState(0, 3)).values)

    def test_centres_agree(self, default_chain):
        draws = {
            "closed": pate_closed(default_chain).values,
            "mc": pate_mc(default_chain, 1000, RngState(0, 3)).values,
            "bb": pate_bb(default_chain, RngState(0, 2)).values,
            "ecdf": pate_ecdf(default_chain).values,
        }
        names = list(draws)
        for i, a in enumerate(names):
            for b in names[i + 1 :]:
                assert abs(draws[a].mean() - draws[b].mean()) < 4 * combined_mcse(draws[a], draws[b]), (a, b)

    def test_mc_centre_matches_closed_form(self, default_chain):
        mc = pate_mc(default_chain, 1000, RngState(0, 3)).values
        closed = pate_closed(default_chain).values
        # the per-draw MC error is independent across draws
        per_draw = (mc - closed).std(ddof=1) / math.sqrt(mc.size)
        assert abs(mc.mean() - closed.mean()) < 3 * per_draw

    def test_ite_wider_than_cate(self, default_chain):
        d = default_chain.data
        for i in range(30):
            ite = np.quantile(ite_draws(default_chain, i).values, [0.025, 0.975])
            cate = np.quantile(cate_draws(default_chain, d.l[i]).values, [0.025, 0.975])
            assert ite[1] - ite[0] > cate[1] - cate[0], i


@pytest.mark.slow
def test_large_sample_consistency():
    cfg = DgpConfig(n=2000)
    data = mask(generate_complete(cfg, RngState(31)))
    chain = run_chain(data, SamplerConfig(warmup=2000, keep=2000), RngState(31, 1))
    assert abs(pate_closed(chain).values.mean() - 5.0) < 0.3


class TestSpecParsing:
    @pytest.mark.parametrize(
        "text, expected",
        [("sate", ("sate", None)), ("ite:3", ("ite", "3")), ("cate:0.5", ("cate", "0.5")), ("pate:mc", ("pate", "mc"))],
    )
    def test_parse(self, text, expected):
        assert parse_which(text) == expected

    @pytest.mark.parametrize("text", ["", "ate", "ite", "sate:1", "pate"])
    def test_parse_errors(self, text):
        with pytest.raises(ArgumentError):
            parse_which(text)

    def test_dispatch(self):
        chain = hand_chain([TRUTH], TWO)
        assert estimand_from_spec(chain, "cate:1").values[0] == -4.0
        assert estimand_from_spec(chain, "pate:closed").backend == "closed_form"
        with pytest.raises(ArgumentError):
            estimand_from_spec(chain, "pate:bogus")
        with pytest.raises(ArgumentError):
            pate_draws(chain, "bb")  # needs an rng
        with pytest.raises(ArgumentError):
            estimand_from_spec(chain, "ite:x")

    def test_export_formats(self, tmp_path):
        chain = hand_chain([TRUTH, TRUTH.replace(beta01=11.0)], TWO)
        est = pate_mc(chain, 10, RngState(0))
        write_estimand_draws(est, tmp_path / "d.csv")
        lines = (tmp_path / "d.csv").read_text().splitlines()
        assert lines[0] == "draw,kind,backend,value"
        assert lines[1].startswith("0,pate,parametric_mc(S=10),")
        write_estimand_summaries([est, cate_draws(chain, 0.0)], tmp_path / "s.csv")
        rows = (tmp_path / "s.csv").read_text().splitlines()
        assert rows[0] == "kind,backend,mean,sd,ci_lo,ci_hi"
        assert rows[2].startswith("cate:0.0,,5.5,")
