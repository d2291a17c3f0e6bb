import math

import numpy as np
import pytest
from scipy import integrate
from scipy.stats import norm

from gausscauchy.levy import (LevyParams, increment_fisher, increment_logpdf, increment_score,
                              voigt_params)
from gausscauchy.voigt import fisher_information, log_pdf, score


def test_unit_increment_at_zero():
    assert increment_logpdf(0.0, LevyParams(1, 1, 1)) == pytest.approx(
        math.log(0.20870928052036772), rel=1e-15)


def test_small_theta_gaussian_limit():
    p = LevyParams(0.8, 1e-9, 0.5)
    x = np.array([0.0, 0.3, -1.0])
    assert np.allclose(increment_logpdf(x, p), norm.logpdf(x, scale=0.8 * math.sqrt(0.5)),
                       atol=1e-7)


def test_scale_map():
    x = np.linspace(-3, 3, 13)
    d = 0.3
    assert np.array_equal(increment_logpdf(x, LevyParams(1.2, -0.7, 4 * d)),
                          log_pdf(x, (0.0, 2 * 1.2 * math.sqrt(d), 4 * 0.7 * d)))


def test_score_by_differences_and_sign():
    gen = np.random.default_rng(0)
    for _ in range(40):
        s, th, d = 10 ** gen.uniform(-1, 1), gen.choice([-1, 1]) * 10 ** gen.uniform(-1, 1), 10 ** gen.uniform(-2, 1)
        x = gen.normal() * (s * math.sqrt(d) + abs(th) * d) * 3
        sc = increment_score(x, LevyParams(s, th, d))
        hs, ht = 1e-6 * s, 1e-6 * abs(th)
        fd_s = (increment_logpdf(x, LevyParams(s + hs, th, d)) - increment_logpdf(x, LevyParams(s - hs, th, d))) / (2 * hs)
        fd_t = (increment_logpdf(x, LevyParams(s, th + ht, d)) - increment_logpdf(x, LevyParams(s, th - ht, d))) / (2 * ht)
        assert sc.d_sigma == pytest.approx(fd_s, rel=1e-5, abs=1e-8)
        assert sc.d_theta == pytest.approx(fd_t, rel=1e-5, abs=1e-8)
    # a tiny Cauchy scale lowers the centre density
    assert increment_score(0.0, LevyParams(1.0, 0.01, 1.0)).d_theta < 0


def test_homogeneity_pull_back():
    p = LevyParams(0.9, 0.4, 0.25)
    v = voigt_params(p)
    for x in (-2.0, 0.1, 5.0):
        s = score(x, v)
        lhs = p.delta * p.theta_levy * s.s_gamma + math.sqrt(p.delta) * p.sigma_bm * s.s_sigma - x * s.s_mu
        assert lhs == pytest.approx(-1.0, abs=1e-10)


def test_fisher_positive_definite_and_chain_rule():
    for s in (0.5, 1.0, 2.0):
        for th in (-1.0, 0.2, 3.0):
            for d in (1e-3, 0.1, 1.0):
                p = LevyParams(s, th, d)
                info = increment_fisher(p)
                assert np.all(np.linalg.eigvalsh(info) > 0)
                iv = fisher_information(voigt_params(p)).matrix
                assert info[0, 0] == pytest.approx(d * iv[1, 1], rel=1e-12)


def test_fisher_against_direct_quadrature_and_monotone_in_delta():
    deltas = np.logspace(-3, 0, 7)
    entries = []
    for d in deltas:
        p = LevyParams(1.0, 1.0, d)
        info = increment_fisher(p)
        v = voigt_params(p)
        sc = math.hypot(v.sigma, v.gamma)

        def outer(u, i, j):
            x = sc * math.tan(math.pi * u / 2)
            jac = sc * math.pi / 2 / math.cos(math.pi * u / 2) ** 2
            g = increment_score(x, p)
            vec = (g.d_sigma, g.d_theta)
            return vec[i] * vec[j] * math.exp(increment_logpdf(x, p)) * jac

        for i, j in ((0, 0), (0, 1), (1, 1)):
            direct = integrate.quad(outer, -1, 1, args=(i, j), limit=400, points=[0.0],
                                    epsabs=1e-12, epsrel=1e-9)[0]
            assert info[i, j] == pytest.approx(direct, rel=1e-6)
        entries.append(info)
    entries = np.array(entries)
    # sigma-sigma information falls with delta (Gaussian part is O(1), Cauchy share grows)
    assert np.all(np.isfinite(entries))
    assert np.all(np.diff(entries[:, 0, 0]) < 0)


def test_adapters_reproduce_voigt_on_random_cases():
    gen = np.random.default_rng(9)
    for _ in range(100):
        p = LevyParams(10 ** gen.uniform(-1, 1), gen.choice([-1, 1]) * 10 ** gen.uniform(-1, 1),
                       10 ** gen.uniform(-3, 1))
        x = gen.normal() * 3
        v = voigt_params(p)
        assert increment_logpdf(x, p) == log_pdf(x, v)
        s, sv = increment_score(x, p), score(x, v)
        assert s.d_sigma == math.sqrt(p.delta) * sv.s_sigma
        assert s.d_theta == math.copysign(p.delta, p.theta_levy) * sv.s_gamma


def test_validation():
    with pytest.raises(ValueError):
        LevyParams(1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        LevyParams(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        LevyParams(1.0, 1.0, -1.0)
