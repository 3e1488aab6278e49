import math

import pytest

import kernelnet as kn


def test_kernel_evaluation_and_validation():
    q = kn.Kernel.uniform(0.3, 1.0)
    assert q(0.5) == 0.3
    assert q(2.0) == 0.0
    assert q(-0.5) == q(0.5)
    assert kn.Kernel.uniform(0.5, math.pi).validate() == []
    assert any("p out of [0,1]" in v for v in kn.Kernel.uniform(1.2, 1.0).validate())


def test_mean_degree_circle_and_torus():
    assert kn.mean_degree(kn.Kernel.uniform(0.1, 0.5), 10.0) == pytest.approx(1.0)
    q = kn.Kernel.product([kn.Kernel.uniform(0.3, 0.7), kn.Kernel.uniform(0.6, 1.9)])
    assert kn.mean_degree(q, [8.0, 5.0]) == pytest.approx((2 * 8 * 0.3 * 0.7) * (2 * 5 * 0.6 * 1.9))


def test_clustering_routes_agree():
    closed, _ = kn.clustering_closed(0.1, 1.0)
    quad, _ = kn.clustering_quad(kn.Kernel.uniform(0.1, 1.0), 20.0)
    lead, _ = kn.clustering_series(kn.Kernel.uniform(0.1, 1.0), 20.0)
    assert closed == pytest.approx(0.075, abs=1e-9)
    assert quad == pytest.approx(closed, rel=1e-8)
    assert lead == pytest.approx(closed, rel=1e-6)
    assert kn.clustering_closed(0.4, math.pi)[0] == pytest.approx(0.4, abs=1e-12)


def test_separation_and_discrete_sums():
    q = kn.Kernel.uniform(0.05, 0.5)
    lead, err = kn.p_sep_leading(q, 20.0, 1, 0.3)
    assert abs(lead - 20.0 * 0.05**2 * (1.0 - 0.3)) <= err
    quad, _ = kn.p_chain_quad(q, 20.0, 1, 0.3)
    assert quad == pytest.approx(20.0 * 0.05**2 * 0.7, rel=1e-10)
    reduced, excl = kn.discrete_chain_count(4, kn.Kernel.uniform(0.3, math.pi), 1, 2)
    assert excl == pytest.approx(2 * 0.09 * 0.7)
    _, _, normalized = kn.p_k_pi(0.1, math.pi, 1.0, 4)
    assert normalized == pytest.approx(0.1 / math.pi)


def test_monte_carlo():
    q = kn.Kernel.uniform(0.5, 0.2)
    mean, se, trials = kn.mc_mean_degree(256, q, 300, seed=3)
    assert trials == 300
    assert abs(mean - kn.discrete_mean_degree(256, q)) <= 4 * se
    adj = kn.sample_graph(64, kn.Kernel.uniform(1.0, math.pi), 1)
    assert all(len(nb) == 63 for nb in adj)
    c, _, _ = kn.mc_clustering(50, kn.Kernel.uniform(1.0, math.pi), 2)
    assert c == 1.0
    bins, unreached = kn.mc_separation_histogram(64, kn.Kernel.uniform(0.0, 1.0), 5, 10)
    assert unreached[0] == 1.0


def test_errors_map_to_python():
    with pytest.raises(kn.ConfigError):
        kn.clustering_quad(kn.Kernel.uniform(0.0, 1.0), 5.0)
    with pytest.raises(ValueError):
        kn.mean_degree(kn.Kernel.uniform(0.1, 1.0), [5.0, 5.0])


def test_cli_entry_point():
    code, out, err = kn.run_cli(["clustering", "--phi", "0"])
    assert code == 2
    assert "mean degree is zero" in err
    code, out, _ = kn.run_cli(["clustering", "--modes", "closed"])
    assert code == 0
    assert out.startswith("# kernelnet 1.0.0")
