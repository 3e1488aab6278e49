#include <doctest.h>

#include <cmath>

#include "kernelnet/fourier.hpp"
#include "kernelnet/quadrature.hpp"
#include "oracles.hpp"

using namespace kernelnet;

TEST_CASE("periodic integration basics") {
  CHECK(integrate_periodic([](double) { return 0.7; }, {}).value == doctest::Approx(2.0 * pi * 0.7).epsilon(1e-14));
  const auto q = ConnectionKernel::uniform(0.3, 1.2);
  const auto r = integrate_periodic([&](double x) { return q(x); }, q.breakpoints());
  CHECK(r.value == doctest::Approx(2.0 * 0.3 * 1.2).epsilon(1e-13));
  CHECK(r.evaluations > 0);
  CHECK(r.error_estimate >= 0.0);
  for (int n : {1, 3, 10}) {
    const auto c = integrate_periodic([&](double x) { return std::cos(n * x); }, {});
    CHECK(std::abs(c.value) < 1e-12);
  }
  // A kink the caller did not announce still converges adaptively.
  const std::vector<double> none_announced{0.0};
  const auto kink = integrate_periodic([](double x) { return std::abs(x - 1.0); }, none_announced);
  CHECK(kink.value == doctest::Approx(0.5 * (pi + 1) * (pi + 1) + 0.5 * (pi - 1) * (pi - 1)).epsilon(1e-9));
}

TEST_CASE("integration failure is reported") {
  QuadOptions tight{1e-15};
  tight.max_evaluations = 40;
  CHECK_THROWS_AS(integrate_periodic([](double x) { return std::exp(std::sin(40 * x)); }, {}, tight), NumericalError);
}

TEST_CASE("clustering quadrature") {
  SUBCASE("full circle window gives p") {
    for (double p : {0.01, 0.3, 1.0}) {
      const auto m = NetworkModel(Circle{12.0}, ConnectionKernel::uniform(p, pi));
      CHECK(clustering_quad(m).value == doctest::Approx(p).epsilon(1e-12));
    }
  }
  SUBCASE("plateau value at phi = 1") {
    // The uniform-window series is exactly 3/4 p for phi <= 2 pi / 3.
    const auto m = NetworkModel(Circle{20.0}, ConnectionKernel::uniform(0.1, 1.0));
    CHECK(clustering_quad(m).value == doctest::Approx(0.075).epsilon(1e-10));
    CHECK(clustering_quad(m).value ==
          doctest::Approx(0.1 * oracle::clustering_ratio_series(1.0, 200000)).epsilon(1e-8));
  }
  SUBCASE("homogeneous of degree one in the kernel scale") {
    const auto a = clustering_quad(NetworkModel(Circle{5.0}, ConnectionKernel::cosine({0.2, 0.08, 0.03})));
    const auto b = clustering_quad(NetworkModel(Circle{5.0}, ConnectionKernel::cosine({0.1, 0.04, 0.015})));
    CHECK(b.value == doctest::Approx(0.5 * a.value).epsilon(1e-10));
  }
  SUBCASE("anchor rotation leaves the triangle integral unchanged") {
    const auto q = ConnectionKernel::uniform(0.4, 2.3);
    const double base = triangle_integral(q, 3.0, 0.0).value;
    for (double a : {0.37, -1.9, 3.0}) CHECK(triangle_integral(q, 3.0, a).value == doctest::Approx(base).epsilon(1e-9));
  }
  SUBCASE("zero mean degree is an error") {
    CHECK_THROWS_AS(clustering_quad(NetworkModel(Circle{5.0}, ConnectionKernel::uniform(0.0, 1.0))), ConfigError);
  }
}

TEST_CASE("chain quadrature") {
  const double b[] = {0.8};
  SUBCASE("zero kernel") {
    const auto m = NetworkModel(Circle{5.0}, ConnectionKernel::uniform(0.0, 1.0));
    CHECK(p_chain_quad(m, 2, b, false).value == 0.0);
  }
  SUBCASE("reduced k=1 is the window overlap") {
    // R p^2 (2 Phi - b) for b < 2 Phi.
    const auto m = NetworkModel(Circle{20.0}, ConnectionKernel::uniform(0.05, 0.5));
    CHECK(p_chain_quad(m, 1, b, false).value == doctest::Approx(20.0 * 0.0025 * (1.0 - 0.8)).epsilon(1e-12));
  }
  SUBCASE("reduced k=2 agrees with the leading series") {
    for (double phi : {0.5, 1.3}) {
      const auto m = NetworkModel(Circle{20.0}, ConnectionKernel::uniform(0.05, phi));
      const auto quad = p_chain_quad(m, 2, b, false);
      const auto series = p_sep_leading(coeffs_uniform(0.05, phi, 8192), 20.0, 2, b[0]);
      CHECK(std::abs(quad.value - series.value) <= series.error + quad.error_estimate + 1e-12);
    }
  }
  SUBCASE("exclusion factors never increase the chain value") {
    for (double p : {0.05, 0.3, 0.9}) {
      const auto m = NetworkModel(Circle{4.0}, ConnectionKernel::uniform(p, 1.1));
      for (int k : {1, 2}) {
        const double bb[] = {0.3};
        CHECK(p_chain_quad(m, k, bb, true).value <= p_chain_quad(m, k, bb, false).value + 1e-12);
      }
    }
  }
  SUBCASE("full and reduced converge as p -> 0") {
    const double bb[] = {0.3};
    double prev_gap = 1.0;
    for (double p : {0.2, 0.02, 0.002}) {
      const auto m = NetworkModel(Circle{4.0}, ConnectionKernel::uniform(p, 1.1));
      const double red = p_chain_quad(m, 2, bb, false).value;
      const double gap = (red - p_chain_quad(m, 2, bb, true).value) / red;
      CHECK(gap < prev_gap);
      prev_gap = gap;
    }
    CHECK(prev_gap < 0.01);
  }
  SUBCASE("k outside {1, 2}") {
    const auto m = NetworkModel(Circle{4.0}, ConnectionKernel::uniform(0.1, 1.1));
    CHECK_THROWS_AS(p_chain_quad(m, 3, b, false), ConfigError);
  }
}

TEST_CASE("torus: factorized and tensor-grid quadrature agree") {
  const auto m = NetworkModel(Torus{{6.0, 9.0}}, ConnectionKernel::product({ConnectionKernel::uniform(0.3, 0.9),
                                                                           ConnectionKernel::uniform(0.5, 0.6)}));
  CHECK(clustering_tensor(m).value == doctest::Approx(clustering_quad(m).value).epsilon(1e-9));
  const double b[] = {0.4, 0.7};
  for (int k : {1, 2})
    CHECK(p_chain_tensor(m, k, b, false).value == doctest::Approx(p_chain_quad(m, k, b, false).value).epsilon(1e-9));
  // Exclusion factors do not factorize; quadrature falls back to the grid.
  CHECK(p_chain_quad(m, 2, b, true).value < p_chain_quad(m, 2, b, false).value);
}

TEST_CASE("discrete chain counts") {
  SUBCASE("zero kernel") {
    const auto r = discrete_chain_count(16, ConnectionKernel::uniform(0.0, 1.0), 2, 3);
    CHECK(r.reduced == 0.0);
  }
  SUBCASE("n = 4, constant kernel, one intermediate") {
    const double p = 0.3;
    const auto r = discrete_chain_count(4, ConnectionKernel::uniform(p, pi), 1, 2);
    CHECK(r.with_exclusion.value() == doctest::Approx(2 * p * p * (1 - p)).epsilon(1e-15));
    CHECK(r.reduced == doctest::Approx(2 * p * p).epsilon(1e-15));
  }
  SUBCASE("constant kernel counts ordered distinct intermediates") {
    const double p = 0.2;
    const std::size_t n = 9;
    const auto q = ConnectionKernel::uniform(p, pi);
    CHECK(discrete_chain_count(n, q, 2, 4).reduced == doctest::Approx((n - 2) * (n - 3) * std::pow(p, 3)));
    CHECK(discrete_chain_count(n, q, 3, 4).reduced == doctest::Approx((n - 2) * (n - 3) * (n - 4) * std::pow(p, 4)));
  }
  SUBCASE("discrete k=2 approaches the continuum integral as R grows") {
    // Relative gap shrinks like 1 / (Phi R).
    double prev = 1.0;
    for (double R : {20.0, 80.0, 320.0}) {
      const std::size_t n = nodes_for_radius(R);
      const auto q = ConnectionKernel::uniform(0.05, 0.5);
      const std::size_t off = static_cast<std::size_t>(std::llround(0.6 * n / (2 * pi)));
      const double b[] = {2 * pi * off / static_cast<double>(n)};
      const double cont = p_chain_quad(NetworkModel(Circle{n / (2 * pi)}, q), 2, b, false).value;
      const double gap = std::abs(discrete_chain_count(n, q, 2, off).reduced - cont) / cont;
      CHECK(gap < 2.5 / (0.5 * R));
      CHECK(gap < prev);
      prev = gap;
    }
  }
  SUBCASE("cost guard and argument checks") {
    CHECK_THROWS_AS(discrete_chain_count(5000, ConnectionKernel::uniform(0.1, 0.1), 3, 10), NumericalError);
    CHECK_THROWS_AS(discrete_chain_count(2, ConnectionKernel::uniform(0.1, 0.1), 1, 1), ConfigError);
    CHECK_THROWS_AS(discrete_chain_count(10, ConnectionKernel::uniform(0.1, 0.1), 1, 0), ConfigError);
  }
}

TEST_CASE("discrete ring helpers") {
  const auto q = ConnectionKernel::uniform(0.1, 0.5);
  // floor(0.5 * 4096 / (2 pi)) = 325 nodes on each side
  CHECK(discrete_mean_degree(4096, q) == doctest::Approx(0.1 * 650).epsilon(1e-12));
  // pooled ratio 3 (W - 1) / (2 (2W - 1)) times p, counted by hand
  CHECK(discrete_clustering(4096, q) == doctest::Approx(0.1 * 3.0 * 324 / (2.0 * 649)).epsilon(1e-12));
  CHECK(nodes_for_radius(20.0) == 126);
}
