#pragma once

// Direct numerical integration and exact discrete summation of the chain and
// triangle integrals. Nothing here goes through Fourier coefficients, so these
// routines serve as the reference the series engine is tested against.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "kernelnet/kernel.hpp"

namespace kernelnet {

struct IntegrationResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
};

struct QuadOptions {
  /// Relative to the integral of |f|. 1e-9 suits 1D/2D, 1e-6 the tensor grids.
  double tol = 1e-9;
  std::size_t max_evaluations = 50'000'000;
  /// Lower bound on trapezoid points for smooth integrands; raise it above
  /// the highest frequency present to rule out aliasing.
  std::size_t min_trapezoid_points = 32;
};

/// Integrates f over [a, b] with adaptive Gauss-Kronrod panels.
IntegrationResult integrate_interval(const std::function<double(double)>& f, double a, double b,
                                     const QuadOptions& opts = {});

/// Integrates f over one period [-pi, pi]. With breakpoints the interval is
/// split there and each piece gets adaptive Gauss-Kronrod; without them f is
/// taken to be smooth and periodic and the trapezoid rule is refined until
/// converged. Throws NumericalError when the tolerance is not reached.
IntegrationResult integrate_periodic(const std::function<double(double)>& f,
                                     std::span<const double> breakpoints, const QuadOptions& opts = {});

/// Triangle integral R^2 \int\int Q(A,x) Q(x,y) Q(y,A) dx dy for a 1D kernel,
/// with the anchor A at angle `anchor`.
IntegrationResult triangle_integral(const ConnectionKernel& kernel, double radius, double anchor = 0.0,
                                    const QuadOptions& opts = {});

/// Mean clustering: triangle integral over mean_degree^2. On a torus the
/// product integrand factorizes and the 1D triangle integrals are multiplied.
IntegrationResult clustering_quad(const NetworkModel& model, const QuadOptions& opts = {});

/// Expected k-chain integral (k in {1, 2}) from angle 0 to angle b, with or
/// without the exclusion factors. A circle model takes b.size() == 1.
/// Reduced torus chains are factorized; torus chains with exclusion factors
/// fall back to the tensor grid.
IntegrationResult p_chain_quad(const NetworkModel& model, int k, std::span<const double> b,
                               bool with_exclusion, const QuadOptions& opts = {});

/// Options for the fixed-order tensor grids.
struct TensorGridOptions {
  double tol = 1e-6;
  /// Panels wider than this are subdivided.
  double max_panel_width = pi / 2.0;
};

/// Unfactorized 2K-dimensional (K-dimensional for k = 1) tensor-grid
/// integration of the chain integrand, evaluating the product kernel on full
/// angle vectors. Gauss-Legendre panels are split at the kernel breakpoints
/// (and their translates by the outer coordinate); the error estimate is the
/// difference between two rule orders.
IntegrationResult p_chain_tensor(const NetworkModel& model, int k, std::span<const double> b,
                                 bool with_exclusion, const TensorGridOptions& opts = {});

/// Clustering from the unfactorized tensor grid.
IntegrationResult clustering_tensor(const NetworkModel& model, const TensorGridOptions& opts = {});

struct ChainCount {
  double reduced = 0.0;
  /// Only for k in {1, 2}: the sum with the exclusion factors.
  std::optional<double> with_exclusion;
};

/// Exact expected number of simple k-chains (k intermediates, all distinct and
/// distinct from the endpoints) between node 0 and node `offset` of an
/// n-node ring with nodes at angles 2 pi i / n.
ChainCount discrete_chain_count(std::size_t n, const ConnectionKernel& kernel, int k, std::size_t offset,
                                double op_budget = 2e9, unsigned threads = 0);

/// Exact expected degree on the n-node ring: sum over j != 0 of Q(2 pi j / n).
double discrete_mean_degree(std::size_t n, const ConnectionKernel& kernel);

/// Exact pooled clustering of the n-node ring in expectation: expected linked
/// neighbour pairs over expected neighbour pairs of a node.
double discrete_clustering(std::size_t n, const ConnectionKernel& kernel);

/// Node count that gives unit spacing on a circle of radius R.
std::size_t nodes_for_radius(double radius);

}  // namespace kernelnet
