#pragma once

#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "kernelnet/error.hpp"

namespace kernelnet {

inline constexpr double pi = std::numbers::pi;

/// Wraps an angle into [-pi, pi].
double wrap_angle(double angle);

class ConnectionKernel;

/// Q(phi) = p for |phi| <= half_width, 0 otherwise.
struct UniformWindow {
  double p;
  double half_width;
};

/// Q(phi) = a_0 + 2 sum_k a_k cos(k phi); coefficients use the two-sided
/// exponential convention, a_{-k} = a_k.
struct CosineSeries {
  std::vector<double> coeffs;
};

/// Q(phi_1, ..., phi_K) = Q_1(phi_1) ... Q_K(phi_K).
struct ProductKernel {
  std::vector<ConnectionKernel> factors;
};

/// Link probability as a function of (wrapped) angular separation.
///
/// Kernels are plain values. Nothing is checked at construction; `validate`
/// reports violations and `NetworkModel` refuses kernels that have any.
class ConnectionKernel {
 public:
  using Variant = std::variant<UniformWindow, CosineSeries, ProductKernel>;

  static ConnectionKernel uniform(double p, double half_width);
  static ConnectionKernel cosine(std::vector<double> coeffs);
  static ConnectionKernel product(std::vector<ConnectionKernel> factors);

  const Variant& variant() const noexcept { return v_; }
  bool is_product() const noexcept;
  const std::vector<ConnectionKernel>& factors() const;

  /// 1 for circle kernels, K for a product of K factors.
  std::size_t dimension() const noexcept;

  /// Q at a 1D angle. Throws DimensionError for product kernels.
  double operator()(double angle) const;
  /// Q at a K-vector of angles.
  double operator()(std::span<const double> angles) const;

  /// Angles in [-pi, pi] where a 1D kernel is discontinuous.
  std::vector<double> breakpoints() const;
  /// Largest |phi| where a 1D kernel can be nonzero (pi when the support is
  /// the whole circle).
  double support_radius() const;
  /// Total variation of a 1D kernel over one period.
  double total_variation() const;

  std::string describe() const;

 private:
  explicit ConnectionKernel(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

/// Number of grid points used to range-check a cosine series.
std::size_t cosine_check_points(std::size_t truncation);

/// Empty when the kernel is usable; otherwise one message per violation.
std::vector<std::string> validate(const ConnectionKernel& kernel);

struct Circle {
  double radius;
};

struct Torus {
  std::vector<double> radii;
};

/// Background space plus kernel. Angles are in radians; arc length is
/// radius * angle, and unit node spacing means n = round(2 pi R).
class NetworkModel {
 public:
  NetworkModel(Circle space, ConnectionKernel kernel);
  NetworkModel(Torus space, ConnectionKernel kernel);

  bool is_torus() const noexcept { return torus_; }
  std::size_t dimension() const noexcept { return radii_.size(); }
  const std::vector<double>& radii() const noexcept { return radii_; }
  double radius() const;
  const ConnectionKernel& kernel() const noexcept { return kernel_; }
  /// Factor i of a torus kernel, or the kernel itself on a circle.
  const ConnectionKernel& factor(std::size_t i) const;

 private:
  std::vector<double> radii_;
  ConnectionKernel kernel_;
  bool torus_;
};

struct MeanDegree {
  double value;
  /// Set when value == 0; clustering normalizes by value^2.
  bool degenerate;
};

/// Mean degree of a 1D kernel on a circle of the given radius.
double mean_degree(const ConnectionKernel& kernel, double radius);
MeanDegree mean_degree(const NetworkModel& model);

}  // namespace kernelnet
