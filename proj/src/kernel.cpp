#include "kernelnet/kernel.hpp"

#include <cmath>
#include <sstream>

namespace kernelnet {

namespace {

// Half-widths a hair above pi (e.g. a rounded "3.14159265359" in a config)
// are treated as the full circle.
constexpr double kHalfWidthSlack = 1e-12;
constexpr double kRangeTolerance = 1e-9;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double eval_cosine(const std::vector<double>& a, double angle) {
  double sum = 0.0;
  for (std::size_t k = a.size(); k-- > 1;) sum += a[k] * std::cos(static_cast<double>(k) * angle);
  return a.empty() ? 0.0 : a[0] + 2.0 * sum;
}

}  // namespace

double wrap_angle(double angle) {
  return std::remainder(angle, 2.0 * pi);
}

ConnectionKernel ConnectionKernel::uniform(double p, double half_width) {
  return ConnectionKernel(UniformWindow{p, half_width});
}

ConnectionKernel ConnectionKernel::cosine(std::vector<double> coeffs) {
  return ConnectionKernel(CosineSeries{std::move(coeffs)});
}

ConnectionKernel ConnectionKernel::product(std::vector<ConnectionKernel> factors) {
  return ConnectionKernel(ProductKernel{std::move(factors)});
}

bool ConnectionKernel::is_product() const noexcept {
  return std::holds_alternative<ProductKernel>(v_);
}

const std::vector<ConnectionKernel>& ConnectionKernel::factors() const {
  if (!is_product()) throw DimensionError("kernel is not a product kernel");
  return std::get<ProductKernel>(v_).factors;
}

std::size_t ConnectionKernel::dimension() const noexcept {
  if (const auto* prod = std::get_if<ProductKernel>(&v_)) return prod->factors.size();
  return 1;
}

double ConnectionKernel::operator()(double angle) const {
  const double phi = std::abs(wrap_angle(angle));
  return std::visit(
      overloaded{
          [&](const UniformWindow& u) { return phi <= u.half_width ? u.p : 0.0; },
          [&](const CosineSeries& c) { return eval_cosine(c.coeffs, phi); },
          [&](const ProductKernel& prod) -> double {
            if (prod.factors.size() != 1)
              throw DimensionError("scalar angle passed to a " +
                                   std::to_string(prod.factors.size()) + "-dimensional kernel");
            return prod.factors[0](angle);
          },
      },
      v_);
}

double ConnectionKernel::operator()(std::span<const double> angles) const {
  if (angles.size() != dimension())
    throw DimensionError("angle vector has " + std::to_string(angles.size()) +
                         " components, kernel has dimension " + std::to_string(dimension()));
  if (const auto* prod = std::get_if<ProductKernel>(&v_)) {
    double q = 1.0;
    for (std::size_t i = 0; i < angles.size(); ++i) q *= prod->factors[i](angles[i]);
    return q;
  }
  return (*this)(angles[0]);
}

std::vector<double> ConnectionKernel::breakpoints() const {
  return std::visit(
      overloaded{
          [](const UniformWindow& u) {
            if (u.half_width < pi) return std::vector<double>{-u.half_width, u.half_width};
            return std::vector<double>{};
          },
          [](const CosineSeries&) { return std::vector<double>{}; },
          [](const ProductKernel&) -> std::vector<double> {
            throw DimensionError("breakpoints() is defined for 1D kernels only");
          },
      },
      v_);
}

double ConnectionKernel::support_radius() const {
  return std::visit(
      overloaded{
          [](const UniformWindow& u) { return std::min(u.half_width, pi); },
          [](const CosineSeries&) { return pi; },
          [](const ProductKernel&) -> double {
            throw DimensionError("support_radius() is defined for 1D kernels only");
          },
      },
      v_);
}

double ConnectionKernel::total_variation() const {
  return std::visit(
      overloaded{
          [](const UniformWindow& u) { return u.half_width < pi ? 2.0 * std::abs(u.p) : 0.0; },
          [](const CosineSeries& c) {
            const std::size_t m = c.coeffs.empty() ? 0 : c.coeffs.size() - 1;
            const std::size_t n = 4 * cosine_check_points(m);
            double tv = 0.0;
            double prev = eval_cosine(c.coeffs, 0.0);
            for (std::size_t i = 1; i <= n; ++i) {
              const double cur = eval_cosine(c.coeffs, pi * static_cast<double>(i) / n);
              tv += std::abs(cur - prev);
              prev = cur;
            }
            return 2.0 * tv;
          },
          [](const ProductKernel&) -> double {
            throw DimensionError("total_variation() is defined for 1D kernels only");
          },
      },
      v_);
}

std::string ConnectionKernel::describe() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const UniformWindow& u) {
                   os << "uniform(p=" << u.p << ", phi=" << u.half_width << ")";
                 },
                 [&](const CosineSeries& c) { os << "cosine(M=" << (c.coeffs.size() ? c.coeffs.size() - 1 : 0) << ")"; },
                 [&](const ProductKernel& prod) {
                   os << "product[";
                   for (std::size_t i = 0; i < prod.factors.size(); ++i)
                     os << (i ? ", " : "") << prod.factors[i].describe();
                   os << "]";
                 },
             },
             v_);
  return os.str();
}

std::size_t cosine_check_points(std::size_t truncation) { return 4 * truncation + 64; }

std::vector<std::string> validate(const ConnectionKernel& kernel) {
  std::vector<std::string> out;
  std::visit(
      overloaded{
          [&](const UniformWindow& u) {
            if (!(u.p >= 0.0 && u.p <= 1.0)) out.push_back("p out of [0,1]");
            if (!(u.half_width > 0.0))
              out.push_back("phi out of (0, pi]: mean degree is zero");
            else if (!(u.half_width <= pi + kHalfWidthSlack))
              out.push_back("phi out of (0, pi]");
          },
          [&](const CosineSeries& c) {
            if (c.coeffs.empty()) {
              out.push_back("cosine series has no coefficients");
              return;
            }
            for (double a : c.coeffs) {
              if (!std::isfinite(a)) {
                out.push_back("non-finite coefficient");
                return;
              }
            }
            const std::size_t n = cosine_check_points(c.coeffs.size() - 1);
            double lo = 1.0, hi = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
              const double q = eval_cosine(c.coeffs, -pi + 2.0 * pi * static_cast<double>(i) / n);
              lo = std::min(lo, q);
              hi = std::max(hi, q);
            }
            if (lo < -kRangeTolerance) out.push_back("negative probability (min " + std::to_string(lo) + ")");
            if (hi > 1.0 + kRangeTolerance) out.push_back("probability above 1 (max " + std::to_string(hi) + ")");
          },
          [&](const ProductKernel& prod) {
            if (prod.factors.empty()) out.push_back("product kernel has no factors");
            for (std::size_t i = 0; i < prod.factors.size(); ++i) {
              if (prod.factors[i].is_product()) {
                out.push_back("factor " + std::to_string(i) + ": nested product kernel");
                continue;
              }
              for (auto& v : validate(prod.factors[i]))
                out.push_back("factor " + std::to_string(i) + ": " + v);
            }
          },
      },
      kernel.variant());
  return out;
}

namespace {

void throw_if_invalid(const ConnectionKernel& kernel) {
  const auto violations = validate(kernel);
  if (violations.empty()) return;
  std::string msg = "invalid kernel " + kernel.describe() + ":";
  for (const auto& v : violations) msg += " " + v + ";";
  throw ConfigError(msg);
}

void check_radius(double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("radius must be a positive finite number");
}

}  // namespace

NetworkModel::NetworkModel(Circle space, ConnectionKernel kernel)
    : radii_{space.radius}, kernel_(std::move(kernel)), torus_(false) {
  check_radius(space.radius);
  if (kernel_.is_product())
    throw DimensionError("circle model needs a 1D kernel, got " + kernel_.describe());
  throw_if_invalid(kernel_);
}

NetworkModel::NetworkModel(Torus space, ConnectionKernel kernel)
    : radii_(std::move(space.radii)), kernel_(std::move(kernel)), torus_(true) {
  if (radii_.empty()) throw ConfigError("torus needs at least one radius");
  for (double r : radii_) check_radius(r);
  if (!kernel_.is_product() || kernel_.dimension() != radii_.size())
    throw DimensionError("torus of dimension " + std::to_string(radii_.size()) +
                         " needs a product kernel with as many factors, got " + kernel_.describe());
  throw_if_invalid(kernel_);
}

double NetworkModel::radius() const {
  if (torus_) throw DimensionError("torus model has per-dimension radii");
  return radii_[0];
}

const ConnectionKernel& NetworkModel::factor(std::size_t i) const {
  if (!torus_) {
    if (i != 0) throw DimensionError("circle model has a single kernel");
    return kernel_;
  }
  return kernel_.factors().at(i);
}

double mean_degree(const ConnectionKernel& kernel, double radius) {
  return std::visit(
      overloaded{
          [&](const UniformWindow& u) { return 2.0 * radius * u.p * std::min(u.half_width, pi); },
          [&](const CosineSeries& c) { return 2.0 * pi * radius * (c.coeffs.empty() ? 0.0 : c.coeffs[0]); },
          [](const ProductKernel&) -> double {
            throw DimensionError("product kernel needs one radius per factor");
          },
      },
      kernel.variant());
}

MeanDegree mean_degree(const NetworkModel& model) {
  double n = 1.0;
  for (std::size_t i = 0; i < model.dimension(); ++i) n *= mean_degree(model.factor(i), model.radii()[i]);
  return {n, n == 0.0};
}

}  // namespace kernelnet
