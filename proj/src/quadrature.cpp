#include "kernelnet/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "kernelnet/parallel.hpp"

namespace kernelnet {

namespace {

constexpr double kBreakpointMerge = 1e-13;

// Sorted, de-duplicated panel edges over [-pi, pi].
std::vector<double> panel_edges(std::span<const double> breakpoints, double max_width = 2.0 * pi) {
  std::vector<double> pts{-pi, pi};
  for (double b : breakpoints) {
    const double w = wrap_angle(b);
    if (w > -pi + kBreakpointMerge && w < pi - kBreakpointMerge) pts.push_back(w);
  }
  std::sort(pts.begin(), pts.end());
  std::vector<double> edges;
  for (double x : pts)
    if (edges.empty() || x - edges.back() > kBreakpointMerge) edges.push_back(x);
  edges.back() = pi;
  std::vector<double> out{edges.front()};
  for (std::size_t i = 1; i < edges.size(); ++i) {
    const double a = out.back(), b = edges[i];
    const auto pieces = static_cast<std::size_t>(std::ceil((b - a) / max_width - 1e-12));
    for (std::size_t j = 1; j < pieces; ++j) out.push_back(a + (b - a) * static_cast<double>(j) / pieces);
    out.push_back(b);
  }
  return out;
}

std::vector<double> shifted(std::span<const double> base, double by) {
  std::vector<double> out;
  out.reserve(base.size());
  for (double b : base) out.push_back(b + by);
  return out;
}

void append(std::vector<double>& to, const std::vector<double>& from) { to.insert(to.end(), from.begin(), from.end()); }

// Differences beta_j - beta_i shifted by `by`: points where two translated
// breakpoint families collide (i == j gives `by` itself).
std::vector<double> collisions(std::span<const double> beta, double by) {
  std::vector<double> out;
  for (double bj : beta)
    for (double bi : beta) out.push_back(by + bj - bi);
  return out;
}

// Integrates over one period, tracking the largest error any nested inner
// integral reported so it can be folded into the outer estimate.
struct Nested {
  const QuadOptions& opts;
  std::size_t evaluations = 0;
  double inner_error = 0.0;

  double inner(const std::function<double(double)>& f, std::span<const double> bps) {
    const auto r = integrate_periodic(f, bps, opts);
    evaluations += r.evaluations;
    inner_error = std::max(inner_error, r.error_estimate);
    return r.value;
  }

  IntegrationResult outer(const std::function<double(double)>& f, std::span<const double> bps, double scale) {
    auto r = integrate_periodic(f, bps, opts);
    r.evaluations += evaluations;
    r.value *= scale;
    r.error_estimate = scale * (r.error_estimate + 2.0 * pi * inner_error);
    return r;
  }
};

IntegrationResult chain_1d(const ConnectionKernel& q, double radius, int k, double a, double b, bool excl,
                           const QuadOptions& opts) {
  const auto beta = q.breakpoints();
  const bool smooth = beta.empty();
  const double end_factor = excl ? 1.0 - q(b - a) : 1.0;

  if (k == 1) {
    std::vector<double> bps;
    if (!smooth) {
      append(bps, shifted(beta, a));
      append(bps, shifted(beta, b));
    }
    auto r = integrate_periodic([&](double x) { return q(x - a) * q(b - x); }, bps, opts);
    r.value *= radius * end_factor;
    r.error_estimate *= radius * std::abs(end_factor);
    return r;
  }

  Nested nest{opts};
  std::vector<double> outer_bps;
  if (!smooth) {
    append(outer_bps, shifted(beta, a));
    append(outer_bps, shifted(beta, b));
    append(outer_bps, collisions(beta, a));
    append(outer_bps, collisions(beta, b));
  }
  auto outer = [&](double x) {
    const double qx = q(x - a);
    if (qx == 0.0) return 0.0;
    const double xb = excl ? 1.0 - q(b - x) : 1.0;
    if (xb == 0.0) return 0.0;
    std::vector<double> bps;
    if (!smooth) {
      append(bps, shifted(beta, x));
      append(bps, shifted(beta, b));
      if (excl) append(bps, shifted(beta, a));
    }
    const double in = nest.inner(
        [&](double y) {
          const double v = q(y - x) * q(b - y);
          return excl ? v * (1.0 - q(y - a)) : v;
        },
        bps);
    return qx * xb * in;
  };
  auto r = nest.outer(outer, outer_bps, radius * radius * end_factor);
  r.error_estimate = std::abs(r.error_estimate);
  return r;
}

void check_k(int k) {
  if (k != 1 && k != 2) throw ConfigError("chain quadrature supports k in {1, 2}, got " + std::to_string(k));
}

void check_b(const NetworkModel& model, std::span<const double> b) {
  if (b.size() != model.dimension())
    throw DimensionError("separation vector has " + std::to_string(b.size()) + " components, model has dimension " +
                         std::to_string(model.dimension()));
}

IntegrationResult product_of(const std::vector<IntegrationResult>& parts) {
  IntegrationResult out{1.0, 0.0, 0};
  double rel = 0.0;
  for (const auto& p : parts) {
    out.value *= p.value;
    out.evaluations += p.evaluations;
    rel += p.value != 0.0 ? p.error_estimate / std::abs(p.value) : 0.0;
  }
  out.error_estimate = std::abs(out.value) * rel;
  return out;
}

// ----- tensor grid -----

struct Rule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

template <unsigned N>
Rule gauss_rule() {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  Rule r;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) {
      r.nodes.push_back(0.0);
      r.weights.push_back(w[i]);
    } else {
      r.nodes.push_back(-x[i]);
      r.weights.push_back(w[i]);
      r.nodes.push_back(x[i]);
      r.weights.push_back(w[i]);
    }
  }
  return r;
}

class TensorChain {
 public:
  TensorChain(const NetworkModel& model, int k, std::span<const double> b, bool excl, const TensorGridOptions& opts)
      : model_(model), k_(k), b_(b.begin(), b.end()), excl_(excl), opts_(opts), dim_(model.dimension()) {
    for (std::size_t i = 0; i < dim_; ++i) beta_.push_back(model.factor(i).breakpoints());
  }

  double run(const Rule& rule) {
    rule_ = &rule;
    coords_.assign(k_ * dim_, 0.0);
    evaluations_ = 0;
    double scale = 1.0;
    for (double r : model_.radii()) scale *= std::pow(r, k_);
    return scale * level(0);
  }

  std::size_t evaluations() const { return evaluations_; }

 private:
  double integrand() {
    ++evaluations_;
    const auto& q = model_.kernel();
    std::span<const double> x(coords_.data(), dim_);
    std::vector<double> tmp(dim_);
    auto Q = [&](auto&& fill) {
      for (std::size_t i = 0; i < dim_; ++i) tmp[i] = fill(i);
      return q(std::span<const double>(tmp));
    };
    const double end = excl_ ? 1.0 - Q([&](std::size_t i) { return b_[i]; }) : 1.0;
    if (k_ == 1) return Q([&](std::size_t i) { return x[i]; }) * Q([&](std::size_t i) { return b_[i] - x[i]; }) * end;
    std::span<const double> y(coords_.data() + dim_, dim_);
    double v = Q([&](std::size_t i) { return x[i]; }) * Q([&](std::size_t i) { return y[i] - x[i]; }) *
               Q([&](std::size_t i) { return b_[i] - y[i]; });
    if (excl_) {
      v *= (1.0 - Q([&](std::size_t i) { return y[i]; })) * (1.0 - Q([&](std::size_t i) { return b_[i] - x[i]; }));
      v *= end;
    }
    return v;
  }

  std::vector<double> breakpoints_for(std::size_t lvl) const {
    const std::size_t i = lvl % dim_;
    const auto& beta = beta_[i];
    std::vector<double> bps;
    if (beta.empty()) return bps;
    if (lvl < dim_) {
      append(bps, beta);
      append(bps, shifted(beta, b_[i]));
      append(bps, collisions(beta, 0.0));
      append(bps, collisions(beta, b_[i]));
    } else {
      append(bps, shifted(beta, coords_[i]));
      append(bps, shifted(beta, b_[i]));
      append(bps, beta);
    }
    return bps;
  }

  // The integrand carries one kernel factor per chain link; once the factor
  // fixed by this coordinate is zero, the whole subtree is.
  bool vanishes(std::size_t lvl) const {
    const std::size_t i = lvl % dim_;
    const auto& f = model_.factor(i);
    if (lvl < dim_) {
      if (f(coords_[i]) == 0.0) return true;
      return k_ == 1 && f(b_[i] - coords_[i]) == 0.0;
    }
    return f(coords_[lvl] - coords_[i]) == 0.0 || f(b_[i] - coords_[lvl]) == 0.0;
  }

  double level(std::size_t lvl) {
    if (lvl == coords_.size()) return integrand();
    const auto edges = panel_edges(breakpoints_for(lvl), opts_.max_panel_width);
    double sum = 0.0;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
      const double half = 0.5 * (edges[p + 1] - edges[p]);
      const double mid = 0.5 * (edges[p + 1] + edges[p]);
      double panel = 0.0;
      for (std::size_t j = 0; j < rule_->nodes.size(); ++j) {
        coords_[lvl] = mid + half * rule_->nodes[j];
        if (vanishes(lvl)) continue;
        panel += rule_->weights[j] * level(lvl + 1);
      }
      sum += half * panel;
    }
    return sum;
  }

  const NetworkModel& model_;
  int k_;
  std::vector<double> b_;
  bool excl_;
  TensorGridOptions opts_;
  std::size_t dim_;
  std::vector<std::vector<double>> beta_;
  std::vector<double> coords_;
  const Rule* rule_ = nullptr;
  std::size_t evaluations_ = 0;
};

}  // namespace

IntegrationResult integrate_interval(const std::function<double(double)>& f, double a, double b,
                                     const QuadOptions& opts) {
  // Global adaptive Gauss-Kronrod 7/15: always bisect the panel with the
  // largest error until the total meets tol relative to \int |f|.
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  struct Panel {
    double a, b, value, error, l1;
    bool operator<(const Panel& o) const { return error < o.error; }
  };
  IntegrationResult r;
  const auto& x = GK::abscissa();  // x[0] = 0; Gauss nodes at even indices
  const auto& wk = GK::weights();
  const auto& wg = boost::math::quadrature::gauss<double, 7>::weights();
  auto rule = [&](double lo, double hi) {
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    const double f0 = f(c);
    double k = wk[0] * f0, g = wg[0] * f0, l1 = wk[0] * std::abs(f0);
    for (std::size_t i = 1; i < x.size(); ++i) {
      const double fp = f(c + h * x[i]), fm = f(c - h * x[i]);
      k += wk[i] * (fp + fm);
      l1 += wk[i] * (std::abs(fp) + std::abs(fm));
      if (i % 2 == 0) g += wg[i / 2] * (fp + fm);
    }
    r.evaluations += 2 * x.size() - 1;
    return Panel{lo, hi, h * k, std::abs(h * (k - g)), std::abs(h) * l1};
  };
  std::priority_queue<Panel> heap;
  heap.push(rule(a, b));
  double error = heap.top().error, l1 = heap.top().l1;
  // Panels a few ulps wide cannot be refined: a jump may sit one rounding
  // step away from the breakpoint meant to catch it. Their error is still
  // reported but no longer drives refinement.
  std::vector<Panel> frozen;
  const double ulp_scale = 16.0 * std::numeric_limits<double>::epsilon() * std::max({std::abs(a), std::abs(b), 1.0});
  while (!heap.empty() && error > opts.tol * l1 && error > std::numeric_limits<double>::min()) {
    const Panel worst = heap.top();
    heap.pop();
    if (worst.b - worst.a < ulp_scale) {
      frozen.push_back(worst);
      error -= worst.error;
      continue;
    }
    if (r.evaluations >= opts.max_evaluations) {
      throw NumericalError("adaptive quadrature on [" + std::to_string(a) + ", " + std::to_string(b) +
                               "] did not reach relative tolerance " + std::to_string(opts.tol),
                           l1 > 0.0 ? error / l1 : error);
    }
    const double mid = 0.5 * (worst.a + worst.b);
    const Panel left = rule(worst.a, mid), right = rule(mid, worst.b);
    error += left.error + right.error - worst.error;
    l1 += left.l1 + right.l1 - worst.l1;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to shed the drift of the running updates.
  double value = 0.0;
  error = 0.0;
  for (; !heap.empty(); heap.pop()) {
    value += heap.top().value;
    error += heap.top().error;
  }
  for (const auto& p : frozen) {
    value += p.value;
    error += p.error;
  }
  r.value = value;
  r.error_estimate = error;
  return r;
}

IntegrationResult integrate_periodic(const std::function<double(double)>& f, std::span<const double> breakpoints,
                                     const QuadOptions& opts) {
  if (breakpoints.empty()) {
    // Trapezoid rule; spectrally accurate for smooth periodic integrands.
    std::size_t n = 8;
    double sum = 0.0, l1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = f(-pi + 2.0 * pi * static_cast<double>(i) / n);
      sum += v;
      l1 += std::abs(v);
    }
    double prev = 2.0 * pi * sum / n;
    std::size_t evals = n;
    while (true) {
      double mid = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = f(-pi + 2.0 * pi * (static_cast<double>(i) + 0.5) / n);
        mid += v;
        l1 += std::abs(v);
      }
      evals += n;
      sum += mid;
      n *= 2;
      const double cur = 2.0 * pi * sum / n;
      const double err = std::abs(cur - prev);
      const double scale = 2.0 * pi * l1 / n;
      if (n >= opts.min_trapezoid_points && err <= opts.tol * scale) return {cur, err, evals};
      if (evals >= opts.max_evaluations)
        throw NumericalError("trapezoid rule did not converge within the evaluation budget",
                             scale > 0.0 ? err / scale : err);
      prev = cur;
    }
  }
  const auto edges = panel_edges(breakpoints);
  IntegrationResult total;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const auto r = integrate_interval(f, edges[i], edges[i + 1], opts);
    total.value += r.value;
    total.error_estimate += r.error_estimate;
    total.evaluations += r.evaluations;
    if (total.evaluations > opts.max_evaluations)
      throw NumericalError("panel quadrature exceeded the evaluation budget", total.error_estimate);
  }
  return total;
}

IntegrationResult triangle_integral(const ConnectionKernel& kernel, double radius, double anchor,
                                    const QuadOptions& opts) {
  if (kernel.is_product()) throw DimensionError("triangle_integral takes a 1D kernel");
  return chain_1d(kernel, radius, 2, anchor, anchor, false, opts);
}

namespace {
double nonzero_mean_degree(const NetworkModel& model) {
  const auto n = mean_degree(model);
  if (n.degenerate) throw ConfigError("mean degree is zero; clustering is undefined");
  return n.value;
}
}  // namespace

IntegrationResult clustering_quad(const NetworkModel& model, const QuadOptions& opts) {
  nonzero_mean_degree(model);
  std::vector<IntegrationResult> parts;
  for (std::size_t i = 0; i < model.dimension(); ++i) {
    const double r = model.radii()[i];
    auto t = triangle_integral(model.factor(i), r, 0.0, opts);
    const double n = mean_degree(model.factor(i), r);
    t.value /= n * n;
    t.error_estimate /= n * n;
    parts.push_back(t);
  }
  return product_of(parts);
}

IntegrationResult p_chain_quad(const NetworkModel& model, int k, std::span<const double> b, bool with_exclusion,
                               const QuadOptions& opts) {
  check_k(k);
  check_b(model, b);
  if (model.is_torus() && with_exclusion) {
    return p_chain_tensor(model, k, b, true, TensorGridOptions{std::max(opts.tol, 1e-6)});
  }
  std::vector<IntegrationResult> parts;
  for (std::size_t i = 0; i < model.dimension(); ++i)
    parts.push_back(chain_1d(model.factor(i), model.radii()[i], k, 0.0, b[i], with_exclusion, opts));
  return product_of(parts);
}

IntegrationResult p_chain_tensor(const NetworkModel& model, int k, std::span<const double> b, bool with_exclusion,
                                 const TensorGridOptions& opts) {
  check_k(k);
  check_b(model, b);
  static const Rule coarse = gauss_rule<5>();
  static const Rule fine = gauss_rule<8>();
  TensorChain grid(model, k, b, with_exclusion, opts);
  const double lo = grid.run(coarse);
  std::size_t evals = grid.evaluations();
  const double hi = grid.run(fine);
  evals += grid.evaluations();
  const double err = std::abs(hi - lo);
  if (err > opts.tol * std::abs(hi) && err > 1e-300)
    throw NumericalError("tensor grid did not reach relative tolerance " + std::to_string(opts.tol),
                         hi != 0.0 ? err / std::abs(hi) : err);
  return {hi, err, evals};
}

IntegrationResult clustering_tensor(const NetworkModel& model, const TensorGridOptions& opts) {
  const double n = nonzero_mean_degree(model);
  const std::vector<double> zero(model.dimension(), 0.0);
  auto r = p_chain_tensor(model, 2, zero, false, opts);
  r.value /= n * n;
  r.error_estimate /= n * n;
  return r;
}

namespace {
std::vector<double> ring_table(std::size_t n, const ConnectionKernel& kernel) {
  if (kernel.is_product()) throw DimensionError("ring sums take a 1D kernel");
  std::vector<double> q(n);
  for (std::size_t d = 0; d < n; ++d) q[d] = kernel(2.0 * pi * static_cast<double>(d) / static_cast<double>(n));
  return q;
}
}  // namespace

ChainCount discrete_chain_count(std::size_t n, const ConnectionKernel& kernel, int k, std::size_t offset,
                                double op_budget, unsigned threads) {
  if (n < 3) throw ConfigError("discrete chain count needs n >= 3");
  if (k < 1 || k > 3) throw ConfigError("discrete chain count supports k in {1, 2, 3}");
  if (offset == 0 || offset >= n) throw ConfigError("offset must be in [1, n)");
  const double cost = std::pow(static_cast<double>(n), k);
  if (cost > op_budget)
    throw NumericalError("discrete " + std::to_string(k) + "-chain sum over " + std::to_string(n) +
                             " nodes exceeds the cost budget",
                         std::numeric_limits<double>::infinity());
  const auto q = ring_table(n, kernel);
  auto Q = [&](std::size_t from, std::size_t to) { return q[(to + n - from) % n]; };
  const std::size_t B = offset;
  auto endpoint = [&](std::size_t c) { return c == 0 || c == B; };
  ChainCount out;

  if (k == 1) {
    double s = 0.0;
    for (std::size_t c = 1; c < n; ++c)
      if (!endpoint(c)) s += Q(0, c) * Q(c, B);
    out.reduced = s;
    out.with_exclusion = s * (1.0 - Q(0, B));
    return out;
  }

  if (k == 2) {
    struct Pair {
      double reduced, excl;
    };
    const auto parts = parallel_map<Pair>(
        n,
        [&](std::size_t c1) {
          Pair p{0.0, 0.0};
          if (endpoint(c1) || Q(0, c1) == 0.0) return p;
          for (std::size_t c2 = 1; c2 < n; ++c2) {
            if (endpoint(c2) || c2 == c1) continue;
            const double v = Q(0, c1) * Q(c1, c2) * Q(c2, B);
            p.reduced += v;
            p.excl += v * (1.0 - Q(0, c2)) * (1.0 - Q(B, c1));
          }
          return p;
        },
        threads);
    double r = 0.0, e = 0.0;
    for (const auto& p : parts) {
      r += p.reduced;
      e += p.excl;
    }
    out.reduced = r;
    out.with_exclusion = e * (1.0 - Q(0, B));
    return out;
  }

  out.reduced = parallel_sum(
      n,
      [&](std::size_t c1) {
        double s = 0.0;
        if (endpoint(c1) || Q(0, c1) == 0.0) return s;
        for (std::size_t c2 = 1; c2 < n; ++c2) {
          if (endpoint(c2) || c2 == c1) continue;
          const double w = Q(0, c1) * Q(c1, c2);
          if (w == 0.0) continue;
          for (std::size_t c3 = 1; c3 < n; ++c3) {
            if (endpoint(c3) || c3 == c1 || c3 == c2) continue;
            s += w * Q(c2, c3) * Q(c3, B);
          }
        }
        return s;
      },
      threads);
  return out;
}

double discrete_mean_degree(std::size_t n, const ConnectionKernel& kernel) {
  const auto q = ring_table(n, kernel);
  double s = 0.0;
  for (std::size_t d = 1; d < n; ++d) s += q[d];
  return s;
}

double discrete_clustering(std::size_t n, const ConnectionKernel& kernel) {
  const auto q = ring_table(n, kernel);
  double linked = 0.0, pairs = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    if (q[i] == 0.0) continue;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double w = q[i] * q[j];
      pairs += w;
      linked += w * q[j - i];
    }
  }
  if (pairs == 0.0) throw ConfigError("mean degree is zero; clustering is undefined");
  return linked / pairs;
}

std::size_t nodes_for_radius(double radius) { return static_cast<std::size_t>(std::llround(2.0 * pi * radius)); }

}  // namespace kernelnet
