#include "kernelnet/fourier.hpp"

#include <cmath>
#include <limits>
#include <variant>

#include "kernelnet/parallel.hpp"
#include "kernelnet/quadrature.hpp"

namespace kernelnet {

namespace {

double ipow(double x, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= x;
  return r;
}

void require_k(int k) {
  if (k < 1) throw ConfigError("separation index k must be >= 1 here (k = 0 is Q(b) itself)");
}

void require_half_width(double half_width) {
  if (!(half_width > 0.0 && half_width <= pi + 1e-12))
    throw ConfigError("phi out of (0, pi]: mean degree is zero or window exceeds the circle");
}

// sum_{n=1}^{M} 2 t_n^{k+1} cos(n b) with t_n = sin(n Phi) / n, accumulated
// from the small end. `alternating` uses cos(n pi) = (-1)^n exactly.
double sine_power_sum(double half_width, int power, double b, std::size_t m_tail, bool alternating) {
  double s = 0.0;
  for (std::size_t n = m_tail; n >= 1; --n) {
    const double dn = static_cast<double>(n);
    const double t = ipow(std::sin(dn * half_width) / dn, power);
    const double c = alternating ? ((n % 2) ? -1.0 : 1.0) : std::cos(dn * b);
    s += t * c;
  }
  return 2.0 * s;
}

// Bound on sum_{n>M} n^{-(j+1)} * 2, i.e. 2 / (j M^j).
double tail_power_bound(int j, std::size_t m) { return 2.0 / (j * std::pow(static_cast<double>(m), j)); }

}  // namespace

FourierSeries::FourierSeries(std::vector<double> coeffs, double tail_decay)
    : coeffs_(std::move(coeffs)), tail_decay_(tail_decay) {
  if (coeffs_.empty()) throw ConfigError("Fourier series needs at least a_0");
  for (double a : coeffs_)
    if (!std::isfinite(a)) throw ConfigError("Fourier coefficient is not finite");
  if (!(tail_decay_ >= 0.0) || !std::isfinite(tail_decay_)) throw ConfigError("tail decay constant must be >= 0");
}

FourierSeries coeffs_uniform(double p, double half_width, std::size_t truncation) {
  if (truncation < 1) throw ConfigError("truncation M must be >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("p out of [0,1]");
  require_half_width(half_width);
  const double phi = std::min(half_width, pi);
  std::vector<double> a(truncation + 1);
  a[0] = p * phi / pi;
  for (std::size_t n = 1; n <= truncation; ++n) {
    const double dn = static_cast<double>(n);
    a[n] = p * std::sin(dn * phi) / (pi * dn);
  }
  return FourierSeries(std::move(a), p / pi);
}

FourierSeries coeffs_numeric(const ConnectionKernel& kernel, std::size_t truncation, double tol) {
  if (kernel.is_product()) throw DimensionError("coeffs_numeric takes a 1D kernel");
  if (truncation < 1) throw ConfigError("truncation M must be >= 1");
  const auto bps = kernel.breakpoints();
  std::vector<double> a(truncation + 1);
  for (std::size_t n = 0; n <= truncation; ++n) {
    const double dn = static_cast<double>(n);
    QuadOptions opts{tol};
    opts.min_trapezoid_points = 4 * n + 64;
    const auto r = integrate_periodic([&](double x) { return kernel(x) * std::cos(dn * x); }, bps, opts);
    a[n] = r.value / (2.0 * pi);
  }
  return FourierSeries(std::move(a), kernel.total_variation() / (2.0 * pi));
}

double eval_series(const FourierSeries& s, double angle) {
  const auto a = s.coeffs();
  double sum = 0.0;
  for (std::size_t n = a.size(); n-- > 1;) sum += a[n] * std::cos(static_cast<double>(n) * angle);
  return a[0] + 2.0 * sum;
}

Estimate p_sep_leading(const FourierSeries& s, double radius, int k, double b) {
  require_k(k);
  const auto a = s.coeffs();
  double sum = 0.0;
  for (std::size_t n = a.size(); n-- > 1;) sum += ipow(a[n], k + 1) * std::cos(static_cast<double>(n) * b);
  const double scale = ipow(2.0 * pi * radius, k);
  const double bound = s.tail_decay() == 0.0 ? 0.0
                                              : scale * ipow(s.tail_decay(), k + 1) * tail_power_bound(k, s.truncation());
  return {scale * (ipow(a[0], k + 1) + 2.0 * sum), bound};
}

Estimate p1_full(const FourierSeries& s, double radius, double b, double q_b) {
  const auto lead = p_sep_leading(s, radius, 1, b);
  const double f = 1.0 - q_b;
  return {f * lead.value, std::abs(f) * lead.error};
}

CorrectionSums correction_sums(const FourierSeries& s, double b, std::size_t m_corr, unsigned threads) {
  const long mc = static_cast<long>(m_corr);
  // cos(j b) for j in [-2 mc, 2 mc].
  std::vector<double> cosine(4 * m_corr + 1);
  for (long j = -2 * mc; j <= 2 * mc; ++j) cosine[j + 2 * mc] = std::cos(static_cast<double>(j) * b);
  const auto parts = parallel_map<CorrectionSums>(
      2 * m_corr + 1,
      [&](std::size_t idx) {
        const long m = static_cast<long>(idx) - mc;
        CorrectionSums part;
        const double am = s[m];
        if (am == 0.0) return part;
        double dbl = 0.0, tri = 0.0;
        for (long n = -mc; n <= mc; ++n) {
          const double an = s[n];
          const double amn = s[m + n];
          if (an == 0.0 || amn == 0.0) continue;
          dbl += an * amn * amn;
          double inner = 0.0;
          for (long p = -mc; p <= mc; ++p) inner += s[m + n + p] * s[p] * cosine[m + p + 2 * mc];
          tri += an * amn * inner;
        }
        part.double_sum = am * dbl * cosine[m + 2 * mc];
        part.triple_sum = am * tri;
        return part;
      },
      threads);
  CorrectionSums total;
  for (const auto& p : parts) {
    total.double_sum += p.double_sum;
    total.triple_sum += p.triple_sum;
  }
  return total;
}

namespace {

// -2 double + triple at m_corr, with the change from m_corr / 2 as the error.
Estimate correction_bracket(const FourierSeries& s, double b, const CorrectionOptions& opts) {
  if (opts.m_corr == 0) return {};
  const auto full = correction_sums(s, b, opts.m_corr, opts.threads);
  const double value = -2.0 * full.double_sum + full.triple_sum;
  double err = std::abs(value);
  if (opts.m_corr >= 2) {
    const auto half = correction_sums(s, b, opts.m_corr / 2, opts.threads);
    err = std::abs(value - (-2.0 * half.double_sum + half.triple_sum));
  }
  return {value, err};
}

bool over_budget(const CorrectionOptions& opts) {
  const double terms = std::pow(2.0 * static_cast<double>(opts.m_corr) + 1.0, 3);
  return opts.m_corr > 0 && terms > opts.cost_budget;
}

}  // namespace

CorrectedEstimate p2_full(const FourierSeries& s, double radius, double b, double q_b,
                          const CorrectionOptions& opts) {
  const auto lead = p_sep_leading(s, radius, 2, b);
  const auto corr = correction_bracket(s, b, opts);
  const double scale = ipow(2.0 * pi * radius, 2);
  const double f = 1.0 - q_b;
  CorrectedEstimate out;
  out.value = f * (lead.value + scale * corr.value);
  out.error = std::abs(f) * (lead.error + scale * corr.error);
  out.over_budget = over_budget(opts);
  return out;
}

CorrectedEstimate clustering_from_series(const FourierSeries& s, double radius, double mean_degree,
                                         ClusteringMode mode, const CorrectionOptions& opts) {
  if (!(mean_degree > 0.0)) throw ConfigError("mean degree is zero; clustering is undefined");
  const auto a = s.coeffs();
  double cubes = 0.0;
  for (std::size_t n = a.size(); n-- > 1;) cubes += a[n] * a[n] * a[n];
  const double norm = 4.0 * pi * pi * radius * radius / (mean_degree * mean_degree);
  const double c = s.tail_decay();
  const double m = static_cast<double>(s.truncation());
  CorrectedEstimate out;
  out.value = norm * (a[0] * a[0] * a[0] + 2.0 * cubes);
  out.error = c == 0.0 ? 0.0 : norm * c * c * c / (m * m);
  if (mode == ClusteringMode::full) {
    const auto corr = correction_bracket(s, 0.0, opts);
    out.value += norm * corr.value;
    out.error += norm * corr.error;
    out.over_budget = over_budget(opts);
  }
  return out;
}

Estimate clustering_uniform_closed(double p, double half_width, std::size_t m_tail) {
  require_half_width(half_width);
  if (m_tail < 1) throw ConfigError("M_tail must be >= 1");
  const double phi = std::min(half_width, pi);
  const double s = sine_power_sum(phi, 3, 0.0, m_tail, false);
  const double m = static_cast<double>(m_tail);
  // p (Phi^3 + 2 S) / (pi Phi^2), arranged so that Phi = pi gives p exactly.
  return {p * (phi + s / (phi * phi)) / pi, p / (pi * phi * phi * m * m)};
}

namespace {

// (p / pi^2) Phi^{-k} [Phi^{k+1} + 2 sum ...], i.e. P(k, b) / (pi N^k).
Estimate normalized_uniform(double p, double half_width, int k, double b, std::size_t m_tail, bool at_pi) {
  require_k(k);
  require_half_width(half_width);
  if (m_tail < 1) throw ConfigError("M_tail must be >= 1");
  const double phi = std::min(half_width, pi);
  const double bracket = ipow(phi, k + 1) + sine_power_sum(phi, k + 1, b, m_tail, at_pi);
  const double scale = p / (pi * pi * ipow(phi, k));
  return {scale * bracket, scale * tail_power_bound(k, m_tail)};
}

}  // namespace

Estimate p_k_b_uniform(double p, double half_width, double mean_degree, int k, double b, std::size_t m_tail) {
  const auto norm = normalized_uniform(p, half_width, k, b, m_tail, false);
  const double f = pi * ipow(mean_degree, k);
  return {f * norm.value, f * norm.error};
}

PiSeparation p_k_pi_uniform(double p, double half_width, double mean_degree, int k, std::size_t m_tail) {
  const auto norm = normalized_uniform(p, half_width, k, pi, m_tail, true);
  const double f = pi * ipow(mean_degree, k);
  return {{f * norm.value, f * norm.error}, norm};
}

Estimate p_sep_torus(std::span<const FourierSeries> factors, std::span<const double> radii, int k,
                     std::span<const double> b) {
  if (factors.empty() || factors.size() != radii.size() || factors.size() != b.size())
    throw DimensionError("p_sep_torus needs one series, radius and separation component per dimension");
  double value = 1.0, upper = 1.0;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const auto e = p_sep_leading(factors[i], radii[i], k, b[i]);
    value *= e.value;
    upper *= std::abs(e.value) + e.error;
  }
  return {value, upper - std::abs(value)};
}

std::vector<FourierSeries> model_series(const NetworkModel& model, std::size_t truncation) {
  std::vector<FourierSeries> out;
  for (std::size_t i = 0; i < model.dimension(); ++i) {
    const auto& q = model.factor(i);
    if (const auto* u = std::get_if<UniformWindow>(&q.variant())) {
      out.push_back(coeffs_uniform(u->p, u->half_width, truncation));
    } else if (const auto* c = std::get_if<CosineSeries>(&q.variant())) {
      if (c->coeffs.size() <= truncation + 1) {
        out.emplace_back(c->coeffs, 0.0);
      } else {
        std::vector<double> head(c->coeffs.begin(), c->coeffs.begin() + static_cast<long>(truncation) + 1);
        out.emplace_back(std::move(head), q.total_variation() / (2.0 * pi));
      }
    } else {
      out.push_back(coeffs_numeric(q, truncation));
    }
  }
  return out;
}

std::string to_string(CurveMode mode) {
  switch (mode) {
    case CurveMode::leading: return "leading";
    case CurveMode::full: return "full";
    case CurveMode::quadrature: return "quadrature";
    case CurveMode::mc: return "mc";
    case CurveMode::closed: return "closed";
    case CurveMode::kernel: return "kernel";
  }
  return "unknown";
}

}  // namespace kernelnet
