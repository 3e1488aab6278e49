#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "kernelnet/kernel.hpp"

namespace kernelnet {

/// Value with an error bound. For series results the bound covers the
/// truncated tail.
struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

/// Truncated Fourier series of an even, real, 2 pi-periodic function,
///   f(phi) = a_0 + 2 sum_{n=1}^{M} a_n cos(n phi),
/// with a_{-n} = a_n. Only n >= 0 is stored.
class FourierSeries {
 public:
  /// `tail_decay` is a constant c with |a_n| <= c / n for every n > M
  /// (0 when the series is exact).
  explicit FourierSeries(std::vector<double> coeffs, double tail_decay = 0.0);

  std::span<const double> coeffs() const noexcept { return coeffs_; }
  std::size_t truncation() const noexcept { return coeffs_.size() - 1; }
  double tail_decay() const noexcept { return tail_decay_; }

  /// a_n for any integer n; zero beyond the truncation.
  double operator[](long n) const noexcept {
    const auto m = static_cast<std::size_t>(n < 0 ? -n : n);
    return m < coeffs_.size() ? coeffs_[m] : 0.0;
  }

 private:
  std::vector<double> coeffs_;
  double tail_decay_;
};

/// a_0 = p Phi / pi, a_n = p sin(n Phi) / (pi n) for the uniform window.
FourierSeries coeffs_uniform(double p, double half_width, std::size_t truncation);

/// Coefficients a_n = (1 / 2 pi) \int Q(phi) cos(n phi) dphi by direct
/// quadrature, split at the kernel's discontinuities.
FourierSeries coeffs_numeric(const ConnectionKernel& kernel, std::size_t truncation, double tol = 1e-12);

double eval_series(const FourierSeries& s, double angle);

/// Leading-order expected k-chain count (2 pi R)^k sum_n a_n^{k+1} cos(n b).
Estimate p_sep_leading(const FourierSeries& s, double radius, int k, double b);

/// (1 - Q(b)) times the leading k = 1 value; q_b is Q(b).
Estimate p1_full(const FourierSeries& s, double radius, double b, double q_b);

struct CorrectionOptions {
  /// Index range -m_corr..m_corr for the double and triple sums; 0 disables
  /// the correction terms.
  std::size_t m_corr = 128;
  /// Flag evaluations whose triple sum has more terms than this.
  double cost_budget = 1.0e8;
  unsigned threads = 0;
};

struct CorrectedEstimate : Estimate {
  bool over_budget = false;
};

/// Double and triple correction sums in real cosine form:
///   double(b) = sum_{m,n} a_m a_n a_{m+n}^2 cos(m b)
///   triple(b) = sum_{m,n,p} a_{m+n+p} a_{m+n} a_m a_n a_p cos((m+p) b)
struct CorrectionSums {
  double double_sum = 0.0;
  double triple_sum = 0.0;
};
CorrectionSums correction_sums(const FourierSeries& s, double b, std::size_t m_corr, unsigned threads = 0);

/// Separation-2 value with exclusion factors: (2 pi R)^2 (1 - Q(b)) times
/// [sum a_m^3 cos(m b) - 2 double(b) + triple(b)].
CorrectedEstimate p2_full(const FourierSeries& s, double radius, double b, double q_b,
                          const CorrectionOptions& opts = {});

enum class ClusteringMode { leading, full };

/// (4 pi^2 R^2 / N^2) sum a_m^3, plus the correction sums at b = 0 in full
/// mode. Full mode carries no (1 - Q(0)) factor. Throws ConfigError for N = 0.
CorrectedEstimate clustering_from_series(const FourierSeries& s, double radius, double mean_degree,
                                         ClusteringMode mode, const CorrectionOptions& opts = {});

/// (p / (pi Phi^2)) [Phi^3 + 2 sum_{n<=M} sin^3(n Phi) / n^3], error bound
/// p / (pi Phi^2 M^2).
Estimate clustering_uniform_closed(double p, double half_width, std::size_t m_tail);

/// (p / pi) (N / Phi)^k [Phi^{k+1} + 2 sum sin^{k+1}(n Phi) cos(n b) / n^{k+1}].
Estimate p_k_b_uniform(double p, double half_width, double mean_degree, int k, double b, std::size_t m_tail);

struct PiSeparation {
  Estimate value;
  /// value / (pi N^k).
  Estimate normalized;
};
PiSeparation p_k_pi_uniform(double p, double half_width, double mean_degree, int k, std::size_t m_tail);

/// Leading-order k-chain count on a torus with a product kernel: the product
/// over dimensions of the 1D leading values.
Estimate p_sep_torus(std::span<const FourierSeries> factors, std::span<const double> radii, int k,
                     std::span<const double> b);

/// Series of each factor of a model (one for a circle), closed-form for
/// uniform windows, exact for cosine kernels.
std::vector<FourierSeries> model_series(const NetworkModel& model, std::size_t truncation);

enum class CurveMode { leading, full, quadrature, mc, closed, kernel };
std::string to_string(CurveMode mode);

/// P(k, b) tabulated over a b-grid.
struct SeparationCurve {
  int k = 0;
  std::vector<double> b_grid;
  std::vector<double> values;
  std::vector<double> errors;
  CurveMode mode = CurveMode::leading;
  std::string model;
};

}  // namespace kernelnet
