#include "kernelnet/mc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "kernelnet/error.hpp"

namespace kernelnet {

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Axis {
  std::size_t n;
  std::vector<std::size_t> offsets;  // distinct residues within the support, excluding 0
  std::vector<double> q;             // q[r] = Q(2 pi r / n)
};

Axis make_axis(std::size_t n, const ConnectionKernel& q) {
  Axis a{n, {}, std::vector<double>(n)};
  for (std::size_t r = 0; r < n; ++r) a.q[r] = q(2.0 * pi * static_cast<double>(r) / static_cast<double>(n));
  const double support = q.support_radius();
  // Offsets d with 2 pi d / n <= support, plus a little slack so a node
  // sitting exactly on the window edge is still a candidate.
  const auto w = static_cast<std::size_t>(
      std::min<double>(static_cast<double>(n / 2), std::floor(support * n / (2.0 * pi) * (1.0 + 1e-12) + 1e-9)));
  std::vector<bool> seen(n, false);
  for (std::size_t d = 1; d <= w; ++d) {
    for (std::size_t r : {d % n, (n - d) % n}) {
      if (r != 0 && !seen[r]) {
        seen[r] = true;
        a.offsets.push_back(r);
      }
    }
  }
  std::sort(a.offsets.begin(), a.offsets.end());
  return a;
}

}  // namespace

std::size_t GraphSample::edge_count() const noexcept {
  std::size_t deg = 0;
  for (const auto& nb : adjacency) deg += nb.size();
  return deg / 2;
}

bool GraphSample::linked(std::size_t i, std::size_t j) const {
  const auto& nb = adjacency.at(i);
  return std::binary_search(nb.begin(), nb.end(), static_cast<std::uint32_t>(j));
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial) noexcept {
  return splitmix64(master ^ splitmix64(trial + 0x632be59bd9b4e019ULL));
}

double pair_uniform(std::uint64_t seed, std::uint64_t index) noexcept {
  return static_cast<double>(splitmix64(seed + splitmix64(index)) >> 11) * 0x1.0p-53;
}

GraphSample sample_graph(std::size_t n, const ConnectionKernel& kernel, std::uint64_t seed) {
  if (kernel.is_product()) throw DimensionError("ring sampling takes a 1D kernel");
  const std::size_t shape[] = {n};
  return sample_graph(shape, kernel, seed);
}

GraphSample sample_graph(std::span<const std::size_t> shape, const ConnectionKernel& kernel, std::uint64_t seed) {
  if (shape.empty()) throw ConfigError("graph shape is empty");
  const std::size_t dim = shape.size();
  if (dim > 1 && (!kernel.is_product() || kernel.dimension() != dim))
    throw DimensionError("torus grid of dimension " + std::to_string(dim) + " needs a matching product kernel");
  if (dim == 1 && kernel.is_product() && kernel.dimension() != 1)
    throw DimensionError("ring needs a 1D kernel");

  std::vector<Axis> axes;
  double total = 1.0, expected_degree = 1.0;
  for (std::size_t i = 0; i < dim; ++i) {
    if (shape[i] < 2 && dim == 1) throw ConfigError("graph needs n >= 2");
    if (shape[i] < 1) throw ConfigError("torus grid side must be >= 1");
    const auto& factor = kernel.is_product() ? kernel.factors()[i] : kernel;
    axes.push_back(make_axis(shape[i], factor));
    total *= static_cast<double>(shape[i]);
    double s = 0.0;
    for (double v : axes.back().q) s += v;
    expected_degree *= s;
  }
  if (total > 4.0e9) throw ConfigError("graph has too many nodes for 32-bit node ids");
  if (total * expected_degree / 2.0 > kMaxExpectedEdges)
    throw ConfigError("expected edge count " + std::to_string(total * expected_degree / 2.0) +
                      " exceeds the memory budget");

  const auto n_total = static_cast<std::size_t>(total);
  GraphSample g;
  g.shape.assign(shape.begin(), shape.end());
  g.seed = seed;
  g.adjacency.resize(n_total);

  // Residue offsets per axis including 0; the all-zero combination is skipped.
  std::vector<std::vector<std::size_t>> res(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    res[i].push_back(0);
    res[i].insert(res[i].end(), axes[i].offsets.begin(), axes[i].offsets.end());
  }
  std::vector<std::size_t> coord(dim, 0), pick(dim, 0);
  for (std::size_t node = 0; node < n_total; ++node) {
    // coordinates of `node`, row-major
    for (std::size_t i = dim, rest = node; i-- > 0;) {
      coord[i] = rest % shape[i];
      rest /= shape[i];
    }
    std::fill(pick.begin(), pick.end(), 0);
    while (true) {
      // advance the odometer over residue combinations
      std::size_t i = dim;
      while (i-- > 0) {
        if (++pick[i] < res[i].size()) break;
        pick[i] = 0;
      }
      if (i == static_cast<std::size_t>(-1)) break;
      double q = 1.0;
      std::size_t other = 0;
      for (std::size_t a = 0; a < dim; ++a) {
        const std::size_t r = res[a][pick[a]];
        q *= axes[a].q[r];
        other = other * shape[a] + (coord[a] + r) % shape[a];
      }
      if (other <= node || q == 0.0) continue;
      if (pair_uniform(seed, static_cast<std::uint64_t>(node) * n_total + other) < q) {
        g.adjacency[node].push_back(static_cast<std::uint32_t>(other));
        g.adjacency[other].push_back(static_cast<std::uint32_t>(node));
      }
    }
  }
  for (auto& nb : g.adjacency) std::sort(nb.begin(), nb.end());
  return g;
}

McEstimate summarize(std::span<const double> values) {
  McEstimate e;
  e.trials = values.size();
  if (values.empty()) throw ConfigError("no trials to summarize");
  double s = 0.0;
  for (double v : values) s += v;
  e.mean = s / static_cast<double>(values.size());
  if (values.size() < 2) {
    e.std_error = kInf;
    return e;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - e.mean) * (v - e.mean);
  const double t = static_cast<double>(values.size());
  e.std_error = std::sqrt(ss / (t - 1.0) / t);
  return e;
}

double sample_mean_degree(const GraphSample& g) {
  return 2.0 * static_cast<double>(g.edge_count()) / static_cast<double>(g.n());
}

ClusteringTally clustering_tally(const GraphSample& g) {
  ClusteringTally t;
  for (std::size_t u = 0; u < g.n(); ++u) {
    const auto& nu = g.adjacency[u];
    const double d = static_cast<double>(nu.size());
    t.pairs += d * (d - 1.0) / 2.0;
    for (std::uint32_t v : nu) {
      if (v <= u) continue;
      const auto& nv = g.adjacency[v];
      std::size_t common = 0;
      auto a = nu.begin(), b = nv.begin();
      while (a != nu.end() && b != nv.end()) {
        if (*a < *b) ++a;
        else if (*b < *a) ++b;
        else {
          ++common;
          ++a;
          ++b;
        }
      }
      t.linked_pairs += static_cast<double>(common);
    }
  }
  return t;
}

McEstimate empirical_clustering(std::span<const ClusteringTally> tallies) {
  if (tallies.empty()) throw ConfigError("clustering estimate needs at least one sample");
  double x = 0.0, y = 0.0;
  for (const auto& t : tallies) {
    x += t.linked_pairs;
    y += t.pairs;
  }
  if (y == 0.0)
    throw NumericalError("clustering undefined: no node with degree >= 2 in any sample", kInf);
  McEstimate e;
  e.trials = tallies.size();
  e.mean = x / y;
  const double t = static_cast<double>(tallies.size());
  if (tallies.size() < 2) {
    e.std_error = kInf;
    return e;
  }
  const double ybar = y / t;
  double ss = 0.0;
  for (const auto& tl : tallies) {
    const double r = tl.linked_pairs - e.mean * tl.pairs;
    ss += r * r;
  }
  e.std_error = std::sqrt(ss / (t * (t - 1.0))) / ybar;
  return e;
}

McEstimate empirical_clustering(std::span<const GraphSample> samples) {
  std::vector<ClusteringTally> t;
  t.reserve(samples.size());
  for (const auto& g : samples) t.push_back(clustering_tally(g));
  return empirical_clustering(t);
}

double count_chains(const GraphSample& g, std::size_t source, std::size_t target, int k, double op_budget) {
  if (k < 1 || k > 3) throw ConfigError("chain counting supports k in {1, 2, 3}");
  if (source >= g.n() || target >= g.n() || source == target) throw ConfigError("bad chain endpoints");
  const auto& ns = g.adjacency[source];
  std::vector<char> near_target(g.n(), 0);
  for (auto v : g.adjacency[target]) near_target[v] = 1;
  auto inner = [&](std::size_t c) { return c != source && c != target; };

  if (k == 1) {
    double c = 0.0;
    for (auto v : ns) c += near_target[v];
    return c;
  }
  std::size_t max_deg = 0;
  for (const auto& nb : g.adjacency) max_deg = std::max(max_deg, nb.size());
  const double cost = static_cast<double>(ns.size()) * std::pow(static_cast<double>(max_deg), k - 1);
  if (cost > op_budget)
    throw NumericalError("chain enumeration exceeds the cost budget", kInf);

  double count = 0.0;
  for (auto c1 : ns) {
    if (!inner(c1)) continue;
    for (auto c2 : g.adjacency[c1]) {
      if (!inner(c2)) continue;
      if (k == 2) {
        count += near_target[c2];
        continue;
      }
      for (auto c3 : g.adjacency[c2]) {
        if (!inner(c3) || c3 == c1) continue;
        count += near_target[c3];
      }
    }
  }
  return count;
}

McEstimate empirical_chain_count(std::span<const GraphSample> samples, std::size_t offset, int k) {
  std::vector<double> v;
  v.reserve(samples.size());
  for (const auto& g : samples) {
    if (offset == 0 || 2 * offset > g.n()) throw ConfigError("offset must be in (0, n/2]");
    v.push_back(count_chains(g, 0, offset, k));
  }
  return summarize(v);
}

int separation(const GraphSample& g, std::size_t source, std::size_t target, int max_sep) {
  if (source >= g.n() || target >= g.n() || source == target) throw ConfigError("bad separation endpoints");
  std::vector<int> dist(g.n(), -1);
  std::vector<std::uint32_t> frontier{static_cast<std::uint32_t>(source)}, next;
  dist[source] = 0;
  for (int depth = 1; depth <= max_sep + 1 && !frontier.empty(); ++depth) {
    next.clear();
    for (auto u : frontier) {
      for (auto v : g.adjacency[u]) {
        if (dist[v] >= 0) continue;
        if (v == target) return depth - 1;
        dist[v] = depth;
        next.push_back(v);
      }
    }
    frontier.swap(next);
  }
  return -1;
}

SeparationHistogram histogram_from_separations(std::span<const int> separations, int max_sep) {
  if (max_sep < 0) throw ConfigError("max_sep must be >= 0");
  if (separations.empty()) throw ConfigError("histogram needs at least one sample");
  std::vector<std::size_t> counts(static_cast<std::size_t>(max_sep) + 2, 0);
  for (int s : separations) {
    const std::size_t bin = (s < 0 || s > max_sep) ? counts.size() - 1 : static_cast<std::size_t>(s);
    ++counts[bin];
  }
  const double t = static_cast<double>(separations.size());
  auto entry = [&](std::size_t c) {
    McEstimate e;
    e.trials = separations.size();
    e.mean = static_cast<double>(c) / t;
    e.std_error = separations.size() < 2 ? kInf : std::sqrt(e.mean * (1.0 - e.mean) / (t - 1.0));
    return e;
  };
  SeparationHistogram h;
  for (std::size_t s = 0; s + 1 < counts.size(); ++s) h.bins.push_back(entry(counts[s]));
  h.unreached = entry(counts.back());
  return h;
}

SeparationHistogram empirical_separation_histogram(std::span<const GraphSample> samples, std::size_t offset,
                                                   int max_sep) {
  std::vector<int> seps;
  seps.reserve(samples.size());
  for (const auto& g : samples) seps.push_back(separation(g, 0, offset, max_sep));
  return histogram_from_separations(seps, max_sep);
}

}  // namespace kernelnet
