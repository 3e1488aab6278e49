#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "kernelnet/kernel.hpp"
#include "kernelnet/parallel.hpp"

namespace kernelnet {

/// One realized graph on a ring (shape {n}) or a torus grid (shape {n_1, ..., n_K}).
/// Node i of a torus grid has coordinates in row-major order.
struct GraphSample {
  std::vector<std::size_t> shape;
  /// Sorted neighbour lists; symmetric, no self-loops.
  std::vector<std::vector<std::uint32_t>> adjacency;
  std::uint64_t seed = 0;

  std::size_t n() const noexcept { return adjacency.size(); }
  std::size_t edge_count() const noexcept;
  bool linked(std::size_t i, std::size_t j) const;
};

struct McEstimate {
  double mean = 0.0;
  /// +inf when it cannot be estimated (a single trial).
  double std_error = 0.0;
  std::size_t trials = 0;
};

/// Seed for trial t, a pure function of (master, t).
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial) noexcept;

/// Uniform [0, 1) value attached to (seed, index); used per node pair.
double pair_uniform(std::uint64_t seed, std::uint64_t index) noexcept;

/// Upper bound on the expected number of stored edges.
inline constexpr double kMaxExpectedEdges = 2.0e8;

/// Ring of n equispaced nodes; pair (i, j) is linked independently with
/// probability Q(2 pi |i - j| / n), using only offsets within the kernel support.
GraphSample sample_graph(std::size_t n, const ConnectionKernel& kernel, std::uint64_t seed);

/// Torus grid with a product kernel of matching dimension.
GraphSample sample_graph(std::span<const std::size_t> shape, const ConnectionKernel& kernel, std::uint64_t seed);

/// Maps every trial's graph through `stat` in parallel and returns the
/// results in trial order.
template <class T, class Stat>
std::vector<T> run_trials(std::span<const std::size_t> shape, const ConnectionKernel& kernel, std::size_t trials,
                          std::uint64_t master_seed, Stat&& stat, unsigned threads = 0) {
  return parallel_map<T>(
      trials,
      [&](std::size_t t) { return stat(sample_graph(shape, kernel, trial_seed(master_seed, t))); },
      threads);
}

/// Mean and standard error of per-trial values.
McEstimate summarize(std::span<const double> values);

double sample_mean_degree(const GraphSample& g);

struct ClusteringTally {
  /// Neighbour pairs that are themselves linked (3 x triangles).
  double linked_pairs = 0.0;
  double pairs = 0.0;
};
ClusteringTally clustering_tally(const GraphSample& g);

/// Pooled ratio sum(linked) / sum(pairs) over all trials; the standard error
/// uses the per-trial ratio-estimator linearization.
McEstimate empirical_clustering(std::span<const ClusteringTally> tallies);
McEstimate empirical_clustering(std::span<const GraphSample> samples);

/// Number of simple chains with k intermediates (k in {1, 2, 3}) from node
/// `source` to node `target`.
double count_chains(const GraphSample& g, std::size_t source, std::size_t target, int k,
                    double op_budget = 1e9);

McEstimate empirical_chain_count(std::span<const GraphSample> samples, std::size_t offset, int k);

/// Separation S = (shortest path length) - 1 between source and target, or
/// -1 when the target is not reached within max_sep + 1 hops.
int separation(const GraphSample& g, std::size_t source, std::size_t target, int max_sep);

struct SeparationHistogram {
  /// Entry S for S = 0..max_sep.
  std::vector<McEstimate> bins;
  McEstimate unreached;
};

SeparationHistogram histogram_from_separations(std::span<const int> separations, int max_sep);
SeparationHistogram empirical_separation_histogram(std::span<const GraphSample> samples, std::size_t offset,
                                                   int max_sep);

}  // namespace kernelnet
