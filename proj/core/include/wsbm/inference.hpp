#pragma once

#include <cstdint>
#include <vector>

#include "wsbm/model.hpp"
#include "wsbm/netgraph.hpp"

namespace wsbm {

/// Seed of restart `index` under a master seed.
std::uint64_t restart_seed(std::uint64_t master, std::uint64_t index);

/// Resolves and validates the configuration against the network, then fits
/// with the selected engine from initial_beliefs(options.init) drawn from
/// `seed`; BP additionally seeds its message noise from it.
FitResult fit(const ObservedNetwork& net, const ModelConfig& config, std::uint64_t seed,
              const FitOptions& options = {});

/// VB from explicit initial beliefs.
FitResult fit_from(const ObservedNetwork& net, const ModelConfig& config, VertexBeliefs init,
                   const FitOptions& options = {});

struct RestartReport {
  FitResult best;
  int best_index = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> elbos;
  std::vector<bool> converged;
};

/// Independent fits from restart_seed(seed, 0..n-1) on up to `threads` workers.
/// Picks the largest ELBO, ties going to the lower restart index, so the result
/// does not depend on `threads`.
RestartReport run_restarts(const ObservedNetwork& net, const ModelConfig& config, int n_restarts,
                           std::uint64_t seed, const FitOptions& options = {}, int threads = 1);

/// Runs fn(0..count-1) on up to `threads` workers. Exceptions are rethrown
/// (the one from the lowest index wins).
template <class F>
void parallel_for(std::size_t count, int threads, F&& fn);

}  // namespace wsbm

#include "wsbm/detail/parallel.hpp"
