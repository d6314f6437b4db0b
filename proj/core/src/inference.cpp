#include "wsbm/inference.hpp"

#include "wsbm/bp.hpp"
#include "wsbm/error.hpp"
#include "wsbm/init.hpp"
#include "wsbm/vb.hpp"

namespace wsbm {
namespace {

ModelConfig prepare(const ObservedNetwork& net, const ModelConfig& config, const FitOptions& options) {
  ModelConfig resolved = resolve_config(config, net);
  validate_weights(net, resolved);
  if (options.engine == Engine::BeliefPropagation) check_bp_supported(resolved, net.self_loops());
  return resolved;
}

}  // namespace

std::uint64_t restart_seed(std::uint64_t master, std::uint64_t index) { return derive_seed(master, "restart", index); }

FitResult fit(const ObservedNetwork& net, const ModelConfig& config, std::uint64_t seed, const FitOptions& options) {
  const ModelConfig resolved = prepare(net, config, options);
  const SparseView view(net);
  Rng rng(seed);
  VertexBeliefs init = initial_beliefs(view, resolved, options.init, rng);
  FitResult result = options.engine == Engine::BeliefPropagation
                         ? fit_bp(view, resolved, std::move(init), rng, options.stopping, options.bp)
                         : fit_vb(view, resolved, std::move(init), options.stopping);
  result.seed = seed;
  result.init = options.init;
  result.vertex_names = net.names();
  return result;
}

FitResult fit_from(const ObservedNetwork& net, const ModelConfig& config, VertexBeliefs init,
                   const FitOptions& options) {
  FitOptions vb = options;
  vb.engine = Engine::VariationalBayes;
  const ModelConfig resolved = prepare(net, config, vb);
  const SparseView view(net);
  FitResult result = fit_vb(view, resolved, std::move(init), vb.stopping);
  result.vertex_names = net.names();
  return result;
}

RestartReport run_restarts(const ObservedNetwork& net, const ModelConfig& config, int n_restarts,
                           std::uint64_t seed, const FitOptions& options, int threads) {
  if (n_restarts < 1) throw ContractError("at least one restart is required");
  // Fail fast on configuration errors before spawning workers.
  prepare(net, config, options);

  std::vector<FitResult> fits(n_restarts);
  parallel_for(static_cast<std::size_t>(n_restarts), threads,
               [&](std::size_t r) { fits[r] = fit(net, config, restart_seed(seed, r), options); });

  RestartReport report;
  for (int r = 0; r < n_restarts; ++r) {
    report.seeds.push_back(fits[r].seed);
    report.elbos.push_back(fits[r].elbo);
    report.converged.push_back(fits[r].converged);
    if (fits[r].elbo > fits[report.best_index].elbo) report.best_index = r;
  }
  report.best = std::move(fits[report.best_index]);
  return report;
}

}  // namespace wsbm
