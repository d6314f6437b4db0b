#include "wsbm/model_select.hpp"

#include <ostream>

#include "wsbm/error.hpp"
#include "wsbm/netgraph.hpp"
#include "wsbm/synthgen.hpp"

namespace wsbm {

void check_comparable(const std::vector<ModelConfig>& configs) {
  for (const auto& c : configs) {
    const auto& f = configs.front();
    if (c.alpha != f.alpha || c.existence_family != f.existence_family || c.weight_family != f.weight_family) {
      throw ContractError("model selection requires one alpha and one pair of families across candidates");
    }
  }
}

SelectionReport make_report(std::vector<Candidate> candidates) {
  if (candidates.empty()) throw ContractError("model selection needs at least one candidate");
  std::vector<ModelConfig> configs;
  for (const auto& c : candidates) configs.push_back(c.config);
  check_comparable(configs);

  SelectionReport report;
  const std::size_t m = candidates.size();
  if (m > 1) {
    report.log_bayes_factors = Matrix(m, m);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b)
        report.log_bayes_factors(a, b) = candidates[a].elbo - candidates[b].elbo;
  }
  for (std::size_t a = 1; a < m; ++a) {
    const auto& best = candidates[report.chosen];
    if (candidates[a].elbo > best.elbo || (candidates[a].elbo == best.elbo && candidates[a].config.k < best.config.k)) {
      report.chosen = static_cast<int>(a);
    }
  }
  report.candidates = std::move(candidates);
  return report;
}

SelectionReport sweep_k(const ObservedNetwork& net, const ModelConfig& base, const std::vector<int>& ks,
                        int restarts, std::uint64_t seed, const FitOptions& options, int threads,
                        const std::vector<int>* truth) {
  if (ks.empty()) throw ContractError("empty K range");
  std::vector<Candidate> candidates;
  for (int k : ks) {
    ModelConfig cfg = base;
    cfg.k = k;
    cfg.mu0.clear();
    RestartReport rr = run_restarts(net, cfg, restarts, derive_seed(seed, "k", static_cast<std::uint64_t>(k)),
                                    options, threads);
    Candidate c;
    c.config = rr.best.config;
    c.elbo = rr.best.elbo;
    c.restarts = restarts;
    if (truth) c.nmi = nmi(*truth, rr.best.labels());
    c.best = std::move(rr.best);
    candidates.push_back(std::move(c));
  }
  return make_report(std::move(candidates));
}

void write_selection_csv(const SelectionReport& report, std::ostream& out) {
  out << "k,elbo,nmi,restarts,chosen\n";
  for (std::size_t a = 0; a < report.candidates.size(); ++a) {
    const auto& c = report.candidates[a];
    out << c.config.k << ',' << format_double(c.elbo) << ',' << (c.nmi ? format_double(*c.nmi) : "") << ','
        << c.restarts << ',' << (static_cast<int>(a) == report.chosen ? 1 : 0) << '\n';
  }
}

}  // namespace wsbm
