#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "wsbm/inference.hpp"
#include "wsbm/matrix.hpp"
#include "wsbm/model.hpp"

namespace wsbm {

struct Candidate {
  ModelConfig config;
  FitResult best;
  double elbo = 0.0;
  int restarts = 0;
  std::optional<double> nmi;  // against supplied truth labels
};

/// Candidates compared by their ELBOs as approximate log-evidences.
/// log_bayes_factors(a, b) = G_a - G_b; empty for a single candidate.
struct SelectionReport {
  std::vector<Candidate> candidates;
  Matrix log_bayes_factors;
  int chosen = 0;
};

/// Throws ContractError unless every candidate uses the same alpha and
/// families; ELBOs of different families differ by dropped constants.
void check_comparable(const std::vector<ModelConfig>& configs);

/// Assembles factors and the choice (argmax G, ties to the earlier candidate).
SelectionReport make_report(std::vector<Candidate> candidates);

/// Fits every K in `ks` (best of `restarts`) and selects by ELBO. Candidates
/// are fitted one after another; restarts run on `threads` workers. Restart
/// seeds for candidate K derive from (seed, "k", K).
SelectionReport sweep_k(const ObservedNetwork& net, const ModelConfig& base, const std::vector<int>& ks,
                        int restarts, std::uint64_t seed, const FitOptions& options = {}, int threads = 1,
                        const std::vector<int>* truth = nullptr);

/// CSV: k,elbo,nmi,restarts,chosen (one row per candidate).
void write_selection_csv(const SelectionReport& report, std::ostream& out);

}  // namespace wsbm
