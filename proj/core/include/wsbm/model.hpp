#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wsbm/expfam.hpp"
#include "wsbm/matrix.hpp"
#include "wsbm/netgraph.hpp"
#include "wsbm/rng.hpp"

namespace wsbm {

/// Model configuration: group count K, mixing weight alpha between the
/// existence log-likelihood (alpha) and the weight log-likelihood (1 - alpha),
/// the two families, their conjugate priors, and the label prior mu0.
///
/// alpha = 1 is the classic (degree-corrected, with DCExistence) block model,
/// alpha = 0 fits weights only.
struct ModelConfig {
  int k = 2;
  double alpha = 0.5;
  FamilyKind existence_family = FamilyKind::BernoulliExistence;
  FamilyKind weight_family = FamilyKind::NormalWeight;
  std::optional<HyperParams> existence_prior;  // unset: default_prior()
  std::optional<HyperParams> weight_prior;     // unset: default_prior() scaled to the data
  std::vector<double> mu0;                     // empty: uniform 1/K

  /// Throws ContractError when K < 1, alpha outside [0, 1], a family is used in
  /// the wrong role, a prior is inadmissible, or mu0 is not a distribution.
  void validate() const;
  bool degree_corrected() const noexcept { return existence_family == FamilyKind::DCExistence; }
};

/// Fills in default priors (Normal and Exponential priors are scaled to the
/// weights of `net`) and the uniform label prior, then validates.
ModelConfig resolve_config(const ModelConfig& config, const ObservedNetwork& net);

/// Bundle index r = K * z + z' of the ordered group pair (z, z').
constexpr int bundle_index(int k, int z, int zp) noexcept { return k * z + zp; }

/// n x K matrix of per-vertex group-membership probabilities.
class VertexBeliefs {
 public:
  VertexBeliefs() = default;
  /// Uniform rows.
  VertexBeliefs(std::size_t n, int k);

  /// Rows drawn from a symmetric Dirichlet(1).
  static VertexBeliefs random(std::size_t n, int k, Rng& rng);
  static VertexBeliefs one_hot(std::span<const int> labels, int k);

  std::size_t num_vertices() const noexcept { return m_.rows(); }
  int k() const noexcept { return static_cast<int>(m_.cols()); }

  std::span<double> row(std::size_t i) noexcept { return m_.row(i); }
  std::span<const double> row(std::size_t i) const noexcept { return m_.row(i); }
  double operator()(std::size_t i, int z) const noexcept { return m_(i, static_cast<std::size_t>(z)); }
  const Matrix& matrix() const noexcept { return m_; }
  Matrix& matrix() noexcept { return m_; }

  /// Row argmax; exact ties go to the lowest group index.
  std::vector<int> map_labels() const;

  /// Throws ContractError unless every row is nonnegative and sums to 1 within tol.
  void validate(double tol = 1e-12) const;

  friend bool operator==(const VertexBeliefs&, const VertexBeliefs&) = default;

 private:
  Matrix m_;
};

/// Unscaled expected sufficient statistics <T>_r for every bundle.
struct BundleStats {
  int k = 0;
  std::vector<StatVector> existence;
  std::vector<StatVector> weight;
};

/// Variational posteriors tau_r of every bundle, for both components, together
/// with the cached expected natural parameters <eta>_r.
struct BundlePosteriors {
  int k = 0;
  HyperParams prior_existence;
  HyperParams prior_weight;
  std::vector<HyperParams> tau_existence;
  std::vector<HyperParams> tau_weight;
  std::vector<StatVector> eta_existence;
  std::vector<StatVector> eta_weight;
};

/// tau_r = tau_0 + scale * <T>_r per component, with scales (alpha, 1 - alpha).
/// Throws AdmissibilityError naming the bundle when a posterior is inadmissible.
BundlePosteriors posteriors_from_stats(const BundleStats& stats, const ModelConfig& resolved,
                                       double existence_scale, double weight_scale);

/// Sum over vertices of mu_i(z) log(mu0(z) / mu_i(z)), with 0 log 0 = 0.
double label_prior_term(const VertexBeliefs& beliefs, std::span<const double> mu0);

/// Bundle part of the ELBO for one component:
/// sum_r (scale <T>_r + tau_0 - tau_r) . <eta>_r + log Z(tau_r) - log Z(tau_0).
double bundle_term(std::span<const StatVector> stats, double scale, const HyperParams& prior,
                   std::span<const HyperParams> tau, std::span<const StatVector> eta);

enum class Engine { VariationalBayes, BeliefPropagation };
std::string_view to_string(Engine engine) noexcept;

struct StoppingRule {
  double outer_tol = 1e-6;  // relative change of the ELBO
  double inner_tol = 1e-6;  // max absolute change of a belief entry
  int max_outer = 1000;
  int max_inner = 200;
};

struct BpOptions {
  double damping = 0.3;
  double message_tol = 1e-6;
  int max_sweeps = 200;
  /// Pass messages on every observed pair instead of using the sparse
  /// non-edge field. Quadratic cost; intended for n <= 50.
  bool dense_reference = false;
};

enum class InitKind {
  /// Hard labels from k-means++ seeding plus a few Lloyd steps on vertex
  /// connection profiles.
  ProfileKMeans,
  /// Rows drawn from a symmetric Dirichlet(1).
  Dirichlet,
};

std::string_view to_string(InitKind kind) noexcept;
InitKind parse_init_kind(std::string_view text);

struct FitOptions {
  Engine engine = Engine::VariationalBayes;
  InitKind init = InitKind::ProfileKMeans;
  StoppingRule stopping;
  BpOptions bp;
};

/// Converged state of one fit plus what prediction needs without the network.
struct FitResult {
  Engine engine = Engine::VariationalBayes;
  ModelConfig config;  // resolved
  std::uint64_t seed = 0;
  std::optional<InitKind> init;  // unset when started from caller-supplied beliefs

  VertexBeliefs beliefs;
  BundlePosteriors posteriors;  // alpha-scaled, as used by inference
  BundlePosteriors predictive;  // tau_0 + <T>_r without alpha scaling

  double elbo = 0.0;
  std::vector<double> elbo_trace;
  int iterations = 0;
  bool converged = false;

  std::vector<std::string> vertex_names;
  std::vector<double> out_degree;    // weighted out-degree per vertex (training data)
  std::vector<double> in_degree;     // weighted in-degree per vertex
  Matrix bundle_weight_mean;         // K x K sample means under MAP labels (NaN: empty)
  double global_weight_mean = 0.0;

  std::vector<int> labels() const { return beliefs.map_labels(); }
};

}  // namespace wsbm
