#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace wsbm {

/// Distribution families available for edge existence and edge weights.
///
/// Each family is an exponential family f(x|theta) = h(x) exp(T(x) . eta(theta))
/// with a conjugate prior pi(theta|tau) = exp(tau . eta(theta)) / Z(tau). The base
/// measure h(x) is dropped everywhere, so likelihood and ELBO values are only
/// comparable between models that use the same families.
///
///   family              T(x)            eta(theta)                          theta
///   BernoulliExistence  (x, 1)          (log p/(1-p), log(1-p))             p in (0,1)
///   DCExistence         (x, d_i d_j)    (log l, -l)                         rate l > 0
///   NormalWeight        (x, x^2, 1)     (m v, -v/2, -m^2 v/2 + log(v)/2)    mean m, precision v
///   PoissonWeight       (x, 1)          (log l, -l)                         rate l > 0
///   ExponentialWeight   (x, 1)          (-l, log l)                         rate l > 0
enum class FamilyKind {
  BernoulliExistence,
  DCExistence,
  NormalWeight,
  PoissonWeight,
  ExponentialWeight,
};

std::string_view to_string(FamilyKind family) noexcept;
/// Accepts the enum spelling or the short CLI names (bernoulli, dc, normal, poisson, exponential).
std::optional<FamilyKind> parse_family(std::string_view name) noexcept;

/// Natural-parameter dimension d of a family.
std::size_t dimension(FamilyKind family) noexcept;
bool is_existence_family(FamilyKind family) noexcept;
bool is_weight_family(FamilyKind family) noexcept;

/// Fixed-capacity vector of sufficient statistics or natural parameters (d <= 3).
class StatVector {
 public:
  static constexpr std::size_t kMaxDim = 3;

  StatVector() = default;
  explicit StatVector(std::size_t dim) : dim_(dim) {}
  StatVector(std::initializer_list<double> values);

  std::size_t size() const noexcept { return dim_; }
  double& operator[](std::size_t k) noexcept { return v_[k]; }
  double operator[](std::size_t k) const noexcept { return v_[k]; }
  const double* begin() const noexcept { return v_.data(); }
  const double* end() const noexcept { return v_.data() + dim_; }

  StatVector& operator+=(const StatVector& other);
  StatVector& operator*=(double s) noexcept;
  friend StatVector operator+(StatVector a, const StatVector& b) { return a += b; }
  friend StatVector operator*(StatVector a, double s) noexcept { return a *= s; }
  friend StatVector operator*(double s, StatVector a) noexcept { return a *= s; }
  friend bool operator==(const StatVector& a, const StatVector& b) noexcept;

  double dot(const StatVector& other) const;

 private:
  std::array<double, kMaxDim> v_{};
  std::size_t dim_ = 0;
};

/// Conjugate-prior (or variational posterior) hyperparameters tau of one family.
struct HyperParams {
  FamilyKind family = FamilyKind::BernoulliExistence;
  StatVector tau;
};

/// Sufficient statistics T(x). `aux` is the degree product d_out(i) d_in(j) and
/// must be supplied exactly when the family is DCExistence.
/// Throws InputError when x lies outside the family's support.
StatVector suff_stats(FamilyKind family, double x, std::optional<double> aux = std::nullopt);

/// Returns an empty string if tau is admissible, otherwise the violated constraint.
std::string admissibility_violation(const HyperParams& hp);
bool is_admissible(const HyperParams& hp);

/// log Z(tau) = log of the integral of exp(tau . eta(theta)) over theta, using
/// Lebesgue measure on the parameters listed in the table above.
/// Throws AdmissibilityError when the integral diverges.
double log_partition(const HyperParams& hp);

/// <eta> = d log Z / d tau, the expected natural parameters under pi(.|tau).
StatVector expected_nat_params(const HyperParams& hp);

/// tau = tau_0 + <T>. Throws ContractError on dimension mismatch.
HyperParams posterior_update(const HyperParams& prior, const StatVector& expected_stats);

/// Pseudo-count of the default Normal prior.
inline constexpr double kNormalPriorCount = 0.1;

/// Weak proper default prior. The Normal prior is kNormalPriorCount
/// pseudo-observations with the given weight mean and variance; the
/// Exponential prior is one pseudo-observation at the weight mean. Other
/// families ignore both.
HyperParams default_prior(FamilyKind family, double weight_mean = 0.0, double weight_variance = 1.0);

/// Posterior mean of the family's "mean" quantity: the edge probability for
/// Bernoulli, the rate for DC existence and Poisson, the mean weight for Normal
/// and Exponential.
double posterior_mean(const HyperParams& hp);

}  // namespace wsbm
