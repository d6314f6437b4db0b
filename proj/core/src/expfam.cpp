#include "wsbm/expfam.hpp"

#include <boost/math/special_functions/digamma.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

#include "wsbm/error.hpp"

namespace wsbm {
namespace {

double digamma(double x) { return boost::math::digamma(x); }

std::string describe(const HyperParams& hp) {
  std::ostringstream os;
  os << to_string(hp.family) << " tau=(";
  for (std::size_t k = 0; k < hp.tau.size(); ++k) os << (k ? ", " : "") << hp.tau[k];
  os << ")";
  return os.str();
}

void require_admissible(const HyperParams& hp) {
  if (auto why = admissibility_violation(hp); !why.empty()) {
    throw AdmissibilityError("inadmissible " + describe(hp) + ": " + why);
  }
}

// Normal family helpers: shape a = (tau3 + 1)/2 and rate b = (tau2 - tau1^2/tau3)/2
// of the Gamma marginal over the precision.
struct NormalGamma {
  double shape;
  double rate;
};

NormalGamma normal_gamma(const StatVector& t) {
  return {0.5 * (t[2] + 1.0), 0.5 * (t[1] - t[0] * t[0] / t[2])};
}

}  // namespace

std::string_view to_string(FamilyKind family) noexcept {
  switch (family) {
    case FamilyKind::BernoulliExistence: return "bernoulli";
    case FamilyKind::DCExistence: return "dc";
    case FamilyKind::NormalWeight: return "normal";
    case FamilyKind::PoissonWeight: return "poisson";
    case FamilyKind::ExponentialWeight: return "exponential";
  }
  return "unknown";
}

std::optional<FamilyKind> parse_family(std::string_view name) noexcept {
  if (name == "bernoulli" || name == "BernoulliExistence") return FamilyKind::BernoulliExistence;
  if (name == "dc" || name == "DCExistence") return FamilyKind::DCExistence;
  if (name == "normal" || name == "NormalWeight") return FamilyKind::NormalWeight;
  if (name == "poisson" || name == "PoissonWeight") return FamilyKind::PoissonWeight;
  if (name == "exponential" || name == "ExponentialWeight") return FamilyKind::ExponentialWeight;
  return std::nullopt;
}

std::size_t dimension(FamilyKind family) noexcept {
  return family == FamilyKind::NormalWeight ? 3 : 2;
}

bool is_existence_family(FamilyKind family) noexcept {
  return family == FamilyKind::BernoulliExistence || family == FamilyKind::DCExistence;
}

bool is_weight_family(FamilyKind family) noexcept { return !is_existence_family(family); }

StatVector::StatVector(std::initializer_list<double> values) : dim_(values.size()) {
  if (dim_ > kMaxDim) throw ContractError("StatVector holds at most 3 components");
  std::size_t k = 0;
  for (double v : values) v_[k++] = v;
}

StatVector& StatVector::operator+=(const StatVector& other) {
  if (other.dim_ != dim_) throw ContractError("StatVector dimension mismatch");
  for (std::size_t k = 0; k < dim_; ++k) v_[k] += other.v_[k];
  return *this;
}

StatVector& StatVector::operator*=(double s) noexcept {
  for (std::size_t k = 0; k < dim_; ++k) v_[k] *= s;
  return *this;
}

bool operator==(const StatVector& a, const StatVector& b) noexcept {
  if (a.dim_ != b.dim_) return false;
  for (std::size_t k = 0; k < a.dim_; ++k)
    if (a.v_[k] != b.v_[k]) return false;
  return true;
}

double StatVector::dot(const StatVector& other) const {
  if (other.dim_ != dim_) throw ContractError("StatVector dimension mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < dim_; ++k) s += v_[k] * other.v_[k];
  return s;
}

StatVector suff_stats(FamilyKind family, double x, std::optional<double> aux) {
  const bool dc = family == FamilyKind::DCExistence;
  if (dc != aux.has_value()) {
    throw ContractError("degree product must be supplied exactly for the dc family");
  }
  if (!std::isfinite(x)) throw InputError("non-finite observation");
  switch (family) {
    case FamilyKind::BernoulliExistence:
      if (x != 0.0 && x != 1.0) throw InputError("existence indicator must be 0 or 1");
      return {x, 1.0};
    case FamilyKind::DCExistence:
      if (x != 0.0 && x != 1.0) throw InputError("existence indicator must be 0 or 1");
      if (!std::isfinite(*aux) || *aux < 0.0) throw InputError("degree product must be >= 0");
      return {x, *aux};
    case FamilyKind::NormalWeight:
      return {x, x * x, 1.0};
    case FamilyKind::PoissonWeight:
      if (x < 0.0 || x != std::floor(x)) {
        throw InputError("poisson weight must be a nonnegative integer");
      }
      return {x, 1.0};
    case FamilyKind::ExponentialWeight:
      if (x < 0.0) throw InputError("exponential weight must be nonnegative");
      return {x, 1.0};
  }
  throw ContractError("unknown family");
}

std::string admissibility_violation(const HyperParams& hp) {
  const auto& t = hp.tau;
  if (t.size() != dimension(hp.family)) return "dimension mismatch";
  for (double v : t)
    if (!std::isfinite(v)) return "non-finite component";
  switch (hp.family) {
    case FamilyKind::BernoulliExistence:
      if (!(t[0] > -1.0)) return "tau1 > -1 required (first Beta argument)";
      if (!(t[1] - t[0] > -1.0)) return "tau2 - tau1 > -1 required (second Beta argument)";
      return {};
    case FamilyKind::DCExistence:
    case FamilyKind::PoissonWeight:
      if (!(t[0] > -1.0)) return "tau1 > -1 required (Gamma shape)";
      if (!(t[1] > 0.0)) return "tau2 > 0 required (Gamma rate)";
      return {};
    case FamilyKind::ExponentialWeight:
      if (!(t[0] > 0.0)) return "tau1 > 0 required (Gamma rate)";
      if (!(t[1] > -1.0)) return "tau2 > -1 required (Gamma shape)";
      return {};
    case FamilyKind::NormalWeight: {
      if (!(t[2] > 0.0)) return "tau3 > 0 required (pseudo-count)";
      if (!(normal_gamma(t).rate > 0.0)) return "tau2 - tau1^2/tau3 > 0 required (sum-of-squares slack)";
      return {};
    }
  }
  return "unknown family";
}

bool is_admissible(const HyperParams& hp) { return admissibility_violation(hp).empty(); }

double log_partition(const HyperParams& hp) {
  require_admissible(hp);
  const auto& t = hp.tau;
  switch (hp.family) {
    case FamilyKind::BernoulliExistence:
      // log B(tau1 + 1, tau2 - tau1 + 1)
      return std::lgamma(t[0] + 1.0) + std::lgamma(t[1] - t[0] + 1.0) - std::lgamma(t[1] + 2.0);
    case FamilyKind::DCExistence:
    case FamilyKind::PoissonWeight:
      return std::lgamma(t[0] + 1.0) - (t[0] + 1.0) * std::log(t[1]);
    case FamilyKind::ExponentialWeight:
      return std::lgamma(t[1] + 1.0) - (t[1] + 1.0) * std::log(t[0]);
    case FamilyKind::NormalWeight: {
      const auto [a, b] = normal_gamma(t);
      return 0.5 * std::log(2.0 * std::numbers::pi / t[2]) + std::lgamma(a) - a * std::log(b);
    }
  }
  throw ContractError("unknown family");
}

StatVector expected_nat_params(const HyperParams& hp) {
  require_admissible(hp);
  const auto& t = hp.tau;
  switch (hp.family) {
    case FamilyKind::BernoulliExistence: {
      const double a = t[0] + 1.0;
      const double b = t[1] - t[0] + 1.0;
      const double psi_b = digamma(b);
      return {digamma(a) - psi_b, psi_b - digamma(a + b)};
    }
    case FamilyKind::DCExistence:
    case FamilyKind::PoissonWeight:
      return {digamma(t[0] + 1.0) - std::log(t[1]), -(t[0] + 1.0) / t[1]};
    case FamilyKind::ExponentialWeight:
      return {-(t[1] + 1.0) / t[0], digamma(t[1] + 1.0) - std::log(t[0])};
    case FamilyKind::NormalWeight: {
      const auto [a, b] = normal_gamma(t);
      const double mean = t[0] / t[2];
      const double precision = a / b;
      return {precision * mean, -0.5 * precision,
              -0.5 * (precision * mean * mean + 1.0 / t[2]) + 0.5 * (digamma(a) - std::log(b))};
    }
  }
  throw ContractError("unknown family");
}

HyperParams posterior_update(const HyperParams& prior, const StatVector& expected_stats) {
  if (expected_stats.size() != prior.tau.size()) {
    throw ContractError("statistic dimension does not match the prior");
  }
  return {prior.family, prior.tau + expected_stats};
}

HyperParams default_prior(FamilyKind family, double weight_mean, double weight_variance) {
  const double m = std::isfinite(weight_mean) ? weight_mean : 0.0;
  switch (family) {
    case FamilyKind::BernoulliExistence: return {family, {0.0, 0.0}};  // Beta(1, 1)
    case FamilyKind::DCExistence:
    case FamilyKind::PoissonWeight: return {family, {0.0, 1.0}};  // Gamma(1, rate 1)
    case FamilyKind::ExponentialWeight:
      // Gamma(1, rate m): prior mean rate 1 / m.
      return {family, {m > 0.0 ? m : 1.0, 0.0}};
    case FamilyKind::NormalWeight: {
      // A fraction of one observation, so tight bundles are not swamped by the
      // global spread even when (1 - alpha) scales the data down.
      const double s = (std::isfinite(weight_variance) && weight_variance > 0.0) ? weight_variance : 1.0;
      const double c = kNormalPriorCount;
      return {family, {c * m, c * (m * m + s), c}};
    }
  }
  throw ContractError("unknown family");
}

double posterior_mean(const HyperParams& hp) {
  require_admissible(hp);
  const auto& t = hp.tau;
  switch (hp.family) {
    case FamilyKind::BernoulliExistence: return (t[0] + 1.0) / (t[1] + 2.0);
    case FamilyKind::DCExistence:
    case FamilyKind::PoissonWeight: return (t[0] + 1.0) / t[1];
    case FamilyKind::ExponentialWeight:
      // E[1/rate] needs Gamma shape > 1; otherwise report 1/E[rate].
      return t[1] > 0.0 ? t[0] / t[1] : t[0] / (t[1] + 1.0);
    case FamilyKind::NormalWeight: return t[0] / t[2];
  }
  throw ContractError("unknown family");
}

}  // namespace wsbm
