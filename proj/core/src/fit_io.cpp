#include "wsbm/fit_io.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "wsbm/error.hpp"

namespace wsbm {
namespace {

using nlohmann::json;

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

json tau_json(const HyperParams& hp) {
  json arr = json::array();
  for (double v : hp.tau) arr.push_back(v);
  return arr;
}

HyperParams tau_from(FamilyKind family, const json& arr) {
  HyperParams hp{family, StatVector(dimension(family))};
  if (!arr.is_array() || arr.size() != dimension(family)) throw InputError("tau has the wrong dimension");
  for (std::size_t c = 0; c < arr.size(); ++c) hp.tau[c] = arr[c].get<double>();
  return hp;
}

json header(std::string_view kind) {
  return json{{"format", std::string("wsbm-") + std::string(kind)}, {"format_version", kSchemaVersion}};
}

json config_json(const ModelConfig& c) {
  json j{{"k", c.k},
         {"alpha", c.alpha},
         {"existence_family", to_string(c.existence_family)},
         {"weight_family", to_string(c.weight_family)},
         {"mu0", c.mu0}};
  j["existence_prior"] = c.existence_prior ? tau_json(*c.existence_prior) : json(nullptr);
  j["weight_prior"] = c.weight_prior ? tau_json(*c.weight_prior) : json(nullptr);
  return j;
}

FamilyKind family_from(const json& j) {
  const auto f = parse_family(j.get<std::string>());
  if (!f) throw InputError("unknown family " + j.get<std::string>());
  return *f;
}

ModelConfig config_from(const json& j) {
  ModelConfig c;
  c.k = j.at("k").get<int>();
  c.alpha = j.at("alpha").get<double>();
  c.existence_family = family_from(j.at("existence_family"));
  c.weight_family = family_from(j.at("weight_family"));
  c.mu0 = j.at("mu0").get<std::vector<double>>();
  if (!j.at("existence_prior").is_null()) c.existence_prior = tau_from(c.existence_family, j.at("existence_prior"));
  if (!j.at("weight_prior").is_null()) c.weight_prior = tau_from(c.weight_family, j.at("weight_prior"));
  return c;
}

BundlePosteriors posteriors_from_taus(const ModelConfig& c, std::vector<HyperParams> te, std::vector<HyperParams> tw) {
  BundlePosteriors p;
  p.k = c.k;
  p.prior_existence = *c.existence_prior;
  p.prior_weight = *c.weight_prior;
  for (const auto& t : te) p.eta_existence.push_back(expected_nat_params(t));
  for (const auto& t : tw) p.eta_weight.push_back(expected_nat_params(t));
  p.tau_existence = std::move(te);
  p.tau_weight = std::move(tw);
  return p;
}

}  // namespace

void write_fit_json(const FitResult& fit, std::ostream& out) {
  const int k = fit.config.k;
  json j = header("fit");
  j["engine"] = to_string(fit.engine);
  j["elbo_kind"] = fit.engine == Engine::BeliefPropagation ? "bethe" : "mean-field";
  j["config"] = config_json(fit.config);
  j["seed"] = fit.seed;
  j["init"] = fit.init ? std::string(to_string(*fit.init)) : std::string("given");
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["elbo"] = number(fit.elbo);
  json trace = json::array();
  for (double g : fit.elbo_trace) trace.push_back(number(g));
  j["elbo_trace"] = trace;
  j["vertices"] = fit.vertex_names;
  j["labels"] = fit.labels();
  json beliefs = json::array();
  for (std::size_t i = 0; i < fit.beliefs.num_vertices(); ++i) {
    const auto row = fit.beliefs.row(i);
    beliefs.push_back(std::vector<double>(row.begin(), row.end()));
  }
  j["beliefs"] = beliefs;
  json bundles = json::array();
  for (int z = 0; z < k; ++z) {
    for (int zp = 0; zp < k; ++zp) {
      const int r = bundle_index(k, z, zp);
      bundles.push_back({{"index", r},
                         {"from", z},
                         {"to", zp},
                         {"existence_tau", tau_json(fit.posteriors.tau_existence[r])},
                         {"weight_tau", tau_json(fit.posteriors.tau_weight[r])},
                         {"existence_tau_predictive", tau_json(fit.predictive.tau_existence[r])},
                         {"weight_tau_predictive", tau_json(fit.predictive.tau_weight[r])},
                         {"existence_mean", number(posterior_mean(fit.predictive.tau_existence[r]))},
                         {"weight_mean", number(posterior_mean(fit.predictive.tau_weight[r]))},
                         {"map_weight_mean", number(fit.bundle_weight_mean(z, zp))}});
    }
  }
  j["bundles"] = bundles;
  j["training"] = {{"out_degree", fit.out_degree},
                   {"in_degree", fit.in_degree},
                   {"global_weight_mean", number(fit.global_weight_mean)}};
  out << j.dump(2) << '\n';
}

FitResult read_fit_json(std::istream& in) {
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError(std::string("fit document is not valid JSON: ") + e.what());
  }
  try {
    if (j.value("format", "") != "wsbm-fit") throw InputError("not a fit document");
    if (j.at("format_version").get<int>() != kSchemaVersion) throw InputError("unsupported fit format version");
    FitResult fit;
    fit.engine = j.at("engine").get<std::string>() == "bp" ? Engine::BeliefPropagation : Engine::VariationalBayes;
    fit.config = config_from(j.at("config"));
    if (!fit.config.existence_prior || !fit.config.weight_prior) throw InputError("fit document lacks priors");
    fit.config.validate();
    fit.seed = j.at("seed").get<std::uint64_t>();
    if (const auto init = j.value("init", std::string("given")); init != "given") fit.init = parse_init_kind(init);
    fit.converged = j.at("converged").get<bool>();
    fit.iterations = j.at("iterations").get<int>();
    fit.elbo = number_from(j.at("elbo"));
    for (const auto& g : j.at("elbo_trace")) fit.elbo_trace.push_back(number_from(g));
    fit.vertex_names = j.at("vertices").get<std::vector<std::string>>();

    const int k = fit.config.k;
    const auto rows = j.at("beliefs");
    fit.beliefs = VertexBeliefs(rows.size(), k);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto row = rows[i].get<std::vector<double>>();
      if (row.size() != static_cast<std::size_t>(k)) throw InputError("belief row has the wrong length");
      std::copy(row.begin(), row.end(), fit.beliefs.row(i).begin());
    }
    fit.beliefs.validate(1e-9);
    if (fit.vertex_names.size() != fit.beliefs.num_vertices()) throw InputError("vertex list and beliefs differ");

    const auto& bundles = j.at("bundles");
    const std::size_t kk = static_cast<std::size_t>(k) * k;
    if (bundles.size() != kk) throw InputError("wrong number of bundles");
    std::vector<HyperParams> te(kk), tw(kk), pe(kk), pw(kk);
    fit.bundle_weight_mean = Matrix(k, k);
    for (const auto& b : bundles) {
      const auto r = b.at("index").get<std::size_t>();
      if (r >= kk) throw InputError("bundle index out of range");
      te[r] = tau_from(fit.config.existence_family, b.at("existence_tau"));
      tw[r] = tau_from(fit.config.weight_family, b.at("weight_tau"));
      pe[r] = tau_from(fit.config.existence_family, b.at("existence_tau_predictive"));
      pw[r] = tau_from(fit.config.weight_family, b.at("weight_tau_predictive"));
      fit.bundle_weight_mean.data()[r] = number_from(b.at("map_weight_mean"));
    }
    fit.posteriors = posteriors_from_taus(fit.config, std::move(te), std::move(tw));
    fit.predictive = posteriors_from_taus(fit.config, std::move(pe), std::move(pw));

    const auto& tr = j.at("training");
    fit.out_degree = tr.at("out_degree").get<std::vector<double>>();
    fit.in_degree = tr.at("in_degree").get<std::vector<double>>();
    fit.global_weight_mean = number_from(tr.at("global_weight_mean"));
    if (fit.out_degree.size() != fit.beliefs.num_vertices() || fit.in_degree.size() != fit.beliefs.num_vertices()) {
      throw InputError("degree vectors do not match the vertex count");
    }
    return fit;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed fit document: ") + e.what());
  } catch (const ContractError& e) {
    throw InputError(std::string("invalid fit document: ") + e.what());
  } catch (const AdmissibilityError& e) {
    throw InputError(std::string("invalid fit document: ") + e.what());
  }
}

void write_selection_json(const SelectionReport& report, std::ostream& out, bool include_fits) {
  json j = header("selection");
  json cands = json::array();
  for (std::size_t a = 0; a < report.candidates.size(); ++a) {
    const auto& c = report.candidates[a];
    json cj{{"k", c.config.k},
            {"elbo", number(c.elbo)},
            {"restarts", c.restarts},
            {"converged", c.best.converged},
            {"nmi", c.nmi ? number(*c.nmi) : json(nullptr)},
            {"chosen", static_cast<int>(a) == report.chosen}};
    if (include_fits) cj["labels"] = c.best.labels();
    cands.push_back(cj);
  }
  // Shared by all candidates; K and the label prior vary per candidate.
  json shared = config_json(report.candidates.front().config);
  shared.erase("k");
  shared.erase("mu0");
  j["config"] = shared;
  j["candidates"] = cands;
  json factors = json::array();
  for (std::size_t a = 0; a < report.log_bayes_factors.rows(); ++a) {
    const auto row = report.log_bayes_factors.row(a);
    factors.push_back(std::vector<double>(row.begin(), row.end()));
  }
  j["log_bayes_factors"] = factors;
  j["chosen_index"] = report.chosen;
  j["chosen_k"] = report.candidates[report.chosen].config.k;
  out << j.dump(2) << '\n';
}

void write_eval_json(const EvalReport& report, std::ostream& out, bool include_records) {
  auto ms = [](const MeanSe& m) { return json{{"mean", number(m.mean)}, {"standard_error", number(m.se)}}; };
  json j = header("evaluation");
  json summary = json::array();
  for (const auto& s : report.summary) {
    summary.push_back({{"model", s.model},
                       {"existence_mse", ms(s.existence_mse)},
                       {"weight_mse", ms(s.weight_mse)},
                       {"auc", ms(s.auc)}});
  }
  j["summary"] = summary;
  j["existence_metric"] = "brier";
  if (report.transform) {
    j["weight_transform"] = {{"mode", report.transform->mode == NormalizeMode::Linear ? "linear" : "log-linear"},
                             {"lo", report.transform->lo},
                             {"hi", report.transform->hi}};
  } else {
    j["weight_transform"] = nullptr;
  }
  json trials = json::array();
  for (const auto& t : report.trials) {
    json tj{{"trial", t.trial},
            {"model", t.model},
            {"existence_mse", number(t.existence_mse)},
            {"weight_mse", number(t.weight_mse)},
            {"auc", number(t.auc)},
            {"elbo", number(t.elbo)},
            {"held_out", t.records.size()}};
    if (include_records) {
      json recs = json::array();
      for (const auto& r : t.records) {
        recs.push_back({{"src", r.src},
                        {"dst", r.dst},
                        {"predicted_existence", r.predicted_existence},
                        {"predicted_weight", number(r.predicted_weight)},
                        {"truth_existence", r.truth_existence},
                        {"truth_weight", r.truth_weight ? json(*r.truth_weight) : json(nullptr)}});
      }
      tj["records"] = recs;
    }
    trials.push_back(tj);
  }
  j["trials"] = trials;
  out << j.dump(2) << '\n';
}

}  // namespace wsbm
