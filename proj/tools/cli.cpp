#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "wsbm/error.hpp"
#include "wsbm/eval.hpp"
#include "wsbm/fit_io.hpp"
#include "wsbm/inference.hpp"
#include "wsbm/model_select.hpp"
#include "wsbm/netgraph.hpp"
#include "wsbm/synthgen.hpp"

namespace wsbm::cli {
namespace {

using nlohmann::json;

// Exit code 2 is raised through this after the artifact is written.
struct NotConverged {};

struct InputFlags {
  std::string input;
  std::string missing;
  bool undirected = false;
  bool self_loops = false;
};

struct ModelFlags {
  int k = 2;
  double alpha = 0.5;
  std::string model;
  std::string weight_dist = "normal";
  bool degree_correct = false;
  std::string engine = "vb";
};

struct RunFlags {
  int restarts = 10;
  std::uint64_t seed = 0;
  double tol = 1e-6;
  int max_iters = 1000;
  int threads = 1;
  std::string init = "kmeans";
  bool strict = false;
};

struct OutputFlags {
  std::string path;
  std::string format = "json";
  std::string log;
};

void add_input(CLI::App* app, InputFlags& f) {
  app->add_option("-i,--input", f.input, "Edge list: 'i j weight' per line")->required();
  app->add_option("--missing", f.missing, "Missing (unobserved) pairs: 'i j' per line");
  app->add_flag("--undirected", f.undirected, "Treat the edge list as undirected");
  app->add_flag("--self-loops", f.self_loops, "Model self-loops");
}

void add_model(CLI::App* app, ModelFlags& f, bool with_k) {
  if (with_k) app->add_option("--k", f.k, "Number of groups")->check(CLI::PositiveNumber);
  auto* a = app->add_option("--alpha", f.alpha, "Existence/weight mixing weight in [0, 1]")->check(CLI::Range(0.0, 1.0));
  app->add_option("--model", f.model, "Preset alpha: pure (0), balanced (0.5), classic (1)")
      ->check(CLI::IsMember({"pure", "balanced", "classic"}))
      ->excludes(a);
  app->add_option("--weight-dist", f.weight_dist, "Weight family")
      ->check(CLI::IsMember({"normal", "poisson", "exponential"}));
  app->add_flag("--degree-correct", f.degree_correct, "Degree-corrected existence");
  app->add_option("--engine", f.engine, "Inference engine")->check(CLI::IsMember({"vb", "bp"}));
}

void add_run(CLI::App* app, RunFlags& f) {
  app->add_option("--restarts", f.restarts, "Random restarts")->check(CLI::PositiveNumber);
  app->add_option("--seed", f.seed, "Master seed");
  app->add_option("--tol", f.tol, "Relative ELBO tolerance")->check(CLI::PositiveNumber);
  app->add_option("--max-iters", f.max_iters, "Outer iteration cap")->check(CLI::PositiveNumber);
  app->add_option("--threads", f.threads, "Worker threads")->check(CLI::PositiveNumber);
  app->add_option("--init", f.init, "Restart initialization")->check(CLI::IsMember({"kmeans", "dirichlet"}));
  app->add_flag("--strict", f.strict, "Exit with status 2 when the selected fit did not converge");
}

void add_output(CLI::App* app, OutputFlags& f, const std::string& default_format) {
  f.format = default_format;
  app->add_option("-o,--output", f.path, "Output file (default: standard output)");
  app->add_option("--format", f.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app->add_option("--log", f.log, "Sidecar log with timings");
}

ObservedNetwork load(const InputFlags& f) {
  LoadOptions opt;
  opt.directed = !f.undirected;
  opt.include_self_loops = f.self_loops;
  if (!f.missing.empty()) opt.missing_path = f.missing;
  return load_edge_list(f.input, opt);
}

ModelConfig model_config(const ModelFlags& f) {
  ModelConfig c;
  c.k = f.k;
  c.alpha = f.alpha;
  if (f.model == "pure") c.alpha = 0.0;
  if (f.model == "balanced") c.alpha = 0.5;
  if (f.model == "classic") c.alpha = 1.0;
  c.weight_family = *parse_family(f.weight_dist);
  if (f.degree_correct) c.existence_family = FamilyKind::DCExistence;
  return c;
}

FitOptions fit_options(const ModelFlags& m, const RunFlags& r) {
  FitOptions o;
  o.engine = m.engine == "bp" ? Engine::BeliefPropagation : Engine::VariationalBayes;
  o.stopping.outer_tol = r.tol;
  o.stopping.max_outer = r.max_iters;
  o.init = parse_init_kind(r.init);
  return o;
}

// Writes to the -o path or to `out`.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw InputError("cannot write " + path);
      stream_ = file_.get();
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

// Timestamps and durations go only to the sidecar so primary outputs stay
// byte-reproducible.
class SidecarLog {
 public:
  explicit SidecarLog(const std::string& path) : start_(std::chrono::steady_clock::now()) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw InputError("cannot write " + path);
      const std::time_t now = std::time(nullptr);
      char buf[64];
      std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
      *file_ << "started " << buf << '\n';
    }
  }
  void note(const std::string& msg) {
    if (!file_) return;
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    *file_ << '[' << s << "s] " << msg << '\n';
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::chrono::steady_clock::time_point start_;
};

std::vector<int> parse_k_range(const std::string& text) {
  auto to_int = [&](std::string_view s) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || v < 1) {
      throw InputError("malformed --k-range '" + text + "' (expected A..B with 1 <= A <= B)");
    }
    return v;
  };
  const auto dots = text.find("..");
  const int lo = to_int(std::string_view(text).substr(0, dots));
  const int hi = dots == std::string::npos ? lo : to_int(std::string_view(text).substr(dots + 2));
  if (hi < lo) throw InputError("malformed --k-range '" + text + "' (expected A..B with 1 <= A <= B)");
  std::vector<int> ks;
  for (int k = lo; k <= hi; ++k) ks.push_back(k);
  return ks;
}

// Labels aligned to `names`; every name must appear exactly once.
std::vector<int> labels_for(const std::vector<std::string>& names, const std::string& path) {
  auto [file_names, file_labels] = read_labels(path);
  std::map<std::string, int> by_name;
  for (std::size_t i = 0; i < file_names.size(); ++i) {
    if (!by_name.emplace(file_names[i], file_labels[i]).second) {
      throw InputError(path + ": vertex '" + file_names[i] + "' listed twice");
    }
  }
  if (by_name.size() != names.size()) throw InputError(path + ": labels do not cover the same vertices");
  std::vector<int> out;
  for (const auto& n : names) {
    const auto it = by_name.find(n);
    if (it == by_name.end()) throw InputError(path + ": no label for vertex '" + n + "'");
    out.push_back(it->second);
  }
  return out;
}

std::string plain_number(double v) {
  std::string s = format_double(v);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

// ---------------------------------------------------------------------------

int cmd_fit(const InputFlags& in, const ModelFlags& mf, const RunFlags& rf, const OutputFlags& of,
            const std::string& labels_out, std::ostream& out) {
  SidecarLog log(of.log);
  const ObservedNetwork net = load(in);
  log.note("loaded " + std::to_string(net.num_vertices()) + " vertices");
  const auto rr = run_restarts(net, model_config(mf), rf.restarts, rf.seed, fit_options(mf, rf), rf.threads);
  log.note("fitted " + std::to_string(rf.restarts) + " restarts");
  Sink sink(of.path, out);
  if (of.format == "json") {
    write_fit_json(rr.best, sink.get());
  } else {
    auto& o = sink.get();
    o << "vertex,label";
    for (int z = 0; z < rr.best.config.k; ++z) o << ",p" << z;
    o << '\n';
    const auto labels = rr.best.labels();
    for (std::size_t i = 0; i < labels.size(); ++i) {
      o << rr.best.vertex_names[i] << ',' << labels[i];
      for (double p : rr.best.beliefs.row(i)) o << ',' << format_double(p);
      o << '\n';
    }
  }
  if (!labels_out.empty()) {
    std::ofstream lf(labels_out);
    if (!lf) throw InputError("cannot write " + labels_out);
    write_labels(rr.best.vertex_names, rr.best.labels(), lf);
  }
  if (rf.strict && !rr.best.converged) throw NotConverged{};
  return 0;
}

int cmd_select(const InputFlags& in, const ModelFlags& mf, const RunFlags& rf, const OutputFlags& of,
               const std::string& k_range, const std::string& truth_path, std::ostream& out) {
  SidecarLog log(of.log);
  const ObservedNetwork net = load(in);
  std::vector<int> truth;
  if (!truth_path.empty()) truth = labels_for(net.names(), truth_path);
  const auto report = sweep_k(net, model_config(mf), parse_k_range(k_range), rf.restarts, rf.seed,
                              fit_options(mf, rf), rf.threads, truth_path.empty() ? nullptr : &truth);
  log.note("swept " + k_range);
  Sink sink(of.path, out);
  if (of.format == "json") {
    write_selection_json(report, sink.get());
  } else {
    write_selection_csv(report, sink.get());
  }
  if (rf.strict && !report.candidates[report.chosen].best.converged) throw NotConverged{};
  return 0;
}

struct GenerateFlags {
  std::string preset = "sbm";
  std::string output;
  std::string labels_out;
  std::string missing_out;
  std::uint64_t seed = 0;
  double sigma2 = 0.15;
  double noise_sd = 0.1;
  int group_size = 10;
  int groups = 0;
  double p_in = 0.5;
  double p_out = 0.1;
  double mean_in = 1.0;
  double mean_out = -1.0;
  double variance = 0.25;
  double missing_fraction = 0.0;
  bool undirected = false;
};

int cmd_generate(const GenerateFlags& g, std::ostream& out) {
  Sample s;
  if (g.preset == "fig2") {
    s = fig2_toy(g.group_size, g.noise_sd, g.seed);
  } else if (g.preset == "fig4") {
    s = fig4_suite(g.sigma2, g.seed, g.groups > 0 ? g.groups : 8, g.group_size);
  } else {
    const int k = g.groups > 0 ? g.groups : 2;
    GeneratorSpec spec;
    if (const auto a = parse_archetype(g.preset)) {
      spec = archetype_spec(*a, k, g.group_size, g.seed);
    } else {
      spec.k = k;
      spec.labels = labels_from_sizes(std::vector<int>(k, g.group_size));
      spec.edge_prob = Matrix(k, k, g.p_out);
      spec.weight_mean = Matrix(k, k, g.mean_out);
      spec.weight_variance = Matrix(k, k, g.variance);
      for (int z = 0; z < k; ++z) {
        spec.edge_prob(z, z) = g.p_in;
        spec.weight_mean(z, z) = g.mean_in;
      }
      spec.seed = g.seed;
    }
    spec.directed = !g.undirected;
    spec.missing_fraction = g.missing_fraction;
    try {
      s = sample(spec);
    } catch (const ContractError& e) {
      throw InputError(e.what());
    }
  }
  const std::string labels_path = g.labels_out.empty() ? g.output + ".labels.tsv" : g.labels_out;
  {
    std::ofstream ef(g.output, std::ios::binary);
    if (!ef) throw InputError("cannot write " + g.output);
    write_edge_list(s.network, ef);
  }
  {
    std::ofstream lf(labels_path, std::ios::binary);
    if (!lf) throw InputError("cannot write " + labels_path);
    write_labels(s.network.names(), s.labels, lf);
  }
  std::string missing_path;
  if (!s.network.missing_pairs().empty()) {
    missing_path = g.missing_out.empty() ? g.output + ".missing.tsv" : g.missing_out;
    std::ofstream mf(missing_path, std::ios::binary);
    if (!mf) throw InputError("cannot write " + missing_path);
    write_missing_list(s.network, mf);
  }
  json manifest{{"format", "wsbm-generate"},
                {"format_version", kSchemaVersion},
                {"preset", g.preset},
                {"seed", g.seed},
                {"directed", s.network.directed()},
                {"vertices", s.network.num_vertices()},
                {"weighted_edges", s.network.weighted_edges().size()},
                {"missing_pairs", s.network.missing_pairs().size()},
                {"groups", *std::max_element(s.labels.begin(), s.labels.end()) + 1},
                {"edges_path", g.output},
                {"labels_path", labels_path},
                {"missing_path", missing_path.empty() ? json(nullptr) : json(missing_path)}};
  out << manifest.dump(2) << '\n';
  return 0;
}

int cmd_predict(const std::string& fit_path, const std::string& pairs_path, const OutputFlags& of,
                std::ostream& out) {
  std::ifstream fin(fit_path);
  if (!fin) throw InputError("cannot open fit document " + fit_path);
  const FitResult fit = read_fit_json(fin);
  std::map<std::string, VertexId> index;
  for (std::size_t i = 0; i < fit.vertex_names.size(); ++i) index[fit.vertex_names[i]] = static_cast<VertexId>(i);

  std::ifstream pin(pairs_path);
  if (!pin) throw InputError("cannot open pairs file " + pairs_path);
  struct Row {
    std::string a, b;
    double existence, weight;
    bool approximate;
  };
  std::vector<Row> rows;
  std::string line;
  for (std::size_t lineno = 1; std::getline(pin, line); ++lineno) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string a, b, extra;
    if (!(ls >> a)) continue;
    if (!(ls >> b)) throw InputError(pairs_path + " line " + std::to_string(lineno) + ": expected 'i j'");
    const auto ia = index.find(a);
    const auto ib = index.find(b);
    if (ia == index.end() || ib == index.end()) {
      throw InputError(pairs_path + " line " + std::to_string(lineno) + ": unknown vertex");
    }
    bool approx = false;
    const double e = predict_existence(fit, ia->second, ib->second, &approx);
    rows.push_back({a, b, e, predict_weight(fit, ia->second, ib->second), approx});
  }
  Sink sink(of.path, out);
  auto& o = sink.get();
  if (of.format == "json") {
    json preds = json::array();
    for (const auto& r : rows) {
      preds.push_back({{"src", r.a},
                       {"dst", r.b},
                       {"existence", r.existence},
                       {"weight", std::isfinite(r.weight) ? json(r.weight) : json(nullptr)},
                       {"approximate", r.approximate}});
    }
    json doc{{"format", "wsbm-predictions"}, {"format_version", kSchemaVersion}, {"predictions", preds}};
    o << doc.dump(2) << '\n';
  } else {
    o << "src,dst,existence,weight,approximate\n";
    for (const auto& r : rows) {
      o << r.a << ',' << r.b << ',' << format_double(r.existence) << ',' << format_double(r.weight) << ','
        << (r.approximate ? 1 : 0) << '\n';
    }
  }
  return 0;
}

struct EvaluateFlags {
  std::vector<std::string> models{"pWSBM", "bWSBM", "SBM", "DCWBM", "DCBM"};
  double fraction = 0.2;
  int trials = 25;
  std::string normalize = "none";
  bool records = false;
};

int cmd_evaluate(const InputFlags& in, const ModelFlags& mf, const RunFlags& rf, const OutputFlags& of,
                 const EvaluateFlags& ef, std::ostream& out) {
  SidecarLog log(of.log);
  const ObservedNetwork net = load(in);
  std::vector<RosterModel> models;
  for (const auto& tag : ef.models) {
    const auto m = parse_roster_model(tag);
    if (!m) throw InputError("unknown model '" + tag + "' (expected pWSBM, bWSBM, SBM, DCWBM or DCBM)");
    models.push_back(*m);
  }
  CvOptions cv;
  cv.fraction = ef.fraction;
  cv.trials = ef.trials;
  cv.restarts = rf.restarts;
  cv.seed = rf.seed;
  cv.fit = fit_options(mf, rf);
  cv.threads = rf.threads;
  if (ef.normalize == "linear") cv.normalize = NormalizeMode::Linear;
  if (ef.normalize == "log") cv.normalize = NormalizeMode::LogThenLinear;
  const auto report = run_cv(net, make_roster(models, mf.k, *parse_family(mf.weight_dist)), cv);
  log.note("evaluated " + std::to_string(ef.trials) + " trials");
  Sink sink(of.path, out);
  if (of.format == "json") {
    write_eval_json(report, sink.get(), ef.records);
  } else {
    write_trials_csv(report, sink.get());
  }
  return 0;
}

int cmd_nmi(const std::string& a_path, const std::string& b_path, const std::string& format, std::ostream& out) {
  const auto [names, a] = read_labels(a_path);
  const auto b = labels_for(names, b_path);
  const double v = nmi(a, b);
  if (format == "json") {
    out << json{{"format", "wsbm-nmi"}, {"format_version", kSchemaVersion}, {"nmi", v}}.dump(2) << '\n';
  } else {
    out << plain_number(v) << '\n';
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weighted stochastic block models: fitting, model selection, generation, evaluation", "wsbm"};
  app.set_version_flag("--version", "wsbm " + std::string(kToolkitVersion) + " (schema " +
                                        std::to_string(kSchemaVersion) + ")");
  app.require_subcommand(1);

  InputFlags in;
  ModelFlags mf;
  RunFlags rf;
  OutputFlags of;

  auto* fit = app.add_subcommand("fit", "Fit one model (best of --restarts)");
  std::string labels_out;
  add_input(fit, in);
  add_model(fit, mf, true);
  add_run(fit, rf);
  add_output(fit, of, "json");
  fit->add_option("--labels-out", labels_out, "Also write MAP labels as 'vertex group' lines");

  auto* sel = app.add_subcommand("select-k", "Sweep K and compare by ELBO");
  std::string k_range = "1..10";
  std::string truth;
  add_input(sel, in);
  add_model(sel, mf, false);
  add_run(sel, rf);
  OutputFlags sof;
  add_output(sel, sof, "csv");
  sel->add_option("--k-range", k_range, "Inclusive range A..B");
  sel->add_option("--truth", truth, "True labels for NMI columns");

  auto* gen = app.add_subcommand("generate", "Sample a synthetic network");
  GenerateFlags gf;
  gen->add_option("--preset", gf.preset, "Network family")
      ->check(CLI::IsMember({"fig2", "fig4", "sbm", "assortative", "disassortative", "core-periphery", "ordered"}));
  gen->add_option("-o,--output", gf.output, "Edge list output")->required();
  gen->add_option("--labels-out", gf.labels_out, "Labels output (default: <output>.labels.tsv)");
  gen->add_option("--missing-out", gf.missing_out, "Missing pairs output (default: <output>.missing.tsv)");
  gen->add_option("--seed", gf.seed, "Seed");
  gen->add_option("--sigma2", gf.sigma2, "fig4 weight variance")->check(CLI::PositiveNumber);
  gen->add_option("--noise-sd", gf.noise_sd, "fig2 weight noise")->check(CLI::NonNegativeNumber);
  gen->add_option("--group-size", gf.group_size, "Vertices per group")->check(CLI::PositiveNumber);
  gen->add_option("--groups", gf.groups, "Number of groups")->check(CLI::PositiveNumber);
  gen->add_option("--p-in", gf.p_in, "sbm: within-group edge probability")->check(CLI::Range(0.0, 1.0));
  gen->add_option("--p-out", gf.p_out, "sbm: between-group edge probability")->check(CLI::Range(0.0, 1.0));
  gen->add_option("--mean-in", gf.mean_in, "sbm: within-group mean weight");
  gen->add_option("--mean-out", gf.mean_out, "sbm: between-group mean weight");
  gen->add_option("--variance", gf.variance, "sbm: weight variance")->check(CLI::PositiveNumber);
  gen->add_option("--missing-fraction", gf.missing_fraction, "Fraction of pairs made missing")
      ->check(CLI::Range(0.0, 0.99));
  gen->add_flag("--undirected", gf.undirected, "Sample an undirected network (sbm and archetypes)");

  auto* pred = app.add_subcommand("predict", "Predict existence and weight of vertex pairs from a fit");
  std::string fit_path, pairs_path;
  OutputFlags pof;
  pred->add_option("--fit", fit_path, "Fit document from 'fit'")->required();
  pred->add_option("--pairs", pairs_path, "Pairs: 'i j' per line")->required();
  add_output(pred, pof, "json");

  auto* ev = app.add_subcommand("evaluate", "Cross-validated edge and weight prediction");
  EvaluateFlags ef;
  InputFlags ein;
  ModelFlags emf;
  emf.k = 4;
  RunFlags erf;
  OutputFlags eof;
  add_input(ev, ein);
  ev->add_option("--k", emf.k, "Number of groups")->check(CLI::PositiveNumber);
  ev->add_option("--weight-dist", emf.weight_dist, "Weight family")
      ->check(CLI::IsMember({"normal", "poisson", "exponential"}));
  ev->add_option("--engine", emf.engine, "Inference engine")->check(CLI::IsMember({"vb", "bp"}));
  add_run(ev, erf);
  add_output(ev, eof, "json");
  ev->add_option("--models", ef.models, "Roster subset")->delimiter(',');
  ev->add_option("--fraction", ef.fraction, "Held-out fraction")->check(CLI::Range(0.0, 1.0));
  ev->add_option("--trials", ef.trials, "Independent splits")->check(CLI::PositiveNumber);
  ev->add_option("--normalize", ef.normalize, "Map weights to [-1, 1] first")
      ->check(CLI::IsMember({"none", "linear", "log"}));
  ev->add_flag("--records", ef.records, "Include every prediction record in the JSON report");

  auto* nm = app.add_subcommand("nmi", "Normalized mutual information of two labelings");
  std::string la, lb, nfmt = "text";
  nm->add_option("--labels-a", la, "Labels file")->required();
  nm->add_option("--labels-b", lb, "Labels file")->required();
  nm->add_option("--format", nfmt, "Output format")->check(CLI::IsMember({"text", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (fit->parsed()) return cmd_fit(in, mf, rf, of, labels_out, out);
    if (sel->parsed()) return cmd_select(in, mf, rf, sof, k_range, truth, out);
    if (gen->parsed()) return cmd_generate(gf, out);
    if (pred->parsed()) return cmd_predict(fit_path, pairs_path, pof, out);
    if (ev->parsed()) return cmd_evaluate(ein, emf, erf, eof, ef, out);
    if (nm->parsed()) return cmd_nmi(la, lb, nfmt, out);
  } catch (const NotConverged&) {
    err << "error: fit did not converge within --max-iters\n";
    return 2;
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (char& c : msg)
      if (c == '\n') c = ' ';
    err << "error: " << msg << '\n';
    return 1;
  }
  return 1;
}

}  // namespace wsbm::cli
