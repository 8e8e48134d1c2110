#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "neu/baselines/linear.hpp"
#include "neu/baselines/ola.hpp"
#include "neu/harness/backtest.hpp"
#include "neu/harness/csv.hpp"
#include "neu/harness/manifest.hpp"
#include "neu/harness/sim_study.hpp"
#include "neu/harness/yield.hpp"
#include "neu/meta/neu.hpp"
#include "neu/meta/neu_json.hpp"
#include "neu/meta/sampler.hpp"
#include "neu/reconfig/chain_json.hpp"
#include "neu/universal/urp.hpp"

namespace {

namespace fs = std::filesystem;
using neu::ConfigurationError;
using neu::Index;
using neu::Matrix;
using neu::Point;
using neu::Vector;
using neu::geometry::FamilyId;
using neu::geometry::MicroBump;
using neu::geometry::RapidRotation;
using json = neu::reconfig::json;

int default_threads() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

/// Flag-backed values that a JSON config may override. Keys are the long flag
/// names with '-' replaced by '_'.
class Settings {
 public:
  template <typename T>
  void bind(const std::string& key, T& var) {
    entries_.push_back({key, [&var](json& j, const std::string& k) { j[k] = var; },
                        [&var](const json& v) { var = v.get<T>(); }});
  }

  template <typename T>
  CLI::Option* option(CLI::App* app, const std::string& flag, T& var, const std::string& help) {
    bind(key_of(flag), var);
    return app->add_option("--" + flag, var, help);
  }

  CLI::Option* flag(CLI::App* app, const std::string& flag, bool& var, const std::string& help) {
    bind(key_of(flag), var);
    return app->add_flag("--" + flag, var, help);
  }

  void override_from(const json& cfg) {
    if (!cfg.is_object()) throw ConfigurationError("config: top level must be a JSON object");
    for (const auto& [key, value] : cfg.items()) {
      auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.key == key; });
      if (it == entries_.end()) throw ConfigurationError("config: unknown key '" + key + "' for this command");
      try {
        it->load(value);
      } catch (const json::exception&) {
        throw ConfigurationError("config: key '" + key + "' has the wrong type");
      }
    }
  }

  json dump() const {
    json j = json::object();
    for (const auto& e : entries_) e.save(j, e.key);
    return j;
  }

 private:
  struct Entry {
    std::string key;
    std::function<void(json&, const std::string&)> save;
    std::function<void(const json&)> load;
  };

  static std::string key_of(std::string flag) {
    std::replace(flag.begin(), flag.end(), '-', '_');
    return flag;
  }

  std::vector<Entry> entries_;
};

struct Globals {
  std::uint64_t seed = 0;
  std::string config;
  std::string out = ".";
  int threads = default_threads();
  std::string format = "csv";
  bool timings = false;

  void bind(Settings& s) {
    s.bind("seed", seed);
    s.bind("threads", threads);
    s.bind("format", format);
    s.bind("timings", timings);
  }

  void validate() const {
    if (format != "csv" && format != "json") throw ConfigurationError("format must be csv or json");
    if (threads < 1) throw ConfigurationError("threads must be >= 1");
  }
};

struct NeuFlags {
  int iters = 50;
  int proposals = 200;
  int refine = 100;
  int patience = 0;
  double epsilon = 1.0;
  std::string optimizer = "nelder-mead";
  std::string family = "rdr";

  explicit NeuFlags(const neu::meta::NeuConfig& base)
      : iters(base.max_iters), proposals(base.proposals_per_iter), refine(base.refine_iters),
        patience(base.patience), epsilon(base.epsilon), optimizer(to_string(base.optimizer)) {}

  void add(CLI::App* app, Settings& s) {
    s.option(app, "iters", iters, "NEU iterations");
    s.option(app, "proposals", proposals, "random theta proposals per iteration");
    s.option(app, "refine", refine, "refinement steps on the best proposal");
    s.option(app, "patience", patience, "stop after this many rejected iterations (0: never)");
    s.option(app, "epsilon", epsilon, "stopping ratio in (0, 1]");
    s.option(app, "optimizer", optimizer, "random-search|nelder-mead|finite-difference-descent|alternating");
    s.option(app, "family", family, "reconfiguration family: rdr|microbump");
  }

  neu::meta::NeuConfig config(neu::meta::NeuConfig c, const Globals& g) const {
    c.max_iters = iters;
    c.proposals_per_iter = proposals;
    c.refine_iters = refine;
    c.patience = patience;
    c.epsilon = epsilon;
    c.optimizer = neu::meta::parse_optimizer(optimizer);
    c.seed = g.seed;
    c.threads = g.threads;
    c.validate();
    return c;
  }
};

/// Files produced by a command, held in memory until the command succeeds.
struct Output {
  std::string format;
  std::vector<std::pair<std::string, std::string>> files;

  void table(const std::string& stem, const std::string& csv) {
    files.emplace_back(stem + "." + format, format == "json" ? csv_to_json(csv).dump(2) + "\n" : csv);
  }
  void document(const std::string& name, const json& j) { files.emplace_back(name, j.dump(2) + "\n"); }

  static json csv_to_json(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    const auto header = neu::harness::split_csv_line(line);
    json rows = json::array();
    while (std::getline(in, line)) {
      const auto cells = neu::harness::split_csv_line(line);
      json row = json::object();
      for (std::size_t c = 0; c < header.size() && c < cells.size(); ++c) {
        char* end = nullptr;
        const double v = std::strtod(cells[c].c_str(), &end);
        const bool numeric = !cells[c].empty() && end == cells[c].c_str() + cells[c].size() && std::isfinite(v);
        row[header[c]] = numeric ? json(v) : json(cells[c]);
      }
      rows.push_back(std::move(row));
    }
    return rows;
  }
};

void write_outputs(const fs::path& dir, const std::vector<std::pair<std::string, std::string>>& files) {
  fs::create_directories(dir);
  std::vector<fs::path> partial;
  try {
    for (const auto& [name, content] : files) {
      const fs::path tmp = dir / (name + ".partial");
      partial.push_back(tmp);
      std::ofstream os(tmp, std::ios::binary);
      os << content;
      os.close();
      if (!os) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    }
    for (std::size_t i = 0; i < files.size(); ++i) fs::rename(partial[i], dir / files[i].first);
  } catch (...) {
    std::error_code ec;
    for (const auto& p : partial) fs::remove(p, ec);
    throw;
  }
}

template <typename Fn>
decltype(auto) with_family(const std::string& name, Fn&& fn) {
  if (neu::geometry::parse_family(name) == FamilyId::rdr) return fn(std::type_identity<RapidRotation>{});
  return fn(std::type_identity<MicroBump>{});
}

std::vector<Point> read_points(const std::string& path) {
  const Matrix m = neu::harness::read_csv(path, false).values;
  std::vector<Point> pts;
  for (Index i = 0; i < m.rows(); ++i) pts.emplace_back(m.row(i).transpose());
  return pts;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string coordinate_header(const std::string& stem, Index d) {
  std::string h;
  for (Index j = 0; j < d; ++j) h += "," + stem + "_" + std::to_string(j + 1);
  return h;
}

std::string coordinates(const Vector& v) {
  std::string s;
  for (Index j = 0; j < v.size(); ++j) s += "," + fmt(v(j));
  return s;
}

std::string join(const std::vector<std::string>& parts) {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? "," : "") + parts[i];
  return s;
}

// ---------------------------------------------------------------- demo

struct DemoCommand {
  std::string points;
  std::string chain;
  std::string family = "rdr";
  int length = 5;
  std::string direction = "forward";

  void add(CLI::App* app, Settings& s) {
    s.option(app, "points", points, "CSV of points, one per row")->required();
    s.option(app, "chain", chain, "chain JSON; a random chain is drawn when omitted");
    s.option(app, "family", family, "family of the random chain: rdr|microbump");
    s.option(app, "length", length, "number of thetas in the random chain");
    s.option(app, "direction", direction, "forward (reconfigure) or inverse (deconfigure)");
  }

  void run(const Globals& g, Output& out) const {
    if (direction != "forward" && direction != "inverse")
      throw ConfigurationError("demo: direction must be forward or inverse");
    const Matrix pts = neu::harness::read_csv(points, false).values;
    if (pts.rows() < 1) throw neu::DomainError("demo: no points");
    json doc;
    if (!chain.empty()) {
      std::ifstream in(chain);
      if (!in) throw neu::DomainError("demo: cannot open '" + chain + "'");
      try {
        doc = json::parse(in);
      } catch (const json::exception& e) {
        throw neu::DomainError("demo: bad chain JSON: " + std::string(e.what()));
      }
    }
    const std::string fam = chain.empty() ? family : neu::reconfig::chain_family(doc);
    with_family(fam, [&](auto tag) {
      using F = typename decltype(tag)::type;
      neu::reconfig::ReconfigChain<F> c(pts.cols());
      if (!chain.empty()) {
        c = neu::reconfig::chain_from_json<F>(doc);
      } else {
        if (length < 0) throw ConfigurationError("demo: length must be >= 0");
        const auto stats = neu::meta::DataStats::of(pts);
        std::mt19937_64 rng(g.seed);
        std::vector<typename F::theta_type> thetas;
        for (int i = 0; i < length; ++i)
          thetas.push_back(neu::meta::propose_theta<F>(neu::meta::SamplerConfig{}, rng, stats, i));
        c = neu::reconfig::ReconfigChain<F>(pts.cols(), std::move(thetas));
      }
      neu::require_dim(pts.cols(), c.dim(), "demo points");
      std::ostringstream os;
      os << "point" << coordinate_header("start", c.dim()) << coordinate_header("end", c.dim()) << ",error\n";
      for (Index i = 0; i < pts.rows(); ++i) {
        const Point p = pts.row(i).transpose();
        const bool fwd = direction == "forward";
        const Point q = fwd ? c.reconfigure(p) : c.deconfigure(p);
        const Point back = fwd ? c.deconfigure(q) : c.reconfigure(q);
        os << i << coordinates(p) << coordinates(q) << ',' << fmt((back - p).norm()) << '\n';
      }
      out.document("chain.json", neu::reconfig::chain_to_json(c));
      out.table("points", os.str());
    });
  }
};

// ---------------------------------------------------------------- fit

struct FitCommand {
  std::string method;
  std::string data;
  int responses = 1;
  double lambda = 0.1;
  double alpha = 0.5;
  double validation_fraction = 0.2;
  NeuFlags budget{neu::meta::NeuConfig{}};

  void add(CLI::App* app, Settings& s, const std::string& m) {
    method = m;
    s.option(app, "data", data, "CSV with a header; trailing column(s) are responses")->required();
    s.option(app, "responses", responses, "number of trailing response columns");
    if (m == "ridge" || m == "lasso" || m == "enet") s.option(app, "lambda", lambda, "penalty weight");
    if (m == "enet") s.option(app, "alpha", alpha, "mixing weight: 0 is LASSO, 1 is Ridge");
    if (m == "neu-ols") {
      s.option(app, "validation-fraction", validation_fraction, "trailing share of rows used for validation");
      budget.add(app, s);
    }
  }

  void run(const Globals& g, Output& out) const {
    if (responses != 1) throw ConfigurationError("fit: only one response column is supported");
    const auto table = neu::harness::read_csv(data, false);
    const Matrix& v = table.values;
    if (v.cols() < 2) throw neu::DomainError("fit: need at least one regressor and one response column");
    if (v.rows() < 2) throw neu::DomainError("fit: need at least two rows");
    const Matrix x = v.leftCols(v.cols() - 1);
    const Vector y = v.col(v.cols() - 1);
    std::vector<std::string> names{"intercept"};
    for (Index j = 0; j + 1 < v.cols(); ++j) names.push_back(table.header[j]);

    auto emit_coefficients = [&](json& doc, const Vector& coef) {
      json arr = json::array();
      std::ostringstream os;
      os << "name,value\n";
      for (Index j = 0; j < coef.size(); ++j) {
        arr.push_back({{"name", names[j]}, {"value", coef(j)}});
        os << names[j] << ',' << fmt(coef(j)) << '\n';
      }
      doc["coefficients"] = arr;
      out.table("coefficients", os.str());
    };

    if (method == "neu-ols") {
      if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
        throw ConfigurationError("fit: validation-fraction must lie in [0, 1)");
      const Index n_val = static_cast<Index>(std::floor(validation_fraction * v.rows()));
      const neu::learning::Dataset ds(v.topRows(v.rows() - n_val), v.bottomRows(n_val));
      const auto cfg = budget.config(neu::meta::NeuConfig{}, g);
      const auto ola = neu::baselines::ols_ola();
      with_family(budget.family, [&](auto tag) {
        using F = typename decltype(tag)::type;
        const auto r = neu::meta::neu_fit<F>(ola, ds, cfg);
        json doc = neu::meta::neu_result_json(r);
        doc["method"] = method;
        doc["response"] = table.header.back();
        doc["train_mse"] = neu::meta::number_json(
            neu::meta::deconfigured_loss(r.chain, ola, r.evaluation.beta_hat, ds.train) / ds.train.rows());
        doc["validation_mse"] =
            n_val > 0 ? neu::meta::number_json(
                            neu::meta::deconfigured_loss(r.chain, ola, r.evaluation.beta_hat, ds.validation) / n_val)
                      : json(nullptr);
        emit_coefficients(doc, r.evaluation.beta_hat);
        out.table("history", neu::meta::neu_history_csv(r));
        out.document("fit.json", doc);
      });
      return;
    }

    neu::baselines::LinearModel m;
    if (method == "ols") {
      m = neu::baselines::ols_fit_centered(x, y);
    } else {
      const double a = method == "ridge" ? 1.0 : method == "lasso" ? 0.0 : alpha;
      m = neu::baselines::enet_fit_centered(x, y, neu::baselines::EnetSpec{lambda, a});
    }
    Vector coef(m.beta.size() + 1);
    coef << m.intercept, m.beta;
    json doc = {{"method", method}, {"response", table.header.back()}, {"rows", v.rows()}};
    if (method != "ols") doc["lambda"] = lambda;
    if (method == "enet") doc["alpha"] = alpha;
    doc["train_mse"] = (y - m.predict_rows(x)).squaredNorm() / static_cast<double>(v.rows());
    emit_coefficients(doc, coef);
    out.document("fit.json", doc);
  }
};

// ---------------------------------------------------------------- pca

struct PcaCommand {
  bool with_neu = false;
  std::string data;
  bool labels = false;
  int days = 500;
  int k_max = 4;
  int train = 300;
  int validation = 100;
  int test = 100;
  double kpca_sigma = 0.0;
  std::vector<std::string> methods;
  NeuFlags budget{neu::harness::PcaStudyConfig{}.neu};

  void add(CLI::App* app, Settings& s, bool neu_pca) {
    with_neu = neu_pca;
    methods = neu_pca ? std::vector<std::string>{"pca", "neu-pca", "kpca", "neu-kpca"}
                      : std::vector<std::string>{"pca", "kpca"};
    s.option(app, "data", data, "CSV of observations (rows) by variables; synthetic yield curves when omitted");
    s.flag(app, "labels", labels, "the first CSV column holds row labels such as dates");
    s.option(app, "days", days, "rows of synthetic yield-curve data");
    s.option(app, "k-max", k_max, "largest factor count");
    s.option(app, "train", train, "training rows");
    s.option(app, "validation", validation, "validation rows");
    s.option(app, "test", test, "test rows");
    s.option(app, "kpca-sigma", kpca_sigma, "Gaussian kernel width (0: median pairwise distance)");
    s.option(app, "methods", methods, "methods to run")->delimiter(',');
    if (neu_pca) budget.add(app, s);
  }

  void run(const Globals& g, Output& out) const {
    const Matrix values = data.empty()
                              ? neu::harness::synth_yield_curve(days, neu::harness::default_maturities(), g.seed)
                              : neu::harness::read_csv(data, labels).values;
    neu::harness::PcaStudyConfig cfg;
    cfg.split = {train, validation, test};
    cfg.k_max = k_max;
    cfg.kpca_sigma = kpca_sigma;
    cfg.methods.clear();
    for (const auto& m : methods) cfg.methods.push_back(neu::harness::parse_pca_method(m));
    cfg.neu = budget.config(cfg.neu, g);
    if (neu::geometry::parse_family(budget.family) != FamilyId::rdr)
      throw ConfigurationError("pca: the study uses rapid rotations (family rdr)");
    const auto r = neu::harness::pca_study(values, cfg);
    out.table("explained", neu::harness::pca_table_csv(r, r.explained, "explained"));
    out.table("test_loss", neu::harness::pca_table_csv(r, r.test_loss, "test_loss"));
  }
};

// ---------------------------------------------------------------- sim-study

struct SimCommand {
  std::string target = "m1";
  double sigma = 0.1;
  int n = 1000;
  int seeds = 1;
  std::vector<std::string> methods{"neu-ols", "p-splines", "loess"};
  double level = 0.95;
  int resamples = 1000;
  NeuFlags budget{neu::harness::default_sim_neu_config()};

  void add(CLI::App* app, Settings& s) {
    s.option(app, "target", target, "target function: m1|m2|m3");
    s.option(app, "sigma", sigma, "noise scale");
    s.option(app, "n", n, "sample size");
    s.option(app, "seeds", seeds, "number of consecutive seeds starting at --seed");
    s.option(app, "methods", methods, "methods to run: neu-ols,p-splines,loess,ols")->delimiter(',');
    s.option(app, "level", level, "BCa confidence level");
    s.option(app, "resamples", resamples, "bootstrap resamples");
    budget.add(app, s);
  }

  void run(const Globals& g, Output& out) const {
    if (seeds < 1) throw ConfigurationError("sim-study: seeds must be >= 1");
    neu::harness::SimStudyConfig cfg;
    cfg.sim.target = neu::harness::parse_target(target);
    cfg.sim.sigma = sigma;
    cfg.sim.n = n;
    cfg.sim.seed = g.seed;
    cfg.sim.validate();
    cfg.methods.clear();
    for (const auto& m : methods) cfg.methods.push_back(neu::harness::parse_sim_method(m));
    cfg.bca = {level, resamples, g.seed};
    cfg.bca.validate();
    cfg.neu = budget.config(cfg.neu, g);
    cfg.family = neu::geometry::parse_family(budget.family);
    std::vector<neu::harness::StudyReport> reports;
    if (seeds == 1)
      reports.push_back(neu::harness::run_sim_study(cfg));
    else
      reports = neu::harness::run_sim_seeds(cfg, seeds, g.threads);
    out.table("study", neu::harness::study_csv(reports, g.timings));
    if (seeds > 1) {
      std::ostringstream os;
      os << std::setprecision(10) << "method,median_test_mse\n";
      for (const auto m : cfg.methods) os << to_string(m) << ',' << neu::harness::median_mse(reports, m) << '\n';
      out.table("summary", os.str());
    }
  }
};

// ---------------------------------------------------------------- backtest

struct BacktestCommand {
  std::string prices;
  int synthetic_rows = 0;
  int regressors = 2;
  double slope = 0.8;
  double noise = 0.005;
  neu::harness::WindowSpec window;
  std::vector<std::string> methods{"ols", "enet", "neu-ols"};
  bool learn_once = false;
  NeuFlags budget{neu::harness::BacktestConfig{}.neu};

  void add(CLI::App* app, Settings& s) {
    s.option(app, "prices", prices, "CSV: date column, then one price column per asset (first is the target)");
    s.option(app, "synthetic-rows", synthetic_rows, "generate this many rows of synthetic prices instead");
    s.option(app, "regressors", regressors, "synthetic regressor assets");
    s.option(app, "slope", slope, "synthetic target-return slope on the first regressor");
    s.option(app, "noise", noise, "synthetic target-return noise");
    s.option(app, "train-len", window.train_len, "training rows per window");
    s.option(app, "validation-len", window.validation_len, "validation rows per window");
    s.option(app, "test-len", window.test_len, "test rows per window");
    s.option(app, "stride", window.stride, "rows between window starts");
    s.option(app, "methods", methods, "methods to run: ols,enet,neu-ols")->delimiter(',');
    s.flag(app, "learn-once", learn_once, "learn the NEU chain on the first window only and reuse it");
    budget.add(app, s);
  }

  void run(const Globals& g, Output& out) const {
    if (prices.empty() == (synthetic_rows == 0))
      throw ConfigurationError("backtest: give exactly one of --prices and --synthetic-rows");
    Matrix p;
    if (!prices.empty()) {
      p = neu::harness::read_csv(prices, true).values;
    } else {
      const auto synth = neu::harness::synth_prices(synthetic_rows, regressors, slope, noise, g.seed);
      p = synth.prices;
      out.table("prices", neu::harness::prices_csv(synth));
    }
    neu::harness::BacktestConfig cfg;
    cfg.window = window;
    cfg.methods.clear();
    for (const auto& m : methods) cfg.methods.push_back(neu::harness::parse_backtest_method(m));
    cfg.neu = budget.config(cfg.neu, g);
    if (neu::geometry::parse_family(budget.family) != FamilyId::rdr)
      throw ConfigurationError("backtest: NEU-OLS uses rapid rotations (family rdr)");
    cfg.neu_every_window = !learn_once;
    cfg.bca.seed = g.seed;
    const auto r = neu::harness::rolling_window_backtest(p, cfg);
    out.table("backtest", neu::harness::backtest_csv(r, g.timings));
    std::ostringstream os;
    os << std::setprecision(10) << "window";
    for (const auto& m : r.methods) os << ',' << to_string(m.method);
    os << '\n';
    for (int w = 0; w < r.windows; ++w) {
      os << w;
      for (const auto& m : r.methods) os << ',' << m.window_errors[w];
      os << '\n';
    }
    out.table("window_errors", os.str());
  }
};

// ---------------------------------------------------------------- urp-check

struct UrpCommand {
  std::string sources;
  std::string targets;
  std::string fixed;
  std::string family = "rdr";
  double clearance = 0.25;
  double step = 0.5;

  void add(CLI::App* app, Settings& s) {
    s.option(app, "sources", sources, "CSV of source points")->required();
    s.option(app, "targets", targets, "CSV of target points, row-aligned with the sources")->required();
    s.option(app, "fixed", fixed, "CSV of points that must stay put");
    s.option(app, "family", family, "rdr|microbump (microbump needs D = 2)");
    s.option(app, "clearance", clearance, "clearance as a fraction of the minimum pairwise distance");
    s.option(app, "step", step, "step length as a fraction of the clearance");
  }

  void run(const Globals& g, Output& out) const {
    const auto src = read_points(sources);
    const auto tgt = read_points(targets);
    const auto fix = fixed.empty() ? std::vector<Point>{} : read_points(fixed);
    neu::universal::UrpOptions opts;
    opts.clearance_factor = clearance;
    opts.step_fraction = step;
    with_family(family, [&](auto tag) {
      using F = typename decltype(tag)::type;
      const auto built = neu::universal::construct_reconfiguration<F>(src, tgt, fix, opts);
      const auto rep = neu::universal::verify_urp(built.chain, src, tgt, fix, g.threads);
      if (!rep.ok())
        throw neu::ConstructionError("urp-check: verification failed (endpoint error " +
                                     fmt(rep.max_endpoint_error) + ", fixed drift " + fmt(rep.max_fixed_drift) + ")");
      const Index d = built.chain.dim();
      std::ostringstream os;
      os << "kind,index" << coordinate_header("start", d) << coordinate_header("target", d)
         << coordinate_header("end", d) << ",error\n";
      for (std::size_t i = 0; i < src.size(); ++i)
        os << "source," << i << coordinates(src[i]) << coordinates(tgt[i]) << coordinates(built.chain.reconfigure(src[i]))
           << ',' << fmt(rep.endpoint_errors[i]) << '\n';
      for (std::size_t i = 0; i < fix.size(); ++i)
        os << "fixed," << i << coordinates(fix[i]) << coordinates(fix[i]) << coordinates(built.chain.reconfigure(fix[i]))
           << ',' << fmt(rep.fixed_drifts[i]) << '\n';
      out.document("chain.json", neu::reconfig::chain_to_json(built.chain));
      out.table("points", os.str());
      out.document("report.json", {{"max_endpoint_error", rep.max_endpoint_error},
                                   {"max_fixed_drift", rep.max_fixed_drift},
                                   {"chain_length", rep.chain_length},
                                   {"clearance", built.clearance},
                                   {"ok", rep.ok()}});
    });
  }
};

struct Command {
  std::string name;
  CLI::App* app = nullptr;
  Settings settings;
  std::function<void(const Globals&, Output&)> run;
};

json read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw neu::DomainError("cannot open config '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw neu::DomainError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-Euclidean upgrading: reconfiguration demos, fits, studies and checks", "neu"};
  app.option_defaults()->always_capture_default();
  app.fallthrough();
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  Globals g;
  // accepted before or after the subcommand name, and listed in every --help
  auto add_globals = [&g](CLI::App* a) {
    a->add_option("--seed", g.seed, "master seed");
    a->add_option("--config", g.config, "JSON file whose keys override the flags");
    a->add_option("--out", g.out, "output directory");
    a->add_option("--threads", g.threads, "worker threads");
    a->add_option("--format", g.format, "table format")->check(CLI::IsMember({"csv", "json"}));
    a->add_flag("--timings", g.timings, "add runtimes to tables and the manifest");
  };
  add_globals(&app);

  std::vector<std::unique_ptr<Command>> commands;
  auto make = [&](CLI::App* sub, const std::string& name) -> Command& {
    auto c = std::make_unique<Command>();
    c->name = name;
    c->app = sub;
    add_globals(sub);
    g.bind(c->settings);
    commands.push_back(std::move(c));
    return *commands.back();
  };

  DemoCommand demo;
  auto* demo_app = app.add_subcommand("demo", "demonstrations")->require_subcommand(1);
  {
    auto& c = make(demo_app->add_subcommand("reconfigure", "apply or invert a chain on a CSV of points"),
                   "demo reconfigure");
    demo.add(c.app, c.settings);
    c.run = [&](const Globals& gl, Output& o) { demo.run(gl, o); };
  }

  std::vector<std::unique_ptr<FitCommand>> fits;
  auto* fit_app = app.add_subcommand("fit", "fit a regression on a CSV dataset")->require_subcommand(1);
  for (const std::string m : {"neu-ols", "ols", "ridge", "lasso", "enet"}) {
    fits.push_back(std::make_unique<FitCommand>());
    auto& c = make(fit_app->add_subcommand(m, m + " regression of the last column on the others"), "fit " + m);
    fits.back()->add(c.app, c.settings, m);
    c.run = [f = fits.back().get()](const Globals& gl, Output& o) { f->run(gl, o); };
  }

  PcaCommand pca, neu_pca;
  {
    auto& c = make(app.add_subcommand("pca", "PCA and kernel PCA tables"), "pca");
    pca.add(c.app, c.settings, false);
    c.run = [&](const Globals& gl, Output& o) { pca.run(gl, o); };
    auto& n = make(app.add_subcommand("neu-pca", "PCA tables with and without NEU"), "neu-pca");
    neu_pca.add(n.app, n.settings, true);
    n.run = [&](const Globals& gl, Output& o) { neu_pca.run(gl, o); };
  }

  SimCommand sim;
  {
    auto& c = make(app.add_subcommand("sim-study", "simulated regression study with BCa intervals"), "sim-study");
    sim.add(c.app, c.settings);
    c.run = [&](const Globals& gl, Output& o) { sim.run(gl, o); };
  }

  BacktestCommand backtest;
  {
    auto& c = make(app.add_subcommand("backtest", "rolling-window regression backtest"), "backtest");
    backtest.add(c.app, c.settings);
    c.run = [&](const Globals& gl, Output& o) { backtest.run(gl, o); };
  }

  UrpCommand urp;
  {
    auto& c = make(app.add_subcommand("urp-check", "build and verify a chain carrying sources to targets"),
                   "urp-check");
    urp.add(c.app, c.settings);
    c.run = [&](const Globals& gl, Output& o) { urp.run(gl, o); };
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  Command* cmd = nullptr;
  for (auto& c : commands)
    if (c->app->parsed()) cmd = c.get();
  if (!cmd) {
    std::cerr << app.help();
    return 2;
  }

  try {
    if (!g.config.empty()) cmd->settings.override_from(read_config(g.config));
    g.validate();
    Output out{g.format, {}};
    const auto t0 = std::chrono::steady_clock::now();
    cmd->run(g, out);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const json timings = g.timings ? json{{"seconds", seconds}} : json(nullptr);
    out.document("manifest.json", neu::harness::run_manifest(cmd->name, cmd->settings.dump(), g.seed, timings));
    write_outputs(g.out, out.files);
    for (const auto& f : out.files) std::cout << (fs::path(g.out) / f.first).string() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "neu " << cmd->name << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}
