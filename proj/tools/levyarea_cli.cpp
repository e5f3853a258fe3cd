// levyarea: command-line front end for sampling, evaluation, training and the
// Heston MLMC experiments. Every run writes its resolved configuration, a
// manifest and its outputs into one directory.

#include "levy/batch_io.hpp"
#include "levy/cf.hpp"
#include "levy/chen.hpp"
#include "levy/metrics.hpp"
#include "levy/mlmc.hpp"
#include "levy/parallel.hpp"
#include "levy/train.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using levy::io::write_text;

namespace {

// Options shared by every subcommand.
struct Common {
  std::uint64_t seed = 1;
  std::string out;
  bool reproducible = false;
  int threads = 0;
  int depth = 10;
  std::string reference_cache;
  bool quiet = false;
};

struct HestonOptions {
  levy::heston::HestonParams p;
};

// Failure raised after outputs are written, e.g. an oracle disagreement.
class CheckFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string default_out(const std::string& command) {
  const char* env = std::getenv("LEVY_OUT_DIR");
  return (fs::path(env && *env ? env : "levy-runs") / command).string();
}

void add_common(CLI::App* app, Common& c, const std::string& command, std::uint64_t default_seed) {
  c.seed = default_seed;
  c.out = default_out(command);
  app->add_option("--seed", c.seed, "Global seed");
  app->add_option("--out", c.out, "Output directory (default $LEVY_OUT_DIR/<command>)");
  app->add_flag("--reproducible", c.reproducible,
                "Deterministic outputs only: requires an explicit seed, omits timing");
  app->add_option("--threads", c.threads, "Worker threads (default $LEVY_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--depth", c.depth, "Reference-oracle depth (2^depth fine steps)")
      ->check(CLI::Range(0, 24));
  app->add_option("--reference-cache", c.reference_cache,
                  "Directory for cached reference batches (empty: no cache)");
  app->add_flag("--quiet", c.quiet, "Suppress progress output");
}

void add_heston(CLI::App* app, HestonOptions& h) {
  app->add_option("--T", h.p.T, "Maturity");
  app->add_option("--r", h.p.r, "Interest rate");
  app->add_option("--strike", h.p.strike, "Strike K");
  app->add_option("--kappa", h.p.kappa, "Mean reversion speed");
  app->add_option("--theta", h.p.theta, "Long-run variance");
  app->add_option("--sigma", h.p.sigma, "Volatility of variance");
  app->add_option("--u0", h.p.U0, "Initial log price");
  app->add_option("--v0", h.p.V0, "Initial variance");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<int> int_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& s : split_list(text)) out.push_back(std::stoi(s));
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Reads a flat key=value file into "--key=value" arguments.
std::vector<std::string> config_arguments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot read " + path);
  std::vector<std::string> args;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--config", path + ":" + std::to_string(line_no) +
                                                 ": expected key=value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty() || key.find_first_of(" \t[].") != std::string::npos)
      throw CLI::ValidationError("--config", path + ":" + std::to_string(line_no) +
                                                 ": invalid key '" + key + "'");
    if (value == "true")
      args.push_back("--" + key);
    else if (value != "false")
      args.push_back("--" + key + "=" + value);
  }
  return args;
}

// argv with config-file values inserted right after the subcommand so that
// explicit flags, which follow, take precedence.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::string config;
  std::vector<std::string> rest;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  std::vector<std::string> out{args[0]};
  if (config.empty() || rest.empty()) {
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
  }
  out.push_back(rest.front());
  for (auto& a : config_arguments(config)) out.push_back(std::move(a));
  out.insert(out.end(), rest.begin() + 1, rest.end());
  return out;
}

// key=value listing of every option of a subcommand, re-readable by --config.
std::string resolved_config(const CLI::App* app) {
  std::ostringstream os;
  os << "# levyarea " << app->get_name() << " " << levy::version_string() << '\n';
  for (const CLI::Option* opt : app->get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string name = opt->get_lnames().front();
    if (name == "help" || name == "quiet") continue;
    std::string value;
    if (opt->get_type_size() == 0) {
      value = opt->count() > 0 ? "true" : "false";
    } else if (opt->count() > 0) {
      const auto& results = opt->results();
      value = results.back();
    } else {
      value = opt->get_default_str();
    }
    os << name << '=' << value << '\n';
  }
  return os.str();
}

class Run {
 public:
  Run(const CLI::App* app, const Common& c) : app_(app), common_(c) {
    if (c.reproducible && app->count("--seed") == 0)
      throw CLI::ValidationError("--seed", "reproducible mode needs an explicit seed");
    levy::set_thread_count(c.threads);
    fs::create_directories(c.out);
    const fs::path probe = fs::path(c.out) / ".write_probe";
    {
      std::ofstream test(probe);
      if (!test) throw std::runtime_error("output directory is not writable: " + c.out);
    }
    fs::remove(probe);
    start_ = std::chrono::steady_clock::now();
  }

  std::string path(const std::string& name) const { return (fs::path(common_.out) / name).string(); }

  void output(const std::string& name, const std::string& text) {
    write_text(path(name), text);
    outputs_.push_back(name);
  }
  void output_file(const std::string& name) { outputs_.push_back(name); }

  void timing(const std::string& key, double value) { timing_[key] = value; }

  void log(const std::string& line) const {
    if (!common_.quiet) std::cerr << line << '\n';
  }

  void finish() {
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write_text(path("config.txt"), resolved_config(app_));
    nlohmann::ordered_json m;
    m["command"] = app_->get_name();
    m["version"] = levy::version_string();
    m["seed"] = common_.seed;
    m["reproducible"] = common_.reproducible;
    m["reference_depth"] = common_.depth;
    m["config"] = "config.txt";
    m["outputs"] = outputs_;
    write_text(path("manifest.json"), m.dump(2) + "\n");
    if (!common_.reproducible) {
      nlohmann::ordered_json t;
      t["seconds"] = seconds;
      t["threads"] = levy::thread_count();
      for (const auto& [k, v] : timing_) t[k] = v;
      write_text(path("timing.json"), t.dump(2) + "\n");
    }
    log("wrote " + common_.out);
  }

 private:
  const CLI::App* app_;
  Common common_;
  std::vector<std::string> outputs_;
  std::map<std::string, double> timing_;
  std::chrono::steady_clock::time_point start_;
};

std::shared_ptr<const levy::pairnet::GeneratorModel> load_model(const std::string& path) {
  if (path.empty()) throw CLI::ValidationError("--model", "a pairnet sampler needs --model");
  return std::make_shared<const levy::pairnet::GeneratorModel>(levy::pairnet::load(path));
}

levy::SamplerSpec make_spec(const std::string& kind, const std::string& model, int depth) {
  levy::SamplerSpec spec;
  spec.kind = levy::parse_sampler_kind(kind);
  spec.depth = depth;
  if (spec.kind == levy::SamplerKind::PairNet) spec.model = load_model(model);
  return spec;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

// ---------------------------------------------------------------- sample
struct SampleOptions {
  Common c;
  std::string kind = "foster";
  std::string model;
  int d = 4;
  long long n = 1 << 20;
  double dt = 1.0;
  std::string format = "bin";
};

void run_sample(const CLI::App* app, const SampleOptions& o) {
  Run run(app, o.c);
  if (o.n < 1) throw CLI::ValidationError("--n", "must be positive");
  const levy::SamplerSpec spec = make_spec(o.kind, o.model, o.c.depth);
  const auto t0 = std::chrono::steady_clock::now();
  levy::LevyBatch batch = levy::sample_joint(spec, levy::randkit::RngStream(o.c.seed, 0), o.n, o.d, o.dt);
  run.timing("sample_seconds",
             std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  batch.depth = spec.kind == levy::SamplerKind::Reference ? o.c.depth : -1;
  const std::string name = o.format == "csv" ? "batch.csv" : "batch.lvyb";
  levy::io::save_batch(batch, run.path(name));
  run.output_file(name);
  run.finish();
}

// ---------------------------------------------------------------- eval
struct EvalOptions {
  Common c;
  std::string kinds = "talay,davie,condgauss,foster";
  std::string model;
  std::string dims = "4";
  long long n = 1 << 20;
  int bootstrap = 20;
};

void run_eval(const CLI::App* app, const EvalOptions& o) {
  Run run(app, o.c);
  levy::metrics::EvalConfig cfg;
  for (const auto& k : split_list(o.kinds)) cfg.samplers.push_back(make_spec(k, o.model, o.c.depth));
  cfg.dims = int_list(o.dims);
  cfg.n = o.n;
  cfg.reference_depth = o.c.depth;
  cfg.seed = o.c.seed;
  cfg.bootstrap = o.bootstrap;
  const std::string cache = o.c.reference_cache;
  const std::uint64_t seed = o.c.seed;
  const auto rows = levy::metrics::evaluate(cfg, [&](int d, Eigen::Index n, int depth) {
    run.log("reference batch d=" + std::to_string(d) + " n=" + std::to_string(n));
    return levy::io::cached_reference(cache, seed, 1000 + static_cast<std::uint64_t>(d), n, d,
                                      depth);
  });
  for (const auto& r : rows)
    run.timing("seconds_per_2p20_" + r.sampler + "_d" + std::to_string(r.d), r.seconds_per_2p20);
  run.output("eval.csv", levy::metrics::eval_csv(rows));
  run.output("eval.json", levy::metrics::eval_json(rows) + "\n");
  run.finish();
}

// ---------------------------------------------------------------- chen-study
struct ChenOptions {
  Common c;
  levy::ChenStudyConfig cfg;
};

void run_chen(const CLI::App* app, ChenOptions o) {
  Run run(app, o.c);
  o.cfg.seed = o.c.seed;
  o.cfg.reference_depth = o.c.depth;
  const levy::LevyBatch ref = levy::io::cached_reference(
      o.c.reference_cache, o.cfg.seed, 1, Eigen::Index{1} << o.cfg.start_log2, o.cfg.d, o.c.depth);
  const levy::ChenStudyReport report = levy::chen_study(o.cfg, &ref);
  run.output("chen_study.csv", report.csv());
  run.output("chen_study.json", report.json() + "\n");
  run.finish();
}

// ---------------------------------------------------------------- cf
struct CfOptions {
  Common c;
  int d = 4;
  long long n = 1 << 20;
  int frequencies = 50;
  double scale = 1.0;
};

void run_cf(const CLI::App* app, const CfOptions& o) {
  Run run(app, o.c);
  const levy::LevyBatch batch = levy::io::cached_reference(o.c.reference_cache, o.c.seed, 3000, o.n,
                                                           o.d, o.c.depth);
  levy::randkit::RngStream fs_stream(o.c.seed, 3001);
  const levy::cf::Frequencies freqs =
      levy::cf::random_frequencies(fs_stream, o.frequencies, o.d + levy::area_dim(o.d), o.scale);
  const Eigen::VectorXcd emp = levy::cf::empirical_cf(batch.joint(), freqs);
  std::ostringstream os;
  os << "index";
  for (int i = 0; i < o.d; ++i) os << ",mu" << i;
  for (const auto& [i, j] : levy::pair_list(o.d)) os << ",lambda" << i << '_' << j;
  os << ",analytic,empirical_re,empirical_im,abs_diff\n";
  for (Eigen::Index m = 0; m < freqs.rows(); ++m) {
    const Eigen::VectorXd row = freqs.row(m).transpose();
    const double analytic = levy::cf::joint_cf(1.0, row.head(o.d), row.tail(levy::area_dim(o.d)));
    os << m;
    for (Eigen::Index k = 0; k < row.size(); ++k) os << ',' << fmt(row(k));
    os << ',' << fmt(analytic) << ',' << fmt(emp(m).real()) << ',' << fmt(emp(m).imag()) << ','
       << fmt(std::abs(emp(m) - analytic)) << '\n';
  }
  run.output("cf.csv", os.str());
  run.finish();
}

// ---------------------------------------------------------------- train
struct TrainOptions {
  Common c;
  levy::train::TrainConfig cfg;
  std::string hidden = "16,16,16";
  std::string norm = "l1";
  bool no_flip = false;
  long long eval_n = 1 << 17;
  std::string model_out;
  std::string init_model;
};

void run_train(const CLI::App* app, TrainOptions o) {
  Run run(app, o.c);
  o.cfg.seed = o.c.seed;
  o.cfg.hidden = int_list(o.hidden);
  o.cfg.flip = !o.no_flip;
  o.cfg.norm = levy::cf::parse_norm(o.norm);
  std::optional<levy::pairnet::GeneratorModel> initial;
  if (!o.init_model.empty()) {
    // The checkpoint fixes the architecture.
    initial = *load_model(o.init_model);
    o.cfg.d = initial->d;
    o.cfg.noise_dim = initial->noise_dim;
    const auto widths = initial->widths();
    o.cfg.hidden.assign(widths.begin() + 1, widths.end() - 1);
    o.cfg.slope = initial->slope;
  }
  o.cfg.validate();

  // Held-out model selection against an oracle batch on streams disjoint
  // from those used by eval and the acceptance suite.
  levy::train::Evaluator evaluator;
  std::shared_ptr<levy::LevyBatch> ref;
  if (o.eval_n > 0 && o.cfg.eval_every > 0) {
    run.log("building selection reference n=" + std::to_string(o.eval_n));
    ref = std::make_shared<levy::LevyBatch>(levy::io::cached_reference(
        o.c.reference_cache, o.c.seed, 5000 + static_cast<std::uint64_t>(o.cfg.d), o.eval_n,
        o.cfg.d, o.c.depth));
    const std::uint64_t seed = o.c.seed;
    const bool flip = o.cfg.flip;
    evaluator = [ref, seed, flip, &run](const levy::pairnet::GeneratorModel& model) {
      levy::pairnet::GenerateOptions g;
      g.flip = flip;
      const auto gen = levy::pairnet::generate(model, levy::randkit::RngStream(seed, 6000), ref->w,
                                               1.0, g);
      const double w2 = levy::metrics::marginal_w2(gen, *ref);
      run.log("selection w2 " + fmt(w2));
      return w2;
    };
  }
  const std::string ckpt = o.model_out.empty() ? run.path("model.ckpt") : o.model_out;
  int last_logged = -1;
  const auto result = levy::train::train(o.cfg, evaluator, ckpt, [&](int step, double loss) {
    if (step / 100 != last_logged) {
      last_logged = step / 100;
      run.log("step " + std::to_string(step) + " loss " + fmt(loss));
    }
  }, initial ? &*initial : nullptr);
  for (const auto& e : result.report.evaluations)
    run.log("eval step " + std::to_string(e.step) + " w2 " + fmt(e.w2));
  run.timing("train_seconds", result.report.seconds);
  if (o.model_out.empty()) {
    run.output_file("model.ckpt");
    run.output_file("model.ckpt.json");
  }
  run.output("train_report.json", result.report.json() + "\n");
  run.output("loss.csv", result.report.loss_csv());
  run.finish();
}

// ---------------------------------------------------------------- mlmc
struct MlmcOptions {
  Common c;
  HestonOptions h;
  std::string scheme = "strang";
  std::string area = "foster";
  std::string model;
  int levels = 7;
  long long n0 = 1 << 22;
  double reference_price = 0.0;  // 0: quadrature
  int repetitions = 10;
};

levy::mlmc::MlmcConfig mlmc_config(const MlmcOptions& o) {
  levy::mlmc::MlmcConfig cfg;
  cfg.scheme = levy::mlmc::parse_scheme(o.scheme);
  if (o.area != "none") cfg.area = make_spec(o.area, o.model, o.c.depth);
  cfg.params = o.h.p;
  cfg.levels = o.levels;
  cfg.n0 = o.n0;
  cfg.seed = o.c.seed;
  if (o.reference_price > 0.0) cfg.reference_price = o.reference_price;
  return cfg;
}

void run_mlmc(const CLI::App* app, const MlmcOptions& o) {
  Run run(app, o.c);
  const auto report = levy::mlmc::mlmc(mlmc_config(o));
  run.output("mlmc.csv", report.csv());
  run.output("mlmc.json", report.json() + "\n");
  run.finish();
}

void run_weak(const CLI::App* app, const MlmcOptions& o) {
  Run run(app, o.c);
  levy::mlmc::WeakStudyConfig cfg;
  cfg.base = mlmc_config(o);
  cfg.repetitions = o.repetitions;
  const auto report = levy::mlmc::weak_error_study(cfg);
  run.output("weakstudy.csv", report.csv());
  run.output("weakstudy.json", report.json() + "\n");
  run.finish();
}

// ---------------------------------------------------------------- price
struct PriceOptions {
  Common c;
  HestonOptions h;
  std::string convention = "standard";
  double tolerance = 1e-8;
  long long mc_paths = 0;
  long long mc_steps = 32;
  std::string mc_area = "foster";
  std::string model;
};

void run_price(const CLI::App* app, const PriceOptions& o) {
  Run run(app, o.c);
  levy::heston::QuadConfig q;
  q.convention = levy::heston::parse_convention(o.convention);
  q.tolerance = o.tolerance;
  const auto price = levy::heston::heston_price(o.h.p, q);
  nlohmann::ordered_json j;
  j["convention"] = o.convention;
  j["price"] = price.price;
  j["pi0"] = price.pi0;
  j["pi1"] = price.pi1;
  j["cutoff"] = price.cutoff;
  bool disagree = false;
  if (o.mc_paths > 0) {
    levy::mlmc::MonteCarloConfig mc;
    mc.params = o.h.p;
    mc.steps = o.mc_steps;
    mc.paths = o.mc_paths;
    mc.seed = o.c.seed;
    if (o.mc_area != "none") mc.area = make_spec(o.mc_area, o.model, o.c.depth);
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = levy::mlmc::monte_carlo(mc);
    run.timing("mc_seconds",
               std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    const double z = (r.mean - price.price) / r.se;
    disagree = std::abs(z) > 4.0;
    j["monte_carlo"] = {{"scheme", "strang"}, {"area", o.mc_area}, {"steps", r.steps},
                        {"paths", r.paths},   {"mean", r.mean},    {"se", r.se},
                        {"z", z},             {"within_99ci", std::abs(z) <= 2.5758293035489}};
  }
  run.output("price.json", j.dump(2) + "\n");
  run.finish();
  if (disagree)
    throw CheckFailed("quadrature price and Monte Carlo disagree by more than 4 standard errors");
}

int report_error(const std::string& kind, const std::string& message, int code) {
  nlohmann::ordered_json e;
  e["error"] = kind;
  e["message"] = message;
  std::cerr << e.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Levy area sampling, evaluation, training and Heston MLMC"};
  app.set_version_flag("--version", std::string(levy::version_string()));
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default()->multi_option_policy(
      CLI::MultiOptionPolicy::TakeLast);
  app.add_option("--config", "Flat key=value file; explicit flags override it");

  std::function<void()> action;

  SampleOptions so;
  auto* sample = app.add_subcommand("sample", "Draw a joint (w, area) batch");
  add_common(sample, so.c, "sample", 7);
  sample->add_option("--kind", so.kind, "talay|davie|condgauss|foster|pairnet|reference");
  sample->add_option("--model", so.model, "Generator checkpoint for pairnet");
  sample->add_option("--d", so.d, "Brownian dimension")->check(CLI::Range(2, 64));
  sample->add_option("--n", so.n, "Number of samples");
  sample->add_option("--dt", so.dt, "Time step")->check(CLI::PositiveNumber);
  sample->add_option("--format", so.format, "bin|csv")->check(CLI::IsMember({"bin", "csv"}));
  sample->callback([&] { action = [&] { run_sample(sample, so); }; });

  EvalOptions eo;
  auto* eval = app.add_subcommand("eval", "Metric table against the reference oracle");
  add_common(eval, eo.c, "eval", 2024);
  eval->add_option("--kinds", eo.kinds, "Comma-separated sampler kinds");
  eval->add_option("--model", eo.model, "Generator checkpoint for pairnet");
  eval->add_option("--dims", eo.dims, "Comma-separated dimensions");
  eval->add_option("--n", eo.n, "Samples per sampler");
  eval->add_option("--bootstrap", eo.bootstrap, "Bootstrap resamples for standard errors");
  eval->callback([&] { action = [&] { run_eval(eval, eo); }; });

  ChenOptions co;
  auto* chen = app.add_subcommand("chen-study", "Iterated Chen-combine convergence study");
  add_common(chen, co.c, "chen-study", 606);
  chen->add_option("--d", co.cfg.d, "Brownian dimension")->check(CLI::Range(2, 64));
  chen->add_option("--start-log2", co.cfg.start_log2, "log2 of the starting sample count");
  chen->add_option("--start-variance", co.cfg.start_variance,
                   "Unit-time variance of the Gaussian starting areas");
  chen->add_option("--floor-factor", co.cfg.floor_factor, "Fit while W2 >= factor * floor");
  chen->add_option("--min-rows", co.cfg.min_rows, "Stop below this many rows");
  chen->callback([&] { action = [&] { run_chen(chen, co); }; });

  CfOptions fo;
  auto* cf = app.add_subcommand("cf", "Analytic against empirical characteristic function");
  add_common(cf, fo.c, "cf", 11);
  cf->add_option("--d", fo.d, "Brownian dimension")->check(CLI::Range(2, 64));
  cf->add_option("--n", fo.n, "Reference samples");
  cf->add_option("--frequencies", fo.frequencies, "Number of random frequencies");
  cf->add_option("--scale", fo.scale, "Gaussian frequency scale");
  cf->callback([&] { action = [&] { run_cf(cf, fo); }; });

  TrainOptions to;
  auto* train = app.add_subcommand("train", "Chen-consistency adversarial training");
  add_common(train, to.c, "train", 1);
  train->add_option("--d", to.cfg.d, "Brownian dimension")->check(CLI::Range(2, 64));
  train->add_option("--batch", to.cfg.batch, "Batch size (even)");
  train->add_option("--iter-d", to.cfg.iter_d, "Discriminator steps per generator step");
  train->add_option("--lr-g", to.cfg.lr_g, "Generator learning rate");
  train->add_option("--lr-d", to.cfg.lr_d, "Frequency learning rate");
  train->add_option("--lr-final-factor", to.cfg.lr_final_factor,
                    "Cosine-decayed learning rate at the last step, relative");
  train->add_option("--beta1", to.cfg.beta1, "Adam beta1");
  train->add_option("--beta2", to.cfg.beta2, "Adam beta2");
  train->add_option("--frequencies", to.cfg.frequencies, "Number of learnable frequencies");
  train->add_option("--frequency-scale", to.cfg.frequency_scale, "Initial frequency scale");
  train->add_option("--noise-dim", to.cfg.noise_dim, "Noise inputs per coordinate");
  train->add_option("--hidden", to.hidden, "Comma-separated hidden widths");
  train->add_option("--slope", to.cfg.slope, "LeakyReLU slope");
  train->add_option("--steps", to.cfg.steps, "Generator steps");
  train->add_option("--eval-every", to.cfg.eval_every, "Selection interval (0: none)");
  train->add_option("--eval-n", to.eval_n, "Selection batch size (0: none)");
  train->add_option("--h-variance", to.cfg.h_variance, "Space-time area variance per unit time");
  train->add_option("--norm", to.norm, "l1|l2|unbiased")
      ->check(CLI::IsMember({"l1", "l2", "unbiased"}));
  train->add_flag("--split-batch", to.cfg.split_batch,
                  "Independent halves for the direct and Chen branches");
  train->add_flag("--stop-grad-chen", to.cfg.stop_grad_chen,
                  "Treat the Chen-combined target as constant");
  train->add_flag("--no-flip", to.no_flip, "Disable bridge flipping");
  train->add_option("--model-out", to.model_out, "Checkpoint path (default <out>/model.ckpt)");
  train->add_option("--init-model", to.init_model, "Start from this checkpoint (fixes the architecture)");
  train->callback([&] { action = [&] { run_train(train, to); }; });

  MlmcOptions mo;
  auto* ml = app.add_subcommand("mlmc", "Multilevel Monte Carlo for the Heston call");
  add_common(ml, mo.c, "mlmc", 1);
  add_heston(ml, mo.h);
  ml->add_option("--scheme", mo.scheme, "milstein|antithetic|strang");
  ml->add_option("--area", mo.area, "none|talay|davie|condgauss|foster|pairnet|reference");
  ml->add_option("--model", mo.model, "Generator checkpoint for pairnet");
  ml->add_option("--levels", mo.levels, "Finest level L");
  ml->add_option("--n0", mo.n0, "Paths at level 0");
  ml->add_option("--reference-price", mo.reference_price, "Oracle price (0: quadrature)");
  ml->callback([&] { action = [&] { run_mlmc(ml, mo); }; });

  MlmcOptions wo;
  wo.c.depth = 10;
  auto* weak = app.add_subcommand("weakstudy", "Repeated MLMC runs and fitted weak order");
  add_common(weak, wo.c, "weakstudy", 1);
  add_heston(weak, wo.h);
  weak->add_option("--scheme", wo.scheme, "milstein|antithetic|strang");
  weak->add_option("--area", wo.area, "none|talay|davie|condgauss|foster|pairnet|reference");
  weak->add_option("--model", wo.model, "Generator checkpoint for pairnet");
  weak->add_option("--levels", wo.levels, "Finest level L");
  weak->add_option("--n0", wo.n0, "Paths at level 0");
  weak->add_option("--reference-price", wo.reference_price, "Oracle price (0: quadrature)");
  weak->add_option("--repetitions", wo.repetitions, "Independent MLMC runs");
  weak->callback([&] { action = [&] { run_weak(weak, wo); }; });

  PriceOptions po;
  auto* price = app.add_subcommand("price", "Semi-analytic Heston call price");
  add_common(price, po.c, "price", 1);
  add_heston(price, po.h);
  price->add_option("--convention", po.convention, "standard|printed")
      ->check(CLI::IsMember({"standard", "printed"}));
  price->add_option("--tolerance", po.tolerance, "Quadrature refinement tolerance");
  price->add_option("--mc-paths", po.mc_paths, "Monte Carlo cross-check paths (0: none)");
  price->add_option("--mc-steps", po.mc_steps, "Strang steps per Monte Carlo path");
  price->add_option("--mc-area", po.mc_area, "Area sampler for the Monte Carlo check");
  price->add_option("--model", po.model, "Generator checkpoint for pairnet");
  price->callback([&] { action = [&] { run_price(price, po); }; });

  std::vector<std::string> args;
  try {
    args = expand_config(argc, argv);
  } catch (const CLI::Error& e) {
    return report_error("invalid_config", e.what(), 2);
  }
  std::vector<const char*> cargs;
  for (const auto& a : args) cargs.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), 2);
  }
  try {
    if (action) action();
  } catch (const CLI::Error& e) {
    return report_error("invalid_argument", e.what(), 2);
  } catch (const CheckFailed& e) {
    return report_error("check_failed", e.what(), 3);
  } catch (const levy::FormatError& e) {
    return report_error("format", e.what(), 4);
  } catch (const std::invalid_argument& e) {
    return report_error("invalid_argument", e.what(), 2);
  } catch (const std::exception& e) {
    return report_error("runtime", e.what(), 1);
  }
  return 0;
}
