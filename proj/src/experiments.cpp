#include "quadinv/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "quadinv/linalg.hpp"

namespace quadinv {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kPresetConditionCap = 1e4;

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view text, const std::pair<std::string_view, Enum> (&table)[N], const char* what) {
  for (const auto& [name, value] : table) {
    if (name == text) {
      return value;
    }
  }
  std::string msg = std::string("unknown ") + what + " '" + std::string(text) + "' (expected one of:";
  for (const auto& entry : table) {
    msg += " " + std::string(entry.first);
  }
  throw UsageError(msg + ")");
}

template <typename Enum, std::size_t N>
std::string_view enum_name(Enum value, const std::pair<std::string_view, Enum> (&table)[N]) {
  for (const auto& [name, v] : table) {
    if (v == value) {
      return name;
    }
  }
  return "?";
}

constexpr std::pair<std::string_view, PresetName> kPresets[] = {
    {"fig1a", PresetName::fig1a}, {"fig1b", PresetName::fig1b}, {"fig2a", PresetName::fig2a},
    {"fig2b", PresetName::fig2b}, {"thm3", PresetName::thm3},   {"root-demo", PresetName::root_demo},
};

constexpr std::pair<std::string_view, Method> kMethods[] = {
    {"adaptive-gd", Method::adaptive_gd}, {"adaptive-sgd", Method::adaptive_sgd},
    {"root", Method::root},               {"newton", Method::newton},
    {"fixed-gd", Method::fixed_gd},       {"kaczmarz", Method::kaczmarz},
    {"hybrid", Method::hybrid},           {"polyrate", Method::polyrate},
};

double parse_number(std::string_view text, const char* what) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end || !std::isfinite(value)) {
    throw UsageError(std::string("invalid ") + what + " '" + std::string(text) + "'");
  }
  return value;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json config_json(const SolverConfig& cfg) {
  json j;
  j["step_rule"] = step_rule_name(cfg.step_rule);
  std::visit(
      [&j](const auto& rule) {
        using T = std::decay_t<decltype(rule)>;
        if constexpr (std::is_same_v<T, FixedStep>) {
          j["eta"] = rule.eta;
        } else if constexpr (std::is_same_v<T, AdaptiveRoot>) {
          j["d"] = rule.d;
        } else if constexpr (std::is_same_v<T, MatrixPolynomial>) {
          j["coeffs"] = rule.coeffs;
        }
      },
      cfg.step_rule);
  j["tol_loss"] = cfg.tol_loss;
  j["max_iters"] = cfg.max_iters;
  j["max_epochs"] = cfg.max_epochs;
  j["divergence_factor"] = cfg.divergence_factor;
  j["schedule"] = schedule_name(cfg.schedule);
  j["seed"] = cfg.seed;
  j["record_every"] = cfg.record_every;
  j["record_wallclock"] = cfg.record_wallclock;
  return j;
}

json spec_json(const RandomMatrixSpec& spec) {
  static constexpr std::string_view kinds[] = {"general-invertible", "spd", "rank-deficient-target"};
  json j;
  j["kind"] = kinds[static_cast<int>(spec.kind)];
  j["n"] = spec.n;
  j["seed"] = spec.seed;
  j["condition_cap"] = optional_json(spec.condition_cap);
  j["sigma_floor"] = optional_json(spec.sigma_floor);
  j["sigma_ceiling"] = optional_json(spec.sigma_ceiling);
  j["rank"] = spec.rank ? json(*spec.rank) : json(nullptr);
  return j;
}

std::string init_text(const InitScheme& init) {
  switch (init.kind) {
  case InitKind::zero:
    return "zero";
  case InitKind::scaled_true_inverse:
    return "scaled-inverse:" + format_double(init.scale);
  case InitKind::scaled_identity:
    return "scaled-identity:" + format_double(init.scale);
  case InitKind::commuting_polynomial:
    break;
  }
  return "commuting-polynomial";
}

/// Collects arms for one run: writes each trace, then reads it back.
class ArmWriter {
public:
  ArmWriter(fs::path dir, std::string stem, TraceFormat format, json meta)
      : dir_(std::move(dir)), stem_(std::move(stem)), format_(format), meta_(std::move(meta)) {}

  /// Explicit file path instead of `<dir>/<stem>_<arm>.<ext>`.
  void use_single_file(fs::path path) { single_ = std::move(path); }

  void add(RunReport& report, const std::string& arm, const SolveResult& result, json arm_meta) {
    fs::path file = single_ ? *single_
                            : dir_ / (stem_ + "_" + arm + "." + std::string(trace_format_name(format_)));
    json meta = meta_;
    meta["arm"] = arm;
    meta.update(arm_meta);
    meta["stop_reason"] = stop_reason_name(result.stop);
    meta["iterations"] = result.iterations;
    meta["epochs"] = result.epochs;
    meta["switch_iter"] = result.switch_iter ? json(*result.switch_iter) : json(nullptr);
    write_trace(file, result.trace, format_, meta);

    ArmSummary summary = summarize_trace_file(file);
    summary.arm = arm;
    summary.stop = result.stop;
    summary.iterations = result.iterations;
    summary.epochs = result.epochs;
    summary.switch_iter = result.switch_iter;
    report.arms.push_back(std::move(summary));
  }

private:
  fs::path dir_;
  std::string stem_;
  TraceFormat format_;
  json meta_;
  std::optional<fs::path> single_;
};

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir.string() + "'");
  }
}

SolverConfig base_config(std::uint64_t seed, bool wallclock) {
  SolverConfig cfg;
  cfg.seed = seed;
  cfg.record_every = 1;
  cfg.record_wallclock = wallclock;
  return cfg;
}

double root_residual(const Matrix& w, const Matrix& x, int d) {
  Matrix wd = w;
  for (int k = 1; k < d; ++k) {
    wd = matmul(wd, w);
  }
  return frobenius_norm(identity_minus(matmul(wd, x)));
}

/// c = 0.9 (tr X / n)^(-1/d): c^d times the mean eigenvalue is 0.9^d.
double root_demo_scale(const Matrix& x, int d) {
  return 0.9 * std::pow(trace(x) / static_cast<double>(x.rows()), -1.0 / d);
}

RandomMatrixSpec preset_spec(std::size_t n, std::uint64_t seed) {
  RandomMatrixSpec spec;
  spec.n = n;
  spec.seed = seed;
  spec.condition_cap = kPresetConditionCap;
  return spec;
}

} // namespace

std::uint64_t default_seed() {
  const char* env = std::getenv("QUADINV_SEED");
  if (env == nullptr || *env == '\0') {
    return kDefaultSeed;
  }
  std::string_view text(env);
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw UsageError("QUADINV_SEED must be an unsigned 64-bit integer, got '" + std::string(text) + "'");
  }
  return value;
}

PresetName parse_preset_name(std::string_view name) { return parse_enum(name, kPresets, "preset"); }
std::string_view preset_name(PresetName name) { return enum_name(name, kPresets); }

std::vector<std::string_view> preset_names() {
  std::vector<std::string_view> out;
  for (const auto& entry : kPresets) {
    out.push_back(entry.first);
  }
  return out;
}

Method parse_method(std::string_view name) { return parse_enum(name, kMethods, "method"); }
std::string_view method_name(Method method) { return enum_name(method, kMethods); }

std::size_t preset_default_n(PresetName name) {
  switch (name) {
  case PresetName::fig2b:
    return 1000;
  case PresetName::thm3:
    return 8;
  case PresetName::root_demo:
    return 50;
  default:
    return 100;
  }
}

void ExperimentPreset::validate() const {
  if (n && *n < 2) {
    throw UsageError("preset dimension must be at least 2");
  }
}

int RunReport::exit_status() const {
  const bool diverged =
      std::any_of(arms.begin(), arms.end(), [](const ArmSummary& a) { return a.stop == StopReason::diverged; });
  return diverged ? 3 : 0;
}

std::optional<double> RunReport::extra(std::string_view key) const {
  for (const auto& [name, value] : extras) {
    if (name == key) {
      return value;
    }
  }
  return std::nullopt;
}

ArmSummary summarize_trace_file(const fs::path& file) {
  const Trace trace = read_trace(file);
  ArmSummary summary;
  summary.file = file;
  if (!trace.empty()) {
    summary.final_loss = trace.back().loss;
    summary.final_err = trace.back().err_fro;
  }
  const std::vector<double> series = order_series(trace);
  summary.order = estimate_order_auto(series);
  return summary;
}

RunReport run_preset(const ExperimentPreset& preset) {
  preset.validate();
  const std::size_t n = preset.n.value_or(preset_default_n(preset.name));
  const std::string name(preset_name(preset.name));
  ensure_directory(preset.output_path);

  RunReport report;
  report.title = "preset " + name + "  n=" + std::to_string(n) + "  seed=" + std::to_string(preset.seed);

  json meta;
  meta["tool"] = "quadinv";
  meta["preset"] = name;
  meta["n"] = n;
  meta["seed"] = preset.seed;
  const SolverConfig base = base_config(preset.seed, preset.record_wallclock);

  auto writer_for = [&](const json& problem) {
    json m = meta;
    m["problem"] = problem;
    return ArmWriter(preset.output_path, name, preset.format, m);
  };

  switch (preset.name) {
  case PresetName::fig1a: {
    const RandomMatrixSpec spec = preset_spec(n, preset.seed);
    const InvertibleProblem p = gen_invertible(spec);
    ArmWriter writer = writer_for(spec_json(spec));

    SolverConfig gd = base;
    gd.max_iters = 100;
    const InitScheme gd_init = InitScheme::scaled_true_inverse(0.4);
    const Matrix w_gd = make_init(gd_init, {p.x, &p.w_star});
    writer.add(report, "gd", solve_inverse_gd(p.x, w_gd, gd, &p.w_star),
               {{"method", "adaptive-gd"}, {"init", init_text(gd_init)}, {"solver", config_json(gd)}});

    SolverConfig sgd = base;
    sgd.max_epochs = 100;
    const InitScheme sgd_init = InitScheme::scaled_true_inverse(0.5);
    const Matrix w_sgd = make_init(sgd_init, {p.x, &p.w_star});
    writer.add(report, "sgd", solve_inverse_sgd(p.x, w_sgd, sgd, &p.w_star),
               {{"method", "adaptive-sgd"}, {"init", init_text(sgd_init)}, {"solver", config_json(sgd)}});

    writer.add(report, "newton", solve_newton(p.x, w_gd, gd, &p.w_star),
               {{"method", "newton"}, {"init", init_text(gd_init)}, {"solver", config_json(gd)}});
    break;
  }
  case PresetName::fig1b: {
    RandomMatrixSpec spec = preset_spec(n, preset.seed);
    spec.sigma_floor = 0.5;
    const InvertibleProblem p = gen_invertible(spec);
    ArmWriter writer = writer_for(spec_json(spec));
    const double switch_loss = 1e-4;
    const Matrix w0 = Matrix(n, n);

    SolverConfig adaptive = base;
    adaptive.max_iters = 100;

    SolverConfig warm_gd = base;
    warm_gd.step_rule = FixedStep{0.1};
    warm_gd.max_iters = 100000;
    writer.add(report, "hybrid", solve_hybrid(p.x, w0, {WarmMethod::fixed_gd, warm_gd}, adaptive, switch_loss, &p.w_star),
               {{"method", "hybrid"},
                {"warm", "fixed-gd"},
                {"init", "zero"},
                {"switch_loss", switch_loss},
                {"warm_solver", config_json(warm_gd)},
                {"solver", config_json(adaptive)}});

    SolverConfig warm_kz = base;
    warm_kz.max_iters = 10000;
    writer.add(report, "hybrid-kaczmarz",
               solve_hybrid(p.x, w0, {WarmMethod::kaczmarz, warm_kz}, adaptive, switch_loss, &p.w_star),
               {{"method", "hybrid"},
                {"warm", "kaczmarz"},
                {"init", "zero"},
                {"switch_loss", switch_loss},
                {"warm_solver", config_json(warm_kz)},
                {"solver", config_json(adaptive)}});
    break;
  }
  case PresetName::fig2a: {
    const RandomMatrixSpec spec = preset_spec(n, preset.seed);
    const InvertibleProblem p = gen_invertible(spec);
    ArmWriter writer = writer_for(spec_json(spec));
    SolverConfig sgd = base;
    sgd.max_epochs = 100;
    const InitScheme init = InitScheme::scaled_true_inverse(0.5);
    const Matrix w0 = make_init(init, {p.x, &p.w_star});
    writer.add(report, "sgd", solve_inverse_sgd(p.x, w0, sgd, &p.w_star),
               {{"method", "adaptive-sgd"}, {"init", init_text(init)}, {"solver", config_json(sgd)}});
    break;
  }
  case PresetName::fig2b: {
    const RandomMatrixSpec spec = preset_spec(n, preset.seed);
    const InvertibleProblem p = gen_invertible(spec);
    ArmWriter writer = writer_for(spec_json(spec));
    const InitScheme init = InitScheme::scaled_true_inverse(0.1);
    const Matrix w0 = make_init(init, {p.x, &p.w_star});
    for (EpochSchedule schedule : {EpochSchedule::cyclic_permutation, EpochSchedule::iid_uniform}) {
      SolverConfig sgd = base;
      sgd.max_epochs = 200;
      sgd.schedule = schedule;
      writer.add(report, std::string(schedule_name(schedule)), solve_inverse_sgd(p.x, w0, sgd, &p.w_star),
                 {{"method", "adaptive-sgd"}, {"init", init_text(init)}, {"solver", config_json(sgd)}});
    }
    break;
  }
  case PresetName::thm3: {
    RandomMatrixSpec spec;
    spec.n = n;
    spec.seed = preset.seed;
    spec.kind = MatrixKind::rank_deficient_target;
    spec.rank = n / 2;
    RankDeficientProblem p = gen_rank_deficient(spec);
    normalize_target(p);
    json problem = spec_json(spec);
    problem["normalized_target"] = true;
    ArmWriter writer = writer_for(problem);

    SolverConfig poly = base;
    poly.step_rule = MatrixPolynomial{{0.0, 1.0}};
    poly.max_iters = 200000;
    const InitScheme init = InitScheme::scaled_true_inverse(0.9);
    const Matrix w0 = make_init(init, {p.x, &p.w_star});
    writer.add(report, "polyrate", solve_polyrate(p.x, p.y, w0, poly, &p.w_star),
               {{"method", "polyrate"}, {"init", init_text(init)}, {"solver", config_json(poly)}});
    report.extras.emplace_back("constant_term_norm", frobenius_norm(thm3_constant_term(p.w_star, p.x, {0.0, 1.0})));
    break;
  }
  case PresetName::root_demo: {
    constexpr int d = 2;
    RandomMatrixSpec spec = preset_spec(n, preset.seed);
    spec.kind = MatrixKind::spd;
    spec.sigma_floor = 0.5;
    spec.sigma_ceiling = 2.0;
    const SpdProblem p = gen_spd(spec);
    const Matrix reference = p.inverse_root(d);
    ArmWriter writer = writer_for(spec_json(spec));

    SolverConfig root = base;
    root.step_rule = AdaptiveRoot{d};
    root.max_iters = 1000;
    const InitScheme init = InitScheme::scaled_identity(root_demo_scale(p.x, d));
    const Matrix w0 = make_init(init, {p.x, &reference, true});
    const SolveResult result = solve_inverse_root(p.x, w0, d, root, &reference);
    writer.add(report, "root", result,
               {{"method", "root"}, {"d", d}, {"init", init_text(init)}, {"solver", config_json(root)}});
    report.extras.emplace_back("max_relative_commutator", result.max_relative_commutator);
    report.extras.emplace_back("root_residual_fro", root_residual(result.w, p.x, d));
    break;
  }
  }
  return report;
}

InitScheme parse_init(std::string_view text) {
  if (text == "zero") {
    return InitScheme::zero();
  }
  const auto colon = text.find(':');
  const std::string_view kind = text.substr(0, colon);
  if (colon == std::string_view::npos || (kind != "scaled-inverse" && kind != "scaled-identity")) {
    throw UsageError("invalid --init '" + std::string(text) +
                     "' (expected zero, scaled-inverse:<c> or scaled-identity:<c>)");
  }
  const double c = parse_number(text.substr(colon + 1), "--init scale");
  return kind == "scaled-inverse" ? InitScheme::scaled_true_inverse(c) : InitScheme::scaled_identity(c);
}

std::vector<double> parse_coeffs(std::string_view text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(parse_number(text.substr(start, comma - start), "--coeffs entry"));
    if (comma == std::string_view::npos) {
      break;
    }
    start = comma + 1;
  }
  return out;
}

void CustomRun::validate() const {
  const std::string m(method_name(method));
  auto forbid = [&m](bool set, const char* flag) {
    if (set) {
      throw UsageError(std::string(flag) + " cannot be combined with --method " + m);
    }
  };
  const bool sgd = method == Method::adaptive_sgd;
  const bool hybrid = method == Method::hybrid;
  forbid(schedule.has_value() && !sgd, "--schedule");
  forbid(max_epochs.has_value() && !sgd, "--max-epochs");
  forbid(max_iters.has_value() && sgd, "--max-iters");
  forbid(d.has_value() && method != Method::root, "--d");
  forbid(coeffs.has_value() && method != Method::polyrate, "--coeffs");
  forbid(rank.has_value() && method != Method::polyrate, "--rank");
  forbid(switch_loss.has_value() && !hybrid, "--switch-loss");
  forbid(warm.has_value() && !hybrid, "--warm");

  const bool warm_kaczmarz = hybrid && warm.value_or("fixed-gd") == "kaczmarz";
  const bool uses_eta = method == Method::fixed_gd || (hybrid && !warm_kaczmarz);
  if (uses_eta && !eta) {
    throw UsageError("--method " + m + (hybrid ? " with --warm fixed-gd" : "") + " requires --eta");
  }
  if (!uses_eta && eta) {
    throw UsageError(std::string("--eta cannot be combined with --method ") + m +
                     (hybrid ? " and --warm kaczmarz" : ""));
  }
  if (eta && !(*eta > 0.0)) {
    throw UsageError("--eta must be positive");
  }
  if (warm && *warm != "fixed-gd" && *warm != "kaczmarz") {
    throw UsageError("invalid --warm '" + *warm + "' (expected fixed-gd or kaczmarz)");
  }
  if (schedule && *schedule != "cyclic" && *schedule != "iid") {
    throw UsageError("invalid --schedule '" + *schedule + "' (expected cyclic or iid)");
  }
  if (n < 1) {
    throw UsageError("--n must be at least 1");
  }
  if (d && *d < 1) {
    throw UsageError("--d must be at least 1");
  }
  if (rank && (*rank < 1 || *rank >= n)) {
    throw UsageError("--rank must lie in [1, n)");
  }
  if (coeffs && coeffs->empty()) {
    throw UsageError("--coeffs needs at least one value");
  }
  if (switch_loss && !(*switch_loss > 0.0)) {
    throw UsageError("--switch-loss must be positive");
  }
  if (!(tol > 0.0)) {
    throw UsageError("--tol must be positive");
  }
  if (record_every < 1) {
    throw UsageError("--record-every must be at least 1");
  }
  if ((max_iters && *max_iters < 1) || (max_epochs && *max_epochs < 1)) {
    throw UsageError("iteration budgets must be at least 1");
  }
  if (condition_cap && *condition_cap != 0.0 && !(*condition_cap > 1.0)) {
    throw UsageError("--condition-cap must exceed 1 (or be 0 for no cap)");
  }
  if (sigma_floor && !(*sigma_floor >= 0.0 && *sigma_floor < 4.0)) {
    throw UsageError("--sigma-floor must lie in [0, 4)");
  }
  if (sigma_ceiling && !(*sigma_ceiling > sigma_floor.value_or(0.0))) {
    throw UsageError("--sigma-ceiling must exceed --sigma-floor and 0");
  }
  if (method == Method::polyrate && rank) {
    forbid(condition_cap.has_value(), "--condition-cap");
    forbid(sigma_floor.has_value() || sigma_ceiling.has_value(), "--sigma-floor/--sigma-ceiling");
  }
  if (init) {
    parse_init(*init);
  }
}

RunReport run_custom(const CustomRun& run) {
  run.validate();
  const std::string m(method_name(run.method));
  const std::size_t n = run.n;
  const std::uint64_t seed = run.seed;

  SolverConfig cfg = base_config(seed, run.record_wallclock);
  cfg.tol_loss = run.tol;
  cfg.record_every = run.record_every;
  if (run.max_iters) {
    cfg.max_iters = *run.max_iters;
  }
  if (run.max_epochs) {
    cfg.max_epochs = *run.max_epochs;
  }
  if (run.schedule) {
    cfg.schedule = *run.schedule == "iid" ? EpochSchedule::iid_uniform : EpochSchedule::cyclic_permutation;
  }

  RandomMatrixSpec spec;
  spec.n = n;
  spec.seed = seed;
  spec.condition_cap = run.condition_cap.value_or(kPresetConditionCap);
  if (spec.condition_cap == 0.0) {
    spec.condition_cap.reset();
  }
  spec.sigma_floor = run.sigma_floor;
  spec.sigma_ceiling = run.sigma_ceiling;

  const fs::path out = run.out.value_or(fs::path("quadinv_" + m + "." + std::string(trace_format_name(run.format))));
  if (out.has_parent_path()) {
    ensure_directory(out.parent_path());
  }

  json meta;
  meta["tool"] = "quadinv";
  meta["method"] = m;
  meta["n"] = n;
  meta["seed"] = seed;

  RunReport report;
  report.title = "run " + m + "  n=" + std::to_string(n) + "  seed=" + std::to_string(seed);

  auto finish = [&](const json& problem, const InitScheme& init, const SolveResult& result, json arm_meta) {
    json full = meta;
    full["problem"] = problem;
    ArmWriter writer(out.parent_path(), "", run.format, full);
    writer.use_single_file(out);
    arm_meta["init"] = init_text(init);
    arm_meta["solver"] = config_json(cfg);
    writer.add(report, m, result, std::move(arm_meta));
  };

  switch (run.method) {
  case Method::root: {
    const int d = run.d.value_or(2);
    spec.kind = MatrixKind::spd;
    if (!run.sigma_floor && !run.sigma_ceiling) {
      spec.sigma_floor = 0.5;
      spec.sigma_ceiling = 2.0;
    }
    const SpdProblem p = gen_spd(spec);
    const Matrix reference = p.inverse_root(d);
    const InitScheme init =
        run.init ? parse_init(*run.init) : InitScheme::scaled_identity(root_demo_scale(p.x, d));
    const Matrix w0 = make_init(init, {p.x, &reference, true});
    cfg.step_rule = AdaptiveRoot{d};
    const SolveResult result = solve_inverse_root(p.x, w0, d, cfg, &reference);
    finish(spec_json(spec), init, result, {{"d", d}});
    report.extras.emplace_back("max_relative_commutator", result.max_relative_commutator);
    report.extras.emplace_back("root_residual_fro", root_residual(result.w, p.x, d));
    break;
  }
  case Method::polyrate: {
    cfg.step_rule = MatrixPolynomial{run.coeffs.value_or(std::vector<double>{0.0, 1.0})};
    const InitScheme init = run.init ? parse_init(*run.init) : InitScheme::scaled_true_inverse(0.9);
    if (run.rank) {
      RandomMatrixSpec rspec;
      rspec.n = n;
      rspec.seed = seed;
      rspec.kind = MatrixKind::rank_deficient_target;
      rspec.rank = run.rank;
      RankDeficientProblem p = gen_rank_deficient(rspec);
      normalize_target(p);
      const Matrix w0 = make_init(init, {p.x, &p.w_star});
      json problem = spec_json(rspec);
      problem["normalized_target"] = true;
      finish(problem, init, solve_polyrate(p.x, p.y, w0, cfg, &p.w_star), {});
      const auto& coeffs = std::get<MatrixPolynomial>(cfg.step_rule).coeffs;
      report.extras.emplace_back("constant_term_norm", frobenius_norm(thm3_constant_term(p.w_star, p.x, coeffs)));
    } else {
      const InvertibleProblem p = gen_invertible(spec);
      const Matrix w0 = make_init(init, {p.x, &p.w_star});
      finish(spec_json(spec), init, solve_polyrate(p.x, Matrix::identity(n), w0, cfg, &p.w_star), {});
    }
    break;
  }
  default: {
    const InvertibleProblem p = gen_invertible(spec);
    const bool linear = run.method == Method::fixed_gd || run.method == Method::kaczmarz || run.method == Method::hybrid;
    const InitScheme init =
        run.init ? parse_init(*run.init) : (linear ? InitScheme::zero() : InitScheme::scaled_true_inverse(0.5));
    const Matrix w0 = make_init(init, {p.x, &p.w_star});
    switch (run.method) {
    case Method::adaptive_gd:
      finish(spec_json(spec), init, solve_inverse_gd(p.x, w0, cfg, &p.w_star), {});
      break;
    case Method::adaptive_sgd:
      finish(spec_json(spec), init, solve_inverse_sgd(p.x, w0, cfg, &p.w_star), {});
      break;
    case Method::newton:
      finish(spec_json(spec), init, solve_newton(p.x, w0, cfg, &p.w_star), {});
      break;
    case Method::kaczmarz:
      finish(spec_json(spec), init, solve_kaczmarz(p.x, w0, cfg, &p.w_star), {});
      break;
    case Method::fixed_gd:
      cfg.step_rule = FixedStep{*run.eta};
      finish(spec_json(spec), init, solve_inverse_gd(p.x, w0, cfg, &p.w_star), {});
      break;
    case Method::hybrid: {
      const bool kaczmarz = run.warm.value_or("fixed-gd") == "kaczmarz";
      SolverConfig warm_cfg = cfg;
      if (!kaczmarz) {
        warm_cfg.step_rule = FixedStep{*run.eta};
      }
      const double switch_loss = run.switch_loss.value_or(1e-4);
      const WarmStart warm{kaczmarz ? WarmMethod::kaczmarz : WarmMethod::fixed_gd, warm_cfg};
      finish(spec_json(spec), init, solve_hybrid(p.x, w0, warm, cfg, switch_loss, &p.w_star),
             {{"warm", warm_method_name(warm.method)},
              {"switch_loss", switch_loss},
              {"warm_solver", config_json(warm_cfg)}});
      break;
    }
    default:
      break;
    }
    break;
  }
  }
  return report;
}

void print_report(std::ostream& out, const RunReport& report) {
  out << report.title << '\n';
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"arm", "stop", "iters", "epochs", "final_loss", "final_err", "order", "points", "file"});
  auto sci = [](double v) {
    std::ostringstream s;
    s << std::scientific << std::setprecision(3) << v;
    return s.str();
  };
  for (const ArmSummary& a : report.arms) {
    std::string order = "n/a";
    if (a.order.sufficient) {
      std::ostringstream s;
      s << std::fixed << std::setprecision(3) << a.order.order;
      order = s.str();
    }
    rows.push_back({a.arm, std::string(stop_reason_name(a.stop)), std::to_string(a.iterations),
                    a.epochs > 0 ? std::to_string(a.epochs) : "-", sci(a.final_loss),
                    a.final_err ? sci(*a.final_err) : "-", order, std::to_string(a.order.points_used),
                    a.file.string()});
  }
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << std::left << std::setw(static_cast<int>(c + 1 < row.size() ? width[c] + 2 : 0)) << row[c];
    }
    out << '\n';
  }
  for (const ArmSummary& a : report.arms) {
    if (a.switch_iter) {
      out << a.arm << ": switched to adaptive at iter " << *a.switch_iter << '\n';
    }
  }
  for (const auto& [name, value] : report.extras) {
    out << name << " = " << sci(value) << '\n';
  }
}

} // namespace quadinv
