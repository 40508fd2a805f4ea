#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "quadinv/experiments.hpp"

namespace {

using namespace quadinv;
using nlohmann::json;

enum ExitCode : int { kOk = 0, kInternal = 1, kUsage = 2, kDiverged = 3, kIo = 4, kGeneration = 5 };

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) {
      row.push_back(m(i, j));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

struct GenOptions {
  std::string kind = "invertible";
  std::size_t n = 10;
  std::uint64_t seed = 0;
  std::optional<double> condition_cap;
  std::optional<double> sigma_floor;
  std::optional<double> sigma_ceiling;
  std::optional<std::size_t> rank;
  std::string out;
};

int run_gen(const GenOptions& opt) {
  RandomMatrixSpec spec;
  spec.n = opt.n;
  spec.seed = opt.seed;
  spec.condition_cap = opt.condition_cap;
  spec.sigma_floor = opt.sigma_floor;
  spec.sigma_ceiling = opt.sigma_ceiling;
  spec.rank = opt.rank;
  json doc;
  doc["kind"] = opt.kind;
  doc["n"] = opt.n;
  doc["seed"] = opt.seed;
  try {
    if (opt.kind == "invertible") {
      spec.kind = MatrixKind::general_invertible;
      spec.validate();
      const InvertibleProblem p = gen_invertible(spec);
      doc["x"] = matrix_json(p.x);
      doc["w_star"] = matrix_json(p.w_star);
      doc["sigma"] = p.sigma;
    } else if (opt.kind == "spd") {
      spec.kind = MatrixKind::spd;
      spec.validate();
      const SpdProblem p = gen_spd(spec);
      doc["x"] = matrix_json(p.x);
      doc["lambda"] = p.lambda;
    } else if (opt.kind == "rank-deficient") {
      spec.kind = MatrixKind::rank_deficient_target;
      spec.validate();
      const RankDeficientProblem p = gen_rank_deficient(spec);
      doc["x"] = matrix_json(p.x);
      doc["y"] = matrix_json(p.y);
      doc["w_star"] = matrix_json(p.w_star);
    } else {
      throw UsageError("invalid --kind '" + opt.kind + "' (expected invertible, spd or rank-deficient)");
    }
  } catch (const PreconditionError& e) {
    throw UsageError(e.what());
  }
  const std::string text = doc.dump(1) + "\n";
  if (opt.out.empty()) {
    std::cout << text;
    return kOk;
  }
  std::ofstream file(opt.out, std::ios::binary);
  if (!(file << text) || !file.flush()) {
    throw IoError("cannot write '" + opt.out + "'");
  }
  return kOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matrix inversion and inverse-root solvers with adaptive step sizes"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed_flag;
  std::string format = "csv";
  bool timing = false;

  // preset
  auto* preset_cmd = app.add_subcommand("preset", "Run a named experiment and write one trace per arm");
  std::string preset_arg;
  std::optional<std::size_t> preset_n;
  std::string preset_out = ".";
  std::string preset_list;
  for (auto name : preset_names()) {
    preset_list += (preset_list.empty() ? "" : "|") + std::string(name);
  }
  preset_cmd->add_option("name", preset_arg, preset_list)->required();
  preset_cmd->add_option("--n", preset_n, "Dimension override");
  preset_cmd->add_option("--seed", seed_flag, "Seed (default: $QUADINV_SEED or built-in)");
  preset_cmd->add_option("--out", preset_out, "Output directory");
  preset_cmd->add_option("--format", format, "csv|json");
  preset_cmd->add_flag("--timing", timing, "Record wallclock_ns (traces stop being reproducible)");

  // run
  auto* run_cmd = app.add_subcommand("run", "Run a single solver on a generated problem");
  CustomRun custom;
  std::string method;
  std::string coeffs_text;
  std::string out_path;
  run_cmd->add_option("--method", method,
                      "adaptive-gd|adaptive-sgd|root|newton|fixed-gd|kaczmarz|hybrid|polyrate")
      ->required();
  run_cmd->add_option("--n", custom.n, "Dimension (default 100)");
  run_cmd->add_option("--d", custom.d, "Root order (root, default 2)");
  run_cmd->add_option("--seed", seed_flag, "Seed (default: $QUADINV_SEED or built-in)");
  run_cmd->add_option("--init", custom.init, "zero|scaled-inverse:<c>|scaled-identity:<c>");
  run_cmd->add_option("--schedule", custom.schedule, "cyclic|iid (adaptive-sgd)");
  run_cmd->add_option("--eta", custom.eta, "Fixed step (fixed-gd, hybrid warm phase)");
  auto* coeffs_opt = run_cmd->add_option("--coeffs", coeffs_text, "Step polynomial c0,c1,... (polyrate)");
  run_cmd->add_option("--switch-loss", custom.switch_loss, "Warm-to-adaptive threshold (hybrid, default 1e-4)");
  run_cmd->add_option("--warm", custom.warm, "fixed-gd|kaczmarz (hybrid, default fixed-gd)");
  run_cmd->add_option("--rank", custom.rank, "Target rank (polyrate): rank-deficient problem");
  run_cmd->add_option("--tol", custom.tol, "Loss tolerance (default 1e-24)");
  run_cmd->add_option("--max-iters", custom.max_iters, "Iteration budget");
  run_cmd->add_option("--max-epochs", custom.max_epochs, "Epoch budget (adaptive-sgd)");
  run_cmd->add_option("--record-every", custom.record_every, "Keep every k-th record (default 1)");
  run_cmd->add_option("--condition-cap", custom.condition_cap, "Spectrum condition cap, 0 for none (default 1e4)");
  run_cmd->add_option("--sigma-floor", custom.sigma_floor, "Lower bound on drawn singular values");
  run_cmd->add_option("--sigma-ceiling", custom.sigma_ceiling, "Upper bound on drawn singular values");
  run_cmd->add_option("--out", out_path, "Trace file (default quadinv_<method>.<format>)");
  run_cmd->add_option("--format", format, "csv|json");
  run_cmd->add_flag("--timing", timing, "Record wallclock_ns (traces stop being reproducible)");

  // gen
  auto* gen_cmd = app.add_subcommand("gen", "Write a generated problem as JSON");
  GenOptions gen;
  gen_cmd->add_option("--kind", gen.kind, "invertible|spd|rank-deficient");
  gen_cmd->add_option("--n", gen.n, "Dimension (default 10)");
  gen_cmd->add_option("--seed", seed_flag, "Seed (default: $QUADINV_SEED or built-in)");
  gen_cmd->add_option("--condition-cap", gen.condition_cap, "Spectrum condition cap");
  gen_cmd->add_option("--sigma-floor", gen.sigma_floor, "Lower bound on drawn singular values");
  gen_cmd->add_option("--sigma-ceiling", gen.sigma_ceiling, "Upper bound on drawn singular values");
  gen_cmd->add_option("--rank", gen.rank, "Target rank (rank-deficient)");
  gen_cmd->add_option("--out", gen.out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const std::uint64_t seed = seed_flag ? *seed_flag : default_seed();
    const TraceFormat trace_format = [&] {
      try {
        return parse_trace_format(format);
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
    }();

    RunReport report;
    if (*preset_cmd) {
      ExperimentPreset preset;
      preset.name = parse_preset_name(preset_arg);
      preset.n = preset_n;
      preset.seed = seed;
      preset.output_path = preset_out;
      preset.format = trace_format;
      preset.record_wallclock = timing;
      report = run_preset(preset);
    } else if (*run_cmd) {
      custom.method = parse_method(method);
      custom.seed = seed;
      custom.format = trace_format;
      custom.record_wallclock = timing;
      if (coeffs_opt->count() > 0) {
        custom.coeffs = parse_coeffs(coeffs_text);
      }
      if (!out_path.empty()) {
        custom.out = out_path;
      }
      report = run_custom(custom);
    } else {
      gen.seed = seed;
      return run_gen(gen);
    }
    print_report(std::cout, report);
    return report.exit_status();
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n" << "run '" << app.get_name() << " --help' for usage\n";
    return kUsage;
  } catch (const CommutatorError& e) {
    std::cerr << "diverged: " << e.what() << "\n";
    return kDiverged;
  } catch (const NonFiniteError& e) {
    std::cerr << "diverged: " << e.what() << "\n";
    return kDiverged;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const GenerationError& e) {
    std::cerr << "generation failed: " << e.what() << "\n";
    return kGeneration;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}
