#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "quadinv/analysis.hpp"
#include "quadinv/error.hpp"
#include "quadinv/problem.hpp"
#include "quadinv/solvers.hpp"
#include "quadinv/trace_io.hpp"

namespace quadinv {

/// Bad command-line input: unknown names, missing or conflicting flags.
class UsageError : public Error {
public:
  using Error::Error;
};

inline constexpr std::uint64_t kDefaultSeed = 1;

/// QUADINV_SEED when set to a valid unsigned integer, else kDefaultSeed.
/// Throws UsageError for a malformed value.
std::uint64_t default_seed();

enum class PresetName { fig1a, fig1b, fig2a, fig2b, thm3, root_demo };

PresetName parse_preset_name(std::string_view name);
std::string_view preset_name(PresetName name);
/// Names accepted by parse_preset_name, in declaration order.
std::vector<std::string_view> preset_names();

struct ExperimentPreset {
  PresetName name = PresetName::fig1a;
  std::optional<std::size_t> n; // preset default when empty
  std::uint64_t seed = kDefaultSeed;
  std::filesystem::path output_path = ".";
  TraceFormat format = TraceFormat::csv;
  bool record_wallclock = false;

  void validate() const;
};

/// Default dimension of each preset (fig1a 100, fig1b 100, fig2a 100,
/// fig2b 1000, thm3 8, root-demo 50).
std::size_t preset_default_n(PresetName name);

/// One solver arm as read back from its emitted trace file.
struct ArmSummary {
  std::string arm;
  std::filesystem::path file;
  StopReason stop = StopReason::budget_exhausted;
  std::size_t iterations = 0;
  std::size_t epochs = 0;
  double final_loss = 0.0;
  std::optional<double> final_err;
  OrderEstimate order;
  std::optional<std::size_t> switch_iter;
};

struct RunReport {
  std::string title;
  std::vector<ArmSummary> arms;
  /// Named scalar diagnostics printed below the table.
  std::vector<std::pair<std::string, double>> extras;

  /// 3 if any arm diverged, else 0.
  int exit_status() const;
  std::optional<double> extra(std::string_view key) const;
};

/// Generates the preset's problem, runs every arm, writes
/// `<output_path>/<preset>_<arm>.<csv|json>` and summarizes each file.
RunReport run_preset(const ExperimentPreset& preset);

enum class Method { adaptive_gd, adaptive_sgd, root, newton, fixed_gd, kaczmarz, hybrid, polyrate };

Method parse_method(std::string_view name);
std::string_view method_name(Method method);

/// Flags of a single custom run. Unset optionals take method defaults; setting
/// one that the method does not use is a UsageError.
struct CustomRun {
  Method method = Method::adaptive_gd;
  std::size_t n = 100;
  std::uint64_t seed = kDefaultSeed;
  std::optional<int> d;
  std::optional<std::string> init;
  std::optional<std::string> schedule;
  std::optional<double> eta;
  std::optional<std::vector<double>> coeffs;
  std::optional<double> switch_loss;
  std::optional<std::string> warm;
  std::optional<std::size_t> rank;
  double tol = 1e-24;
  std::optional<std::size_t> max_iters;
  std::optional<std::size_t> max_epochs;
  std::size_t record_every = 1;
  std::optional<double> condition_cap; // 0 disables the cap
  std::optional<double> sigma_floor;
  std::optional<double> sigma_ceiling;
  std::optional<std::filesystem::path> out;
  TraceFormat format = TraceFormat::csv;
  bool record_wallclock = false;

  /// Throws UsageError naming the offending flag or pair.
  void validate() const;
};

/// Parses `zero`, `scaled-inverse:<c>` or `scaled-identity:<c>`.
InitScheme parse_init(std::string_view text);
/// Parses a comma-separated list of finite numbers.
std::vector<double> parse_coeffs(std::string_view text);

RunReport run_custom(const CustomRun& run);

/// Summary table: one row per arm, then the extras.
void print_report(std::ostream& out, const RunReport& report);

/// Reads a trace file and fills the file-derived fields of an ArmSummary
/// (final loss and error, order estimate).
ArmSummary summarize_trace_file(const std::filesystem::path& file);

} // namespace quadinv
