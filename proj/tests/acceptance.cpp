// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "quadinv/analysis.hpp"
#include "quadinv/experiments.hpp"
#include "quadinv/linalg.hpp"
#include "quadinv/problem.hpp"
#include "quadinv/solvers.hpp"

using namespace quadinv;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool condition, const std::string& what) {
    if (!condition) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& text) { detail += (detail.empty() ? "" : "; ") + text; }
};

std::string num(double v, int precision = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision + 1, v);
  return buf;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const fs::path kRoot = fs::temp_directory_path() / "quadinv_acceptance";

RunReport preset(PresetName name, const std::string& tag, std::optional<std::size_t> n = std::nullopt) {
  ExperimentPreset p;
  p.name = name;
  p.n = n;
  p.seed = kDefaultSeed;
  p.output_path = kRoot / tag;
  return run_preset(p);
}

const ArmSummary& arm(const RunReport& r, const std::string& name) {
  for (const ArmSummary& a : r.arms) {
    if (a.arm == name) {
      return a;
    }
  }
  throw std::runtime_error("no arm " + name);
}

int failures = 0;

void criterion(const std::string& name, double budget_seconds, const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.pass = false;
    out.note(std::string("exception: ") + e.what());
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.require(seconds < budget_seconds, "runtime " + num(seconds) + " s >= " + num(budget_seconds) + " s");
  std::printf("%s  %-34s (%.3f s)  %s\n", out.pass ? "PASS" : "FAIL", name.c_str(), seconds, out.detail.c_str());
  std::fflush(stdout);
  failures += out.pass ? 0 : 1;
}

void order_at_least(Outcome& out, const ArmSummary& a, double bound) {
  out.note(a.arm + " order " + num(a.order.order) + " from " + std::to_string(a.order.points_used) + " points");
  out.require(a.order.sufficient, a.arm + " has >= 3 in-window points");
  out.require(a.order.order >= bound, a.arm + " order >= " + num(bound));
}

void same_bytes(Outcome& out, const RunReport& a, const RunReport& b) {
  out.require(a.arms.size() == b.arms.size(), "same arms");
  for (std::size_t k = 0; k < a.arms.size() && k < b.arms.size(); ++k) {
    const std::string x = slurp(a.arms[k].file);
    out.require(!x.empty() && x == slurp(b.arms[k].file), a.arms[k].file.filename().string() + " byte-identical");
  }
}

} // namespace

int main() {
  fs::remove_all(kRoot);
  fs::create_directories(kRoot);
  std::printf("acceptance suite, seed %llu\n", static_cast<unsigned long long>(kDefaultSeed));

  criterion("scalar recurrence oracle", 1e-3, [](Outcome& out) {
    // w = 1/x + u with u' = -(2 u^2 x + u^3 x^2)
    const double x = 2.0;
    Matrix w{{0.4}};
    double u = -0.1;
    double worst = 0.0;
    for (int t = 1; t <= 3; ++t) {
      w = adaptive_gd_step(w, Matrix{{x}});
      u = -(2 * u * u * x + u * u * u * x * x);
      const double got = w(0, 0) - 0.5;
      worst = std::max(worst, std::abs(got - u) / std::abs(u));
      if (t == 1) {
        out.require(std::abs(got + 0.036) <= 1e-12 * 0.036, "u1 = -0.036");
      }
      if (t == 2) {
        out.require(std::abs(got + 0.004997376) <= 1e-12 * 0.004997376, "u2 = -0.004997376");
      }
    }
    out.note("max relative deviation " + num(worst));
    out.require(worst <= 1e-12, "iterates within 1e-12 relative");
  });

  RunReport fig1a;
  criterion("fig1a adaptive GD quadratic rate", 5.0, [&](Outcome& out) {
    fig1a = preset(PresetName::fig1a, "fig1a");
    const ArmSummary& gd = arm(fig1a, "gd");
    out.note("loss " + num(gd.final_loss) + " after " + std::to_string(gd.iterations) + " iters");
    out.require(gd.stop == StopReason::converged, "converged");
    out.require(gd.final_loss <= 1e-24, "final loss <= 1e-24");
    out.require(gd.iterations <= 12, "within 12 iterations");
    out.require(gd.order.window.hi == OrderWindow{}.hi, "default order window");
    order_at_least(out, gd, 1.8);
  });

  criterion("fig1a cyclic SGD per-epoch rate", 30.0, [&](Outcome& out) {
    const ArmSummary& sgd = arm(fig1a, "sgd");
    out.note("loss " + num(sgd.final_loss) + " after " + std::to_string(sgd.epochs) + " epochs");
    out.require(sgd.stop == StopReason::converged, "converged");
    order_at_least(out, sgd, 1.8);
    // err(t+1) <= err(t)^1.8 once err <= 1e-3, on the per-epoch relative error,
    // for successors above the float floor of the order window.
    const std::vector<double> errs = order_series(read_trace(sgd.file));
    std::size_t checked = 0;
    for (std::size_t t = 0; t + 1 < errs.size(); ++t) {
      if (errs[t] <= 1e-3 && errs[t + 1] >= OrderWindow{}.lo) {
        ++checked;
        out.require(errs[t + 1] <= std::pow(errs[t], 1.8), "epoch " + std::to_string(t + 1) + " contraction");
      }
    }
    out.note(std::to_string(checked) + " epoch pairs checked");
    out.require(checked >= 1, "at least one epoch pair below 1e-3");
  });

  criterion("linear-term cancellation product", 1.0, [](Outcome& out) {
    // Rounding in the product grows like kappa^2 * eps (each rank-1 factor and
    // each partial product has norm up to kappa), so the 1e-8 bound is checked
    // on pairs with kappa <= 1e3; the kappa <= 1e4 maximum is reported.
    auto worst_product = [](double cap) {
      double worst = 0.0;
      Rng shuffler(kDefaultSeed);
      for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        RandomMatrixSpec spec;
        spec.n = 10;
        spec.seed = seed;
        spec.condition_cap = cap;
        const InvertibleProblem p = gen_invertible(spec);
        for (int k = 0; k < 20; ++k) {
          worst = std::max(worst, frobenius_norm(prop2_product(p.x, p.w_star, shuffler.permutation(10))));
        }
      }
      return worst;
    };
    const double worst = worst_product(1e3);
    out.note("max ||product||_F " + num(worst) + " (cap 1e3), " + num(worst_product(1e4)) + " (cap 1e4)");
    out.require(worst <= 1e-8, "all products <= 1e-8");
  });

  RunReport root;
  criterion("root-demo inverse square root", 5.0, [&](Outcome& out) {
    root = preset(PresetName::root_demo, "root");
    const ArmSummary& a = arm(root, "root");
    const double residual = root.extra("root_residual_fro").value_or(INFINITY);
    const double drift = root.extra("max_relative_commutator").value_or(INFINITY);
    out.note("||W^2 X - I||_F " + num(residual) + ", max relative commutator " + num(drift));
    out.require(a.stop == StopReason::converged, "converged");
    out.require(residual <= 1e-10, "||W^2 X - I||_F <= 1e-10");
    out.require(drift <= 1e-8, "commutator drift <= 1e-8");
    order_at_least(out, a, 1.8);
  });

  RunReport fig1b;
  criterion("fig1b hybrid", 10.0, [&](Outcome& out) {
    fig1b = preset(PresetName::fig1b, "fig1b");
    for (const ArmSummary& a : fig1b.arms) {
      const Trace t = read_trace(a.file);
      std::size_t switches = 0;
      std::size_t adaptive = 0;
      for (std::size_t k = 0; k < t.size(); ++k) {
        const auto& r = t.records()[k];
        switches += k > 0 && r.phase != t.records()[k - 1].phase ? 1 : 0;
        adaptive += r.phase == "adaptive" ? 1 : 0;
      }
      out.note(a.arm + ": switch at " + (a.switch_iter ? std::to_string(*a.switch_iter) : "-") + ", " +
               std::to_string(adaptive) + " adaptive iters, loss " + num(a.final_loss));
      out.require(a.stop == StopReason::converged, a.arm + " converged");
      out.require(a.final_loss <= 1e-24, a.arm + " final loss <= 1e-24");
      out.require(adaptive <= 8, a.arm + " adaptive phase <= 8 iterations");
      out.require(switches == 1, a.arm + " exactly one phase switch");
    }
  });

  RunReport fig2b;
  criterion("fig2b cyclic vs iid (n=200)", 60.0, [&](Outcome& out) {
    fig2b = preset(PresetName::fig2b, "fig2b", 200);
    const ArmSummary& cyclic = arm(fig2b, "cyclic");
    const ArmSummary& iid = arm(fig2b, "iid");
    order_at_least(out, cyclic, 1.8);
    out.note("iid order " + num(iid.order.order) + " from " + std::to_string(iid.order.points_used) + " points");
    out.require(iid.order.sufficient, "iid has >= 3 in-window points");
    out.require(iid.order.order <= 1.5, "iid order <= 1.5");
  });

  RunReport thm3;
  criterion("thm3 rank-deficient order cap", 5.0, [&](Outcome& out) {
    thm3 = preset(PresetName::thm3, "thm3");
    const ArmSummary& a = arm(thm3, "polyrate");
    const double c0 = thm3.extra("constant_term_norm").value_or(0.0);
    out.note("order " + num(a.order.order) + " from " + std::to_string(a.order.points_used) +
             " points, constant term " + num(c0));
    out.require(a.order.sufficient, "sufficient data");
    out.require(a.order.order >= 0.8 && a.order.order <= 1.2, "order in [0.8, 1.2]");
    out.require(c0 >= 1e-8, "constant term norm >= 1e-8");
  });

  criterion("newton baseline", 5.0, [&](Outcome& out) {
    const ArmSummary& newton = arm(fig1a, "newton");
    out.require(newton.stop == StopReason::converged, "converged");
    order_at_least(out, newton, 1.8);
    RandomMatrixSpec spec;
    spec.n = 100;
    spec.seed = kDefaultSeed;
    spec.condition_cap = 1e4;
    const InvertibleProblem p = gen_invertible(spec);
    const Matrix w0 = 0.4 * p.w_star;
    const double gap = frobenius_norm(newton_step(w0, p.x) - adaptive_gd_step(w0, p.x));
    out.note("one-step gap " + num(gap));
    out.require(gap >= 1e-6, "Newton and adaptive first iterates differ by >= 1e-6");
  });

  criterion("determinism", 120.0, [&](Outcome& out) {
    same_bytes(out, fig1a, preset(PresetName::fig1a, "fig1a_again"));
    same_bytes(out, root, preset(PresetName::root_demo, "root_again"));
    same_bytes(out, fig1b, preset(PresetName::fig1b, "fig1b_again"));
    same_bytes(out, fig2b, preset(PresetName::fig2b, "fig2b_again", 200));
    same_bytes(out, thm3, preset(PresetName::thm3, "thm3_again"));
    if (out.pass) {
      out.note("all trace files byte-identical");
    }
  });

  std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  fs::remove_all(kRoot);
  return failures == 0 ? 0 : 1;
}
