#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>

#include "quadinv/error.hpp"
#include "quadinv/rng.hpp"
#include "quadinv/trace_io.hpp"

using namespace quadinv;

namespace {

Trace random_trace(Rng& rng, std::size_t size) {
  Trace t;
  std::uint64_t iter = rng.index(5);
  for (std::size_t k = 0; k < size; ++k) {
    TraceRecord r;
    r.iter = iter;
    iter += 1 + rng.index(3);
    if (rng.uniform() < 0.5) {
      r.epoch = rng.index(100);
    }
    if (rng.uniform() < 0.5) {
      r.phase = rng.uniform() < 0.5 ? "warm" : "adaptive";
    }
    if (rng.uniform() < 0.5) {
      r.sample_index = rng.index(1000);
    }
    const double scale = std::pow(10.0, -300.0 * rng.uniform());
    r.loss = rng.uniform() < 0.05 ? 0.0 : rng.uniform() * scale;
    if (rng.uniform() < 0.7) {
      r.err_fro = rng.uniform() < 0.1 ? std::numeric_limits<double>::denorm_min() : rng.normal() * rng.normal();
      *r.err_fro = std::abs(*r.err_fro);
    }
    r.wallclock_ns = rng.next_u64();
    t.append(r);
  }
  return t;
}

} // namespace

TEST_CASE("trace validation") {
  Trace t;
  t.append({.iter = 0, .loss = 1.0});
  CHECK_THROWS_AS(t.append({.iter = 0, .loss = 1.0}), PreconditionError);
  CHECK_THROWS_AS(t.append({.iter = 1, .loss = NAN}), PreconditionError);
  CHECK_THROWS_AS(t.append({.iter = 1, .loss = -1.0}), PreconditionError);
  CHECK_THROWS_AS(t.append({.iter = 1, .loss = 1.0, .err_fro = INFINITY}), PreconditionError);
}

TEST_CASE("CSV layout") {
  Trace t;
  t.append({.iter = 0, .epoch = 0, .loss = 0.5, .err_fro = 0.1});
  t.append({.iter = 1, .epoch = 1, .phase = "warm", .sample_index = 3, .loss = 1e-300, .wallclock_ns = 12});
  const std::string csv = trace_to_csv(t);
  CHECK(csv == "iter,epoch,phase,sample_index,loss,err_fro,wallclock_ns\n"
               "0,0,,,0.5,0.1,0\n"
               "1,1,warm,3,1e-300,,12\n");
  CHECK(trace_from_csv(csv) == t);
}

TEST_CASE("format_double is shortest round-trip") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(0.464) == "0.464");
  for (double v : {1.0 / 3.0, 1e-320, 1.7976931348623157e308, 0.0, 123456789.125}) {
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  }
}

TEST_CASE("CSV and JSON round-trip random traces") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const Trace t = random_trace(rng, rng.index(30));
    CHECK(trace_from_csv(trace_to_csv(t)) == t);
    nlohmann::json meta{{"trial", trial}, {"label", "x"}};
    nlohmann::json back_meta;
    CHECK(trace_from_json(trace_to_json(t, meta), &back_meta) == t);
    CHECK(back_meta == meta);
  }
}

TEST_CASE("malformed input is rejected") {
  CHECK_THROWS_AS(trace_from_csv(""), IoError);
  CHECK_THROWS_AS(trace_from_csv("iter,loss\n0,1\n"), IoError);
  CHECK_THROWS_AS(trace_from_csv("iter,epoch,phase,sample_index,loss,err_fro,wallclock_ns\n0,,,,abc,,0\n"), IoError);
  CHECK_THROWS_AS(trace_from_csv("iter,epoch,phase,sample_index,loss,err_fro,wallclock_ns\n0,,,,1\n"), IoError);
  CHECK_THROWS_AS(trace_from_json("{\"records\": 3}"), IoError);
  CHECK_THROWS_AS(trace_from_json("not json"), IoError);
  CHECK_THROWS_AS(parse_trace_format("xml"), PreconditionError);
}

TEST_CASE("file round trip and I/O errors") {
  const auto dir = std::filesystem::temp_directory_path() / "quadinv_trace_io_test";
  std::filesystem::create_directories(dir);
  Rng rng(5);
  const Trace t = random_trace(rng, 10);
  write_trace(dir / "t.csv", t, TraceFormat::csv, {});
  write_trace(dir / "t.json", t, TraceFormat::json, {{"k", 1}});
  CHECK(read_trace(dir / "t.csv") == t);
  nlohmann::json meta;
  CHECK(read_trace(dir / "t.json", &meta) == t);
  CHECK(meta["k"] == 1);
  CHECK_THROWS_AS(read_trace(dir / "missing.csv"), IoError);
  CHECK_THROWS_AS(write_trace(dir / "no" / "such" / "dir.csv", t, TraceFormat::csv, {}), IoError);
  std::filesystem::remove_all(dir);
}
