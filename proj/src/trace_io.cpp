#include "quadinv/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "quadinv/error.hpp"

namespace quadinv {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(line.substr(start));
      return parts;
    }
    parts.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

template <typename T>
T parse_number(std::string_view field, const char* column, std::size_t line_no) {
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw IoError("trace CSV line " + std::to_string(line_no) + ": bad " + column + " value '" +
                  std::string(field) + "'");
  }
  return value;
}

template <typename T>
std::optional<T> parse_optional(std::string_view field, const char* column, std::size_t line_no) {
  if (field.empty()) {
    return std::nullopt;
  }
  return parse_number<T>(field, column, line_no);
}

template <typename T>
std::string optional_field(const std::optional<T>& v) {
  if (!v) {
    return {};
  }
  if constexpr (std::is_floating_point_v<T>) {
    return format_double(*v);
  } else {
    return std::to_string(*v);
  }
}

template <typename T>
nlohmann::json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <typename T>
std::optional<T> json_optional(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) {
    return std::nullopt;
  }
  return j.at(key).get<T>();
}

} // namespace

TraceFormat parse_trace_format(std::string_view name) {
  if (name == "csv") {
    return TraceFormat::csv;
  }
  if (name == "json") {
    return TraceFormat::json;
  }
  throw PreconditionError("unknown trace format '" + std::string(name) + "'");
}

std::string_view trace_format_name(TraceFormat format) { return format == TraceFormat::csv ? "csv" : "json"; }

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) {
    throw IoError("cannot format double");
  }
  return std::string(buf, ptr);
}

std::string trace_to_csv(const Trace& trace) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : trace.records()) {
    if (r.phase && r.phase->find_first_of(",\n\"") != std::string::npos) {
      throw IoError("phase label '" + *r.phase + "' cannot be written to CSV");
    }
    out += std::to_string(r.iter);
    out += ',';
    out += optional_field(r.epoch);
    out += ',';
    out += r.phase.value_or("");
    out += ',';
    out += optional_field(r.sample_index);
    out += ',';
    out += format_double(r.loss);
    out += ',';
    out += optional_field(r.err_fro);
    out += ',';
    out += std::to_string(r.wallclock_ns);
    out += '\n';
  }
  return out;
}

Trace trace_from_csv(std::string_view text) {
  Trace trace;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (!text.empty()) {
    const std::size_t end = text.find('\n');
    std::string_view line = text.substr(0, end);
    text = end == std::string_view::npos ? std::string_view{} : text.substr(end + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    if (!header_seen) {
      if (line != kCsvHeader) {
        throw IoError("trace CSV: missing or unexpected header");
      }
      header_seen = true;
      continue;
    }
    if (line.empty()) {
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 7) {
      throw IoError("trace CSV line " + std::to_string(line_no) + ": expected 7 fields");
    }
    TraceRecord r;
    r.iter = parse_number<std::uint64_t>(f[0], "iter", line_no);
    r.epoch = parse_optional<std::uint64_t>(f[1], "epoch", line_no);
    if (!f[2].empty()) {
      r.phase = std::string(f[2]);
    }
    r.sample_index = parse_optional<std::uint64_t>(f[3], "sample_index", line_no);
    r.loss = parse_number<double>(f[4], "loss", line_no);
    r.err_fro = parse_optional<double>(f[5], "err_fro", line_no);
    r.wallclock_ns = parse_number<std::uint64_t>(f[6], "wallclock_ns", line_no);
    try {
      trace.append(std::move(r));
    } catch (const PreconditionError& e) {
      throw IoError("trace CSV line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!header_seen) {
    throw IoError("trace CSV: empty input");
  }
  return trace;
}

std::string trace_to_json(const Trace& trace, const nlohmann::json& meta) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : trace.records()) {
    records.push_back({{"iter", r.iter},
                       {"epoch", optional_json(r.epoch)},
                       {"phase", optional_json(r.phase)},
                       {"sample_index", optional_json(r.sample_index)},
                       {"loss", r.loss},
                       {"err_fro", optional_json(r.err_fro)},
                       {"wallclock_ns", r.wallclock_ns}});
  }
  nlohmann::json doc{{"meta", meta.is_null() ? nlohmann::json::object() : meta}, {"records", std::move(records)}};
  return doc.dump(1) + "\n";
}

Trace trace_from_json(std::string_view text, nlohmann::json* meta) {
  Trace trace;
  try {
    const auto doc = nlohmann::json::parse(text);
    if (meta != nullptr) {
      *meta = doc.at("meta");
    }
    for (const auto& j : doc.at("records")) {
      TraceRecord r;
      r.iter = j.at("iter").get<std::uint64_t>();
      r.epoch = json_optional<std::uint64_t>(j, "epoch");
      r.phase = json_optional<std::string>(j, "phase");
      r.sample_index = json_optional<std::uint64_t>(j, "sample_index");
      r.loss = j.at("loss").get<double>();
      r.err_fro = json_optional<double>(j, "err_fro");
      r.wallclock_ns = j.at("wallclock_ns").get<std::uint64_t>();
      trace.append(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("trace JSON: ") + e.what());
  } catch (const PreconditionError& e) {
    throw IoError(std::string("trace JSON: ") + e.what());
  }
  return trace;
}

void write_trace(const std::filesystem::path& path, const Trace& trace, TraceFormat format,
                 const nlohmann::json& meta) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  out << (format == TraceFormat::csv ? trace_to_csv(trace) : trace_to_json(trace, meta));
  if (!out) {
    throw IoError("failed writing '" + path.string() + "'");
  }
}

Trace read_trace(const std::filesystem::path& path, nlohmann::json* meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "' for reading");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (path.extension() == ".json") {
    return trace_from_json(text, meta);
  }
  return trace_from_csv(text);
}

} // namespace quadinv
