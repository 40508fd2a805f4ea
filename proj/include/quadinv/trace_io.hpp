#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "quadinv/trace.hpp"

namespace quadinv {

enum class TraceFormat { csv, json };

TraceFormat parse_trace_format(std::string_view name);
std::string_view trace_format_name(TraceFormat format);

/// Header of every CSV trace, in column order.
inline constexpr std::string_view kCsvHeader = "iter,epoch,phase,sample_index,loss,err_fro,wallclock_ns";

/// CSV: mandatory header, one row per record, empty fields for missing
/// optionals, doubles in shortest round-trip form.
std::string trace_to_csv(const Trace& trace);
Trace trace_from_csv(std::string_view text);

/// JSON: {"meta": {...}, "records": [...]}; missing optionals are null.
std::string trace_to_json(const Trace& trace, const nlohmann::json& meta);
Trace trace_from_json(std::string_view text, nlohmann::json* meta = nullptr);

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

void write_trace(const std::filesystem::path& path, const Trace& trace, TraceFormat format,
                 const nlohmann::json& meta);
/// Format is taken from the extension (.json, anything else is CSV).
Trace read_trace(const std::filesystem::path& path, nlohmann::json* meta = nullptr);

} // namespace quadinv
