#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "shcsp/assertion.hpp"
#include "shcsp/cert.hpp"
#include "shcsp/exec.hpp"

namespace shcsp {

using json = nlohmann::json;

json to_json(const TimedItem& item);
json to_json(const TimedTrace& trace);
json to_json(const ReadyItem& r);
json to_json(const ProcState& s);
json to_json(const Flow& flow);

/// Run record; the flow is embedded unless `with_flow` is false.
json to_json(const RunRecord& rec, bool with_flow = true);
RunRecord run_record_from_json(const json& j);

json to_json(const Estimate& e);
json to_json(const ProbBound& b, const Estimate& e);
json to_json(const CertificateResult& r);

/// Accepts a JSON number (read through its shortest decimal form) or a
/// string holding a decimal or `n/d`.
Rational rational_from_json(const json& j);

/// Certificate request. `program` is a path resolved against `base`, or
/// `program_text` holds the program inline; `f` may use the program's defs.
CertificateRequest certificate_request_from_json(const json& j, const std::filesystem::path& base = {});

std::string read_file(const std::filesystem::path& path);

/// Writes through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace shcsp
