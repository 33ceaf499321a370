#include "shcsp/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "shcsp/parser.hpp"
#include "shcsp/printer.hpp"

namespace shcsp {

namespace {

json number_or_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

double number_from(const json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

TimedItem item_from_json(const json& j) {
  const double t = j.at("time").get<double>();
  if (j.at("kind").get<std::string>() == "internal") return TimedItem::internal(t);
  return TimedItem::comm(j.at("chan").get<std::string>(), j.at("value").get<double>(), t);
}

TimedTrace trace_from_json(const json& j) {
  TimedTrace out;
  for (const auto& i : j) out.push_back(item_from_json(i));
  return out;
}

ReadyItem ready_from_json(const json& j) {
  const std::string dir = j.at("dir").get<std::string>();
  return ReadyItem{j.at("chan").get<std::string>(), dir == "?" ? Direction::Input : Direction::Output,
                   trace_from_json(j.at("prefix"))};
}

ProcState state_from_json(const json& j) {
  ProcState s;
  for (const auto& [k, v] : j.at("vals").items()) s.vals[k] = number_from(v);
  s.now = j.at("now").get<double>();
  s.tr = trace_from_json(j.at("tr"));
  for (const auto& r : j.at("rdy")) s.rdy.push_back(ready_from_json(r));
  return s;
}

Flow flow_from_json(const json& j, const TimedTrace& trace) {
  Flow f(j.at("vars").get<std::vector<std::string>>());
  std::vector<std::size_t> remap;
  for (const auto& set : j.at("ready_sets")) {
    std::vector<ReadyItem> rdy;
    for (const auto& r : set) rdy.push_back(ready_from_json(r));
    remap.push_back(f.add_ready_set(std::move(rdy)));
  }
  const auto& times = j.at("time");
  const auto& values = j.at("values");
  const auto& lens = j.at("trace_length");
  const auto& ids = j.at("ready_id");
  std::vector<double> row(f.vars().size());
  for (std::size_t r = 0; r < times.size(); ++r) {
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = number_from(values.at(r).at(c));
    f.append(times.at(r).get<double>(), row.data(), lens.at(r).get<std::size_t>(),
             remap.at(ids.at(r).get<std::size_t>()));
  }
  f.set_trace(trace);
  return f;
}

json json_of(const Valuation& v) {
  json out = json::object();
  for (const auto& [k, x] : v) out[k] = number_or_null(x);
  return out;
}

}  // namespace

json to_json(const TimedItem& item) {
  if (!item.is_comm()) return json{{"kind", "internal"}, {"time", item.time}};
  return json{{"kind", "comm"}, {"chan", item.chan}, {"value", item.value}, {"time", item.time}};
}

json to_json(const TimedTrace& trace) {
  json out = json::array();
  for (const auto& i : trace) out.push_back(to_json(i));
  return out;
}

json to_json(const ReadyItem& r) {
  return json{{"chan", r.chan}, {"dir", r.direction == Direction::Input ? "?" : "!"}, {"prefix", to_json(r.prefix)}};
}

json to_json(const ProcState& s) {
  json rdy = json::array();
  for (const auto& r : s.rdy) rdy.push_back(to_json(r));
  return json{{"vals", json_of(s.vals)}, {"now", s.now}, {"tr", to_json(s.tr)}, {"rdy", rdy}};
}

json to_json(const Flow& flow) {
  json times = json::array();
  json values = json::array();
  json lens = json::array();
  json ids = json::array();
  for (std::size_t r = 0; r < flow.size(); ++r) {
    times.push_back(flow.time(r));
    json row = json::array();
    const double* v = flow.values(r);
    for (std::size_t c = 0; c < flow.vars().size(); ++c) row.push_back(number_or_null(v[c]));
    values.push_back(std::move(row));
    lens.push_back(flow.trace_length(r));
    ids.push_back(flow.ready_id(r));
  }
  json sets = json::array();
  for (std::size_t i = 0; i < flow.ready_set_count(); ++i) {
    json set = json::array();
    for (const auto& r : flow.ready_set(i)) set.push_back(to_json(r));
    sets.push_back(std::move(set));
  }
  return json{{"vars", flow.vars()}, {"time", times},      {"values", values},
              {"trace_length", lens}, {"ready_id", ids}, {"ready_sets", sets}};
}

json to_json(const RunRecord& rec, bool with_flow) {
  json locals = json::array();
  for (const auto& t : rec.local_traces) locals.push_back(to_json(t));
  json out{{"seed", rec.seed},
           {"exit", exit_name(rec.exit)},
           {"final", to_json(rec.final)},
           {"trace", to_json(rec.trace)},
           {"local_traces", locals}};
  if (with_flow) out["flow"] = to_json(rec.flow);
  return out;
}

RunRecord run_record_from_json(const json& j) {
  RunRecord rec;
  rec.seed = j.at("seed").get<std::uint64_t>();
  rec.exit = exit_from_name(j.at("exit").get<std::string>());
  rec.final = state_from_json(j.at("final"));
  rec.trace = trace_from_json(j.at("trace"));
  for (const auto& t : j.at("local_traces")) rec.local_traces.push_back(trace_from_json(t));
  if (j.contains("flow")) rec.flow = flow_from_json(j.at("flow"), rec.trace);
  return rec;
}

json to_json(const Estimate& e) {
  return json{{"phat", e.phat},          {"n", e.n},   {"successes", e.successes},
              {"failed", e.failed},      {"lo", e.lo}, {"hi", e.hi},
              {"verdict", verdict_name(e.verdict)}};
}

json to_json(const ProbBound& b, const Estimate& e) {
  json out = to_json(e);
  out["formula"] = to_string(b.formula);
  out["op"] = std::string(cmp_symbol(b.op));
  out["p"] = rational_literal(b.p);
  return out;
}

json to_json(const CertificateResult& r) {
  json premises = json::array();
  for (const auto& p : r.premises) {
    premises.push_back(json{{"name", p.name}, {"method", p.method}, {"passed", p.passed}, {"detail", p.detail}});
  }
  json singular = json::array();
  for (const auto& s : r.singular) singular.push_back(to_string(s));
  json out{{"verdict", verdict_name(r.verdict)},
           {"smooth", r.smooth},
           {"partial_evidence", r.partial_evidence},
           {"premises", premises},
           {"implied_bound", r.implied_bound},
           {"lie_derivative", to_string(r.lie)},
           {"singular_set", singular},
           {"conclusion", r.conclusion},
           {"postcondition", r.postcondition}};
  if (r.implied_exact) out["implied_bound_exact"] = rational_literal(*r.implied_exact);
  if (!r.rejected_premise.empty()) out["rejected_premise"] = r.rejected_premise;
  if (!r.reason.empty()) out["reason"] = r.reason;
  return out;
}

Rational rational_from_json(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (auto slash = s.find('/'); slash != std::string::npos) {
      Rational d = parse_rational(s.substr(slash + 1));
      if (d == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
      return parse_rational(s.substr(0, slash)) / d;
    }
    return parse_rational(s);
  }
  if (j.is_number_integer()) return Rational(j.get<long long>());
  if (j.is_number()) {
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite number");
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw std::invalid_argument("cannot format number");
    return parse_rational(std::string_view(buf, static_cast<std::size_t>(end - buf)));
  }
  throw std::invalid_argument("expected a number or a rational string, got " + j.dump());
}

CertificateRequest certificate_request_from_json(const json& j, const std::filesystem::path& base) {
  if (!j.is_object()) throw std::invalid_argument("certificate request must be a JSON object");
  std::string text;
  if (j.contains("program_text")) {
    text = j.at("program_text").get<std::string>();
  } else if (j.contains("program")) {
    text = read_file(base / j.at("program").get<std::string>());
  } else {
    throw std::invalid_argument("certificate request needs 'program' or 'program_text'");
  }
  CertificateRequest req;
  req.block = first_sde_block(parse(text));
  req.f = parse_expr(j.at("f").get<std::string>(), text);
  req.lam = rational_from_json(j.at("lambda"));
  req.p = rational_from_json(j.at("p"));
  for (const auto& [k, v] : j.at("init").items()) req.init[k] = rational_from_json(v);
  for (const auto& [k, v] : j.at("box").items()) {
    if (!v.is_array() || v.size() != 2) throw std::invalid_argument("box entry for " + k + " must be [lo, hi]");
    req.box[k] = {v[0].get<double>(), v[1].get<double>()};
  }
  if (j.contains("grid")) req.grid = j.at("grid").get<unsigned>();
  if (j.contains("threads")) req.threads = j.at("threads").get<unsigned>();
  req.check();
  return req;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace shcsp
