#include "conefrac/report.hpp"

#include <charconv>
#include <sstream>

#include "conefrac/errors.hpp"

namespace conefrac {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

nlohmann::json matrix_to_json(const SymMatrix& m) {
  return nlohmann::json{{"p", m.dim()}, {"data", m.row_major()}};
}

SymMatrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("p") || !j.contains("data"))
    throw ConfigError("matrix JSON must be {\"p\": int, \"data\": [...]}");
  const int p = j.at("p").get<int>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != static_cast<size_t>(p) * p)
    throw ConfigError("matrix JSON: data length must be p*p");
  return SymMatrix(p, data);
}

nlohmann::json to_json(const EstimatorResult& r) {
  return nlohmann::json{{"estimate", r.estimate}, {"std_error", r.std_error},
                        {"n", r.n},               {"seed", r.seed},
                        {"label", r.label}};
}

nlohmann::json to_json(const OperatorEvaluation& e) {
  nlohmann::json diag(nlohmann::json::value_t::object);
  for (const auto& [k, v] : e.diagnostics) diag[k] = v;
  return nlohmann::json{{"value", e.value},   {"std_error", e.std_error},
                        {"n", e.n},           {"method", e.method},
                        {"heavy_tail", e.heavy_tail}, {"diagnostics", diag}};
}

nlohmann::json to_json(const VerificationCase& c) {
  nlohmann::json params(nlohmann::json::value_t::object);
  for (const auto& [k, v] : c.params) params[k] = v;
  nlohmann::json j{{"params", params}, {"lhs", c.lhs}, {"rhs", c.rhs},
                   {"se", c.se},       {"pass", c.pass}};
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

nlohmann::json to_json(const VerificationReport& r) {
  nlohmann::json cases = nlohmann::json::array();
  for (const auto& c : r.cases) cases.push_back(to_json(c));
  return nlohmann::json{
      {"suite", r.suite}, {"seed", r.seed}, {"cases", cases}, {"all_pass", r.all_pass()}};
}

std::string report_csv(const VerificationReport& r) {
  std::ostringstream os;
  os << "suite,case,params,lhs,rhs,se,pass\n";
  for (size_t i = 0; i < r.cases.size(); ++i) {
    const auto& c = r.cases[i];
    os << r.suite << ',' << i << ',';
    bool first = true;
    for (const auto& [k, v] : c.params) {
      if (!first) os << ';';
      first = false;
      os << k << '=' << format_double(v);
    }
    os << ',' << format_double(c.lhs) << ',' << format_double(c.rhs) << ','
       << format_double(c.se) << ',' << (c.pass ? "true" : "false") << '\n';
  }
  return os.str();
}

}  // namespace conefrac
