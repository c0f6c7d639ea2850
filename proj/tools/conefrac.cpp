// Batch front-end: experiment configuration in, written reports out.
#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "conefrac/densities.hpp"
#include "conefrac/errors.hpp"
#include "conefrac/operators.hpp"
#include "conefrac/report.hpp"
#include "conefrac/suites.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace conefrac;

#ifndef CONEFRAC_BUILD_ID
#define CONEFRAC_BUILD_ID "unknown"
#endif

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitConfigError = 2;

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in '" + path + "': " + e.what());
  }
  return j;
}

fs::path output_dir(const std::string& flag_dir, const json& cfg) {
  if (const char* env = std::getenv("CONEFRAC_OUT"); env && *env) return fs::path(env);
  if (!flag_dir.empty()) return fs::path(flag_dir);
  if (cfg.contains("out")) return fs::path(cfg.at("out").get<std::string>());
  return fs::current_path();
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

double require_number(const json& j, const std::string& key, const std::string& ctx) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw ConfigError(ctx + ": missing numeric field '" + key + "'");
  return j.at(key).get<double>();
}

PDMatrix pd_from_json(const json& j, const std::string& ctx) {
  try {
    return PDMatrix(matrix_from_json(j));
  } catch (const NotPositiveDefinite& e) {
    throw ConfigError(ctx + ": matrix is not positive definite (" + e.what() + ")");
  }
}

MatrixDensity parse_density(const json& j) {
  if (!j.is_object() || !j.contains("density"))
    throw ConfigError("density spec must carry a 'density' label");
  const std::string label = j.at("density").get<std::string>();
  const int p = static_cast<int>(require_number(j, "p", "density " + label));
  if (label == "type1_beta")
    return type1_beta(p, require_number(j, "a", label), require_number(j, "b", label));
  if (label == "type2_beta")
    return type2_beta(p, require_number(j, "a", label), require_number(j, "b", label));
  if (label == "matrix_gamma") {
    const PDMatrix b = j.contains("B") ? pd_from_json(j.at("B"), label) : PDMatrix::identity(p);
    return matrix_gamma(p, require_number(j, "shape", label), b);
  }
  if (label == "pathway") {
    PathwayParams pp;
    pp.p = p;
    const std::string kind = j.value("kind", "second");
    pp.kind = kind == "first" ? PathwayKind::FirstKind : PathwayKind::SecondKind;
    pp.gamma = require_number(j, "gamma", label);
    pp.eta = require_number(j, "eta", label);
    pp.q = require_number(j, "q", label);
    if (j.contains("A"))
      pp.matrix_scale = pd_from_json(j.at("A"), label);
    else
      pp.a = j.value("a", 1.0);
    return pathway_density(pp);
  }
  if (label == "pathway_limit") {
    const std::string kind = j.value("kind", "second");
    return pathway_limit_density(p, require_number(j, "gamma", label),
                                 require_number(j, "a_eta", label),
                                 kind == "first" ? PathwayKind::FirstKind
                                                 : PathwayKind::SecondKind);
  }
  if (label == "hyper_weighted_beta") {
    const SymMatrix a = matrix_from_json(j.at("A"));
    const int kmax = static_cast<int>(j.value("kmax", 8));
    const auto table = ZonalTable::build(kmax, p);
    return hyper_weighted_beta(p, require_number(j, "zeta", label),
                               require_number(j, "alpha", label), a,
                               j.value("a_list", std::vector<double>{}),
                               j.value("b_list", std::vector<double>{}), table, kmax)
        .density;
  }
  throw ConfigError("unknown density label '" + label + "'");
}

Integrand parse_integrand(const json& j, int p) {
  if (j.contains("density")) return Integrand::from_density(parse_density(j));
  if (j.contains("test_function")) {
    const std::string name = j.at("test_function").get<std::string>();
    if (name == "det_power") return Integrand::det_power(p, require_number(j, "lambda", name));
    if (name == "exp_trace")
      return Integrand::from_log_fn(
          p, [](const PDMatrix& x) { return -x.trace(); }, "exp_trace");
    throw ConfigError("unknown test_function '" + name + "'");
  }
  throw ConfigError("integrand spec needs 'density' or 'test_function'");
}

std::uint64_t require_seed(const json& cfg, const std::optional<std::uint64_t>& override) {
  if (override) return *override;
  if (!cfg.contains("seed") || !cfg.at("seed").is_number_unsigned())
    throw ConfigError("config: 'seed' is required (reproducibility is mandatory)");
  return cfg.at("seed").get<std::uint64_t>();
}

int cmd_verify(const json& cfg, const std::optional<std::uint64_t>& seed_flag, int workers_flag,
               const std::string& out_flag, const std::string& format_flag) {
  std::vector<std::string> names;
  if (cfg.contains("suite")) {
    if (cfg.at("suite").is_string())
      names.push_back(cfg.at("suite").get<std::string>());
    else
      names = cfg.at("suite").get<std::vector<std::string>>();
  }
  if (names.empty()) throw ConfigError("verify config: 'suite' is required");
  const auto known = known_suites();
  for (const auto& n : names)
    if (std::find(known.begin(), known.end(), n) == known.end())
      throw ConfigError("unknown suite '" + n + "'");

  SuiteRequest req;
  req.seed = require_seed(cfg, seed_flag);
  req.n = cfg.value("n", 4000LL);
  if (req.n < 100) throw ConfigError("verify config: n must be at least 100");
  req.workers = workers_flag > 0 ? workers_flag : cfg.value("workers", 1);
  if (cfg.contains("params"))
    for (auto it = cfg.at("params").begin(); it != cfg.at("params").end(); ++it)
      req.params[it.key()] = it.value().get<double>();

  std::vector<std::string> formats{"json", "csv"};
  if (!format_flag.empty()) {
    formats.clear();
    std::stringstream ss(format_flag);
    std::string tok;
    while (std::getline(ss, tok, ',')) formats.push_back(tok);
  } else if (cfg.contains("formats")) {
    formats = cfg.at("formats").get<std::vector<std::string>>();
  }

  const fs::path dir = output_dir(out_flag, cfg);
  bool all_pass = true;
  for (const auto& name : names) {
    req.name = name;
    const auto t0 = std::chrono::steady_clock::now();
    const VerificationReport rep = run_suite(req);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    all_pass = all_pass && rep.all_pass();

    json out = to_json(rep);
    out["build_id"] = CONEFRAC_BUILD_ID;
    json cfg_echo = cfg;
    cfg_echo["suite"] = name;
    cfg_echo["seed"] = req.seed;
    cfg_echo["n"] = req.n;
    cfg_echo["workers"] = req.workers;
    out["config"] = cfg_echo;
    for (const auto& fmt : formats) {
      if (fmt == "json")
        write_text(dir / (name + ".json"), out.dump(2) + "\n");
      else if (fmt == "csv")
        write_text(dir / (name + ".csv"), report_csv(rep));
      else
        throw ConfigError("unknown format '" + fmt + "'");
    }
    // Timestamps live in a sidecar so the report payload stays byte-stable.
    json meta{{"suite", name},
              {"wall_time_seconds", wall},
              {"unix_time", static_cast<long long>(std::time(nullptr))}};
    write_text(dir / (name + ".meta.json"), meta.dump(2) + "\n");
    std::cout << name << ": " << (rep.all_pass() ? "PASS" : "FAIL") << " ("
              << rep.cases.size() << " cases)\n";
  }
  return all_pass ? kExitOk : kExitVerifyFail;
}

int cmd_operator(const json& cfg, const std::optional<std::uint64_t>& seed_flag,
                 int workers_flag, const std::string& out_flag) {
  const PDMatrix u = pd_from_json(cfg.at("U"), "operator");
  const int p = u.dim();
  const Integrand f = parse_integrand(cfg.at("f"), p);
  McPlan plan;
  plan.seed = require_seed(cfg, seed_flag);
  plan.n = cfg.value("n", 100000LL);
  plan.workers = workers_flag > 0 ? workers_flag : cfg.value("workers", 1);

  const std::string kind = cfg.at("kind").get<std::string>();
  OperatorEvaluation ev;
  if (kind == "pathway2_limit") {
    ev = pathway2_limit_apply(p, require_number(cfg, "gamma", kind),
                              require_number(cfg, "a_eta", kind), f, u, plan);
  } else if (kind == "pathway1_limit") {
    ev = pathway1_limit_apply(p, require_number(cfg, "gamma", kind),
                              require_number(cfg, "a_eta", kind), f, u, plan);
  } else {
    OperatorSpec spec;
    if (kind == "kober2") spec.kind = OperatorKind::KoberII;
    else if (kind == "kober1") spec.kind = OperatorKind::KoberI;
    else if (kind == "weyl_right") spec.kind = OperatorKind::WeylRight;
    else if (kind == "rl_left") spec.kind = OperatorKind::RLLeft;
    else if (kind == "pathway2") spec.kind = OperatorKind::PathwayII;
    else if (kind == "pathway1") spec.kind = OperatorKind::PathwayI;
    else if (kind == "hyper2") spec.kind = OperatorKind::HyperII;
    else throw ConfigError("unknown operator kind '" + kind + "'");
    spec.zeta = cfg.value("zeta", 0.0);
    spec.alpha = cfg.value("alpha", 0.0);
    spec.gamma = cfg.value("gamma", 0.0);
    spec.eta = cfg.value("eta", 0.0);
    spec.q = cfg.value("q", 0.0);
    spec.a = cfg.value("a", 1.0);
    if (cfg.contains("A")) spec.matrix_scale = pd_from_json(cfg.at("A"), kind);
    if (cfg.contains("hyper_a")) spec.hyper_a = cfg.at("hyper_a").get<std::vector<double>>();
    if (cfg.contains("hyper_b")) spec.hyper_b = cfg.at("hyper_b").get<std::vector<double>>();
    if (cfg.contains("hyper_weight")) spec.hyper_weight = matrix_from_json(cfg.at("hyper_weight"));
    spec.kmax = cfg.value("kmax", 8);
    std::shared_ptr<const ZonalTable> table;
    if (spec.kind == OperatorKind::HyperII) table = ZonalTable::build(spec.kmax, p);
    ev = apply_operator(spec, f, u, plan, table);
  }
  json out = to_json(ev);
  out["kind"] = kind;
  out["seed"] = plan.seed;
  out["build_id"] = CONEFRAC_BUILD_ID;
  const std::string text = out.dump(2) + "\n";
  if (!out_flag.empty())
    write_text(fs::path(out_flag) / "operator.json", text);
  std::cout << text;
  return kExitOk;
}

int cmd_sample(const json& cfg, const std::optional<std::uint64_t>& seed_flag,
               const std::string& out_flag) {
  const MatrixDensity d = parse_density(cfg.at("density"));
  const long long n = cfg.value("n", 1000LL);
  const std::uint64_t seed = require_seed(cfg, seed_flag);
  const std::string mode = cfg.value("mode", "stats");
  if (!d.has_sampler()) throw ConfigError("density has no sampler");
  RngStream rng(seed, 0);
  std::ostringstream os;
  if (mode == "stats") {
    os << "i,logdet,trace\n";
    for (long long i = 0; i < n; ++i) {
      const PDMatrix x = d.sample(rng);
      os << i << ',' << format_double(x.logdet()) << ',' << format_double(x.trace()) << '\n';
    }
  } else if (mode == "draws") {
    for (long long i = 0; i < n; ++i)
      os << matrix_to_json(d.sample(rng).sym()).dump() << '\n';
  } else {
    throw ConfigError("sample: mode must be 'stats' or 'draws'");
  }
  if (!out_flag.empty())
    write_text(fs::path(out_flag) / ("sample." + std::string(mode == "stats" ? "csv" : "jsonl")),
               os.str());
  else
    std::cout << os.str();
  return kExitOk;
}

int cmd_density(const json& cfg) {
  const MatrixDensity d = parse_density(cfg.at("density"));
  const PDMatrix x = pd_from_json(cfg.at("point"), "density point");
  json out{{"label", d.label},
           {"log_pdf", d.log_pdf(x)},
           {"in_support", d.in_support(x)}};
  if (cfg.contains("s") && d.has_m_transform())
    out["log_m_transform"] = d.log_m_transform(cfg.at("s").get<double>());
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional integral operators on the positive definite cone"};
  app.require_subcommand(1);

  std::string config_path, out_dir, formats;
  std::optional<std::uint64_t> seed_flag;
  int workers_flag = 0;
  std::uint64_t seed_value = 0;
  CLI::Option* seed_opt = nullptr;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON configuration file");
    CLI::Option* so = sub->add_option("--seed", seed_value, "Seed override");
    if (!seed_opt) seed_opt = so;
    so->each([&](const std::string&) { seed_flag = seed_value; });
    sub->add_option("--workers", workers_flag, "Worker thread count");
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--format", formats, "Output formats (json,csv)");
  };

  auto* gamma_cmd = app.add_subcommand("gamma", "Tabulate log Gamma_p over a grid");
  std::string gamma_p = "1,2,3", gamma_alpha = "0.6,1,2.5,7";
  gamma_cmd->add_option("--p", gamma_p, "Dimensions (comma separated)");
  gamma_cmd->add_option("--alpha", gamma_alpha, "Alpha grid (comma separated)");
  add_common(gamma_cmd);

  auto* zonal_cmd = app.add_subcommand("zonal", "Dump zonal polynomial coefficients as CSV");
  int zonal_kmax = 4, zonal_parts = 4;
  zonal_cmd->add_option("--kmax", zonal_kmax, "Degree cap");
  zonal_cmd->add_option("--max-parts", zonal_parts, "Partition length cap");
  add_common(zonal_cmd);

  auto* density_cmd = app.add_subcommand("density", "Evaluate a catalog density");
  add_common(density_cmd);
  auto* sample_cmd = app.add_subcommand("sample", "Draw from a catalog density");
  add_common(sample_cmd);
  auto* operator_cmd = app.add_subcommand("operator", "Evaluate a fractional operator");
  add_common(operator_cmd);
  auto* verify_cmd = app.add_subcommand("verify", "Run named verification suites");
  add_common(verify_cmd);
  auto* study_cmd = app.add_subcommand("pathway-study", "q -> 1 convergence tables");
  int study_mmin = 1, study_mmax = 12;
  study_cmd->add_option("--m-min", study_mmin, "Smallest m in q = 1 - 2^-m");
  study_cmd->add_option("--m-max", study_mmax, "Largest m in q = 1 - 2^-m");
  add_common(study_cmd);

  auto* report_cmd = app.add_subcommand("report", "Re-render a JSON report as CSV");
  std::string report_in;
  report_cmd->add_option("--in", report_in, "Report JSON path")->required();
  add_common(report_cmd);

  CLI11_PARSE(app, argc, argv);

  try {
    json cfg;
    if (!config_path.empty()) cfg = load_json_file(config_path);

    if (gamma_cmd->parsed()) {
      const std::string csv = gamma_grid_csv(parse_int_list(gamma_p), parse_double_list(gamma_alpha));
      if (!out_dir.empty())
        write_text(fs::path(out_dir) / "gamma.csv", csv);
      else
        std::cout << csv;
      return kExitOk;
    }
    if (zonal_cmd->parsed()) {
      const std::string csv = zonal_table_csv(zonal_kmax, zonal_parts);
      if (!out_dir.empty())
        write_text(fs::path(out_dir) / "zonal.csv", csv);
      else
        std::cout << csv;
      return kExitOk;
    }
    if (density_cmd->parsed()) return cmd_density(cfg);
    if (sample_cmd->parsed()) return cmd_sample(cfg, seed_flag, out_dir);
    if (operator_cmd->parsed()) return cmd_operator(cfg, seed_flag, workers_flag, out_dir);
    if (verify_cmd->parsed()) return cmd_verify(cfg, seed_flag, workers_flag, out_dir, formats);
    if (study_cmd->parsed()) {
      std::map<std::string, double> params;
      if (cfg.contains("params"))
        for (auto it = cfg.at("params").begin(); it != cfg.at("params").end(); ++it)
          params[it.key()] = it.value().get<double>();
      const auto tables = run_pathway_study(study_mmin, study_mmax, params);
      const std::string csv = pathway_study_csv(tables);
      const fs::path dir = output_dir(out_dir, cfg);
      if (!out_dir.empty() || cfg.contains("out"))
        write_text(dir / "pathway_study.csv", csv);
      else
        std::cout << csv;
      return kExitOk;
    }
    if (report_cmd->parsed()) {
      const json rep = load_json_file(report_in);
      VerificationReport r;
      r.suite = rep.value("suite", "report");
      r.seed = rep.value("seed", 0ULL);
      for (const auto& cj : rep.at("cases")) {
        VerificationCase c;
        for (auto it = cj.at("params").begin(); it != cj.at("params").end(); ++it)
          c.params[it.key()] = it.value().get<double>();
        c.lhs = cj.at("lhs").get<double>();
        c.rhs = cj.at("rhs").get<double>();
        c.se = cj.at("se").get<double>();
        c.pass = cj.at("pass").get<bool>();
        r.cases.push_back(std::move(c));
      }
      std::cout << report_csv(r);
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerifyFail;
  }
  return kExitOk;
}
