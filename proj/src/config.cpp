#include "lse/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace lse {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

std::vector<SurrogateKind> parse_surrogates(const json& j) {
  std::vector<SurrogateKind> out;
  for (const auto& s : j) out.push_back(surrogate_kind_from_string(s));
  if (out.empty()) throw ConfigError("config: empty surrogate list");
  return out;
}

std::vector<AcquisitionKind> parse_acquisitions(const json& j) {
  std::vector<AcquisitionKind> out;
  for (const auto& s : j) out.push_back(acquisition_kind_from_string(s));
  if (out.empty()) throw ConfigError("config: empty acquisition list");
  return out;
}

SyntheticJob parse_synthetic(const json& j) {
  require_keys(j, {"kind", "function", "noise", "surrogates", "acquisitions",
                   "n0", "budget", "test_points", "runs", "seed", "restarts",
                   "gamma", "out_dir"},
               "synthetic job");
  SyntheticJob job;
  job.base.function = j.at("function").get<std::string>();
  job.base.noise = noise_kind_from_string(j.at("noise").get<std::string>());
  job.surrogates = parse_surrogates(j.at("surrogates"));
  job.acquisitions = parse_acquisitions(j.at("acquisitions"));
  if (j.contains("n0")) job.base.n0 = j.at("n0").get<int>();
  if (j.contains("budget")) job.base.budget = j.at("budget").get<int>();
  if (j.contains("test_points")) job.base.test_m = j.at("test_points").get<int>();
  if (j.contains("runs")) job.base.runs = j.at("runs").get<int>();
  if (j.contains("seed")) job.base.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("restarts")) job.base.restarts = j.at("restarts").get<int>();
  if (j.contains("gamma")) job.base.gamma = j.at("gamma").get<double>();
  if (j.contains("out_dir")) job.out_dir = j.at("out_dir").get<std::string>();
  // validation beyond schema
  make_synthetic(job.base.function);
  if (j.contains("runs") && job.base.runs < 1)
    throw ConfigError("config: runs must be >= 1");
  return job;
}

BermudanJob parse_bermudan(const json& j) {
  require_keys(j,
               {"kind", "payoff", "assets", "strike", "rate", "dividend",
                "sigma", "dt", "maturity", "x0", "surrogates", "acquisitions",
                "replications", "unique_inputs", "n0", "runs", "seed",
                "restarts", "eval_paths", "stage_grid", "out_dir"},
               "bermudan job");
  BermudanJob job;
  if (!j.contains("payoff")) throw ConfigError("config: missing payoff kind");
  job.base.payoff = payoff_kind_from_string(j.at("payoff").get<std::string>());
  MarketModel& m = job.base.model;
  m.d = j.value("assets", job.base.payoff == PayoffKind::basket_put ? 2 : 3);
  job.base.strike =
      j.value("strike", job.base.payoff == PayoffKind::basket_put ? 40.0 : 100.0);
  m.rate = j.value("rate", job.base.payoff == PayoffKind::basket_put ? 0.06 : 0.05);
  m.dividend = j.value("dividend",
                       job.base.payoff == PayoffKind::basket_put ? 0.0 : 0.1);
  m.sigma = j.value("sigma", 0.2);
  m.dt = j.value("dt", job.base.payoff == PayoffKind::basket_put ? 0.04 : 1.0 / 3.0);
  m.maturity = j.value("maturity",
                       job.base.payoff == PayoffKind::basket_put ? 1.0 : 3.0);
  if (j.contains("x0")) {
    const auto v = j.at("x0").get<std::vector<double>>();
    if (static_cast<int>(v.size()) != m.d)
      throw ConfigError("config: x0 length must match assets");
    m.x0 = Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
  } else {
    m.x0 = Eigen::VectorXd::Constant(
        m.d, job.base.payoff == PayoffKind::basket_put ? 40.0 : 90.0);
  }
  job.base.model.rate = m.rate;
  job.surrogates = parse_surrogates(j.at("surrogates"));
  job.acquisitions = parse_acquisitions(j.at("acquisitions"));
  job.base.replications = j.value("replications", 15);
  job.base.n_unique = j.value("unique_inputs", 80);
  job.base.n0 = j.value("n0", job.base.payoff == PayoffKind::basket_put ? 10 : 30);
  job.base.restarts = j.value("restarts", 5);
  job.base.stage_grid_m = j.value("stage_grid", 500);
  job.runs = j.value("runs", 10);
  job.base.seed = j.value("seed", std::uint64_t{1});
  job.eval_paths = j.value("eval_paths", 16000);
  job.out_dir = j.value("out_dir", std::string("out"));
  if (m.steps() < 2) throw ConfigError("config: maturity/dt gives < 2 steps");
  if (job.base.replications < 1 || job.base.n_unique < job.base.n0)
    throw ConfigError("config: invalid budget fields");
  return job;
}

}  // namespace

Job parse_config_text(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + origin + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  const std::string kind = j.value("kind", "synthetic");
  Job job;
  // objects serialize with sorted keys, so the digest is stable under
  // field reordering in the source file
  job.hash = hex64(fnv1a(j.dump()));
  if (kind == "synthetic") {
    job.kind = Job::Kind::synthetic;
    job.synthetic = parse_synthetic(j);
  } else if (kind == "bermudan") {
    job.kind = Job::Kind::bermudan;
    job.bermudan = parse_bermudan(j);
  } else {
    throw ConfigError("config: unknown kind '" + kind + "'");
  }
  return job;
}

Job load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path);
}

}  // namespace lse
