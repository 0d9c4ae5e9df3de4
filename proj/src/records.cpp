#include "lse/records.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

namespace lse {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string record_file_name(const std::string& hash, SurrogateKind s,
                             AcquisitionKind a, int run) {
  return hash + "_" + to_string(s) + "_" + to_string(a) + "_run" +
         std::to_string(run) + ".jsonl";
}

void write_run_record(const std::string& path, const std::string& hash,
                      SurrogateKind s, AcquisitionKind a,
                      const RunTrace& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  json meta{{"type", "meta"},
            {"config", hash},
            {"surrogate", to_string(s)},
            {"acquisition", to_string(a)},
            {"run", trace.run_index},
            {"run_seed", trace.run_seed},
            {"aborted", trace.aborted}};
  out << meta.dump() << "\n";
  for (const StepRecord& st : trace.steps) {
    json row{{"type", "step"},
             {"n", st.n},
             {"er", st.metrics.error_rate},
             {"ee", st.metrics.empirical_error},
             {"bias", st.metrics.bias},
             {"ci", st.metrics.ci_volume},
             {"y", st.y},
             {"wall_s", st.wall_s}};
    std::vector<double> xv(st.x.data(), st.x.data() + st.x.size());
    row["x"] = xv;
    out << row.dump() << "\n";
  }
}

void write_summary_csv(const std::string& path,
                       const std::vector<SummaryRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "function,noise,surrogate,acquisition,runs,mean_er,sd_er,mean_ee,"
         "sd_ee,mean_bias,mean_ci\n";
  for (const SummaryRow& r : rows)
    out << r.function << ',' << r.noise << ',' << to_string(r.surrogate)
        << ',' << to_string(r.acquisition) << ',' << r.runs << ','
        << fmt(r.mean_er) << ',' << fmt(r.sd_er) << ',' << fmt(r.mean_ee)
        << ',' << fmt(r.sd_ee) << ',' << fmt(r.mean_bias) << ','
        << fmt(r.mean_ci) << "\n";
}

void write_bermudan_csv(const std::string& path,
                        const std::vector<BermudanRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "payoff,surrogate,acquisition,replications,unique_inputs,runs,"
         "mean_value,sd_value,mean_se\n";
  for (const BermudanRow& r : rows)
    out << r.payoff << ',' << to_string(r.surrogate) << ','
        << to_string(r.acquisition) << ',' << r.replications << ','
        << r.n_unique << ',' << r.runs << ',' << fmt(r.mean_value) << ','
        << fmt(r.sd_value) << ',' << fmt(r.mean_se) << "\n";
}

void write_policy_archive(const std::string& path,
                          const ExercisePolicy& policy) {
  json stages = json::array();
  for (std::size_t k = 1; k <= policy.stages.size(); ++k) {
    json st{{"stage", k},
            {"t", policy.model.time_at(static_cast<int>(k))},
            {"fitted", static_cast<bool>(policy.stage_ok[k - 1])}};
    if (policy.stage_ok[k - 1]) {
      const Surrogate& s = policy.stages[k - 1];
      const KernelParams& p = s.params();
      json params{{"sigma_se", p.sigma_se},
                  {"tau", p.tau},
                  {"theta", std::vector<double>(
                                p.theta.data(), p.theta.data() + p.theta.size())}};
      if (p.nu) params["nu"] = *p.nu;
      st["surrogate"] = to_string(s.kind());
      st["params"] = params;
      const TrainingSet& data = s.data();
      json rows = json::array();
      for (Eigen::Index i = 0; i < data.size(); ++i) {
        json row{{"y", data.responses[i]},
                 {"r", data.replication_at(i)}};
        std::vector<double> xv(data.inputs.cols());
        for (Eigen::Index j = 0; j < data.inputs.cols(); ++j)
          xv[static_cast<std::size_t>(j)] = data.inputs(i, j);
        row["x"] = std::move(xv);
        rows.push_back(std::move(row));
      }
      st["design"] = std::move(rows);
    }
    stages.push_back(std::move(st));
  }
  json doc{{"type", "policy"},
           {"payoff", to_string(policy.payoff.kind)},
           {"strike", policy.payoff.strike},
           {"dt", policy.model.dt},
           {"maturity", policy.model.maturity},
           {"stages", std::move(stages)}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << doc.dump() << "\n";
}

ParsedRecord read_run_record(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  ParsedRecord rec;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    const std::string type = j.value("type", "");
    if (type == "meta") {
      rec.hash = j.value("config", "");
      rec.surrogate = j.value("surrogate", "");
      rec.acquisition = j.value("acquisition", "");
      rec.run = j.value("run", 0);
      rec.trace.run_index = rec.run;
      rec.trace.aborted = j.value("aborted", false);
    } else if (type == "step") {
      StepRecord st;
      st.n = j.at("n").get<int>();
      st.metrics.error_rate = j.at("er").get<double>();
      st.metrics.empirical_error = j.at("ee").get<double>();
      st.metrics.bias = j.at("bias").get<double>();
      st.metrics.ci_volume = j.at("ci").get<double>();
      st.y = j.at("y").get<double>();
      st.wall_s = j.at("wall_s").get<double>();
      const auto xv = j.at("x").get<std::vector<double>>();
      st.x = Eigen::Map<const Eigen::VectorXd>(xv.data(), xv.size());
      rec.trace.steps.push_back(std::move(st));
    }
  }
  return rec;
}

int cmd_report(const std::vector<std::string>& record_files,
               const std::string& out_dir) {
  if (record_files.empty()) {
    std::fprintf(stderr, "report: no matching record files\n");
    return 1;
  }
  std::map<std::string, std::vector<RunTrace>> groups;
  for (const std::string& f : record_files) {
    ParsedRecord rec = read_run_record(f);
    if (rec.trace.steps.empty()) continue;
    groups[rec.hash + "_" + rec.surrogate + "_" + rec.acquisition].push_back(
        std::move(rec.trace));
  }
  std::filesystem::create_directories(out_dir);
  for (const auto& [key, traces] : groups) {
    const MedianCurves curves = median_curves(traces);
    const std::string path = out_dir + "/report_" + key + ".csv";
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "n,median_er,median_ee\n";
    for (std::size_t i = 0; i < curves.steps.size(); ++i)
      out << curves.steps[i] << ',' << fmt(curves.er[i]) << ','
          << fmt(curves.ee[i]) << "\n";
  }
  return 0;
}

}  // namespace lse
