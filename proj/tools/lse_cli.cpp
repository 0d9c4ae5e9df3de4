#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lse/config.hpp"
#include "lse/parallel.hpp"
#include "lse/records.hpp"

namespace fs = std::filesystem;
using namespace lse;

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int runs = 0;
  bool quick = false;
};

void apply_overrides(Job& job, const CommonFlags& flags, int eval_paths) {
  if (job.kind == Job::Kind::synthetic) {
    SyntheticJob& s = job.synthetic;
    if (flags.seed_set) s.base.seed = flags.seed;
    if (flags.runs > 0) s.base.runs = flags.runs;
    if (!flags.out_dir.empty()) s.out_dir = flags.out_dir;
    if (flags.quick) {
      s.base.runs = std::min(s.base.runs, 5);
      s.base.resolve_defaults();
      s.base.budget = std::max(s.base.n0 + 2, s.base.budget / 2);
    }
  } else {
    BermudanJob& b = job.bermudan;
    if (flags.seed_set) b.base.seed = flags.seed;
    if (flags.runs > 0) b.runs = flags.runs;
    if (!flags.out_dir.empty()) b.out_dir = flags.out_dir;
    if (eval_paths > 0) b.eval_paths = eval_paths;
    if (flags.quick) {
      b.runs = std::min(b.runs, 5);
      b.eval_paths = std::min(b.eval_paths, 16000);
    }
  }
}

int run_synthetic(const Job& job) {
  const SyntheticJob& sj = job.synthetic;
  fs::create_directories(sj.out_dir + "/records");
  std::vector<SummaryRow> rows;
  for (SurrogateKind sk : sj.surrogates) {
    for (AcquisitionKind ak : sj.acquisitions) {
      ExperimentConfig cfg = sj.base;
      cfg.surrogate = sk;
      cfg.acquisition = ak;
      cfg.resolve_defaults();
      std::printf("running %s %s %s x %s (%d runs, N=%d)\n",
                  cfg.function.c_str(), to_string(cfg.noise).c_str(),
                  to_string(sk).c_str(), to_string(ak).c_str(), cfg.runs,
                  cfg.budget);
      std::fflush(stdout);
      const MacroSummary summary = macroreplicate(cfg);
      for (const RunTrace& tr : summary.traces) {
        const std::string path = sj.out_dir + "/records/" +
                                 record_file_name(job.hash, sk, ak,
                                                  tr.run_index);
        write_run_record(path, job.hash, sk, ak, tr);
      }
      SummaryRow row;
      row.function = cfg.function;
      row.noise = to_string(cfg.noise);
      row.surrogate = sk;
      row.acquisition = ak;
      row.runs = cfg.runs;
      row.mean_er = summary.mean_er;
      row.sd_er = summary.sd_er;
      row.mean_ee = summary.mean_ee;
      row.sd_ee = summary.sd_ee;
      row.mean_bias = summary.mean_bias;
      row.mean_ci = summary.mean_ci;
      rows.push_back(row);
      std::printf("  mean ER %.4f%%  mean E %.4f%%\n", 100.0 * summary.mean_er,
                  100.0 * summary.mean_ee);
      std::fflush(stdout);
    }
  }
  write_summary_csv(sj.out_dir + "/summary_" + job.hash + ".csv", rows);
  return 0;
}

void dump_boundaries(const std::string& path, const ExercisePolicy& policy) {
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw std::runtime_error("cannot write " + path);
  std::fprintf(out, "stage,t,x1,x2,fhat,sign\n");
  const int g = 40;
  const auto& box = policy.domain.box;
  for (std::size_t k = 1; k <= policy.stages.size(); ++k) {
    if (!policy.stage_ok[k - 1]) continue;
    const double t = policy.model.time_at(static_cast<int>(k));
    for (int i = 0; i < g; ++i)
      for (int j = 0; j < g; ++j) {
        Eigen::VectorXd x = policy.model.x0;
        x[0] = box(0, 0) + (box(0, 1) - box(0, 0)) * (i + 0.5) / g;
        x[1] = box(1, 0) + (box(1, 1) - box(1, 0)) * (j + 0.5) / g;
        if (!policy.domain.contains(x)) continue;
        const double f = policy.stages[k - 1].at(x).mean;
        std::fprintf(out, "%zu,%.6f,%.6f,%.6f,%.10g,%d\n", k, t, x[0], x[1],
                     f, f >= 0.0 ? 1 : -1);
      }
  }
  std::fclose(out);
}

int run_bermudan(const Job& job) {
  const BermudanJob& bj = job.bermudan;
  fs::create_directories(bj.out_dir + "/records");
  fs::create_directories(bj.out_dir + "/boundaries");
  fs::create_directories(bj.out_dir + "/policies");
  const std::uint64_t eval_seed = Rng::derive(bj.base.seed, 0xE7A1ull);
  std::vector<BermudanRow> rows;
  for (SurrogateKind sk : bj.surrogates) {
    for (AcquisitionKind ak : bj.acquisitions) {
      std::printf("pricing %s %s x %s (r=%d, n=%d, %d runs, M=%d)\n",
                  to_string(bj.base.payoff).c_str(), to_string(sk).c_str(),
                  to_string(ak).c_str(), bj.base.replications,
                  bj.base.n_unique, bj.runs, bj.eval_paths);
      std::fflush(stdout);
      Eigen::VectorXd values(bj.runs), ses(bj.runs);
      for (int run = 0; run < bj.runs; ++run) {
        BermudanConfig cfg = bj.base;
        cfg.surrogate = sk;
        cfg.acquisition = ak;
        cfg.seed = Rng::derive(bj.base.seed, static_cast<std::uint64_t>(run));
        const ExercisePolicy policy = fit_policy(cfg);
        const Valuation v = value_option(policy, bj.eval_paths, eval_seed);
        values[run] = v.value;
        ses[run] = v.std_error;
        const std::string rec = bj.out_dir + "/records/" +
                                record_file_name(job.hash, sk, ak, run);
        std::FILE* f = std::fopen(rec.c_str(), "w");
        if (f) {
          std::fprintf(f,
                       "{\"type\":\"valuation\",\"config\":\"%s\",\"surrogate\":"
                       "\"%s\",\"acquisition\":\"%s\",\"run\":%d,\"value\":%.17g,"
                       "\"std_error\":%.17g}\n",
                       job.hash.c_str(), to_string(sk).c_str(),
                       to_string(ak).c_str(), run, v.value, v.std_error);
          std::fclose(f);
        }
        write_policy_archive(bj.out_dir + "/policies/" + job.hash + "_" +
                                 to_string(sk) + "_" + to_string(ak) +
                                 "_run" + std::to_string(run) + ".json",
                             policy);
        if (bj.base.model.d >= 2 && run == 0)
          dump_boundaries(bj.out_dir + "/boundaries/" + job.hash + "_" +
                              to_string(sk) + "_" + to_string(ak) + ".csv",
                          policy);
        std::printf("  run %d: V = %.4f (se %.4f)\n", run, v.value,
                    v.std_error);
        std::fflush(stdout);
      }
      BermudanRow row;
      row.payoff = to_string(bj.base.payoff);
      row.surrogate = sk;
      row.acquisition = ak;
      row.replications = bj.base.replications;
      row.n_unique = bj.base.n_unique;
      row.runs = bj.runs;
      row.mean_value = values.mean();
      row.sd_value = bj.runs > 1
                         ? std::sqrt((values.array() - values.mean())
                                         .square()
                                         .sum() /
                                     (bj.runs - 1))
                         : 0.0;
      row.mean_se = ses.mean();
      rows.push_back(row);
      std::printf("  mean V = %.4f (sd %.4f)\n", row.mean_value, row.sd_value);
      std::fflush(stdout);
    }
  }
  write_bermudan_csv(bj.out_dir + "/valuation_" + job.hash + ".csv", rows);
  return 0;
}

std::vector<std::string> expand_records(const std::vector<std::string>& args) {
  std::vector<std::string> files;
  for (const std::string& a : args) {
    if (fs::is_directory(a)) {
      for (const auto& e : fs::directory_iterator(a))
        if (e.path().extension() == ".jsonl") files.push_back(e.path());
      continue;
    }
    files.push_back(a);
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"level-set estimation experiments"};
  app.require_subcommand(1);

  CommonFlags flags;
  int eval_paths = 0;
  std::vector<std::string> record_args;
  std::string report_out = "out";

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", flags.config_path, "config file (json)")
        ->required();
    cmd->add_option("--seed", flags.seed, "master seed override")
        ->each([&](const std::string&) { flags.seed_set = true; });
    cmd->add_option("--runs", flags.runs, "macro-run count override");
    cmd->add_option("--out-dir", flags.out_dir, "output directory override");
    cmd->add_flag("--quick", flags.quick, "reduced CI budgets");
  };

  CLI::App* synth = app.add_subcommand("run-synthetic",
                                       "run a synthetic benchmark sweep");
  add_common(synth);
  CLI::App* berm = app.add_subcommand("run-bermudan",
                                      "fit and value a Bermudan option");
  add_common(berm);
  berm->add_option("--eval-paths", eval_paths,
                   "out-of-sample valuation paths");
  CLI::App* rep = app.add_subcommand("report", "summarize trace records");
  rep->add_option("records", record_args, "record files or directories")
      ->required();
  rep->add_option("--out-dir", report_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed() || berm->parsed()) {
      Job job = load_config(flags.config_path);
      apply_overrides(job, flags, eval_paths);
      if (synth->parsed()) {
        if (job.kind != Job::Kind::synthetic)
          throw ConfigError("run-synthetic needs a synthetic config");
        return run_synthetic(job);
      }
      if (job.kind != Job::Kind::bermudan)
        throw ConfigError("run-bermudan needs a bermudan config");
      return run_bermudan(job);
    }
    return cmd_report(expand_records(record_args), report_out);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
