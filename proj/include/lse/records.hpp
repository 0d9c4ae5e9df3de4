#pragma once

#include <string>
#include <vector>

#include "lse/config.hpp"

namespace lse {

// Line-delimited trace records plus comma-separated summaries, written
// under <out_dir>/records and <out_dir>.

std::string record_file_name(const std::string& hash, SurrogateKind s,
                             AcquisitionKind a, int run);

void write_run_record(const std::string& path, const std::string& hash,
                      SurrogateKind s, AcquisitionKind a,
                      const RunTrace& trace);

struct SummaryRow {
  std::string function, noise;
  SurrogateKind surrogate;
  AcquisitionKind acquisition;
  int runs = 0;
  double mean_er = 0, sd_er = 0, mean_ee = 0, sd_ee = 0, mean_bias = 0,
         mean_ci = 0;
};
void write_summary_csv(const std::string& path,
                       const std::vector<SummaryRow>& rows);

// Per-stage archive of a fitted exercise policy: surrogate kind,
// hyperparameters, and the stage design it was trained on.
void write_policy_archive(const std::string& path,
                          const ExercisePolicy& policy);

struct BermudanRow {
  std::string payoff;
  SurrogateKind surrogate;
  AcquisitionKind acquisition;
  int replications = 0, n_unique = 0, runs = 0;
  double mean_value = 0, sd_value = 0, mean_se = 0;
};
void write_bermudan_csv(const std::string& path,
                        const std::vector<BermudanRow>& rows);

// report: parse traces back and emit median ER(n) / E(n) curves per
// (hash, surrogate, acquisition) group.
struct ParsedRecord {
  std::string hash;
  std::string surrogate, acquisition;
  int run = 0;
  RunTrace trace;
};
ParsedRecord read_run_record(const std::string& path);

int cmd_report(const std::vector<std::string>& record_files,
               const std::string& out_dir);

}  // namespace lse
