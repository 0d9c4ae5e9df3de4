#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "lse/bermudan.hpp"
#include "lse/experiment.hpp"

namespace lse {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Declarative experiment description. Sweeps expand over the cartesian
// product of surrogates x acquisitions.
struct SyntheticJob {
  ExperimentConfig base;
  std::vector<SurrogateKind> surrogates;
  std::vector<AcquisitionKind> acquisitions;
  std::string out_dir = "out";
};

struct BermudanJob {
  BermudanConfig base;
  std::vector<SurrogateKind> surrogates;
  std::vector<AcquisitionKind> acquisitions;
  int runs = 10;
  int eval_paths = 16000;
  std::string out_dir = "out";
};

struct Job {
  enum class Kind { synthetic, bermudan } kind = Kind::synthetic;
  SyntheticJob synthetic;
  BermudanJob bermudan;
  std::string hash;  // stable digest of the canonical config text
};

// Parses and validates a config file; unknown keys are rejected with
// field diagnostics.
Job load_config(const std::string& path);
Job parse_config_text(const std::string& text, const std::string& origin);

}  // namespace lse
