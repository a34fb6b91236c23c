#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "entmix/dynamics.hpp"
#include "entmix/ensembles.hpp"

namespace entmix {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key = value sections; '#' starts a comment.  Unknown sections or keys
// are errors with line-precise messages.
struct ExperimentConfig {
  // [experiment]
  std::uint64_t seed = 1;
  int n = 100;
  long trials = 10000;
  double eps = 0.25;
  std::string output;
  std::string matrix_out;  // stats: also export the realized matrix triplets

  // [ensemble]
  EnsembleSpec::Kind kind = EnsembleSpec::Kind::out_degrees;
  std::vector<int> degrees{3};  // tiled to length n
  double alpha = 0.5;
  std::string profile_path;

  // [grid]  (lambda grid scaled by t_ent, or explicit steps)
  std::vector<double> lambdas;
  std::vector<long> ts;

  // [starts]
  StartPolicy::Kind start_policy = StartPolicy::Kind::sample;
  int sample_size = 64;

  // [reference]
  bool ref_stationary = false;
  double ref_tol = 1e-10;
  long ref_max_iter = 200000;

  // [concentrate]
  int conc_t = -1;       // default round(t_ent)
  int conc_starts = 20;

  // [forward]
  std::vector<int> fw_roots;  // 0-based internally, 1-based in the file
  int fw_n_roots = 8;
  int fw_s = -1;
  int fw_h = -1;
  double fw_eps = 0.04;
  std::string fw_edges_out;

  // [mix]
  double mix_eps = 0.25;
  long mix_horizon = 500;

  // [beta]
  long beta_samples = 100000;

  bool operator==(const ExperimentConfig&) const = default;

  EnsembleSpec ensemble_spec() const;
  void validate() const;  // throws ConfigError
};

ExperimentConfig parse_config(std::istream& in, const std::string& source_name = "<config>");
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& cfg);
std::uint64_t config_hash(const ExperimentConfig& cfg);

}  // namespace entmix
