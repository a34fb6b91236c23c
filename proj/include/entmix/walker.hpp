#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "entmix/env_model.hpp"

namespace entmix {

// One sampled walk: states X_0..X_t, weights W_1..W_t, and the trajectory
// summaries used throughout.
struct TrajectoryRecord {
  int n = 0;  // ambient dimension
  std::vector<int> states;
  std::vector<double> weights;
  double log_weight = 0.0;  // sum log W_s, nats
  int tree_excess = 0;
  std::optional<int> first_repeat;  // min t with X_t already visited

  int steps() const { return static_cast<int>(weights.size()); }
  void finalize();  // fills log_weight, tree_excess, first_repeat
};

// TX = 1 + |E| - |V| of the graph induced by the path, edges deduplicated.
int tree_excess(std::span<const int> path);

// min t >= 1 with X_t in {X_0..X_{t-1}}; nullopt if the path is repeat-free.
std::optional<int> first_repeat_time(std::span<const int> path);

// Quenched sampling in a shared lazy environment (extends it consistently).
TrajectoryRecord sample_path(LazyEnvironment& env, int start, int t, Rng& rng);

// Quenched sampling in a realized matrix; const and thread-safe.
class MatrixWalker {
 public:
  explicit MatrixWalker(const StochasticMatrix& m);
  const StochasticMatrix& matrix() const { return m_; }
  int step(int i, Rng& rng, double* weight) const;
  TrajectoryRecord sample(int start, int t, Rng& rng) const;

 private:
  const StochasticMatrix& m_;
  std::vector<std::vector<double>> cum_;
};

// t i.i.d. (state, weight) pairs of the environment regenerated afresh at
// each step: state uniform on [n], weight size-biased within its row.
std::vector<std::pair<int, double>> star_samples(const Profiles& profiles, int t, Rng& rng);

struct CouplingReport {
  long trials = 0;
  long eligible = 0;    // trials with first repeat >= t
  long mismatches = 0;  // must be 0
};

// Runs the sequential walk and the afresh-reset walk over shared slot/target
// streams; on {T >= t} the two must coincide exactly.
CouplingReport coupling_check(const ProfileSetPtr& profiles, int t, long trials, std::uint64_t seed);

struct TxReport {
  long trials = 0;
  double rate_ge1 = 0.0, stderr_ge1 = 0.0, bound_ge1 = 0.0;
  double rate_ge2 = 0.0, stderr_ge2 = 0.0, bound_ge2 = 0.0;
  bool pass_ge1 = false, pass_ge2 = false;  // rate <= bound + 4 stderr
};

// Annealed tree-excess rates against the Binomial-domination bounds
// t^2/n and t^4/n^2.
TxReport tx_domination_check(const ProfileSetPtr& profiles, int t, long trials, std::uint64_t seed);

struct ConcentrationRow {
  int start = -1;  // -1 = pooled
  int t = 0;
  double eps = 0.0;
  double frac_below = 0.0;
  double frac_within = 0.0;
  double frac_above = 0.0;
  long trials = 0;
};

struct ConcentrationReport {
  std::vector<ConcentrationRow> per_start;
  ConcentrationRow pooled;
};

// Fractions of quenched paths with log rho(t) below / within / above the
// window [-(1+eps) H t, -(1-eps) H t].  Mutates the shared environment;
// trials are serialized.
ConcentrationReport concentration_report(LazyEnvironment& env, std::span<const int> starts, int t,
                                         double eps, long trials_per_start, std::uint64_t seed);

// min(W_1..W_t) < n^{-gamma}
bool small_weight_flag(const TrajectoryRecord& rec, double gamma);

// CSV schema: start,t,eps,frac_below,frac_within,frac_above,trials
void write_concentration_csv(std::ostream& out, const ConcentrationReport& report,
                             const std::vector<std::string>& comment_lines);

}  // namespace entmix
