#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "entmix/ensembles.hpp"
#include "entmix/env_model.hpp"

namespace entmix {

// Probability vector over [n], exact to floating precision.
struct DistVector {
  std::vector<double> v;

  DistVector() = default;
  explicit DistVector(int n) : v(static_cast<std::size_t>(n), 0.0) {}
  static DistVector uniform(int n);
  static DistVector delta(int n, int i);

  int dim() const { return static_cast<int>(v.size()); }
  double& operator[](int i) { return v[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return v[static_cast<std::size_t>(i)]; }
  double sum() const;
  void renormalize();
  void validate(double tol = 1e-10) const;
};

// Total variation distance, computed as sum_j [nu(j) - mu(j)]_+.
double tv_distance(const DistVector& mu, const DistVector& nu);

// Uniform access to transition rows: either a realized sparse matrix or
// heavy-tailed rows regenerated on demand from per-row substreams (cached as
// a dense matrix when the memory budget allows, so exact propagation at
// n = 10^4 still runs in O(n) memory when it does not).
class RowSource {
 public:
  explicit RowSource(StochasticMatrix m);
  RowSource(int n, double alpha, std::uint64_t seed,
            std::size_t cache_budget_bytes = kDefaultCacheBudget);

  static constexpr std::size_t kDefaultCacheBudget = std::size_t(256) << 20;

  int dim() const { return n_; }
  bool is_sparse() const { return matrix_.has_value(); }
  bool is_cached_dense() const { return !dense_cache_.empty(); }
  const StochasticMatrix& matrix() const { return *matrix_; }
  const double* cached_row(int i) const { return dense_cache_.data() + static_cast<std::size_t>(i) * n_; }

  // Write normalized row i into buf (dense sources only).
  void fill_row(int i, double* buf) const;

 private:
  int n_ = 0;
  std::optional<StochasticMatrix> matrix_;
  double alpha_ = 0.0;
  std::uint64_t seed_ = 0;
  std::vector<double> dense_cache_;
};

RowSource make_row_source(const EnsembleSpec& spec);

// hook(step, states) runs after each step, step = 1..steps.
using BatchHook = std::function<void(long, const std::vector<DistVector>&)>;

// states[s] <- states[s] P, iterated.  Row generation is shared across the
// batch; the result does not depend on the number of OpenMP threads.
void propagate_batch(const RowSource& src, std::vector<DistVector>& states, long steps,
                     const BatchHook& hook = {});

DistVector propagate(const RowSource& src, DistVector mu, long steps);

// pi_hat = uniform . P^h with h = floor(t_ent / 10).
DistVector pi_hat(const RowSource& src, double t_ent);

struct StationaryResult {
  DistVector pi;
  long iterations = 0;
  double residual = 0.0;            // tv(pi P, pi)
  double start_disagreement = 0.0;  // max pairwise tv across re-runs
};

// Fixed point by iterated propagation from uniform, re-checked from 3 random
// delta starts.  Throws std::runtime_error on max_iter (periodicity / slow
// mixing) and when the re-runs disagree by more than 10*tol (multiple closed
// classes).
StationaryResult stationary(const RowSource& src, double tol, long max_iter, std::uint64_t seed = 1);

// First t with tv(P^t(i,.), reference) <= eps, or nullopt at the horizon.
std::optional<long> mixing_time(const RowSource& src, int i, double eps, const DistVector& reference,
                                long horizon);

struct StartPolicy {
  enum class Kind { all, sample };
  Kind kind = Kind::all;
  int sample_size = 64;
};

// Exhaustive starts, or a seeded sample plus the rows of minimal and maximal
// entropy; ascending and deduplicated.
std::vector<int> select_starts(const Profiles& profiles, const StartPolicy& policy, std::uint64_t seed);

struct ProfileRow {
  long t = 0;
  double lambda = 0.0;
  double tv_min = 0.0;
  double tv_mean = 0.0;
  double tv_max = 0.0;
  int n_starts = 0;
};

struct CutoffProfile {
  std::vector<ProfileRow> rows;
};

// CSV schema (exact header): t,lambda,tv_min,tv_mean,tv_max,n_starts
void write_profile_csv(std::ostream& out, const CutoffProfile& profile,
                       const std::vector<std::string>& comment_lines);

CutoffProfile distance_profile(const RowSource& src, const std::vector<int>& starts,
                               const std::vector<long>& t_grid, const DistVector& reference,
                               double t_ent);

struct LowerBoundReport {
  double lhs = 0.0;       // Monte Carlo estimate of Q_i(rho(t) > theta)
  double lhs_stderr = 0.0;
  double rhs_tv = 0.0;    // tv(nu, P^t(i,.))
  double rhs_root = 0.0;  // sqrt(sum nu^2 / theta)
  double rhs = 0.0;
  double slack = 0.0;     // rhs - lhs
  long trials = 0;
};

LowerBoundReport lower_bound_check(const StochasticMatrix& m, int i, long t, double theta,
                                   const DistVector& nu, long trials, std::uint64_t seed);

struct CollisionReport {
  double estimate = 0.0;
  double stderr_est = 0.0;
  double bound = 0.0;  // 2 (h+1)^2 / n
  long trials = 0;
};

// Annealed P(X_h = Y_h) for two walks from uniform starts sharing one
// environment; equals E[sum_j pi_hat(j)^2] for h = floor(t_ent/10).
CollisionReport pi_hat_collision(const ProfileSetPtr& profiles, int h, long trials, std::uint64_t seed);

}  // namespace entmix
