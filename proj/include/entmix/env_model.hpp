#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "entmix/rng.hpp"

namespace entmix {

// Ranked nonzero transition probabilities of one row: non-increasing,
// strictly positive, summing to 1.  Zero entries are never stored.
struct RowProfile {
  int row_id = 0;  // 0-based state index
  int n = 0;       // ambient dimension
  std::vector<double> weights;

  void validate() const;           // throws std::invalid_argument on violation
  double entropy() const;          // -sum p log p, nats
  double log_sq_moment() const;    // sum p (log p)^2
  int slots() const { return static_cast<int>(weights.size()); }
};

using Profiles = std::vector<RowProfile>;

void validate_profiles(const Profiles& profiles);

// Immutable sparse row-stochastic matrix (CSR). States and columns are
// 0-based internally; file formats are 1-based.
class StochasticMatrix {
 public:
  StochasticMatrix(int n, std::vector<int> indptr, std::vector<int> cols, std::vector<double> vals);
  static StochasticMatrix from_rows(int n, const std::vector<std::vector<std::pair<int, double>>>& rows);

  int dim() const { return n_; }
  int row_nnz(int i) const { return indptr_[i + 1] - indptr_[i]; }
  const int* row_cols(int i) const { return cols_.data() + indptr_[i]; }
  const double* row_vals(int i) const { return vals_.data() + indptr_[i]; }
  double entry(int i, int j) const;  // 0 if absent
  std::size_t nnz() const { return cols_.size(); }

  // Row entries sorted by descending probability (ties by ascending column).
  RowProfile row_profile(int i) const;
  Profiles profiles() const;

 private:
  int n_;
  std::vector<int> indptr_;
  std::vector<int> cols_;
  std::vector<double> vals_;
};

// Immutable bundle of row profiles with prebuilt samplers and entropy
// statistics; shared between environments and Monte Carlo drivers.
class ProfileSet {
 public:
  explicit ProfileSet(Profiles profiles);

  int dim() const { return n_; }
  const Profiles& profiles() const { return profiles_; }
  const RowProfile& row(int i) const { return profiles_[static_cast<std::size_t>(i)]; }

  // Slot index with probability weights[slot], by inversion of u in [0,1).
  int sample_slot(int i, double u) const;

  double avg_entropy() const { return avg_entropy_; }
  double entropic_time() const;  // throws if avg_entropy == 0
  double max_weight() const { return max_weight_; }

 private:
  int n_;
  Profiles profiles_;
  std::vector<std::vector<double>> cum_;  // per-row cumulative weights
  double avg_entropy_;
  double max_weight_;
};

using ProfileSetPtr = std::shared_ptr<const ProfileSet>;

ProfileSetPtr make_profile_set(Profiles profiles);

// Per-row partial uniform injection sigma_i, built on demand.  Each row owns
// a deterministic substream derived from (seed, row), so resolutions of
// different rows commute.
class LazyEnvironment {
 public:
  LazyEnvironment(ProfileSetPtr profiles, std::uint64_t seed);
  LazyEnvironment(Profiles profiles, std::uint64_t seed);

  // Fully resolved environment whose realized matrix is exactly `m`.
  // Slots of equal weight are assigned to columns in ascending order.
  static LazyEnvironment from_matrix(const StochasticMatrix& m, std::uint64_t seed = 0);

  int dim() const { return n_; }
  std::uint64_t seed() const { return seed_; }
  const ProfileSet& profile_set() const { return *profiles_; }
  const RowProfile& profile(int i) const { return profiles_->row(i); }

  // sigma_i(slot): the first access draws the image uniformly from the
  // unused states of row i; repeated access returns the stored value.
  int resolve(int i, int slot);
  std::optional<int> peek(int i, int slot) const;
  int resolved_count(int i) const;
  bool fully_resolved() const { return fully_resolved_; }

  struct StepResult {
    int next;
    double weight;
    int slot;
  };
  // One walk step from state i: slot ~ p_i drawn from rng, target resolved.
  StepResult step(int i, Rng& rng);
  StepResult step(int i);  // uses the environment-owned walk stream

  // Resolve every stored slot of every row in canonical order (row 0..n-1,
  // slot 0..k-1).  After this the environment is immutable in practice.
  void resolve_all();

  // Matrix realization P(i, sigma_i(slot)) = weights[slot] over stored slots.
  // Calls resolve, so it completes the canonical sweep on untouched slots.
  StochasticMatrix realize();

 private:
  struct RowState {
    std::unordered_map<int, int> slot_to_state;
    std::unordered_set<int> used;
    std::vector<int> remaining;  // complement list once |used| > n/2
    bool complement_mode = false;
    Rng stream;
  };
  RowState& touch(int i);

  int n_;
  std::uint64_t seed_;
  ProfileSetPtr profiles_;
  std::unordered_map<int, RowState> rows_;
  Rng walk_rng_;
  bool fully_resolved_ = false;
};

// Full realization from profiles: identical to a fresh LazyEnvironment with
// the same seed swept in canonical order.
StochasticMatrix realize_matrix(const Profiles& profiles, std::uint64_t seed);

// Text formats.  Profiles: one row per line, whitespace-separated nonzero
// probabilities.  Matrix: sparse triplets "i j p", 1-based.
Profiles load_profiles(const std::string& path, int n_override = -1);
Profiles parse_profiles(std::istream& in, int n_override = -1);
void write_matrix_triplets(std::ostream& out, const StochasticMatrix& m);

}  // namespace entmix
