#include "entmix/env_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace entmix {

namespace {
constexpr double kRowSumTol = 1e-12;
}

void RowProfile::validate() const {
  if (n < 1) throw std::invalid_argument("RowProfile: n must be >= 1");
  if (weights.empty()) throw std::invalid_argument("RowProfile: empty weight list");
  if (static_cast<int>(weights.size()) > n)
    throw std::invalid_argument("RowProfile: more weights than ambient dimension");
  long double sum = 0.0L;
  double prev = 1.0;
  for (double w : weights) {
    if (!(w > 0.0)) throw std::invalid_argument("RowProfile: weights must be strictly positive");
    if (w > prev + 1e-15) throw std::invalid_argument("RowProfile: weights must be non-increasing");
    prev = w;
    sum += w;
  }
  if (std::fabs(static_cast<double>(sum) - 1.0) > kRowSumTol)
    throw std::invalid_argument("RowProfile: weights must sum to 1");
}

double RowProfile::entropy() const {
  long double h = 0.0L;
  for (double w : weights) h -= static_cast<long double>(w) * std::log(w);
  return static_cast<double>(h);
}

double RowProfile::log_sq_moment() const {
  long double s = 0.0L;
  for (double w : weights) {
    const double lw = std::log(w);
    s += static_cast<long double>(w) * lw * lw;
  }
  return static_cast<double>(s);
}

void validate_profiles(const Profiles& profiles) {
  if (profiles.empty()) throw std::invalid_argument("profiles: empty");
  const int n = profiles.front().n;
  if (static_cast<int>(profiles.size()) != n)
    throw std::invalid_argument("profiles: need exactly one profile per state");
  for (int i = 0; i < n; ++i) {
    if (profiles[i].n != n) throw std::invalid_argument("profiles: mismatched ambient dimension");
    profiles[i].validate();
  }
}

StochasticMatrix::StochasticMatrix(int n, std::vector<int> indptr, std::vector<int> cols,
                                   std::vector<double> vals)
    : n_(n), indptr_(std::move(indptr)), cols_(std::move(cols)), vals_(std::move(vals)) {
  if (static_cast<int>(indptr_.size()) != n_ + 1)
    throw std::invalid_argument("StochasticMatrix: bad indptr");
  for (int i = 0; i < n_; ++i) {
    long double sum = 0.0L;
    for (int k = indptr_[i]; k < indptr_[i + 1]; ++k) {
      if (cols_[k] < 0 || cols_[k] >= n_) throw std::invalid_argument("StochasticMatrix: column out of range");
      if (vals_[k] < 0.0) throw std::invalid_argument("StochasticMatrix: negative entry");
      sum += vals_[k];
    }
    if (std::fabs(static_cast<double>(sum) - 1.0) > kRowSumTol)
      throw std::invalid_argument("StochasticMatrix: row does not sum to 1");
  }
}

StochasticMatrix StochasticMatrix::from_rows(int n,
                                             const std::vector<std::vector<std::pair<int, double>>>& rows) {
  std::vector<int> indptr(n + 1, 0);
  std::vector<int> cols;
  std::vector<double> vals;
  for (int i = 0; i < n; ++i) {
    indptr[i + 1] = indptr[i] + static_cast<int>(rows[i].size());
    for (const auto& [c, v] : rows[i]) {
      cols.push_back(c);
      vals.push_back(v);
    }
  }
  return StochasticMatrix(n, std::move(indptr), std::move(cols), std::move(vals));
}

double StochasticMatrix::entry(int i, int j) const {
  for (int k = indptr_[i]; k < indptr_[i + 1]; ++k)
    if (cols_[k] == j) return vals_[k];
  return 0.0;
}

RowProfile StochasticMatrix::row_profile(int i) const {
  RowProfile p;
  p.row_id = i;
  p.n = n_;
  p.weights.assign(row_vals(i), row_vals(i) + row_nnz(i));
  std::sort(p.weights.begin(), p.weights.end(), std::greater<double>());
  return p;
}

Profiles StochasticMatrix::profiles() const {
  Profiles out;
  out.reserve(n_);
  for (int i = 0; i < n_; ++i) out.push_back(row_profile(i));
  return out;
}

ProfileSet::ProfileSet(Profiles profiles) : profiles_(std::move(profiles)) {
  validate_profiles(profiles_);
  n_ = profiles_.front().n;
  cum_.resize(profiles_.size());
  long double hsum = 0.0L;
  max_weight_ = 0.0;
  for (std::size_t i = 0; i < profiles_.size(); ++i) {
    const auto& w = profiles_[i].weights;
    cum_[i].resize(w.size());
    long double c = 0.0L;
    for (std::size_t k = 0; k < w.size(); ++k) {
      c += w[k];
      cum_[i][k] = static_cast<double>(c);
    }
    hsum += profiles_[i].entropy();
    max_weight_ = std::max(max_weight_, w.front());
  }
  avg_entropy_ = static_cast<double>(hsum / static_cast<long double>(n_));
}

int ProfileSet::sample_slot(int i, double u) const {
  const auto& cum = cum_[static_cast<std::size_t>(i)];
  const double target = u * cum.back();
  const auto it = std::upper_bound(cum.begin(), cum.end(), target);
  const auto idx = static_cast<int>(it - cum.begin());
  return std::min(idx, static_cast<int>(cum.size()) - 1);
}

double ProfileSet::entropic_time() const {
  if (!(avg_entropy_ > 0.0))
    throw std::domain_error("entropic_time: all rows deterministic (H = 0)");
  return std::log(static_cast<double>(n_)) / avg_entropy_;
}

ProfileSetPtr make_profile_set(Profiles profiles) {
  return std::make_shared<const ProfileSet>(std::move(profiles));
}

LazyEnvironment::LazyEnvironment(ProfileSetPtr profiles, std::uint64_t seed)
    : n_(profiles->dim()),
      seed_(seed),
      profiles_(std::move(profiles)),
      walk_rng_(Rng::stream(seed, stream_tag::walk)) {}

LazyEnvironment::LazyEnvironment(Profiles profiles, std::uint64_t seed)
    : LazyEnvironment(make_profile_set(std::move(profiles)), seed) {}

LazyEnvironment LazyEnvironment::from_matrix(const StochasticMatrix& m, std::uint64_t seed) {
  LazyEnvironment env(m.profiles(), seed);
  for (int i = 0; i < m.dim(); ++i) {
    // Stable pairing of ranked slots with columns: sort entries by
    // (descending value, ascending column); slot k maps to the k-th entry.
    std::vector<std::pair<double, int>> entries;
    entries.reserve(m.row_nnz(i));
    for (int k = 0; k < m.row_nnz(i); ++k) entries.emplace_back(m.row_vals(i)[k], m.row_cols(i)[k]);
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    RowState& r = env.touch(i);
    for (std::size_t k = 0; k < entries.size(); ++k) {
      r.slot_to_state.emplace(static_cast<int>(k), entries[k].second);
      r.used.insert(entries[k].second);
    }
  }
  env.fully_resolved_ = true;
  return env;
}

LazyEnvironment::RowState& LazyEnvironment::touch(int i) {
  auto it = rows_.find(i);
  if (it == rows_.end()) {
    RowState st;
    st.stream = Rng::stream(seed_, stream_tag::row_targets, static_cast<std::uint64_t>(i));
    it = rows_.emplace(i, std::move(st)).first;
  }
  return it->second;
}

int LazyEnvironment::resolve(int i, int slot) {
  if (i < 0 || i >= n_ || slot < 0 || slot >= n_)
    throw std::out_of_range("resolve: state or slot out of range");
  RowState& r = touch(i);
  if (auto it = r.slot_to_state.find(slot); it != r.slot_to_state.end()) return it->second;
  int target = -1;
  if (!r.complement_mode && static_cast<int>(r.used.size()) * 2 > n_) {
    r.remaining.clear();
    r.remaining.reserve(n_ - r.used.size());
    for (int v = 0; v < n_; ++v)
      if (!r.used.count(v)) r.remaining.push_back(v);
    r.complement_mode = true;
  }
  if (r.complement_mode) {
    const auto idx = static_cast<std::size_t>(r.stream.uniform_index(r.remaining.size()));
    target = r.remaining[idx];
    r.remaining[idx] = r.remaining.back();
    r.remaining.pop_back();
  } else {
    do {
      target = r.stream.uniform_int(n_);
    } while (r.used.count(target));
  }
  r.slot_to_state.emplace(slot, target);
  r.used.insert(target);
  return target;
}

std::optional<int> LazyEnvironment::peek(int i, int slot) const {
  auto it = rows_.find(i);
  if (it == rows_.end()) return std::nullopt;
  auto jt = it->second.slot_to_state.find(slot);
  if (jt == it->second.slot_to_state.end()) return std::nullopt;
  return jt->second;
}

int LazyEnvironment::resolved_count(int i) const {
  auto it = rows_.find(i);
  return it == rows_.end() ? 0 : static_cast<int>(it->second.slot_to_state.size());
}

LazyEnvironment::StepResult LazyEnvironment::step(int i, Rng& rng) {
  const int slot = profiles_->sample_slot(i, rng.uniform());
  const int next = resolve(i, slot);
  return {next, profiles_->row(i).weights[static_cast<std::size_t>(slot)], slot};
}

LazyEnvironment::StepResult LazyEnvironment::step(int i) { return step(i, walk_rng_); }

void LazyEnvironment::resolve_all() {
  for (int i = 0; i < n_; ++i)
    for (int k = 0; k < profiles_->row(i).slots(); ++k) resolve(i, k);
  fully_resolved_ = true;
}

StochasticMatrix LazyEnvironment::realize() {
  std::vector<std::vector<std::pair<int, double>>> rows(static_cast<std::size_t>(n_));
  for (int i = 0; i < n_; ++i) {
    const auto& w = profiles_->row(i).weights;
    rows[i].reserve(w.size());
    for (int k = 0; k < static_cast<int>(w.size()); ++k)
      rows[i].emplace_back(resolve(i, k), w[static_cast<std::size_t>(k)]);
    std::sort(rows[i].begin(), rows[i].end());
  }
  fully_resolved_ = true;
  return StochasticMatrix::from_rows(n_, rows);
}

StochasticMatrix realize_matrix(const Profiles& profiles, std::uint64_t seed) {
  LazyEnvironment env(profiles, seed);
  return env.realize();
}

Profiles parse_profiles(std::istream& in, int n_override) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::vector<double> w;
    double x;
    while (ls >> x) w.push_back(x);
    if (!w.empty()) rows.push_back(std::move(w));
  }
  const int n = n_override > 0 ? n_override : static_cast<int>(rows.size());
  Profiles out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    RowProfile p;
    p.row_id = static_cast<int>(i);
    p.n = n;
    p.weights = std::move(rows[i]);
    std::sort(p.weights.begin(), p.weights.end(), std::greater<double>());
    while (!p.weights.empty() && p.weights.back() == 0.0) p.weights.pop_back();
    p.validate();
    out.push_back(std::move(p));
  }
  validate_profiles(out);
  return out;
}

Profiles load_profiles(const std::string& path, int n_override) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open profile file: " + path);
  return parse_profiles(in, n_override);
}

void write_matrix_triplets(std::ostream& out, const StochasticMatrix& m) {
  char buf[64];
  for (int i = 0; i < m.dim(); ++i) {
    for (int k = 0; k < m.row_nnz(i); ++k) {
      std::snprintf(buf, sizeof buf, "%d %d %.17g\n", i + 1, m.row_cols(i)[k] + 1, m.row_vals(i)[k]);
      out << buf;
    }
  }
}

}  // namespace entmix
