#include "entmix/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "entmix/walker.hpp"

namespace entmix {

namespace {
constexpr int kBlockRows = 256;   // streamed row-generation granularity
constexpr int kReduceChunks = 64; // fixed partial count, thread-count invariant
constexpr long kRenormEvery = 64;
constexpr double kDriftTol = 1e-12;

void normalize_raw_row(double* buf, int n) {
  long double total = 0.0L;
  for (int j = 0; j < n; ++j) total += buf[j];
  for (int j = 0; j < n; ++j) buf[j] = static_cast<double>(buf[j] / total);
}
}  // namespace

DistVector DistVector::uniform(int n) {
  DistVector d(n);
  const double w = 1.0 / n;
  for (auto& x : d.v) x = w;
  return d;
}

DistVector DistVector::delta(int n, int i) {
  DistVector d(n);
  d.v[static_cast<std::size_t>(i)] = 1.0;
  return d;
}

double DistVector::sum() const {
  long double s = 0.0L;
  for (double x : v) s += x;
  return static_cast<double>(s);
}

void DistVector::renormalize() {
  const double s = sum();
  if (s <= 0.0) throw std::domain_error("DistVector: non-positive mass");
  for (auto& x : v) x /= s;
}

void DistVector::validate(double tol) const {
  for (double x : v)
    if (x < 0.0) throw std::domain_error("DistVector: negative entry");
  if (std::fabs(sum() - 1.0) > tol) throw std::domain_error("DistVector: mass not 1");
}

double tv_distance(const DistVector& mu, const DistVector& nu) {
  if (mu.dim() != nu.dim()) throw std::invalid_argument("tv_distance: dimension mismatch");
  long double s = 0.0L;
  for (int j = 0; j < mu.dim(); ++j) {
    const double d = nu[j] - mu[j];
    if (d > 0.0) s += d;
  }
  return static_cast<double>(s);
}

RowSource::RowSource(StochasticMatrix m) : n_(m.dim()), matrix_(std::move(m)) {}

RowSource::RowSource(int n, double alpha, std::uint64_t seed, std::size_t cache_budget_bytes)
    : n_(n), alpha_(alpha), seed_(seed) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("RowSource: alpha must lie in (0,1)");
  const std::size_t bytes = static_cast<std::size_t>(n) * n * sizeof(double);
  if (bytes <= cache_budget_bytes) {
    dense_cache_.resize(static_cast<std::size_t>(n) * n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < n; ++i) {
      Rng rng = pareto_row_stream(seed_, i);
      double* row = dense_cache_.data() + static_cast<std::size_t>(i) * n;
      pareto_raw_row(n, alpha_, rng, row);
      normalize_raw_row(row, n);
    }
  }
}

void RowSource::fill_row(int i, double* buf) const {
  if (matrix_) throw std::logic_error("fill_row: sparse source");
  if (!dense_cache_.empty()) {
    const double* row = cached_row(i);
    std::copy(row, row + n_, buf);
    return;
  }
  Rng rng = pareto_row_stream(seed_, i);
  pareto_raw_row(n_, alpha_, rng, buf);
  normalize_raw_row(buf, n_);
}

RowSource make_row_source(const EnsembleSpec& spec) {
  spec.validate();
  if (spec.kind == EnsembleSpec::Kind::pareto) return RowSource(spec.n, spec.alpha, spec.seed);
  return RowSource(realize_matrix(make_profiles(spec), spec.seed));
}

namespace {

// next <- mu P for a sparse matrix, deterministic chunked scatter.
void sparse_step_single(const StochasticMatrix& m, const DistVector& mu, DistVector& next) {
  const int n = m.dim();
  std::fill(next.v.begin(), next.v.end(), 0.0);
#ifdef _OPENMP
  if (n >= 2048) {
    const int chunks = kReduceChunks;
    std::vector<std::vector<double>> partial(static_cast<std::size_t>(chunks));
#pragma omp parallel for schedule(static)
    for (int c = 0; c < chunks; ++c) {
      auto& part = partial[static_cast<std::size_t>(c)];
      part.assign(static_cast<std::size_t>(n), 0.0);
      const int lo = static_cast<int>(static_cast<long>(n) * c / chunks);
      const int hi = static_cast<int>(static_cast<long>(n) * (c + 1) / chunks);
      for (int i = lo; i < hi; ++i) {
        const double coef = mu[i];
        if (coef == 0.0) continue;
        const int nnz = m.row_nnz(i);
        const int* cols = m.row_cols(i);
        const double* vals = m.row_vals(i);
        for (int k = 0; k < nnz; ++k) part[static_cast<std::size_t>(cols[k])] += coef * vals[k];
      }
    }
    for (int c = 0; c < chunks; ++c)
      for (int j = 0; j < n; ++j) next[j] += partial[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)];
    return;
  }
#endif
  for (int i = 0; i < n; ++i) {
    const double coef = mu[i];
    if (coef == 0.0) continue;
    const int nnz = m.row_nnz(i);
    const int* cols = m.row_cols(i);
    const double* vals = m.row_vals(i);
    for (int k = 0; k < nnz; ++k) next[cols[k]] += coef * vals[k];
  }
}

void sparse_step_one_state(const StochasticMatrix& m, const DistVector& mu, DistVector& next) {
  const int n = m.dim();
  std::fill(next.v.begin(), next.v.end(), 0.0);
  for (int i = 0; i < n; ++i) {
    const double coef = mu[i];
    if (coef == 0.0) continue;
    const int nnz = m.row_nnz(i);
    const int* cols = m.row_cols(i);
    const double* vals = m.row_vals(i);
    for (int k = 0; k < nnz; ++k) next[cols[k]] += coef * vals[k];
  }
}

void renorm_if_drifted(std::vector<DistVector>& states) {
  for (auto& s : states) {
    if (std::fabs(s.sum() - 1.0) > kDriftTol) s.renormalize();
  }
}

}  // namespace

void propagate_batch(const RowSource& src, std::vector<DistVector>& states, long steps,
                     const BatchHook& hook) {
  if (states.empty()) return;
  const int n = src.dim();
  const auto m = static_cast<int>(states.size());
  for (const auto& s : states)
    if (s.dim() != n) throw std::invalid_argument("propagate_batch: dimension mismatch");

  if (src.is_sparse()) {
    const StochasticMatrix& mat = src.matrix();
    std::vector<DistVector> nexts(states.size(), DistVector(n));
    for (long t = 1; t <= steps; ++t) {
      if (m == 1) {
        sparse_step_single(mat, states[0], nexts[0]);
      } else {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (int s = 0; s < m; ++s) sparse_step_one_state(mat, states[static_cast<std::size_t>(s)], nexts[static_cast<std::size_t>(s)]);
      }
      states.swap(nexts);
      if (t % kRenormEvery == 0) renorm_if_drifted(states);
      if (hook) hook(t, states);
    }
    return;
  }

  // Dense source: stream row blocks, sharing generation across the batch.
  const bool cached = src.is_cached_dense();
  std::vector<double> block;
  if (!cached) block.resize(static_cast<std::size_t>(std::min(n, kBlockRows)) * n);
  std::vector<DistVector> nexts(states.size(), DistVector(n));
  for (long t = 1; t <= steps; ++t) {
    for (auto& nx : nexts) std::fill(nx.v.begin(), nx.v.end(), 0.0);
    for (int lo = 0; lo < n; lo += kBlockRows) {
      const int hi = std::min(n, lo + kBlockRows);
      const double* rows = nullptr;
      if (cached) {
        rows = src.cached_row(lo);
      } else {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (int i = lo; i < hi; ++i)
          src.fill_row(i, block.data() + static_cast<std::size_t>(i - lo) * n);
        rows = block.data();
      }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
      for (int s = 0; s < m; ++s) {
        auto& cur = states[static_cast<std::size_t>(s)];
        auto& nx = nexts[static_cast<std::size_t>(s)];
        for (int i = lo; i < hi; ++i) {
          const double coef = cur[i];
          if (coef == 0.0) continue;
          const double* row = rows + static_cast<std::size_t>(i - lo) * n;
          for (int j = 0; j < n; ++j) nx[j] += coef * row[j];
        }
      }
    }
    states.swap(nexts);
    if (t % kRenormEvery == 0) renorm_if_drifted(states);
    if (hook) hook(t, states);
  }
}

DistVector propagate(const RowSource& src, DistVector mu, long steps) {
  if (steps < 0) throw std::invalid_argument("propagate: negative step count");
  std::vector<DistVector> states;
  states.push_back(std::move(mu));
  propagate_batch(src, states, steps);
  return std::move(states.front());
}

DistVector pi_hat(const RowSource& src, double t_ent) {
  const long h = static_cast<long>(std::floor(t_ent / 10.0));
  return propagate(src, DistVector::uniform(src.dim()), h);
}

namespace {
struct PowerRun {
  DistVector limit;
  long iterations;
  double residual;
};

PowerRun power_run(const RowSource& src, DistVector mu, double tol, long max_iter) {
  for (long it = 1; it <= max_iter; ++it) {
    DistVector next = propagate(src, mu, 1);
    const double r = tv_distance(next, mu);
    mu = std::move(next);
    if (r <= tol) return {std::move(mu), it, r};
  }
  throw std::runtime_error("stationary: max_iter exceeded (periodicity or slow mixing)");
}
}  // namespace

StationaryResult stationary(const RowSource& src, double tol, long max_iter, std::uint64_t seed) {
  if (!(tol > 0.0)) throw std::invalid_argument("stationary: tol must be positive");
  const int n = src.dim();
  auto main = power_run(src, DistVector::uniform(n), tol, max_iter);
  Rng rng = Rng::stream(seed, stream_tag::misc);
  double disagreement = 0.0;
  std::vector<DistVector> limits;
  limits.push_back(main.limit);
  for (int k = 0; k < 3; ++k) {
    const int start = rng.uniform_int(n);
    auto run = power_run(src, DistVector::delta(n, start), tol, max_iter);
    limits.push_back(std::move(run.limit));
  }
  for (std::size_t a = 0; a < limits.size(); ++a)
    for (std::size_t b = a + 1; b < limits.size(); ++b)
      disagreement = std::max(disagreement, tv_distance(limits[a], limits[b]));
  if (disagreement > 10.0 * tol)
    throw std::runtime_error("stationary: limits disagree across starts (multiple closed classes)");
  StationaryResult res;
  res.pi = std::move(main.limit);
  res.iterations = main.iterations;
  res.residual = main.residual;
  res.start_disagreement = disagreement;
  return res;
}

std::optional<long> mixing_time(const RowSource& src, int i, double eps, const DistVector& reference,
                                long horizon) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("mixing_time: eps must lie in (0,1)");
  DistVector mu = DistVector::delta(src.dim(), i);
  if (tv_distance(mu, reference) <= eps) return 0;
  for (long t = 1; t <= horizon; ++t) {
    mu = propagate(src, std::move(mu), 1);
    if (tv_distance(mu, reference) <= eps) return t;
  }
  return std::nullopt;
}

std::vector<int> select_starts(const Profiles& profiles, const StartPolicy& policy, std::uint64_t seed) {
  const int n = profiles.front().n;
  std::vector<int> starts;
  if (policy.kind == StartPolicy::Kind::all) {
    starts.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) starts[static_cast<std::size_t>(i)] = i;
    return starts;
  }
  const int m = std::min(policy.sample_size, n);
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  Rng rng = Rng::stream(seed, stream_tag::starts);
  for (int k = 0; k < m; ++k) {
    const int j = k + rng.uniform_int(n - k);
    std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(j)]);
    starts.push_back(idx[static_cast<std::size_t>(k)]);
  }
  int lo = 0, hi = 0;
  double lo_h = profiles.front().entropy(), hi_h = lo_h;
  for (int i = 1; i < n; ++i) {
    const double h = profiles[static_cast<std::size_t>(i)].entropy();
    if (h < lo_h) {
      lo_h = h;
      lo = i;
    }
    if (h > hi_h) {
      hi_h = h;
      hi = i;
    }
  }
  starts.push_back(lo);
  starts.push_back(hi);
  std::sort(starts.begin(), starts.end());
  starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
  return starts;
}

CutoffProfile distance_profile(const RowSource& src, const std::vector<int>& starts,
                               const std::vector<long>& t_grid, const DistVector& reference,
                               double t_ent) {
  if (starts.empty()) throw std::invalid_argument("distance_profile: empty start set");
  if (t_grid.empty()) throw std::invalid_argument("distance_profile: empty time grid");
  for (std::size_t k = 1; k < t_grid.size(); ++k)
    if (t_grid[k] <= t_grid[k - 1]) throw std::invalid_argument("distance_profile: grid must increase");
  if (t_grid.front() < 0) throw std::invalid_argument("distance_profile: negative time");

  const int n = src.dim();
  const auto m = static_cast<int>(starts.size());
  std::vector<DistVector> states;
  states.reserve(starts.size());
  for (int s : starts) states.push_back(DistVector::delta(n, s));

  CutoffProfile profile;
  std::vector<double> tvs(starts.size(), 0.0);
  auto emit_row = [&](long t, const std::vector<DistVector>& st) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int s = 0; s < m; ++s) tvs[static_cast<std::size_t>(s)] = tv_distance(st[static_cast<std::size_t>(s)], reference);
    ProfileRow row;
    row.t = t;
    row.lambda = t_ent > 0.0 ? static_cast<double>(t) / t_ent : 0.0;
    row.tv_min = tvs[0];
    row.tv_max = tvs[0];
    long double mean = 0.0L;
    for (double x : tvs) {
      row.tv_min = std::min(row.tv_min, x);
      row.tv_max = std::max(row.tv_max, x);
      mean += x;
    }
    row.tv_mean = static_cast<double>(mean / static_cast<long double>(m));
    row.n_starts = m;
    profile.rows.push_back(row);
  };

  std::size_t next_grid = 0;
  if (t_grid[next_grid] == 0) {
    emit_row(0, states);
    ++next_grid;
  }
  if (next_grid >= t_grid.size()) return profile;
  const long t_max = t_grid.back();
  propagate_batch(src, states, t_max, [&](long t, const std::vector<DistVector>& st) {
    if (next_grid < t_grid.size() && t == t_grid[next_grid]) {
      emit_row(t, st);
      ++next_grid;
    }
  });
  return profile;
}

void write_profile_csv(std::ostream& out, const CutoffProfile& profile,
                       const std::vector<std::string>& comment_lines) {
  for (const auto& line : comment_lines) out << "# " << line << "\n";
  out << "t,lambda,tv_min,tv_mean,tv_max,n_starts\n";
  char buf[256];
  for (const auto& r : profile.rows) {
    std::snprintf(buf, sizeof buf, "%ld,%.12g,%.12g,%.12g,%.12g,%d\n", r.t, r.lambda, r.tv_min,
                  r.tv_mean, r.tv_max, r.n_starts);
    out << buf;
  }
}

LowerBoundReport lower_bound_check(const StochasticMatrix& m, int i, long t, double theta,
                                   const DistVector& nu, long trials, std::uint64_t seed) {
  if (!(theta > 0.0)) throw std::invalid_argument("lower_bound_check: theta must be positive");
  const MatrixWalker walker(m);
  const double log_theta = std::log(theta);
  long hits = 0;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(+ : hits)
#endif
  for (long trial = 0; trial < trials; ++trial) {
    Rng rng = Rng::stream(seed, stream_tag::trial_slot, static_cast<std::uint64_t>(trial));
    const auto rec = walker.sample(i, static_cast<int>(t), rng);
    if (rec.log_weight > log_theta) ++hits;
  }
  LowerBoundReport rep;
  rep.trials = trials;
  rep.lhs = static_cast<double>(hits) / static_cast<double>(trials);
  rep.lhs_stderr = std::sqrt(std::max(rep.lhs * (1.0 - rep.lhs), 0.0) / static_cast<double>(trials));

  std::vector<DistVector> states;
  states.push_back(DistVector::delta(m.dim(), i));
  DistVector next(m.dim());
  for (long s = 0; s < t; ++s) {
    sparse_step_one_state(m, states.front(), next);
    states.front().v.swap(next.v);
  }
  rep.rhs_tv = tv_distance(nu, states.front());
  long double q = 0.0L;
  for (double x : nu.v) q += static_cast<long double>(x) * x;
  rep.rhs_root = std::sqrt(static_cast<double>(q) / theta);
  rep.rhs = rep.rhs_tv + rep.rhs_root;
  rep.slack = rep.rhs - rep.lhs;
  return rep;
}

CollisionReport pi_hat_collision(const ProfileSetPtr& profiles, int h, long trials, std::uint64_t seed) {
  if (h < 0) throw std::invalid_argument("pi_hat_collision: h must be >= 0");
  const int n = profiles->dim();
  long hits = 0;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(+ : hits)
#endif
  for (long trial = 0; trial < trials; ++trial) {
    Rng rng = Rng::stream(seed, stream_tag::trial_slot, static_cast<std::uint64_t>(trial));
    LazyEnvironment env(profiles, stream_seed(seed, stream_tag::env, static_cast<std::uint64_t>(trial)));
    int x = rng.uniform_int(n);
    for (int s = 0; s < h; ++s) x = env.step(x, rng).next;
    int y = rng.uniform_int(n);
    for (int s = 0; s < h; ++s) y = env.step(y, rng).next;
    if (x == y) ++hits;
  }
  CollisionReport rep;
  rep.trials = trials;
  rep.estimate = static_cast<double>(hits) / static_cast<double>(trials);
  rep.stderr_est =
      std::sqrt(std::max(rep.estimate * (1.0 - rep.estimate), 0.0) / static_cast<double>(trials));
  rep.bound = 2.0 * (h + 1.0) * (h + 1.0) / n;
  return rep;
}

}  // namespace entmix
