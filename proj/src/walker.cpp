#include "entmix/walker.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "entmix/stats.hpp"

namespace entmix {

void TrajectoryRecord::finalize() {
  long double lw = 0.0L;
  for (double w : weights) lw += std::log(w);
  log_weight = static_cast<double>(lw);
  tree_excess = entmix::tree_excess(states);
  first_repeat = first_repeat_time(states);
}

int tree_excess(std::span<const int> path) {
  if (path.empty()) throw std::invalid_argument("tree_excess: empty path");
  std::unordered_set<int> verts;
  std::unordered_set<long long> edges;
  verts.insert(path[0]);
  for (std::size_t k = 1; k < path.size(); ++k) {
    verts.insert(path[k]);
    edges.insert(static_cast<long long>(path[k - 1]) << 32 | static_cast<unsigned>(path[k]));
  }
  return 1 + static_cast<int>(edges.size()) - static_cast<int>(verts.size());
}

std::optional<int> first_repeat_time(std::span<const int> path) {
  if (path.empty()) throw std::invalid_argument("first_repeat_time: empty path");
  std::unordered_set<int> seen;
  seen.insert(path[0]);
  for (std::size_t k = 1; k < path.size(); ++k) {
    if (seen.count(path[k])) return static_cast<int>(k);
    seen.insert(path[k]);
  }
  return std::nullopt;
}

TrajectoryRecord sample_path(LazyEnvironment& env, int start, int t, Rng& rng) {
  TrajectoryRecord rec;
  rec.n = env.dim();
  rec.states.reserve(static_cast<std::size_t>(t) + 1);
  rec.weights.reserve(static_cast<std::size_t>(t));
  rec.states.push_back(start);
  int cur = start;
  for (int s = 0; s < t; ++s) {
    const auto step = env.step(cur, rng);
    rec.states.push_back(step.next);
    rec.weights.push_back(step.weight);
    cur = step.next;
  }
  rec.finalize();
  return rec;
}

MatrixWalker::MatrixWalker(const StochasticMatrix& m) : m_(m) {
  cum_.resize(static_cast<std::size_t>(m.dim()));
  for (int i = 0; i < m.dim(); ++i) {
    auto& c = cum_[static_cast<std::size_t>(i)];
    c.resize(static_cast<std::size_t>(m.row_nnz(i)));
    long double acc = 0.0L;
    for (int k = 0; k < m.row_nnz(i); ++k) {
      acc += m.row_vals(i)[k];
      c[static_cast<std::size_t>(k)] = static_cast<double>(acc);
    }
  }
}

int MatrixWalker::step(int i, Rng& rng, double* weight) const {
  const auto& c = cum_[static_cast<std::size_t>(i)];
  const double target = rng.uniform() * c.back();
  const auto it = std::upper_bound(c.begin(), c.end(), target);
  const auto k = std::min(static_cast<int>(it - c.begin()), static_cast<int>(c.size()) - 1);
  if (weight) *weight = m_.row_vals(i)[k];
  return m_.row_cols(i)[k];
}

TrajectoryRecord MatrixWalker::sample(int start, int t, Rng& rng) const {
  TrajectoryRecord rec;
  rec.n = m_.dim();
  rec.states.reserve(static_cast<std::size_t>(t) + 1);
  rec.weights.reserve(static_cast<std::size_t>(t));
  rec.states.push_back(start);
  int cur = start;
  for (int s = 0; s < t; ++s) {
    double w = 0.0;
    cur = step(cur, rng, &w);
    rec.states.push_back(cur);
    rec.weights.push_back(w);
  }
  rec.finalize();
  return rec;
}

std::vector<std::pair<int, double>> star_samples(const Profiles& profiles, int t, Rng& rng) {
  const ProfileSet set{profiles};
  std::vector<std::pair<int, double>> out;
  out.reserve(static_cast<std::size_t>(t));
  for (int s = 0; s < t; ++s) {
    const int i = rng.uniform_int(set.dim());
    const int slot = set.sample_slot(i, rng.uniform());
    out.emplace_back(i, set.row(i).weights[static_cast<std::size_t>(slot)]);
  }
  return out;
}

namespace {

// Minimal sequential walk with a single shared target stream, used by the
// coupled construction and the annealed Monte Carlo drivers.  Resolution of
// a fresh slot with no used states consumes exactly one uniform_index(n)
// draw, matching the afresh process draw for draw.
struct SeqWalk {
  const ProfileSet& set;
  int n;
  std::unordered_map<long long, int> sigma;  // (row, slot) -> state
  std::unordered_map<int, std::unordered_set<int>> used;

  explicit SeqWalk(const ProfileSet& s) : set(s), n(s.dim()) {}

  static long long key(int i, int slot) {
    return static_cast<long long>(i) << 32 | static_cast<unsigned>(slot);
  }

  std::pair<int, double> step(int i, Rng& slot_rng, Rng& target_rng) {
    const int slot = set.sample_slot(i, slot_rng.uniform());
    const double w = set.row(i).weights[static_cast<std::size_t>(slot)];
    const long long k = key(i, slot);
    auto it = sigma.find(k);
    int next;
    if (it != sigma.end()) {
      next = it->second;
    } else {
      auto& u = used[i];
      do {
        next = static_cast<int>(target_rng.uniform_index(static_cast<std::uint64_t>(n)));
      } while (u.count(next));
      u.insert(next);
      sigma.emplace(k, next);
    }
    return {next, w};
  }
};

double rate_stderr(double p, long trials) {
  return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(trials));
}

}  // namespace

CouplingReport coupling_check(const ProfileSetPtr& profiles, int t, long trials, std::uint64_t seed) {
  if (t < 1) throw std::invalid_argument("coupling_check: t must be >= 1");
  const int n = profiles->dim();
  CouplingReport rep;
  rep.trials = trials;
  long eligible = 0, mismatches = 0;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(+ : eligible, mismatches)
#endif
  for (long trial = 0; trial < trials; ++trial) {
    Rng start_rng = Rng::stream(seed, stream_tag::trial_start, static_cast<std::uint64_t>(trial));
    const int start = static_cast<int>(start_rng.uniform_index(static_cast<std::uint64_t>(n)));

    Rng slot_a = Rng::stream(seed, stream_tag::trial_slot, static_cast<std::uint64_t>(trial));
    Rng target_a = Rng::stream(seed, stream_tag::trial_target, static_cast<std::uint64_t>(trial));
    Rng slot_b = slot_a;
    Rng target_b = target_a;

    SeqWalk seq{*profiles};
    std::vector<int> xs{start}, xs_star{start};
    std::vector<double> ws, ws_star;
    int cur = start, cur_star = start;
    for (int s = 0; s < t; ++s) {
      auto [nx, w] = seq.step(cur, slot_a, target_a);
      xs.push_back(nx);
      ws.push_back(w);
      cur = nx;
      // afresh process: same slot law, target uniform on all of [n]
      const int slot = profiles->sample_slot(cur_star, slot_b.uniform());
      const double wstar = profiles->row(cur_star).weights[static_cast<std::size_t>(slot)];
      const int nxs = static_cast<int>(target_b.uniform_index(static_cast<std::uint64_t>(n)));
      xs_star.push_back(nxs);
      ws_star.push_back(wstar);
      cur_star = nxs;
    }
    const auto rep_time = first_repeat_time(xs);
    if (!rep_time || *rep_time >= t) {
      ++eligible;
      if (xs != xs_star || ws != ws_star) ++mismatches;
    }
  }
  rep.eligible = eligible;
  rep.mismatches = mismatches;
  return rep;
}

TxReport tx_domination_check(const ProfileSetPtr& profiles, int t, long trials, std::uint64_t seed) {
  if (t < 0) throw std::invalid_argument("tx_domination_check: t must be >= 0");
  const int n = profiles->dim();
  long ge1 = 0, ge2 = 0;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(+ : ge1, ge2)
#endif
  for (long trial = 0; trial < trials; ++trial) {
    Rng rng = Rng::stream(seed, stream_tag::trial_slot, static_cast<std::uint64_t>(trial));
    Rng target = Rng::stream(seed, stream_tag::trial_target, static_cast<std::uint64_t>(trial));
    const int start = static_cast<int>(
        Rng::stream(seed, stream_tag::trial_start, static_cast<std::uint64_t>(trial))
            .uniform_index(static_cast<std::uint64_t>(n)));
    SeqWalk seq{*profiles};
    std::vector<int> xs{start};
    int cur = start;
    for (int s = 0; s < t; ++s) {
      auto [nx, w] = seq.step(cur, rng, target);
      (void)w;
      xs.push_back(nx);
      cur = nx;
    }
    const int tx = tree_excess(xs);
    if (tx >= 1) ++ge1;
    if (tx >= 2) ++ge2;
  }
  TxReport rep;
  rep.trials = trials;
  rep.rate_ge1 = static_cast<double>(ge1) / static_cast<double>(trials);
  rep.rate_ge2 = static_cast<double>(ge2) / static_cast<double>(trials);
  rep.stderr_ge1 = rate_stderr(rep.rate_ge1, trials);
  rep.stderr_ge2 = rate_stderr(rep.rate_ge2, trials);
  rep.bound_ge1 = static_cast<double>(t) * t / n;
  rep.bound_ge2 = static_cast<double>(t) * t * t * t / (static_cast<double>(n) * n);
  rep.pass_ge1 = rep.rate_ge1 <= rep.bound_ge1 + 4.0 * rep.stderr_ge1;
  rep.pass_ge2 = rep.rate_ge2 <= rep.bound_ge2 + 4.0 * rep.stderr_ge2;
  return rep;
}

ConcentrationReport concentration_report(LazyEnvironment& env, std::span<const int> starts, int t,
                                         double eps, long trials_per_start, std::uint64_t seed) {
  if (t < 1) throw std::invalid_argument("concentration_report: t must be >= 1");
  if (!(eps > 0.0)) throw std::invalid_argument("concentration_report: eps must be positive");
  const double H = env.profile_set().avg_entropy();
  if (!(H > 0.0)) throw std::domain_error("concentration_report: degenerate profiles (H = 0)");
  const double lo = -(1.0 + eps) * H * t;
  const double hi = -(1.0 - eps) * H * t;

  ConcentrationReport rep;
  long pooled_below = 0, pooled_within = 0, pooled_above = 0;
  std::uint64_t trial_id = 0;
  for (int start : starts) {
    long below = 0, within = 0, above = 0;
    for (long k = 0; k < trials_per_start; ++k, ++trial_id) {
      Rng rng = Rng::stream(seed, stream_tag::trial_slot, trial_id);
      const auto rec = sample_path(env, start, t, rng);
      if (rec.log_weight < lo)
        ++below;
      else if (rec.log_weight > hi)
        ++above;
      else
        ++within;
    }
    ConcentrationRow row;
    row.start = start;
    row.t = t;
    row.eps = eps;
    row.trials = trials_per_start;
    row.frac_below = static_cast<double>(below) / trials_per_start;
    row.frac_within = static_cast<double>(within) / trials_per_start;
    row.frac_above = static_cast<double>(above) / trials_per_start;
    rep.per_start.push_back(row);
    pooled_below += below;
    pooled_within += within;
    pooled_above += above;
  }
  const long total = trials_per_start * static_cast<long>(starts.size());
  rep.pooled.start = -1;
  rep.pooled.t = t;
  rep.pooled.eps = eps;
  rep.pooled.trials = total;
  rep.pooled.frac_below = static_cast<double>(pooled_below) / total;
  rep.pooled.frac_within = static_cast<double>(pooled_within) / total;
  rep.pooled.frac_above = static_cast<double>(pooled_above) / total;
  return rep;
}

bool small_weight_flag(const TrajectoryRecord& rec, double gamma) {
  if (!(gamma >= 0.0)) throw std::invalid_argument("small_weight_flag: gamma must be >= 0");
  const double cutoff = std::pow(static_cast<double>(rec.n), -gamma);
  for (double w : rec.weights)
    if (w < cutoff) return true;
  return false;
}

void write_concentration_csv(std::ostream& out, const ConcentrationReport& report,
                             const std::vector<std::string>& comment_lines) {
  for (const auto& line : comment_lines) out << "# " << line << "\n";
  out << "start,t,eps,frac_below,frac_within,frac_above,trials\n";
  char buf[256];
  auto write_row = [&](const ConcentrationRow& r) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.12g,%.12g,%.12g,%.12g,%ld\n",
                  r.start < 0 ? -1 : r.start + 1, r.t, r.eps, r.frac_below, r.frac_within,
                  r.frac_above, r.trials);
    out << buf;
  };
  for (const auto& r : report.per_start) write_row(r);
  write_row(report.pooled);
}

}  // namespace entmix
