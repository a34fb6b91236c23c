#include "entmix/run_commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "entmix/beta_limit.hpp"
#include "entmix/forward.hpp"
#include "entmix/stats.hpp"
#include "entmix/walker.hpp"

namespace entmix {

namespace {

constexpr int kProfileMaterializeLimit = 4096;  // heavy-tailed profile memory guard
constexpr int kExhaustiveLimit = 2048;          // exhaustive start sweeps up to here

std::string hash_comment(const ExperimentConfig& cfg) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "config-hash: %016llx",
                static_cast<unsigned long long>(config_hash(cfg)));
  return buf;
}

std::string fmt(const char* pattern, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

struct SourceBundle {
  RowSource source;
  double avg_entropy = 0.0;
  double t_ent = 0.0;
  std::vector<double> row_entropy;
};

Profiles load_spec_profiles(const EnsembleSpec& spec, int n_expected) {
  Profiles profiles;
  try {
    profiles = make_profiles(spec);
  } catch (const std::runtime_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (static_cast<int>(profiles.size()) != n_expected)
    throw ConfigError("config: n = " + std::to_string(n_expected) + " does not match the " +
                      std::to_string(profiles.size()) + " profile rows");
  return profiles;
}

// Row entropies without materializing dense heavy-tailed profiles.
SourceBundle make_bundle(const ExperimentConfig& cfg) {
  const EnsembleSpec spec = cfg.ensemble_spec();
  if (spec.kind == EnsembleSpec::Kind::pareto) {
    SourceBundle b{make_row_source(spec), 0.0, 0.0, {}};
    const int n = spec.n;
    b.row_entropy.assign(static_cast<std::size_t>(n), 0.0);
#ifdef _OPENMP
#pragma omp parallel
#endif
    {
      std::vector<double> row(static_cast<std::size_t>(n));
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
      for (int i = 0; i < n; ++i) {
        b.source.fill_row(i, row.data());
        long double h = 0.0L;
        for (double w : row)
          if (w > 0.0) h -= static_cast<long double>(w) * std::log(w);
        b.row_entropy[static_cast<std::size_t>(i)] = static_cast<double>(h);
      }
    }
    long double total = 0.0L;
    for (double h : b.row_entropy) total += h;
    b.avg_entropy = static_cast<double>(total / n);
    b.t_ent = std::log(static_cast<double>(n)) / b.avg_entropy;
    return b;
  }
  const Profiles profiles = load_spec_profiles(spec, cfg.n);
  SourceBundle b{RowSource{realize_matrix(profiles, spec.seed)}, 0.0, 0.0, {}};
  b.row_entropy.reserve(profiles.size());
  for (const auto& p : profiles) b.row_entropy.push_back(p.entropy());
  b.avg_entropy = avg_row_entropy(profiles);
  b.t_ent = entropic_time(profiles);
  return b;
}

std::vector<int> starts_from_entropy(const std::vector<double>& row_entropy,
                                     const StartPolicy& policy, std::uint64_t seed) {
  const int n = static_cast<int>(row_entropy.size());
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
  for (int i = 1; i < n; ++i) {
    if (row_entropy[static_cast<std::size_t>(i)] < row_entropy[static_cast<std::size_t>(lo)]) lo = i;
    if (row_entropy[static_cast<std::size_t>(i)] > row_entropy[static_cast<std::size_t>(hi)]) hi = i;
  }
  starts.push_back(lo);
  starts.push_back(hi);
  std::sort(starts.begin(), starts.end());
  starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
  return starts;
}

std::vector<long> build_grid(const ExperimentConfig& cfg, double t_ent) {
  std::vector<long> grid;
  if (!cfg.ts.empty()) {
    grid = cfg.ts;
  } else {
    std::vector<double> lambdas = cfg.lambdas;
    if (lambdas.empty()) {
      for (double l = 0.0; l <= 2.0001; l += 0.1) lambdas.push_back(l);
    }
    for (double l : lambdas) grid.push_back(std::llround(l * t_ent));
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

DistVector make_reference(const ExperimentConfig& cfg, const SourceBundle& b) {
  if (cfg.ref_stationary) return stationary(b.source, cfg.ref_tol, cfg.ref_max_iter, cfg.seed).pi;
  return pi_hat(b.source, b.t_ent);
}

Profiles materialized_profiles(const ExperimentConfig& cfg) {
  const EnsembleSpec spec = cfg.ensemble_spec();
  if (spec.kind == EnsembleSpec::Kind::pareto && spec.n > kProfileMaterializeLimit)
    throw ConfigError("config: heavy-tailed profiles at this n exceed the materialization guard; "
                      "use n <= " + std::to_string(kProfileMaterializeLimit));
  return load_spec_profiles(spec, cfg.n);
}

std::vector<int> sample_states(int n, int m, std::uint64_t seed) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  Rng rng = Rng::stream(seed, stream_tag::starts);
  std::vector<int> out;
  const int take = std::min(m, n);
  for (int k = 0; k < take; ++k) {
    const int j = k + rng.uniform_int(n - k);
    std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(j)]);
    out.push_back(idx[static_cast<std::size_t>(k)]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

bool run_profile(const ExperimentConfig& cfg, std::ostream& out) {
  SourceBundle b = make_bundle(cfg);
  StartPolicy policy;
  policy.kind = cfg.start_policy;
  policy.sample_size = cfg.sample_size;
  if (policy.kind == StartPolicy::Kind::all && cfg.n > kExhaustiveLimit)
    policy.kind = StartPolicy::Kind::sample;
  const auto starts = starts_from_entropy(b.row_entropy, policy, cfg.seed);
  const auto grid = build_grid(cfg, b.t_ent);
  const DistVector reference = make_reference(cfg, b);
  const CutoffProfile profile = distance_profile(b.source, starts, grid, reference, b.t_ent);

  std::vector<std::string> comments{hash_comment(cfg)};
  comments.push_back("n=" + std::to_string(cfg.n));
  comments.push_back("H=" + fmt("%.12g", b.avg_entropy));
  comments.push_back("t_ent=" + fmt("%.12g", b.t_ent));
  if (cfg.kind == EnsembleSpec::Kind::pareto)
    comments.push_back("h_alpha=" + fmt("%.12g", h_alpha(cfg.alpha)));
  comments.push_back(std::string("reference=") + (cfg.ref_stationary ? "stationary" : "pi_hat"));
  write_profile_csv(out, profile, comments);

  bool ok = true;
  for (const auto& r : profile.rows) {
    if (!(r.tv_min >= -1e-12 && r.tv_max <= 1.0 + 1e-12)) ok = false;
    if (!(r.tv_min <= r.tv_mean + 1e-12 && r.tv_mean <= r.tv_max + 1e-12)) ok = false;
  }
  return ok;
}

bool run_concentrate(const ExperimentConfig& cfg, std::ostream& out) {
  const Profiles profiles = materialized_profiles(cfg);
  auto set = make_profile_set(profiles);
  const double t_ent = set->entropic_time();  // throws when H = 0
  LazyEnvironment env(set, cfg.seed);
  const int t = cfg.conc_t > 0 ? cfg.conc_t : static_cast<int>(std::llround(t_ent));
  const auto starts = sample_states(cfg.n, cfg.conc_starts, cfg.seed);
  const long per_start = std::max<long>(1, cfg.trials / static_cast<long>(starts.size()));
  const auto report = concentration_report(env, starts, t, cfg.eps, per_start, cfg.seed);

  std::vector<std::string> comments{hash_comment(cfg)};
  comments.push_back("n=" + std::to_string(cfg.n));
  comments.push_back("H=" + fmt("%.12g", set->avg_entropy()));
  comments.push_back("t_ent=" + fmt("%.12g", t_ent));
  write_concentration_csv(out, report, comments);

  bool ok = true;
  auto check_row = [&](const ConcentrationRow& r) {
    if (std::fabs(r.frac_below + r.frac_within + r.frac_above - 1.0) > 1e-9) ok = false;
  };
  for (const auto& r : report.per_start) check_row(r);
  check_row(report.pooled);
  return ok;
}

bool run_beta(const ExperimentConfig& cfg, std::ostream& out) {
  if (cfg.kind != EnsembleSpec::Kind::pareto)
    throw ConfigError("config: beta requires kind = pareto");
  const auto report = beta_limit_report(cfg.n, cfg.alpha, cfg.beta_samples, cfg.seed);
  write_beta_csv(out, report, {hash_comment(cfg)});
  bool ok = report.m1 >= report.m2 && report.m2 >= report.m3;
  for (double v : {report.m1, report.m2, report.m3})
    if (!(v >= 0.0 && v <= 1.0)) ok = false;
  return ok;
}

bool run_forward(const ExperimentConfig& cfg, std::ostream& out) {
  const Profiles profiles = materialized_profiles(cfg);
  auto set = make_profile_set(profiles);
  const double H = set->avg_entropy();
  if (!(H > 0.0)) throw ConfigError("config: forward requires non-degenerate profiles");
  const double t_ent = set->entropic_time();
  const double hbar = H * (1.0 + cfg.fw_eps);
  const int h = cfg.fw_h >= 0 ? cfg.fw_h : static_cast<int>(std::floor(t_ent / 10.0));
  int s = cfg.fw_s;
  if (s < 0) {
    const int t = static_cast<int>(std::llround((1.0 + cfg.fw_eps) * t_ent));
    s = std::max(1, t - h);
  }
  LazyEnvironment env(set, cfg.seed);
  std::vector<int> roots = cfg.fw_roots;
  if (roots.empty()) roots = sample_states(cfg.n, cfg.fw_n_roots, cfg.seed);

  std::ostringstream edges;
  for (const auto& line : std::vector<std::string>{hash_comment(cfg)}) out << "# " << line << "\n";
  out << "root,s,kappa,tx,n_nodes,kappa_bound,pass\n";
  bool ok = true;
  char buf[256];
  for (int root : roots) {
    ForwardTree tree = build_forward(env, root, s, hbar);
    bool pass = true;
    try {
      tree.validate();
    } catch (const std::logic_error&) {
      pass = false;
    }
    ok = ok && pass;
    std::snprintf(buf, sizeof buf, "%d,%d,%ld,%d,%d,%.12g,%d\n", root + 1, s, tree.kappa, tree.tx(),
                  tree.node_count(), tree.kappa_bound(), pass ? 1 : 0);
    out << buf;
    if (!cfg.fw_edges_out.empty()) {
      edges << "# root " << root + 1 << "\n";
      write_forward_edges(edges, tree);
    }
  }
  if (!cfg.fw_edges_out.empty()) {
    std::ofstream ef(cfg.fw_edges_out);
    if (!ef) throw ConfigError("config: cannot open edges_out path " + cfg.fw_edges_out);
    ef << edges.str();
  }
  return ok;
}

bool run_mix(const ExperimentConfig& cfg, std::ostream& out) {
  SourceBundle b = make_bundle(cfg);
  StartPolicy policy;
  policy.kind = cfg.start_policy;
  policy.sample_size = cfg.sample_size;
  if (policy.kind == StartPolicy::Kind::all && cfg.n > kExhaustiveLimit)
    policy.kind = StartPolicy::Kind::sample;
  const auto starts = starts_from_entropy(b.row_entropy, policy, cfg.seed);
  const DistVector reference = make_reference(cfg, b);

  for (const auto& line : std::vector<std::string>{hash_comment(cfg)}) out << "# " << line << "\n";
  out << "start,eps,t_mix,t_ent,ratio\n";
  char buf[192];
  bool ok = true;
  for (int i : starts) {
    const auto t = mixing_time(b.source, i, cfg.mix_eps, reference, cfg.mix_horizon);
    const long tv = t ? *t : -1;
    const double ratio = t ? static_cast<double>(*t) / b.t_ent : -1.0;
    std::snprintf(buf, sizeof buf, "%d,%.12g,%ld,%.12g,%.12g\n", i + 1, cfg.mix_eps, tv, b.t_ent,
                  ratio);
    out << buf;
    if (t && *t < 0) ok = false;
  }
  return ok;
}

bool run_stats(const ExperimentConfig& cfg, std::ostream& out) {
  const Profiles profiles = materialized_profiles(cfg);
  const EntropyReport r = entropy_report(profiles);
  out << "# " << hash_comment(cfg) << "\n";
  write_entropy_csv(out, r);
  if (!cfg.matrix_out.empty()) {
    std::ofstream mf(cfg.matrix_out);
    if (!mf) throw ConfigError("config: cannot open matrix_out path " + cfg.matrix_out);
    write_matrix_triplets(mf, realize_matrix(profiles, cfg.seed));
  }
  return r.avg_entropy >= 0.0 && r.t_ent > 0.0;
}

}  // namespace entmix
