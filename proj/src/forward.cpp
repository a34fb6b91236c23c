#include "entmix/forward.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <queue>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "entmix/walker.hpp"

namespace entmix {

namespace {
inline long long edge_key(int src, int dst) {
  return static_cast<long long>(src) << 32 | static_cast<unsigned>(dst);
}
}  // namespace

int ForwardTree::node_index(int state) const {
  auto it = state_index.find(state);
  return it == state_index.end() ? -1 : it->second;
}

double ForwardTree::kappa_bound() const {
  return static_cast<double>(horizon) * std::exp(hbar * horizon);
}

void ForwardTree::validate() const {
  constexpr double kSlack = 1e-9;
  if (static_cast<long>(picked_weights.size()) != kappa)
    throw std::logic_error("ForwardTree: pick count mismatch");
  double prev = 2.0;
  for (long l = 0; l < kappa; ++l) {
    const double w = picked_weights[static_cast<std::size_t>(l)];
    if (w > prev * (1.0 + kSlack)) throw std::logic_error("ForwardTree: picks not non-increasing");
    prev = w;
    if (w < threshold * (1.0 - kSlack)) throw std::logic_error("ForwardTree: pick below threshold");
    const double cap = static_cast<double>(horizon) / static_cast<double>(l + 1);
    if (w > cap * (1.0 + kSlack)) throw std::logic_error("ForwardTree: pick exceeds s/l bound");
  }
  if (static_cast<double>(kappa) > kappa_bound() * (1.0 + kSlack) + 1.0)
    throw std::logic_error("ForwardTree: kappa exceeds s e^{hbar s}");
}

ForwardTree build_forward(LazyEnvironment& env, int root, int s, double hbar,
                          const std::vector<char>* avoid, long max_picks) {
  if (s < 0) throw std::invalid_argument("build_forward: s must be >= 0");
  if (!(hbar > 0.0)) throw std::invalid_argument("build_forward: hbar must be positive");
  if (avoid && (*avoid)[static_cast<std::size_t>(root)])
    throw std::invalid_argument("build_forward: root is in the avoided set");

  ForwardTree out;
  out.root = root;
  out.horizon = s;
  out.hbar = hbar;
  out.threshold = std::exp(-hbar * s);
  out.node_state.push_back(root);
  out.tree_parent.push_back(-1);
  out.tree_weight.push_back(1.0);
  out.depth.push_back(0);
  out.state_index.emplace(root, 0);

  struct Arrow {
    double w;
    int src_state;
    int slot;
    long prefix;
  };
  struct ArrowLess {
    bool operator()(const Arrow& a, const Arrow& b) const {
      if (a.w != b.w) return a.w < b.w;
      if (a.src_state != b.src_state) return a.src_state > b.src_state;
      if (a.slot != b.slot) return a.slot > b.slot;
      return a.prefix > b.prefix;
    }
  };
  std::priority_queue<Arrow, std::vector<Arrow>, ArrowLess> pq;

  // Prefix bookkeeping: depth and cumulative weight of every explored path
  // prefix.  Prefix 0 is the root itself.
  std::vector<int> prefix_state{root};
  std::vector<int> prefix_depth{0};
  std::vector<double> prefix_weight{1.0};

  std::unordered_set<long long> edge_seen;

  auto push_arrows = [&](long prefix) {
    const int y = prefix_state[static_cast<std::size_t>(prefix)];
    const int d = prefix_depth[static_cast<std::size_t>(prefix)];
    if (d > s - 1) return;
    const double w = prefix_weight[static_cast<std::size_t>(prefix)];
    const auto& weights = env.profile(y).weights;
    for (int k = 0; k < static_cast<int>(weights.size()); ++k) {
      const double cum = w * weights[static_cast<std::size_t>(k)];
      if (cum >= out.threshold) pq.push({cum, y, k, prefix});
    }
  };
  push_arrows(0);

  while (!pq.empty()) {
    const Arrow a = pq.top();
    pq.pop();
    if (out.kappa >= max_picks) throw std::runtime_error("build_forward: expansion budget exceeded");
    ++out.kappa;
    out.picked_weights.push_back(a.w);

    const int z = env.resolve(a.src_state, a.slot);
    if (avoid && (*avoid)[static_cast<std::size_t>(z)]) continue;

    const double step_w = env.profile(a.src_state).weights[static_cast<std::size_t>(a.slot)];
    const bool fresh = !out.contains(z);
    if (edge_seen.insert(edge_key(a.src_state, z)).second)
      out.edges.push_back({a.src_state, z, step_w, fresh});
    const int new_depth = prefix_depth[static_cast<std::size_t>(a.prefix)] + 1;
    if (fresh) {
      out.state_index.emplace(z, out.node_count());
      out.node_state.push_back(z);
      out.tree_parent.push_back(out.node_index(a.src_state));
      out.tree_weight.push_back(a.w);
      out.depth.push_back(new_depth);
    }
    prefix_state.push_back(z);
    prefix_depth.push_back(new_depth);
    prefix_weight.push_back(a.w);
    push_arrows(static_cast<long>(prefix_state.size()) - 1);
  }
  return out;
}

int graph_tx(const ForwardTree& tree) { return tree.tx(); }

void write_forward_edges(std::ostream& out, const ForwardTree& tree) {
  char buf[128];
  for (const auto& e : tree.edges) {
    std::snprintf(buf, sizeof buf, "%d %d %.17g %d\n", e.src + 1, e.dst + 1, e.weight,
                  e.tree ? 1 : 0);
    out << buf;
  }
}

std::string forward_summary(const ForwardTree& tree) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d,%d,%ld,%d,%d", tree.root + 1, tree.horizon, tree.kappa,
                tree.tx(), tree.node_count());
  return buf;
}

GoodStates good_states(LazyEnvironment& env, int h, double hbar) {
  if (h < 0) throw std::invalid_argument("good_states: h must be >= 0");
  const int n = env.dim();
  GoodStates gs;
  gs.in_s0.assign(static_cast<std::size_t>(n), 0);
  gs.in_sstar.assign(static_cast<std::size_t>(n), 0);
  auto classify = [&](int x) {
    ForwardTree g2 = build_forward(env, x, 2 * h, hbar);
    gs.in_s0[static_cast<std::size_t>(x)] = g2.tx() <= 1 ? 1 : 0;
    ForwardTree g1 = build_forward(env, x, h, hbar);
    gs.in_sstar[static_cast<std::size_t>(x)] = g1.tx() == 0 ? 1 : 0;
  };
  if (env.fully_resolved()) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16)
#endif
    for (int x = 0; x < n; ++x) classify(x);
  } else {
    for (int x = 0; x < n; ++x) classify(x);
  }
  long s0 = 0, sstar = 0;
  for (int x = 0; x < n; ++x) {
    s0 += gs.in_s0[static_cast<std::size_t>(x)];
    sstar += gs.in_sstar[static_cast<std::size_t>(x)];
  }
  gs.s0_fraction = static_cast<double>(s0) / n;
  gs.sstar_fraction = static_cast<double>(sstar) / n;
  return gs;
}

NiceParams default_nice_params(const ProfileSet& set, double eps) {
  NiceParams p;
  p.eps = eps;
  p.t_ent = set.entropic_time();
  p.t = static_cast<int>(std::llround((1.0 + eps) * p.t_ent));
  p.h = static_cast<int>(std::floor(p.t_ent / 10.0));
  p.hbar = set.avg_entropy() * (1.0 + eps);
  return p;
}

bool NiceResult::is_nice(std::span<const int> states, std::span<const double> weights) const {
  const int t = params.t;
  if (static_cast<int>(weights.size()) != t || static_cast<int>(states.size()) != t + 1)
    throw std::invalid_argument("is_nice: path length mismatch");
  if (states[0] != gx.root) return false;
  long double w = 1.0L;
  for (double x : weights) w *= x;
  if (!(static_cast<double>(w) <= weight_cap)) return false;
  for (int i = 0; i < s; ++i)
    if (!tree_edges.count(edge_key(states[static_cast<std::size_t>(i)], states[static_cast<std::size_t>(i) + 1])))
      return false;
  if (params.h == 0) return true;
  if (weights[static_cast<std::size_t>(s)] < heavy_min) return false;
  const int v = states[static_cast<std::size_t>(s) + 1];
  auto it = sstar.find(v);
  if (it == sstar.end() || !it->second) return false;
  const auto& edges = suffix_edges.at(v);
  for (int i = s + 1; i < t; ++i)
    if (!edges.count(edge_key(states[static_cast<std::size_t>(i)], states[static_cast<std::size_t>(i) + 1])))
      return false;
  return true;
}

NiceResult nice_mass(LazyEnvironment& env, int x, const NiceParams& params, int feasible_limit) {
  const int n = env.dim();
  if (n > feasible_limit)
    throw std::invalid_argument("nice_mass: instance exceeds the feasible-size guard");
  if (params.t < 1) throw std::invalid_argument("nice_mass: t must be >= 1");
  if (params.h < 0 || params.h >= params.t)
    throw std::invalid_argument("nice_mass: need 0 <= h < t");
  NiceResult res;
  res.params = params;
  res.s = params.t - params.h;
  res.weight_cap = std::pow(static_cast<double>(n), -1.0 - params.eps / 4.0);
  res.heavy_min = std::pow(static_cast<double>(n), -params.eps / 8.0);
  res.gx = build_forward(env, x, res.s, params.hbar);
  res.p0 = DistVector(n);
  for (const auto& e : res.gx.edges)
    if (e.tree) res.tree_edges.insert(edge_key(e.src, e.dst));

  std::vector<char> avoid(static_cast<std::size_t>(n), 0);
  for (int st : res.gx.node_state) avoid[static_cast<std::size_t>(st)] = 1;

  for (int u = 0; u < res.gx.node_count(); ++u) {
    if (res.gx.depth[static_cast<std::size_t>(u)] != res.s) continue;
    const int su = res.gx.node_state[static_cast<std::size_t>(u)];
    const double wu = res.gx.tree_weight[static_cast<std::size_t>(u)];
    if (params.h == 0) {
      if (wu <= res.weight_cap) res.p0[su] += wu;
      continue;
    }
    const auto& wlist = env.profile(su).weights;
    for (int k = 0; k < static_cast<int>(wlist.size()); ++k) {
      const double p = wlist[static_cast<std::size_t>(k)];
      if (p < res.heavy_min) continue;
      const int v = env.resolve(su, k);
      if (res.gx.contains(v)) continue;  // v must avoid G_x(s)
      auto it = res.sstar.find(v);
      if (it == res.sstar.end()) {
        ForwardTree gv = build_forward(env, v, params.h, params.hbar, &avoid);
        const bool good = gv.tx() == 0;
        it = res.sstar.emplace(v, good ? 1 : 0).first;
        if (good) {
          auto& eset = res.suffix_edges[v];
          for (const auto& e : gv.edges) eset.insert(edge_key(e.src, e.dst));
          auto& ends = res.suffix_endpoints[v];
          for (int w = 0; w < gv.node_count(); ++w)
            if (gv.depth[static_cast<std::size_t>(w)] == params.h - 1)
              ends.emplace_back(gv.node_state[static_cast<std::size_t>(w)],
                                gv.tree_weight[static_cast<std::size_t>(w)]);
        }
      }
      if (!it->second) continue;
      for (const auto& [y, wsuf] : res.suffix_endpoints.at(v)) {
        const double total = wu * p * wsuf;
        if (total <= res.weight_cap) res.p0[y] += total;
      }
    }
  }
  return res;
}

double escape_prob(LazyEnvironment& env, int x, const NiceParams& params, int feasible_limit) {
  NiceResult res = nice_mass(env, x, params, feasible_limit);
  const StochasticMatrix m = env.realize();
  RowSource src{m};
  DistVector row_t = propagate(src, DistVector::delta(env.dim(), x), params.t);
  long double q = 0.0L;
  for (int j = 0; j < env.dim(); ++j) q += static_cast<long double>(row_t[j]) - res.p0[j];
  return static_cast<double>(q);
}

EscapeMC escape_prob_mc(const StochasticMatrix& m, const NiceResult& res, int x, long trials,
                        std::uint64_t seed) {
  const MatrixWalker walker(m);
  long not_nice = 0;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(+ : not_nice)
#endif
  for (long trial = 0; trial < trials; ++trial) {
    Rng rng = Rng::stream(seed, stream_tag::trial_slot, static_cast<std::uint64_t>(trial));
    const auto rec = walker.sample(x, res.params.t, rng);
    if (!res.is_nice(rec.states, rec.weights)) ++not_nice;
  }
  EscapeMC mc;
  mc.trials = trials;
  mc.estimate = static_cast<double>(not_nice) / static_cast<double>(trials);
  mc.stderr_est =
      std::sqrt(std::max(mc.estimate * (1.0 - mc.estimate), 0.0) / static_cast<double>(trials));
  return mc;
}

}  // namespace entmix
