#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "entmix/dynamics.hpp"
#include "entmix/env_model.hpp"

namespace entmix {

// The forward graph G_x(s) with spanning tree T_x(s), built by best-first
// expansion of weighted path prefixes: the pending arrow with maximal
// cumulative weight is expanded, provided the weight clears e^{-hbar s} and
// the prefix has at most s-1 edges.  kappa counts expansion picks; a prefix
// re-entering a known state keeps expanding, so re-traversed graph edges are
// picked once per prefix but stored once.
struct ForwardTree {
  int root = -1;
  int horizon = 0;        // s
  double hbar = 0.0;
  double threshold = 0.0; // e^{-hbar s}

  std::vector<int> node_state;    // graph vertices in discovery order, [0] = root
  std::vector<int> tree_parent;   // node index, -1 for the root
  std::vector<double> tree_weight;
  std::vector<int> depth;
  std::unordered_map<int, int> state_index;

  struct Edge {
    int src;  // state
    int dst;  // state
    double weight;
    bool tree;
  };
  std::vector<Edge> edges;  // deduplicated directed edges

  long kappa = 0;
  std::vector<double> picked_weights;  // cumulative weights in pick order

  int node_count() const { return static_cast<int>(node_state.size()); }
  bool contains(int state) const { return state_index.count(state) != 0; }
  int node_index(int state) const;
  int tx() const { return 1 + static_cast<int>(edges.size()) - node_count(); }
  double kappa_bound() const;  // s e^{hbar s}

  // Throws std::logic_error when a structural invariant fails:
  // picks non-increasing, w_l <= s/l, kappa <= s e^{hbar s}, every pick
  // >= threshold with source depth <= s-1.
  void validate() const;
};

ForwardTree build_forward(LazyEnvironment& env, int root, int s, double hbar,
                          const std::vector<char>* avoid = nullptr,
                          long max_picks = 20'000'000);

// TX(G_x(s)) = 1 + |E| - |V|.
int graph_tx(const ForwardTree& tree);

// Edge list "src dst weight tree_flag" (1-based) and the summary line
// "root,s,kappa,tx,n_nodes".
void write_forward_edges(std::ostream& out, const ForwardTree& tree);
std::string forward_summary(const ForwardTree& tree);

struct GoodStates {
  double s0_fraction = 0.0;
  double sstar_fraction = 0.0;
  std::vector<char> in_s0;     // TX(G_x(2h)) <= 1
  std::vector<char> in_sstar;  // TX(G_x(h)) == 0
};

GoodStates good_states(LazyEnvironment& env, int h, double hbar);

struct NiceParams {
  int t = 0;        // total path length
  int h = 0;        // forward radius, floor(t_ent / 10) by default
  double eps = 0.04;
  double hbar = 0.0;   // H (1 + eps)
  double t_ent = 0.0;
};

// t = round((1+eps) t_ent), h = floor(t_ent/10), hbar = H (1+eps).
NiceParams default_nice_params(const ProfileSet& set, double eps = 0.04);

// P0^t(x,.) together with everything needed to classify sampled paths:
// the forward graph, its tree edge set, the good-state memo and the avoided
// forward trees G_v^x(h).
struct NiceResult {
  NiceParams params;
  int s = 0;               // t - h
  double weight_cap = 0.0; // n^{-1-eps/4}
  double heavy_min = 0.0;  // n^{-eps/8}
  DistVector p0;
  ForwardTree gx;
  std::unordered_set<long long> tree_edges;
  std::unordered_map<int, char> sstar;  // candidate v -> in S*^x
  std::unordered_map<int, std::unordered_set<long long>> suffix_edges;
  // per good v: states at depth h-1 of G_v^x(h) with their path weights
  std::unordered_map<int, std::vector<std::pair<int, double>>> suffix_endpoints;

  double mass() const { return p0.sum(); }
  // Conditions 1-4 on a full length-t path; with h = 0 the middle-step and
  // suffix conditions are vacuous (the decomposition has no such parts).
  bool is_nice(std::span<const int> states, std::span<const double> weights) const;
};

NiceResult nice_mass(LazyEnvironment& env, int x, const NiceParams& params, int feasible_limit = 512);

// q(x) = sum_j (P^t(x,j) - P0^t(x,j)), via exact propagation in the realized
// matrix.  Resolves the environment fully.
double escape_prob(LazyEnvironment& env, int x, const NiceParams& params, int feasible_limit = 512);

struct EscapeMC {
  double estimate = 0.0;
  double stderr_est = 0.0;
  long trials = 0;
};

// Monte Carlo fraction of sampled paths that are not nice; cross-checks
// escape_prob within sampling error.
EscapeMC escape_prob_mc(const StochasticMatrix& m, const NiceResult& res, int x, long trials,
                        std::uint64_t seed);

}  // namespace entmix
