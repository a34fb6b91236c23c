#include "entmix/serial_ref.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace entmix::serial {

namespace {
void step_one(const RowSource& src, const DistVector& mu, DistVector& next,
              std::vector<double>& rowbuf) {
  const int n = src.dim();
  std::fill(next.v.begin(), next.v.end(), 0.0);
  if (src.is_sparse()) {
    const auto& m = src.matrix();
    for (int i = 0; i < n; ++i) {
      const double coef = mu[i];
      if (coef == 0.0) continue;
      for (int k = 0; k < m.row_nnz(i); ++k) next[m.row_cols(i)[k]] += coef * m.row_vals(i)[k];
    }
    return;
  }
  for (int i = 0; i < n; ++i) {
    const double coef = mu[i];
    if (coef == 0.0) continue;
    const double* row;
    if (src.is_cached_dense()) {
      row = src.cached_row(i);
    } else {
      src.fill_row(i, rowbuf.data());
      row = rowbuf.data();
    }
    for (int j = 0; j < n; ++j) next[j] += coef * row[j];
  }
}
}  // namespace

void propagate_batch(const RowSource& src, std::vector<DistVector>& states, long steps,
                     const BatchHook& hook) {
  const int n = src.dim();
  std::vector<double> rowbuf(static_cast<std::size_t>(n));
  std::vector<DistVector> nexts(states.size(), DistVector(n));
  for (long t = 1; t <= steps; ++t) {
    for (std::size_t s = 0; s < states.size(); ++s) step_one(src, states[s], nexts[s], rowbuf);
    states.swap(nexts);
    if (t % 64 == 0) {
      for (auto& st : states)
        if (std::fabs(st.sum() - 1.0) > 1e-12) st.renormalize();
    }
    if (hook) hook(t, states);
  }
}

DistVector propagate(const RowSource& src, DistVector mu, long steps) {
  if (steps < 0) throw std::invalid_argument("propagate: negative step count");
  std::vector<DistVector> states;
  states.push_back(std::move(mu));
  serial::propagate_batch(src, states, steps);
  return std::move(states.front());
}

CutoffProfile distance_profile(const RowSource& src, const std::vector<int>& starts,
                               const std::vector<long>& t_grid, const DistVector& reference,
                               double t_ent) {
  CutoffProfile profile;
  const int n = src.dim();
  std::vector<DistVector> states;
  for (int s : starts) states.push_back(DistVector::delta(n, s));
  auto emit = [&](long t, const std::vector<DistVector>& st) {
    ProfileRow row;
    row.t = t;
    row.lambda = t_ent > 0.0 ? static_cast<double>(t) / t_ent : 0.0;
    row.n_starts = static_cast<int>(st.size());
    long double mean = 0.0L;
    row.tv_min = 2.0;
    row.tv_max = -1.0;
    for (const auto& s : st) {
      const double d = tv_distance(s, reference);
      row.tv_min = std::min(row.tv_min, d);
      row.tv_max = std::max(row.tv_max, d);
      mean += d;
    }
    row.tv_mean = static_cast<double>(mean / static_cast<long double>(st.size()));
    profile.rows.push_back(row);
  };
  std::size_t next_grid = 0;
  if (!t_grid.empty() && t_grid[0] == 0) {
    emit(0, states);
    ++next_grid;
  }
  if (next_grid >= t_grid.size()) return profile;
  serial::propagate_batch(src, states, t_grid.back(), [&](long t, const std::vector<DistVector>& st) {
    if (next_grid < t_grid.size() && t == t_grid[next_grid]) {
      emit(t, st);
      ++next_grid;
    }
  });
  return profile;
}

}  // namespace entmix::serial
