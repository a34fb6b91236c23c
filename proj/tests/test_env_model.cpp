#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "entmix/env_model.hpp"

using namespace entmix;

namespace {

Profiles uniform_profiles(int n, int d) {
  Profiles out;
  for (int i = 0; i < n; ++i) {
    RowProfile p;
    p.row_id = i;
    p.n = n;
    p.weights.assign(static_cast<std::size_t>(d), 1.0 / d);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace

TEST_CASE("new environment starts with empty domains and is seed-deterministic") {
  auto profiles = uniform_profiles(8, 3);
  LazyEnvironment env(profiles, 7);
  for (int i = 0; i < 8; ++i) CHECK(env.resolved_count(i) == 0);

  LazyEnvironment a(profiles, 7);
  LazyEnvironment b(profiles, 7);
  Rng ra(1), rb(1);
  for (int k = 0; k < 50; ++k) {
    const auto sa = a.step(k % 8, ra);
    const auto sb = b.step(k % 8, rb);
    CHECK(sa.next == sb.next);
    CHECK(sa.slot == sb.slot);
    CHECK(sa.weight == sb.weight);
  }
  // different seed, different environment (almost surely)
  LazyEnvironment c(profiles, 8);
  int diffs = 0;
  for (int i = 0; i < 8; ++i)
    for (int k = 0; k < 3; ++k)
      if (a.resolve(i, k) != c.resolve(i, k)) ++diffs;
  CHECK(diffs > 0);
}

TEST_CASE("invalid profiles are rejected") {
  RowProfile bad;
  bad.row_id = 0;
  bad.n = 2;
  bad.weights = {0.55, 0.44};  // sums to 0.99
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  RowProfile increasing;
  increasing.n = 2;
  increasing.weights = {0.3, 0.7};
  CHECK_THROWS_AS(increasing.validate(), std::invalid_argument);

  auto profiles = uniform_profiles(4, 2);
  profiles[2].n = 5;
  CHECK_THROWS_AS(validate_profiles(profiles), std::invalid_argument);
}

TEST_CASE("resolve pins the only admissible target at n = 1") {
  LazyEnvironment env(uniform_profiles(1, 1), 3);
  CHECK(env.resolve(0, 0) == 0);
}

TEST_CASE("resolving all slots of a row yields a permutation, idempotently") {
  const int n = 64;
  Profiles profiles = uniform_profiles(n, n);
  LazyEnvironment env(profiles, 42);
  std::vector<int> first;
  for (int k = 0; k < n; ++k) first.push_back(env.resolve(5, k));
  std::set<int> image(first.begin(), first.end());
  CHECK(static_cast<int>(image.size()) == n);
  for (int k = 0; k < n; ++k) CHECK(env.resolve(5, k) == first[static_cast<std::size_t>(k)]);
}

TEST_CASE("injectivity holds under interleaved resolve/step access") {
  const int n = 40;
  Profiles profiles = uniform_profiles(n, 11);
  LazyEnvironment env(profiles, 9);
  Rng rng(17);
  for (int it = 0; it < 500; ++it) {
    const int i = rng.uniform_int(n);
    if (rng.uniform() < 0.5) {
      env.resolve(i, rng.uniform_int(11));
    } else {
      env.step(i, rng);
    }
  }
  for (int i = 0; i < n; ++i) {
    std::set<int> seen;
    int assigned = 0;
    for (int k = 0; k < 11; ++k) {
      if (auto v = env.peek(i, k)) {
        seen.insert(*v);
        ++assigned;
      }
    }
    CHECK(static_cast<int>(seen.size()) == assigned);
  }
}

TEST_CASE("step returns profile weights and matches slot frequencies") {
  SUBCASE("single-atom rows always report weight 1") {
    LazyEnvironment env(uniform_profiles(5, 1), 1);
    Rng rng(2);
    for (int k = 0; k < 20; ++k) CHECK(env.step(1, rng).weight == 1.0);
  }
  SUBCASE("uniform r-out rows report weight 1/r") {
    LazyEnvironment env(uniform_profiles(30, 3), 1);
    Rng rng(2);
    for (int k = 0; k < 200; ++k) CHECK(env.step(k % 30, rng).weight == doctest::Approx(1.0 / 3));
  }
  SUBCASE("empirical slot frequencies match the profile within 4 sigma") {
    RowProfile p;
    p.row_id = 0;
    p.n = 4;
    p.weights = {0.5, 0.3, 0.2};
    Profiles profiles;
    profiles.push_back(p);
    for (int i = 1; i < 4; ++i) {
      RowProfile q = p;
      q.row_id = i;
      profiles.push_back(q);
    }
    LazyEnvironment env(profiles, 5);
    Rng rng(11);
    const long N = 100000;
    std::vector<long> counts(3, 0);
    for (long k = 0; k < N; ++k) ++counts[static_cast<std::size_t>(env.step(0, rng).slot)];
    for (int s = 0; s < 3; ++s) {
      const double expect = p.weights[static_cast<std::size_t>(s)];
      const double got = static_cast<double>(counts[static_cast<std::size_t>(s)]) / N;
      const double sigma = std::sqrt(expect * (1.0 - expect) / N);
      CHECK(std::fabs(got - expect) <= 4.0 * sigma);
    }
  }
}

TEST_CASE("realize_matrix properties") {
  SUBCASE("n = 1 gives the 1x1 identity") {
    const auto m = realize_matrix(uniform_profiles(1, 1), 4);
    CHECK(m.dim() == 1);
    CHECK(m.entry(0, 0) == 1.0);
  }
  SUBCASE("rows sum to one and sorted entries reproduce the profile") {
    RowProfile p;
    p.n = 6;
    p.weights = {0.4, 0.3, 0.2, 0.1};
    Profiles profiles;
    for (int i = 0; i < 6; ++i) {
      RowProfile q = p;
      q.row_id = i;
      profiles.push_back(q);
    }
    const auto m = realize_matrix(profiles, 19);
    for (int i = 0; i < 6; ++i) {
      long double sum = 0;
      for (int k = 0; k < m.row_nnz(i); ++k) sum += m.row_vals(i)[k];
      CHECK(std::fabs(static_cast<double>(sum) - 1.0) <= 1e-12);
      const auto rp = m.row_profile(i);
      REQUIRE(rp.weights.size() == p.weights.size());
      for (std::size_t k = 0; k < p.weights.size(); ++k) CHECK(rp.weights[k] == p.weights[k]);
    }
  }
  SUBCASE("realize equals a canonical lazy sweep with the same seed") {
    auto profiles = uniform_profiles(12, 4);
    const auto direct = realize_matrix(profiles, 77);
    LazyEnvironment env(profiles, 77);
    for (int i = 0; i < 12; ++i)
      for (int k = 0; k < 4; ++k) env.resolve(i, k);
    const auto swept = env.realize();
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 12; ++j) CHECK(direct.entry(i, j) == swept.entry(i, j));
  }
  SUBCASE("row entropy is invariant under realization") {
    RowProfile p;
    p.n = 5;
    p.weights = {0.6, 0.25, 0.15};
    Profiles profiles;
    for (int i = 0; i < 5; ++i) {
      RowProfile q = p;
      q.row_id = i;
      profiles.push_back(q);
    }
    const auto m = realize_matrix(profiles, 3);
    for (int i = 0; i < 5; ++i)
      CHECK(m.row_profile(i).entropy() == doctest::Approx(p.entropy()).epsilon(1e-14));
  }
}

TEST_CASE("from_matrix produces a fully resolved consistent environment") {
  std::vector<std::vector<std::pair<int, double>>> rows{
      {{1, 0.5}, {2, 0.5}}, {{1, 1.0}}, {{2, 1.0}}};
  const auto m = StochasticMatrix::from_rows(3, rows);
  auto env = LazyEnvironment::from_matrix(m);
  CHECK(env.fully_resolved());
  // slot 0 of row 0 is the larger-or-first entry: ties resolved to column 1
  CHECK(env.resolve(0, 0) == 1);
  CHECK(env.resolve(0, 1) == 2);
  CHECK(env.resolve(1, 0) == 1);
  auto realized = env.realize();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(realized.entry(i, j) == m.entry(i, j));
}

TEST_CASE("profile text parsing and triplet export") {
  std::istringstream in("0.5 0.5\n1.0\n0.25 0.25 0.5  # comment\n");
  const auto profiles = parse_profiles(in);
  REQUIRE(profiles.size() == 3);
  CHECK(profiles[0].weights == std::vector<double>{0.5, 0.5});
  CHECK(profiles[2].weights == std::vector<double>{0.5, 0.25, 0.25});

  const auto m = realize_matrix(profiles, 2);
  std::ostringstream out;
  write_matrix_triplets(out, m);
  // 1-based triplets, one per nonzero entry
  int lines = 0;
  std::istringstream back(out.str());
  std::string line;
  double total = 0.0;
  while (std::getline(back, line)) {
    ++lines;
    int i, j;
    double p;
    REQUIRE(std::sscanf(line.c_str(), "%d %d %lf", &i, &j, &p) == 3);
    CHECK(i >= 1);
    CHECK(i <= 3);
    CHECK(j >= 1);
    CHECK(j <= 3);
    total += p;
  }
  CHECK(lines == 6);
  CHECK(total == doctest::Approx(3.0));
}
