#include <doctest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "ensmc/ensemble.hpp"
#include "ensmc/errors.hpp"
#include "support/circle.hpp"
#include "support/toy_targets.hpp"

using namespace ensmc;
using namespace ensmc::testing;

namespace {

Ensemble manual_ensemble(std::vector<std::vector<double>> members, std::vector<double> logdens,
                         std::vector<double> logmarg) {
  static SeparableGaussianToy dummy(0, 1);
  EvalCounters c;
  SlowContext ctx = slow_phase(dummy, std::span<const double>{}, c);
  return Ensemble{{}, std::move(members), std::move(logdens), std::move(logmarg), std::move(ctx),
                  nullptr};
}

double normal_pdf(double x, double mu, double sd) {
  const double z = (x - mu) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * M_PI));
}

}  // namespace

TEST_CASE("logsumexp handles -inf") {
  CHECK(logsumexp(std::vector<double>{0.0, 0.0}) == doctest::Approx(std::log(2.0)));
  CHECK(logsumexp(std::vector<double>{kNegInf, 0.0}) == doctest::Approx(0.0));
  CHECK(logsumexp(std::vector<double>{kNegInf, kNegInf}) == kNegInf);
}

TEST_CASE("accept_probability") {
  CHECK(accept_probability(0.5) == 1.0);
  CHECK(accept_probability(0.0) == 1.0);
  CHECK(accept_probability(std::log(0.25)) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(accept_probability(kNegInf) == 0.0);
  CHECK(accept_probability(kNegInf - kNegInf) == 0.0);  // NaN guard
}

TEST_CASE("measure parameter validation") {
  CHECK_THROWS(ExchangeableMeasure(1, {0.5}));
  CHECK_THROWS(ExchangeableMeasure(3, {0.0}));
  CHECK_THROWS(GridMeasure({1}, {1.0}));
  CHECK_THROWS(GridMeasure({4}, {0.0}));
  CHECK_THROWS(GridMeasure({4}, {1.0, 1.0}));
  CHECK_THROWS(ChainMeasure(1, 0.5));
  CHECK_THROWS(IndependentMeasure(1, std::make_shared<DiagGaussian>(std::vector<double>{0.0},
                                                                    std::vector<double>{1.0})));
  CHECK(GridMeasure({7, 7}, {0.5, 0.5}).ensemble_size() == 49);
}

TEST_CASE("map_up anchors the current point bit-identically and costs one slow eval") {
  SeparableGaussianToy toy(2, 1);
  const FastSlowPoint p{{0.25, -1.5}, {0.7071067811865476}};
  RngStream rng(5);

  const auto check_measure = [&](std::shared_ptr<const EnsembleMeasure> m) {
    EvalCounters c;
    const Ensemble e = map_up(m, toy, p, c, rng);
    CHECK(c.slow_evals == 1);
    CHECK(c.fast_evals == static_cast<std::uint64_t>(m->ensemble_size()));
    CHECK(e.size() == m->ensemble_size());
    bool anchored = false;
    for (int j = 0; j < e.size(); ++j)
      if (e.fast_members[j][0] == p.fast[0]) anchored = true;  // exact bit equality
    CHECK(anchored);
    CHECK(e.slow == p.slow);
    // members evaluated against the shared context
    EvalCounters c2;
    const SlowContext ctx = slow_phase(toy, p.slow, c2);
    for (int j = 0; j < e.size(); ++j)
      CHECK(e.member_logdens[j] == fast_phase(toy, ctx, e.fast_members[j], c2));
  };

  check_measure(std::make_shared<GridMeasure>(std::vector<int>{5}, std::vector<double>{0.5}));
  check_measure(std::make_shared<ExchangeableMeasure>(6, std::vector<double>{0.4}));
  check_measure(std::make_shared<ChainMeasure>(6, 0.3));
  check_measure(std::make_shared<IndependentMeasure>(
      4, std::make_shared<DiagGaussian>(std::vector<double>{0.0}, std::vector<double>{1.0})));
}

TEST_CASE("marginal corrections: zero unless independent") {
  SeparableGaussianToy toy(1, 1);
  const FastSlowPoint p{{0.0}, {0.3}};
  RngStream rng(11);
  EvalCounters c;

  for (std::shared_ptr<const EnsembleMeasure> m :
       {std::shared_ptr<const EnsembleMeasure>(
            std::make_shared<GridMeasure>(std::vector<int>{4}, std::vector<double>{0.5})),
        std::shared_ptr<const EnsembleMeasure>(
            std::make_shared<ExchangeableMeasure>(5, std::vector<double>{0.7})),
        std::shared_ptr<const EnsembleMeasure>(std::make_shared<ChainMeasure>(5, 0.2))}) {
    const Ensemble e = map_up(m, toy, p, c, rng);
    for (double lm : e.member_logmarg) CHECK(lm == 0.0);
  }

  auto dist = std::make_shared<DiagGaussian>(std::vector<double>{0.1}, std::vector<double>{0.9});
  const Ensemble e =
      map_up(std::make_shared<IndependentMeasure>(4, dist), toy, p, c, rng);
  for (int j = 0; j < e.size(); ++j)
    CHECK(e.member_logmarg[j] == dist->log_density(e.fast_members[j]));
}

TEST_CASE("grid members lie on a common lattice") {
  SeparableGaussianToy toy(1, 2);
  auto grid = std::make_shared<GridMeasure>(std::vector<int>{7, 7},
                                            std::vector<double>{0.5, 0.25});
  const FastSlowPoint p{{0.0}, {0.3, -0.8}};
  RngStream rng(2);
  EvalCounters c;
  const Ensemble e = map_up(grid, toy, p, c, rng);
  CHECK(e.size() == 49);
  int anchor = -1;
  for (int j = 0; j < 49; ++j)
    if (e.fast_members[j][0] == p.fast[0] && e.fast_members[j][1] == p.fast[1]) anchor = j;
  REQUIRE(anchor >= 0);
  // dyadic spacings make lattice arithmetic exact; scale range defaults to 1
  for (int j = 0; j < 49; ++j) {
    const double di = (e.fast_members[j][0] - e.fast_members[anchor][0]) / 0.5;
    const double dj = (e.fast_members[j][1] - e.fast_members[anchor][1]) / 0.25;
    CHECK(di == std::round(di));
    CHECK(dj == std::round(dj));
  }
}

TEST_CASE("grid spacing randomization stays within the configured range") {
  GridMeasure grid({9}, {1.0}, 1.0, 1.1);
  RngStream rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::vector<double> d = grid.draw_spacings(rng);
    CHECK(d[0] >= 1.0);
    CHECK(d[0] <= 1.1);
  }
}

TEST_CASE("ensemble_log_density examples") {
  // circle example: two members, pi values 0.2 and 0.3, uniform marginals
  const Ensemble circle = manual_ensemble({{0.0}, {9.0}},
                                          {std::log(0.2), std::log(0.3)}, {0.0, 0.0});
  CHECK(ensemble_log_density(circle) == doctest::Approx(std::log(0.25)).epsilon(1e-14));

  const Ensemble dead = manual_ensemble({{0.0}, {1.0}}, {kNegInf, kNegInf}, {0.0, 0.0});
  CHECK(ensemble_log_density(dead) == kNegInf);

  const double cval = -3.7;
  const Ensemble equal =
      manual_ensemble({{0.0}, {1.0}, {2.0}}, {cval, cval, cval}, {0.0, 0.0, 0.0});
  CHECK(ensemble_log_density(equal) == doctest::Approx(cval).epsilon(1e-14));
}

TEST_CASE("map_down selection probabilities and errors") {
  // weights proportional to (1, 3)
  const Ensemble e =
      manual_ensemble({{0.0}, {1.0}}, {std::log(1.0), std::log(3.0)}, {0.0, 0.0});
  const std::vector<double> w = selection_logweights(e);
  CHECK(std::exp(w[0] - logsumexp(w)) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(std::exp(w[1] - logsumexp(w)) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(select_index(w, 0.0) == 0);
  CHECK(select_index(w, 0.2499) == 0);
  CHECK(select_index(w, 0.2501) == 1);
  CHECK(select_index(w, 0.9999) == 1);

  // a single finite member is always selected
  const Ensemble single = manual_ensemble({{0.0}, {1.0}, {2.0}}, {kNegInf, -2.0, kNegInf},
                                          {0.0, 0.0, 0.0});
  RngStream rng(9);
  for (int i = 0; i < 50; ++i) {
    auto [p, choice] = map_down(single, rng);
    CHECK(choice.index == 1);
    CHECK(p.fast[0] == 1.0);
  }

  const Ensemble dead = manual_ensemble({{0.0}}, {kNegInf}, {0.0});
  CHECK_THROWS_AS(map_down(dead, rng), AllZeroDensity);

  // empirical selection frequencies follow the weights
  RngStream rng2(10);
  int count0 = 0;
  const int trials = 40000;
  for (int i = 0; i < trials; ++i) {
    auto [p, choice] = map_down(e, rng2);
    if (choice.index == 0) ++count0;
  }
  CHECK(std::abs(count0 / static_cast<double>(trials) - 0.25) < 0.01);
}

TEST_CASE("map_down on a grid ensemble weights by pi alone") {
  // independent-measure corrections change weights; grid corrections are zero
  const Ensemble grid =
      manual_ensemble({{0.0}, {1.0}}, {std::log(0.5), std::log(0.5)}, {0.0, 0.0});
  const std::vector<double> w = selection_logweights(grid);
  CHECK(w[0] == w[1]);
}

TEST_CASE("update_slow_fixed_fast: zero proposal is always accepted and changes nothing") {
  SeparableGaussianToy toy(2, 1);
  auto grid = std::make_shared<GridMeasure>(std::vector<int>{4}, std::vector<double>{0.5});
  const FastSlowPoint p{{0.4, -0.2}, {0.1}};
  RngStream rng(21);
  EvalCounters c;
  const Ensemble e = map_up(grid, toy, p, c, rng);

  const std::uint64_t slow_before = c.slow_evals;
  const UpdateResult r =
      update_slow_fixed_fast(e, toy, SlowProposal{{0.0, 0.0}, -1}, c, rng);
  CHECK(r.accepted);
  CHECK(c.slow_evals == slow_before + 1);  // proposals cost one slow eval even when trivial
  CHECK(r.ensemble.slow == e.slow);
  CHECK(r.ensemble.fast_members == e.fast_members);
  CHECK(r.ensemble.member_logdens == e.member_logdens);
}

TEST_CASE("figure-1 style acceptance ratios on a uniform-support target") {
  // row 0: support {3,4,5,6}; row 1: support {5}; row 2: support {4,5}
  TableToy uniform(3, 10, [](int s, int f) {
    if (s == 0) return (f >= 3 && f <= 6) ? 0.0 : kNegInf;
    if (s == 1) return f == 5 ? 0.0 : kNegInf;
    return (f == 4 || f == 5) ? 0.0 : kNegInf;
  });
  EvalCounters c;
  std::vector<std::vector<double>> members(10);
  for (int j = 0; j < 10; ++j) members[j] = {static_cast<double>(j)};

  const Ensemble before =
      assemble_ensemble(uniform, std::vector<double>{0.0}, members, std::vector<double>(10, 0.0), c);
  const Ensemble after_fixed =
      assemble_ensemble(uniform, std::vector<double>{1.0}, members, std::vector<double>(10, 0.0), c);
  // slow move with the fast members fixed: 1 member in support vs 4
  CHECK(accept_probability(ensemble_log_density(after_fixed) - ensemble_log_density(before)) ==
        doctest::Approx(0.25).epsilon(1e-13));

  // slow move plus a favourable grid shift: 2 in support vs 4
  const Ensemble after_shifted =
      assemble_ensemble(uniform, std::vector<double>{2.0}, members, std::vector<double>(10, 0.0), c);
  CHECK(accept_probability(ensemble_log_density(after_shifted) - ensemble_log_density(before)) ==
        doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("update_slow_shifted_fast rules") {
  SeparableGaussianToy toy(1, 1);
  const FastSlowPoint p{{0.0}, {0.2}};
  RngStream rng(31);
  EvalCounters c;

  auto grid = std::make_shared<GridMeasure>(std::vector<int>{4}, std::vector<double>{0.5});
  const Ensemble e = map_up(grid, toy, p, c, rng);
  const UpdateResult r = update_slow_shifted_fast(e, toy, SlowProposal{{0.0}, -1},
                                                  std::vector<double>{0.0}, c, rng);
  CHECK(r.accepted);
  CHECK(r.ensemble.fast_members == e.fast_members);

  auto indep = std::make_shared<IndependentMeasure>(
      4, std::make_shared<DiagGaussian>(std::vector<double>{0.0}, std::vector<double>{1.0}));
  const Ensemble ei = map_up(indep, toy, p, c, rng);
  CHECK_THROWS_AS(update_slow_shifted_fast(ei, toy, SlowProposal{{0.0}, -1},
                                           std::vector<double>{0.1}, c, rng),
                  UnsupportedMeasure);
}

TEST_CASE("shift moving every member off support is rejected") {
  TableToy uniform(1, 6, [](int, int f) { return (f >= 2 && f <= 3) ? 0.0 : kNegInf; });
  EvalCounters c;
  std::vector<std::vector<double>> members{{2.0}, {3.0}};
  Ensemble e = assemble_ensemble(uniform, std::vector<double>{0.0}, members,
                                 std::vector<double>{0.0, 0.0}, c,
                                 std::make_shared<GridMeasure>(std::vector<int>{2},
                                                               std::vector<double>{1.0}));
  // forced large shift: hand-roll the proposal via a huge sd and a seed whose
  // first normal is far from zero would be flaky; instead verify the ratio
  const Ensemble off = assemble_ensemble(uniform, std::vector<double>{0.0},
                                         {{40.0}, {41.0}}, std::vector<double>{0.0, 0.0}, c);
  CHECK(ensemble_log_density(off) == kNegInf);
  CHECK(accept_probability(ensemble_log_density(off) - ensemble_log_density(e)) == 0.0);
}

TEST_CASE("ensemble_sweep costs one slow eval per slow coordinate") {
  SeparableGaussianToy toy(3, 1);
  auto grid = std::make_shared<GridMeasure>(std::vector<int>{4}, std::vector<double>{0.5});
  const FastSlowPoint p{{0.1, 0.2, 0.3}, {0.0}};
  RngStream rng(41);
  EvalCounters c;
  Ensemble e = map_up(grid, toy, p, c, rng);
  const std::uint64_t before = c.slow_evals;
  int accepts = 0;
  e = ensemble_sweep(std::move(e), toy, std::vector<double>{0.5, 0.5, 0.5}, c, rng, &accepts);
  CHECK(c.slow_evals == before + 3);
  CHECK(accepts >= 0);
  CHECK(accepts <= 3);
}

TEST_CASE("rho consistency: independent measure vs direct conditional evaluation") {
  // members on the lattice of a 10-state fast table
  PureFastTable table(bumpy_circle(10));
  auto dist = std::make_shared<DiagGaussian>(std::vector<double>{4.5}, std::vector<double>{2.0});
  EvalCounters c;
  const std::vector<std::vector<double>> members{{3.0}, {7.0}, {1.0}, {5.0}};
  const int K = 4;
  std::vector<double> logmarg(K);
  for (int j = 0; j < K; ++j) logmarg[j] = dist->log_density(members[j]);
  const Ensemble e = assemble_ensemble(table, std::span<const double>{}, members, logmarg, c);

  // Eq-style direct evaluation: rho = (1/K) sum_k [prod_{j != k} xi(x_j)] pi(x_k)
  double rho = 0.0;
  for (int k = 0; k < K; ++k) {
    double cond = 1.0;
    for (int j = 0; j < K; ++j)
      if (j != k) cond *= std::exp(dist->log_density(members[j]));
    rho += cond * std::exp(table.log_pi(static_cast<int>(members[k][0])));
  }
  rho /= K;

  double log_joint_xi = 0.0;
  for (int j = 0; j < K; ++j) log_joint_xi += dist->log_density(members[j]);
  CHECK(std::log(rho) ==
        doctest::Approx(ensemble_log_density(e) + log_joint_xi).epsilon(1e-12));
}

TEST_CASE("rho consistency: exchangeable conditionals are anchor-independent") {
  // zeta_{-k|k}(x_{-k} | x_k) = int N(theta; x_k, tau^2) prod_{j!=k} N(x_j; theta, tau^2) dtheta
  const std::vector<double> xs{0.5, 1.2, -0.3};
  const double tau = 0.7;
  const int K = 3;

  auto conditional = [&](int k) {
    const double lo = -12.0, hi = 13.0;
    const int steps = 40000;  // Simpson
    const double h = (hi - lo) / steps;
    double s = 0.0;
    for (int i = 0; i <= steps; ++i) {
      const double theta = lo + i * h;
      double f = normal_pdf(theta, xs[k], tau);
      for (int j = 0; j < K; ++j)
        if (j != k) f *= normal_pdf(xs[j], theta, tau);
      const double wgt = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      s += wgt * f;
    }
    return s * h / 3.0;
  };

  const double z0 = conditional(0);
  for (int k = 1; k < K; ++k) CHECK(conditional(k) == doctest::Approx(z0).epsilon(1e-10));

  // Eq.(7) assembled with those conditionals matches the implementation's
  // ensemble density plus the common conditional factor
  const std::vector<double> logpi{-0.2, -1.1, -0.4};
  const Ensemble e = manual_ensemble({{xs[0]}, {xs[1]}, {xs[2]}}, logpi, {0.0, 0.0, 0.0});
  double rho = 0.0;
  for (int k = 0; k < K; ++k) rho += conditional(k) * std::exp(logpi[k]);
  rho /= K;
  CHECK(std::log(rho) == doctest::Approx(ensemble_log_density(e) + std::log(z0)).epsilon(1e-9));
}

TEST_CASE("rho consistency: chain conditionals are anchor-independent") {
  const std::vector<double> xs{0.0, 0.4, 1.1, 0.9};
  const double step = 0.5;
  const int K = 4;
  // product of increment densities, walking out from anchor k
  auto conditional = [&](int k) {
    double f = 1.0;
    for (int j = k + 1; j < K; ++j) f *= normal_pdf(xs[j], xs[j - 1], step);
    for (int j = k - 1; j >= 0; --j) f *= normal_pdf(xs[j], xs[j + 1], step);
    return f;
  };
  const double z0 = conditional(0);
  for (int k = 1; k < K; ++k) CHECK(conditional(k) == doctest::Approx(z0).epsilon(1e-12));

  const std::vector<double> logpi{-0.5, -0.1, -1.4, -0.9};
  const Ensemble e =
      manual_ensemble({{xs[0]}, {xs[1]}, {xs[2]}, {xs[3]}}, logpi, {0.0, 0.0, 0.0, 0.0});
  double rho = 0.0;
  for (int k = 0; k < K; ++k) rho += conditional(k) * std::exp(logpi[k]);
  rho /= K;
  CHECK(std::log(rho) == doctest::Approx(ensemble_log_density(e) + std::log(z0)).epsilon(1e-12));
}

TEST_CASE("grid ensemble density is invariant to which member is the anchor") {
  TableToy toy = bumpy_toy(6, 20);
  GridMeasure grid({5}, {1.0});
  EvalCounters c;
  const std::vector<double> slow{2.0};

  // anchor at node 1, fast=7 -> members {6,7,8,9,10}; anchor at node 3,
  // fast=9 -> the same member set
  const auto members_a = grid.constellation(std::vector<double>{7.0}, 1, std::vector<double>{1.0});
  const auto members_b = grid.constellation(std::vector<double>{9.0}, 3, std::vector<double>{1.0});
  const Ensemble a =
      assemble_ensemble(toy, slow, members_a, std::vector<double>(5, 0.0), c);
  const Ensemble b =
      assemble_ensemble(toy, slow, members_b, std::vector<double>(5, 0.0), c);

  std::multiset<double> set_a, set_b;
  for (int j = 0; j < 5; ++j) {
    set_a.insert(members_a[j][0]);
    set_b.insert(members_b[j][0]);
  }
  CHECK(set_a == set_b);
  CHECK(ensemble_log_density(a) ==
        doctest::Approx(ensemble_log_density(b)).epsilon(1e-12));
}

TEST_CASE("map_up is deterministic given the stream") {
  SeparableGaussianToy toy(1, 1);
  auto exch = std::make_shared<ExchangeableMeasure>(8, std::vector<double>{0.6});
  const FastSlowPoint p{{0.1}, {0.9}};
  EvalCounters c;
  RngStream r1(77), r2(77);
  const Ensemble a = map_up(exch, toy, p, c, r1);
  const Ensemble b = map_up(exch, toy, p, c, r2);
  CHECK(a.fast_members == b.fast_members);
  CHECK(a.member_logdens == b.member_logdens);
}

TEST_CASE("circle example: round trip preserves pi by enumeration") {
  CircleEnumeration circle(bumpy_circle(40), 9);
  const auto up = circle.up_matrix();
  const auto down = circle.down_matrix();
  const auto t = CircleEnumeration::multiply(up, down);
  CHECK(circle.row_sum_error(t) < 1e-12);
  CHECK(circle.stationarity_error(t) < 1e-12);
}

TEST_CASE("circle example: metropolis acceptance matches the pi-sum ratio") {
  CircleEnumeration circle(bumpy_circle(40), 9);
  for (int a = 0; a < 40; ++a) {
    const Ensemble ea = circle.ensemble_at(a);
    for (int shift : {1, 2, 5, -3}) {
      const int b = ((a + shift) % 40 + 40) % 40;
      const Ensemble eb = circle.ensemble_at(b);
      const double computed =
          accept_probability(ensemble_log_density(eb) - ensemble_log_density(ea));
      const double expected =
          std::min(1.0, (circle.pi[b] + circle.pi[(b + 9) % 40]) /
                            (circle.pi[a] + circle.pi[(a + 9) % 40]));
      CHECK(std::abs(computed - expected) < 1e-13);
    }
  }
}

TEST_CASE("circle example: full kernel with one metropolis update preserves pi") {
  CircleEnumeration circle(bumpy_circle(40), 9);
  const auto up = circle.up_matrix();
  const auto bar = circle.bar_matrix({-3, -2, -1, 1, 2, 3});
  const auto down = circle.down_matrix();
  const auto t = CircleEnumeration::multiply(CircleEnumeration::multiply(up, bar), down);
  CHECK(circle.row_sum_error(t) < 1e-12);
  CHECK(circle.stationarity_error(t) < 1e-12);
}

TEST_CASE("map_up / map_down round trip leaves pi invariant (chi-square)") {
  TableToy toy = bumpy_toy(20, 20);
  const int n_states = 400;

  // exact pi over the joint lattice
  std::vector<double> pi(n_states);
  double z = 0.0;
  for (int s = 0; s < 20; ++s)
    for (int f = 0; f < 20; ++f) z += std::exp(toy.log_pi(s, f));
  for (int s = 0; s < 20; ++s)
    for (int f = 0; f < 20; ++f) pi[s * 20 + f] = std::exp(toy.log_pi(s, f)) / z;
  std::vector<double> cum(n_states);
  std::partial_sum(pi.begin(), pi.end(), cum.begin());

  auto grid = std::make_shared<GridMeasure>(std::vector<int>{4}, std::vector<double>{1.0});
  RngStream rng(2718);
  EvalCounters c;
  std::vector<int> counts(n_states, 0);
  const int trials = 1000000;
  for (int t = 0; t < trials; ++t) {
    const double u = rng.uniform();
    const int idx =
        static_cast<int>(std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
    FastSlowPoint p{{static_cast<double>(idx / 20)}, {static_cast<double>(idx % 20)}};
    const Ensemble e = map_up(grid, toy, p, c, rng);
    auto [q, choice] = map_down(e, rng);
    const int s = static_cast<int>(q.slow[0]);
    const int f = static_cast<int>(q.fast[0]);
    ++counts[s * 20 + f];
  }

  double chi2 = 0.0;
  for (int i = 0; i < n_states; ++i) {
    const double expect = trials * pi[i];
    chi2 += (counts[i] - expect) * (counts[i] - expect) / expect;
  }
  CHECK(chi2 < chi2_quantile(n_states - 1, 0.001));
}
