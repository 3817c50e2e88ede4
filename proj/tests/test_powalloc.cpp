#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "easyo/powalloc.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace easyo;

namespace {

PowerProblem single(double weight, double a, double p_max, double gain = 1.0, double noise = 1.0) {
  PowerProblem prob;
  PowerProblem::Term t;
  t.weight = weight;
  t.gain = gain;
  t.noise = noise;
  t.log_k = std::log(100.0);
  prob.terms.push_back(t);
  prob.blocks.push_back({0, a, p_max, {0}});
  prob.finalize();
  return prob;
}

double sum_exp(const std::vector<double>& y) {
  double s = 0.0;
  for (double v : y) s += std::exp(v);
  return s;
}

}  // namespace

TEST_SUITE("powalloc") {

TEST_CASE("psi values") {
  PowerProblem prob = single(1.0, -1.0, 2.0);
  const std::vector<double> zero{0.0};
  CHECK(psi(0, zero, prob) == doctest::Approx(0.0));

  // Second term interferes with the first at unit gain.
  PowerProblem two;
  PowerProblem::Term t;
  t.weight = 1.0;
  t.gain = 1.0;
  t.noise = 1.0;
  two.terms = {t, t};
  two.terms[0].interferers = {{1, 1.0}};
  two.blocks = {{0, -1.0, 2.0, {0}}, {1, -1.0, 2.0, {1}}};
  two.finalize();
  const std::vector<double> y{1.0, 0.0};
  CHECK(psi(0, y, two) == doctest::Approx(1.0 - std::log(2.0)));
}

TEST_CASE("psi is scale invariant without noise") {
  std::mt19937_64 gen(4);
  auto prob = testing::random_power_problem(gen, {1, 1, 1});
  for (auto& t : prob.terms) t.noise = 1e-300;
  std::vector<double> y{0.1, -0.3, 0.5};
  std::vector<double> shifted = y;
  for (double& v : shifted) v += 2.5;
  for (int k = 0; k < 3; ++k) CHECK(psi(k, y, prob) == doctest::Approx(psi(k, shifted, prob)).epsilon(1e-12));
}

TEST_CASE("capacity of a committed allocation") {
  auto tc = testing::two_nodes();
  const Network net = build_topology(tc);
  const auto imap = build_interference(net);
  SlotState slot;
  slot.channel = {0.5 * 5e-13};   // S/N0 = 0.5
  std::vector<double> p{1.0};
  CHECK(sinr(0, p, slot, net, imap) == doctest::Approx(0.5));
  CHECK(capacity(0, p, slot, net, imap) == doctest::Approx(std::log(50.0)));
  CHECK(effective_capacity(0, p, slot, net, imap, 2.0) == 2.0);
  p = {0.0};
  CHECK(capacity(0, p, slot, net, imap) == -std::numeric_limits<double>::infinity());
  CHECK(effective_capacity(0, p, slot, net, imap, 2.0) == 0.0);
  p = {0.015};  // K*sinr = 0.75: negative raw capacity
  CHECK(capacity(0, p, slot, net, imap) < 0.0);
  CHECK(effective_capacity(0, p, slot, net, imap, 2.0) == 0.0);
  double prev = -1e300;
  for (double q = 0.01; q < 2.0; q += 0.01) {
    p = {q};
    const double c = capacity(0, p, slot, net, imap);
    CHECK(c > prev);
    prev = c;
  }
}

TEST_CASE("objective in linear power") {
  const auto prob = single(2.0, -1.0, 2.0, 0.5, 1.0);
  const std::vector<double> p{1.0};
  CHECK(objective_G(p, prob) == doctest::Approx(2.0 * std::log(50.0) - 1.0));
  CHECK(objective_G(p, prob) == doctest::Approx(6.824).epsilon(1e-4));
  const std::vector<double> y{0.0};
  CHECK(objective_log(y, prob) == doctest::Approx(objective_G(p, prob)));
  CHECK(oracle::power_objective(prob, p) == doctest::Approx(objective_G(p, prob)));
}

TEST_CASE("gradient matches finite differences") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(-3.0, 0.5);
  const std::vector<std::vector<int>> layouts{{1}, {2}, {1, 1}, {2, 1}, {1, 2, 1}};
  for (int i = 0; i < 60; ++i) {
    const auto prob = testing::random_power_problem(gen, layouts[i % layouts.size()]);
    std::vector<double> y(prob.size());
    for (double& v : y) v = u(gen);
    for (std::size_t b = 0; b < prob.blocks.size(); ++b) {
      const auto grad = psi_gradient(static_cast<int>(b), y, prob);
      for (std::size_t i2 = 0; i2 < grad.size(); ++i2) {
        const int k = prob.blocks[b].terms[i2];
        const double h = 1e-5;
        auto yp = y, ym = y;
        yp[k] += h;
        ym[k] -= h;
        const double fd = (objective_log(yp, prob) - objective_log(ym, prob)) / (2 * h);
        CHECK(std::abs(grad[i2] - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
      }
    }
  }
}

TEST_CASE("isolated link gradient") {
  const auto prob = single(3.0, -2.0, 2.0);
  const std::vector<double> y{std::log(0.5)};
  CHECK(psi_gradient(0, y, prob)[0] == doctest::Approx(3.0 - 2.0 * 0.5));
  const auto idle = single(0.0, -2.0, 2.0);
  CHECK(psi_gradient(0, y, idle)[0] < 0.0);
}

TEST_CASE("projection onto the block budget") {
  std::vector<double> z{std::log(0.3), std::log(0.4)};
  auto y = project_block(z, 2.0);
  CHECK(y == z);

  z = {std::log(3.0), std::log(1.0), -30.0};
  y = project_block(z, 2.0);
  CHECK(sum_exp(y) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(y[2] >= kLogPowerFloor);
  // KKT: z - y = mu e^y on the components above the floor, for one mu >= 0.
  const double mu0 = (z[0] - y[0]) / std::exp(y[0]);
  const double mu1 = (z[1] - y[1]) / std::exp(y[1]);
  CHECK(mu0 > 0.0);
  CHECK(mu0 == doctest::Approx(mu1).epsilon(1e-9));

  y = project_block(std::vector<double>{5.0}, 2.0);
  CHECK(y[0] == doctest::Approx(std::log(2.0)));
}

TEST_CASE("single link optimum is min(W / -A, P_max)") {
  for (auto [w, a, pm] : {std::tuple{1.0, -2.0, 2.0}, std::tuple{10.0, -2.0, 2.0}, std::tuple{0.3, -0.1, 1.0},
                          std::tuple{5.0, -20.0, 3.0}}) {
    const auto prob = single(w, a, pm);
    const auto r = bcd_solve(prob);
    CHECK(r.power[0] == doctest::Approx(std::min(w / -a, pm)).epsilon(1e-9));
    CHECK(r.report.converged);
    std::vector<double> y{0.0};
    const auto br = block_update(0, y, prob);
    CHECK(std::exp(y[0]) == doctest::Approx(std::min(w / -a, pm)).epsilon(1e-9));
    CHECK(br.converged);
  }
}

TEST_CASE("symmetric links get equal power") {
  PowerProblem prob;
  PowerProblem::Term t;
  t.weight = 2.0;
  t.gain = 1.0;
  t.noise = 1.0;
  prob.terms = {t, t};
  prob.terms[1].link = 1;
  prob.blocks = {{0, -0.5, 2.0, {0, 1}}};
  prob.finalize();
  const auto r = bcd_solve(prob);
  CHECK(r.power[0] == doctest::Approx(r.power[1]));
  CHECK(r.power[0] + r.power[1] == doctest::Approx(2.0));  // W/-A = 4 each, budget binds
}

TEST_CASE("empty problem") {
  const auto r = bcd_solve(PowerProblem{});
  CHECK(r.power.empty());
  CHECK(r.report.iterations == 0);
  CHECK(r.report.converged);

  // make_power_problem leaves out every link with zero weight.
  const Network net = build_topology(testing::line(3));
  const auto imap = build_interference(net);
  SlotState slot;
  slot.channel.assign(net.links.size(), 1e-10);
  const std::vector<double> w(net.links.size(), 0.0), a(net.nodes.size(), -1.0);
  CHECK(make_power_problem(net, slot, imap, w, a).size() == 0);
}

TEST_CASE("BCD ascends monotonically, respects budgets and matches the grid oracle") {
  std::mt19937_64 gen(2024);
  const std::vector<std::vector<int>> layouts{{1, 1}, {2}, {1, 1}, {2, 1}};
  for (int i = 0; i < 12; ++i) {
    const auto& layout = layouts[i % layouts.size()];
    const auto prob = testing::random_power_problem(gen, layout);
    const auto r = bcd_solve(prob);
    CHECK(r.report.converged);
    for (std::size_t s = 1; s < r.report.objective.size(); ++s)
      CHECK(r.report.objective[s] >= r.report.objective[s - 1] - 1e-12 * (1.0 + std::abs(r.report.objective[s - 1])));
    for (const auto& b : prob.blocks) {
      double total = 0.0;
      for (int k : b.terms) total += r.power[k];
      CHECK(total <= b.p_max * (1.0 + 1e-12));
    }
    if (prob.size() <= 2) {
      const auto best = oracle::grid_power_oracle(prob, 300);
      const double got = oracle::power_objective(prob, r.power);
      CHECK(got >= best.objective - 1e-4 * std::max(1.0, std::abs(best.objective)));
    }
  }
}

}  // TEST_SUITE
