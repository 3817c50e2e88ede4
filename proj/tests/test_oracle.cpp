#include <doctest.h>

#include <cmath>
#include <random>

#include "oracle.hpp"
#include "support.hpp"

using namespace easyo;

TEST_SUITE("oracle") {

TEST_CASE("rate oracle") {
  CHECK(oracle::grid_rate_oracle(0.0, 0.0, 1000.0, 0.6, 0.1, 3.0) == 3.0);
  CHECK(oracle::grid_rate_oracle(10.0, 0.0, 0.0, 0.6, 0.1, 3.0) == 0.0);
  // Interior optimum at V w1 / price - 1 = 1.
  CHECK(oracle::grid_rate_oracle(300.0, 0.0, 1000.0, 0.6, 0.1, 3.0) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("energy LP oracle") {
  auto r = oracle::lp_energy_oracle(10.0, 10.0, 1.0, 2.0, 2.0, SupplyClass::ME);
  CHECK(r.e == 0.0);
  CHECK(r.g == 0.0);
  r = oracle::lp_energy_oracle(4.0, 10.0, 1.0, 2.0, 2.0, SupplyClass::ME);
  CHECK(r.e == 2.0);
  CHECK(r.g == 2.0);
  r = oracle::lp_energy_oracle(4.0, 10.0, 1.0, 2.0, 2.0, SupplyClass::EH);
  CHECK(r.e == 2.0);
  CHECK(r.g == 0.0);
  r = oracle::lp_energy_oracle(9.5, 10.0, 0.0, 2.0, 2.0, SupplyClass::ME);
  CHECK(r.e == 0.5);  // ties favour harvesting
  CHECK(r.g == 0.0);
}

TEST_CASE("grid power oracle") {
  std::mt19937_64 gen(8);
  const auto one = testing::random_power_problem(gen, {1});
  const auto best = oracle::grid_power_oracle(one, 200);
  const double w = one.terms[0].weight, a = one.blocks[0].a;
  const double p = std::min(w / -a, one.blocks[0].p_max);
  CHECK(best.power[0] == doctest::Approx(p).epsilon(1e-6));

  auto two = testing::random_power_problem(gen, {2});
  two.terms[1].weight = two.terms[0].weight;
  two.terms[1].gain = two.terms[0].gain;
  const auto sym = oracle::grid_power_oracle(two, 200);
  CHECK(sym.power[0] == doctest::Approx(sym.power[1]).epsilon(1e-6));

  const auto four = testing::random_power_problem(gen, {1, 1, 1, 1});
  CHECK_THROWS_AS(oracle::grid_power_oracle(four), std::invalid_argument);
  CHECK(oracle::grid_power_oracle(PowerProblem{}).power.empty());
}

TEST_CASE("drift oracle on a hand-computed slot") {
  Network net = build_topology(testing::two_nodes());
  Params p;
  p.V = 100.0;
  bound_constants(net, p);
  const double th0 = net.nodes[0].battery_capacity, th1 = net.nodes[1].battery_capacity;
  auto before = QueueState::initial(net, 50.0);
  before.backlog[0][0] = 30.0;
  Decision d = Decision::zero(net);
  d.rate[0] = 1.0;
  d.power[0] = 1.0;
  d.routed[0][0] = 2.0;
  d.harvest[0] = 0.5;
  SlotState slot;
  slot.price_state = {0.5, 0.5};
  auto after = before;
  after.backlog[0][0] = 29.0;
  after.energy[0] = 50.0 + 0.5 - 0.1 - 1.0;
  after.energy[1] = 50.0 - 0.1;
  const auto o = oracle::drift_term_oracle(before, after, d, slot, net, p);
  CHECK(o.queue_term == doctest::Approx(30.0 * (1.0 - 2.0)));
  CHECK(o.energy_term == doctest::Approx((50.0 - th0) * (0.5 - 1.1) + (50.0 - th1) * (-0.1)));
  CHECK(o.penalty == doctest::Approx(100.0 * 0.6 * std::log(2.0)));
  const double l0 = 0.5 * 900.0 + 0.5 * (50.0 - th0) * (50.0 - th0) + 0.5 * (50.0 - th1) * (50.0 - th1);
  const double l1 = 0.5 * 841.0 + 0.5 * (49.4 - th0) * (49.4 - th0) + 0.5 * (49.9 - th1) * (49.9 - th1);
  CHECK(o.drift == doctest::Approx(l1 - l0));
  CHECK(o.lhs <= o.rhs);
}

}  // TEST_SUITE
