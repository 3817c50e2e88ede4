#include "easyo/powalloc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "easyo/error.hpp"

namespace easyo {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kResidualTol = 1e-8;
constexpr int kMaxInner = 200;
constexpr int kMaxSweeps = 100;
constexpr double kSweepTol = 1e-8;

double interference(int term, std::span<const double> y, const PowerProblem& prob) {
  double sum = 0.0;
  for (auto [j, g] : prob.terms[term].interferers) sum += g * std::exp(y[j]);
  return sum;
}

double sum_exp(std::span<const double> y) {
  double s = 0.0;
  for (double v : y) s += std::exp(v);
  return s;
}

// Solves y + mu*e^y = z for y. With u = z - y this is u*e^u = mu*e^z, so
// u = W(mu*e^z); start from the lower bound W(x) >= log x - log log x (x > e),
// which keeps Newton on the right of the root where it converges monotonically.
double shrink(double z, double mu) {
  if (mu <= 0.0) return z;
  const double log_x = std::log(mu) + z;
  double y = z;
  if (log_x > 1.0) y = z - (log_x - std::log(log_x));
  for (int i = 0; i < 100; ++i) {
    const double ey = std::exp(y);
    const double step = (y + mu * ey - z) / (1.0 + mu * ey);
    y -= step;
    if (std::abs(step) <= 1e-15 * (1.0 + std::abs(y))) break;
  }
  return y;
}

}  // namespace

double sinr(LinkId link, std::span<const double> power, const SlotState& slot, const Network& net,
            const InterferenceMap& imap) {
  const double p = power[link];
  if (p <= 0.0) return 0.0;
  double denom = net.nodes[net.links[link].rx].noise;
  for (const auto& i : imap.by_link[link]) {
    const double pj = power[i.link];
    if (pj > 0.0) denom += slot.cross_gain(i) * pj;
  }
  return slot.channel[link] * p / denom;
}

double capacity(LinkId link, std::span<const double> power, const SlotState& slot,
                const Network& net, const InterferenceMap& imap) {
  if (power[link] <= 0.0) return kNegInf;
  return std::log(net.links[link].processing_gain * sinr(link, power, slot, net, imap));
}

double effective_capacity(LinkId link, std::span<const double> power, const SlotState& slot,
                          const Network& net, const InterferenceMap& imap, double x_max) {
  const double c = capacity(link, power, slot, net, imap);
  if (!(c > 0.0)) return 0.0;
  return std::min(c, x_max);
}

void PowerProblem::finalize() {
  affects.assign(terms.size(), {});
  for (std::size_t l = 0; l < terms.size(); ++l)
    for (auto [j, g] : terms[l].interferers) affects[j].emplace_back(static_cast<int>(l), g);
}

PowerProblem make_power_problem(const Network& net, const SlotState& slot,
                                const InterferenceMap& imap, std::span<const double> weight,
                                std::span<const double> a) {
  PowerProblem prob;
  std::vector<int> term_of(net.links.size(), -1);
  for (const auto& n : net.nodes) {
    std::vector<LinkId> mine;
    for (LinkId l : net.out_links[n.id])
      if (weight[l] > 0.0) mine.push_back(l);
    if (mine.empty()) continue;
    std::sort(mine.begin(), mine.end());
    PowerProblem::Block block;
    block.node = n.id;
    block.a = a[n.id];
    block.p_max = n.p_max;
    const int block_index = static_cast<int>(prob.blocks.size());
    for (LinkId l : mine) {
      PowerProblem::Term t;
      t.link = l;
      t.block = block_index;
      t.weight = weight[l];
      t.gain = slot.channel[l];
      t.noise = net.nodes[net.links[l].rx].noise;
      t.log_k = std::log(net.links[l].processing_gain);
      term_of[l] = static_cast<int>(prob.terms.size());
      block.terms.push_back(term_of[l]);
      prob.terms.push_back(std::move(t));
    }
    prob.blocks.push_back(std::move(block));
  }
  for (auto& t : prob.terms) {
    for (const auto& i : imap.by_link[t.link]) {
      const int j = term_of[i.link];
      if (j >= 0) t.interferers.emplace_back(j, slot.cross_gain(i));
    }
  }
  prob.finalize();
  return prob;
}

double psi(int term, std::span<const double> y, const PowerProblem& prob) {
  const auto& t = prob.terms[term];
  return std::log(t.gain) + y[term] - std::log(t.noise + interference(term, y, prob));
}

double objective_log(std::span<const double> y, const PowerProblem& prob) {
  double f = 0.0;
  for (std::size_t k = 0; k < prob.terms.size(); ++k) {
    const auto& t = prob.terms[k];
    f += t.weight * (t.log_k + psi(static_cast<int>(k), y, prob));
    f += prob.blocks[t.block].a * std::exp(y[k]);
  }
  return f;
}

double objective_G(std::span<const double> p, const PowerProblem& prob) {
  double f = 0.0;
  for (std::size_t k = 0; k < prob.terms.size(); ++k) {
    const auto& t = prob.terms[k];
    f += prob.blocks[t.block].a * p[k];
    if (t.weight == 0.0) continue;
    if (p[k] <= 0.0) return kNegInf;
    double denom = t.noise;
    for (auto [j, g] : t.interferers) denom += g * p[j];
    f += t.weight * std::log(std::exp(t.log_k) * t.gain * p[k] / denom);
  }
  return f;
}

std::vector<double> psi_gradient(int block, std::span<const double> y, const PowerProblem& prob) {
  const auto& b = prob.blocks[block];
  std::vector<double> grad;
  grad.reserve(b.terms.size());
  for (int k : b.terms) {
    const double ek = std::exp(y[k]);
    double g = prob.terms[k].weight + b.a * ek;
    for (auto [l, gain] : prob.affects[k]) {
      const auto& tl = prob.terms[l];
      g -= tl.weight * gain * ek / (tl.noise + interference(l, y, prob));
    }
    grad.push_back(g);
  }
  return grad;
}

std::vector<double> project_block(std::span<const double> z, double p_max, double floor) {
  std::vector<double> y(z.begin(), z.end());
  for (double& v : y) v = std::max(v, floor);
  if (sum_exp(y) <= p_max) return y;
  if (y.size() == 1) {
    y[0] = std::max(floor, std::log(p_max));
    return y;
  }

  auto at = [&](double mu) {
    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = std::max(floor, shrink(z[i], mu));
    return out;
  };
  // Bracket mu so that sum e^y(mu) <= p_max, then bisect in log(mu).
  double lo = 0.0;
  double hi = 1.0;
  while (sum_exp(at(hi)) > p_max) {
    lo = hi;
    hi *= 4.0;
    if (hi > 1e300) break;
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = lo == 0.0 ? hi / 2.0 : std::sqrt(lo * hi);
    if (sum_exp(at(mid)) > p_max)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-15 * hi) break;
  }
  y = at(hi);
  // Guard against rounding leaving the sum a hair above the budget.
  const double s = sum_exp(y);
  if (s > p_max) {
    const double shift = std::log(p_max / s);
    for (double& v : y) v = std::max(floor, v + shift);
  }
  return y;
}

namespace {

// One block's subproblem with the other blocks frozen. Up to a constant it is
//   sum_k W_k y_k + (a - mu) sum_k e^{y_k} - sum_l W_l log(D0_l + sum_k c_lk e^{y_k})
// over floor <= y <= log(p_max), where l runs over the foreign terms the block
// interferes with and D0_l is their noise plus frozen interference.
struct LocalProblem {
  std::vector<double> weight;                     // W_k, own terms
  double a = 0.0;
  double upper = 0.0;
  double floor = kLogPowerFloor;
  struct Foreign {
    double weight = 0.0;
    double base = 0.0;                            // D0_l
    std::vector<std::pair<int, double>> coeff;    // (local index, c_lk)
  };
  std::vector<Foreign> foreign;

  std::size_t size() const { return weight.size(); }

  double value(const std::vector<double>& y, double mu) const {
    double f = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) f += weight[k] * y[k] + (a - mu) * std::exp(y[k]);
    for (const auto& l : foreign) {
      double d = l.base;
      for (auto [k, c] : l.coeff) d += c * std::exp(y[k]);
      f -= l.weight * std::log(d);
    }
    return f;
  }

  // Gradient and (negated) Hessian, row-major m x m.
  void derivatives(const std::vector<double>& y, double mu, std::vector<double>& grad,
                   std::vector<double>& neg_hess) const {
    const std::size_t m = y.size();
    grad.assign(m, 0.0);
    neg_hess.assign(m * m, 0.0);
    std::vector<double> e(m);
    for (std::size_t k = 0; k < m; ++k) {
      e[k] = std::exp(y[k]);
      grad[k] = weight[k] + (a - mu) * e[k];
      neg_hess[k * m + k] = -(a - mu) * e[k];
    }
    for (const auto& l : foreign) {
      double d = l.base;
      for (auto [k, c] : l.coeff) d += c * e[k];
      for (auto [k, c] : l.coeff) {
        const double s = c * e[k] / d;
        grad[k] -= l.weight * s;
        neg_hess[k * m + k] += l.weight * s;
        for (auto [j, cj] : l.coeff) neg_hess[k * m + j] -= l.weight * s * cj * e[j] / d;
      }
    }
  }
};

// Solves M d = g in place for symmetric positive definite M; false if M is not.
bool cholesky_solve(std::vector<double>& mat, std::vector<double>& rhs, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double diag = mat[j * n + j];
    for (std::size_t k = 0; k < j; ++k) diag -= mat[j * n + k] * mat[j * n + k];
    if (!(diag > 0.0)) return false;
    diag = std::sqrt(diag);
    mat[j * n + j] = diag;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = mat[i * n + j];
      for (std::size_t k = 0; k < j; ++k) v -= mat[i * n + k] * mat[j * n + k];
      mat[i * n + j] = v / diag;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double v = rhs[i];
    for (std::size_t k = 0; k < i; ++k) v -= mat[i * n + k] * rhs[k];
    rhs[i] = v / mat[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    double v = rhs[i];
    for (std::size_t k = i + 1; k < n; ++k) v -= mat[k * n + i] * rhs[k];
    rhs[i] = v / mat[i * n + i];
  }
  return true;
}

// Projected Newton for max value(y, mu) over the box. Returns iterations used.
int solve_box(const LocalProblem& lp, double mu, std::vector<double>& y, int budget) {
  const std::size_t m = lp.size();
  std::vector<double> grad, neg_hess, trial(m);
  double f = lp.value(y, mu);
  int it = 0;
  for (; it < budget; ++it) {
    lp.derivatives(y, mu, grad, neg_hess);
    std::vector<std::size_t> free;
    double residual = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const bool at_floor = y[k] <= lp.floor && grad[k] <= 0.0;
      const bool at_top = y[k] >= lp.upper && grad[k] >= 0.0;
      if (!at_floor && !at_top) free.push_back(k);
      residual = std::max(residual, std::abs(std::clamp(y[k] + grad[k], lp.floor, lp.upper) - y[k]));
    }
    if (residual <= 1e-12 || free.empty()) break;

    const std::size_t n = free.size();
    std::vector<double> mat(n * n), dir(n);
    for (std::size_t i = 0; i < n; ++i) {
      dir[i] = grad[free[i]];
      for (std::size_t j = 0; j < n; ++j) mat[i * n + j] = neg_hess[free[i] * m + free[j]];
    }
    if (!cholesky_solve(mat, dir, n)) {
      // Flat direction (a - mu = 0 and no interference): a gradient step to the box.
      for (std::size_t i = 0; i < n; ++i) dir[i] = grad[free[i]] * (lp.upper - lp.floor);
    }

    double step = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      trial = y;
      for (std::size_t i = 0; i < n; ++i)
        trial[free[i]] = std::clamp(y[free[i]] + step * dir[i], lp.floor, lp.upper);
      double ascent = 0.0;
      for (std::size_t k = 0; k < m; ++k) ascent += grad[k] * (trial[k] - y[k]);
      const double f_trial = lp.value(trial, mu);
      // The second test accepts steps whose gain is below the rounding of f.
      if (f_trial >= f + 1e-4 * ascent ||
          (ascent <= 1e-13 * (1.0 + std::abs(f)) && f_trial >= f - 1e-13 * (1.0 + std::abs(f)))) {
        moved = trial != y;
        y = trial;
        f = f_trial;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return it;
}

double block_residual(int block_index, const std::vector<double>& y, const PowerProblem& prob) {
  const auto& block = prob.blocks[block_index];
  const auto grad = psi_gradient(block_index, y, prob);
  std::vector<double> probe(block.terms.size());
  for (std::size_t i = 0; i < probe.size(); ++i) probe[i] = y[block.terms[i]] + grad[i];
  const auto unit = project_block(probe, block.p_max);
  double residual = 0.0;
  for (std::size_t i = 0; i < probe.size(); ++i)
    residual = std::max(residual, std::abs(unit[i] - y[block.terms[i]]));
  return residual;
}

}  // namespace

BlockResult block_update(int block_index, std::vector<double>& y, const PowerProblem& prob) {
  const auto& block = prob.blocks[block_index];
  const std::size_t m = block.terms.size();

  LocalProblem lp;
  lp.a = block.a;
  lp.upper = std::log(block.p_max);
  lp.floor = std::min(kLogPowerFloor, lp.upper);
  std::vector<int> local(prob.terms.size(), -1);
  for (std::size_t i = 0; i < m; ++i) {
    local[block.terms[i]] = static_cast<int>(i);
    lp.weight.push_back(prob.terms[block.terms[i]].weight);
  }
  std::vector<int> foreign_of(prob.terms.size(), -1);
  for (std::size_t i = 0; i < m; ++i) {
    for (auto [l, g] : prob.affects[block.terms[i]]) {
      if (foreign_of[l] < 0) {
        foreign_of[l] = static_cast<int>(lp.foreign.size());
        LocalProblem::Foreign fr;
        fr.weight = prob.terms[l].weight;
        fr.base = prob.terms[l].noise;
        for (auto [j, gj] : prob.terms[l].interferers)
          if (local[j] < 0) fr.base += gj * std::exp(y[j]);
        lp.foreign.push_back(std::move(fr));
      }
      lp.foreign[foreign_of[l]].coeff.emplace_back(static_cast<int>(i), g);
    }
  }

  std::vector<double> x(m);
  for (std::size_t i = 0; i < m; ++i) x[i] = std::clamp(y[block.terms[i]], lp.floor, lp.upper);
  auto sum_exp_local = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double t : v) s += std::exp(t);
    return s;
  };
  if (sum_exp_local(x) > block.p_max) {
    x = project_block(x, block.p_max, lp.floor);
  }

  BlockResult result;
  int budget = kMaxInner;
  std::vector<double> unconstrained = x;
  budget -= solve_box(lp, 0.0, unconstrained, budget);

  if (sum_exp_local(unconstrained) <= block.p_max) {
    x = unconstrained;
  } else {
    // Budget binds: find the multiplier mu > 0 with sum e^y(mu) = p_max.
    // At the optimum mu e^{y_k} <= W_k for free k, and some e^{y_k} >= p_max/m.
    double max_w = 0.0;
    for (double w : lp.weight) max_w = std::max(max_w, w);
    double lo = 0.0;
    double hi = 2.0 * static_cast<double>(m) * std::max(max_w, 1e-300) / block.p_max;
    std::vector<double> at_hi = unconstrained;
    solve_box(lp, hi, at_hi, kMaxInner);
    while (sum_exp_local(at_hi) > block.p_max && hi < 1e300) {
      lo = hi;
      hi *= 4.0;
      solve_box(lp, hi, at_hi, kMaxInner);
    }
    std::vector<double> probe = at_hi;
    for (int i = 0; i < 200 && budget > 0; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (!(mid > lo && mid < hi)) break;
      budget -= std::max(1, solve_box(lp, mid, probe, kMaxInner));
      if (sum_exp_local(probe) > block.p_max) {
        lo = mid;
      } else {
        hi = mid;
        at_hi = probe;
      }
      if (hi - lo <= 1e-15 * hi) break;
    }
    x = at_hi;
  }

  for (std::size_t i = 0; i < m; ++i) y[block.terms[i]] = x[i];
  result.iterations = kMaxInner - std::max(budget, 0);
  result.residual = block_residual(block_index, y, prob);
  result.converged = result.residual <= kResidualTol;
  return result;
}

BcdResult bcd_solve(const PowerProblem& prob) {
  BcdResult out;
  if (prob.terms.empty()) return out;

  std::vector<double> y(prob.terms.size());
  for (const auto& b : prob.blocks)
    for (int k : b.terms) y[k] = std::log(b.p_max / (2.0 * static_cast<double>(b.terms.size())));

  double f = objective_log(y, prob);
  out.report.objective.push_back(f);
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double worst = 0.0;
    bool all_converged = true;
    for (std::size_t b = 0; b < prob.blocks.size(); ++b) {
      const BlockResult r = block_update(static_cast<int>(b), y, prob);
      worst = std::max(worst, r.residual);
      if (!r.converged) {
        all_converged = false;
        ++out.report.block_failures;
      }
    }
    const double f_next = objective_log(y, prob);
    out.report.objective.push_back(f_next);
    out.report.iterations = sweep + 1;
    out.report.residual = worst;
    const bool small = f_next - f < kSweepTol * (1.0 + std::abs(f_next));
    f = f_next;
    if (small) {
      out.report.converged = all_converged;
      break;
    }
    if (sweep + 1 == kMaxSweeps) out.report.converged = false;
  }

  out.log_power = y;
  out.power.resize(y.size());
  for (std::size_t k = 0; k < y.size(); ++k)
    out.power[k] = y[k] <= kLogPowerFloor + 1e-12 ? 0.0 : std::exp(y[k]);
  for (const auto& b : prob.blocks) {
    double total = 0.0;
    for (int k : b.terms) total += out.power[k];
    if (total > b.p_max + 1e-9)
      throw InternalError("power budget exceeded at node " + std::to_string(b.node) + " after solve");
  }
  return out;
}

}  // namespace easyo
