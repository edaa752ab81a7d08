#include "netzero/offset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "netzero/error.hpp"
#include "netzero/forecast.hpp"
#include "netzero/text.hpp"

namespace netzero {

namespace {

constexpr std::int64_t kPpm = 1'000'000;
__extension__ using Wide = __int128;

std::int64_t share_ppm(double share) { return std::llround(share * static_cast<double>(kPpm)); }

struct Var {
  std::size_t project;  // index into instance.projects
  std::int64_t unit_cost;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

std::vector<Var> enabled_vars(const OffsetInstance& inst) {
  std::vector<Var> vars;
  for (std::size_t i = 0; i < inst.projects.size(); ++i) {
    const auto& p = inst.projects[i];
    if (p.enabled) vars.push_back({i, p.unit_cost / inst.granularity});
  }
  return vars;
}

OffsetPlan make_plan(const OffsetInstance& inst, const std::vector<Var>& vars, const std::vector<std::int64_t>& x) {
  OffsetPlan plan;
  plan.mode = inst.mode;
  plan.feasible = true;
  for (const auto& p : inst.projects) plan.allocations.push_back({p.name, 0, 0});
  for (std::size_t k = 0; k < vars.size(); ++k) {
    auto& a = plan.allocations[vars[k].project];
    a.units = x[k];
    a.cost = x[k] * vars[k].unit_cost;
    plan.total_units += a.units;
    plan.total_cost += a.cost;
  }
  plan.total_offset = static_cast<double>(plan.total_units) / static_cast<double>(inst.granularity);
  return plan;
}

OffsetPlan infeasible(const OffsetInstance& inst, std::vector<std::string> violations) {
  OffsetPlan plan;
  plan.mode = inst.mode;
  plan.feasible = false;
  for (const auto& p : inst.projects) plan.allocations.push_back({p.name, 0, 0});
  plan.violations = std::move(violations);
  return plan;
}

std::int64_t shares_sum_ppm(const OffsetInstance& inst) {
  std::int64_t sum = 0;
  for (const auto& p : inst.projects) {
    if (p.enabled) sum += share_ppm(p.min_share);
  }
  return sum;
}

bool prefix_greater(const std::vector<std::int64_t>& x, const std::vector<std::int64_t>& best, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) {
    if (x[i] != best[i]) return x[i] > best[i];
  }
  return false;
}

class MaxOffsetSearch {
 public:
  MaxOffsetSearch(std::vector<Var> vars, std::int64_t budget) : vars_(std::move(vars)), budget_(budget) {
    const std::size_t n = vars_.size();
    floor_units_suffix_.assign(n + 1, 0);
    floor_cost_suffix_.assign(n + 1, 0);
    for (std::size_t k = n; k-- > 0;) {
      floor_units_suffix_[k] = floor_units_suffix_[k + 1] + vars_[k].lo;
      floor_cost_suffix_[k] = floor_cost_suffix_[k + 1] + vars_[k].lo * vars_[k].unit_cost;
    }
    by_cost_.resize(n);
    std::iota(by_cost_.begin(), by_cost_.end(), 0);
    std::stable_sort(by_cost_.begin(), by_cost_.end(),
                     [&](std::size_t a, std::size_t b) { return vars_[a].unit_cost < vars_[b].unit_cost; });
    x_.assign(n, 0);
  }

  std::vector<std::int64_t> run() {
    seed_greedy();
    dfs(0, 0, 0);
    return best_x_;
  }

  std::uint64_t nodes() const { return nodes_; }

 private:
  void seed_greedy() {
    best_x_.assign(vars_.size(), 0);
    std::int64_t left = budget_ - floor_cost_suffix_[0];
    for (std::size_t k = 0; k < vars_.size(); ++k) best_x_[k] = vars_[k].lo;
    for (auto k : by_cost_) {
      const auto extra = std::min(vars_[k].hi - vars_[k].lo, left / vars_[k].unit_cost);
      best_x_[k] += extra;
      left -= extra * vars_[k].unit_cost;
    }
    best_units_ = 0;
    best_cost_ = 0;
    for (std::size_t k = 0; k < vars_.size(); ++k) {
      best_units_ += best_x_[k];
      best_cost_ += best_x_[k] * vars_[k].unit_cost;
    }
  }

  // Integer part of the LP bound on units obtainable from vars k.. with the
  // remaining money, floors included.
  std::int64_t units_bound(std::size_t k, std::int64_t money) const {
    std::int64_t units = floor_units_suffix_[k];
    for (auto j : by_cost_) {
      if (j < k) continue;
      const auto cap = vars_[j].hi - vars_[j].lo;
      const auto take = std::min(cap, money / vars_[j].unit_cost);
      units += take;
      money -= take * vars_[j].unit_cost;
      if (take < cap) break;
    }
    return units;
  }

  // Cheapest spend beyond the floors that adds `need` units from vars k..
  std::int64_t extra_cost(std::size_t k, std::int64_t need) const {
    std::int64_t cost = 0;
    for (auto j : by_cost_) {
      if (need <= 0) break;
      if (j < k) continue;
      const auto take = std::min(vars_[j].hi - vars_[j].lo, need);
      cost += take * vars_[j].unit_cost;
      need -= take;
    }
    return cost;
  }

  void dfs(std::size_t k, std::int64_t units, std::int64_t cost) {
    ++nodes_;
    if (k == vars_.size()) {
      const bool better = units > best_units_ || (units == best_units_ && cost < best_cost_) ||
                          (units == best_units_ && cost == best_cost_ && x_ < best_x_);
      if (better) {
        best_units_ = units;
        best_cost_ = cost;
        best_x_ = x_;
      }
      return;
    }
    const auto money = budget_ - cost - floor_cost_suffix_[k];
    const auto bound = units + units_bound(k, money);
    if (bound < best_units_) return;
    if (bound == best_units_) {
      const auto lower = cost + floor_cost_suffix_[k] + extra_cost(k, best_units_ - units - floor_units_suffix_[k]);
      if (lower > best_cost_) return;
      if (lower == best_cost_ && prefix_greater(x_, best_x_, k)) return;
    }
    const auto& v = vars_[k];
    const auto top = std::min(v.hi, v.lo + money / v.unit_cost);
    for (auto xi = v.lo; xi <= top; ++xi) {
      x_[k] = xi;
      dfs(k + 1, units + xi, cost + xi * v.unit_cost);
    }
    x_[k] = 0;
  }

  std::vector<Var> vars_;
  std::int64_t budget_;
  std::vector<std::int64_t> floor_units_suffix_, floor_cost_suffix_;
  std::vector<std::size_t> by_cost_;
  std::vector<std::int64_t> x_, best_x_;
  std::int64_t best_units_ = 0, best_cost_ = 0;
  std::uint64_t nodes_ = 0;
};

class MinCostSearch {
 public:
  MinCostSearch(std::vector<Var> vars, std::int64_t target) : vars_(std::move(vars)), target_(target) {
    const std::size_t n = vars_.size();
    cheapest_suffix_.assign(n + 1, 0);
    for (std::size_t k = n; k-- > 0;) {
      cheapest_suffix_[k] = k + 1 == n ? vars_[k].unit_cost : std::min(vars_[k].unit_cost, cheapest_suffix_[k + 1]);
    }
    x_.assign(n, 0);
  }

  std::vector<std::int64_t> run() {
    best_x_.assign(vars_.size(), 0);
    std::size_t cheapest = 0;
    for (std::size_t k = 1; k < vars_.size(); ++k) {
      if (vars_[k].unit_cost < vars_[cheapest].unit_cost) cheapest = k;
    }
    best_x_[cheapest] = target_;
    best_cost_ = target_ * vars_[cheapest].unit_cost;
    dfs(0, 0, 0);
    return best_x_;
  }

  std::uint64_t nodes() const { return nodes_; }

 private:
  void dfs(std::size_t k, std::int64_t units, std::int64_t cost) {
    ++nodes_;
    const auto need = std::max<std::int64_t>(0, target_ - units);
    if (k == vars_.size()) {
      if (need > 0) return;
      if (cost < best_cost_ || (cost == best_cost_ && x_ < best_x_)) {
        best_cost_ = cost;
        best_x_ = x_;
      }
      return;
    }
    const auto lower = cost + need * cheapest_suffix_[k];
    if (lower > best_cost_) return;
    if (lower == best_cost_ && prefix_greater(x_, best_x_, k)) return;
    for (std::int64_t xi = 0; xi <= need; ++xi) {
      x_[k] = xi;
      dfs(k + 1, units + xi, cost + xi * vars_[k].unit_cost);
    }
    x_[k] = 0;
  }

  std::vector<Var> vars_;
  std::int64_t target_;
  std::vector<std::int64_t> cheapest_suffix_;
  std::vector<std::int64_t> x_, best_x_;
  std::int64_t best_cost_ = 0;
  std::uint64_t nodes_ = 0;
};

}  // namespace

const char* to_string(OffsetMode m) { return m == OffsetMode::max_offset ? "max_offset" : "min_cost"; }

OffsetMode parse_offset_mode(std::string_view s) {
  if (s == "max_offset" || s == "max") return OffsetMode::max_offset;
  if (s == "min_cost" || s == "min") return OffsetMode::min_cost;
  fail(ErrorKind::invalid_argument, "unknown offset mode '" + std::string(s) + "'");
}

void OffsetInstance::validate() const {
  if (granularity < 1) fail(ErrorKind::invalid_argument, "granularity must be >= 1");
  for (const auto& p : projects) {
    if (p.name.empty()) fail(ErrorKind::invalid_argument, "offset project without a name");
    if (p.unit_cost <= 0) fail(ErrorKind::invalid_argument, "project '" + p.name + "': unit_cost must be > 0");
    if (p.unit_cost % granularity != 0) {
      fail(ErrorKind::invalid_argument, "project '" + p.name + "': unit_cost must be divisible by granularity");
    }
    if (!(p.min_share >= 0.0 && p.min_share <= 1.0)) {
      fail(ErrorKind::invalid_argument, "project '" + p.name + "': min_share must lie in [0, 1]");
    }
  }
  if (mode == OffsetMode::max_offset) {
    if (!budget) fail(ErrorKind::invalid_argument, "max_offset mode needs a budget");
    if (*budget <= 0) fail(ErrorKind::invalid_argument, "budget must be > 0");
  } else {
    if (!target_offset) fail(ErrorKind::invalid_argument, "min_cost mode needs a target_offset");
    if (!(*target_offset >= 0.0) || !std::isfinite(*target_offset)) {
      fail(ErrorKind::invalid_argument, "target_offset must be >= 0");
    }
  }
}

std::pair<std::int64_t, std::int64_t> unit_bounds(const OffsetProject& p, Minor budget, std::int64_t granularity) {
  const Wide u = p.unit_cost / granularity;
  const Wide floor_money = static_cast<Wide>(budget) * share_ppm(p.min_share);  // in ppm of currency
  const auto lo = static_cast<std::int64_t>((floor_money + u * kPpm - 1) / (u * kPpm));
  const auto hi = static_cast<std::int64_t>(budget / u);
  return {lo, hi};
}

OffsetPlan solve_max_offset(const OffsetInstance& inst) {
  if (inst.mode != OffsetMode::max_offset) fail(ErrorKind::invalid_argument, "instance is not in max_offset mode");
  inst.validate();
  const Minor budget = *inst.budget;
  auto vars = enabled_vars(inst);

  std::vector<std::string> violations;
  const auto shares = shares_sum_ppm(inst);
  if (shares > kPpm) {
    violations.push_back("sum of enabled min_share is " + text::format_double(static_cast<double>(shares) / kPpm) +
                         ", above 1");
  }
  Wide floor_cost = 0;
  for (auto& v : vars) {
    std::tie(v.lo, v.hi) = unit_bounds(inst.projects[v.project], budget, inst.granularity);
    if (v.lo > v.hi) {
      violations.push_back("project '" + inst.projects[v.project].name + "': share floor needs " +
                           std::to_string(v.lo) + " units but the budget buys at most " + std::to_string(v.hi));
    }
    floor_cost += static_cast<Wide>(v.lo) * v.unit_cost;
  }
  if (floor_cost > budget) {
    violations.push_back("share floors cost " + std::to_string(static_cast<std::int64_t>(floor_cost)) +
                         ", above the budget " + std::to_string(budget));
  }
  if (!violations.empty()) return infeasible(inst, std::move(violations));

  MaxOffsetSearch search(vars, budget);
  auto x = search.run();
  auto plan = make_plan(inst, vars, x);
  plan.nodes_explored = search.nodes();
  return plan;
}

OffsetPlan solve_min_cost(const OffsetInstance& inst) {
  if (inst.mode != OffsetMode::min_cost) fail(ErrorKind::invalid_argument, "instance is not in min_cost mode");
  inst.validate();
  auto vars = enabled_vars(inst);
  const auto target =
      static_cast<std::int64_t>(std::ceil(*inst.target_offset * static_cast<double>(inst.granularity) - 1e-9));

  std::vector<std::string> violations;
  const auto shares = shares_sum_ppm(inst);
  if (shares > kPpm) {
    violations.push_back("sum of enabled min_share is " + text::format_double(static_cast<double>(shares) / kPpm) +
                         ", above 1");
  }
  if (target > 0 && vars.empty()) violations.push_back("no enabled projects to reach a positive target");
  if (!violations.empty()) return infeasible(inst, std::move(violations));

  if (target == 0) return make_plan(inst, vars, std::vector<std::int64_t>(vars.size(), 0));
  MinCostSearch search(vars, target);
  auto x = search.run();
  auto plan = make_plan(inst, vars, x);
  plan.nodes_explored = search.nodes();
  return plan;
}

OffsetPlan solve(const OffsetInstance& instance) {
  return instance.mode == OffsetMode::max_offset ? solve_max_offset(instance) : solve_min_cost(instance);
}

double emissions_liability(std::span<const ForecastBundle> horizon, std::span<const double> planned_green_kwh,
                           double emission_factor) {
  if (horizon.size() != planned_green_kwh.size()) {
    fail(ErrorKind::invalid_argument, "horizon has " + std::to_string(horizon.size()) + " months but " +
                                          std::to_string(planned_green_kwh.size()) + " green plans were given");
  }
  if (!(emission_factor >= 0.0)) fail(ErrorKind::invalid_argument, "emission factor must be >= 0");
  double total = 0.0;
  for (std::size_t i = 0; i < horizon.size(); ++i) {
    total += std::max(0.0, horizon[i].monthly_kwh - planned_green_kwh[i]) * emission_factor / 1000.0;
  }
  return total;
}

}  // namespace netzero
