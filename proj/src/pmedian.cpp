#include "accessopt/pmedian.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "accessopt/errors.hpp"
#include "accessopt/kernels.hpp"
#include "accessopt/rng.hpp"

namespace accessopt::pmedian {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double elapsed_s(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Column-major views of the cost data so the hot loops touch contiguous
// memory: cols[j][i] = d(i, j), wcols[j][i] = weights[i] * d(i, j).
struct Context {
  const PMedianInstance& inst;
  std::size_t n;
  std::vector<double> cols;
  std::vector<double> wcols;

  explicit Context(const PMedianInstance& instance) : inst(instance), n(instance.n) {
    cols.resize(n * n);
    wcols.resize(n * n);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        const double d = instance.costs.at(i, j);
        cols[j * n + i] = d;
        wcols[j * n + i] = instance.weights[i] * d;
      }
    }
  }

  const double* col(std::size_t j) const { return cols.data() + j * n; }
  const double* wcol(std::size_t j) const { return wcols.data() + j * n; }

  // Demand-weighted cost of serving everyone from the given open set.
  double open_set_cost(const std::vector<std::size_t>& open, std::vector<double>& best) const {
    best.assign(n, kInf);
    for (std::size_t j : open) kernels::min_inplace(best.data(), col(j), n);
    return kernels::dot(inst.weights.data(), best.data(), n);
  }
};

FacilitySolution make_solution(const Context& ctx, std::vector<std::size_t> open) {
  std::sort(open.begin(), open.end());
  open.erase(std::unique(open.begin(), open.end()), open.end());

  const std::size_t n = ctx.n;
  FacilitySolution sol;
  sol.assignment.resize(n);
  std::vector<bool> is_open(n, false);
  for (std::size_t j : open) is_open[j] = true;

  double objective = 0.0;
  std::vector<double> served(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (is_open[i]) {
      sol.assignment[i] = i;  // open facilities serve themselves
      served[i] = 0.0;
      continue;
    }
    double best = kInf;
    std::size_t best_j = open.front();
    for (std::size_t j : open) {
      const double d = ctx.inst.costs.at(i, j);
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    sol.assignment[i] = best_j;
    served[i] = best;
  }
  objective = kernels::dot(ctx.inst.weights.data(), served.data(), n);
  sol.objective = objective;
  sol.open_set = std::move(open);
  return sol;
}

// Tracks the best open sets seen, so the returned set is the
// lexicographically smallest among ties at the optimal objective.
class Incumbent {
 public:
  double objective() const { return objective_; }
  bool valid() const { return !pool_.empty(); }

  void offer(double objective, const std::vector<std::size_t>& open_sorted) {
    if (pool_.empty()) {
      objective_ = objective;
      pool_.push_back(open_sorted);
      return;
    }
    const double tol = 1e-12 * std::max(1.0, std::fabs(objective_));
    if (objective < objective_ - tol) {
      objective_ = objective;
      pool_.clear();
      pool_.push_back(open_sorted);
    } else if (objective <= objective_ + tol) {
      if (std::find(pool_.begin(), pool_.end(), open_sorted) == pool_.end()) {
        pool_.push_back(open_sorted);
      }
    }
  }

  std::vector<std::size_t> best_set() const {
    return *std::min_element(pool_.begin(), pool_.end());
  }

 private:
  double objective_ = kInf;
  std::vector<std::vector<std::size_t>> pool_;
};

// Greedy construction: repeatedly open the facility with the best marginal
// decrease. Exact for m == 1.
std::vector<std::size_t> greedy_open(const Context& ctx) {
  const std::size_t n = ctx.n;
  const std::size_t m = ctx.inst.m;
  std::vector<std::size_t> open;
  std::vector<bool> is_open(n, false);
  std::vector<double> best(n, kInf);
  for (std::size_t step = 0; step < m; ++step) {
    double best_cost = kInf;
    std::size_t best_j = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (is_open[j]) continue;
      const double cost = kernels::dot_min(ctx.inst.weights.data(), best.data(), ctx.col(j), n);
      if (cost < best_cost) {
        best_cost = cost;
        best_j = j;
      }
    }
    is_open[best_j] = true;
    open.push_back(best_j);
    kernels::min_inplace(best.data(), ctx.col(best_j), n);
  }
  std::sort(open.begin(), open.end());
  return open;
}

// Nearest and second-nearest open facility per region.
struct BestTwo {
  std::vector<std::size_t> idx1, idx2;
  std::vector<double> val1, val2;

  void rebuild(const Context& ctx, const std::vector<std::size_t>& open) {
    const std::size_t n = ctx.n;
    idx1.assign(n, open.front());
    idx2.assign(n, open.front());
    val1.assign(n, kInf);
    val2.assign(n, kInf);
    for (std::size_t j : open) {
      const double* c = ctx.col(j);
      for (std::size_t i = 0; i < n; ++i) {
        const double d = c[i];
        if (d < val1[i]) {
          val2[i] = val1[i];
          idx2[i] = idx1[i];
          val1[i] = d;
          idx1[i] = j;
        } else if (d < val2[i]) {
          val2[i] = d;
          idx2[i] = j;
        }
      }
    }
  }
};

// Vertex substitution (swap) local search using the nearest/second-nearest
// structure, so one candidate scan costs O(n + |open|).
std::vector<std::size_t> vertex_substitution(const Context& ctx, std::vector<std::size_t> open) {
  const std::size_t n = ctx.n;
  if (open.size() >= n) return open;
  std::vector<bool> is_open(n, false);
  for (std::size_t j : open) is_open[j] = true;

  BestTwo bt;
  bt.rebuild(ctx, open);
  std::vector<double> loss(n, 0.0);

  for (;;) {
    double best_delta = -1e-12;
    std::size_t best_in = n, best_out = n;
    for (std::size_t c = 0; c < n; ++c) {
      if (is_open[c]) continue;
      const double* cc = ctx.col(c);
      double gain = 0.0;
      for (std::size_t j : open) loss[j] = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double w = ctx.inst.weights[i];
        const double d = cc[i];
        if (d < bt.val1[i]) {
          gain += w * (bt.val1[i] - d);
        } else {
          // If i's nearest facility closes, i pays min(new candidate, second).
          const double repl = std::min(d, bt.val2[i]);
          loss[bt.idx1[i]] += w * (repl - bt.val1[i]);
        }
      }
      for (std::size_t f : open) {
        const double delta = loss[f] - gain;  // new - old
        if (delta < best_delta) {
          best_delta = delta;
          best_in = c;
          best_out = f;
        }
      }
    }
    if (best_in == n) break;
    is_open[best_out] = false;
    is_open[best_in] = true;
    for (auto& j : open) {
      if (j == best_out) j = best_in;
    }
    bt.rebuild(ctx, open);
  }
  std::sort(open.begin(), open.end());
  return open;
}

struct Node {
  double bound = 0.0;
  std::uint64_t id = 0;
  int depth = 0;
  std::vector<std::int8_t> state;  // 0 free, 1 forced open, 2 forced closed
  std::vector<double> lambda;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;  // min-heap on bound
    return a.id > b.id;
  }
};

struct SubgradientResult {
  double bound = -kInf;
  std::vector<double> lambda;       // multipliers at the best bound
  std::vector<double> rho;          // facility values at the best bound
  std::vector<std::size_t> chosen;  // free facilities selected at the best bound
};

}  // namespace

void validate_instance(const PMedianInstance& inst) {
  if (inst.n == 0) throw ValidationError("p-median: empty instance");
  if (inst.m < 1 || inst.m > inst.n) throw ValidationError("p-median: need 1 <= m <= n");
  if (inst.weights.size() != inst.n) throw ValidationError("p-median: weight count != n");
  if (inst.costs.n != inst.n || inst.costs.values.size() != inst.n * inst.n) {
    throw ValidationError("p-median: cost matrix dimension mismatch");
  }
  for (double w : inst.weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw ValidationError("p-median: weights must be finite and non-negative");
    }
  }
  for (std::size_t i = 0; i < inst.n; ++i) {
    if (inst.costs.at(i, i) != 0.0) throw ValidationError("p-median: diagonal must be zero");
    for (std::size_t j = 0; j < inst.n; ++j) {
      const double d = inst.costs.at(i, j);
      if (!std::isfinite(d) || d < 0.0) {
        throw ValidationError("p-median: costs must be finite and non-negative");
      }
    }
  }
  if (!inst.labels.empty() && inst.labels.size() != inst.n) {
    throw ValidationError("p-median: label count != n");
  }
}

FacilitySolution evaluate_fixed(const PMedianInstance& inst,
                                const std::vector<std::size_t>& open_set) {
  validate_instance(inst);
  if (open_set.empty()) throw ValidationError("evaluate_fixed: empty open set");
  for (std::size_t j : open_set) {
    if (j >= inst.n) throw ValidationError("evaluate_fixed: open index out of range");
  }
  Context ctx(inst);
  FacilitySolution sol = make_solution(ctx, open_set);
  sol.proof = Proof::exact;  // exact score of the given set
  sol.gap = 0.0;
  return sol;
}

FacilitySolution solve_exact_bruteforce(const PMedianInstance& inst, std::uint64_t subset_budget) {
  validate_instance(inst);
  const std::size_t n = inst.n;
  const std::size_t m = inst.m;

  double combos = 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    combos *= static_cast<double>(n - i) / static_cast<double>(i + 1);
    if (combos > 1e18) break;
  }
  if (combos > static_cast<double>(subset_budget)) {
    throw ValidationError(
        "solve_exact_bruteforce: C(n, m) exceeds the enumeration budget; use solve() instead");
  }

  // Plain scalar scan, independent of the kernel and solver code paths.
  std::vector<std::size_t> subset(m);
  std::iota(subset.begin(), subset.end(), 0);
  std::vector<std::size_t> best_subset;
  double best_cost = kInf;
  for (;;) {
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double cheapest = kInf;
      for (std::size_t j : subset) {
        const double d = inst.costs.at(i, j);
        if (d < cheapest) cheapest = d;
      }
      cost += inst.weights[i] * cheapest;
    }
    if (cost < best_cost) {
      best_cost = cost;
      best_subset = subset;
    }
    // Advance to the next lexicographic m-subset.
    std::size_t pos = m;
    while (pos > 0 && subset[pos - 1] == n - m + pos - 1) --pos;
    if (pos == 0) break;
    ++subset[pos - 1];
    for (std::size_t q = pos; q < m; ++q) subset[q] = subset[q - 1] + 1;
  }

  Context ctx(inst);
  FacilitySolution sol = make_solution(ctx, best_subset);
  sol.proof = Proof::exact;
  return sol;
}

FacilitySolution solve_heuristic(const PMedianInstance& inst, std::uint64_t seed) {
  validate_instance(inst);
  Context ctx(inst);
  const std::size_t n = inst.n;
  const std::size_t m = inst.m;

  std::vector<std::size_t> best_open = vertex_substitution(ctx, greedy_open(ctx));
  std::vector<double> scratch;
  double best_cost = ctx.open_set_cost(best_open, scratch);

  Rng rng(seed);
  const std::uint64_t restarts = SolveOptions{}.heuristic_restarts;
  for (std::uint64_t r = 0; r < restarts && m < n; ++r) {
    // Random m-subset start.
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j = i + rng.uniform_index(n - i);
      std::swap(pool[i], pool[j]);
    }
    std::vector<std::size_t> open(pool.begin(), pool.begin() + m);
    std::sort(open.begin(), open.end());
    open = vertex_substitution(ctx, std::move(open));
    const double cost = ctx.open_set_cost(open, scratch);
    if (cost < best_cost) {
      best_cost = cost;
      best_open = std::move(open);
    }
  }

  FacilitySolution sol = make_solution(ctx, best_open);
  sol.proof = Proof::heuristic_with_gap;
  sol.gap = kInf;  // no bound attached yet
  return sol;
}

namespace {

// Subgradient ascent on the Lagrangian dual at one branch-and-bound node.
// state fixes facilities open (1) or closed (2); lambda warm-starts from the
// parent. The incumbent is refreshed from every relaxed solution. The ascent
// stops as soon as the bound crosses the live prune cutoff.
SubgradientResult subgradient_ascent(const Context& ctx, const std::vector<std::int8_t>& state,
                                     std::vector<double> lambda, Incumbent& incumbent,
                                     const SolveOptions& opts, int iters, double mu_start) {
  const std::size_t n = ctx.n;
  const std::size_t m = ctx.inst.m;

  std::vector<std::size_t> forced_open, free_set;
  for (std::size_t j = 0; j < n; ++j) {
    if (state[j] == 1) forced_open.push_back(j);
    if (state[j] == 0) free_set.push_back(j);
  }
  const std::size_t q = m - forced_open.size();

  SubgradientResult res;
  res.lambda = lambda;

  std::vector<double> rho(n, 0.0);
  std::vector<double> grad(n, 0.0);
  std::vector<std::size_t> order;
  std::vector<std::size_t> relaxed_open;
  std::vector<double> scratch;

  const auto cutoff = [&]() {
    const double ub = incumbent.objective();
    return ub - opts.epsilon * std::max(1.0, std::fabs(ub));
  };

  double mu = mu_start;
  int non_improving = 0;

  for (int it = 0; it < iters; ++it) {
    // Facility values under the current multipliers.
    for (std::size_t j = 0; j < n; ++j) {
      if (state[j] == 2) continue;
      double v = kernels::sum_min_zero(ctx.wcol(j), lambda.data(), n);
      if (lambda[j] < 0.0) v -= lambda[j];  // self-assignment term is forced
      rho[j] = v;
    }

    double bound = std::accumulate(lambda.begin(), lambda.end(), 0.0);
    for (std::size_t j : forced_open) bound += rho[j];

    order = free_set;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (rho[a] != rho[b]) return rho[a] < rho[b];
      return a < b;
    });
    for (std::size_t t = 0; t < q; ++t) bound += rho[order[t]];

    relaxed_open = forced_open;
    relaxed_open.insert(relaxed_open.end(), order.begin(), order.begin() + q);
    std::sort(relaxed_open.begin(), relaxed_open.end());

    // Every relaxed solution doubles as a primal candidate.
    const double primal = ctx.open_set_cost(relaxed_open, scratch);
    incumbent.offer(primal, relaxed_open);

    const bool improved =
        !std::isfinite(res.bound) ||
        bound > res.bound + 1e-12 * std::max(1.0, std::fabs(res.bound));
    if (improved) {
      res.bound = bound;
      res.lambda = lambda;
      res.rho = rho;
      res.chosen.assign(order.begin(), order.begin() + q);
      non_improving = 0;
    } else {
      ++non_improving;
    }
    if (res.bound >= cutoff()) break;  // node is prunable, no need to tighten
    if (non_improving >= opts.halve_after) {
      mu *= 0.5;
      non_improving = 0;
    }
    if (mu < opts.mu_min) break;

    // Subgradient of the dualized assignment constraints.
    std::vector<bool> open_now(n, false);
    for (std::size_t j : relaxed_open) open_now[j] = true;
    double norm2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double g = 1.0;
      if (open_now[i]) g -= 1.0;  // self assignment
      for (std::size_t j : relaxed_open) {
        if (j != i && ctx.wcol(j)[i] < lambda[i]) g -= 1.0;
      }
      grad[i] = g;
      norm2 += g * g;
    }
    if (norm2 == 0.0) {
      // Relaxed solution is primal feasible: the node is solved exactly.
      res.bound = std::max(res.bound, bound);
      res.lambda = lambda;
      res.rho = rho;
      res.chosen.assign(order.begin(), order.begin() + q);
      break;
    }
    const double target = incumbent.objective();
    const double step = mu * (target - bound) / norm2;
    if (step <= 0.0) break;  // bound already at or above the incumbent
    for (std::size_t i = 0; i < n; ++i) lambda[i] += step * grad[i];
  }
  if (res.rho.empty()) {
    res.rho = rho;
    res.chosen.assign(order.begin(), order.begin() + q);
  }
  return res;
}

}  // namespace

FacilitySolution solve(const PMedianInstance& inst, const SolveOptions& opts) {
  validate_instance(inst);
  const auto start = std::chrono::steady_clock::now();
  Context ctx(inst);
  const std::size_t n = inst.n;
  const std::size_t m = inst.m;

  Incumbent incumbent;
  {
    const FacilitySolution heur = solve_heuristic(inst, opts.seed);
    incumbent.offer(heur.objective, heur.open_set);
  }

  // Root multipliers: cost of the nearest other facility per region.
  std::vector<double> lambda0(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double best = kInf;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) best = std::min(best, ctx.wcol(j)[i]);
    }
    lambda0[i] = n > 1 ? best : 0.0;
  }

  std::priority_queue<Node, std::vector<Node>, NodeOrder> frontier;
  std::uint64_t next_id = 0;
  frontier.push({0.0, next_id++, 0, std::vector<std::int8_t>(n, 0), std::move(lambda0)});

  double global_lb = 0.0;
  std::uint64_t nodes = 0;
  bool budget_hit = false;

  const auto eps_abs = [&](double ub) { return opts.epsilon * std::max(1.0, std::fabs(ub)); };

  while (!frontier.empty()) {
    if (nodes >= opts.node_budget ||
        (opts.time_budget_s > 0.0 && elapsed_s(start) > opts.time_budget_s)) {
      budget_hit = true;
      break;
    }
    Node node = frontier.top();
    frontier.pop();

    // Best-first order makes the popped bound the global lower bound.
    global_lb = std::max(global_lb, std::min(node.bound, incumbent.objective()));
    if (incumbent.objective() - global_lb <= eps_abs(incumbent.objective())) break;
    if (node.bound >= incumbent.objective() - eps_abs(incumbent.objective())) break;

    ++nodes;

    std::size_t forced_open = 0, closed = 0;
    for (std::int8_t s : node.state) {
      forced_open += s == 1;
      closed += s == 2;
    }
    const std::size_t free_count = n - forced_open - closed;
    if (forced_open > m || forced_open + free_count < m) continue;  // infeasible branch

    // Exhausted decisions: evaluate directly.
    if (forced_open == m || free_count == m - forced_open) {
      std::vector<std::size_t> open;
      for (std::size_t j = 0; j < n; ++j) {
        if (node.state[j] == 1 || (node.state[j] == 0 && forced_open < m)) open.push_back(j);
      }
      std::vector<double> scratch;
      incumbent.offer(ctx.open_set_cost(open, scratch), open);
      continue;
    }

    const int iters = node.depth == 0 ? opts.root_iters : opts.subgrad_iters;
    const double mu_start = node.depth == 0 ? opts.mu0 : opts.child_mu0;
    SubgradientResult sg = subgradient_ascent(ctx, node.state, std::move(node.lambda), incumbent,
                                              opts, iters, mu_start);

    const double cutoff = incumbent.objective() - eps_abs(incumbent.objective());
    if (sg.bound >= cutoff) continue;  // pruned

    // Lagrangian penalty fixing: force facilities whose open/closed
    // alternative already exceeds the cutoff.
    std::vector<std::int8_t> state = node.state;
    {
      std::vector<std::size_t> free_sorted;
      for (std::size_t j = 0; j < n; ++j) {
        if (state[j] == 0) free_sorted.push_back(j);
      }
      std::sort(free_sorted.begin(), free_sorted.end(), [&](std::size_t a, std::size_t b) {
        if (sg.rho[a] != sg.rho[b]) return sg.rho[a] < sg.rho[b];
        return a < b;
      });
      const std::size_t q = m - forced_open;
      if (q > 0 && q <= free_sorted.size()) {
        const double rho_qth = sg.rho[free_sorted[q - 1]];
        const double rho_next = q < free_sorted.size() ? sg.rho[free_sorted[q]] : kInf;
        for (std::size_t t = 0; t < free_sorted.size(); ++t) {
          const std::size_t j = free_sorted[t];
          if (t < q) {
            // Closing j replaces it with the next-best free facility.
            if (rho_next < kInf && sg.bound - sg.rho[j] + rho_next >= cutoff) state[j] = 1;
            if (rho_next == kInf) state[j] = 1;  // no replacement exists
          } else {
            // Opening j evicts the q-th cheapest selection.
            if (sg.bound + sg.rho[j] - rho_qth >= cutoff) state[j] = 2;
          }
        }
      }
    }

    // Branch on the most attractive free facility in the relaxed selection.
    std::size_t branch_j = n;
    for (std::size_t j : sg.chosen) {
      if (state[j] == 0) {
        branch_j = j;
        break;  // chosen is rho-sorted ascending
      }
    }
    if (branch_j == n) {
      for (std::size_t j = 0; j < n; ++j) {
        if (state[j] == 0) {
          branch_j = j;
          break;
        }
      }
    }
    if (branch_j == n) {
      // Fixing resolved every facility; score the implied set.
      std::vector<std::size_t> open;
      for (std::size_t j = 0; j < n; ++j) {
        if (state[j] == 1) open.push_back(j);
      }
      if (open.size() == m) {
        std::vector<double> scratch;
        incumbent.offer(ctx.open_set_cost(open, scratch), open);
      }
      continue;
    }

    Node open_child{sg.bound, next_id++, node.depth + 1, state, sg.lambda};
    open_child.state[branch_j] = 1;
    Node closed_child{sg.bound, next_id++, node.depth + 1, std::move(state), sg.lambda};
    closed_child.state[branch_j] = 2;
    frontier.push(std::move(open_child));
    frontier.push(std::move(closed_child));
  }

  // Only natural exhaustion closes the bound completely; early gap-based
  // exits keep the lower bound recorded at the last pop.
  if (!budget_hit && frontier.empty()) global_lb = incumbent.objective();

  FacilitySolution sol = make_solution(ctx, incumbent.best_set());
  sol.nodes_explored = nodes;
  const double ub = incumbent.objective();
  const double denom = std::max(std::fabs(ub), 1e-30);
  const double gap = ub > 0.0 ? std::max(0.0, (ub - global_lb) / denom) : 0.0;
  if (!budget_hit || gap <= opts.epsilon) {
    sol.proof = Proof::exact;
    sol.gap = gap;
  } else {
    sol.proof = Proof::heuristic_with_gap;
    sol.gap = gap;
  }
  return sol;
}

}  // namespace accessopt::pmedian
