#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "accessopt/costs.hpp"

namespace accessopt::pmedian {

// Choose m of n candidate regions and assign every region to an open
// facility, minimizing sum_i weights[i] * costs[i][assignment[i]].
struct PMedianInstance {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<double> weights;  // demand per region, size n
  costs::CostMatrix costs;      // n x n, zero diagonal
  std::vector<std::string> labels;  // region ids, size n (optional, for export)
};

void validate_instance(const PMedianInstance& inst);

enum class Proof { exact, heuristic_with_gap };

struct FacilitySolution {
  std::vector<std::size_t> open_set;    // sorted, size m
  std::vector<std::size_t> assignment;  // per region, an open facility index
  double objective = 0.0;
  Proof proof = Proof::exact;
  double gap = 0.0;  // relative bound gap when proof is heuristic_with_gap
  std::uint64_t nodes_explored = 0;
};

struct SolveOptions {
  double epsilon = 1e-6;            // relative optimality gap to prove
  std::uint64_t node_budget = 500000;
  double time_budget_s = 0.0;       // 0 disables the wall-clock budget
  int subgrad_iters = 1000;         // subgradient iteration cap per node
  int root_iters = 3000;            // extra effort at the root node
  int halve_after = 30;             // non-improving iterations before mu halves
  double mu0 = 2.0;                 // initial subgradient step scale (root)
  double child_mu0 = 0.125;         // gentler restart for warm-started nodes
  double mu_min = 1e-8;             // stop ascent once mu decays below this
  std::uint64_t heuristic_restarts = 2;
  std::uint64_t seed = 1;
};

// Scores a fixed open set: every region is assigned to its cheapest open
// facility (ties to the lowest index; open facilities serve themselves).
FacilitySolution evaluate_fixed(const PMedianInstance& inst,
                                const std::vector<std::size_t>& open_set);

// Exhaustive enumeration over all m-subsets in lexicographic order. Refuses
// instances with C(n, m) beyond the budget; intended as the testing oracle.
FacilitySolution solve_exact_bruteforce(const PMedianInstance& inst,
                                        std::uint64_t subset_budget = 2000000);

// Greedy construction followed by vertex-substitution local search, plus
// seeded random restarts. Deterministic for a fixed seed.
FacilitySolution solve_heuristic(const PMedianInstance& inst, std::uint64_t seed = 1);

// Exact branch-and-bound on facility open/close decisions with a Lagrangian
// lower bound (assignment constraints dualized, tightened by subgradient
// ascent). Returns a proved-optimal solution unless a budget interrupts the
// search, in which case the incumbent is returned with its bound gap.
FacilitySolution solve(const PMedianInstance& inst, const SolveOptions& opts = {});

}  // namespace accessopt::pmedian
