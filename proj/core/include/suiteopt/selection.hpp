#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "suiteopt/selection_types.hpp"
#include "suiteopt/sensors.hpp"
#include "suiteopt/slamgraph.hpp"
#include "suiteopt/world.hpp"

namespace suiteopt {

/// Raw score J of a set of sensor ids. Must be safe to call concurrently;
/// candidate evaluations within a greedy round may run on worker threads.
using SetScoreFn = std::function<double(const std::vector<int>&)>;

/// Abstract budgeted-greedy instance. `ids` and `costs` are parallel.
struct GreedyProblem {
    std::vector<int> ids;
    std::vector<double> costs;
    SetScoreFn score;
    double budget_usd = 0.0;
    Objective objective = Objective::uniform;
    std::optional<int> max_cardinality;
    /// Cost-benefit ranks candidates by (J - J_empty) / cost instead of
    /// J / cost, which keeps the ratio meaningful when J is negative.
    bool cost_benefit_uses_gain = true;
};

/// One round per acquisition: evaluate every sensor still affordable, add the
/// argmax of the objective (ties to the lowest id), stop when the budget,
/// the cardinality cap, or the pool runs out. Final cost never exceeds the
/// budget. The trace records each round's raw J and evaluation count.
GreedyTrace run_greedy(const GreedyProblem& problem);

struct GreedyOptions {
    double budget_usd = 110000.0;
    Objective objective = Objective::uniform;
    std::optional<int> max_cardinality;
    std::optional<TimePeriod> window;
    bool cost_benefit_uses_gain = true;
    GraphConfig graph;
};

struct GreedyResult {
    Selection selection;
    GreedyTrace trace;
};

/// Budgeted greedy over the whole library, scored on the scenario (or one
/// window of it).
GreedyResult greedy_select(const Scenario& scenario, const SensorLibrary& library,
                           const GreedyOptions& options = {});

/// C(m, n), saturating at the uint64 maximum.
std::uint64_t combination_count(std::uint64_t m, std::uint64_t n);

struct ExhaustiveResult {
    Selection selection;
    double score = 0.0;
    std::uint64_t evaluations = 0;
};

/// Best budget-feasible subset of size <= max_cardinality by brute force.
/// Ties break by lower cost, then lexicographic ids. Refuses instances with
/// C(|library|, max_cardinality) > 1e6, citing the combination count.
ExhaustiveResult exhaustive_select(const Scenario& scenario, const SensorLibrary& library,
                                   double budget_usd, int max_cardinality,
                                   const std::optional<TimePeriod>& window = std::nullopt,
                                   const GraphConfig& config = {});

/// Every intermediate architecture from the traces (which must share a
/// scenario and baseline), deduplicated by sensor set, with score_norm
/// filled in: (J - J_empty) / (J_best - J_empty) over the pool.
std::vector<ParetoPoint> pooled_points(const SensorLibrary& library,
                                       const std::vector<GreedyTrace>& traces);

/// The non-dominated subset of pooled_points, sorted by cost.
std::vector<ParetoPoint> pareto_front(const SensorLibrary& library,
                                      const std::vector<GreedyTrace>& traces);

struct ResilientOptions {
    double budget_usd = 110000.0;
    double period_s = 5.0;
    GraphConfig graph;
};

/// Per time period: assume the most informative single sensor fails, charge
/// its cost against the budget, and pick a compensating set greedily from the
/// remainder, scored on that period alone.
ResiliencePlan resilient_plan(const Scenario& scenario, const SensorLibrary& library,
                              const ResilientOptions& options = {});

/// Score of the selection with one member (which must be present) removed.
EvalScore crippled_score(const Scenario& scenario, const SensorLibrary& library,
                         const Selection& selection, int failed_id,
                         const std::optional<TimePeriod>& window = std::nullopt,
                         const GraphConfig& config = {});

/// Worker count for a parallelizable batch: hardware concurrency, capped by
/// the SUITEOPT_THREADS environment variable and the batch size.
int thread_budget(std::size_t work_items);

}  // namespace suiteopt
