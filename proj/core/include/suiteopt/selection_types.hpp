#pragma once

#include <string>
#include <vector>

#include "suiteopt/sensors.hpp"
#include "suiteopt/world.hpp"

namespace suiteopt {

/// A subset of the sensor library; id order is acquisition order.
struct Selection {
    std::vector<int> sensor_ids;
    double total_cost_usd = 0.0;

    /// Validates ids against the library, rejects duplicates, sums cost.
    static Selection of(const SensorLibrary& library, const std::vector<int>& ids);

    bool contains(int id) const;
    std::size_t size() const { return sensor_ids.size(); }
    bool empty() const { return sensor_ids.empty(); }

    /// This selection without one member (which must be present).
    Selection without(const SensorLibrary& library, int id) const;

    friend bool operator==(const Selection&, const Selection&) = default;
};

enum class Objective { uniform, cost_benefit };

const char* to_string(Objective objective);
Objective objective_from_string(const std::string& tag);

struct GreedyStep {
    int chosen_id = -1;
    double cumulative_cost_usd = 0.0;
    double score = 0.0;   // raw J after adding chosen_id
    int evaluations = 0;  // candidate evaluations performed this round
};

/// Every intermediate architecture the greedy run visited, in order.
struct GreedyTrace {
    std::vector<GreedyStep> steps;
    double baseline = 0.0;  // J of the empty selection
    Objective objective = Objective::uniform;
    std::string scenario_name;

    /// The architecture after the first `count` steps.
    Selection prefix(const SensorLibrary& library, std::size_t count) const;
};

struct ParetoPoint {
    double cost_usd = 0.0;
    double score = 0.0;       // raw J
    double score_norm = 0.0;  // (J - J0) / (Jmax - J0) over the pooled runs
    Selection selection;
    Objective objective_tag = Objective::uniform;
};

struct ResiliencePeriod {
    TimePeriod period;
    int failed_sensor_id = -1;
    Selection active;              // compensating set, failed sensor excluded
    double score_with_failure = 0.0;
};

/// Per time period: the assumed-failed sensor and the active compensating set.
struct ResiliencePlan {
    std::vector<ResiliencePeriod> periods;
    double budget_usd = 0.0;
    std::string scenario_name;
};

}  // namespace suiteopt
