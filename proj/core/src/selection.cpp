#include "suiteopt/selection.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <set>
#include <thread>

#include "suiteopt/errors.hpp"

namespace suiteopt {

Selection Selection::of(const SensorLibrary& library, const std::vector<int>& ids) {
    Selection selection;
    selection.sensor_ids.reserve(ids.size());
    for (int id : ids) {
        const MountedSensor& entry = library.at(id);
        if (selection.contains(id)) {
            throw ValidationError("duplicate sensor id " + std::to_string(id) +
                                  " in selection");
        }
        selection.sensor_ids.push_back(id);
        selection.total_cost_usd += entry.model.cost_usd;
    }
    return selection;
}

bool Selection::contains(int id) const {
    return std::find(sensor_ids.begin(), sensor_ids.end(), id) != sensor_ids.end();
}

Selection Selection::without(const SensorLibrary& library, int id) const {
    if (!contains(id)) {
        throw ValidationError("sensor id " + std::to_string(id) +
                              " is not part of the selection");
    }
    std::vector<int> remaining;
    remaining.reserve(sensor_ids.size() - 1);
    for (int member : sensor_ids) {
        if (member != id) remaining.push_back(member);
    }
    return of(library, remaining);
}

const char* to_string(Objective objective) {
    return objective == Objective::uniform ? "uniform" : "cost-benefit";
}

Objective objective_from_string(const std::string& tag) {
    if (tag == "uniform") return Objective::uniform;
    if (tag == "cost-benefit" || tag == "cost_benefit") return Objective::cost_benefit;
    throw ValidationError("unknown objective '" + tag +
                          "' (expected uniform or cost-benefit)");
}

Selection GreedyTrace::prefix(const SensorLibrary& library, std::size_t count) const {
    if (count > steps.size()) {
        throw ValidationError("trace prefix of " + std::to_string(count) +
                              " steps exceeds trace length " + std::to_string(steps.size()));
    }
    std::vector<int> ids;
    ids.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        ids.push_back(steps[i].chosen_id);
    }
    return Selection::of(library, ids);
}

int thread_budget(std::size_t work_items) {
    unsigned workers = std::thread::hardware_concurrency();
    if (workers == 0) workers = 1;
    if (const char* env = std::getenv("SUITEOPT_THREADS")) {
        char* end = nullptr;
        const long parsed = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && parsed >= 1) {
            workers = static_cast<unsigned>(parsed);
        }
    }
    if (work_items == 0) return 1;
    return static_cast<int>(std::min<std::size_t>(workers, work_items));
}

namespace {

// Run task(0..count-1) on up to thread_budget(count) workers. Results must be
// written to preallocated slots; the caller reduces them deterministically.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task) {
    const int workers = thread_budget(count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < count;) {
                try {
                    task(i);
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace

GreedyTrace run_greedy(const GreedyProblem& problem) {
    if (problem.ids.size() != problem.costs.size()) {
        throw ValidationError("greedy: ids and costs differ in length");
    }
    if (!(problem.budget_usd > 0.0)) {
        throw ValidationError("greedy: budget must be positive");
    }
    if (!problem.score) {
        throw ValidationError("greedy: no score function");
    }

    struct Candidate {
        int id;
        double cost;
    };
    std::vector<Candidate> pool;
    pool.reserve(problem.ids.size());
    for (std::size_t i = 0; i < problem.ids.size(); ++i) {
        if (problem.costs[i] < 0.0) {
            throw ValidationError("greedy: negative cost for sensor id " +
                                  std::to_string(problem.ids[i]));
        }
        pool.push_back({problem.ids[i], problem.costs[i]});
    }
    std::sort(pool.begin(), pool.end(),
              [](const Candidate& a, const Candidate& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < pool.size(); ++i) {
        if (pool[i].id == pool[i - 1].id) {
            throw ValidationError("greedy: duplicate sensor id " +
                                  std::to_string(pool[i].id));
        }
    }

    GreedyTrace trace;
    trace.objective = problem.objective;
    trace.baseline = problem.score({});

    std::vector<int> selected;
    double spent = 0.0;
    while (true) {
        if (problem.max_cardinality &&
            static_cast<int>(selected.size()) >= *problem.max_cardinality) {
            break;
        }
        std::vector<std::size_t> affordable;
        for (std::size_t k = 0; k < pool.size(); ++k) {
            if (spent + pool[k].cost <= problem.budget_usd) affordable.push_back(k);
        }
        if (affordable.empty()) break;

        std::vector<double> raw(affordable.size());
        parallel_for(affordable.size(), [&](std::size_t i) {
            std::vector<int> trial = selected;
            trial.push_back(pool[affordable[i]].id);
            raw[i] = problem.score(trial);
        });

        // Deterministic argmax: the pool is ascending by id and only a
        // strictly greater value displaces the incumbent, so ties go to the
        // lowest id regardless of how the evaluations were scheduled.
        std::size_t best = 0;
        double best_value = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < affordable.size(); ++i) {
            double value = raw[i];
            if (problem.objective == Objective::cost_benefit) {
                const double total_cost = spent + pool[affordable[i]].cost;
                const double numer =
                    problem.cost_benefit_uses_gain ? raw[i] - trace.baseline : raw[i];
                value = numer / total_cost;
            }
            if (value > best_value) {
                best_value = value;
                best = i;
            }
        }

        const Candidate chosen = pool[affordable[best]];
        selected.push_back(chosen.id);
        spent += chosen.cost;
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(affordable[best]));

        GreedyStep step;
        step.chosen_id = chosen.id;
        step.cumulative_cost_usd = spent;
        step.score = raw[best];
        step.evaluations = static_cast<int>(affordable.size());
        trace.steps.push_back(step);
    }
    return trace;
}

GreedyResult greedy_select(const Scenario& scenario, const SensorLibrary& library,
                           const GreedyOptions& options) {
    if (library.entries.empty()) {
        throw ValidationError("greedy: empty sensor library");
    }
    const SuiteEvaluator evaluator(scenario, library, options.window, options.graph);

    GreedyProblem problem;
    problem.ids.reserve(library.entries.size());
    problem.costs.reserve(library.entries.size());
    for (const MountedSensor& entry : library.entries) {
        problem.ids.push_back(entry.id);
        problem.costs.push_back(entry.model.cost_usd);
    }
    problem.score = [&evaluator](const std::vector<int>& ids) { return evaluator.score(ids); };
    problem.budget_usd = options.budget_usd;
    problem.objective = options.objective;
    problem.max_cardinality = options.max_cardinality;
    problem.cost_benefit_uses_gain = options.cost_benefit_uses_gain;

    GreedyResult result;
    result.trace = run_greedy(problem);
    result.trace.scenario_name = scenario.name;
    result.selection = result.trace.prefix(library, result.trace.steps.size());
    return result;
}

std::uint64_t combination_count(std::uint64_t m, std::uint64_t n) {
    if (n > m) return 0;
    n = std::min(n, m - n);
    std::uint64_t count = 1;
    for (std::uint64_t i = 1; i <= n; ++i) {
        const std::uint64_t factor = m - n + i;
        if (count > std::numeric_limits<std::uint64_t>::max() / factor) {
            return std::numeric_limits<std::uint64_t>::max();
        }
        count = count * factor / i;
    }
    return count;
}

ExhaustiveResult exhaustive_select(const Scenario& scenario, const SensorLibrary& library,
                                   double budget_usd, int max_cardinality,
                                   const std::optional<TimePeriod>& window,
                                   const GraphConfig& config) {
    if (max_cardinality < 0) {
        throw ValidationError("exhaustive: cardinality must be non-negative");
    }
    if (!(budget_usd > 0.0)) {
        throw ValidationError("exhaustive: budget must be positive");
    }
    constexpr std::uint64_t kComboLimit = 1000000;
    const std::uint64_t combos =
        combination_count(library.entries.size(), static_cast<std::uint64_t>(max_cardinality));
    if (combos > kComboLimit) {
        throw ValidationError("exhaustive search refused: C(" +
                              std::to_string(library.entries.size()) + ", " +
                              std::to_string(max_cardinality) + ") = " +
                              std::to_string(combos) + " combinations exceeds the " +
                              std::to_string(kComboLimit) + " limit");
    }

    const SuiteEvaluator evaluator(scenario, library, window, config);
    std::vector<int> ids;
    std::vector<double> costs;
    for (const MountedSensor& entry : library.entries) {
        ids.push_back(entry.id);
        costs.push_back(entry.model.cost_usd);
    }
    // entries are kept ascending by id, so `current` enumerates each subset in
    // its lexicographically smallest order
    std::vector<std::size_t> order(ids.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });

    ExhaustiveResult result;
    std::vector<int> current;
    double best_score = 0.0;
    double best_cost = 0.0;
    std::vector<int> best_ids;
    bool have_best = false;

    std::function<void(std::size_t, double, int)> visit = [&](std::size_t start, double cost,
                                                              int depth) {
        const double score = evaluator.score(current);
        ++result.evaluations;
        const bool better =
            !have_best || score > best_score ||
            (score == best_score &&
             (cost < best_cost || (cost == best_cost && current < best_ids)));
        if (better) {
            best_score = score;
            best_cost = cost;
            best_ids = current;
            have_best = true;
        }
        if (depth == max_cardinality) return;
        for (std::size_t k = start; k < order.size(); ++k) {
            const std::size_t idx = order[k];
            if (cost + costs[idx] > budget_usd) continue;
            current.push_back(ids[idx]);
            visit(k + 1, cost + costs[idx], depth + 1);
            current.pop_back();
        }
    };
    visit(0, 0.0, 0);

    result.selection = Selection::of(library, best_ids);
    result.score = best_score;
    return result;
}

std::vector<ParetoPoint> pooled_points(const SensorLibrary& library,
                                       const std::vector<GreedyTrace>& traces) {
    if (traces.empty()) {
        throw ValidationError("pareto_front: no traces");
    }
    const double baseline = traces.front().baseline;
    const std::string& scenario_name = traces.front().scenario_name;
    for (const GreedyTrace& trace : traces) {
        if (trace.baseline != baseline || trace.scenario_name != scenario_name) {
            throw ValidationError("pareto_front: traces mix scenarios (baseline mismatch)");
        }
    }

    std::vector<ParetoPoint> pool;
    std::set<std::vector<int>> seen;
    for (const GreedyTrace& trace : traces) {
        for (std::size_t count = 1; count <= trace.steps.size(); ++count) {
            Selection selection = trace.prefix(library, count);
            std::vector<int> key = selection.sensor_ids;
            std::sort(key.begin(), key.end());
            if (!seen.insert(std::move(key)).second) continue;

            ParetoPoint point;
            point.cost_usd = trace.steps[count - 1].cumulative_cost_usd;
            point.score = trace.steps[count - 1].score;
            point.selection = std::move(selection);
            point.objective_tag = trace.objective;
            pool.push_back(std::move(point));
        }
    }
    if (pool.empty()) return {};

    double max_score = pool.front().score;
    for (const ParetoPoint& point : pool) max_score = std::max(max_score, point.score);
    const double denom = max_score - baseline;
    for (ParetoPoint& point : pool) {
        const double norm = denom > 0.0 ? (point.score - baseline) / denom : 1.0;
        point.score_norm = std::clamp(norm, 0.0, 1.0);
    }
    return pool;
}

std::vector<ParetoPoint> pareto_front(const SensorLibrary& library,
                                      const std::vector<GreedyTrace>& traces) {
    const std::vector<ParetoPoint> pool = pooled_points(library, traces);
    if (pool.empty()) return {};

    std::vector<ParetoPoint> front;
    for (const ParetoPoint& point : pool) {
        bool dominated = false;
        for (const ParetoPoint& other : pool) {
            if (other.cost_usd <= point.cost_usd && other.score >= point.score &&
                (other.cost_usd < point.cost_usd || other.score > point.score)) {
                dominated = true;
                break;
            }
        }
        if (!dominated) front.push_back(point);
    }
    std::sort(front.begin(), front.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
        if (a.cost_usd != b.cost_usd) return a.cost_usd < b.cost_usd;
        if (a.score != b.score) return a.score < b.score;
        return a.selection.sensor_ids < b.selection.sensor_ids;
    });
    return front;
}

ResiliencePlan resilient_plan(const Scenario& scenario, const SensorLibrary& library,
                              const ResilientOptions& options) {
    if (!(options.budget_usd > 0.0)) {
        throw ValidationError("resilient: budget must be positive");
    }
    if (library.entries.empty()) {
        throw ValidationError("resilient: empty sensor library");
    }

    ResiliencePlan plan;
    plan.budget_usd = options.budget_usd;
    plan.scenario_name = scenario.name;

    for (const TimePeriod& period : time_periods(scenario, options.period_s)) {
        const SuiteEvaluator evaluator(scenario, library, period, options.graph);

        std::vector<const MountedSensor*> affordable;
        for (const MountedSensor& entry : library.entries) {
            if (entry.model.cost_usd <= options.budget_usd) affordable.push_back(&entry);
        }
        std::sort(affordable.begin(), affordable.end(),
                  [](const MountedSensor* a, const MountedSensor* b) { return a->id < b->id; });

        ResiliencePeriod slot;
        slot.period = period;
        if (affordable.empty()) {
            slot.score_with_failure = evaluator.baseline();
            plan.periods.push_back(std::move(slot));
            continue;
        }

        // the most informative single sensor on this window is assumed to fail
        std::vector<double> singleton(affordable.size());
        parallel_for(affordable.size(), [&](std::size_t i) {
            singleton[i] = evaluator.score({affordable[i]->id});
        });
        std::size_t fail_index = 0;
        for (std::size_t i = 1; i < singleton.size(); ++i) {
            if (singleton[i] > singleton[fail_index]) fail_index = i;
        }
        const MountedSensor* failed = affordable[fail_index];
        slot.failed_sensor_id = failed->id;

        // compensate from the remaining pool; the failed sensor's cost stays
        // charged against the period budget
        const double residual_budget = options.budget_usd - failed->model.cost_usd;
        if (residual_budget > 0.0) {
            GreedyProblem problem;
            for (const MountedSensor& entry : library.entries) {
                if (entry.id == failed->id) continue;
                problem.ids.push_back(entry.id);
                problem.costs.push_back(entry.model.cost_usd);
            }
            problem.score = [&evaluator](const std::vector<int>& ids) {
                return evaluator.score(ids);
            };
            problem.budget_usd = residual_budget;
            problem.objective = Objective::uniform;
            const GreedyTrace trace = run_greedy(problem);
            slot.active = trace.prefix(library, trace.steps.size());
            slot.score_with_failure =
                trace.steps.empty() ? trace.baseline : trace.steps.back().score;
        } else {
            slot.score_with_failure = evaluator.baseline();
        }
        plan.periods.push_back(std::move(slot));
    }
    return plan;
}

EvalScore crippled_score(const Scenario& scenario, const SensorLibrary& library,
                         const Selection& selection, int failed_id,
                         const std::optional<TimePeriod>& window, const GraphConfig& config) {
    return evaluate(scenario, library, selection.without(library, failed_id), window, config);
}

}  // namespace suiteopt
