#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <doctest.h>

#include "suiteopt/errors.hpp"
#include "suiteopt/selection.hpp"

using namespace suiteopt;

namespace {

// score(S) = base + sum of per-id weights; marginal gains are constant, so
// every greedy round must pick the largest remaining affordable weight.
SetScoreFn modular(std::map<int, double> weights, double base) {
    return [weights = std::move(weights), base](const std::vector<int>& ids) {
        double s = base;
        for (int id : ids) s += weights.at(id);
        return s;
    };
}

std::vector<int> chosen_ids(const GreedyTrace& trace) {
    std::vector<int> ids;
    for (const GreedyStep& step : trace.steps) ids.push_back(step.chosen_id);
    return ids;
}

MountedSensor make_sensor(int id, SensorKind kind, Mount mount, double range_m,
                          double fov_rad, double sigma_range, double sigma_bearing,
                          double cost, const std::string& label) {
    MountedSensor s;
    s.id = id;
    s.model.kind = kind;
    s.model.range_m = range_m;
    s.model.fov_rad = fov_rad;
    s.model.noise = ConstantNoise{sigma_range};
    s.model.sigma_bearing_rad = sigma_bearing;
    s.model.cost_usd = cost;
    s.model.label = label;
    s.mount = mount;
    return s;
}

// Six sensors: a dominant all-around unit, a weak one, and four sectors.
SensorLibrary toy_library() {
    SensorLibrary lib;
    lib.entries.push_back(make_sensor(0, SensorKind::lidar, Mount::roof(), 200.0,
                                      2.0 * M_PI, 0.01, 0.001, 5000.0, "strong-lidar"));
    lib.entries.push_back(make_sensor(1, SensorKind::lidar, Mount::roof(), 200.0,
                                      2.0 * M_PI, 0.5, 0.05, 800.0, "weak-lidar"));
    const int clocks[] = {0, 3, 6, 9};
    for (int i = 0; i < 4; ++i) {
        lib.entries.push_back(make_sensor(2 + i, SensorKind::radar, Mount::clock(clocks[i]),
                                          60.0, M_PI / 2.0, 0.3, 0.02, 400.0,
                                          "sector-radar"));
    }
    return lib;
}

Scenario small_scenario(std::uint64_t seed = 2) {
    return synth_linear_scenario(40.0, 2.5, 10, 8.0, seed);
}

struct EnvGuard {
    std::string name;
    std::optional<std::string> old;
    EnvGuard(const char* n, const char* value) : name(n) {
        if (const char* v = std::getenv(n)) old = v;
        setenv(n, value, 1);
    }
    ~EnvGuard() {
        if (old) {
            setenv(name.c_str(), old->c_str(), 1);
        } else {
            unsetenv(name.c_str());
        }
    }
};

}  // namespace

TEST_CASE("selection construction and membership") {
    const SensorLibrary lib = toy_library();
    const Selection sel = Selection::of(lib, {1, 3});
    CHECK(sel.total_cost_usd == 1200.0);
    CHECK(sel.contains(1));
    CHECK(sel.contains(3));
    CHECK(!sel.contains(0));
    CHECK(sel.size() == 2);

    const Selection rest = sel.without(lib, 3);
    CHECK(rest.sensor_ids == std::vector<int>{1});
    CHECK(rest.total_cost_usd == 800.0);
    CHECK_THROWS_AS(sel.without(lib, 0), ValidationError);
    CHECK_THROWS_AS(Selection::of(lib, {1, 1}), ValidationError);
    CHECK_THROWS_AS(Selection::of(lib, {17}), ValidationError);
}

TEST_CASE("objective names round-trip") {
    CHECK(std::string(to_string(Objective::uniform)) == "uniform");
    CHECK(std::string(to_string(Objective::cost_benefit)) == "cost-benefit");
    CHECK(objective_from_string("uniform") == Objective::uniform);
    CHECK(objective_from_string("cost-benefit") == Objective::cost_benefit);
    CHECK(objective_from_string("cost_benefit") == Objective::cost_benefit);
    CHECK_THROWS_AS(objective_from_string("fastest"), ValidationError);
}

TEST_CASE("greedy on a hand-checked additive instance") {
    GreedyProblem problem;
    problem.ids = {0, 1, 2, 3};
    problem.costs = {10.0, 20.0, 30.0, 40.0};
    problem.score = modular({{0, 1.0}, {1, 5.0}, {2, 3.0}, {3, 2.0}}, -2.0);
    problem.budget_usd = 60.0;

    const GreedyTrace trace = run_greedy(problem);
    CHECK(trace.baseline == -2.0);
    REQUIRE(trace.steps.size() == 3);

    CHECK(trace.steps[0].chosen_id == 1);
    CHECK(trace.steps[0].cumulative_cost_usd == 20.0);
    CHECK(trace.steps[0].score == 3.0);
    CHECK(trace.steps[0].evaluations == 4);

    CHECK(trace.steps[1].chosen_id == 2);
    CHECK(trace.steps[1].cumulative_cost_usd == 50.0);
    CHECK(trace.steps[1].score == 6.0);
    CHECK(trace.steps[1].evaluations == 3);

    // only id 0 still fits: 50 + 40 would blow the budget
    CHECK(trace.steps[2].chosen_id == 0);
    CHECK(trace.steps[2].cumulative_cost_usd == 60.0);
    CHECK(trace.steps[2].score == 7.0);
    CHECK(trace.steps[2].evaluations == 1);
}

TEST_CASE("greedy keeps buying while budget remains, even at negative gain") {
    GreedyProblem problem;
    problem.ids = {0, 1};
    problem.costs = {5.0, 5.0};
    problem.score = modular({{0, 2.0}, {1, -1.0}}, 0.0);
    problem.budget_usd = 100.0;
    const GreedyTrace trace = run_greedy(problem);
    CHECK(chosen_ids(trace) == std::vector<int>{0, 1});
    CHECK(trace.steps[1].score == 1.0);
}

TEST_CASE("greedy stopping conditions") {
    SUBCASE("cardinality cap") {
        GreedyProblem problem;
        problem.ids = {0, 1, 2, 3, 4, 5, 6, 7};
        problem.costs.assign(8, 1.0);
        std::map<int, double> w;
        for (int id = 0; id < 8; ++id) w[id] = static_cast<double>(id);
        problem.score = modular(w, 0.0);
        problem.budget_usd = 1e9;
        problem.max_cardinality = 3;
        const GreedyTrace trace = run_greedy(problem);
        REQUIRE(trace.steps.size() == 3);
        CHECK(chosen_ids(trace) == std::vector<int>{7, 6, 5});
        int evals = 0;
        for (const GreedyStep& step : trace.steps) evals += step.evaluations;
        CHECK(evals == 8 + 7 + 6);
    }

    SUBCASE("budget below every cost yields an empty trace") {
        GreedyProblem problem;
        problem.ids = {0, 1};
        problem.costs = {10.0, 20.0};
        problem.score = modular({{0, 1.0}, {1, 1.0}}, 4.0);
        problem.budget_usd = 1.0;
        const GreedyTrace trace = run_greedy(problem);
        CHECK(trace.steps.empty());
        CHECK(trace.baseline == 4.0);
    }

    SUBCASE("pool exhaustion") {
        GreedyProblem problem;
        problem.ids = {0};
        problem.costs = {1.0};
        problem.score = modular({{0, 1.0}}, 0.0);
        problem.budget_usd = 10.0;
        CHECK(run_greedy(problem).steps.size() == 1);
    }
}

TEST_CASE("greedy input validation") {
    GreedyProblem problem;
    problem.ids = {0, 1};
    problem.costs = {1.0};
    problem.score = modular({{0, 1.0}, {1, 1.0}}, 0.0);
    problem.budget_usd = 10.0;
    CHECK_THROWS_AS(run_greedy(problem), ValidationError);  // length mismatch

    problem.costs = {1.0, 1.0};
    problem.budget_usd = 0.0;
    CHECK_THROWS_AS(run_greedy(problem), ValidationError);  // non-positive budget

    problem.budget_usd = 10.0;
    problem.score = nullptr;
    CHECK_THROWS_AS(run_greedy(problem), ValidationError);  // missing score

    problem.score = modular({{0, 1.0}, {1, 1.0}}, 0.0);
    problem.costs = {1.0, -2.0};
    CHECK_THROWS_AS(run_greedy(problem), ValidationError);  // negative cost

    problem.costs = {1.0, 1.0};
    problem.ids = {3, 3};
    problem.score = modular({{3, 1.0}}, 0.0);
    CHECK_THROWS_AS(run_greedy(problem), ValidationError);  // duplicate ids
}

TEST_CASE("score ties resolve to the lowest id regardless of input order") {
    GreedyProblem problem;
    problem.ids = {3, 1, 2};
    problem.costs = {5.0, 5.0, 5.0};
    problem.score = modular({{1, 2.0}, {2, 2.0}, {3, 2.0}}, 0.0);
    problem.budget_usd = 1e6;
    CHECK(chosen_ids(run_greedy(problem)) == std::vector<int>{1, 2, 3});
}

TEST_CASE("cost-benefit ranks by value per dollar") {
    GreedyProblem problem;
    problem.ids = {0, 1};
    problem.costs = {10.0, 100.0};
    problem.score = modular({{0, 1.0}, {1, 3.0}}, 0.0);
    problem.budget_usd = 200.0;

    problem.objective = Objective::uniform;
    CHECK(chosen_ids(run_greedy(problem)) == std::vector<int>{1, 0});

    // 1/10 per dollar beats 3/100
    problem.objective = Objective::cost_benefit;
    CHECK(chosen_ids(run_greedy(problem)) == std::vector<int>{0, 1});
}

TEST_CASE("cost-benefit handles negative scores via the baseline shift") {
    GreedyProblem problem;
    problem.ids = {0, 1};
    problem.costs = {10.0, 100.0};
    problem.score = modular({{0, 1.0}, {1, 3.0}}, -100.0);
    problem.budget_usd = 200.0;
    problem.objective = Objective::cost_benefit;

    // gains per dollar: (1)/10 vs (3)/100, same ordering as the positive case
    problem.cost_benefit_uses_gain = true;
    CHECK(chosen_ids(run_greedy(problem)) == std::vector<int>{0, 1});

    // raw J per dollar: -99/10 = -9.9 loses to -97/100 = -0.97
    problem.cost_benefit_uses_gain = false;
    CHECK(chosen_ids(run_greedy(problem)) == std::vector<int>{1, 0});
}

TEST_CASE("uniform greedy is invariant to a constant score offset") {
    for (double base : {0.0, 1000.0, -250.0}) {
        GreedyProblem problem;
        problem.ids = {0, 1, 2};
        problem.costs = {10.0, 10.0, 10.0};
        problem.score = modular({{0, 1.0}, {1, 5.0}, {2, 3.0}}, base);
        problem.budget_usd = 25.0;
        CHECK(chosen_ids(run_greedy(problem)) == std::vector<int>{1, 2});
    }
}

TEST_CASE("worker count respects the environment override") {
    {
        EnvGuard guard("SUITEOPT_THREADS", "5");
        CHECK(thread_budget(8) == 5);
        CHECK(thread_budget(3) == 3);  // capped by the batch
        CHECK(thread_budget(0) == 1);
    }
    {
        EnvGuard guard("SUITEOPT_THREADS", "not-a-number");
        CHECK(thread_budget(4) >= 1);
    }
    {
        EnvGuard guard("SUITEOPT_THREADS", "0");
        CHECK(thread_budget(4) >= 1);
    }
}

TEST_CASE("greedy picks the same sequence no matter the worker count") {
    // weights 37*id mod 11 collide for ids 0 and 11; the tie must go to 0
    GreedyProblem problem;
    std::map<int, double> w;
    for (int id = 0; id < 12; ++id) {
        problem.ids.push_back(id);
        problem.costs.push_back(1.0);
        w[id] = static_cast<double>(37 * id % 11);
    }
    problem.score = modular(w, 0.0);
    problem.budget_usd = 1e6;

    const std::vector<int> expected = {8, 5, 2, 10, 7, 4, 1, 9, 6, 3, 0, 11};
    {
        EnvGuard guard("SUITEOPT_THREADS", "1");
        CHECK(chosen_ids(run_greedy(problem)) == expected);
    }
    {
        EnvGuard guard("SUITEOPT_THREADS", "3");
        CHECK(chosen_ids(run_greedy(problem)) == expected);
    }
    {
        EnvGuard guard("SUITEOPT_THREADS", "16");
        CHECK(chosen_ids(run_greedy(problem)) == expected);
    }
}

TEST_CASE("combination counts") {
    CHECK(combination_count(8, 3) == 56);
    CHECK(combination_count(62, 6) == 61474519);
    CHECK(combination_count(5, 0) == 1);
    CHECK(combination_count(0, 0) == 1);
    CHECK(combination_count(3, 5) == 0);
    CHECK(combination_count(10, 7) == 120);
    CHECK(combination_count(200, 100) == std::numeric_limits<std::uint64_t>::max());
}

TEST_CASE("library-wide greedy wires the scenario scoring in") {
    const Scenario scn = small_scenario();
    const SensorLibrary lib = toy_library();

    GreedyOptions options;
    options.budget_usd = 1e9;
    options.max_cardinality = 3;
    const GreedyResult result = greedy_select(scn, lib, options);

    CHECK(result.trace.scenario_name == scn.name);
    REQUIRE(result.trace.steps.size() == 3);
    CHECK(result.trace.steps[0].evaluations == 6);
    CHECK(result.trace.steps[1].evaluations == 5);
    CHECK(result.trace.steps[2].evaluations == 4);
    CHECK(result.selection ==
          result.trace.prefix(lib, result.trace.steps.size()));

    // scores along the trace never decrease (adding sensors adds information)
    CHECK(result.trace.steps[0].score >= result.trace.baseline - 1e-9);
    for (std::size_t i = 1; i < result.trace.steps.size(); ++i) {
        CHECK(result.trace.steps[i].score >= result.trace.steps[i - 1].score - 1e-9);
    }

    SUBCASE("a binding budget is never exceeded") {
        GreedyOptions tight;
        tight.budget_usd = 1300.0;  // weak lidar + one sector at most
        const GreedyResult capped = greedy_select(scn, lib, tight);
        CHECK(capped.selection.total_cost_usd <= 1300.0);
        for (int id : capped.selection.sensor_ids) CHECK(id != 0);
    }

    SUBCASE("rerunning is bit-identical") {
        const GreedyResult again = greedy_select(scn, lib, options);
        CHECK(again.selection == result.selection);
        REQUIRE(again.trace.steps.size() == result.trace.steps.size());
        for (std::size_t i = 0; i < again.trace.steps.size(); ++i) {
            CHECK(again.trace.steps[i].score == result.trace.steps[i].score);
        }
    }
}

TEST_CASE("exhaustive search refuses oversized instances, citing the count") {
    const SensorLibrary lib = build_default_library();
    const Scenario scn = small_scenario();
    try {
        exhaustive_select(scn, lib, 1e9, 6);
        FAIL("expected the guard to fire");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("61474519") != std::string::npos);
        CHECK(msg.find("C(62, 6)") != std::string::npos);
    }
}

TEST_CASE("exhaustive search on a toy instance") {
    const Scenario scn = small_scenario();
    const SensorLibrary lib = toy_library();

    SUBCASE("visits every subset when nothing is pruned") {
        const ExhaustiveResult result = exhaustive_select(scn, lib, 1e9, 3);
        CHECK(result.evaluations == 1 + 6 + 15 + 20);  // sizes 0..3 of 6
        CHECK(result.selection.size() <= 3);
    }

    SUBCASE("optimum is at least the greedy value") {
        GreedyOptions options;
        options.budget_usd = 6000.0;
        options.max_cardinality = 2;
        const GreedyResult greedy = greedy_select(scn, lib, options);
        const ExhaustiveResult exact = exhaustive_select(scn, lib, 6000.0, 2);
        const double greedy_score = greedy.trace.steps.empty()
                                        ? greedy.trace.baseline
                                        : greedy.trace.steps.back().score;
        CHECK(exact.score >= greedy_score - 1e-9);
        CHECK(exact.selection.total_cost_usd <= 6000.0);
    }

    SUBCASE("a budget that excludes the flagship prunes it out") {
        const ExhaustiveResult result = exhaustive_select(scn, lib, 4000.0, 3);
        for (int id : result.selection.sensor_ids) CHECK(id != 0);
        CHECK(result.evaluations < 42);  // pruning skipped some subsets
    }

    SUBCASE("bad arguments") {
        CHECK_THROWS_AS(exhaustive_select(scn, lib, 0.0, 2), ValidationError);
        CHECK_THROWS_AS(exhaustive_select(scn, lib, 1e9, -1), ValidationError);
    }
}

TEST_CASE("exhaustive tie-breaking prefers cheaper, then lexicographic") {
    Scenario scn = small_scenario();
    SensorLibrary lib;
    // two identical all-around units at different prices, plus a dud
    lib.entries.push_back(make_sensor(0, SensorKind::lidar, Mount::roof(), 200.0,
                                      2.0 * M_PI, 0.05, 0.005, 100.0, "twin-a"));
    lib.entries.push_back(make_sensor(1, SensorKind::lidar, Mount::roof(), 200.0,
                                      2.0 * M_PI, 0.05, 0.005, 200.0, "twin-b"));
    lib.entries.push_back(make_sensor(2, SensorKind::lidar, Mount::roof(), 0.01,
                                      2.0 * M_PI, 0.05, 0.005, 50.0, "blind"));

    SUBCASE("equal scores, different costs: the cheaper twin wins") {
        const ExhaustiveResult result = exhaustive_select(scn, lib, 1e9, 1);
        CHECK(result.selection.sensor_ids == std::vector<int>{0});
    }

    SUBCASE("equal scores and costs: lexicographic ids win") {
        lib.entries[1].model.cost_usd = 100.0;
        const ExhaustiveResult result = exhaustive_select(scn, lib, 1e9, 1);
        CHECK(result.selection.sensor_ids == std::vector<int>{0});
    }

    SUBCASE("a sensor that sees nothing loses to the free empty suite") {
        SensorLibrary blind;
        blind.entries.push_back(make_sensor(0, SensorKind::lidar, Mount::roof(), 0.01,
                                            2.0 * M_PI, 0.05, 0.005, 50.0, "blind"));
        const ExhaustiveResult result = exhaustive_select(scn, blind, 1e9, 1);
        CHECK(result.selection.empty());
        CHECK(result.evaluations == 2);
    }
}

TEST_CASE("greedy achieves the classic submodular approximation factor") {
    const SensorLibrary lib = toy_library();
    for (std::uint64_t seed : {2ULL, 9ULL, 14ULL, 23ULL, 31ULL}) {
        const Scenario scn = small_scenario(seed);
        GreedyOptions options;
        options.budget_usd = 1e9;
        options.max_cardinality = 2;
        const GreedyResult greedy = greedy_select(scn, lib, options);
        const ExhaustiveResult exact = exhaustive_select(scn, lib, 1e9, 2);

        const double greedy_gain =
            (greedy.trace.steps.empty() ? greedy.trace.baseline
                                        : greedy.trace.steps.back().score) -
            greedy.trace.baseline;
        const double optimal_gain = exact.score - greedy.trace.baseline;
        CHECK(optimal_gain >= greedy_gain - 1e-9);
        CHECK(greedy_gain >= (1.0 - 1.0 / std::exp(1.0)) * optimal_gain - 1e-9);
    }
}

TEST_CASE("pooled points and the pareto front on hand-built traces") {
    const SensorLibrary lib = toy_library();

    auto make_trace = [](std::vector<GreedyStep> steps) {
        GreedyTrace trace;
        trace.baseline = 0.0;
        trace.scenario_name = "hand";
        trace.steps = std::move(steps);
        return trace;
    };
    auto step = [](int id, double cost, double score) {
        GreedyStep s;
        s.chosen_id = id;
        s.cumulative_cost_usd = cost;
        s.score = score;
        return s;
    };

    SUBCASE("a single one-step trace yields one point with norm 1") {
        const auto front = pareto_front(lib, {make_trace({step(1, 800.0, 5.0)})});
        REQUIRE(front.size() == 1);
        CHECK(front[0].cost_usd == 800.0);
        CHECK(front[0].score == 5.0);
        CHECK(front[0].score_norm == 1.0);
        CHECK(front[0].selection.sensor_ids == std::vector<int>{1});
    }

    SUBCASE("dominated points drop out and the front sorts by cost") {
        const GreedyTrace a = make_trace({step(1, 10.0, 5.0), step(2, 30.0, 8.0)});
        const GreedyTrace b = make_trace({step(3, 20.0, 4.0)});

        const auto pool = pooled_points(lib, {a, b});
        REQUIRE(pool.size() == 3);
        // norms over the pool: baseline 0, best 8
        for (const ParetoPoint& p : pool) {
            if (p.cost_usd == 10.0) CHECK(p.score_norm == doctest::Approx(0.625));
            if (p.cost_usd == 30.0) CHECK(p.score_norm == 1.0);
            if (p.cost_usd == 20.0) CHECK(p.score_norm == doctest::Approx(0.5));
        }

        const auto front = pareto_front(lib, {a, b});
        REQUIRE(front.size() == 2);  // (20, 4) is dominated by (10, 5)
        CHECK(front[0].cost_usd == 10.0);
        CHECK(front[0].score == 5.0);
        CHECK(front[1].cost_usd == 30.0);
        CHECK(front[1].score == 8.0);
    }

    SUBCASE("identical architectures from different traces pool only once") {
        const GreedyTrace a = make_trace({step(1, 800.0, 5.0), step(2, 1200.0, 8.0)});
        const GreedyTrace b = make_trace({step(1, 800.0, 5.0), step(3, 1200.0, 6.0)});
        const auto pool = pooled_points(lib, {a, b});
        CHECK(pool.size() == 3);  // {1}, {1,2}, {1,3}
    }

    SUBCASE("scores all equal to baseline still produce norm 1") {
        const auto pool = pooled_points(lib, {make_trace({step(1, 800.0, 0.0)})});
        REQUIRE(pool.size() == 1);
        CHECK(pool[0].score_norm == 1.0);
    }

    SUBCASE("mixed baselines are rejected") {
        GreedyTrace other = make_trace({step(2, 400.0, 3.0)});
        other.baseline = 1.0;
        CHECK_THROWS_AS(pooled_points(lib, {make_trace({step(1, 800.0, 5.0)}), other}),
                        ValidationError);
    }

    SUBCASE("no traces is an error, empty traces an empty front") {
        CHECK_THROWS_AS(pooled_points(lib, {}), ValidationError);
        CHECK(pareto_front(lib, {make_trace({})}).empty());
    }
}

TEST_CASE("pareto front from real greedy runs is clean") {
    const Scenario scn = small_scenario();
    const SensorLibrary lib = toy_library();

    GreedyOptions uniform;
    uniform.budget_usd = 7000.0;
    GreedyOptions ratio = uniform;
    ratio.objective = Objective::cost_benefit;
    const GreedyTrace a = greedy_select(scn, lib, uniform).trace;
    const GreedyTrace b = greedy_select(scn, lib, ratio).trace;

    const auto pool = pooled_points(lib, {a, b});
    const auto front = pareto_front(lib, {a, b});
    REQUIRE(!front.empty());
    CHECK(front.size() <= pool.size());

    for (const ParetoPoint& p : front) {
        for (const ParetoPoint& q : pool) {
            const bool dominates = q.cost_usd <= p.cost_usd && q.score >= p.score &&
                                   (q.cost_usd < p.cost_usd || q.score > p.score);
            CHECK(!dominates);
        }
        CHECK(p.score_norm >= 0.0);
        CHECK(p.score_norm <= 1.0);
    }
    for (std::size_t i = 1; i < front.size(); ++i) {
        CHECK(front[i - 1].cost_usd <= front[i].cost_usd);
        CHECK(front[i - 1].score <= front[i].score);
    }

    // every front point reappears identically on a rerun
    const auto again = pareto_front(lib, {greedy_select(scn, lib, uniform).trace,
                                          greedy_select(scn, lib, ratio).trace});
    REQUIRE(again.size() == front.size());
    for (std::size_t i = 0; i < front.size(); ++i) {
        CHECK(again[i].cost_usd == front[i].cost_usd);
        CHECK(again[i].score == front[i].score);
        CHECK(again[i].selection == front[i].selection);
    }
}

TEST_CASE("per-period resilience planning") {
    const Scenario scn = synth_linear_scenario(30.0, 2.5, 8, 8.0, 6);
    const SensorLibrary lib = toy_library();
    const std::vector<TimePeriod> periods = time_periods(scn, 5.0);

    ResilientOptions options;
    options.budget_usd = 6200.0;  // strong lidar + about three cheap units
    const ResiliencePlan plan = resilient_plan(scn, lib, options);

    REQUIRE(plan.periods.size() == periods.size());
    CHECK(plan.budget_usd == options.budget_usd);
    CHECK(plan.scenario_name == scn.name);

    for (std::size_t i = 0; i < plan.periods.size(); ++i) {
        const ResiliencePeriod& slot = plan.periods[i];
        CHECK(slot.period == periods[i]);
        // the dominant all-around unit is the worst-case failure everywhere
        CHECK(slot.failed_sensor_id == 0);
        CHECK(!slot.active.contains(slot.failed_sensor_id));
        CHECK(slot.active.total_cost_usd + lib.at(slot.failed_sensor_id).model.cost_usd <=
              options.budget_usd + 1e-9);
        CHECK(slot.score_with_failure ==
              doctest::Approx(evaluate(scn, lib, slot.active, slot.period).logdet)
                  .epsilon(1e-9));
    }

    SUBCASE("the compensating set dominates every affordable single replacement") {
        // greedy's first pick is the best affordable singleton and later picks
        // never lower the score, so the compensating set must beat them all
        for (const ResiliencePeriod& slot : plan.periods) {
            const double residual =
                options.budget_usd - lib.at(slot.failed_sensor_id).model.cost_usd;
            const double empty = evaluate(scn, lib, {}, slot.period).logdet;
            CHECK(slot.score_with_failure >= empty - 1e-9);
            for (const MountedSensor& sensor : lib.entries) {
                if (sensor.id == slot.failed_sensor_id) continue;
                if (sensor.model.cost_usd > residual) continue;
                const double solo =
                    evaluate(scn, lib, Selection::of(lib, {sensor.id}), slot.period).logdet;
                CHECK(slot.score_with_failure >= solo - 1e-9);
            }
        }
    }

    SUBCASE("a budget below every sensor leaves all periods bare") {
        ResilientOptions broke;
        broke.budget_usd = 1.0;
        const ResiliencePlan bare = resilient_plan(scn, lib, broke);
        for (const ResiliencePeriod& slot : bare.periods) {
            CHECK(slot.failed_sensor_id == -1);
            CHECK(slot.active.empty());
            CHECK(slot.score_with_failure ==
                  evaluate(scn, lib, Selection{}, slot.period).logdet);
        }
    }

    SUBCASE("planning twice gives the same plan") {
        const ResiliencePlan again = resilient_plan(scn, lib, options);
        REQUIRE(again.periods.size() == plan.periods.size());
        for (std::size_t i = 0; i < plan.periods.size(); ++i) {
            CHECK(again.periods[i].failed_sensor_id == plan.periods[i].failed_sensor_id);
            CHECK(again.periods[i].active == plan.periods[i].active);
            CHECK(again.periods[i].score_with_failure == plan.periods[i].score_with_failure);
        }
    }

    SUBCASE("invalid options") {
        CHECK_THROWS_AS(resilient_plan(scn, lib, ResilientOptions{0.0, 5.0, {}}),
                        ValidationError);
        CHECK_THROWS_AS(resilient_plan(scn, SensorLibrary{}, options), ValidationError);
    }
}

TEST_CASE("crippled scoring removes exactly one sensor") {
    const Scenario scn = small_scenario();
    const SensorLibrary lib = toy_library();
    const Selection sel = Selection::of(lib, {0, 2, 4});

    const EvalScore intact = evaluate(scn, lib, sel);
    const EvalScore crippled = crippled_score(scn, lib, sel, 0);
    CHECK(crippled.logdet <= intact.logdet + 1e-9);
    CHECK(crippled.logdet ==
          evaluate(scn, lib, Selection::of(lib, {2, 4})).logdet);

    CHECK_THROWS_AS(crippled_score(scn, lib, sel, 1), ValidationError);

    const Selection solo = Selection::of(lib, {1});
    CHECK(crippled_score(scn, lib, solo, 1).logdet ==
          evaluate(scn, lib, Selection{}).logdet);
}
