#include "suiteopt/slamgraph.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseCholesky>

#include "suiteopt/errors.hpp"
#include "suiteopt/rng.hpp"

namespace suiteopt {

int VariableOrdering::pose_col(std::size_t pose_index) const {
    if (pose_index < pose_begin || pose_index >= pose_begin + pose_count) {
        throw ValidationError("pose index " + std::to_string(pose_index) +
                              " outside the included window");
    }
    return static_cast<int>(3 * (pose_index - pose_begin));
}

int VariableOrdering::landmark_col(int landmark_id) const {
    const auto it = landmark_cols.find(landmark_id);
    if (it == landmark_cols.end()) {
        throw ValidationError("landmark id " + std::to_string(landmark_id) + " has no column");
    }
    return it->second;
}

std::string VariableOrdering::describe_column(int col) const {
    const int pose_cols = static_cast<int>(3 * pose_count);
    if (col >= 0 && col < pose_cols) {
        static const char* comp[] = {"x", "y", "theta"};
        return "pose " + std::to_string(pose_begin + static_cast<std::size_t>(col / 3)) + " (" +
               comp[col % 3] + ")";
    }
    const int lm_index = (col - pose_cols) / 2;
    if (col >= pose_cols && lm_index < static_cast<int>(landmark_ids.size())) {
        return "landmark " + std::to_string(landmark_ids[static_cast<std::size_t>(lm_index)]) +
               ((col - pose_cols) % 2 == 0 ? " (x)" : " (y)");
    }
    return "column " + std::to_string(col);
}

namespace {

// Per-period active selection over a contiguous pose range.
struct ScheduleEntry {
    std::size_t begin = 0;
    std::size_t end = 0;
    const Selection* active = nullptr;
};

constexpr double kMinMeasurementRange = 1e-9;  // a landmark at the sensor origin carries no geometry

// Whitened range-bearing Jacobian rows for one (pose, landmark, sensor)
// observation. cp/cl are the pose and landmark column offsets.
void emit_measurement_rows(double dx, double dy, double dist, int cp, int cl,
                           const MeasurementSigmas& sigmas, int& row,
                           std::vector<Eigen::Triplet<double>>& triplets) {
    const double q = dx * dx + dy * dy;
    const double wr = 1.0 / sigmas.range_m;
    const double wb = 1.0 / sigmas.bearing_rad;
    // range row
    triplets.emplace_back(row, cp + 0, -dx / dist * wr);
    triplets.emplace_back(row, cp + 1, -dy / dist * wr);
    triplets.emplace_back(row, cl + 0, dx / dist * wr);
    triplets.emplace_back(row, cl + 1, dy / dist * wr);
    ++row;
    // bearing row
    triplets.emplace_back(row, cp + 0, dy / q * wb);
    triplets.emplace_back(row, cp + 1, -dx / q * wb);
    triplets.emplace_back(row, cp + 2, -wb);
    triplets.emplace_back(row, cl + 0, -dy / q * wb);
    triplets.emplace_back(row, cl + 1, dx / q * wb);
    ++row;
}

LinearSystem assemble(const Scenario& scenario, const SensorLibrary& library,
                      const std::vector<ScheduleEntry>& schedule, const GraphConfig& config) {
    validate_scenario(scenario);
    if (schedule.empty()) {
        throw ValidationError("build_system: empty scenario window");
    }
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const ScheduleEntry& e = schedule[i];
        if (e.begin >= e.end) {
            throw ValidationError("build_system: empty scenario window");
        }
        if (e.end > scenario.poses.size()) {
            throw ValidationError("build_system: window exceeds pose count");
        }
        if (i > 0 && e.begin != schedule[i - 1].end) {
            throw ValidationError("build_system: schedule periods must be contiguous");
        }
        for (int id : e.active->sensor_ids) {
            library.at(id);  // throws on unknown ids
        }
    }

    const std::size_t window_begin = schedule.front().begin;
    const std::size_t window_end = schedule.back().end;

    LinearSystem system;
    VariableOrdering& ordering = system.ordering;
    ordering.pose_begin = window_begin;
    ordering.pose_count = window_end - window_begin;
    ordering.landmark_ids.reserve(scenario.landmarks.size());
    int col = static_cast<int>(3 * ordering.pose_count);
    for (const Landmark& l : scenario.landmarks) {
        ordering.landmark_ids.push_back(l.id);
        ordering.landmark_cols.emplace(l.id, col);
        col += 2;
    }
    ordering.n = col;

    std::vector<Eigen::Triplet<double>> triplets;
    int row = 0;
    auto open_block = [&](FactorKind kind, int sensor_id, std::size_t pose_index,
                          int landmark_id) {
        RowBlock block;
        block.kind = kind;
        block.row_begin = row;
        block.sensor_id = sensor_id;
        block.pose_index = pose_index;
        block.landmark_id = landmark_id;
        return block;
    };

    // (a) gauge prior on the first included pose
    {
        RowBlock block = open_block(FactorKind::prior, -1, window_begin, -1);
        const int c = ordering.pose_col(window_begin);
        triplets.emplace_back(row++, c + 0, 1.0 / config.prior_sigma_xy_m);
        triplets.emplace_back(row++, c + 1, 1.0 / config.prior_sigma_xy_m);
        triplets.emplace_back(row++, c + 2, 1.0 / config.prior_sigma_theta_rad);
        block.row_count = row - block.row_begin;
        system.factor_rows.push_back(block);
    }

    // (b) relative-pose odometry between consecutive included poses,
    // linearized at ground truth
    for (std::size_t i = window_begin; i + 1 < window_end; ++i) {
        const Pose2& pi = scenario.poses[i];
        const Pose2& pj = scenario.poses[i + 1];
        const double c = std::cos(pi.theta);
        const double s = std::sin(pi.theta);
        const double dx = pj.x - pi.x;
        const double dy = pj.y - pi.y;
        const int ci = ordering.pose_col(i);
        const int cj = ordering.pose_col(i + 1);
        const double wxy = 1.0 / config.odom_sigma_xy_m;
        const double wth = 1.0 / config.odom_sigma_theta_rad;

        RowBlock block = open_block(FactorKind::odometry, -1, i, -1);
        // h1 = c*dx + s*dy (forward component in frame i)
        triplets.emplace_back(row, ci + 0, -c * wxy);
        triplets.emplace_back(row, ci + 1, -s * wxy);
        triplets.emplace_back(row, ci + 2, (-s * dx + c * dy) * wxy);
        triplets.emplace_back(row, cj + 0, c * wxy);
        triplets.emplace_back(row, cj + 1, s * wxy);
        ++row;
        // h2 = -s*dx + c*dy (lateral component)
        triplets.emplace_back(row, ci + 0, s * wxy);
        triplets.emplace_back(row, ci + 1, -c * wxy);
        triplets.emplace_back(row, ci + 2, (-c * dx - s * dy) * wxy);
        triplets.emplace_back(row, cj + 0, -s * wxy);
        triplets.emplace_back(row, cj + 1, c * wxy);
        ++row;
        // h3 = theta_j - theta_i
        triplets.emplace_back(row, ci + 2, -wth);
        triplets.emplace_back(row, cj + 2, wth);
        ++row;
        block.row_count = row - block.row_begin;
        system.factor_rows.push_back(block);
    }

    // (c) range-bearing blocks for every visible (pose, landmark, sensor) triple
    for (const ScheduleEntry& entry : schedule) {
        for (std::size_t i = entry.begin; i < entry.end; ++i) {
            const Pose2& pose = scenario.poses[i];
            const int cp = ordering.pose_col(i);
            for (const Landmark& landmark : scenario.landmarks) {
                const double dx = landmark.x - pose.x;
                const double dy = landmark.y - pose.y;
                const double q = dx * dx + dy * dy;
                const double dist = std::sqrt(q);
                if (dist < kMinMeasurementRange) continue;
                const int cl = ordering.landmark_col(landmark.id);
                for (int sensor_id : entry.active->sensor_ids) {
                    const MountedSensor& sensor = library.at(sensor_id);
                    if (!visible(sensor, pose, landmark)) continue;
                    const MeasurementSigmas sigmas = measurement_sigmas(sensor, dist);
                    RowBlock block =
                        open_block(FactorKind::measurement, sensor_id, i, landmark.id);
                    emit_measurement_rows(dx, dy, dist, cp, cl, sigmas, row, triplets);
                    block.row_count = row - block.row_begin;
                    system.factor_rows.push_back(block);
                }
            }
        }
    }

    // (d) weak landmark regularizers keep the system positive definite and
    // its dimension identical across selections
    const double reg_weight = std::sqrt(config.landmark_regularization_precision);
    for (const Landmark& landmark : scenario.landmarks) {
        RowBlock block = open_block(FactorKind::regularizer, -1, window_begin, landmark.id);
        const int cl = ordering.landmark_col(landmark.id);
        triplets.emplace_back(row++, cl + 0, reg_weight);
        triplets.emplace_back(row++, cl + 1, reg_weight);
        block.row_count = row - block.row_begin;
        system.factor_rows.push_back(block);
    }

    system.A.resize(row, ordering.n);
    system.A.setFromTriplets(triplets.begin(), triplets.end());
    system.A.makeCompressed();
    system.b = Eigen::VectorXd::Zero(row);
    return system;
}

std::vector<ScheduleEntry> single_window_schedule(const Scenario& scenario,
                                                  const Selection& selection,
                                                  const std::optional<TimePeriod>& window) {
    ScheduleEntry entry;
    entry.begin = window ? window->begin : 0;
    entry.end = window ? window->end : scenario.poses.size();
    entry.active = &selection;
    return {entry};
}

std::vector<ScheduleEntry> plan_schedule(const Scenario& scenario, const ResiliencePlan& plan) {
    if (plan.periods.empty()) {
        throw ValidationError("resilience plan has no periods");
    }
    std::vector<ScheduleEntry> schedule;
    schedule.reserve(plan.periods.size());
    for (const ResiliencePeriod& p : plan.periods) {
        schedule.push_back({p.period.begin, p.period.end, &p.active});
    }
    if (schedule.front().begin != 0 || schedule.back().end != scenario.poses.size()) {
        throw ValidationError("resilience plan does not cover the full route");
    }
    return schedule;
}

using SparseLdlt = Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>;

// Factorize an information matrix, throwing a SingularSystemError that names
// the weakest column when a pivot is not strictly positive.
void factorize_info_matrix(const Eigen::SparseMatrix<double>& info,
                           const VariableOrdering& ordering, SparseLdlt& ldlt) {
    ldlt.compute(info);

    bool ok = ldlt.info() == Eigen::Success;
    if (ok) {
        const auto& d = ldlt.vectorD();
        for (Eigen::Index i = 0; i < d.size(); ++i) {
            if (!(d[i] > 0.0) || !std::isfinite(d[i])) {
                ok = false;
                break;
            }
        }
    }
    if (!ok) {
        int worst_col = 0;
        double worst = std::numeric_limits<double>::infinity();
        const Eigen::VectorXd diag = info.diagonal();
        for (Eigen::Index i = 0; i < diag.size(); ++i) {
            if (diag[i] < worst) {
                worst = diag[i];
                worst_col = static_cast<int>(i);
            }
        }
        throw SingularSystemError("system is rank deficient near " +
                                  ordering.describe_column(worst_col) +
                                  " (information diagonal " + std::to_string(worst) + ")");
    }
}

void factorize_information(const LinearSystem& system, SparseLdlt& ldlt,
                           Eigen::SparseMatrix<double>& info) {
    info = Eigen::SparseMatrix<double>(system.A.transpose() * system.A);
    factorize_info_matrix(info, system.ordering, ldlt);
}

double logdet_from_ldlt(const SparseLdlt& ldlt) {
    const auto& d = ldlt.vectorD();
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        logdet += std::log(d[i]);
    }
    return logdet;
}

}  // namespace

LinearSystem build_system(const Scenario& scenario, const SensorLibrary& library,
                          const Selection& selection, const std::optional<TimePeriod>& window,
                          const GraphConfig& config) {
    return assemble(scenario, library, single_window_schedule(scenario, selection, window),
                    config);
}

LinearSystem build_plan_system(const Scenario& scenario, const SensorLibrary& library,
                               const ResiliencePlan& plan, const GraphConfig& config) {
    return assemble(scenario, library, plan_schedule(scenario, plan), config);
}

EvalScore log_det_information(const LinearSystem& system) {
    SparseLdlt ldlt;
    Eigen::SparseMatrix<double> info;
    factorize_information(system, ldlt, info);

    EvalScore score;
    score.logdet = logdet_from_ldlt(ldlt);
    score.n = static_cast<int>(system.A.cols());
    score.rows = static_cast<int>(system.A.rows());
    return score;
}

EvalScore evaluate(const Scenario& scenario, const SensorLibrary& library,
                   const Selection& selection, const std::optional<TimePeriod>& window,
                   const GraphConfig& config) {
    return log_det_information(build_system(scenario, library, selection, window, config));
}

namespace {

SolveReport solve_with_noise(const Scenario& scenario, LinearSystem system, std::uint64_t seed,
                             double noise_scale) {
    // Whitened rows have unit noise, so each sampled residual is standard
    // normal. Prior and regularizer rows keep their zero right-hand side.
    Rng rng(seed);
    for (const RowBlock& block : system.factor_rows) {
        if (block.kind != FactorKind::odometry && block.kind != FactorKind::measurement) {
            continue;
        }
        for (int r = block.row_begin; r < block.row_begin + block.row_count; ++r) {
            system.b[r] = noise_scale * rng.normal();
        }
    }

    SparseLdlt ldlt;
    Eigen::SparseMatrix<double> info;
    factorize_information(system, ldlt, info);
    const Eigen::VectorXd rhs = system.A.transpose() * system.b;
    const Eigen::VectorXd delta = ldlt.solve(rhs);

    SolveReport report;
    report.seed = seed;
    const VariableOrdering& ordering = system.ordering;

    double pose_sq = 0.0;
    report.pose_estimates.reserve(ordering.pose_count);
    for (std::size_t i = ordering.pose_begin; i < ordering.pose_begin + ordering.pose_count;
         ++i) {
        const int c = ordering.pose_col(i);
        const Pose2& gt = scenario.poses[i];
        Pose2 est;
        est.t = gt.t;
        est.x = gt.x + delta[c + 0];
        est.y = gt.y + delta[c + 1];
        est.theta = wrap_angle(gt.theta + delta[c + 2]);
        report.pose_estimates.push_back(est);
        pose_sq += delta[c + 0] * delta[c + 0] + delta[c + 1] * delta[c + 1];
    }
    report.rmse_pose_m = std::sqrt(pose_sq / static_cast<double>(ordering.pose_count));

    double lm_sq = 0.0;
    report.landmark_estimates.reserve(scenario.landmarks.size());
    for (const Landmark& gt : scenario.landmarks) {
        const int c = ordering.landmark_col(gt.id);
        Landmark est;
        est.id = gt.id;
        est.x = gt.x + delta[c + 0];
        est.y = gt.y + delta[c + 1];
        report.landmark_estimates.push_back(est);
        lm_sq += delta[c + 0] * delta[c + 0] + delta[c + 1] * delta[c + 1];
    }
    report.rmse_landmark_m = std::sqrt(lm_sq / static_cast<double>(scenario.landmarks.size()));
    return report;
}

}  // namespace

SolveReport simulate_and_solve(const Scenario& scenario, const SensorLibrary& library,
                               const Selection& selection, const std::vector<int>& failed,
                               std::uint64_t seed, double noise_scale,
                               const GraphConfig& config) {
    for (int id : failed) {
        library.at(id);
    }
    std::vector<int> active_ids;
    for (int id : selection.sensor_ids) {
        if (std::find(failed.begin(), failed.end(), id) == failed.end()) {
            active_ids.push_back(id);
        }
    }
    const Selection active = Selection::of(library, active_ids);
    LinearSystem system = build_system(scenario, library, active, std::nullopt, config);
    return solve_with_noise(scenario, std::move(system), seed, noise_scale);
}

SolveReport simulate_plan(const Scenario& scenario, const SensorLibrary& library,
                          const ResiliencePlan& plan, std::uint64_t seed, double noise_scale,
                          const GraphConfig& config) {
    LinearSystem system = build_plan_system(scenario, library, plan, config);
    return solve_with_noise(scenario, std::move(system), seed, noise_scale);
}

SuiteEvaluator::SuiteEvaluator(const Scenario& scenario, const SensorLibrary& library,
                               const std::optional<TimePeriod>& window,
                               const GraphConfig& config) {
    const Selection empty;
    LinearSystem base = build_system(scenario, library, empty, window, config);
    ordering_ = base.ordering;
    base_rows_ = static_cast<int>(base.A.rows());
    base_info_ = Eigen::SparseMatrix<double>(base.A.transpose() * base.A);

    const std::size_t begin = ordering_.pose_begin;
    const std::size_t end = begin + ordering_.pose_count;
    for (const MountedSensor& sensor : library.entries) {
        std::vector<Eigen::Triplet<double>> triplets;
        int row = 0;
        for (std::size_t i = begin; i < end; ++i) {
            const Pose2& pose = scenario.poses[i];
            const int cp = ordering_.pose_col(i);
            for (const Landmark& landmark : scenario.landmarks) {
                const double dx = landmark.x - pose.x;
                const double dy = landmark.y - pose.y;
                const double dist = std::sqrt(dx * dx + dy * dy);
                if (dist < kMinMeasurementRange) continue;
                if (!visible(sensor, pose, landmark)) continue;
                emit_measurement_rows(dx, dy, dist, cp, ordering_.landmark_col(landmark.id),
                                      measurement_sigmas(sensor, dist), row, triplets);
            }
        }
        Eigen::SparseMatrix<double> rows_matrix(row, ordering_.n);
        rows_matrix.setFromTriplets(triplets.begin(), triplets.end());
        SensorInfo entry;
        entry.info = Eigen::SparseMatrix<double>(rows_matrix.transpose() * rows_matrix);
        entry.rows = row;
        per_sensor_.emplace(sensor.id, std::move(entry));
    }

    SparseLdlt ldlt;
    factorize_info_matrix(base_info_, ordering_, ldlt);
    baseline_ = logdet_from_ldlt(ldlt);
}

double SuiteEvaluator::score(const std::vector<int>& sensor_ids) const {
    return score_details(sensor_ids).logdet;
}

EvalScore SuiteEvaluator::score_details(const std::vector<int>& sensor_ids) const {
    // Summation in ascending id order makes the score a function of the set,
    // not of acquisition order.
    std::vector<int> sorted = sensor_ids;
    std::sort(sorted.begin(), sorted.end());
    Eigen::SparseMatrix<double> info = base_info_;
    int rows = base_rows_;
    for (int id : sorted) {
        const auto it = per_sensor_.find(id);
        if (it == per_sensor_.end()) {
            throw ValidationError("unknown sensor id " + std::to_string(id));
        }
        info += it->second.info;
        rows += it->second.rows;
    }
    SparseLdlt ldlt;
    factorize_info_matrix(info, ordering_, ldlt);
    EvalScore score;
    score.logdet = logdet_from_ldlt(ldlt);
    score.n = ordering_.n;
    score.rows = rows;
    return score;
}

}  // namespace suiteopt
