#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Sparse>

#include "suiteopt/selection_types.hpp"
#include "suiteopt/sensors.hpp"
#include "suiteopt/world.hpp"

namespace suiteopt {

/// Factor-graph noise configuration. Defaults anchor the first pose tightly,
/// chain consecutive poses with relative-pose odometry, and put a weak prior
/// on every landmark coordinate so the information matrix stays positive
/// definite (and the system dimension comparable) for every selection.
struct GraphConfig {
    double odom_sigma_xy_m = 0.05;
    double odom_sigma_theta_rad = 0.005;
    double prior_sigma_xy_m = 1e-3;
    double prior_sigma_theta_rad = 1e-4;
    double landmark_regularization_precision = 1e-6;
};

/// Maps window poses and landmarks to column offsets: 3 columns per pose
/// (x, y, theta), then 2 per landmark (x, y).
struct VariableOrdering {
    std::size_t pose_begin = 0;
    std::size_t pose_count = 0;
    std::vector<int> landmark_ids;               // column order
    std::unordered_map<int, int> landmark_cols;  // id -> column offset
    int n = 0;

    int pose_col(std::size_t pose_index) const;
    int landmark_col(int landmark_id) const;
    std::string describe_column(int col) const;
};

enum class FactorKind { prior, odometry, measurement, regularizer };

/// Bookkeeping for one contiguous block of whitened rows.
struct RowBlock {
    FactorKind kind = FactorKind::prior;
    int row_begin = 0;
    int row_count = 0;
    int sensor_id = -1;    // measurement blocks
    std::size_t pose_index = 0;
    int landmark_id = -1;  // measurement and regularizer blocks
};

/// Whitened sparse least-squares system for one scenario + selection.
struct LinearSystem {
    Eigen::SparseMatrix<double> A;
    Eigen::VectorXd b;
    VariableOrdering ordering;
    std::vector<RowBlock> factor_rows;
};

struct EvalScore {
    double logdet = 0.0;
    int n = 0;
    int rows = 0;
};

struct SolveReport {
    std::vector<Pose2> pose_estimates;
    std::vector<Landmark> landmark_estimates;
    double rmse_pose_m = 0.0;
    double rmse_landmark_m = 0.0;
    std::uint64_t seed = 0;
};

/// Assemble the whitened system: first-pose prior, odometry between
/// consecutive included poses, one range-bearing block per visible
/// (pose, landmark, sensor) triple, and weak landmark regularizers.
/// Linearized at ground truth; b is zero.
LinearSystem build_system(const Scenario& scenario, const SensorLibrary& library,
                          const Selection& selection,
                          const std::optional<TimePeriod>& window = std::nullopt,
                          const GraphConfig& config = {});

/// Full-route system whose measurement rows follow the plan's per-period
/// active sets (the assumed-failed sensor of each period contributes nothing).
LinearSystem build_plan_system(const Scenario& scenario, const SensorLibrary& library,
                               const ResiliencePlan& plan, const GraphConfig& config = {});

/// log det(A^T A) = 2 * sum_i log(R_ii), computed from a symmetric
/// factorization of the information matrix.
EvalScore log_det_information(const LinearSystem& system);

/// The selection's information score on a scenario (or one window of it).
EvalScore evaluate(const Scenario& scenario, const SensorLibrary& library,
                   const Selection& selection,
                   const std::optional<TimePeriod>& window = std::nullopt,
                   const GraphConfig& config = {});

/// Scoring engine for selection search. Caches the base information matrix
/// (prior + odometry + regularizers) and one information matrix per sensor,
/// so a candidate suite scores as logdet of a sum of cached matrices instead
/// of a full rebuild. score() is const and safe to call concurrently.
class SuiteEvaluator {
   public:
    SuiteEvaluator(const Scenario& scenario, const SensorLibrary& library,
                   const std::optional<TimePeriod>& window = std::nullopt,
                   const GraphConfig& config = {});

    double baseline() const { return baseline_; }
    double score(const std::vector<int>& sensor_ids) const;
    EvalScore score_details(const std::vector<int>& sensor_ids) const;

   private:
    struct SensorInfo {
        Eigen::SparseMatrix<double> info;
        int rows = 0;
    };

    VariableOrdering ordering_;
    Eigen::SparseMatrix<double> base_info_;
    int base_rows_ = 0;
    std::unordered_map<int, SensorInfo> per_sensor_;
    double baseline_ = 0.0;
};

/// Sample seeded measurement noise, solve the whitened system, and report
/// pose and landmark RMSE against ground truth. `failed` sensors are removed
/// from the selection before measurements are generated.
SolveReport simulate_and_solve(const Scenario& scenario, const SensorLibrary& library,
                               const Selection& selection, const std::vector<int>& failed,
                               std::uint64_t seed, double noise_scale = 1.0,
                               const GraphConfig& config = {});

/// As simulate_and_solve, but sensors follow the resilience plan's per-period
/// activation over the full route.
SolveReport simulate_plan(const Scenario& scenario, const SensorLibrary& library,
                          const ResiliencePlan& plan, std::uint64_t seed,
                          double noise_scale = 1.0, const GraphConfig& config = {});

}  // namespace suiteopt
