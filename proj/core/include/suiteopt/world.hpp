#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace suiteopt {

/// Wrap an angle to (-pi, pi]. Values already in range pass through unchanged.
inline double wrap_angle(double a) {
    if (a > -M_PI && a <= M_PI) return a;
    double r = std::remainder(a, 2.0 * M_PI);  // [-pi, pi]
    if (r <= -M_PI) r += 2.0 * M_PI;
    return r;
}

/// Timestamped 2D vehicle pose in the world frame.
struct Pose2 {
    double t = 0.0;      // seconds
    double x = 0.0;      // meters
    double y = 0.0;      // meters
    double theta = 0.0;  // radians, in (-pi, pi]

    friend bool operator==(const Pose2&, const Pose2&) = default;
};

struct Landmark {
    int id = 0;
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Landmark&, const Landmark&) = default;
};

/// Trajectory plus landmark set; the world an evaluation runs against.
struct Scenario {
    std::string name;
    std::vector<Pose2> poses;        // timestamps strictly increasing
    std::vector<Landmark> landmarks; // ids unique

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Contiguous half-open pose-index interval [begin, end).
struct TimePeriod {
    int index = 0;
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const { return end - begin; }

    friend bool operator==(const TimePeriod&, const TimePeriod&) = default;
};

/// Throws ValidationError if any Scenario invariant is violated.
void validate_scenario(const Scenario& scenario);

/// Load a scenario from its JSON file format. Errors carry field context.
Scenario load_scenario(const std::string& path);

/// Write a scenario as JSON; load_scenario(save) round-trips exactly. A
/// non-empty fingerprint is stored alongside (and ignored on load).
void save_scenario(const Scenario& scenario, const std::string& path,
                   const std::string& fingerprint = "");

/// Gently curving forward route with landmarks scattered in a corridor
/// around it, so most sit ahead of or behind the vehicle at close range.
Scenario synth_linear_scenario(double length_m, double pose_spacing_m,
                               int landmark_count, double corridor_halfwidth_m,
                               std::uint64_t seed);

/// Rounded-rectangle circuit traversed loop_count times; landmarks placed
/// isotropically around the route at a controlled mean distance.
Scenario synth_loop_scenario(int loop_count, int landmark_count,
                             double mean_landmark_range_m, std::uint64_t seed);

/// Partition pose indices into timestamp buckets of width period_s.
/// Empty buckets merge into their predecessor; the last may be shorter.
std::vector<TimePeriod> time_periods(const Scenario& scenario, double period_s);

}  // namespace suiteopt
