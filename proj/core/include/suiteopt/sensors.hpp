#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "suiteopt/world.hpp"

namespace suiteopt {

enum class SensorKind { lidar, radar, stereo };

const char* to_string(SensorKind kind);

/// Fixed range noise, independent of distance.
struct ConstantNoise {
    double sigma_range_m = 0.0;

    friend bool operator==(const ConstantNoise&, const ConstantNoise&) = default;
};

/// Depth-dependent stereo range noise: sigma(z) = z^2 * sigma_d / (f * b).
struct StereoDerivedNoise {
    double baseline_m = 0.0;
    double focal_px = 0.0;
    double disparity_sigma_px = 1.0;

    friend bool operator==(const StereoDerivedNoise&, const StereoDerivedNoise&) = default;
};

using NoiseModel = std::variant<ConstantNoise, StereoDerivedNoise>;

struct SensorModel {
    SensorKind kind = SensorKind::lidar;
    double range_m = 0.0;
    double fov_rad = 0.0;            // full angle
    NoiseModel noise;
    double sigma_bearing_rad = 0.0;
    double cost_usd = 0.0;
    std::string label;

    friend bool operator==(const SensorModel&, const SensorModel&) = default;
};

/// Roof (all-around) or one of 12 clock positions. Clock k points at
/// boresight angle -2*pi*k/12 in the vehicle frame: 12 o'clock (k=0) is
/// straight ahead, 3 o'clock is the vehicle's right side.
class Mount {
public:
    static Mount roof() { return Mount(-1); }
    static Mount clock(int k);

    bool is_roof() const { return clock_ < 0; }
    int clock_position() const { return clock_; }
    double boresight_rad() const;

    friend bool operator==(const Mount&, const Mount&) = default;

private:
    explicit Mount(int clock) : clock_(clock) {}
    int clock_ = -1;
};

/// One priced sensor model fixed at one placement; the atomic unit of selection.
struct MountedSensor {
    int id = 0;
    SensorModel model;
    Mount mount = Mount::roof();

    friend bool operator==(const MountedSensor&, const MountedSensor&) = default;
};

struct SensorLibrary {
    std::vector<MountedSensor> entries;  // ids are 0..n-1 in order

    const MountedSensor& at(int id) const;
    std::size_t size() const { return entries.size(); }

    friend bool operator==(const SensorLibrary&, const SensorLibrary&) = default;
};

/// Per-model attribute overrides, keyed by model label.
struct SensorOverride {
    std::optional<double> cost_usd;
    std::optional<double> sigma_range_m;      // constant-noise models only
    std::optional<double> sigma_bearing_rad;
};

struct LibraryConfig {
    double disparity_sigma_px = 1.0;  // stereo pixel disparity error
    std::map<std::string, SensorOverride> overrides;
};

/// The stock 62-entry library: two roof LiDARs plus five directional models
/// at each of the 12 clock positions.
SensorLibrary build_default_library(const LibraryConfig& config = {});

/// Stereo depth accuracy: z^2 * sigma_d / (f * b), in meters.
double stereo_range_sigma(double z_m, double focal_px, double baseline_m,
                          double disparity_sigma_px);

/// True iff the landmark lies inside the sensing cone: within range and
/// within half the field of view of the mounted boresight.
bool visible(const MountedSensor& sensor, const Pose2& pose, const Landmark& landmark);

struct MeasurementSigmas {
    double range_m = 0.0;
    double bearing_rad = 0.0;
};

/// Noise standard deviations for a measurement taken at distance z_m.
MeasurementSigmas measurement_sigmas(const MountedSensor& sensor, double z_m);

void validate_library(const SensorLibrary& library);

SensorLibrary load_library(const std::string& path);
void save_library(const SensorLibrary& library, const std::string& path);

/// Human-readable placement, e.g. "roof" or "6 o'clock" (clock 0 prints as 12).
std::string mount_name(const Mount& mount);

/// "long-range radar @ 2 o'clock" style display used in CLI summaries.
std::string entry_display(const MountedSensor& sensor);

}  // namespace suiteopt
