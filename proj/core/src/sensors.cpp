#include "suiteopt/sensors.hpp"

#include <cmath>
#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "suiteopt/errors.hpp"

namespace suiteopt {

const char* to_string(SensorKind kind) {
    switch (kind) {
        case SensorKind::lidar: return "lidar";
        case SensorKind::radar: return "radar";
        case SensorKind::stereo: return "stereo";
    }
    return "?";
}

Mount Mount::clock(int k) {
    if (k < 0 || k > 11) {
        throw ValidationError("clock position must be in 0..11, got " + std::to_string(k));
    }
    return Mount(k);
}

double Mount::boresight_rad() const {
    if (is_roof()) return 0.0;
    return wrap_angle(-2.0 * M_PI * clock_ / 12.0);
}

const MountedSensor& SensorLibrary::at(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= entries.size()) {
        throw ValidationError("sensor id " + std::to_string(id) + " not in library of size " +
                              std::to_string(entries.size()));
    }
    return entries[static_cast<std::size_t>(id)];
}

namespace {

void validate_model(const SensorModel& model) {
    const std::string ctx = "sensor model '" + model.label + "'";
    if (!(model.range_m > 0.0)) throw ValidationError(ctx + ": range must be positive");
    if (!(model.fov_rad > 0.0) || model.fov_rad > 2.0 * M_PI + 1e-12) {
        throw ValidationError(ctx + ": fov must be in (0, 2pi]");
    }
    if (!(model.cost_usd > 0.0)) throw ValidationError(ctx + ": cost must be positive");
    if (!(model.sigma_bearing_rad > 0.0)) {
        throw ValidationError(ctx + ": bearing sigma must be positive");
    }
    if (const auto* c = std::get_if<ConstantNoise>(&model.noise)) {
        if (!(c->sigma_range_m > 0.0)) {
            throw ValidationError(ctx + ": range sigma must be positive");
        }
    } else {
        const auto& s = std::get<StereoDerivedNoise>(model.noise);
        if (!(s.baseline_m > 0.0) || !(s.focal_px > 0.0) || !(s.disparity_sigma_px > 0.0)) {
            throw ValidationError(ctx + ": stereo parameters must be positive");
        }
    }
}

SensorModel apply_override(SensorModel model, const LibraryConfig& config) {
    const auto it = config.overrides.find(model.label);
    if (it == config.overrides.end()) return model;
    const SensorOverride& o = it->second;
    if (o.cost_usd) model.cost_usd = *o.cost_usd;
    if (o.sigma_range_m) {
        auto* c = std::get_if<ConstantNoise>(&model.noise);
        if (!c) {
            throw ValidationError("override for '" + model.label +
                                  "': sigma_range_m does not apply to stereo models");
        }
        c->sigma_range_m = *o.sigma_range_m;
    }
    if (o.sigma_bearing_rad) model.sigma_bearing_rad = *o.sigma_bearing_rad;
    validate_model(model);
    return model;
}

SensorModel constant_model(SensorKind kind, const char* label, double range, double fov,
                           double sigma_range, double sigma_bearing, double cost) {
    SensorModel m;
    m.kind = kind;
    m.label = label;
    m.range_m = range;
    m.fov_rad = fov;
    m.noise = ConstantNoise{sigma_range};
    m.sigma_bearing_rad = sigma_bearing;
    m.cost_usd = cost;
    return m;
}

SensorModel stereo_model(const char* label, double range, double fov, double baseline,
                         double focal, double disparity_sigma, double cost) {
    SensorModel m;
    m.kind = SensorKind::stereo;
    m.label = label;
    m.range_m = range;
    m.fov_rad = fov;
    m.noise = StereoDerivedNoise{baseline, focal, disparity_sigma};
    m.sigma_bearing_rad = disparity_sigma / focal;
    m.cost_usd = cost;
    return m;
}

}  // namespace

SensorLibrary build_default_library(const LibraryConfig& config) {
    if (!(config.disparity_sigma_px > 0.0)) {
        throw ValidationError("library config: disparity_sigma_px must be positive");
    }
    const double sd = config.disparity_sigma_px;

    const SensorModel roof_models[] = {
        constant_model(SensorKind::lidar, "long-range-lidar", 120.0, 2.0 * M_PI, 0.084, 0.00110,
                       100000.0),
        constant_model(SensorKind::lidar, "mid-range-lidar", 100.0, 2.0 * M_PI, 0.03, 0.00524,
                       4000.0),
    };
    const SensorModel directional_models[] = {
        constant_model(SensorKind::radar, "mid-range-radar", 160.0, 0.1, 0.04, 0.00175, 2830.0),
        constant_model(SensorKind::radar, "long-range-radar", 250.0, 0.0698, 0.013, 0.00175,
                       1493.0),
        stereo_model("wide-angle-stereo", 50.0, M_PI / 2.0, 0.5371, 721.5377, sd, 2990.0),
        stereo_model("hd2k-stereo", 20.0, 1.33, 0.120, 1400.0, sd, 449.0),
        stereo_model("low-res-stereo", 20.0, 1.52, 0.120, 350.0, sd, 449.0),
    };

    SensorLibrary library;
    library.entries.reserve(62);
    int id = 0;
    for (const SensorModel& model : roof_models) {
        library.entries.push_back({id++, apply_override(model, config), Mount::roof()});
    }
    for (const SensorModel& model : directional_models) {
        const SensorModel resolved = apply_override(model, config);
        for (int k = 0; k < 12; ++k) {
            library.entries.push_back({id++, resolved, Mount::clock(k)});
        }
    }
    validate_library(library);
    return library;
}

double stereo_range_sigma(double z_m, double focal_px, double baseline_m,
                          double disparity_sigma_px) {
    if (z_m < 0.0) {
        throw ValidationError("stereo_range_sigma: distance must be non-negative");
    }
    if (!(focal_px > 0.0) || !(baseline_m > 0.0) || !(disparity_sigma_px > 0.0)) {
        throw ValidationError("stereo_range_sigma: camera parameters must be positive");
    }
    return z_m * z_m * disparity_sigma_px / (focal_px * baseline_m);
}

bool visible(const MountedSensor& sensor, const Pose2& pose, const Landmark& landmark) {
    const double dx = landmark.x - pose.x;
    const double dy = landmark.y - pose.y;
    const double dist = std::hypot(dx, dy);
    if (dist > sensor.model.range_m) return false;
    if (sensor.model.fov_rad >= 2.0 * M_PI) return true;
    const double bearing_world = std::atan2(dy, dx);
    const double relative = wrap_angle(bearing_world - pose.theta - sensor.mount.boresight_rad());
    return std::abs(relative) <= sensor.model.fov_rad / 2.0;
}

MeasurementSigmas measurement_sigmas(const MountedSensor& sensor, double z_m) {
    if (z_m < 0.0) {
        throw ValidationError("measurement_sigmas: distance must be non-negative");
    }
    if (const auto* c = std::get_if<ConstantNoise>(&sensor.model.noise)) {
        return {c->sigma_range_m, sensor.model.sigma_bearing_rad};
    }
    const auto& s = std::get<StereoDerivedNoise>(sensor.model.noise);
    if (z_m == 0.0) {
        throw ValidationError("measurement_sigmas: zero distance gives a singular stereo "
                              "range sigma for '" + sensor.model.label + "'");
    }
    return {stereo_range_sigma(z_m, s.focal_px, s.baseline_m, s.disparity_sigma_px),
            s.disparity_sigma_px / s.focal_px};
}

void validate_library(const SensorLibrary& library) {
    for (std::size_t i = 0; i < library.entries.size(); ++i) {
        const MountedSensor& e = library.entries[i];
        if (e.id != static_cast<int>(i)) {
            throw ValidationError("library entry " + std::to_string(i) + ": id " +
                                  std::to_string(e.id) + " out of order");
        }
        validate_model(e.model);
        if (e.mount.is_roof() && e.model.kind != SensorKind::lidar) {
            throw ValidationError("library entry " + std::to_string(i) +
                                  ": roof mount is reserved for lidars");
        }
        if (!e.mount.is_roof() && e.model.kind == SensorKind::lidar) {
            throw ValidationError("library entry " + std::to_string(i) +
                                  ": lidars mount on the roof");
        }
    }
}

namespace {

using nlohmann::json;

json noise_to_json(const NoiseModel& noise) {
    if (const auto* c = std::get_if<ConstantNoise>(&noise)) {
        return {{"type", "constant"}, {"sigma_range_m", c->sigma_range_m}};
    }
    const auto& s = std::get<StereoDerivedNoise>(noise);
    return {{"type", "stereo"},
            {"baseline_m", s.baseline_m},
            {"focal_px", s.focal_px},
            {"disparity_sigma_px", s.disparity_sigma_px}};
}

NoiseModel noise_from_json(const json& j, const std::string& ctx) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "constant") {
        return ConstantNoise{j.at("sigma_range_m").get<double>()};
    }
    if (type == "stereo") {
        return StereoDerivedNoise{j.at("baseline_m").get<double>(),
                                  j.at("focal_px").get<double>(),
                                  j.at("disparity_sigma_px").get<double>()};
    }
    throw ValidationError(ctx + ": unknown noise type '" + type + "'");
}

SensorKind kind_from_string(const std::string& s, const std::string& ctx) {
    if (s == "lidar") return SensorKind::lidar;
    if (s == "radar") return SensorKind::radar;
    if (s == "stereo") return SensorKind::stereo;
    throw ValidationError(ctx + ": unknown sensor kind '" + s + "'");
}

}  // namespace

SensorLibrary load_library(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open library file '" + path + "'");
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(path + ": " + e.what());
    }
    if (!j.is_array()) {
        throw ValidationError(path + ": library file must be a JSON array");
    }

    SensorLibrary library;
    int id = 0;
    for (const json& je : j) {
        const std::string ctx = path + ": entry " + std::to_string(id);
        try {
            MountedSensor e;
            e.id = id;
            e.model.label = je.at("label").get<std::string>();
            e.model.kind = kind_from_string(je.at("kind").get<std::string>(), ctx);
            e.model.range_m = je.at("range_m").get<double>();
            e.model.fov_rad = je.at("fov_rad").get<double>();
            e.model.noise = noise_from_json(je.at("noise"), ctx);
            e.model.sigma_bearing_rad = je.at("sigma_bearing_rad").get<double>();
            e.model.cost_usd = je.at("cost_usd").get<double>();
            const json& jm = je.at("mount");
            if (jm.is_string() && jm.get<std::string>() == "roof") {
                e.mount = Mount::roof();
            } else if (jm.is_object() && jm.contains("clock")) {
                e.mount = Mount::clock(jm.at("clock").get<int>());
            } else {
                throw ValidationError(ctx + ": mount must be \"roof\" or {\"clock\": k}");
            }
            library.entries.push_back(std::move(e));
        } catch (const json::exception& e) {
            throw ValidationError(ctx + ": " + e.what());
        }
        ++id;
    }
    validate_library(library);
    return library;
}

void save_library(const SensorLibrary& library, const std::string& path) {
    validate_library(library);
    json j = json::array();
    for (const MountedSensor& e : library.entries) {
        json je;
        je["label"] = e.model.label;
        je["kind"] = to_string(e.model.kind);
        je["range_m"] = e.model.range_m;
        je["fov_rad"] = e.model.fov_rad;
        je["noise"] = noise_to_json(e.model.noise);
        je["sigma_bearing_rad"] = e.model.sigma_bearing_rad;
        je["cost_usd"] = e.model.cost_usd;
        if (e.mount.is_roof()) {
            je["mount"] = "roof";
        } else {
            je["mount"] = {{"clock", e.mount.clock_position()}};
        }
        j.push_back(std::move(je));
    }
    std::ofstream out(path);
    if (!out) {
        throw ValidationError("cannot write library file '" + path + "'");
    }
    out << j.dump(2) << "\n";
}

std::string mount_name(const Mount& mount) {
    if (mount.is_roof()) return "roof";
    const int k = mount.clock_position();
    return std::to_string(k == 0 ? 12 : k) + " o'clock";
}

std::string entry_display(const MountedSensor& sensor) {
    return sensor.model.label + " @ " + mount_name(sensor.mount);
}

}  // namespace suiteopt
