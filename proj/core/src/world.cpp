#include "suiteopt/world.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "suiteopt/errors.hpp"
#include "suiteopt/rng.hpp"

namespace suiteopt {

namespace {

using nlohmann::json;

double get_finite_number(const json& obj, const char* key, const std::string& ctx) {
    if (!obj.contains(key)) {
        throw ValidationError(ctx + ": missing field '" + key + "'");
    }
    const json& v = obj.at(key);
    if (!v.is_number()) {
        throw ValidationError(ctx + "." + key + ": expected a number");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
        throw ValidationError(ctx + "." + key + ": number is not finite");
    }
    return d;
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

}  // namespace

void validate_scenario(const Scenario& scenario) {
    if (scenario.poses.size() < 2) {
        throw ValidationError("scenario '" + scenario.name + "': needs at least 2 poses, has " +
                              std::to_string(scenario.poses.size()));
    }
    if (scenario.landmarks.empty()) {
        throw ValidationError("scenario '" + scenario.name + "': needs at least 1 landmark");
    }
    for (std::size_t i = 1; i < scenario.poses.size(); ++i) {
        if (!(scenario.poses[i].t > scenario.poses[i - 1].t)) {
            throw ValidationError("poses[" + std::to_string(i) +
                                  "].t: timestamps must be strictly increasing (" +
                                  fmt_double(scenario.poses[i].t) + " after " +
                                  fmt_double(scenario.poses[i - 1].t) + ")");
        }
    }
    for (std::size_t i = 0; i < scenario.poses.size(); ++i) {
        const Pose2& p = scenario.poses[i];
        if (!std::isfinite(p.t) || !std::isfinite(p.x) || !std::isfinite(p.y) ||
            !std::isfinite(p.theta)) {
            throw ValidationError("poses[" + std::to_string(i) + "]: non-finite value");
        }
        if (!(p.theta > -M_PI && p.theta <= M_PI)) {
            throw ValidationError("poses[" + std::to_string(i) + "].theta: not normalized to (-pi, pi]");
        }
    }
    std::unordered_set<int> seen_ids;
    for (std::size_t i = 0; i < scenario.landmarks.size(); ++i) {
        const Landmark& l = scenario.landmarks[i];
        if (l.id < 0) {
            throw ValidationError("landmarks[" + std::to_string(i) + "].id: negative id " +
                                  std::to_string(l.id));
        }
        if (!std::isfinite(l.x) || !std::isfinite(l.y)) {
            throw ValidationError("landmarks[" + std::to_string(i) + "]: non-finite value");
        }
        if (!seen_ids.insert(l.id).second) {
            throw ValidationError("landmarks[" + std::to_string(i) + "]: duplicate id " +
                                  std::to_string(l.id));
        }
    }
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open scenario file '" + path + "'");
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(path + ": " + e.what());
    }
    if (!j.is_object()) {
        throw ValidationError(path + ": top level must be a JSON object");
    }

    Scenario scenario;
    if (!j.contains("name") || !j.at("name").is_string()) {
        throw ValidationError(path + ": missing string field 'name'");
    }
    scenario.name = j.at("name").get<std::string>();

    if (!j.contains("poses") || !j.at("poses").is_array()) {
        throw ValidationError(path + ": missing array field 'poses'");
    }
    std::size_t i = 0;
    for (const json& jp : j.at("poses")) {
        const std::string ctx = "poses[" + std::to_string(i) + "]";
        if (!jp.is_object()) throw ValidationError(ctx + ": expected an object");
        Pose2 p;
        p.t = get_finite_number(jp, "t", ctx);
        p.x = get_finite_number(jp, "x", ctx);
        p.y = get_finite_number(jp, "y", ctx);
        p.theta = wrap_angle(get_finite_number(jp, "theta", ctx));
        scenario.poses.push_back(p);
        ++i;
    }

    if (!j.contains("landmarks") || !j.at("landmarks").is_array()) {
        throw ValidationError(path + ": missing array field 'landmarks'");
    }
    i = 0;
    for (const json& jl : j.at("landmarks")) {
        const std::string ctx = "landmarks[" + std::to_string(i) + "]";
        if (!jl.is_object()) throw ValidationError(ctx + ": expected an object");
        Landmark l;
        const double id = get_finite_number(jl, "id", ctx);
        if (id != std::floor(id)) {
            throw ValidationError(ctx + ".id: expected an integer");
        }
        l.id = static_cast<int>(id);
        l.x = get_finite_number(jl, "x", ctx);
        l.y = get_finite_number(jl, "y", ctx);
        scenario.landmarks.push_back(l);
        ++i;
    }

    validate_scenario(scenario);
    return scenario;
}

void save_scenario(const Scenario& scenario, const std::string& path,
                   const std::string& fingerprint) {
    validate_scenario(scenario);
    json j;
    j["name"] = scenario.name;
    if (!fingerprint.empty()) {
        j["config_fingerprint"] = fingerprint;
    }
    json poses = json::array();
    for (const Pose2& p : scenario.poses) {
        poses.push_back({{"t", p.t}, {"x", p.x}, {"y", p.y}, {"theta", p.theta}});
    }
    j["poses"] = std::move(poses);
    json landmarks = json::array();
    for (const Landmark& l : scenario.landmarks) {
        landmarks.push_back({{"id", l.id}, {"x", l.x}, {"y", l.y}});
    }
    j["landmarks"] = std::move(landmarks);

    std::ofstream out(path);
    if (!out) {
        throw ValidationError("cannot write scenario file '" + path + "'");
    }
    out << j.dump(2) << "\n";
}

Scenario synth_linear_scenario(double length_m, double pose_spacing_m,
                               int landmark_count, double corridor_halfwidth_m,
                               std::uint64_t seed) {
    if (length_m <= 0.0 || pose_spacing_m <= 0.0 || corridor_halfwidth_m <= 0.0) {
        throw ValidationError("synth_linear_scenario: dimensions must be positive");
    }
    if (landmark_count < 1) {
        throw ValidationError("synth_linear_scenario: landmark_count must be >= 1");
    }
    const int pose_count = static_cast<int>(std::floor(length_m / pose_spacing_m)) + 1;
    if (pose_count < 2) {
        throw ValidationError("synth_linear_scenario: length shorter than pose spacing");
    }

    Scenario scenario;
    {
        std::ostringstream name;
        name << "linear(len=" << fmt_double(length_m) << ",spacing=" << fmt_double(pose_spacing_m)
             << ",landmarks=" << landmark_count << ",corridor=" << fmt_double(corridor_halfwidth_m)
             << ",seed=" << seed << ")";
        scenario.name = name.str();
    }

    // Slowly varying curvature gives a gentle S-shaped suburban route.
    const double curvature_amp = 0.003;                       // rad per meter
    const double wavelength = std::max(length_m / 2.0, 40.0); // meters
    scenario.poses.reserve(pose_count);
    double x = 0.0, y = 0.0, theta = 0.0;
    for (int i = 0; i < pose_count; ++i) {
        Pose2 p;
        p.t = static_cast<double>(i);  // 1 Hz
        p.x = x;
        p.y = y;
        p.theta = wrap_angle(theta);
        scenario.poses.push_back(p);
        const double s = i * pose_spacing_m;
        const double curvature = curvature_amp * std::sin(2.0 * M_PI * s / wavelength);
        theta += curvature * pose_spacing_m;
        x += pose_spacing_m * std::cos(theta);
        y += pose_spacing_m * std::sin(theta);
    }

    Rng rng(seed);
    scenario.landmarks.reserve(landmark_count);
    for (int i = 0; i < landmark_count; ++i) {
        // Anchor on the pose polyline, then offset laterally inside the corridor.
        const double s = rng.uniform() * (pose_count - 1);
        const auto seg = std::min<std::size_t>(static_cast<std::size_t>(s), pose_count - 2);
        const double frac = s - static_cast<double>(seg);
        const Pose2& a = scenario.poses[seg];
        const Pose2& b = scenario.poses[seg + 1];
        const double bx = a.x + frac * (b.x - a.x);
        const double by = a.y + frac * (b.y - a.y);
        double nx = -(b.y - a.y), ny = b.x - a.x;
        const double norm = std::hypot(nx, ny);
        nx /= norm;
        ny /= norm;
        const double offset = rng.uniform(-corridor_halfwidth_m, corridor_halfwidth_m);
        Landmark l;
        l.id = i;
        l.x = bx + offset * nx;
        l.y = by + offset * ny;
        scenario.landmarks.push_back(l);
    }

    validate_scenario(scenario);
    return scenario;
}

namespace {

// Rounded-rectangle circuit, counter-clockwise, parameterized by arc length.
struct Circuit {
    double width;
    double height;
    double corner_radius;

    double straight_w() const { return width - 2.0 * corner_radius; }
    double straight_h() const { return height - 2.0 * corner_radius; }
    double corner_len() const { return 0.5 * M_PI * corner_radius; }
    double perimeter() const {
        return 2.0 * straight_w() + 2.0 * straight_h() + 4.0 * corner_len();
    }

    // Position and tangent heading at arc length s (s may exceed one lap).
    void at(double s, double& x, double& y, double& theta) const {
        s = std::fmod(s, perimeter());
        if (s < 0.0) s += perimeter();
        const double r = corner_radius;
        const double sw = straight_w();
        const double sh = straight_h();
        const double cl = corner_len();

        if (s < sw) {  // bottom edge, heading +x
            x = r + s; y = 0.0; theta = 0.0;
            return;
        }
        s -= sw;
        if (s < cl) {  // bottom-right corner
            const double a = -M_PI / 2.0 + s / r;
            x = width - r + r * std::cos(a); y = r + r * std::sin(a);
            theta = a + M_PI / 2.0;
            return;
        }
        s -= cl;
        if (s < sh) {  // right edge, heading +y
            x = width; y = r + s; theta = M_PI / 2.0;
            return;
        }
        s -= sh;
        if (s < cl) {  // top-right corner
            const double a = s / r;
            x = width - r + r * std::cos(a); y = height - r + r * std::sin(a);
            theta = a + M_PI / 2.0;
            return;
        }
        s -= cl;
        if (s < sw) {  // top edge, heading -x
            x = width - r - s; y = height; theta = M_PI;
            return;
        }
        s -= sw;
        if (s < cl) {  // top-left corner
            const double a = M_PI / 2.0 + s / r;
            x = r + r * std::cos(a); y = height - r + r * std::sin(a);
            theta = a + M_PI / 2.0;
            return;
        }
        s -= cl;
        if (s < sh) {  // left edge, heading -y
            x = 0.0; y = height - r - s; theta = -M_PI / 2.0;
            return;
        }
        s -= sh;
        // bottom-left corner
        const double a = M_PI + s / r;
        x = r + r * std::cos(a); y = r + r * std::sin(a);
        theta = a + M_PI / 2.0;
    }
};

}  // namespace

Scenario synth_loop_scenario(int loop_count, int landmark_count,
                             double mean_landmark_range_m, std::uint64_t seed) {
    if (loop_count < 1) {
        throw ValidationError("synth_loop_scenario: loop_count must be >= 1");
    }
    if (landmark_count < 1) {
        throw ValidationError("synth_loop_scenario: landmark_count must be >= 1");
    }
    if (mean_landmark_range_m <= 0.0) {
        throw ValidationError("synth_loop_scenario: mean_landmark_range_m must be positive");
    }

    const double range = mean_landmark_range_m;
    Circuit circuit;
    circuit.width = std::max(7.0 * range, 120.0);
    circuit.height = std::max(4.0 * range, 70.0);
    circuit.corner_radius = std::min(circuit.width, circuit.height) / 8.0;

    const double pose_spacing = 2.5;  // meters, 1 Hz
    const double total_len = loop_count * circuit.perimeter();
    const int pose_count = static_cast<int>(std::floor(total_len / pose_spacing)) + 1;

    Scenario scenario;
    {
        std::ostringstream name;
        name << "loop(loops=" << loop_count << ",landmarks=" << landmark_count
             << ",range=" << fmt_double(range) << ",seed=" << seed << ")";
        scenario.name = name.str();
    }
    scenario.poses.reserve(pose_count);
    for (int i = 0; i < pose_count; ++i) {
        Pose2 p;
        p.t = static_cast<double>(i);
        circuit.at(i * pose_spacing, p.x, p.y, p.theta);
        p.theta = wrap_angle(p.theta);
        scenario.poses.push_back(p);
    }

    Rng rng(seed);
    scenario.landmarks.reserve(landmark_count);
    for (int i = 0; i < landmark_count; ++i) {
        double ax, ay, atheta;
        circuit.at(rng.uniform() * circuit.perimeter(), ax, ay, atheta);
        const double phi = rng.uniform(0.0, 2.0 * M_PI);
        const double d = range * rng.uniform(0.5, 1.5);
        Landmark l;
        l.id = i;
        l.x = ax + d * std::cos(phi);
        l.y = ay + d * std::sin(phi);
        scenario.landmarks.push_back(l);
    }

    validate_scenario(scenario);
    return scenario;
}

std::vector<TimePeriod> time_periods(const Scenario& scenario, double period_s) {
    if (period_s <= 0.0) {
        throw ValidationError("time_periods: period_s must be positive");
    }
    validate_scenario(scenario);

    const double t0 = scenario.poses.front().t;
    std::vector<TimePeriod> periods;
    long current_bucket = -1;
    for (std::size_t i = 0; i < scenario.poses.size(); ++i) {
        const long bucket = static_cast<long>(std::floor((scenario.poses[i].t - t0) / period_s));
        if (bucket != current_bucket) {
            if (!periods.empty()) periods.back().end = i;
            TimePeriod p;
            p.index = static_cast<int>(periods.size());
            p.begin = i;
            periods.push_back(p);
            current_bucket = bucket;
        }
    }
    periods.back().end = scenario.poses.size();
    return periods;
}

}  // namespace suiteopt
