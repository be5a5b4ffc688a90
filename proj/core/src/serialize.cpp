#include "suiteopt/serialize.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "suiteopt/errors.hpp"

namespace suiteopt {

using nlohmann::json;

std::uint64_t fingerprint64(const std::string& canonical) {
    std::uint64_t hash = 14695981039346656037ULL;
    for (unsigned char c : canonical) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

std::string fingerprint_hex(const std::string& canonical) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fingerprint64(canonical)));
    return buf;
}

std::string format_double(double value) {
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, result.ptr);
}

// Dollar amounts are integral in practice; print them without an exponent.
std::string format_money(double value) {
    if (std::isfinite(value) && std::floor(value) == value && std::abs(value) < 1e15) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.0f", value);
        return buf;
    }
    return format_double(value);
}

namespace {

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json sensor_entry_json(const SensorLibrary& library, int id) {
    const MountedSensor& sensor = library.at(id);
    json j;
    j["id"] = sensor.id;
    j["label"] = sensor.model.label;
    j["mount"] = mount_name(sensor.mount);
    j["cost_usd"] = sensor.model.cost_usd;
    return j;
}

std::string ids_field(const std::vector<int>& ids) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i > 0) out += ' ';
        out += std::to_string(ids[i]);
    }
    return out;
}

}  // namespace

std::string score_json(const EvalScore& score, const std::string& fingerprint) {
    json j;
    j["config_fingerprint"] = fingerprint;
    j["logdet"] = score.logdet;
    j["n"] = score.n;
    j["rows"] = score.rows;
    return dump(j);
}

std::string selection_json(const SensorLibrary& library, const Selection& selection,
                           double budget_usd, const std::string& fingerprint) {
    json j;
    j["config_fingerprint"] = fingerprint;
    j["budget_usd"] = budget_usd;
    j["count"] = selection.sensor_ids.size();
    j["total_cost_usd"] = selection.total_cost_usd;
    json sensors = json::array();
    for (int id : selection.sensor_ids) {
        sensors.push_back(sensor_entry_json(library, id));
    }
    j["sensors"] = std::move(sensors);
    return dump(j);
}

std::string trace_json(const SensorLibrary& library, const GreedyTrace& trace,
                       double budget_usd, const std::string& fingerprint) {
    json j;
    j["config_fingerprint"] = fingerprint;
    j["scenario"] = trace.scenario_name;
    j["objective"] = to_string(trace.objective);
    j["budget_usd"] = budget_usd;
    j["baseline"] = trace.baseline;
    json steps = json::array();
    for (const GreedyStep& step : trace.steps) {
        json js = sensor_entry_json(library, step.chosen_id);
        js.erase("id");
        js["chosen_id"] = step.chosen_id;
        js["cumulative_cost_usd"] = step.cumulative_cost_usd;
        js["score"] = step.score;
        js["evaluations"] = step.evaluations;
        steps.push_back(std::move(js));
    }
    j["steps"] = std::move(steps);
    return dump(j);
}

std::string plan_json(const SensorLibrary& library, const ResiliencePlan& plan,
                      const std::string& fingerprint) {
    json j;
    j["config_fingerprint"] = fingerprint;
    j["scenario"] = plan.scenario_name;
    j["budget_usd"] = plan.budget_usd;
    json periods = json::array();
    for (const ResiliencePeriod& p : plan.periods) {
        json jp;
        jp["period"] = {{"index", p.period.index},
                        {"begin", p.period.begin},
                        {"end", p.period.end}};
        jp["failed_sensor_id"] = p.failed_sensor_id;
        if (p.failed_sensor_id >= 0) {
            const MountedSensor& failed = library.at(p.failed_sensor_id);
            jp["failed_label"] = failed.model.label;
            jp["failed_mount"] = mount_name(failed.mount);
        } else {
            jp["failed_label"] = "none";
            jp["failed_mount"] = "";
        }
        jp["active_ids"] = p.active.sensor_ids;
        jp["active_cost_usd"] = p.active.total_cost_usd;
        jp["score_with_failure"] = p.score_with_failure;
        periods.push_back(std::move(jp));
    }
    j["periods"] = std::move(periods);
    return dump(j);
}

std::string report_json(const SolveReport& report, const std::string& fingerprint) {
    json j;
    j["config_fingerprint"] = fingerprint;
    j["seed"] = report.seed;
    j["rmse_pose_m"] = report.rmse_pose_m;
    j["rmse_landmark_m"] = report.rmse_landmark_m;
    json poses = json::array();
    for (const Pose2& p : report.pose_estimates) {
        poses.push_back({{"t", p.t}, {"x", p.x}, {"y", p.y}, {"theta", p.theta}});
    }
    j["pose_estimates"] = std::move(poses);
    json landmarks = json::array();
    for (const Landmark& l : report.landmark_estimates) {
        landmarks.push_back({{"id", l.id}, {"x", l.x}, {"y", l.y}});
    }
    j["landmark_estimates"] = std::move(landmarks);
    return dump(j);
}

std::string trace_csv(const SensorLibrary& library, const GreedyTrace& trace,
                      const std::string& fingerprint) {
    std::string out = "# config_fingerprint: " + fingerprint + "\n";
    out += "step,chosen_id,label,mount,cumulative_cost_usd,score,evaluations\n";
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        const GreedyStep& step = trace.steps[i];
        const MountedSensor& sensor = library.at(step.chosen_id);
        out += std::to_string(i + 1) + ',' + std::to_string(step.chosen_id) + ',' +
               sensor.model.label + ',' + mount_name(sensor.mount) + ',' +
               format_money(step.cumulative_cost_usd) + ',' + format_double(step.score) +
               ',' + std::to_string(step.evaluations) + '\n';
    }
    return out;
}

std::string front_csv(const std::vector<ParetoPoint>& front, const std::string& fingerprint) {
    std::string out = "# config_fingerprint: " + fingerprint + "\n";
    out += "cost_usd,score,score_norm,objective,sensor_ids\n";
    for (const ParetoPoint& point : front) {
        out += format_money(point.cost_usd) + ',' + format_double(point.score) + ',' +
               format_double(point.score_norm) + ',' + to_string(point.objective_tag) + ',' +
               ids_field(point.selection.sensor_ids) + '\n';
    }
    return out;
}

std::string grid_csv(const SensorLibrary& library, const ResiliencePlan& plan,
                     const std::string& fingerprint) {
    std::string out = "# config_fingerprint: " + fingerprint + "\n";
    out += "period,pose_begin,pose_end";
    for (const MountedSensor& sensor : library.entries) {
        out += ",s" + std::to_string(sensor.id);
    }
    out += '\n';
    for (const ResiliencePeriod& p : plan.periods) {
        out += std::to_string(p.period.index) + ',' + std::to_string(p.period.begin) + ',' +
               std::to_string(p.period.end);
        for (const MountedSensor& sensor : library.entries) {
            if (sensor.id == p.failed_sensor_id) {
                out += ",failed";
            } else if (p.active.contains(sensor.id)) {
                out += ",active";
            } else {
                out += ",off";
            }
        }
        out += '\n';
    }
    return out;
}

std::string front_svg(const std::vector<ParetoPoint>& pool,
                      const std::vector<ParetoPoint>& front, const std::string& fingerprint) {
    constexpr double kWidth = 720.0;
    constexpr double kHeight = 520.0;
    constexpr double kLeft = 80.0;
    constexpr double kRight = 24.0;
    constexpr double kTop = 24.0;
    constexpr double kBottom = 60.0;
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;

    double max_cost = 0.0;
    for (const ParetoPoint& p : pool) max_cost = std::max(max_cost, p.cost_usd);
    for (const ParetoPoint& p : front) max_cost = std::max(max_cost, p.cost_usd);
    if (max_cost <= 0.0) max_cost = 1.0;
    const double x_span = max_cost * 1.05;
    const double y_span = 1.05;

    const auto x_px = [&](double cost) { return kLeft + cost / x_span * plot_w; };
    const auto y_px = [&](double norm) { return kTop + plot_h - norm / y_span * plot_h; };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<!-- config_fingerprint: " << fingerprint << " -->\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_double(kWidth)
        << "\" height=\"" << format_double(kHeight) << "\" viewBox=\"0 0 "
        << format_double(kWidth) << " " << format_double(kHeight) << "\">\n";
    svg << "  <rect width=\"" << format_double(kWidth) << "\" height=\""
        << format_double(kHeight) << "\" fill=\"white\"/>\n";

    // axes and ticks
    svg << "  <g stroke=\"black\" stroke-width=\"1\">\n";
    svg << "    <line x1=\"" << format_double(kLeft) << "\" y1=\"" << format_double(kTop)
        << "\" x2=\"" << format_double(kLeft) << "\" y2=\""
        << format_double(kTop + plot_h) << "\"/>\n";
    svg << "    <line x1=\"" << format_double(kLeft) << "\" y1=\""
        << format_double(kTop + plot_h) << "\" x2=\"" << format_double(kLeft + plot_w)
        << "\" y2=\"" << format_double(kTop + plot_h) << "\"/>\n";
    svg << "  </g>\n";

    svg << "  <g font-family=\"sans-serif\" font-size=\"12\" fill=\"black\">\n";
    for (int tick = 0; tick <= 5; ++tick) {
        const double cost = max_cost * tick / 5.0;
        const double x = x_px(cost);
        svg << "    <line x1=\"" << format_double(x) << "\" y1=\""
            << format_double(kTop + plot_h) << "\" x2=\"" << format_double(x) << "\" y2=\""
            << format_double(kTop + plot_h + 5) << "\" stroke=\"black\"/>\n";
        svg << "    <text x=\"" << format_double(x) << "\" y=\""
            << format_double(kTop + plot_h + 20) << "\" text-anchor=\"middle\">"
            << format_money(std::round(cost)) << "</text>\n";
    }
    for (int tick = 0; tick <= 5; ++tick) {
        const double norm = tick / 5.0;
        const double y = y_px(norm);
        svg << "    <line x1=\"" << format_double(kLeft - 5) << "\" y1=\""
            << format_double(y) << "\" x2=\"" << format_double(kLeft) << "\" y2=\""
            << format_double(y) << "\" stroke=\"black\"/>\n";
        svg << "    <text x=\"" << format_double(kLeft - 9) << "\" y=\""
            << format_double(y + 4) << "\" text-anchor=\"end\">" << format_double(norm)
            << "</text>\n";
    }
    svg << "    <text x=\"" << format_double(kLeft + plot_w / 2) << "\" y=\""
        << format_double(kHeight - 16) << "\" text-anchor=\"middle\">cost [USD]</text>\n";
    svg << "    <text x=\"18\" y=\"" << format_double(kTop + plot_h / 2)
        << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << format_double(kTop + plot_h / 2)
        << ")\">normalized performance</text>\n";
    svg << "  </g>\n";

    // pooled architectures, colored by objective
    svg << "  <g>\n";
    for (const ParetoPoint& p : pool) {
        const char* fill = p.objective_tag == Objective::uniform ? "#3b6fb6" : "#3d9b62";
        svg << "    <circle cx=\"" << format_double(x_px(p.cost_usd)) << "\" cy=\""
            << format_double(y_px(p.score_norm)) << "\" r=\"3.5\" fill=\"" << fill
            << "\"/>\n";
    }
    svg << "  </g>\n";

    // the front as a dashed polyline with open markers
    if (!front.empty()) {
        svg << "  <polyline fill=\"none\" stroke=\"#c23b3b\" stroke-width=\"1.5\" "
               "stroke-dasharray=\"6 4\" points=\"";
        for (std::size_t i = 0; i < front.size(); ++i) {
            if (i > 0) svg << ' ';
            svg << format_double(x_px(front[i].cost_usd)) << ','
                << format_double(y_px(front[i].score_norm));
        }
        svg << "\"/>\n";
        for (const ParetoPoint& p : front) {
            svg << "  <circle cx=\"" << format_double(x_px(p.cost_usd)) << "\" cy=\""
                << format_double(y_px(p.score_norm))
                << "\" r=\"5\" fill=\"none\" stroke=\"#c23b3b\" stroke-width=\"1.5\"/>\n";
        }
    }

    // legend
    svg << "  <g font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "    <circle cx=\"" << format_double(kLeft + 14) << "\" cy=\""
        << format_double(kTop + 12) << "\" r=\"3.5\" fill=\"#3b6fb6\"/>\n";
    svg << "    <text x=\"" << format_double(kLeft + 24) << "\" y=\""
        << format_double(kTop + 16) << "\">uniform greedy</text>\n";
    svg << "    <circle cx=\"" << format_double(kLeft + 14) << "\" cy=\""
        << format_double(kTop + 30) << "\" r=\"3.5\" fill=\"#3d9b62\"/>\n";
    svg << "    <text x=\"" << format_double(kLeft + 24) << "\" y=\""
        << format_double(kTop + 34) << "\">cost-benefit greedy</text>\n";
    svg << "    <line x1=\"" << format_double(kLeft + 6) << "\" y1=\""
        << format_double(kTop + 48) << "\" x2=\"" << format_double(kLeft + 22) << "\" y2=\""
        << format_double(kTop + 48)
        << "\" stroke=\"#c23b3b\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>\n";
    svg << "    <text x=\"" << format_double(kLeft + 28) << "\" y=\""
        << format_double(kTop + 52) << "\">Pareto front</text>\n";
    svg << "  </g>\n";

    svg << "</svg>\n";
    return svg.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot write file '" + path + "'");
    }
    out << content;
    if (!out) {
        throw ValidationError("failed while writing file '" + path + "'");
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open file '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace suiteopt
