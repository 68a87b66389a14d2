#include "vin/eval/report.hpp"

#include <fstream>

#include <json.hpp>

namespace vin::eval {

using nlohmann::json;

std::string report_to_json(const EvalReport& r) {
    json j;
    j["variant"] = r.variant;
    j["dataset_dir"] = r.dataset_dir;
    j["horizon"] = r.horizon;
    j["sequences"] = r.sequences;
    j["test_loss"] = r.test_loss;
    if (r.inl) j["inverse_normalized_loss"] = *r.inl;
    j["by_timestep"] = json::array();
    for (const CurvePoint& p : r.by_timestep)
        j["by_timestep"].push_back({{"t", p.timestep},
                                    {"mean", p.mean},
                                    {"ci_lo", p.ci_lo},
                                    {"ci_hi", p.ci_hi}});
    j["by_distance"] = json::array();
    for (const DistanceBin& b : r.by_distance)
        j["by_distance"].push_back(
            {{"lo", b.lo}, {"hi", b.hi}, {"mean", b.mean}, {"count", b.count}});
    return j.dump(2);
}

EvalReport report_from_json(const std::string& text) {
    const json j = json::parse(text);
    EvalReport r;
    r.variant = j.at("variant").get<std::string>();
    r.dataset_dir = j.at("dataset_dir").get<std::string>();
    r.horizon = j.at("horizon").get<int>();
    r.sequences = j.at("sequences").get<int>();
    r.test_loss = j.at("test_loss").get<double>();
    if (j.contains("inverse_normalized_loss"))
        r.inl = j.at("inverse_normalized_loss").get<double>();
    for (const json& p : j.at("by_timestep")) {
        CurvePoint cp;
        cp.timestep = p.at("t").get<int>();
        cp.mean = p.at("mean").get<double>();
        cp.ci_lo = p.at("ci_lo").get<double>();
        cp.ci_hi = p.at("ci_hi").get<double>();
        r.by_timestep.push_back(cp);
    }
    for (const json& b : j.at("by_distance")) {
        DistanceBin db;
        db.lo = b.at("lo").get<double>();
        db.hi = b.at("hi").get<double>();
        db.mean = b.at("mean").get<double>();
        db.count = b.at("count").get<long long>();
        r.by_distance.push_back(db);
    }
    return r;
}

void save_report(const EvalReport& report, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("report: cannot write " + path);
    os << report_to_json(report) << "\n";
    if (!os) throw std::runtime_error("report: short write to " + path);
}

EvalReport load_report(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("report: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(is)), {});
    return report_from_json(text);
}

}  // namespace vin::eval
