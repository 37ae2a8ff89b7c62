#include "fusionspec/jsonio.hpp"

#include <fstream>

#include <json.hpp>

#include "fusionspec/errors.hpp"

namespace fusionspec::jsonio {

using nlohmann::json;

std::string calibration_to_json(const inference::CalibrationTable& t) {
    json j;
    j["n"] = t.n;
    j["p1"] = t.p1;
    j["p2"] = t.p2;
    j["alpha"] = t.alpha;
    j["L0"] = t.L0;
    j["B"] = t.B;
    j["seed"] = t.master_seed;
    json thetas = json::array();
    for (int L = 3; L <= t.L0; ++L) thetas.push_back({{"L", L}, {"theta", t.theta(L)}});
    j["theta_of_L"] = std::move(thetas);
    j["theta_star"] = t.theta_star;
    j["L_star"] = t.L_star;
    j["kernel"] = {{"name", t.kernel_name}, {"sigma", t.kernel_sigma}};
    return j.dump(2) + "\n";
}

inference::CalibrationTable calibration_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw io_error(std::string("calibration JSON parse failure: ") + e.what());
    }
    inference::CalibrationTable t;
    try {
        t.n = j.at("n").get<int>();
        t.p1 = j.at("p1").get<int>();
        t.p2 = j.at("p2").get<int>();
        t.alpha = j.at("alpha").get<double>();
        t.L0 = j.at("L0").get<int>();
        t.B = j.at("B").get<int>();
        t.master_seed = j.at("seed").get<std::uint64_t>();
        t.theta_of_L.assign(static_cast<size_t>(t.L0 - 2), 0.0);
        for (const auto& item : j.at("theta_of_L")) {
            const int L = item.at("L").get<int>();
            if (L < 3 || L > t.L0) throw io_error("calibration JSON: L out of range");
            t.theta_of_L[static_cast<size_t>(L - 3)] = item.at("theta").get<double>();
        }
        t.theta_star = j.at("theta_star").get<double>();
        t.L_star = j.at("L_star").get<int>();
        t.kernel_name = j.at("kernel").at("name").get<std::string>();
        t.kernel_sigma = j.at("kernel").at("sigma").get<double>();
    } catch (const json::exception& e) {
        throw io_error(std::string("calibration JSON missing field: ") + e.what());
    }
    return t;
}

void write_calibration_file(const std::string& path, const inference::CalibrationTable& t) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open for writing: " + path);
    out << calibration_to_json(t);
}

inference::CalibrationTable read_calibration_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open for reading: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return calibration_from_json(text);
}

std::string outcome_to_json(const inference::TestOutcome& o) {
    json j;
    j["statistic"] = {{"L", o.statistic.L},
                      {"value", o.statistic.value},
                      {"spectrum_ref", o.statistic.spectrum_ref}};
    j["reject"] = o.reject;
    j["theta_star"] = o.theta_star;
    j["L_star"] = o.L_star;
    j["significance"] = o.significance;
    return j.dump(2) + "\n";
}

std::string rigidity_to_json(const verify::RigidityReport& rep) {
    json j;
    j["deviations"] = rep.deviations;
    j["band"] = rep.band;
    j["pass_fraction"] = rep.pass_fraction;
    j["median_bulk_deviation"] = rep.median_bulk_deviation;
    j["degree_deviation"] = rep.degree_dev;
    j["degree_deviation_bound"] = rep.degree_dev_bound;
    return j.dump(2) + "\n";
}

std::string edge_to_json(const verify::EdgeReport& rep) {
    json j;
    j["L"] = rep.L;
    j["gaps"] = rep.gaps;
    j["max_gap"] = rep.max_gap;
    j["bound"] = rep.bound;
    j["gamma1"] = rep.gamma1;
    j["lambda1_gap"] = rep.lambda1_gap;
    j["lambda1_bound"] = rep.lambda1_bound;
    j["ad_lambda1_gap"] = rep.ad_lambda1_gap;
    return j.dump(2) + "\n";
}

std::string inequality_to_json(const verify::InequalityRecord& rec, int violations,
                               int draws) {
    json j;
    j["hw_lhs"] = rec.hw_lhs;
    j["hw_rhs"] = rec.hw_rhs;
    j["hw_ok"] = rec.hw_ok;
    j["weyl_ok"] = rec.weyl_ok;
    j["levy"] = rec.levy;
    j["op_norm_diff"] = rec.op_norm_diff;
    j["levy_bound_ok"] = rec.levy_bound_ok;
    j["violations"] = violations;
    j["draws"] = draws;
    return j.dump(2) + "\n";
}

}  // namespace fusionspec::jsonio
