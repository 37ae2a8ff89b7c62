#pragma once

#include <string>

#include "fusionspec/inference.hpp"
#include "fusionspec/verify.hpp"

namespace fusionspec::jsonio {

// {"n","p1","p2","alpha","L0","B","seed","theta_of_L":[{"L":..,"theta":..}],
//  "theta_star","L_star","kernel":{"name","sigma"}}
std::string calibration_to_json(const inference::CalibrationTable& table);
inference::CalibrationTable calibration_from_json(const std::string& text);
void write_calibration_file(const std::string& path, const inference::CalibrationTable& t);
inference::CalibrationTable read_calibration_file(const std::string& path);

std::string outcome_to_json(const inference::TestOutcome& outcome);

std::string rigidity_to_json(const verify::RigidityReport& rep);
std::string edge_to_json(const verify::EdgeReport& rep);
std::string inequality_to_json(const verify::InequalityRecord& rec, int violations,
                               int draws);

}  // namespace fusionspec::jsonio
