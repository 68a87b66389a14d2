#pragma once

// EvalReport <-> JSON (lossless round trip).

#include <string>

#include "vin/eval/metrics.hpp"

namespace vin::eval {

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& json_text);

void save_report(const EvalReport& report, const std::string& path);
EvalReport load_report(const std::string& path);

}  // namespace vin::eval
