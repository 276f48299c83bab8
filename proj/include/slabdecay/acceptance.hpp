#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace slabdecay {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  nlohmann::ordered_json data;
};

struct AcceptanceOptions {
  bool flip_gamma43 = false;  // mutation hook, restored afterwards
  double truncate_T = 0.0;    // > 0: cap the final time of the long-time criteria
  int jobs = 1;
  std::uint64_t seed = 12345;
  std::vector<int> only;      // empty: every criterion
};

std::vector<CriterionResult> run_acceptance(
    const AcceptanceOptions& opt,
    const std::function<void(const CriterionResult&)>& on_result = {});

// "PASS  3  cross-validation ...: detail"
std::string format_line(const CriterionResult& r);
// Pass/fail record without timings, so reruns are byte-identical.
nlohmann::ordered_json acceptance_to_json(const std::vector<CriterionResult>& results);

}  // namespace slabdecay
