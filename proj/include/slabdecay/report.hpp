#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slabdecay/dispersion.hpp"
#include "slabdecay/stokes1d.hpp"
#include "slabdecay/synthesis.hpp"

namespace slabdecay {

using ojson = nlohmann::ordered_json;

std::string sha256_hex(const std::string& bytes);

// '#'-prefixed config and hash lines, then the CSV body (header row first).
std::string stamp_csv(const ojson& config, const std::string& body);
// {"config", "content_sha256", "result"}; the hash covers the compact dump of result.
std::string stamp_json(const ojson& config, const ojson& result);

void write_output(const std::string& dir, const std::string& name, const std::string& content);

ojson to_json(const FitRecord& f);
ojson to_json(const RateFit& f);
ojson to_json(const DispersionResult& r);
ojson to_json(const SynthesisResult& r);

}  // namespace slabdecay
