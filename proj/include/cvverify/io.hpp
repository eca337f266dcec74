#pragma once
// JSON and CSV formats

#include "cvverify/gaussian.hpp"
#include "cvverify/measure.hpp"
#include "cvverify/protocols.hpp"

#include <json.hpp>

namespace cvv::io {

using json = nlohmann::json;

json to_json(const CoreState& s);
json to_json(const DensityOp& r);
json to_json(const GaussianCircuit& c);
json to_json(const EstimatorConfig& c);
json to_json(const WitnessReport& w);
json to_json(const Plan& p);
json to_json(const FidelityEstimate& f);

CoreState core_from_json(const json& j);
DensityOp density_from_json(const json& j);
GaussianCircuit circuit_from_json(const json& j, int modes_hint = 0);

// exact round trip: 17 significant digits
std::string batch_to_csv(const SampleBatch& b);
SampleBatch batch_from_csv(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);
json read_json(const std::string& path);

std::string fmt_double(double v);

}  // namespace cvv::io
