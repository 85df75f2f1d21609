#pragma once

#include <json.hpp>

#include "vhc/classify.hpp"
#include "vhc/dynamics.hpp"
#include "vhc/lagrangian.hpp"
#include "vhc/model_file.hpp"

namespace vhc {

using Json = nlohmann::ordered_json;

// Machine-readable report, schema "vhc-report/1". Deterministic for a fixed
// model file and options: key order is fixed and doubles serialize with the
// shortest round-trip representation.
Json report_header(const ModelFile& mf, const std::string& model_path);

Json classification_block(const Classification& cls);
Json lagrangian_block(const LagrangianHandle& h);
Json limit_cycle_block(const LimitCycleResult& lc);
Json orbit_block(const OrbitClass& oc);

}  // namespace vhc
