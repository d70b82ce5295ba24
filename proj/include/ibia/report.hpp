#pragma once

// JSON rendering of estimates. -inf log values are written as null next to
// a boolean flag, since JSON has no infinity.

#include "json.hpp"

#include "ibia/driver.hpp"

namespace ibia {

const char* to_string(Heuristic h);
const char* to_string(EvictionPolicy p);
const char* to_string(Grouping g);

nlohmann::json options_json(const EstimateOptions& options);

// Deterministic for fixed inputs unless `include_timing` adds wall time.
nlohmann::json estimate_json(const PrEstimate& est, const EstimateOptions& options,
                             bool include_timing = false);

}  // namespace ibia
