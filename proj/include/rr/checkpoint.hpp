#pragma once

#include <string>

#include "json.hpp"
#include "rr/params.hpp"

namespace rr {

// Checkpoint file layout: one line of JSON header (format version, dtype,
// parameter names + shapes in header order, caller metadata), a newline,
// then the raw little-endian float64 payloads in header order.
void save_checkpoint(const std::string& path, const ParamStore& params,
                     const nlohmann::json& meta);

struct Checkpoint {
    ParamStore params;
    nlohmann::json meta;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace rr
