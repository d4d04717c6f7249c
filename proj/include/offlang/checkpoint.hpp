#pragma once

#include <string>

#include "offlang/models.hpp"

namespace offlang::checkpoint {

// Container layout: magic "OLCK", u32 format version, u64 header length,
// then a JSON header (kind, config, vocab, label set, parameter names and
// shapes) followed by each parameter's raw 64-bit values in header order.
// All integers and doubles are little-endian.
void save(const models::ModelState& state, const std::string& path);

models::ModelState load(const std::string& path);

}  // namespace offlang::checkpoint
