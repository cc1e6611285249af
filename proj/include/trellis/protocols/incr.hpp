#pragma once

#include <cstdint>
#include <string>

#include "trellis/model.hpp"
#include "trellis/refinement.hpp"

namespace trellis::incr {

inline constexpr const char* kNode = "n0";
inline constexpr const char* kLabel = "s";

/// Allocates a counter labelled "s", forks a second incrementer and runs one
/// itself. Each incrementer loops load; cas(n, n+1) forever.
ConfPtr setup();

/// Naturals with successor.
Sts<std::int64_t> model();

Coupling<std::int64_t> coupling();

/// Before the labelled allocation the model is all zeros; afterwards the
/// heap value at the location tracks the model at every index where it is
/// allocated, and the last values agree.
bool xi(const ExecTrace& ex, const ModelTrace<std::int64_t>& m);

}  // namespace trellis::incr
