#pragma once

#include <cstdint>
#include <vector>

#include "diskpatch/kernel.hpp"

namespace diskpatch {

// w at the nodes, one list per patch, aligned with the curve nodes.
using TangentField = std::vector<std::vector<Vec2>>;

// Envelope pair for the strip scenario; inactive unless seeded.
struct Envelope {
    bool active = false;
    double a = 0.0;
    double b = 0.0;
    bool operator==(const Envelope&) const = default;
};

struct SimState {
    double t = 0.0;
    PatchSet ps;
    TangentField w;
    std::int64_t step_index = 0;
    // boundary tracers, advected with the nodes and kept on the disk boundary
    std::vector<Point> markers;
    Envelope env;
    // set when the last step had to remove more than 1% of |w| normal to the curve
    bool projection_flag = false;

    bool operator==(const SimState&) const = default;
};

// Throws InvalidPatch if curve and field sizes disagree or w vanishes somewhere.
void check_state(const SimState& s);

}  // namespace diskpatch
