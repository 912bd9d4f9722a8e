#pragma once

#include <array>
#include <cstdint>

namespace clustersync {

/// Integration settings (slow-time units). dt must not exceed a quarter of
/// the shortest effective dwell epsilon * min dwell so no phase is skipped.
struct SimConfig {
    double dt = 1e-3;
    double horizon = 10.0;
    double epsilon = 1.0;  // mirrors SwitchingSignal::epsilon
    std::array<double, 2> init_range{-10.0, 10.0};
    std::uint64_t seed = 0;
    int record_stride = 1;
};

}  // namespace clustersync
