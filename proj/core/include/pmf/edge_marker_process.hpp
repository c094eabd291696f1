#pragma once

#include <cstdint>

#include "pmf/web_sampler.hpp"

namespace pmf {

/// Signed count of the empty marker configurations left by the edge-marker
/// process, run on the carrier randomness of `seed`. Under the immediate
/// rule the separation instants are read from `schedule` (the co-generated
/// web); when null the web is sampled here.
std::int64_t signed_marker_terminal(const ActivityMeasure& act, const WindowFamily& f, const MarkerConfig& mc,
                                    StopRule rule, std::uint64_t seed, const PolygonalWeb* schedule = nullptr);

inline constexpr std::size_t kMarkerStateCap = std::size_t{1} << 20;

}  // namespace pmf
