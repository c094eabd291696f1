#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "pmf/activity.hpp"
#include "pmf/geometry.hpp"

namespace pmf {

/// A kill or turn event on a carrier, at arc distance u from the anchor.
struct CarrierEvent {
    double u = 0.0;
    double t = 0.0;  // reveal time of the event point
    Point p;
    bool kill = false;
    Line turn;       // new line when !kill
};

/// Deterministic per-carrier randomness for the inward constructions.
///
/// A carrier is one side of a line relative to its anchor. Everything that
/// moves along a carrier sees the same kill and turn events, drawn from a
/// stream keyed by (seed, line key, side), so the web and the marker process
/// stay coupled without sharing state.
class CarrierBank {
public:
    CarrierBank(ActivityMeasure act, WindowFamily family, std::uint64_t seed);

    /// Events ordered by decreasing u (the inward direction of travel).
    const std::vector<CarrierEvent>& events(std::uint64_t key, const Line& l, int side);

    /// Key of the line born in the turn event `index` of a carrier.
    static std::uint64_t turn_key(std::uint64_t key, int side, std::size_t index);

private:
    ActivityMeasure act_;
    WindowFamily family_;
    std::uint64_t seed_;
    std::map<std::pair<std::uint64_t, int>, std::vector<CarrierEvent>> cache_;
};

}  // namespace pmf
