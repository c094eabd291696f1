#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmf/activity.hpp"
#include "pmf/estimators.hpp"
#include "pmf/geometry.hpp"
#include "pmf/markers.hpp"
#include "pmf/web_sampler.hpp"

namespace pmf {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Run configuration. The file format is one `key = value` pair per line,
/// `#` starts a comment; lengths are in domain units and angles in radians.
///
///   domain       = disc CX CY R | square X Y SIDE | polygon X1 Y1 X2 Y2 ...
///   family       = homothety [OX OY] | concentric
///   activity     = homogeneous LAMBDA | anisotropic LAMBDA A
///   marker       = PHI X Y          (repeatable; line of angle PHI through (X, Y))
///   stop_rule    = tangency | immediate
///   replicas     = N                (field or line draws)
///   web_replicas = N
///   eps_x, eps_phi = F
///   method       = palm | window
///   placements   = N
///   seed         = N
///   threads      = N
struct RunConfig {
    std::string domain_spec = "disc 0 0 1";
    std::string family_spec = "homothety";
    std::string activity_spec = "homogeneous 1";
    std::vector<std::string> marker_specs;

    ConvexDomain domain = ConvexDomain::disc({0.0, 0.0}, 1.0);
    std::optional<Point> origin;
    bool concentric = false;
    ActivityMeasure activity = ActivityMeasure::homogeneous(1.0);
    MarkerConfig markers;
    StopRule stop_rule = StopRule::tangency;
    std::size_t replicas = 1000;
    std::size_t web_replicas = 1000;
    PhiOptions phi;
    std::uint64_t seed = 1;

    WindowFamily family() const;
    /// Normalised text of the configuration; equal for equivalent files.
    std::string canonical() const;
    /// FNV-1a of canonical(), as 16 hex digits.
    std::string hash() const;
};

/// Parses and validates a configuration. Errors name the source and line.
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

}  // namespace pmf
