#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pmf/activity.hpp"
#include "pmf/arrangement.hpp"
#include "pmf/geometry.hpp"
#include "pmf/markers.hpp"
#include "pmf/web_sampler.hpp"

namespace pmf {

struct EstimateReport {
    std::string method;
    double estimate = 0.0;
    double se = 0.0;
    std::size_t n = 0;
    double eps_x = 0.0;
    double eps_phi = 0.0;
    std::uint64_t seed = 0;
    double seconds = 0.0;
    std::size_t overflow = 0;  // draws refused by a size cap
    std::size_t failures = 0;  // numerically degenerate draws, redrawn
    /// Estimated weight of the line-count strata left out (Palm method).
    double truncation = 0.0;
};

/// Largest random line count drawn by the stratified estimators.
inline constexpr std::size_t kStratumLineCap = 16;

enum class PhiMethod { palm, window };

const char* to_string(PhiMethod m);

struct PhiOptions {
    PhiMethod method = PhiMethod::palm;
    double eps_x = 0.02;
    double eps_phi = 0.02;
    /// Window method: random rigid placements of the marker windows per
    /// field sample. Needs a motion-invariant activity; 0 keeps the markers
    /// where they are.
    std::size_t placements = 0;
    /// Palm method: the auxiliary domain is the marker hull grown by this.
    double margin = 0.01;
    /// Palm method: line-count strata stop once their estimated share drops
    /// below this fraction of the running total.
    double stratum_tol = 1e-4;
    std::size_t line_cap = 18;
    unsigned threads = 1;
};

/// Normalised edge correlation of the marker collection.
///
/// The Palm method adds the marker lines to Poisson lines on a small convex
/// domain D' around the markers and averages the Boltzmann sum over
/// configurations covering the markers, divided by the partition function
/// exp(<<M>>(D')); draws are stratified by the number of Poisson lines. The
/// window method samples fields on the base domain of `f` and counts hits of
/// finite marker windows, normalised by their activity masses.
EstimateReport estimate_phi(const MarkerConfig& mc, const ActivityMeasure& act, const WindowFamily& f,
                            std::size_t n, std::uint64_t seed, const PhiOptions& opt = {});

/// Activity mass of the window of lines within eps_phi in angle of l and
/// passing within eps_x of x.
double window_mass(const ActivityMeasure& act, const Line& l, Point x, double eps_x, double eps_phi);

/// The auxiliary domain used by the Palm method.
ConvexDomain marker_hull(const MarkerConfig& mc, double margin);

EstimateReport estimate_crop_expectation(const MarkerConfig& mc, const ActivityMeasure& act, const WindowFamily& f,
                                         StopRule rule, std::size_t n, std::uint64_t seed, unsigned threads = 1);

struct DualityReport {
    EstimateReport phi;
    EstimateReport crop;
    double difference = 0.0;
    double combined_se = 0.0;
    bool pass = false;
    /// Window method only: estimate at eps/2 and the fitted O(eps) slope.
    std::optional<EstimateReport> phi_half;
    std::optional<double> eps_slope;
};

/// Compares the correlation estimate with the mean crop; passes when the
/// difference is within 3 combined SE and the combined SE is at most
/// `max_se`.
DualityReport verify_duality(const MarkerConfig& mc, const ActivityMeasure& act, const WindowFamily& f,
                             StopRule rule, std::size_t n_field, std::size_t n_web, std::uint64_t seed,
                             const PhiOptions& opt = {}, double max_se = 0.1);

struct PartitionReport {
    EstimateReport sum;
    double target = 0.0;
    double difference = 0.0;
    double overflow_fraction = 0.0;
    bool reliable = true;  // overflow fraction at most 1%
    bool pass = false;
};

/// Monte-Carlo mean of the all-lines partition sum over Poisson line draws
/// against exp(<<M>>(dom)). Draws are stratified by line count; the overflow
/// fraction is the Poisson probability of more than `cap` lines, whose
/// strata are left out.
PartitionReport verify_partition(const ActivityMeasure& act, const ConvexDomain& dom, std::size_t n,
                                 std::uint64_t seed, std::size_t cap = kStratumLineCap, unsigned threads = 1,
                                 double stratum_tol = 1e-4);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace pmf
