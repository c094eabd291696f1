#pragma once

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "pmf/field_sampler.hpp"
#include "pmf/web_sampler.hpp"

namespace pmf {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Line-oriented text records, one typed record per line, reals at 12
/// significant digits. Writing a parsed file reproduces it byte for byte.
void write_field(std::ostream& out, const FieldSample& s);
FieldSample read_field(std::istream& in);

/// Stroke records carry root, parent, kind, carrier, start and end points
/// with their times, terminal cause, partner and forcer links; the log
/// follows.
void write_web(std::ostream& out, const PolygonalWeb& w);
PolygonalWeb read_web(std::istream& in);

std::string format_real(double v);

}  // namespace pmf
