#pragma once

#include <ostream>
#include <vector>

#include "pmf/crop_engine.hpp"
#include "pmf/field_sampler.hpp"
#include "pmf/web_sampler.hpp"

namespace pmf {

struct SvgStyle {
    double size = 600.0;  // pixels across the domain's bounding disc
    double stroke = 1.5;
};

/// Domain outline plus one black <line> per field edge.
void render_field(std::ostream& out, const FieldSample& s, const SvgStyle& style = {});

/// Web strokes coloured by root; optional crop graphs overlaid with node
/// glyphs (V square, T triangle, I circle).
void render_web(std::ostream& out, const PolygonalWeb& w, const std::vector<CropGraph>& crops = {},
                const SvgStyle& style = {});

}  // namespace pmf
