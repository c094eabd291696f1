#include "pmf/markers.hpp"

#include <sstream>

namespace pmf {

MarkerConfig::MarkerConfig(std::vector<EdgeMarker> markers, double tol) : markers_(std::move(markers)) {
    const std::size_t k = markers_.size();
    for (std::size_t i = 0; i < k; ++i) {
        if (!markers_[i].line.contains(markers_[i].x, tol)) {
            std::ostringstream os;
            os << "marker " << i << ": point is not on its line";
            throw GeometryError(os.str());
        }
        int id = -1;
        for (std::size_t j = 0; j < lines_.size(); ++j)
            if (same_line(lines_[j], markers_[i].line, tol)) id = static_cast<int>(j);
        if (id < 0) {
            lines_.push_back(markers_[i].line);
            id = static_cast<int>(lines_.size()) - 1;
        }
        line_of_.push_back(id);
    }
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            if (line_of_[i] == line_of_[j]) {
                if (distance(markers_[i].x, markers_[j].x) <= tol)
                    throw GeometryError("repeated marker " + std::to_string(i) + " / " + std::to_string(j));
                couplings_.emplace_back(static_cast<int>(i), static_cast<int>(j));
                degenerate_ = true;
            }
        }
    }
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            if (line_of_[i] != line_of_[j] && lines_[line_of_[j]].contains(markers_[i].x, tol)) singular_ = true;

    const std::size_t n = lines_.size();
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
            auto x = intersect(lines_[a], lines_[b]);
            if (!x.point) continue;
            for (std::size_t c = b + 1; c < n; ++c)
                if (lines_[c].contains(*x.point, 1e-9))
                    throw GeometryError("three marker lines meet at one point");
        }
}

std::vector<int> MarkerConfig::markers_on(int line) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < markers_.size(); ++i)
        if (line_of_[i] == line) out.push_back(static_cast<int>(i));
    return out;
}

}  // namespace pmf
