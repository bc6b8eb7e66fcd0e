#pragma once

// Page text layout model: tokens with horizontal extents, lines with
// vertical extents, pages, and geometric cropping by candidate boxes.
// All coordinates are fractions of the page dimensions in [0,1], with the
// y axis growing top to bottom. Physical size in points is page metadata
// only, so features stay resolution independent.

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "tabfuse/error.hpp"

namespace tabfuse {

struct Token {
    std::string text; // non-empty, no line breaks
    double x0 = 0.0;
    double x1 = 0.0;
};

struct TextLine {
    std::vector<Token> tokens; // ordered by x0, non-overlapping
    double y0 = 0.0;
    double y1 = 0.0;

    double height() const { return y1 - y0; }
};

struct PageLayout {
    std::string page_id;
    double width_pt = 0.0;
    double height_pt = 0.0;
    std::vector<TextLine> lines; // ordered by y0, top to bottom
};

struct BBox {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() * height(); }

    friend bool operator==(const BBox& a, const BBox& b) {
        return a.x0 == b.x0 && a.y0 == b.y0 && a.x1 == b.x1 && a.y1 == b.y1;
    }
    // Lexicographic order; used to normalise output order and break score ties.
    friend bool operator<(const BBox& a, const BBox& b) {
        if (a.x0 != b.x0) return a.x0 < b.x0;
        if (a.y0 != b.y0) return a.y0 < b.y0;
        if (a.x1 != b.x1) return a.x1 < b.x1;
        return a.y1 < b.y1;
    }
};

// A box proposal paired with the proposing detector's confidence.
struct Candidate {
    BBox box;
    double score = 0.0; // s_vis in [0,1]
};

// Crop of a page by a candidate box. Lines keep their original page
// coordinates; context_before/after hold the lines adjacent to the crop so
// caption search can look outside the box.
struct Region {
    std::string source; // page_id
    BBox box;
    std::vector<TextLine> lines;
    std::vector<TextLine> context_before;
    std::vector<TextLine> context_after;
};

inline void validate_box(const BBox& b, const std::string& what = "box") {
    if (!(b.x0 >= 0.0 && b.x1 <= 1.0 && b.y0 >= 0.0 && b.y1 <= 1.0))
        throw validation_error(what + ": coordinates outside [0,1]");
    if (!(b.x0 < b.x1 && b.y0 < b.y1))
        throw validation_error(what + ": empty or inverted extent");
}

// Full structural check of a page; throws validation_error naming the first
// offending line/token.
inline void validate_page(const PageLayout& page) {
    const std::string where = "page '" + page.page_id + "'";
    if (!(page.width_pt > 0.0 && page.height_pt > 0.0))
        throw validation_error(where + ": non-positive physical dimensions");
    double prev_y0 = -1.0;
    for (std::size_t li = 0; li < page.lines.size(); ++li) {
        const TextLine& line = page.lines[li];
        const std::string lwhere = where + " line " + std::to_string(li);
        if (!(line.y0 >= 0.0 && line.y1 <= 1.0 && line.y0 < line.y1))
            throw validation_error(lwhere + ": bad vertical extent");
        if (line.y0 < prev_y0)
            throw validation_error(lwhere + ": lines not ordered top to bottom");
        prev_y0 = line.y0;
        double prev_x1 = -1.0;
        for (std::size_t ti = 0; ti < line.tokens.size(); ++ti) {
            const Token& tok = line.tokens[ti];
            const std::string twhere = lwhere + " token " + std::to_string(ti);
            if (tok.text.empty())
                throw validation_error(twhere + ": empty text");
            if (tok.text.find('\n') != std::string::npos ||
                tok.text.find('\r') != std::string::npos)
                throw validation_error(twhere + ": text contains a line break");
            if (!(tok.x0 >= 0.0 && tok.x1 <= 1.0 && tok.x0 < tok.x1))
                throw validation_error(twhere + ": bad horizontal extent");
            if (tok.x0 < prev_x1)
                throw validation_error(twhere + ": overlaps previous token");
            prev_x1 = tok.x1;
        }
    }
}

namespace detail {

inline double vertical_overlap(const TextLine& line, const BBox& box) {
    return std::max(0.0, std::min(line.y1, box.y1) - std::max(line.y0, box.y0));
}

// Membership rule: a line belongs to the crop iff at least half of its
// height lies inside the box. The box's horizontal extent is ignored; the
// spacing heuristics are row-wise and truncating tokens would corrupt gap
// statistics.
inline bool line_in_box(const TextLine& line, const BBox& box) {
    return vertical_overlap(line, box) >= 0.5 * line.height();
}

} // namespace detail

// Crop a page by a box. Cropped lines keep page coordinates; up to
// context_lines adjacent lines on each side are returned separately. A box
// covering no text yields an empty-lines Region (downstream features then
// evaluate to zero).
inline Region crop_layout(const PageLayout& page, const BBox& box,
                          std::size_t context_lines) {
    validate_box(box);
    Region region;
    region.source = page.page_id;
    region.box = box;

    std::size_t first = page.lines.size();
    std::size_t last = 0;
    bool any = false;
    for (std::size_t i = 0; i < page.lines.size(); ++i) {
        if (detail::line_in_box(page.lines[i], box)) {
            if (!any) first = i;
            last = i;
            any = true;
            region.lines.push_back(page.lines[i]);
        }
    }

    if (any) {
        const std::size_t begin = first >= context_lines ? first - context_lines : 0;
        for (std::size_t i = begin; i < first; ++i)
            region.context_before.push_back(page.lines[i]);
        const std::size_t end = std::min(page.lines.size(), last + 1 + context_lines);
        for (std::size_t i = last + 1; i < end; ++i)
            region.context_after.push_back(page.lines[i]);
        return region;
    }

    // No member lines: take context from the lines entirely above / below
    // the box so a box over empty space still sees its neighbourhood.
    std::vector<std::size_t> above;
    std::vector<std::size_t> below;
    for (std::size_t i = 0; i < page.lines.size(); ++i) {
        if (page.lines[i].y1 <= box.y0) above.push_back(i);
        else if (page.lines[i].y0 >= box.y1) below.push_back(i);
    }
    const std::size_t nb = std::min(context_lines, above.size());
    for (std::size_t k = above.size() - nb; k < above.size(); ++k)
        region.context_before.push_back(page.lines[above[k]]);
    const std::size_t na = std::min(context_lines, below.size());
    for (std::size_t k = 0; k < na; ++k)
        region.context_after.push_back(page.lines[below[k]]);
    return region;
}

// Widths of the horizontal gaps between adjacent tokens, in order.
// Length is max(0, token_count - 1); non-negative by the token ordering
// invariant.
inline std::vector<double> line_gaps(const TextLine& line) {
    std::vector<double> gaps;
    if (line.tokens.size() < 2) return gaps;
    gaps.reserve(line.tokens.size() - 1);
    for (std::size_t i = 0; i + 1 < line.tokens.size(); ++i)
        gaps.push_back(line.tokens[i + 1].x0 - line.tokens[i].x1);
    return gaps;
}

} // namespace tabfuse
