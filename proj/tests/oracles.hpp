#pragma once

// Independent reference implementations used by the unit and acceptance
// suites. Written directly from the feature rules with no shared code paths
// (regex caption matching, quadratic pair scans, inline crop), so they can
// serve as oracles for the library implementation.

#include <algorithm>
#include <cmath>
#include <regex>
#include <string>
#include <vector>

#include "tabfuse/layout.hpp"
#include "tabfuse/lexfeat.hpp"

namespace oracle {

using tabfuse::BBox;
using tabfuse::LexParams;
using tabfuse::PageLayout;
using tabfuse::TextLine;

inline double fuse_reference(double s_vis, double s_lex, double theta) {
    if (s_lex >= theta) {
        if (s_lex >= s_vis) return s_lex;
        return s_vis;
    }
    return s_vis;
}

struct Features {
    int l1 = 0;
    int l2 = 0;
};

namespace detail {

struct Crop {
    std::vector<TextLine> before;
    std::vector<TextLine> inside;
    std::vector<TextLine> after;
};

inline Crop crop(const PageLayout& page, const BBox& box, int context) {
    Crop c;
    std::vector<int> member;
    for (int i = 0; i < static_cast<int>(page.lines.size()); ++i) {
        const TextLine& l = page.lines[static_cast<std::size_t>(i)];
        const double overlap = std::min(l.y1, box.y1) - std::max(l.y0, box.y0);
        if (overlap >= 0.5 * (l.y1 - l.y0)) member.push_back(i);
    }
    if (!member.empty()) {
        for (int i : member) c.inside.push_back(page.lines[static_cast<std::size_t>(i)]);
        for (int i = std::max(0, member.front() - context); i < member.front(); ++i)
            c.before.push_back(page.lines[static_cast<std::size_t>(i)]);
        for (int i = member.back() + 1;
             i < std::min<int>(static_cast<int>(page.lines.size()), member.back() + 1 + context);
             ++i)
            c.after.push_back(page.lines[static_cast<std::size_t>(i)]);
        return c;
    }
    std::vector<int> above, below;
    for (int i = 0; i < static_cast<int>(page.lines.size()); ++i) {
        const TextLine& l = page.lines[static_cast<std::size_t>(i)];
        if (l.y1 <= box.y0) above.push_back(i);
        else if (l.y0 >= box.y1) below.push_back(i);
    }
    for (int k = std::max(0, static_cast<int>(above.size()) - context);
         k < static_cast<int>(above.size()); ++k)
        c.before.push_back(page.lines[static_cast<std::size_t>(above[static_cast<std::size_t>(k)])]);
    for (int k = 0; k < std::min<int>(context, static_cast<int>(below.size())); ++k)
        c.after.push_back(page.lines[static_cast<std::size_t>(below[static_cast<std::size_t>(k)])]);
    return c;
}

inline std::vector<double> gaps(const TextLine& line) {
    std::vector<double> out;
    for (std::size_t i = 1; i < line.tokens.size(); ++i)
        out.push_back(line.tokens[i].x0 - line.tokens[i - 1].x1);
    return out;
}

inline double median_gap(const Crop& c) {
    std::vector<double> all;
    for (const auto* part : {&c.before, &c.inside, &c.after})
        for (const TextLine& line : *part)
            for (double g : gaps(line))
                if (g > 0.0) all.push_back(g);
    if (all.empty()) return 0.005;
    std::sort(all.begin(), all.end());
    if (all.size() % 2 == 1) return all[all.size() / 2];
    return (all[all.size() / 2 - 1] + all[all.size() / 2]) / 2.0;
}

struct Interval {
    double lo, hi;
};

inline std::vector<Interval> wide_gaps(const TextLine& line, double threshold) {
    std::vector<Interval> out;
    for (std::size_t i = 1; i < line.tokens.size(); ++i) {
        const double lo = line.tokens[i - 1].x1;
        const double hi = line.tokens[i].x0;
        if (hi - lo > threshold) out.push_back({lo, hi});
    }
    return out;
}

inline bool caption_regex(const TextLine& line) {
    std::string text;
    for (std::size_t i = 0; i < line.tokens.size(); ++i) {
        if (i) text += ' ';
        text += line.tokens[i].text;
    }
    static const std::regex re(
        R"(^\s*table(\d+|\s+(\d+|[ivxlcdm]+|[a-z]))([.:)\s].*)?$)",
        std::regex::icase);
    return std::regex_match(text, re);
}

} // namespace detail

// Straight-line recomputation of (l1, l2) for one box.
inline Features brute_force_features(const PageLayout& page, const BBox& box,
                                     const LexParams& params) {
    const detail::Crop c = detail::crop(page, box, params.n_line2);
    const double threshold = params.gap_factor * detail::median_gap(c);

    const int n = static_cast<int>(c.inside.size());
    std::vector<bool> relevant(static_cast<std::size_t>(n), false);
    for (int i = 0; i < n; ++i) {
        int wide = 0;
        for (double g : detail::gaps(c.inside[static_cast<std::size_t>(i)]))
            if (g > threshold) ++wide;
        relevant[static_cast<std::size_t>(i)] = wide > params.n_space;
    }

    std::vector<bool> grouped(static_cast<std::size_t>(n), false);
    for (int i = 0; i < n; ++i) {
        if (!relevant[static_cast<std::size_t>(i)]) continue;
        for (int j = 0; j < n; ++j) {
            if (i == j || !relevant[static_cast<std::size_t>(j)]) continue;
            if (std::abs(i - j) > params.n_line1) continue;
            bool overlap = false;
            for (const auto& a :
                 detail::wide_gaps(c.inside[static_cast<std::size_t>(i)], threshold))
                for (const auto& b :
                     detail::wide_gaps(c.inside[static_cast<std::size_t>(j)], threshold))
                    if (a.lo <= b.hi && b.lo <= a.hi) overlap = true;
            if (overlap) {
                grouped[static_cast<std::size_t>(i)] = true;
                break;
            }
        }
    }

    Features f;
    for (int i = 0; i < n; ++i)
        if (grouped[static_cast<std::size_t>(i)]) ++f.l1;

    // merge grouped indices into ranges, then scan expanded windows
    std::vector<std::pair<int, int>> ranges;
    for (int i = 0; i < n; ++i) {
        if (!grouped[static_cast<std::size_t>(i)]) continue;
        if (!ranges.empty() && i - ranges.back().second <= params.n_line1)
            ranges.back().second = i;
        else
            ranges.emplace_back(i, i);
    }
    std::vector<const TextLine*> all;
    for (const TextLine& l : c.before) all.push_back(&l);
    const int offset = static_cast<int>(c.before.size());
    for (const TextLine& l : c.inside) all.push_back(&l);
    for (const TextLine& l : c.after) all.push_back(&l);
    std::vector<bool> seen(all.size(), false);
    for (const auto& [first, last] : ranges) {
        const int lo = std::max(0, first + offset - params.n_line2);
        const int hi = std::min(static_cast<int>(all.size()) - 1, last + offset + params.n_line2);
        for (int i = lo; i <= hi; ++i) {
            if (seen[static_cast<std::size_t>(i)]) continue;
            if (detail::caption_regex(*all[static_cast<std::size_t>(i)])) {
                seen[static_cast<std::size_t>(i)] = true;
                ++f.l2;
            }
        }
    }
    return f;
}

} // namespace oracle
