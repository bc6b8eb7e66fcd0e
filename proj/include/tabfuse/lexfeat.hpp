#pragma once

// Lexical features computed from a cropped page region:
//   l1 — count of relevant lines (rows with many irregular gaps) that sit in
//        consecutive, pattern-similar runs; isolated irregular lines such as
//        displayed equations contribute nothing.
//   l2 — count of caption lines ("Table N ...") found within a window of
//        n_line2 lines around the l1 runs.
//
// A gap is "irregular" when it is wider than gap_factor times the region's
// reference gap (the median positive gap across the crop and its context):
// a relative baseline so double- or triple-spaced documents do not count
// ordinary word gaps as column separators.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "tabfuse/error.hpp"
#include "tabfuse/layout.hpp"

namespace tabfuse {

struct LexParams {
    int n_space = 3;          // a line is relevant when it has more than this many irregular gaps
    int n_line1 = 2;          // window (in lines) for the consecutiveness check
    int n_line2 = 7;          // caption search reach around each run, each side
    double gap_factor = 3.0;  // irregular iff gap > gap_factor * reference gap

    void validate() const {
        if (n_space < 1 || n_line1 < 1 || n_line2 < 1)
            throw input_error("lex params: thresholds must be >= 1");
        if (!(gap_factor > 1.0))
            throw input_error("lex params: gap_factor must be > 1");
    }
};

struct LexicalFeatures {
    int l1 = 0;
    int l2 = 0;

    friend bool operator==(const LexicalFeatures& a, const LexicalFeatures& b) {
        return a.l1 == b.l1 && a.l2 == b.l2;
    }
};

// Inclusive index range into Region::lines; covers one run of grouped
// relevant lines.
struct LineRange {
    std::size_t first = 0;
    std::size_t last = 0;

    friend bool operator==(const LineRange& a, const LineRange& b) {
        return a.first == b.first && a.last == b.last;
    }
};

// Count of gaps strictly wider than gap_factor * reference_gap.
inline int irregular_gap_count(const TextLine& line, double reference_gap,
                               double gap_factor) {
    if (!(reference_gap > 0.0))
        throw input_error("irregular_gap_count: reference_gap must be positive");
    const double threshold = gap_factor * reference_gap;
    int count = 0;
    for (double g : line_gaps(line))
        if (g > threshold) ++count;
    return count;
}

// Median positive gap across the region's lines and contexts. Falls back to
// 0.005 (half a percent of page width) when the crop has no gaps at all.
inline double reference_gap(const Region& region) {
    std::vector<double> gaps;
    auto collect = [&gaps](const std::vector<TextLine>& lines) {
        for (const TextLine& line : lines)
            for (double g : line_gaps(line))
                if (g > 0.0) gaps.push_back(g);
    };
    collect(region.context_before);
    collect(region.lines);
    collect(region.context_after);
    if (gaps.empty()) return 0.005;
    std::sort(gaps.begin(), gaps.end());
    const std::size_t n = gaps.size();
    if (n % 2 == 1) return gaps[n / 2];
    return 0.5 * (gaps[n / 2 - 1] + gaps[n / 2]);
}

namespace detail {

// Horizontal intervals spanned by a line's irregular gaps: [left token end,
// right token start] for each gap over the threshold.
inline std::vector<std::pair<double, double>>
irregular_gap_intervals(const TextLine& line, double ref, double gap_factor) {
    std::vector<std::pair<double, double>> intervals;
    const double threshold = gap_factor * ref;
    for (std::size_t i = 0; i + 1 < line.tokens.size(); ++i) {
        const double start = line.tokens[i].x1;
        const double end = line.tokens[i + 1].x0;
        if (end - start > threshold) intervals.emplace_back(start, end);
    }
    return intervals;
}

inline std::vector<std::size_t> relevant_indices(const Region& region,
                                                 const LexParams& params,
                                                 double ref) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < region.lines.size(); ++i)
        if (irregular_gap_count(region.lines[i], ref, params.gap_factor) > params.n_space)
            out.push_back(i);
    return out;
}

} // namespace detail

// Relevant line = more than n_space irregular gaps (strict).
inline std::vector<std::size_t> relevant_lines(const Region& region,
                                               const LexParams& params) {
    params.validate();
    return detail::relevant_indices(region, params, reference_gap(region));
}

// Two lines are pattern-similar when at least one irregular gap interval of
// one horizontally overlaps an irregular gap interval of the other. Aligned
// column separators overlap; unrelated wide gaps usually do not.
inline bool pattern_similar(const TextLine& a, const TextLine& b,
                            double reference_gap, double gap_factor) {
    const auto ia = detail::irregular_gap_intervals(a, reference_gap, gap_factor);
    const auto ib = detail::irregular_gap_intervals(b, reference_gap, gap_factor);
    for (const auto& [s1, e1] : ia)
        for (const auto& [s2, e2] : ib)
            if (s1 <= e2 && s2 <= e1) return true;
    return false;
}

// l1 plus the covering index ranges used by the caption search. A relevant
// line counts only when another pattern-similar relevant line sits within
// n_line1 lines of it; grouped lines whose indices are within n_line1 of
// each other merge into one range.
inline std::pair<int, std::vector<LineRange>> compute_l1(const Region& region,
                                                         const LexParams& params) {
    params.validate();
    const double ref = reference_gap(region);
    const std::vector<std::size_t> rel = detail::relevant_indices(region, params, ref);

    std::vector<std::size_t> grouped;
    for (std::size_t a = 0; a < rel.size(); ++a) {
        bool has_companion = false;
        for (std::size_t b = 0; b < rel.size() && !has_companion; ++b) {
            if (a == b) continue;
            const std::size_t lo = std::min(rel[a], rel[b]);
            const std::size_t hi = std::max(rel[a], rel[b]);
            if (hi - lo > static_cast<std::size_t>(params.n_line1)) continue;
            if (pattern_similar(region.lines[rel[a]], region.lines[rel[b]], ref,
                                params.gap_factor))
                has_companion = true;
        }
        if (has_companion) grouped.push_back(rel[a]);
    }

    std::vector<LineRange> groups;
    for (std::size_t idx : grouped) {
        if (!groups.empty() &&
            idx - groups.back().last <= static_cast<std::size_t>(params.n_line1)) {
            groups.back().last = idx;
        } else {
            groups.push_back({idx, idx});
        }
    }
    return {static_cast<int>(grouped.size()), groups};
}

namespace detail {

// Caption rule, anchored at the start of the line: optionally indented
// "table" (case-insensitive), then an identifier (arabic number, roman
// numeral, or a single letter), then optional '.', ':' or ')'. A letter
// identifier requires whitespace after "table" so words like "tablet" do
// not match; "table" mid-sentence never matches because the rule is
// anchored.
inline bool is_caption_text(const std::string& text) {
    const std::size_t n = text.size();
    std::size_t i = 0;
    while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    static const char kWord[] = "table";
    for (std::size_t k = 0; k < 5; ++k, ++i) {
        if (i >= n) return false;
        if (std::tolower(static_cast<unsigned char>(text[i])) != kWord[k]) return false;
    }
    if (i < n && std::isalpha(static_cast<unsigned char>(text[i]))) return false;

    std::size_t j = i;
    while (j < n && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    const bool had_space = j > i;
    if (j >= n) return false;

    auto terminator_ok = [&](std::size_t p) {
        if (p >= n) return true;
        const char c = text[p];
        if (c == '.' || c == ':' || c == ')') return true;
        return std::isspace(static_cast<unsigned char>(c)) != 0;
    };
    auto is_roman = [](char c) {
        switch (std::tolower(static_cast<unsigned char>(c))) {
            case 'i': case 'v': case 'x': case 'l': case 'c': case 'd': case 'm':
                return true;
            default:
                return false;
        }
    };

    if (std::isdigit(static_cast<unsigned char>(text[j]))) {
        std::size_t p = j;
        while (p < n && std::isdigit(static_cast<unsigned char>(text[p]))) ++p;
        return terminator_ok(p);
    }
    if (std::isalpha(static_cast<unsigned char>(text[j]))) {
        if (!had_space) return false;
        std::size_t p = j;
        while (p < n && is_roman(text[p])) ++p;
        if (p > j && terminator_ok(p)) return true;
        return terminator_ok(j + 1); // single-letter identifier
    }
    return false;
}

inline std::string line_text(const TextLine& line) {
    std::string out;
    for (std::size_t i = 0; i < line.tokens.size(); ++i) {
        if (i) out += ' ';
        out += line.tokens[i].text;
    }
    return out;
}

inline bool is_caption_line(const TextLine& line) {
    return is_caption_text(line_text(line));
}

} // namespace detail

// Count caption lines within n_line2 lines of each group, searching the
// region's lines and contexts. A physical line is counted once even when
// expanded windows overlap.
inline int compute_l2(const Region& region, const std::vector<LineRange>& groups,
                      const LexParams& params) {
    params.validate();
    if (groups.empty()) return 0;

    std::vector<const TextLine*> all;
    for (const TextLine& l : region.context_before) all.push_back(&l);
    const std::size_t offset = region.context_before.size();
    for (const TextLine& l : region.lines) all.push_back(&l);
    for (const TextLine& l : region.context_after) all.push_back(&l);

    std::set<std::size_t> counted;
    const std::size_t reach = static_cast<std::size_t>(params.n_line2);
    for (const LineRange& g : groups) {
        const std::size_t lo_full = g.first + offset;
        const std::size_t hi_full = g.last + offset;
        const std::size_t lo = lo_full >= reach ? lo_full - reach : 0;
        const std::size_t hi = std::min(all.size() - 1, hi_full + reach);
        for (std::size_t i = lo; i <= hi; ++i) {
            if (counted.count(i)) continue;
            if (detail::is_caption_line(*all[i])) counted.insert(i);
        }
    }
    return static_cast<int>(counted.size());
}

// Full feature extraction for one candidate box: crop with n_line2 context
// lines, then (l1, l2). Pure function of (page, box, params).
inline LexicalFeatures extract_features(const PageLayout& page, const BBox& box,
                                        const LexParams& params) {
    params.validate();
    const Region region =
        crop_layout(page, box, static_cast<std::size_t>(params.n_line2));
    auto [l1, groups] = compute_l1(region, params);
    const int l2 = compute_l2(region, groups, params);
    return {l1, l2};
}

} // namespace tabfuse
