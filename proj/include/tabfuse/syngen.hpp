#pragma once

// Deterministic synthetic document generator. Pages carry tables (aligned
// column grids with nearby "Table N:" captions) plus distractors that mimic
// the classic vision false-positive classes: displayed equations, token-free
// figure blocks, highlighted text and plain prose. A pseudo_table class
// (aligned wide-gap rows with no caption) and an optional caption-like prose
// line ("Table N shows ...") provide hard negatives for ablations and
// threshold sweeps.
//
// Generation is per-page deterministic: each page derives its own seed from
// the corpus seed and page index, so pages could be generated in parallel
// without changing a byte of output.

#include <map>
#include <string>
#include <vector>

#include "tabfuse/error.hpp"
#include "tabfuse/ingest.hpp"
#include "tabfuse/layout.hpp"
#include "tabfuse/lexfeat.hpp"
#include "tabfuse/rng.hpp"

namespace tabfuse {

struct generation_error : error {
    using error::error;
};

struct IntRange {
    int min = 0;
    int max = 0;
};

struct CorpusSpec {
    int pages = 200;
    std::uint64_t seed = 7;

    IntRange tables_per_page{1, 2};
    IntRange table_rows{4, 8};
    IntRange table_cols{5, 7}; // wide gaps per row = cols - 1
    IntRange caption_offset_lines{1, 4};

    // expected distractor regions per page, by class
    double w_equation = 0.8;
    double w_figure_block = 0.5;
    double w_highlighted_text = 0.5;
    double w_prose = 1.0;
    double w_pseudo_table = 0.5;

    IntRange pseudo_rows{3, 4};
    int pseudo_gap_count = 5;

    // hard cases, kept rare so the corpus stays separable but not trivial
    double captionless_rate = 0.005;       // tables missing their caption
    double stacked_equation_rate = 0.04;   // two aligned equation lines
    double caption_like_prose_rate = 0.0;  // "Table N shows ..." near pseudo blocks

    int separation_lines = 8; // filler prose between blocks
    int lines_per_page = 46;
    double width_pt = 612.0;
    double height_pt = 792.0;

    void validate() const {
        if (pages < 1) throw input_error("corpus spec: pages must be >= 1");
        auto range_ok = [](const IntRange& r) { return r.min >= 1 && r.min <= r.max; };
        if (!range_ok(tables_per_page) || !range_ok(table_rows) || !range_ok(table_cols) ||
            !range_ok(caption_offset_lines) || !range_ok(pseudo_rows))
            throw input_error("corpus spec: bad integer range");
        if (table_cols.min < 2 || pseudo_gap_count < 1)
            throw input_error("corpus spec: too few columns");
        const double weights[] = {w_equation, w_figure_block, w_highlighted_text,
                                  w_prose, w_pseudo_table};
        double total = 0.0;
        for (double w : weights) {
            if (w < 0.0) throw input_error("corpus spec: negative distractor weight");
            total += w;
        }
        if (total == 0.0) throw input_error("corpus spec: all distractor weights zero");
        for (double r : {captionless_rate, stacked_equation_rate, caption_like_prose_rate})
            if (r < 0.0 || r > 1.0) throw input_error("corpus spec: rate outside [0,1]");
        if (separation_lines < 0) throw input_error("corpus spec: negative separation");
        if (lines_per_page < 8) throw input_error("corpus spec: page too short");
        if (!(width_pt > 0.0 && height_pt > 0.0))
            throw input_error("corpus spec: non-positive page size");
    }
};

namespace syndetail {

constexpr double kLineHeight = 0.0145;
constexpr double kLinePitch = 0.019;
constexpr double kPageTop = 0.05;
constexpr double kMarginLeft = 0.08;
constexpr double kMarginRight = 0.92;
constexpr double kTableLeft = 0.10;
constexpr double kTableRight = 0.90;

inline const std::vector<std::string>& word_list() {
    static const std::vector<std::string> words = {
        "alloy",   "phase",   "melt",    "grain",   "oxide",  "creep",
        "yield",   "flux",    "strain",  "anneal",  "ingot",  "solute",
        "vacancy", "dendrite","carbide", "nitride", "slag",   "quench",
        "temper",  "billet",  "ductile", "brittle", "lattice","sinter"};
    return words;
}

inline std::string random_word(Rng& rng) {
    const auto& words = word_list();
    return words[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(words.size()) - 1))];
}

inline double slot_y0(int slot) { return kPageTop + slot * kLinePitch; }
inline double slot_y1(int slot) { return slot_y0(slot) + kLineHeight; }

inline TextLine prose_line(Rng& rng, int slot, double fill = 1.0) {
    TextLine line;
    line.y0 = slot_y0(slot);
    line.y1 = slot_y1(slot);
    const double right = kMarginLeft + (kMarginRight - kMarginLeft) * fill;
    double x = kMarginLeft;
    while (true) {
        const double w = rng.uniform(0.025, 0.06);
        if (x + w > right && !line.tokens.empty()) break;
        line.tokens.push_back({random_word(rng), x, std::min(x + w, right)});
        x += w + rng.uniform(0.004, 0.010);
        if (x >= right) break;
    }
    return line;
}

inline TextLine labeled_word_line(Rng& rng, int slot,
                                  const std::vector<std::string>& head_words) {
    TextLine line;
    line.y0 = slot_y0(slot);
    line.y1 = slot_y1(slot);
    double x = kMarginLeft;
    auto push = [&](const std::string& text, double w) {
        line.tokens.push_back({text, x, x + w});
        x += w + rng.uniform(0.005, 0.009);
    };
    for (const std::string& word : head_words)
        push(word, 0.012 + 0.007 * static_cast<double>(word.size()) * 0.8);
    const int trailing = rng.uniform_int(2, 4);
    for (int i = 0; i < trailing && x < kMarginRight - 0.06; ++i)
        push(random_word(rng), rng.uniform(0.025, 0.05));
    return line;
}

inline TextLine caption_line(Rng& rng, int slot, int number) {
    return labeled_word_line(rng, slot, {"Table", std::to_string(number) + ":"});
}

// Prose sentence that starts like a caption; the documented trap for
// caption counting when the search window is too greedy.
inline TextLine caption_like_line(Rng& rng, int slot, int number) {
    return labeled_word_line(rng, slot, {"Table", std::to_string(number), "shows"});
}

// One row on a fixed column grid: cells of 2-3 short words left-aligned at
// each column start, leaving a wide aligned gap before the next column.
inline TextLine grid_row(Rng& rng, int slot, int cols, int min_cell_words,
                         int max_cell_words) {
    TextLine line;
    line.y0 = slot_y0(slot);
    line.y1 = slot_y1(slot);
    const double slot_w = (kTableRight - kTableLeft) / cols;
    for (int c = 0; c < cols; ++c) {
        const double start = kTableLeft + c * slot_w;
        const int words = rng.uniform_int(min_cell_words, max_cell_words);
        const double content = slot_w * rng.uniform(0.40, 0.55);
        std::vector<double> gaps;
        double gap_total = 0.0;
        for (int g = 0; g + 1 < words; ++g) {
            gaps.push_back(rng.uniform(0.004, 0.008));
            gap_total += gaps.back();
        }
        const double word_w = (content - gap_total) / words;
        double x = start;
        for (int wi = 0; wi < words; ++wi) {
            line.tokens.push_back({random_word(rng), x, x + word_w});
            x += word_w + (wi + 1 < words ? gaps[static_cast<std::size_t>(wi)] : 0.0);
        }
    }
    return line;
}

// Displayed equation: few tokens, all gaps wide, centred. Token extents are
// returned so a stacked second line can reuse the exact grid.
inline TextLine equation_line(Rng& rng, int slot,
                              const std::vector<std::pair<double, double>>* reuse,
                              std::vector<std::pair<double, double>>* extents_out) {
    TextLine line;
    line.y0 = slot_y0(slot);
    line.y1 = slot_y1(slot);
    std::vector<std::pair<double, double>> extents;
    if (reuse) {
        extents = *reuse;
    } else {
        const int n = rng.uniform_int(5, 7);
        std::vector<double> widths;
        double total_w = 0.0;
        for (int i = 0; i < n; ++i) {
            widths.push_back(rng.uniform(0.015, 0.03));
            total_w += widths.back();
        }
        const double span = 0.5; // occupy [0.25, 0.75]
        const double base_gap = (span - total_w) / (n - 1);
        double x = 0.25;
        for (int i = 0; i < n; ++i) {
            extents.emplace_back(x, x + widths[static_cast<std::size_t>(i)]);
            x += widths[static_cast<std::size_t>(i)];
            if (i + 1 < n) x += base_gap * rng.uniform(0.85, 1.15);
        }
    }
    for (const auto& [x0, x1] : extents)
        line.tokens.push_back({random_word(rng), x0, x1});
    if (extents_out) *extents_out = extents;
    return line;
}

inline BBox box_around(const std::vector<TextLine>& lines, double pad_x, double pad_y) {
    BBox b{1.0, 1.0, 0.0, 0.0};
    for (const TextLine& line : lines) {
        if (line.tokens.empty()) continue;
        b.x0 = std::min(b.x0, line.tokens.front().x0);
        b.x1 = std::max(b.x1, line.tokens.back().x1);
        b.y0 = std::min(b.y0, line.y0);
        b.y1 = std::max(b.y1, line.y1);
    }
    b.x0 = std::max(0.0, b.x0 - pad_x);
    b.y0 = std::max(0.0, b.y0 - pad_y);
    b.x1 = std::min(1.0, b.x1 + pad_x);
    b.y1 = std::min(1.0, b.y1 + pad_y);
    return b;
}

enum class BlockKind { table, equation, figure_block, highlighted_text, prose, pseudo_table };

struct BlockPlan {
    BlockKind kind;
    int lines = 0; // page line slots consumed
};

inline int sample_count(Rng& rng, double weight) {
    int count = static_cast<int>(weight);
    if (rng.bernoulli(weight - static_cast<double>(count))) ++count;
    return count;
}

inline std::uint64_t page_seed(std::uint64_t corpus_seed, int page_index) {
    return splitmix64(splitmix64(corpus_seed) + static_cast<std::uint64_t>(page_index) + 1);
}

} // namespace syndetail

// Generate layouts, ground truth and region labels for one page.
// Exposed separately so the parallel-generation equivalence is testable.
inline void generate_page(const CorpusSpec& spec, int page_index, PageLayout& layout,
                          GroundTruth& truth, RegionLabelPage& labels) {
    using namespace syndetail;
    Rng rng(page_seed(spec.seed, page_index));

    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "page_%04d", page_index + 1);
    layout = PageLayout{idbuf, spec.width_pt, spec.height_pt, {}};
    truth = GroundTruth{idbuf, {}};
    labels = RegionLabelPage{idbuf, {}};

    // plan the page: mandatory tables plus sampled distractors
    struct Planned {
        BlockKind kind;
        int rows = 0;       // table / pseudo rows
        int cols = 0;
        int caption_offset = 0; // 0 = captionless
        bool stacked = false;   // equations
        bool poison = false;    // pseudo blocks followed by a caption-like line
        int span = 0;           // figure/highlight/prose line count
    };
    std::vector<Planned> blocks;

    const int n_tables = rng.uniform_int(spec.tables_per_page.min, spec.tables_per_page.max);
    for (int t = 0; t < n_tables; ++t) {
        Planned p;
        p.kind = BlockKind::table;
        p.rows = rng.uniform_int(spec.table_rows.min, spec.table_rows.max);
        p.cols = rng.uniform_int(spec.table_cols.min, spec.table_cols.max);
        p.caption_offset = rng.bernoulli(spec.captionless_rate)
                               ? 0
                               : rng.uniform_int(spec.caption_offset_lines.min,
                                                 spec.caption_offset_lines.max);
        blocks.push_back(p);
    }
    auto add_distractors = [&](BlockKind kind, double weight) {
        for (int i = 0; i < sample_count(rng, weight); ++i) {
            Planned p;
            p.kind = kind;
            switch (kind) {
                case BlockKind::equation:
                    p.stacked = rng.bernoulli(spec.stacked_equation_rate);
                    break;
                case BlockKind::figure_block: p.span = rng.uniform_int(3, 6); break;
                case BlockKind::highlighted_text: p.span = rng.uniform_int(2, 4); break;
                case BlockKind::prose: p.span = rng.uniform_int(2, 5); break;
                case BlockKind::pseudo_table:
                    p.rows = rng.uniform_int(spec.pseudo_rows.min, spec.pseudo_rows.max);
                    p.cols = spec.pseudo_gap_count + 1;
                    p.poison = rng.bernoulli(spec.caption_like_prose_rate);
                    break;
                default: break;
            }
            blocks.push_back(p);
        }
    };
    add_distractors(BlockKind::equation, spec.w_equation);
    add_distractors(BlockKind::figure_block, spec.w_figure_block);
    add_distractors(BlockKind::highlighted_text, spec.w_highlighted_text);
    add_distractors(BlockKind::prose, spec.w_prose);
    add_distractors(BlockKind::pseudo_table, spec.w_pseudo_table);

    // deterministic shuffle
    for (std::size_t i = blocks.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1));
        std::swap(blocks[i - 1], blocks[j]);
    }

    auto block_lines = [](const Planned& p) {
        switch (p.kind) {
            case BlockKind::table:
                return p.rows + (p.caption_offset > 0 ? p.caption_offset : 0);
            case BlockKind::pseudo_table:
                return p.rows + (p.poison ? 2 : 0);
            case BlockKind::equation:
                return p.stacked ? 2 : 1;
            default:
                return p.span;
        }
    };

    // drop optional distractors (last planned first) until the page fits
    const int leading = rng.uniform_int(1, 2);
    auto total_need = [&]() {
        int need = leading;
        bool first = true;
        for (const Planned& p : blocks) {
            if (!first) need += spec.separation_lines;
            need += block_lines(p);
            first = false;
        }
        return need;
    };
    while (total_need() > spec.lines_per_page) {
        std::size_t victim = blocks.size();
        for (std::size_t i = blocks.size(); i-- > 0;) {
            if (blocks[i].kind != BlockKind::table) {
                victim = i;
                break;
            }
        }
        if (victim == blocks.size())
            throw generation_error("infeasible corpus spec: tables do not fit on page " +
                                   std::string(idbuf));
        blocks.erase(blocks.begin() + static_cast<std::ptrdiff_t>(victim));
    }

    int cursor = 0;
    int caption_counter = 0;
    auto emit_filler = [&](int count) {
        for (int i = 0; i < count; ++i) layout.lines.push_back(prose_line(rng, cursor++));
    };
    emit_filler(leading);

    bool first_block = true;
    for (const Planned& p : blocks) {
        if (!first_block) emit_filler(spec.separation_lines);
        first_block = false;
        switch (p.kind) {
            case BlockKind::table: {
                if (p.caption_offset > 0) {
                    layout.lines.push_back(caption_line(rng, cursor++, ++caption_counter));
                    emit_filler(p.caption_offset - 1);
                }
                std::vector<TextLine> rows;
                for (int r = 0; r < p.rows; ++r) {
                    rows.push_back(grid_row(rng, cursor++, p.cols, 2, 3));
                    layout.lines.push_back(rows.back());
                }
                const BBox box = box_around(rows, 0.005, 0.004);
                truth.boxes.push_back(box);
                labels.regions.push_back({"table", box});
                break;
            }
            case BlockKind::pseudo_table: {
                std::vector<TextLine> rows;
                for (int r = 0; r < p.rows; ++r) {
                    rows.push_back(grid_row(rng, cursor++, p.cols, 2, 2));
                    layout.lines.push_back(rows.back());
                }
                labels.regions.push_back({"pseudo_table", box_around(rows, 0.005, 0.004)});
                if (p.poison) {
                    emit_filler(1);
                    layout.lines.push_back(caption_like_line(rng, cursor++, ++caption_counter));
                }
                break;
            }
            case BlockKind::equation: {
                std::vector<TextLine> lines;
                std::vector<std::pair<double, double>> extents;
                lines.push_back(equation_line(rng, cursor++, nullptr, &extents));
                layout.lines.push_back(lines.back());
                if (p.stacked) {
                    lines.push_back(equation_line(rng, cursor++, &extents, nullptr));
                    layout.lines.push_back(lines.back());
                }
                labels.regions.push_back({"equation", box_around(lines, 0.01, 0.003)});
                break;
            }
            case BlockKind::figure_block: {
                // token-free vertical span
                const double y0 = slot_y0(cursor);
                const double y1 = slot_y1(cursor + p.span - 1);
                cursor += p.span;
                labels.regions.push_back({"figure_block", BBox{0.15, y0, 0.85, y1}});
                break;
            }
            case BlockKind::highlighted_text:
            case BlockKind::prose: {
                std::vector<TextLine> lines;
                for (int i = 0; i < p.span; ++i) {
                    lines.push_back(prose_line(rng, cursor++, i + 1 == p.span ? 0.7 : 1.0));
                    layout.lines.push_back(lines.back());
                }
                const char* cls =
                    p.kind == BlockKind::highlighted_text ? "highlighted_text" : "prose";
                labels.regions.push_back({cls, box_around(lines, 0.005, 0.003)});
                break;
            }
        }
    }
    const int trailing = std::min(spec.lines_per_page - cursor, rng.uniform_int(2, 4));
    emit_filler(std::max(0, trailing));
}

inline Corpus generate_corpus(const CorpusSpec& spec) {
    spec.validate();
    Corpus corpus;
    corpus.layouts.resize(static_cast<std::size_t>(spec.pages));
    corpus.truth.resize(static_cast<std::size_t>(spec.pages));
    corpus.labels.resize(static_cast<std::size_t>(spec.pages));
    for (int i = 0; i < spec.pages; ++i)
        generate_page(spec, i, corpus.layouts[static_cast<std::size_t>(i)],
                      corpus.truth[static_cast<std::size_t>(i)],
                      corpus.labels[static_cast<std::size_t>(i)]);
    return corpus;
}

// Named corpus recipes used by the evaluation harness and the CLI.
//   default      — the general corpus: tables with captions plus the four
//                  distractor classes and a few pseudo tables.
//   nspace-sweep — pseudo tables with exactly 3 wide gaps per row, row
//                  counts matching real tables, and a caption-like prose
//                  line after every pseudo block; separates cleanly only
//                  when the relevant-line threshold sits at 3.
//   nline2-sweep — caption offsets spread uniformly over 1..7 and pseudo
//                  tables that mimic table rows, with blocks spaced so no
//                  window up to 12 lines reaches a foreign caption; caption
//                  coverage then drives recall directly.
inline CorpusSpec corpus_preset(const std::string& name, int pages = 200,
                                std::uint64_t seed = 7) {
    CorpusSpec spec;
    spec.pages = pages;
    spec.seed = seed;
    if (name == "default") return spec;
    if (name == "nspace-sweep") {
        spec.tables_per_page = {1, 1};
        spec.pseudo_rows = spec.table_rows;
        spec.pseudo_gap_count = 3;
        spec.caption_like_prose_rate = 1.0;
        spec.w_pseudo_table = 0.7;
        return spec;
    }
    if (name == "nline2-sweep") {
        spec.tables_per_page = {1, 1};
        spec.table_rows = {4, 6};
        spec.table_cols = {6, 7};
        spec.caption_offset_lines = {1, 7};
        spec.pseudo_rows = {4, 6};
        spec.pseudo_gap_count = 5;
        spec.w_pseudo_table = 1.0;
        spec.w_equation = 0.3;
        spec.w_figure_block = 0.3;
        spec.w_highlighted_text = 0.3;
        spec.w_prose = 0.5;
        spec.separation_lines = 13;
        return spec;
    }
    throw config_error("unknown corpus preset: " + name);
}

struct ClassStats {
    int count = 0;
    std::map<int, int> l1_hist;
    std::map<int, int> l2_hist;
};

struct CorpusStats {
    std::map<std::string, ClassStats> by_class;
};

// Class counts plus lexical feature histograms over every labeled region.
inline CorpusStats corpus_stats(const Corpus& corpus, const LexParams& params = {}) {
    CorpusStats stats;
    std::map<std::string, const PageLayout*> pages;
    for (const PageLayout& p : corpus.layouts) pages[p.page_id] = &p;
    for (const RegionLabelPage& page : corpus.labels) {
        const auto it = pages.find(page.page_id);
        for (const LabeledRegion& region : page.regions) {
            ClassStats& cls = stats.by_class[region.cls];
            ++cls.count;
            if (it == pages.end()) continue;
            const LexicalFeatures f = extract_features(*it->second, region.box, params);
            ++cls.l1_hist[f.l1];
            ++cls.l2_hist[f.l2];
        }
    }
    return stats;
}

} // namespace tabfuse
