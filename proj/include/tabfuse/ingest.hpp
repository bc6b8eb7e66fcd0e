#pragma once

// File-boundary readers and writers. Layout JSON is the canonical pipeline
// input; detector output and ground truth use small JSON schemas of their
// own. Every reader validates domain invariants and reports the offending
// record — no silent coercion. A deterministic mock detector stands in for
// the vision backbone so end-to-end runs need no deep-learning component.

#include <algorithm>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabfuse/error.hpp"
#include "tabfuse/eval.hpp"
#include "tabfuse/layout.hpp"
#include "tabfuse/rng.hpp"

namespace tabfuse {

struct DetectorOutput {
    std::string page_id;
    std::vector<Candidate> candidates;
    std::string detector_name;
};

struct LabeledRegion {
    std::string cls; // table | equation | figure_block | highlighted_text | prose | pseudo_table
    BBox box;
};

struct RegionLabelPage {
    std::string page_id;
    std::vector<LabeledRegion> regions;
};

// A generated or ingested document set: layouts plus the matching ground
// truth and per-region class labels.
struct Corpus {
    std::vector<PageLayout> layouts;
    std::vector<GroundTruth> truth;
    std::vector<RegionLabelPage> labels;
};

namespace detail {

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw parse_error("file '" + path + "': " + e.what());
    }
    return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write file: " + path);
    out << text;
}

inline void check_format_version(const nlohmann::json& j, const std::string& path) {
    if (j.contains("format_version") && j["format_version"] != 1)
        throw parse_error("file '" + path + "': unsupported format_version");
}

inline BBox box_from_json(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 4)
        throw parse_error(what + ": box must be [x0,y0,x1,y1]");
    BBox b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
    validate_box(b, what);
    return b;
}

inline nlohmann::ordered_json box_to_json(const BBox& b) {
    return nlohmann::ordered_json::array({b.x0, b.y0, b.x1, b.y1});
}

} // namespace detail

// ---- layout files ---------------------------------------------------------

inline nlohmann::ordered_json layout_to_json(const std::vector<PageLayout>& pages) {
    nlohmann::ordered_json j;
    j["format_version"] = 1;
    j["pages"] = nlohmann::ordered_json::array();
    for (const PageLayout& page : pages) {
        nlohmann::ordered_json pj;
        pj["page_id"] = page.page_id;
        pj["width_pt"] = page.width_pt;
        pj["height_pt"] = page.height_pt;
        pj["lines"] = nlohmann::ordered_json::array();
        for (const TextLine& line : page.lines) {
            nlohmann::ordered_json lj;
            lj["y0"] = line.y0;
            lj["y1"] = line.y1;
            lj["tokens"] = nlohmann::ordered_json::array();
            for (const Token& tok : line.tokens)
                lj["tokens"].push_back({{"text", tok.text}, {"x0", tok.x0}, {"x1", tok.x1}});
            pj["lines"].push_back(std::move(lj));
        }
        j["pages"].push_back(std::move(pj));
    }
    return j;
}

inline std::vector<PageLayout> layout_from_json(const nlohmann::json& j,
                                                const std::string& origin) {
    detail::check_format_version(j, origin);
    std::vector<PageLayout> pages;
    try {
        for (const auto& pj : j.at("pages")) {
            PageLayout page;
            page.page_id = pj.at("page_id").get<std::string>();
            page.width_pt = pj.at("width_pt").get<double>();
            page.height_pt = pj.at("height_pt").get<double>();
            for (const auto& lj : pj.at("lines")) {
                TextLine line;
                line.y0 = lj.at("y0").get<double>();
                line.y1 = lj.at("y1").get<double>();
                for (const auto& tj : lj.at("tokens"))
                    line.tokens.push_back({tj.at("text").get<std::string>(),
                                           tj.at("x0").get<double>(),
                                           tj.at("x1").get<double>()});
                page.lines.push_back(std::move(line));
            }
            pages.push_back(std::move(page));
        }
    } catch (const nlohmann::json::exception& e) {
        throw parse_error("layout '" + origin + "': " + e.what());
    }
    for (const PageLayout& page : pages) validate_page(page);
    return pages;
}

inline std::vector<PageLayout> read_layout(const std::string& path) {
    return layout_from_json(detail::read_json_file(path), path);
}

inline void write_layout(const std::string& path, const std::vector<PageLayout>& pages) {
    detail::write_text_file(path, layout_to_json(pages).dump(2) + "\n");
}

// ---- detector output files ------------------------------------------------

inline nlohmann::ordered_json detector_to_json(const std::vector<DetectorOutput>& outputs,
                                               const std::string& detector_name) {
    nlohmann::ordered_json j;
    j["format_version"] = 1;
    j["detector"] = detector_name;
    j["pages"] = nlohmann::ordered_json::array();
    for (const DetectorOutput& out : outputs) {
        nlohmann::ordered_json pj;
        pj["page_id"] = out.page_id;
        pj["candidates"] = nlohmann::ordered_json::array();
        for (const Candidate& c : out.candidates)
            pj["candidates"].push_back(
                {{"box", detail::box_to_json(c.box)}, {"score", c.score}});
        j["pages"].push_back(std::move(pj));
    }
    return j;
}

inline std::vector<DetectorOutput> detector_from_json(const nlohmann::json& j,
                                                      const std::string& origin) {
    detail::check_format_version(j, origin);
    std::vector<DetectorOutput> outputs;
    try {
        const std::string name = j.value("detector", std::string("unknown"));
        for (const auto& pj : j.at("pages")) {
            DetectorOutput out;
            out.page_id = pj.at("page_id").get<std::string>();
            out.detector_name = name;
            for (const auto& cj : pj.at("candidates")) {
                Candidate c;
                c.box = detail::box_from_json(cj.at("box"),
                                              "candidate on page '" + out.page_id + "'");
                c.score = cj.at("score").get<double>();
                if (!(c.score >= 0.0 && c.score <= 1.0))
                    throw validation_error("candidate score outside [0,1] on page '" +
                                           out.page_id + "'");
                out.candidates.push_back(c);
            }
            outputs.push_back(std::move(out));
        }
    } catch (const nlohmann::json::exception& e) {
        throw parse_error("detector output '" + origin + "': " + e.what());
    }
    return outputs;
}

inline std::vector<DetectorOutput> read_detector_output(const std::string& path) {
    return detector_from_json(detail::read_json_file(path), path);
}

inline void write_detector_output(const std::string& path,
                                  const std::vector<DetectorOutput>& outputs,
                                  const std::string& detector_name) {
    detail::write_text_file(path, detector_to_json(outputs, detector_name).dump(2) + "\n");
}

// Union of several detector files: entries concatenate, each keeping its
// detector_name; consumers group by page_id.
inline std::vector<DetectorOutput>
merge_detector_outputs(const std::vector<std::vector<DetectorOutput>>& sets) {
    std::vector<DetectorOutput> merged;
    for (const auto& set : sets)
        merged.insert(merged.end(), set.begin(), set.end());
    std::stable_sort(merged.begin(), merged.end(),
                     [](const DetectorOutput& a, const DetectorOutput& b) {
                         return a.page_id < b.page_id;
                     });
    return merged;
}

// ---- ground truth files -----------------------------------------------------

inline nlohmann::ordered_json truth_to_json(const std::vector<GroundTruth>& truths) {
    nlohmann::ordered_json j;
    j["format_version"] = 1;
    j["pages"] = nlohmann::ordered_json::array();
    for (const GroundTruth& t : truths) {
        nlohmann::ordered_json pj;
        pj["page_id"] = t.page_id;
        pj["tables"] = nlohmann::ordered_json::array();
        for (const BBox& b : t.boxes) pj["tables"].push_back(detail::box_to_json(b));
        j["pages"].push_back(std::move(pj));
    }
    return j;
}

inline std::vector<GroundTruth> truth_from_json(const nlohmann::json& j,
                                                const std::string& origin) {
    detail::check_format_version(j, origin);
    std::vector<GroundTruth> truths;
    try {
        for (const auto& pj : j.at("pages")) {
            GroundTruth t;
            t.page_id = pj.at("page_id").get<std::string>();
            for (const auto& bj : pj.at("tables"))
                t.boxes.push_back(
                    detail::box_from_json(bj, "truth box on page '" + t.page_id + "'"));
            t.validate();
            truths.push_back(std::move(t));
        }
    } catch (const nlohmann::json::exception& e) {
        throw parse_error("ground truth '" + origin + "': " + e.what());
    }
    return truths;
}

inline std::vector<GroundTruth> read_ground_truth(const std::string& path) {
    return truth_from_json(detail::read_json_file(path), path);
}

inline void write_ground_truth(const std::string& path,
                               const std::vector<GroundTruth>& truths) {
    detail::write_text_file(path, truth_to_json(truths).dump(2) + "\n");
}

// ---- region label files -----------------------------------------------------

inline nlohmann::ordered_json labels_to_json(const std::vector<RegionLabelPage>& labels) {
    nlohmann::ordered_json j;
    j["format_version"] = 1;
    j["pages"] = nlohmann::ordered_json::array();
    for (const RegionLabelPage& page : labels) {
        nlohmann::ordered_json pj;
        pj["page_id"] = page.page_id;
        pj["regions"] = nlohmann::ordered_json::array();
        for (const LabeledRegion& r : page.regions)
            pj["regions"].push_back({{"class", r.cls}, {"box", detail::box_to_json(r.box)}});
        j["pages"].push_back(std::move(pj));
    }
    return j;
}

inline std::vector<RegionLabelPage> labels_from_json(const nlohmann::json& j,
                                                     const std::string& origin) {
    detail::check_format_version(j, origin);
    std::vector<RegionLabelPage> labels;
    try {
        for (const auto& pj : j.at("pages")) {
            RegionLabelPage page;
            page.page_id = pj.at("page_id").get<std::string>();
            for (const auto& rj : pj.at("regions"))
                page.regions.push_back(
                    {rj.at("class").get<std::string>(),
                     detail::box_from_json(rj.at("box"),
                                           "region on page '" + page.page_id + "'")});
            labels.push_back(std::move(page));
        }
    } catch (const nlohmann::json::exception& e) {
        throw parse_error("region labels '" + origin + "': " + e.what());
    }
    return labels;
}

inline std::vector<RegionLabelPage> read_region_labels(const std::string& path) {
    return labels_from_json(detail::read_json_file(path), path);
}

inline void write_region_labels(const std::string& path,
                                const std::vector<RegionLabelPage>& labels) {
    detail::write_text_file(path, labels_to_json(labels).dump(2) + "\n");
}

// ---- mock detector ----------------------------------------------------------

struct MockNoise {
    double jitter = 0.0;      // uniform box-edge perturbation, fraction of page
    double fp_rate = 0.0;     // chance of proposing each labeled non-table region
    double fn_rate = 0.0;     // chance of dropping a true table
    double fp_score = 0.63;
    double tp_score_lo = 1.0; // true-positive scores drawn uniformly from this range
    double tp_score_hi = 1.0;

    void validate() const {
        if (fp_rate < 0.0 || fp_rate > 1.0 || fn_rate < 0.0 || fn_rate > 1.0)
            throw input_error("mock detector: rates outside [0,1]");
        if (jitter < 0.0) throw input_error("mock detector: jitter must be >= 0");
        if (fp_score < 0.0 || fp_score > 1.0)
            throw input_error("mock detector: fp_score outside [0,1]");
        if (!(tp_score_lo <= tp_score_hi) || tp_score_lo < 0.0 || tp_score_hi > 1.0)
            throw input_error("mock detector: bad tp score range");
    }
};

namespace detail {

inline BBox jitter_box(const BBox& box, double jitter, Rng& rng) {
    if (jitter <= 0.0) return box;
    BBox b = box;
    b.x0 = std::clamp(b.x0 + rng.uniform(-jitter, jitter), 0.0, 1.0);
    b.y0 = std::clamp(b.y0 + rng.uniform(-jitter, jitter), 0.0, 1.0);
    b.x1 = std::clamp(b.x1 + rng.uniform(-jitter, jitter), 0.0, 1.0);
    b.y1 = std::clamp(b.y1 + rng.uniform(-jitter, jitter), 0.0, 1.0);
    if (b.x1 <= b.x0) b.x1 = std::min(1.0, b.x0 + 1e-4);
    if (b.y1 <= b.y0) b.y1 = std::min(1.0, b.y0 + 1e-4);
    return b;
}

} // namespace detail

// Deterministic stand-in for the vision backbone: truth boxes re-emitted
// with jitter and scores from the tp range (each dropped with probability
// fn_rate), plus false-positive proposals over labeled non-table regions at
// fp_rate with score fp_score. Per-page seeds are derived from the page id,
// so results do not depend on page order.
inline std::vector<DetectorOutput>
mock_detector(const std::vector<GroundTruth>& truth,
              const std::vector<PageLayout>& layouts,
              const std::vector<RegionLabelPage>& labels, const MockNoise& noise,
              std::uint64_t seed) {
    noise.validate();
    std::map<std::string, const GroundTruth*> truth_by_page;
    for (const GroundTruth& t : truth) truth_by_page[t.page_id] = &t;
    std::map<std::string, const RegionLabelPage*> labels_by_page;
    for (const RegionLabelPage& l : labels) labels_by_page[l.page_id] = &l;

    std::vector<DetectorOutput> outputs;
    for (const PageLayout& page : layouts) {
        Rng rng(splitmix64(seed ^ fnv1a64(page.page_id)));
        DetectorOutput out;
        out.page_id = page.page_id;
        out.detector_name = "mock";

        if (auto it = truth_by_page.find(page.page_id); it != truth_by_page.end()) {
            for (const BBox& box : it->second->boxes) {
                const bool drop = rng.bernoulli(noise.fn_rate);
                const BBox jittered = detail::jitter_box(box, noise.jitter, rng);
                const double score = rng.uniform(noise.tp_score_lo, noise.tp_score_hi);
                if (!drop) out.candidates.push_back({jittered, score});
            }
        }
        if (auto it = labels_by_page.find(page.page_id); it != labels_by_page.end()) {
            for (const LabeledRegion& region : it->second->regions) {
                if (region.cls == "table") continue;
                if (!rng.bernoulli(noise.fp_rate)) continue;
                out.candidates.push_back(
                    {detail::jitter_box(region.box, noise.jitter, rng), noise.fp_score});
            }
        }
        outputs.push_back(std::move(out));
    }
    return outputs;
}

} // namespace tabfuse
