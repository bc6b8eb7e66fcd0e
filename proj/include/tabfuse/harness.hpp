#pragma once

// End-to-end evaluation harness: document-level train/test splitting,
// training-set construction from detector proposals, pipeline and baseline
// evaluation, the feature ablations, and parameter sweeps. Everything is
// deterministic given the seeds in the config.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tabfuse/error.hpp"
#include "tabfuse/eval.hpp"
#include "tabfuse/fusion.hpp"
#include "tabfuse/ingest.hpp"
#include "tabfuse/lexfeat.hpp"
#include "tabfuse/mlp.hpp"
#include "tabfuse/rng.hpp"

namespace tabfuse {

struct HarnessConfig {
    LexParams lex;
    FusionParams fusion;
    FusionMode mode = FusionMode::literal;
    Variant variant = Variant::full;
    TrainConfig train;
    double iou_threshold = 0.5;
    double train_fraction = 0.8;
    std::uint64_t split_seed = 7;
};

// Deterministic 80/20 split of page ids (each generated page is an
// independent single-page document, so splitting by page avoids leakage).
struct PageSplit {
    std::set<std::string> train;
    std::set<std::string> test;
};

inline PageSplit split_pages(const std::vector<PageLayout>& layouts,
                             double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw input_error("split: train_fraction must be in (0,1)");
    std::vector<std::string> ids;
    for (const PageLayout& p : layouts) ids.push_back(p.page_id);
    std::sort(ids.begin(), ids.end());
    Rng rng(splitmix64(seed ^ 0x5f356495u));
    for (std::size_t i = ids.size(); i > 1; --i)
        std::swap(ids[i - 1],
                  ids[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1))]);
    PageSplit split;
    const std::size_t n_train =
        static_cast<std::size_t>(train_fraction * static_cast<double>(ids.size()));
    for (std::size_t i = 0; i < ids.size(); ++i)
        (i < n_train ? split.train : split.test).insert(ids[i]);
    return split;
}

namespace detail {

inline std::map<std::string, const PageLayout*>
index_layouts(const std::vector<PageLayout>& layouts) {
    std::map<std::string, const PageLayout*> out;
    for (const PageLayout& p : layouts) out[p.page_id] = &p;
    return out;
}

inline std::map<std::string, const GroundTruth*>
index_truth(const std::vector<GroundTruth>& truth) {
    std::map<std::string, const GroundTruth*> out;
    for (const GroundTruth& t : truth) out[t.page_id] = &t;
    return out;
}

inline std::map<std::string, std::vector<Candidate>>
candidates_by_page(const std::vector<DetectorOutput>& detections) {
    std::map<std::string, std::vector<Candidate>> out;
    for (const DetectorOutput& d : detections)
        out[d.page_id].insert(out[d.page_id].end(), d.candidates.begin(),
                              d.candidates.end());
    return out;
}

} // namespace detail

// Labeled feature rows for MLP training: detector proposals on the selected
// pages labeled by IoU against ground truth, plus the truth boxes themselves
// as positives. Page order is sorted so the dataset is reproducible.
inline std::vector<std::pair<LexicalFeatures, int>>
build_training_set(const Corpus& corpus, const std::vector<DetectorOutput>& detections,
                   const std::set<std::string>& pages, const LexParams& lex,
                   double iou_threshold) {
    const auto layouts = detail::index_layouts(corpus.layouts);
    const auto truth = detail::index_truth(corpus.truth);
    const auto candidates = detail::candidates_by_page(detections);

    std::vector<std::pair<LexicalFeatures, int>> out;
    for (const auto& [page_id, layout] : layouts) {
        if (!pages.count(page_id)) continue;
        const GroundTruth* gt = nullptr;
        if (auto it = truth.find(page_id); it != truth.end()) gt = it->second;

        if (gt) {
            for (const BBox& box : gt->boxes)
                out.emplace_back(extract_features(*layout, box, lex), 1);
        }
        if (auto it = candidates.find(page_id); it != candidates.end()) {
            for (const Candidate& c : it->second) {
                int label = 0;
                if (gt) {
                    for (const BBox& box : gt->boxes)
                        if (iou(c.box, box) >= iou_threshold) {
                            label = 1;
                            break;
                        }
                }
                out.emplace_back(extract_features(*layout, c.box, lex), label);
            }
        }
    }
    return out;
}

inline MlpModel train_variant_model(const Corpus& corpus,
                                    const std::vector<DetectorOutput>& detections,
                                    const std::set<std::string>& pages,
                                    const HarnessConfig& cfg) {
    const auto rows = build_training_set(corpus, detections, pages, cfg.lex,
                                         cfg.iou_threshold);
    std::vector<Sample> dataset;
    dataset.reserve(rows.size());
    for (const auto& [features, label] : rows)
        dataset.emplace_back(feature_vector(features, cfg.variant), label);
    return train(dataset, cfg.train, variant_input_dim(cfg.variant));
}

// Aggregate IoU-matched report over a set of pages; pure vision baseline
// when model == nullptr (fused score = s_vis).
inline EvalReport evaluate_pipeline(const Corpus& corpus,
                                    const std::vector<DetectorOutput>& detections,
                                    const std::set<std::string>& pages,
                                    const MlpModel* model, const HarnessConfig& cfg) {
    const auto layouts = detail::index_layouts(corpus.layouts);
    const auto truth = detail::index_truth(corpus.truth);
    const auto candidates = detail::candidates_by_page(detections);

    std::int64_t tp = 0, fp = 0, fn = 0;
    for (const auto& [page_id, layout] : layouts) {
        if (!pages.count(page_id)) continue;
        static const GroundTruth kEmpty;
        const GroundTruth* gt = &kEmpty;
        if (auto it = truth.find(page_id); it != truth.end()) gt = it->second;

        std::vector<ScoredCandidate> detected;
        if (auto it = candidates.find(page_id); it != candidates.end()) {
            if (model) {
                detected = run_pipeline(*layout, it->second, *model, cfg.lex, cfg.fusion,
                                        cfg.mode, cfg.variant);
            } else {
                std::vector<ScoredCandidate> scored;
                for (const Candidate& c : it->second)
                    scored.push_back({c.box, c.score, 0.0, c.score});
                detected = apply_threshold(scored, cfg.fusion.eta);
            }
        }
        const EvalReport page_report = match_detections(detected, *gt, cfg.iou_threshold);
        tp += page_report.true_positives;
        fp += page_report.false_positives;
        fn += page_report.false_negatives;
    }
    return make_report(tp, fp, fn);
}

// Split, train the variant's model on the train pages, evaluate on the test
// pages. Supplying a pre-trained model skips training; its width must match
// the variant.
inline EvalReport run_ablation(const Corpus& corpus,
                               const std::vector<DetectorOutput>& detections,
                               Variant variant, HarnessConfig cfg,
                               const MlpModel* pretrained = nullptr) {
    cfg.variant = variant;
    if (pretrained && pretrained->input_dim != variant_input_dim(variant))
        throw config_error("ablation: model input_dim does not match variant");
    const PageSplit split =
        split_pages(corpus.layouts, cfg.train_fraction, cfg.split_seed);
    MlpModel model;
    if (pretrained) model = *pretrained;
    else model = train_variant_model(corpus, detections, split.train, cfg);
    return evaluate_pipeline(corpus, detections, split.test, &model, cfg);
}

enum class SweepParameter { n_space, n_line1, n_line2, theta, eta };

inline SweepParameter sweep_parameter_from_string(const std::string& name) {
    if (name == "n_space" || name == "n-space") return SweepParameter::n_space;
    if (name == "n_line1" || name == "n-line1") return SweepParameter::n_line1;
    if (name == "n_line2" || name == "n-line2") return SweepParameter::n_line2;
    if (name == "theta") return SweepParameter::theta;
    if (name == "eta") return SweepParameter::eta;
    throw config_error("unknown sweep parameter: " + name);
}

inline std::string to_string(SweepParameter p) {
    switch (p) {
        case SweepParameter::n_space: return "n_space";
        case SweepParameter::n_line1: return "n_line1";
        case SweepParameter::n_line2: return "n_line2";
        case SweepParameter::theta: return "theta";
        case SweepParameter::eta: return "eta";
    }
    return "?";
}

// Evaluate the pipeline at each value of one parameter, all others held at
// the config's values. Lexical parameters change what the features mean, so
// the model is retrained per value (fixed seed); theta and eta reuse one
// model trained at the config's lexical settings.
inline SweepResult sweep(SweepParameter parameter, const std::vector<double>& values,
                         const HarnessConfig& fixed, const Corpus& corpus,
                         const std::vector<DetectorOutput>& detections) {
    if (values.empty()) throw input_error("sweep: no values");
    for (std::size_t i = 1; i < values.size(); ++i)
        if (!(values[i] > values[i - 1]))
            throw input_error("sweep: values must be strictly increasing");

    const bool lexical = parameter == SweepParameter::n_space ||
                         parameter == SweepParameter::n_line1 ||
                         parameter == SweepParameter::n_line2;
    for (double v : values) {
        if (lexical && (v < 1.0 || v != static_cast<double>(static_cast<int>(v))))
            throw input_error("sweep: " + to_string(parameter) +
                              " values must be integers >= 1");
        if (!lexical && (v < 0.0 || v > 1.0))
            throw input_error("sweep: " + to_string(parameter) + " values must be in [0,1]");
    }

    const PageSplit split =
        split_pages(corpus.layouts, fixed.train_fraction, fixed.split_seed);

    SweepResult result;
    result.parameter = to_string(parameter);

    MlpModel shared_model;
    if (!lexical)
        shared_model = train_variant_model(corpus, detections, split.train, fixed);

    for (double v : values) {
        HarnessConfig cfg = fixed;
        switch (parameter) {
            case SweepParameter::n_space: cfg.lex.n_space = static_cast<int>(v); break;
            case SweepParameter::n_line1: cfg.lex.n_line1 = static_cast<int>(v); break;
            case SweepParameter::n_line2: cfg.lex.n_line2 = static_cast<int>(v); break;
            case SweepParameter::theta: cfg.fusion.theta = v; break;
            case SweepParameter::eta: cfg.fusion.eta = v; break;
        }
        MlpModel model;
        if (lexical) model = train_variant_model(corpus, detections, split.train, cfg);
        else model = shared_model;
        result.points.emplace_back(
            v, evaluate_pipeline(corpus, detections, split.test, &model, cfg));
    }
    return result;
}

} // namespace tabfuse
