#pragma once

// Detection evaluation: IoU box matching, precision/recall/F1 reports, and
// the improvement-rate arithmetic used when comparing two pipelines.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "tabfuse/error.hpp"
#include "tabfuse/fusion.hpp"
#include "tabfuse/layout.hpp"

namespace tabfuse {

struct GroundTruth {
    std::string page_id;
    std::vector<BBox> boxes;

    void validate() const {
        for (std::size_t i = 0; i < boxes.size(); ++i) {
            validate_box(boxes[i], "truth box " + std::to_string(i) + " on page '" + page_id + "'");
            for (std::size_t j = 0; j < i; ++j)
                if (boxes[i] == boxes[j])
                    throw validation_error("duplicate truth box on page '" + page_id + "'");
        }
    }
};

struct EvalReport {
    std::int64_t true_positives = 0;
    std::int64_t false_positives = 0;
    std::int64_t false_negatives = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

inline double f1_score(double precision, double recall) {
    if (!(precision >= 0.0 && precision <= 1.0 && recall >= 0.0 && recall <= 1.0))
        throw input_error("f1: inputs outside [0,1]");
    const double sum = precision + recall;
    if (sum == 0.0) return 0.0;
    return 2.0 * precision * recall / sum;
}

// 0/0 conventions fixed to 0 so reports are total.
inline EvalReport make_report(std::int64_t tp, std::int64_t fp, std::int64_t fn) {
    EvalReport r;
    r.true_positives = tp;
    r.false_positives = fp;
    r.false_negatives = fn;
    r.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    r.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    r.f1 = f1_score(r.precision, r.recall);
    return r;
}

inline double iou(const BBox& a, const BBox& b) {
    validate_box(a);
    validate_box(b);
    const double ix = std::max(0.0, std::min(a.x1, b.x1) - std::max(a.x0, b.x0));
    const double iy = std::max(0.0, std::min(a.y1, b.y1) - std::max(a.y0, b.y0));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

// Greedy one-to-one matching for a single page: predictions in descending
// score order (ties by box order), each taking its best still-unmatched
// truth box when that IoU clears the threshold. Unmatched predictions are
// false positives, unmatched truths false negatives.
inline EvalReport match_detections(std::vector<ScoredCandidate> preds,
                                   const GroundTruth& truth,
                                   double iou_threshold = 0.5) {
    truth.validate();
    std::stable_sort(preds.begin(), preds.end(),
                     [](const ScoredCandidate& a, const ScoredCandidate& b) {
                         if (a.s_final != b.s_final) return a.s_final > b.s_final;
                         return a.box < b.box;
                     });
    std::vector<bool> matched(truth.boxes.size(), false);
    std::int64_t tp = 0;
    for (const ScoredCandidate& pred : preds) {
        double best = 0.0;
        std::size_t best_idx = truth.boxes.size();
        for (std::size_t t = 0; t < truth.boxes.size(); ++t) {
            if (matched[t]) continue;
            const double v = iou(pred.box, truth.boxes[t]);
            if (v > best) {
                best = v;
                best_idx = t;
            }
        }
        if (best_idx < truth.boxes.size() && best >= iou_threshold) {
            matched[best_idx] = true;
            ++tp;
        }
    }
    const std::int64_t fp = static_cast<std::int64_t>(preds.size()) - tp;
    const std::int64_t fn = static_cast<std::int64_t>(truth.boxes.size()) - tp;
    return make_report(tp, fp, fn);
}

// (x - y) / y * 100, in percent.
inline double improvement_rate(double x, double y) {
    if (!(y > 0.0)) throw input_error("improvement_rate: baseline must be positive");
    return (x - y) / y * 100.0;
}

struct SweepResult {
    std::string parameter;
    std::vector<std::pair<double, EvalReport>> points; // strictly increasing values
};

} // namespace tabfuse
