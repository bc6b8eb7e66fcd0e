#pragma once

// Confidence score fusion: combine the vision score s_vis and the lexical
// score s_lex into the final score, then apply the detection threshold eta.
//
// Literal rule: the lexical score wins only when it clears the gate theta
// and is at least the vision score; it can therefore only raise scores.
// Replace mode additionally lets a confidently-low lexical score pull a
// candidate down (s_lex <= 1 - theta forces min(s_vis, s_lex)), which is
// what actually suppresses high-confidence false positives.

#include <string>
#include <vector>

#include "tabfuse/error.hpp"
#include "tabfuse/layout.hpp"
#include "tabfuse/lexfeat.hpp"
#include "tabfuse/mlp.hpp"

namespace tabfuse {

struct ScoredCandidate {
    BBox box;
    double s_vis = 0.0;
    double s_lex = 0.0;
    double s_final = 0.0; // always one of {s_vis, s_lex}
};

struct FusionParams {
    double theta = 0.3; // gate below which the lexical score is ignored
    double eta = 0.5;   // detection threshold on the fused score

    void validate() const {
        if (theta < 0.0 || theta > 1.0) throw input_error("fusion: theta outside [0,1]");
        if (eta < 0.0 || eta > 1.0) throw input_error("fusion: eta outside [0,1]");
    }
};

enum class FusionMode { literal, replace };

inline FusionMode fusion_mode_from_string(const std::string& name) {
    if (name == "literal") return FusionMode::literal;
    if (name == "replace") return FusionMode::replace;
    throw config_error("unknown fusion mode: " + name);
}

// Which lexical features feed the model: both, captions only, or irregular
// spacing only.
enum class Variant { full, minus_l1, minus_l2 };

inline Variant variant_from_string(const std::string& name) {
    if (name == "full") return Variant::full;
    if (name == "minus-l1" || name == "minus_l1") return Variant::minus_l1;
    if (name == "minus-l2" || name == "minus_l2") return Variant::minus_l2;
    throw config_error("unknown variant: " + name);
}

inline int variant_input_dim(Variant v) { return v == Variant::full ? 2 : 1; }

inline std::vector<double> feature_vector(const LexicalFeatures& f, Variant v) {
    switch (v) {
        case Variant::full: return {static_cast<double>(f.l1), static_cast<double>(f.l2)};
        case Variant::minus_l1: return {static_cast<double>(f.l2)};
        case Variant::minus_l2: return {static_cast<double>(f.l1)};
    }
    throw config_error("unknown variant");
}

namespace detail {

inline void check_unit(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0))
        throw input_error(std::string("fuse_score: ") + name + " outside [0,1]");
}

} // namespace detail

// Literal fusion rule. Ties (s_lex == s_vis >= theta) resolve to s_lex;
// numerically identical either way.
inline double fuse_score(double s_vis, double s_lex, double theta) {
    detail::check_unit(s_vis, "s_vis");
    detail::check_unit(s_lex, "s_lex");
    detail::check_unit(theta, "theta");
    if (s_lex >= theta && s_lex >= s_vis) return s_lex;
    return s_vis;
}

inline double fuse_score(double s_vis, double s_lex, double theta, FusionMode mode) {
    if (mode == FusionMode::literal) return fuse_score(s_vis, s_lex, theta);
    detail::check_unit(s_vis, "s_vis");
    detail::check_unit(s_lex, "s_lex");
    detail::check_unit(theta, "theta");
    if (s_lex >= theta && s_lex >= s_vis) return s_lex;
    if (s_lex <= 1.0 - theta && s_lex <= s_vis) return s_lex;
    return s_vis;
}

// Keep exactly the candidates whose fused score clears eta; order preserved.
inline std::vector<ScoredCandidate>
apply_threshold(const std::vector<ScoredCandidate>& candidates, double eta) {
    detail::check_unit(eta, "eta");
    std::vector<ScoredCandidate> out;
    for (const ScoredCandidate& c : candidates)
        if (c.s_final >= eta) out.push_back(c);
    return out;
}

// Score every candidate on a page (features -> model -> fusion) without
// thresholding. Boxes pass through unchanged; only confidences move.
inline std::vector<ScoredCandidate>
score_candidates(const PageLayout& page, const std::vector<Candidate>& candidates,
                 const MlpModel& model, const LexParams& lex, double theta,
                 FusionMode mode = FusionMode::literal, Variant variant = Variant::full) {
    if (model.input_dim != variant_input_dim(variant))
        throw config_error("model input_dim does not match variant");
    std::vector<ScoredCandidate> out;
    out.reserve(candidates.size());
    for (const Candidate& c : candidates) {
        const LexicalFeatures feats = extract_features(page, c.box, lex);
        ScoredCandidate sc;
        sc.box = c.box;
        sc.s_vis = c.score;
        sc.s_lex = forward(model, feature_vector(feats, variant));
        sc.s_final = fuse_score(sc.s_vis, sc.s_lex, theta, mode);
        out.push_back(sc);
    }
    return out;
}

// End-to-end per-page pipeline: extract features, score, fuse, threshold.
inline std::vector<ScoredCandidate>
run_pipeline(const PageLayout& page, const std::vector<Candidate>& candidates,
             const MlpModel& model, const LexParams& lex, const FusionParams& fus,
             FusionMode mode = FusionMode::literal, Variant variant = Variant::full) {
    fus.validate();
    return apply_threshold(
        score_candidates(page, candidates, model, lex, fus.theta, mode, variant),
        fus.eta);
}

} // namespace tabfuse
