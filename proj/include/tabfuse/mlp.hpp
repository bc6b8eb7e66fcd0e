#pragma once

// Small feed-forward scorer mapping a lexical feature vector to a confidence
// in (0,1). Architecture: input -> hidden layers (rectified linear) ->
// single logistic output. Trained with full-batch gradient descent on
// binary cross-entropy plus an L2 penalty on the weights; full-batch with a
// seeded init keeps training exactly reproducible.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tabfuse/error.hpp"
#include "tabfuse/rng.hpp"

namespace tabfuse {

struct MlpLayer {
    std::vector<std::vector<double>> w; // [out][in]
    std::vector<double> b;              // [out]
};

struct MlpModel {
    int input_dim = 2;                   // 2 for the full model, 1 for ablations
    std::vector<int> hidden_dims{16};    // empty list = plain logistic regression
    std::vector<double> input_scale;     // per-input factor applied before layer 1
    std::vector<MlpLayer> layers;
    struct Meta {
        std::uint64_t seed = 0;
        int epochs = 0;
        double final_loss = 0.0;
    } meta;
};

struct TrainConfig {
    double learning_rate = 0.05;
    int epochs = 500;
    std::uint64_t seed = 0;
    double l2_penalty = 1e-4;

    void validate() const {
        if (!(learning_rate > 0.0)) throw input_error("train config: learning_rate must be > 0");
        if (epochs < 1) throw input_error("train config: epochs must be >= 1");
        if (l2_penalty < 0.0) throw input_error("train config: l2_penalty must be >= 0");
    }
};

using Sample = std::pair<std::vector<double>, int>; // (features, label in {0,1})

namespace detail {

inline double logistic(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// Numerically stable binary cross-entropy given the pre-activation.
inline double bce_from_logit(double z, int label) {
    return std::max(z, 0.0) - z * label + std::log1p(std::exp(-std::abs(z)));
}

struct ForwardTrace {
    std::vector<std::vector<double>> activations; // per layer, post-activation
    double logit = 0.0;
};

inline ForwardTrace forward_trace(const MlpModel& model,
                                  const std::vector<double>& features) {
    if (features.size() != static_cast<std::size_t>(model.input_dim))
        throw input_error("mlp forward: feature vector length " +
                          std::to_string(features.size()) + " != input_dim " +
                          std::to_string(model.input_dim));
    for (double v : features)
        if (!std::isfinite(v)) throw input_error("mlp forward: non-finite feature");

    ForwardTrace trace;
    std::vector<double> x(features.size());
    for (std::size_t i = 0; i < features.size(); ++i)
        x[i] = features[i] * (i < model.input_scale.size() ? model.input_scale[i] : 1.0);
    trace.activations.push_back(x);

    for (std::size_t li = 0; li < model.layers.size(); ++li) {
        const MlpLayer& layer = model.layers[li];
        const bool last = li + 1 == model.layers.size();
        std::vector<double> out(layer.b.size());
        for (std::size_t o = 0; o < layer.b.size(); ++o) {
            double z = layer.b[o];
            for (std::size_t i = 0; i < x.size(); ++i) z += layer.w[o][i] * x[i];
            out[o] = last ? z : std::max(0.0, z);
        }
        if (last) trace.logit = out[0];
        trace.activations.push_back(out);
        x = std::move(out);
    }
    return trace;
}

inline void validate_shapes(const MlpModel& model) {
    if (model.input_dim != 1 && model.input_dim != 2)
        throw validation_error("mlp model: input_dim must be 1 or 2");
    if (model.input_scale.size() != static_cast<std::size_t>(model.input_dim))
        throw validation_error("mlp model: input_scale length != input_dim");
    for (double s : model.input_scale)
        if (!(s > 0.0) || !std::isfinite(s))
            throw validation_error("mlp model: input_scale entries must be positive and finite");
    if (model.layers.size() != model.hidden_dims.size() + 1)
        throw validation_error("mlp model: layer count does not match hidden_dims");
    std::size_t in = static_cast<std::size_t>(model.input_dim);
    for (std::size_t li = 0; li < model.layers.size(); ++li) {
        const MlpLayer& layer = model.layers[li];
        const std::size_t out = li < model.hidden_dims.size()
                                    ? static_cast<std::size_t>(model.hidden_dims[li])
                                    : 1;
        if (layer.w.size() != out || layer.b.size() != out)
            throw validation_error("mlp model: layer " + std::to_string(li) + " has wrong fan-out");
        for (const auto& row : layer.w) {
            if (row.size() != in)
                throw validation_error("mlp model: layer " + std::to_string(li) + " has wrong fan-in");
            for (double v : row)
                if (!std::isfinite(v)) throw validation_error("mlp model: non-finite weight");
        }
        for (double v : layer.b)
            if (!std::isfinite(v)) throw validation_error("mlp model: non-finite bias");
        in = out;
    }
}

// Mean BCE + L2 penalty over the dataset; gradients laid out like the model.
inline double loss_and_gradients(const MlpModel& model,
                                 const std::vector<Sample>& dataset,
                                 double l2_penalty,
                                 std::vector<MlpLayer>* grads_out) {
    std::vector<MlpLayer> grads(model.layers.size());
    for (std::size_t li = 0; li < model.layers.size(); ++li) {
        grads[li].w.assign(model.layers[li].w.size(),
                           std::vector<double>(model.layers[li].w[0].size(), 0.0));
        grads[li].b.assign(model.layers[li].b.size(), 0.0);
    }

    const double inv_n = 1.0 / static_cast<double>(dataset.size());
    double loss = 0.0;
    for (const Sample& sample : dataset) {
        const ForwardTrace trace = forward_trace(model, sample.first);
        loss += bce_from_logit(trace.logit, sample.second) * inv_n;

        // delta at the output: d(loss)/d(logit) = (p - y) / N
        std::vector<double> delta{(logistic(trace.logit) - sample.second) * inv_n};
        for (std::size_t li = model.layers.size(); li-- > 0;) {
            const MlpLayer& layer = model.layers[li];
            const std::vector<double>& input = trace.activations[li];
            std::vector<double> prev_delta(input.size(), 0.0);
            for (std::size_t o = 0; o < layer.b.size(); ++o) {
                grads[li].b[o] += delta[o];
                for (std::size_t i = 0; i < input.size(); ++i) {
                    grads[li].w[o][i] += delta[o] * input[i];
                    prev_delta[i] += delta[o] * layer.w[o][i];
                }
            }
            if (li > 0) {
                // rectified-linear derivative of the previous layer's output
                for (std::size_t i = 0; i < prev_delta.size(); ++i)
                    if (trace.activations[li][i] <= 0.0) prev_delta[i] = 0.0;
                delta = std::move(prev_delta);
            }
        }
    }

    for (std::size_t li = 0; li < model.layers.size(); ++li)
        for (std::size_t o = 0; o < model.layers[li].w.size(); ++o)
            for (std::size_t i = 0; i < model.layers[li].w[o].size(); ++i) {
                loss += l2_penalty * model.layers[li].w[o][i] * model.layers[li].w[o][i];
                grads[li].w[o][i] += 2.0 * l2_penalty * model.layers[li].w[o][i];
            }

    if (grads_out) *grads_out = std::move(grads);
    return loss;
}

} // namespace detail

// Confidence in (0,1) for one feature vector. The logistic saturates to
// exactly 0.0 / 1.0 in double arithmetic for |logit| beyond ~37, so the
// result is clamped to the nearest interior representable values.
inline double forward(const MlpModel& model, const std::vector<double>& features) {
    const double p = detail::logistic(detail::forward_trace(model, features).logit);
    constexpr double lo = std::numeric_limits<double>::min();
    const double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
    return std::clamp(p, lo, hi);
}

// Full-batch gradient descent. Deterministic under a fixed seed: seeded
// init, fixed iteration order. input_scale is fit to the training data as
// 1/max(1, per-feature max) so the unbounded count features do not stall
// the logistic output.
inline MlpModel train(const std::vector<Sample>& dataset, const TrainConfig& config,
                      int input_dim, const std::vector<int>& hidden_dims = {16}) {
    config.validate();
    if (dataset.empty()) throw train_error("train: empty dataset");
    bool has_pos = false, has_neg = false;
    for (const Sample& s : dataset) {
        if (s.second != 0 && s.second != 1)
            throw input_error("train: labels must be 0 or 1");
        if (s.first.size() != static_cast<std::size_t>(input_dim))
            throw input_error("train: feature vector length != input_dim");
        (s.second ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg)
        throw train_error("train: dataset contains a single class");

    MlpModel model;
    model.input_dim = input_dim;
    model.hidden_dims = hidden_dims;
    model.meta.seed = config.seed;
    model.meta.epochs = config.epochs;

    model.input_scale.assign(static_cast<std::size_t>(input_dim), 1.0);
    for (std::size_t i = 0; i < model.input_scale.size(); ++i) {
        double max_v = 1.0;
        for (const Sample& s : dataset) max_v = std::max(max_v, s.first[i]);
        model.input_scale[i] = 1.0 / max_v;
    }

    Rng rng(splitmix64(config.seed));
    std::size_t fan_in = static_cast<std::size_t>(input_dim);
    std::vector<std::size_t> outs;
    for (int h : hidden_dims) {
        if (h < 1) throw input_error("train: hidden layer sizes must be >= 1");
        outs.push_back(static_cast<std::size_t>(h));
    }
    outs.push_back(1);
    for (std::size_t fan_out : outs) {
        MlpLayer layer;
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        layer.w.assign(fan_out, std::vector<double>(fan_in, 0.0));
        for (auto& row : layer.w)
            for (double& v : row) v = rng.uniform(-limit, limit);
        layer.b.assign(fan_out, 0.0);
        model.layers.push_back(std::move(layer));
        fan_in = fan_out;
    }

    std::vector<MlpLayer> grads;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const double loss =
            detail::loss_and_gradients(model, dataset, config.l2_penalty, &grads);
        if (!std::isfinite(loss))
            throw train_error("train: loss diverged at epoch " + std::to_string(epoch));
        for (std::size_t li = 0; li < model.layers.size(); ++li) {
            for (std::size_t o = 0; o < model.layers[li].w.size(); ++o) {
                for (std::size_t i = 0; i < model.layers[li].w[o].size(); ++i)
                    model.layers[li].w[o][i] -= config.learning_rate * grads[li].w[o][i];
                model.layers[li].b[o] -= config.learning_rate * grads[li].b[o];
            }
        }
    }
    model.meta.final_loss =
        detail::loss_and_gradients(model, dataset, config.l2_penalty, nullptr);
    if (!std::isfinite(model.meta.final_loss))
        throw train_error("train: loss diverged");
    return model;
}

// Compare analytic gradients against central finite differences (step 1e-5)
// on every parameter; returns the maximum relative error.
inline double gradient_check(const MlpModel& model, const std::vector<Sample>& dataset,
                             double l2_penalty = 1e-4) {
    if (dataset.empty()) throw input_error("gradient_check: empty dataset");
    std::vector<MlpLayer> grads;
    detail::loss_and_gradients(model, dataset, l2_penalty, &grads);

    MlpModel probe = model;
    const double h = 1e-5;
    double max_rel = 0.0;
    auto check_param = [&](double* param, double analytic) {
        const double saved = *param;
        *param = saved + h;
        const double up = detail::loss_and_gradients(probe, dataset, l2_penalty, nullptr);
        *param = saved - h;
        const double down = detail::loss_and_gradients(probe, dataset, l2_penalty, nullptr);
        *param = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double denom = std::max(1e-8, std::abs(analytic) + std::abs(numeric));
        max_rel = std::max(max_rel, std::abs(analytic - numeric) / denom);
    };
    for (std::size_t li = 0; li < probe.layers.size(); ++li) {
        for (std::size_t o = 0; o < probe.layers[li].w.size(); ++o) {
            for (std::size_t i = 0; i < probe.layers[li].w[o].size(); ++i)
                check_param(&probe.layers[li].w[o][i], grads[li].w[o][i]);
            check_param(&probe.layers[li].b[o], grads[li].b[o]);
        }
    }
    return max_rel;
}

inline nlohmann::ordered_json model_to_json(const MlpModel& model) {
    nlohmann::ordered_json j;
    j["input_dim"] = model.input_dim;
    j["hidden_dims"] = model.hidden_dims;
    j["input_scale"] = model.input_scale;
    j["layers"] = nlohmann::ordered_json::array();
    for (const MlpLayer& layer : model.layers)
        j["layers"].push_back({{"w", layer.w}, {"b", layer.b}});
    j["meta"] = {{"seed", model.meta.seed},
                 {"epochs", model.meta.epochs},
                 {"final_loss", model.meta.final_loss}};
    return j;
}

inline MlpModel model_from_json(const nlohmann::json& j) {
    MlpModel model;
    try {
        model.input_dim = j.at("input_dim").get<int>();
        model.hidden_dims = j.at("hidden_dims").get<std::vector<int>>();
        model.input_scale = j.at("input_scale").get<std::vector<double>>();
        for (const auto& lj : j.at("layers")) {
            MlpLayer layer;
            layer.w = lj.at("w").get<std::vector<std::vector<double>>>();
            layer.b = lj.at("b").get<std::vector<double>>();
            if (layer.w.empty() || layer.w[0].empty())
                throw validation_error("mlp model: empty layer");
            model.layers.push_back(std::move(layer));
        }
        if (j.contains("meta")) {
            model.meta.seed = j["meta"].value("seed", std::uint64_t{0});
            model.meta.epochs = j["meta"].value("epochs", 0);
            model.meta.final_loss = j["meta"].value("final_loss", 0.0);
        }
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("mlp model: ") + e.what());
    }
    detail::validate_shapes(model);
    return model;
}

// Serialization keeps full precision (shortest round-trip decimal), so
// save/load is exact.
inline void save_model(const MlpModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write model file: " + path);
    out << model_to_json(model).dump(2) << '\n';
}

inline MlpModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot read model file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw parse_error("model file '" + path + "': " + e.what());
    }
    return model_from_json(j);
}

} // namespace tabfuse
