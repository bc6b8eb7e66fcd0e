#pragma once

// Command-line surface. Subcommands mirror the pipeline stages:
//   gen          synthesize a corpus (layout/truth/labels JSON)
//   mock-detect  emit deterministic detector output over a corpus
//   extract      lexical features for candidate or truth boxes (JSONL)
//   train        fit the lexical scorer from labeled features
//   run          fuse detector output with lexical scores (JSONL)
//   eval         IoU-matched precision/recall/F1, optional baseline compare
//   sweep        parameter sweep, CSV curve
// Outputs are order-normalized (sorted by page id, then box) so reruns are
// byte-identical.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tabfuse/error.hpp"
#include "tabfuse/eval.hpp"
#include "tabfuse/fusion.hpp"
#include "tabfuse/harness.hpp"
#include "tabfuse/ingest.hpp"
#include "tabfuse/layout.hpp"
#include "tabfuse/lexfeat.hpp"
#include "tabfuse/log.hpp"
#include "tabfuse/mlp.hpp"
#include "tabfuse/pdf.hpp"
#include "tabfuse/syngen.hpp"

namespace tabfuse {

namespace clidetail {

struct FeatureRecord {
    std::string page_id;
    BBox box;
    LexicalFeatures features;
    int label = -1; // -1 = unlabeled
};

struct FusedRecord {
    std::string page_id;
    ScoredCandidate candidate;
    bool detected = false;
};

inline bool record_before(const std::string& pa, const BBox& ba, const std::string& pb,
                          const BBox& bb) {
    if (pa != pb) return pa < pb;
    return ba < bb;
}

inline nlohmann::ordered_json report_to_json(const EvalReport& r) {
    return {{"true_positives", r.true_positives},
            {"false_positives", r.false_positives},
            {"false_negatives", r.false_negatives},
            {"precision", r.precision},
            {"recall", r.recall},
            {"f1", r.f1}};
}

inline std::vector<double> parse_value_list(const std::string& csv) {
    std::vector<double> values;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            values.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw input_error("bad numeric value in list: '" + item + "'");
        }
    }
    if (values.empty()) throw input_error("empty value list");
    return values;
}

inline void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!path.empty() && path != "-") {
        file.open(path, std::ios::binary);
        if (!file) throw io_error("cannot write file: " + path);
        out = &file;
    }
    for (const std::string& line : lines) *out << line << '\n';
}

inline std::vector<nlohmann::json> read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open file: " + path);
    std::vector<nlohmann::json> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            records.push_back(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw parse_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return records;
}

inline std::string stats_text(const CorpusStats& stats) {
    std::ostringstream out;
    for (const auto& [cls, s] : stats.by_class) {
        out << cls << ": " << s.count << " regions";
        auto hist = [](const std::map<int, int>& h) {
            std::ostringstream o;
            for (const auto& [v, c] : h) o << ' ' << v << 'x' << c;
            return o.str();
        };
        out << "  l1:" << hist(s.l1_hist) << "  l2:" << hist(s.l2_hist) << '\n';
    }
    return out.str();
}

inline nlohmann::ordered_json stats_json(const CorpusStats& stats) {
    nlohmann::ordered_json j;
    for (const auto& [cls, s] : stats.by_class) {
        nlohmann::ordered_json cj;
        cj["count"] = s.count;
        for (const auto& [v, c] : s.l1_hist) cj["l1"][std::to_string(v)] = c;
        for (const auto& [v, c] : s.l2_hist) cj["l2"][std::to_string(v)] = c;
        j[cls] = std::move(cj);
    }
    return j;
}

inline void add_lex_flags(CLI::App* cmd, LexParams* lex) {
    cmd->add_option("--n-space", lex->n_space, "irregular gaps required beyond this count")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--n-line1", lex->n_line1, "consecutiveness window in lines")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--n-line2", lex->n_line2, "caption search reach in lines")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--gap-factor", lex->gap_factor,
                    "gap is irregular beyond gap_factor * reference gap");
}

} // namespace clidetail

inline int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"tabfuse: lexical re-scoring and evaluation for table detectors"};
    app.require_subcommand(1);

    // ---- gen ----
    auto* gen = app.add_subcommand("gen", "generate a synthetic corpus");
    int gen_pages = 200;
    std::uint64_t gen_seed = 7;
    std::string gen_out = "corpus";
    std::string gen_preset = "default";
    bool gen_json = false;
    gen->add_option("--pages", gen_pages, "number of pages")->check(CLI::PositiveNumber);
    gen->add_option("--seed", gen_seed, "corpus seed");
    gen->add_option("--out", gen_out, "output directory");
    gen->add_option("--preset", gen_preset, "corpus recipe: default|nspace-sweep|nline2-sweep");
    gen->add_flag("--json", gen_json, "print stats as JSON");

    // ---- mock-detect ----
    auto* mock = app.add_subcommand("mock-detect", "deterministic mock detector output");
    std::string mock_layout, mock_truth, mock_labels, mock_out = "-";
    std::string mock_name = "mock";
    MockNoise mock_noise;
    std::uint64_t mock_seed = 7;
    mock->add_option("--layout", mock_layout, "layout JSON")->required();
    mock->add_option("--truth", mock_truth, "ground truth JSON")->required();
    mock->add_option("--labels", mock_labels, "region labels JSON")->required();
    mock->add_option("--out", mock_out, "output detector JSON");
    mock->add_option("--name", mock_name, "detector name");
    mock->add_option("--jitter", mock_noise.jitter, "box jitter");
    mock->add_option("--fp-rate", mock_noise.fp_rate, "false positive rate");
    mock->add_option("--fn-rate", mock_noise.fn_rate, "false negative rate");
    mock->add_option("--fp-score", mock_noise.fp_score, "false positive score");
    mock->add_option("--tp-score-lo", mock_noise.tp_score_lo, "true positive score range low");
    mock->add_option("--tp-score-hi", mock_noise.tp_score_hi, "true positive score range high");
    mock->add_option("--seed", mock_seed, "detector seed");

    // ---- extract ----
    auto* extract = app.add_subcommand("extract", "lexical features for candidate boxes");
    std::string ex_layout, ex_detections, ex_truth_boxes, ex_truth, ex_out = "-";
    LexParams ex_lex;
    double ex_iou = 0.5;
    extract->add_option("--layout", ex_layout, "layout JSON")->required();
    extract->add_option("--detections", ex_detections, "detector JSON supplying boxes");
    extract->add_option("--truth-boxes", ex_truth_boxes, "truth JSON supplying boxes");
    extract->add_option("--truth", ex_truth, "truth JSON for labeling records");
    extract->add_option("--iou", ex_iou, "IoU threshold for labeling");
    extract->add_option("--out", ex_out, "output features JSONL");
    clidetail::add_lex_flags(extract, &ex_lex);

    // ---- train ----
    auto* train_cmd = app.add_subcommand("train", "train the lexical scorer");
    std::string tr_features, tr_out = "model.json", tr_variant = "full";
    TrainConfig tr_config;
    train_cmd->add_option("--features", tr_features, "labeled features JSONL")->required();
    train_cmd->add_option("--out", tr_out, "output model JSON");
    train_cmd->add_option("--variant", tr_variant, "full|minus-l1|minus-l2");
    train_cmd->add_option("--lr", tr_config.learning_rate, "learning rate");
    train_cmd->add_option("--epochs", tr_config.epochs, "training epochs")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--seed", tr_config.seed, "init seed");
    train_cmd->add_option("--l2-penalty", tr_config.l2_penalty, "L2 weight penalty");

    // ---- run ----
    auto* run = app.add_subcommand("run", "fuse detector output with lexical scores");
    std::string run_layout, run_model, run_out = "-";
    std::vector<std::string> run_detections;
    std::string run_mode = "literal", run_variant = "full";
    LexParams run_lex;
    FusionParams run_fusion;
    run->add_option("--layout", run_layout, "layout JSON")->required();
    run->add_option("--detections", run_detections, "detector JSON (repeatable)")
        ->required()
        ->expected(-1);
    run->add_option("--model", run_model, "model JSON")->required();
    run->add_option("--out", run_out, "output fused JSONL");
    run->add_option("--theta", run_fusion.theta, "lexical gate");
    run->add_option("--eta", run_fusion.eta, "detection threshold");
    run->add_option("--fusion-mode", run_mode, "literal|replace");
    run->add_option("--variant", run_variant, "full|minus-l1|minus-l2");
    clidetail::add_lex_flags(run, &run_lex);

    // ---- eval ----
    auto* eval_cmd = app.add_subcommand("eval", "score predictions against ground truth");
    std::string ev_predictions, ev_truth, ev_compare, ev_out;
    double ev_iou = 0.5;
    bool ev_json = false;
    eval_cmd->add_option("--predictions", ev_predictions, "fused JSONL")->required();
    eval_cmd->add_option("--truth", ev_truth, "ground truth JSON")->required();
    eval_cmd->add_option("--iou", ev_iou, "IoU matching threshold");
    eval_cmd->add_option("--compare", ev_compare, "baseline report JSON for improvement rate");
    eval_cmd->add_option("--out", ev_out, "write report JSON here");
    eval_cmd->add_flag("--json", ev_json, "print report as JSON");

    // ---- pdf-to-layout ----
    auto* pdf_cmd =
        app.add_subcommand("pdf-to-layout", "extract layout JSON from a text-based PDF");
    std::string pdf_in, pdf_out = "-";
    pdf_cmd->add_option("--pdf", pdf_in, "input PDF")->required();
    pdf_cmd->add_option("--out", pdf_out, "output layout JSON");

    // ---- sweep ----
    auto* sweep_cmd = app.add_subcommand("sweep", "parameter sweep, CSV curve");
    std::string sw_param, sw_values, sw_layout, sw_truth, sw_out = "-";
    std::vector<std::string> sw_detections;
    std::string sw_mode = "literal", sw_variant = "full";
    LexParams sw_lex;
    FusionParams sw_fusion;
    TrainConfig sw_train;
    double sw_iou = 0.5;
    std::uint64_t sw_split_seed = 7;
    sweep_cmd->add_option("--param", sw_param, "n-space|n-line1|n-line2|theta|eta")->required();
    sweep_cmd->add_option("--values", sw_values, "comma-separated, strictly increasing")
        ->required();
    sweep_cmd->add_option("--layout", sw_layout, "layout JSON")->required();
    sweep_cmd->add_option("--detections", sw_detections, "detector JSON (repeatable)")
        ->required()
        ->expected(-1);
    sweep_cmd->add_option("--truth", sw_truth, "ground truth JSON")->required();
    sweep_cmd->add_option("--out", sw_out, "output CSV");
    sweep_cmd->add_option("--theta", sw_fusion.theta, "lexical gate");
    sweep_cmd->add_option("--eta", sw_fusion.eta, "detection threshold");
    sweep_cmd->add_option("--fusion-mode", sw_mode, "literal|replace");
    sweep_cmd->add_option("--variant", sw_variant, "full|minus-l1|minus-l2");
    sweep_cmd->add_option("--iou", sw_iou, "IoU matching threshold");
    sweep_cmd->add_option("--seed", sw_train.seed, "training seed");
    sweep_cmd->add_option("--split-seed", sw_split_seed, "train/test split seed");
    sweep_cmd->add_option("--epochs", sw_train.epochs, "training epochs")
        ->check(CLI::PositiveNumber);
    clidetail::add_lex_flags(sweep_cmd, &sw_lex);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*gen) {
            CorpusSpec spec = corpus_preset(gen_preset, gen_pages, gen_seed);
            const Corpus corpus = generate_corpus(spec);
            std::filesystem::create_directories(gen_out);
            write_layout(gen_out + "/layout.json", corpus.layouts);
            write_ground_truth(gen_out + "/truth.json", corpus.truth);
            write_region_labels(gen_out + "/labels.json", corpus.labels);
            const CorpusStats stats = corpus_stats(corpus);
            if (gen_json) std::cout << clidetail::stats_json(stats).dump(2) << '\n';
            else std::cout << clidetail::stats_text(stats);
            log_info("corpus written to " + gen_out);
        } else if (*mock) {
            const auto layouts = read_layout(mock_layout);
            const auto truth = read_ground_truth(mock_truth);
            const auto labels = read_region_labels(mock_labels);
            const auto outputs = mock_detector(truth, layouts, labels, mock_noise, mock_seed);
            if (mock_out == "-") {
                std::cout << detector_to_json(outputs, mock_name).dump(2) << '\n';
            } else {
                write_detector_output(mock_out, outputs, mock_name);
            }
        } else if (*extract) {
            ex_lex.validate();
            if (ex_detections.empty() == ex_truth_boxes.empty())
                throw config_error("extract: give exactly one of --detections / --truth-boxes");
            const auto layouts = read_layout(ex_layout);
            std::map<std::string, const PageLayout*> by_id;
            for (const auto& p : layouts) by_id[p.page_id] = &p;

            std::vector<std::pair<std::string, BBox>> boxes;
            if (!ex_detections.empty()) {
                for (const DetectorOutput& d : read_detector_output(ex_detections))
                    for (const Candidate& c : d.candidates)
                        boxes.emplace_back(d.page_id, c.box);
            } else {
                for (const GroundTruth& t : read_ground_truth(ex_truth_boxes))
                    for (const BBox& b : t.boxes) boxes.emplace_back(t.page_id, b);
            }
            std::map<std::string, const GroundTruth*> truth_by_id;
            std::vector<GroundTruth> truth;
            if (!ex_truth.empty()) {
                truth = read_ground_truth(ex_truth);
                for (const auto& t : truth) truth_by_id[t.page_id] = &t;
            }
            std::sort(boxes.begin(), boxes.end(), [](const auto& a, const auto& b) {
                return clidetail::record_before(a.first, a.second, b.first, b.second);
            });
            std::vector<std::string> lines;
            for (const auto& [page_id, box] : boxes) {
                const auto it = by_id.find(page_id);
                if (it == by_id.end())
                    throw config_error("extract: page '" + page_id + "' not in layout file");
                const LexicalFeatures f = extract_features(*it->second, box, ex_lex);
                nlohmann::ordered_json j;
                j["page_id"] = page_id;
                j["box"] = {box.x0, box.y0, box.x1, box.y1};
                j["l1"] = f.l1;
                j["l2"] = f.l2;
                if (!ex_truth.empty()) {
                    int label = 0;
                    if (auto t = truth_by_id.find(page_id); t != truth_by_id.end())
                        for (const BBox& gt : t->second->boxes)
                            if (iou(box, gt) >= ex_iou) {
                                label = 1;
                                break;
                            }
                    j["label"] = label;
                }
                lines.push_back(j.dump());
            }
            clidetail::write_lines(ex_out, lines);
        } else if (*train_cmd) {
            const Variant variant = variant_from_string(tr_variant);
            std::vector<Sample> dataset;
            for (const nlohmann::json& j : clidetail::read_jsonl(tr_features)) {
                if (!j.contains("label"))
                    throw config_error("train: features file has unlabeled records "
                                       "(run extract with --truth)");
                LexicalFeatures f{j.at("l1").get<int>(), j.at("l2").get<int>()};
                dataset.emplace_back(feature_vector(f, variant), j.at("label").get<int>());
            }
            const MlpModel model = train(dataset, tr_config, variant_input_dim(variant));
            save_model(model, tr_out);
            std::cout << "trained on " << dataset.size() << " samples, final loss "
                      << model.meta.final_loss << '\n';
        } else if (*run) {
            run_lex.validate();
            run_fusion.validate();
            const FusionMode mode = fusion_mode_from_string(run_mode);
            const Variant variant = variant_from_string(run_variant);
            const auto layouts = read_layout(run_layout);
            std::map<std::string, const PageLayout*> by_id;
            for (const auto& p : layouts) by_id[p.page_id] = &p;
            std::vector<std::vector<DetectorOutput>> sets;
            for (const std::string& path : run_detections)
                sets.push_back(read_detector_output(path));
            const auto merged = merge_detector_outputs(sets);
            const MlpModel model = load_model(run_model);

            std::vector<clidetail::FusedRecord> records;
            for (const DetectorOutput& d : merged) {
                const auto it = by_id.find(d.page_id);
                if (it == by_id.end())
                    throw config_error("run: detections reference unknown page '" +
                                       d.page_id + "'");
                const auto scored = score_candidates(*it->second, d.candidates, model,
                                                     run_lex, run_fusion.theta, mode, variant);
                for (const ScoredCandidate& sc : scored)
                    records.push_back({d.page_id, sc, sc.s_final >= run_fusion.eta});
            }
            std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
                return clidetail::record_before(a.page_id, a.candidate.box, b.page_id,
                                                b.candidate.box);
            });
            std::vector<std::string> lines;
            for (const auto& r : records) {
                nlohmann::ordered_json j;
                j["page_id"] = r.page_id;
                j["box"] = {r.candidate.box.x0, r.candidate.box.y0, r.candidate.box.x1,
                            r.candidate.box.y1};
                j["s_vis"] = r.candidate.s_vis;
                j["s_lex"] = r.candidate.s_lex;
                j["s_final"] = r.candidate.s_final;
                j["detected"] = r.detected;
                lines.push_back(j.dump());
            }
            clidetail::write_lines(run_out, lines);
        } else if (*eval_cmd) {
            const auto truth = read_ground_truth(ev_truth);
            std::map<std::string, const GroundTruth*> truth_by_id;
            for (const auto& t : truth) truth_by_id[t.page_id] = &t;

            std::map<std::string, std::vector<ScoredCandidate>> preds;
            for (const nlohmann::json& j : clidetail::read_jsonl(ev_predictions)) {
                if (!j.value("detected", false)) continue;
                const std::string page_id = j.at("page_id").get<std::string>();
                if (!truth_by_id.count(page_id))
                    throw config_error("eval: predictions reference page '" + page_id +
                                       "' absent from the truth file");
                const auto& bj = j.at("box");
                ScoredCandidate sc;
                sc.box = BBox{bj[0].get<double>(), bj[1].get<double>(), bj[2].get<double>(),
                              bj[3].get<double>()};
                sc.s_vis = j.value("s_vis", 0.0);
                sc.s_lex = j.value("s_lex", 0.0);
                sc.s_final = j.value("s_final", 0.0);
                preds[page_id].push_back(sc);
            }
            std::int64_t tp = 0, fp = 0, fn = 0;
            for (const auto& t : truth) {
                const auto it = preds.find(t.page_id);
                static const std::vector<ScoredCandidate> kNone;
                const EvalReport r =
                    match_detections(it == preds.end() ? kNone : it->second, t, ev_iou);
                tp += r.true_positives;
                fp += r.false_positives;
                fn += r.false_negatives;
            }
            const EvalReport report = make_report(tp, fp, fn);
            const nlohmann::ordered_json rj = clidetail::report_to_json(report);
            if (!ev_out.empty()) clidetail::write_lines(ev_out, {rj.dump(2)});
            if (ev_json) {
                std::cout << rj.dump(2) << '\n';
            } else {
                std::cout << "TP " << report.true_positives << "  FP "
                          << report.false_positives << "  FN " << report.false_negatives
                          << "  P " << report.precision << "  R " << report.recall
                          << "  F1 " << report.f1 << '\n';
            }
            if (!ev_compare.empty()) {
                const nlohmann::json base = detail::read_json_file(ev_compare);
                const double base_f1 = base.at("f1").get<double>();
                std::cout << "improvement rate vs baseline F1 " << base_f1 << ": "
                          << improvement_rate(report.f1, base_f1) << "%\n";
            }
        } else if (*pdf_cmd) {
            const auto pages = pdf_to_layout(pdf_in);
            if (pdf_out == "-") std::cout << layout_to_json(pages).dump(2) << '\n';
            else write_layout(pdf_out, pages);
        } else if (*sweep_cmd) {
            sw_lex.validate();
            sw_fusion.validate();
            HarnessConfig cfg;
            cfg.lex = sw_lex;
            cfg.fusion = sw_fusion;
            cfg.mode = fusion_mode_from_string(sw_mode);
            cfg.variant = variant_from_string(sw_variant);
            cfg.train = sw_train;
            cfg.iou_threshold = sw_iou;
            cfg.split_seed = sw_split_seed;

            Corpus corpus;
            corpus.layouts = read_layout(sw_layout);
            corpus.truth = read_ground_truth(sw_truth);
            std::vector<std::vector<DetectorOutput>> sets;
            for (const std::string& path : sw_detections)
                sets.push_back(read_detector_output(path));
            const auto detections = merge_detector_outputs(sets);

            const SweepParameter parameter = sweep_parameter_from_string(sw_param);
            const SweepResult result = sweep(parameter, clidetail::parse_value_list(sw_values),
                                             cfg, corpus, detections);
            std::vector<std::string> lines{"parameter,value,tp,fp,fn,precision,recall,f1"};
            for (const auto& [value, report] : result.points) {
                std::ostringstream row;
                row << result.parameter << ',' << value << ',' << report.true_positives
                    << ',' << report.false_positives << ',' << report.false_negatives << ','
                    << report.precision << ',' << report.recall << ',' << report.f1;
                lines.push_back(row.str());
            }
            clidetail::write_lines(sw_out, lines);
        }
    } catch (const error& e) {
        std::cerr << "tabfuse: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "tabfuse: unexpected error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace tabfuse
