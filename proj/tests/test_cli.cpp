#include <doctest.h>

#include <fstream>
#include <iostream>
#include <sstream>

#include "tabfuse/cli.hpp"
#include "testutil.hpp"

using namespace tabfuse;

namespace {

struct CliResult {
    int exit_code = 0;
    std::string out;
};

CliResult cli(const std::vector<std::string>& args) {
    std::ostringstream captured;
    std::streambuf* old = std::cout.rdbuf(captured.rdbuf());
    CliResult result;
    result.exit_code = run_cli(args);
    std::cout.rdbuf(old);
    result.out = captured.str();
    return result;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("gen is deterministic: same flags, same bytes") {
    testutil::TempDir dir;
    const std::string out_a = (dir.path / "a").string();
    const std::string out_b = (dir.path / "b").string();
    CHECK(cli({"gen", "--pages", "4", "--seed", "7", "--out", out_a}).exit_code == 0);
    CHECK(cli({"gen", "--pages", "4", "--seed", "7", "--out", out_b}).exit_code == 0);
    CHECK(slurp(out_a + "/layout.json") == slurp(out_b + "/layout.json"));
    CHECK(slurp(out_a + "/truth.json") == slurp(out_b + "/truth.json"));
    CHECK(slurp(out_a + "/labels.json") == slurp(out_b + "/labels.json"));
    CHECK(!slurp(out_a + "/layout.json").empty());
}

TEST_CASE("gen rejects a zero page count") {
    testutil::TempDir dir;
    const CliResult r = cli({"gen", "--pages", "0", "--out", (dir.path / "x").string()});
    CHECK(r.exit_code != 0);
}

TEST_CASE("full pipeline: gen, mock-detect, extract, train, run, eval") {
    testutil::TempDir dir;
    const std::string corpus = (dir.path / "corpus").string();
    REQUIRE(cli({"gen", "--pages", "24", "--seed", "7", "--out", corpus}).exit_code == 0);

    const std::string detections = dir.file("detections.json");
    REQUIRE(cli({"mock-detect", "--layout", corpus + "/layout.json", "--truth",
                 corpus + "/truth.json", "--labels", corpus + "/labels.json", "--out",
                 detections, "--fp-rate", "0.5", "--fp-score", "0.63", "--tp-score-lo",
                 "0.6", "--tp-score-hi", "0.9", "--seed", "7"})
                .exit_code == 0);

    const std::string features = dir.file("features.jsonl");
    REQUIRE(cli({"extract", "--layout", corpus + "/layout.json", "--detections",
                 detections, "--truth", corpus + "/truth.json", "--out", features})
                .exit_code == 0);
    CHECK(slurp(features).find("\"l1\"") != std::string::npos);
    CHECK(slurp(features).find("\"label\"") != std::string::npos);

    const std::string model = dir.file("model.json");
    REQUIRE(cli({"train", "--features", features, "--out", model, "--seed", "7"})
                .exit_code == 0);

    const std::string fused = dir.file("fused.jsonl");
    REQUIRE(cli({"run", "--layout", corpus + "/layout.json", "--detections", detections,
                 "--model", model, "--out", fused, "--theta", "0.3", "--eta", "0.5",
                 "--fusion-mode", "replace"})
                .exit_code == 0);
    CHECK(slurp(fused).find("\"s_final\"") != std::string::npos);

    const std::string report = dir.file("report.json");
    const CliResult ev = cli({"eval", "--predictions", fused, "--truth",
                              corpus + "/truth.json", "--out", report, "--json"});
    REQUIRE(ev.exit_code == 0);
    const auto rj = nlohmann::json::parse(slurp(report));
    CHECK(rj["f1"].get<double>() > 0.8);

    // fused replace-mode run should beat the raw detector on this corpus
    const CliResult cmp = cli({"eval", "--predictions", fused, "--truth",
                               corpus + "/truth.json", "--compare", report});
    REQUIRE(cmp.exit_code == 0);
    CHECK(cmp.out.find("improvement rate") != std::string::npos);
}

TEST_CASE("rerunning the pipeline yields identical bytes") {
    testutil::TempDir dir;
    const std::string corpus = (dir.path / "c").string();
    REQUIRE(cli({"gen", "--pages", "8", "--seed", "3", "--out", corpus}).exit_code == 0);
    const std::string det_a = dir.file("a.json");
    const std::string det_b = dir.file("b.json");
    for (const std::string& out : {det_a, det_b})
        REQUIRE(cli({"mock-detect", "--layout", corpus + "/layout.json", "--truth",
                     corpus + "/truth.json", "--labels", corpus + "/labels.json", "--out",
                     out, "--fn-rate", "0.3", "--seed", "11"})
                    .exit_code == 0);
    CHECK(slurp(det_a) == slurp(det_b));
}

TEST_CASE("train rejects single-class feature files") {
    testutil::TempDir dir;
    const std::string corpus = (dir.path / "c").string();
    REQUIRE(cli({"gen", "--pages", "4", "--seed", "5", "--out", corpus}).exit_code == 0);
    // features over truth boxes only: every record is positive
    const std::string features = dir.file("features.jsonl");
    REQUIRE(cli({"extract", "--layout", corpus + "/layout.json", "--truth-boxes",
                 corpus + "/truth.json", "--truth", corpus + "/truth.json", "--out",
                 features})
                .exit_code == 0);
    const CliResult r = cli({"train", "--features", features, "--out", dir.file("m.json")});
    CHECK(r.exit_code == 1);
}

TEST_CASE("extract needs exactly one box source") {
    testutil::TempDir dir;
    const std::string corpus = (dir.path / "c").string();
    REQUIRE(cli({"gen", "--pages", "2", "--seed", "5", "--out", corpus}).exit_code == 0);
    CHECK(cli({"extract", "--layout", corpus + "/layout.json"}).exit_code == 1);
}

TEST_CASE("extract on a prose-only page emits zero features") {
    testutil::TempDir dir;
    // one page of prose lines, one candidate box over it
    PageLayout page;
    page.page_id = "p1";
    page.width_pt = 612;
    page.height_pt = 792;
    for (int s = 0; s < 10; ++s) {
        TextLine line;
        line.y0 = 0.05 + 0.03 * s;
        line.y1 = line.y0 + 0.02;
        double x = 0.1;
        for (int t = 0; t < 8; ++t) {
            line.tokens.push_back({"w", x, x + 0.05});
            x += 0.06;
        }
        page.lines.push_back(line);
    }
    write_layout(dir.file("layout.json"), {page});
    write_detector_output(dir.file("det.json"),
                          {{"p1", {{{0.1, 0.1, 0.9, 0.3}, 0.8}}, "d"}}, "d");
    const std::string features = dir.file("f.jsonl");
    REQUIRE(cli({"extract", "--layout", dir.file("layout.json"), "--detections",
                 dir.file("det.json"), "--out", features})
                .exit_code == 0);
    const auto j = nlohmann::json::parse(slurp(features));
    CHECK(j["l1"] == 0);
    CHECK(j["l2"] == 0);
}

TEST_CASE("missing layout file is reported with the path") {
    const CliResult r = cli({"extract", "--layout", "/no/such/file.json", "--truth-boxes",
                             "/no/such/truth.json"});
    CHECK(r.exit_code == 1);
}

TEST_CASE("run rejects detections that reference unknown pages") {
    testutil::TempDir dir;
    PageLayout page;
    page.page_id = "p1";
    page.width_pt = 612;
    page.height_pt = 792;
    write_layout(dir.file("layout.json"), {page});
    write_detector_output(dir.file("det.json"),
                          {{"ghost", {{{0.1, 0.1, 0.5, 0.5}, 0.8}}, "d"}}, "d");
    MlpModel model;
    model.input_dim = 2;
    model.hidden_dims = {};
    model.input_scale = {1.0, 1.0};
    model.layers.push_back({{{1.0, 1.0}}, {0.0}});
    save_model(model, dir.file("model.json"));
    const CliResult r = cli({"run", "--layout", dir.file("layout.json"), "--detections",
                             dir.file("det.json"), "--model", dir.file("model.json")});
    CHECK(r.exit_code == 1);

    // a detector file with no pages yields an empty detection list
    write_detector_output(dir.file("none.json"), {}, "d");
    const std::string fused = dir.file("fused.jsonl");
    CHECK(cli({"run", "--layout", dir.file("layout.json"), "--detections",
               dir.file("none.json"), "--model", dir.file("model.json"), "--out", fused})
              .exit_code == 0);
    CHECK(slurp(fused).empty());
}

TEST_CASE("eval rejects predictions for unknown pages") {
    testutil::TempDir dir;
    std::ofstream(dir.file("pred.jsonl"))
        << R"({"page_id":"ghost","box":[0.1,0.1,0.2,0.2],"s_vis":0.9,"s_lex":0.9,"s_final":0.9,"detected":true})"
        << "\n";
    write_ground_truth(dir.file("truth.json"), {{"p1", {{0.1, 0.1, 0.2, 0.2}}}});
    const CliResult r =
        cli({"eval", "--predictions", dir.file("pred.jsonl"), "--truth", dir.file("truth.json")});
    CHECK(r.exit_code == 1);
}

TEST_CASE("identical predictions and truth give a perfect report") {
    testutil::TempDir dir;
    write_ground_truth(dir.file("truth.json"),
                       {{"p1", {{0.1, 0.1, 0.4, 0.3}, {0.5, 0.5, 0.8, 0.7}}}});
    std::ofstream(dir.file("pred.jsonl"))
        << R"({"page_id":"p1","box":[0.1,0.1,0.4,0.3],"s_vis":0.9,"s_lex":0.9,"s_final":0.9,"detected":true})"
        << "\n"
        << R"({"page_id":"p1","box":[0.5,0.5,0.8,0.7],"s_vis":0.8,"s_lex":0.8,"s_final":0.8,"detected":true})"
        << "\n";
    const CliResult r = cli({"eval", "--predictions", dir.file("pred.jsonl"), "--truth",
                             dir.file("truth.json"), "--json"});
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["f1"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("sweep writes a CSV curve and validates the parameter name") {
    testutil::TempDir dir;
    const std::string corpus = (dir.path / "c").string();
    REQUIRE(cli({"gen", "--pages", "16", "--seed", "7", "--out", corpus}).exit_code == 0);
    const std::string detections = dir.file("det.json");
    REQUIRE(cli({"mock-detect", "--layout", corpus + "/layout.json", "--truth",
                 corpus + "/truth.json", "--labels", corpus + "/labels.json", "--out",
                 detections, "--fp-rate", "0.4", "--tp-score-lo", "0.6", "--tp-score-hi",
                 "0.9", "--seed", "7"})
                .exit_code == 0);
    const std::string curve = dir.file("curve.csv");
    REQUIRE(cli({"sweep", "--param", "eta", "--values", "0.4,0.6,0.8", "--layout",
                 corpus + "/layout.json", "--detections", detections, "--truth",
                 corpus + "/truth.json", "--out", curve, "--seed", "7"})
                .exit_code == 0);
    const std::string csv = slurp(curve);
    CHECK(csv.find("parameter,value,tp,fp,fn,precision,recall,f1") != std::string::npos);
    CHECK(csv.find("eta,0.4") != std::string::npos);

    CHECK(cli({"sweep", "--param", "bogus", "--values", "1,2", "--layout",
               corpus + "/layout.json", "--detections", detections, "--truth",
               corpus + "/truth.json"})
              .exit_code == 1);
}

TEST_CASE("gen --json emits machine-readable stats") {
    testutil::TempDir dir;
    const CliResult r =
        cli({"gen", "--pages", "3", "--seed", "2", "--out", (dir.path / "c").string(),
             "--json"});
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j.contains("table"));
    CHECK(j["table"]["count"].get<int>() >= 3);
}

TEST_CASE("pdf-to-layout converts rendered pages back to layout JSON") {
    testutil::TempDir dir;
    CorpusSpec spec;
    spec.pages = 2;
    spec.seed = 9;
    const Corpus corpus = generate_corpus(spec);
    render_layout_pdf(dir.file("doc.pdf"), corpus.layouts);
    REQUIRE(cli({"pdf-to-layout", "--pdf", dir.file("doc.pdf"), "--out",
                 dir.file("layout.json")})
                .exit_code == 0);
    const auto pages = read_layout(dir.file("layout.json"));
    REQUIRE(pages.size() == 2);
    CHECK(pages[0].lines.size() == corpus.layouts[0].lines.size());
    CHECK(cli({"pdf-to-layout", "--pdf", dir.file("missing.pdf")}).exit_code == 1);
}

TEST_CASE("unknown subcommand fails") {
    CHECK(cli({"frobnicate"}).exit_code != 0);
}

} // TEST_SUITE
