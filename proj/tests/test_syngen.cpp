#include <doctest.h>

#include "tabfuse/lexfeat.hpp"
#include "tabfuse/syngen.hpp"

using namespace tabfuse;

TEST_SUITE("syngen") {

TEST_CASE("a fixed seed reproduces the corpus exactly") {
    CorpusSpec spec;
    spec.pages = 6;
    spec.seed = 77;
    const Corpus a = generate_corpus(spec);
    const Corpus b = generate_corpus(spec);
    CHECK(layout_to_json(a.layouts) == layout_to_json(b.layouts));
    CHECK(truth_to_json(a.truth) == truth_to_json(b.truth));
    CHECK(labels_to_json(a.labels) == labels_to_json(b.labels));
}

TEST_CASE("pages are generated independently from per-page seeds") {
    CorpusSpec spec;
    spec.pages = 5;
    spec.seed = 31;
    const Corpus corpus = generate_corpus(spec);
    // regenerating page 3 in isolation matches the batch output
    PageLayout layout;
    GroundTruth truth;
    RegionLabelPage labels;
    generate_page(spec, 3, layout, truth, labels);
    CHECK(layout_to_json({layout}) == layout_to_json({corpus.layouts[3]}));
    CHECK(truth_to_json({truth}) == truth_to_json({corpus.truth[3]}));
}

TEST_CASE("generated layouts satisfy all page invariants") {
    CorpusSpec spec;
    spec.pages = 30;
    spec.seed = 7;
    spec.caption_like_prose_rate = 0.3;
    const Corpus corpus = generate_corpus(spec);
    for (const PageLayout& page : corpus.layouts) CHECK_NOTHROW(validate_page(page));
}

TEST_CASE("ground-truth boxes and table labels agree one to one") {
    CorpusSpec spec;
    spec.pages = 20;
    spec.seed = 9;
    const Corpus corpus = generate_corpus(spec);
    for (std::size_t p = 0; p < corpus.truth.size(); ++p) {
        std::vector<BBox> labeled;
        for (const LabeledRegion& r : corpus.labels[p].regions)
            if (r.cls == "table") labeled.push_back(r.box);
        REQUIRE(labeled.size() == corpus.truth[p].boxes.size());
        for (std::size_t i = 0; i < labeled.size(); ++i)
            CHECK(labeled[i] == corpus.truth[p].boxes[i]);
    }
}

TEST_CASE("degenerate mix: prose-only distractors, one table per page") {
    CorpusSpec spec;
    spec.pages = 8;
    spec.seed = 41;
    spec.tables_per_page = {1, 1};
    spec.w_equation = 0.0;
    spec.w_figure_block = 0.0;
    spec.w_highlighted_text = 0.0;
    spec.w_pseudo_table = 0.0;
    spec.w_prose = 1.0;
    const Corpus corpus = generate_corpus(spec);
    for (std::size_t p = 0; p < corpus.labels.size(); ++p) {
        int tables = 0;
        for (const LabeledRegion& r : corpus.labels[p].regions) {
            const bool allowed = r.cls == "table" || r.cls == "prose";
            CHECK(allowed);
            if (r.cls == "table") ++tables;
        }
        CHECK(tables == 1);
    }
}

TEST_CASE("an all-zero distractor mix is rejected") {
    CorpusSpec spec;
    spec.w_equation = spec.w_figure_block = spec.w_highlighted_text = spec.w_prose =
        spec.w_pseudo_table = 0.0;
    CHECK_THROWS_AS(generate_corpus(spec), input_error);
}

TEST_CASE("an infeasible page budget raises a generation error") {
    CorpusSpec spec;
    spec.pages = 1;
    spec.lines_per_page = 8;
    spec.table_rows = {8, 8};
    spec.tables_per_page = {2, 2};
    CHECK_THROWS_AS(generate_corpus(spec), generation_error);
}

TEST_CASE("corpus_stats summarises classes and features") {
    SUBCASE("empty corpus") {
        const CorpusStats stats = corpus_stats(Corpus{});
        CHECK(stats.by_class.empty());
    }
    SUBCASE("table-only corpus has no distractor rows") {
        CorpusSpec spec;
        spec.pages = 5;
        spec.seed = 3;
        spec.tables_per_page = {1, 1};
        spec.w_equation = spec.w_figure_block = spec.w_highlighted_text =
            spec.w_pseudo_table = 0.0;
        spec.w_prose = 0.2;
        const Corpus corpus = generate_corpus(spec);
        const CorpusStats stats = corpus_stats(corpus);
        CHECK(stats.by_class.count("table") == 1);
        CHECK(stats.by_class.count("equation") == 0);
        CHECK(stats.by_class.count("figure_block") == 0);
        CHECK(stats.by_class.count("highlighted_text") == 0);
        CHECK(stats.by_class.count("pseudo_table") == 0);
    }
    SUBCASE("feature histograms on a default slice") {
        CorpusSpec spec;
        spec.pages = 40;
        spec.seed = 7;
        const Corpus corpus = generate_corpus(spec);
        const CorpusStats stats = corpus_stats(corpus);

        // most equations stay at l1 = 0 (isolated relevant lines)
        const auto eq = stats.by_class.find("equation");
        if (eq != stats.by_class.end() && eq->second.count > 0) {
            const int zeros = eq->second.l1_hist.count(0) ? eq->second.l1_hist.at(0) : 0;
            CHECK(static_cast<double>(zeros) / eq->second.count >= 0.95);
        }
        // tables carry the signal: l1 >= 3 and a caption nearby
        const auto tab = stats.by_class.find("table");
        REQUIRE(tab != stats.by_class.end());
        int l1_high = 0, l2_pos = 0;
        for (const auto& [v, c] : tab->second.l1_hist)
            if (v >= 3) l1_high += c;
        for (const auto& [v, c] : tab->second.l2_hist)
            if (v >= 1) l2_pos += c;
        CHECK(static_cast<double>(l1_high) / tab->second.count >= 0.99);
        CHECK(static_cast<double>(l2_pos) / tab->second.count >= 0.95);
        // prose and highlighted text stay silent
        for (const char* cls : {"prose", "highlighted_text", "figure_block"}) {
            const auto it = stats.by_class.find(cls);
            if (it == stats.by_class.end()) continue;
            for (const auto& [v, c] : it->second.l1_hist) CHECK(v == 0);
        }
    }
}

TEST_CASE("seed-7 corpus: direct count of table and equation feature coverage") {
    const Corpus corpus = generate_corpus(corpus_preset("default", 200, 7));
    const CorpusStats stats = corpus_stats(corpus);
    const ClassStats& tables = stats.by_class.at("table");
    int l1_ge3 = 0, l2_ge1 = 0;
    for (const auto& [v, c] : tables.l1_hist)
        if (v >= 3) l1_ge3 += c;
    for (const auto& [v, c] : tables.l2_hist)
        if (v >= 1) l2_ge1 += c;
    CHECK(static_cast<double>(l1_ge3) / tables.count >= 0.99);
    CHECK(static_cast<double>(l2_ge1) / tables.count >= 0.99);

    const ClassStats& equations = stats.by_class.at("equation");
    const int eq_zero =
        equations.l1_hist.count(0) ? equations.l1_hist.at(0) : 0;
    CHECK(static_cast<double>(eq_zero) / equations.count >= 0.95);
}

TEST_CASE("corpus presets") {
    CHECK_NOTHROW(corpus_preset("default"));
    const CorpusSpec ns = corpus_preset("nspace-sweep", 10, 1);
    CHECK(ns.pseudo_gap_count == 3);
    CHECK(ns.caption_like_prose_rate == 1.0);
    const CorpusSpec nl = corpus_preset("nline2-sweep", 10, 1);
    CHECK(nl.caption_offset_lines.max == 7);
    CHECK(nl.separation_lines == 13);
    CHECK_THROWS_AS(corpus_preset("bogus"), config_error);
}

} // TEST_SUITE
