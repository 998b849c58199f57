#include <doctest.h>

#include "darkscan/error.hpp"
#include "darkscan/evaluation.hpp"
#include "darkscan/pipeline.hpp"
#include "darkscan/report.hpp"
#include "support.hpp"
#include "toy_data.hpp"

#include <json.hpp>

#include <atomic>
#include <set>

using namespace darkscan;

TEST_CASE("backend kinds") {
    CHECK(parse_backend_kind("lexical") == BackendKind::Lexical);
    CHECK(parse_backend_kind("lr") == BackendKind::LogisticRegression);
    CHECK(parse_backend_kind("transformer") == BackendKind::Transformer);
    CHECK(parse_backend_kind("remote") == BackendKind::Remote);
    CHECK_THROWS_AS((void)parse_backend_kind("svm"), InvalidArgument);
}

TEST_CASE("make_backend") {
    BackendOptions lexical;
    CHECK(make_backend(lexical)->name() == "lexical");

    testing::TempDir tmp;
    save_lr_model(train_lr_baseline(testing::separable(10), {}), tmp / "model-lr.json");
    BackendOptions lr;
    lr.kind = BackendKind::LogisticRegression;
    lr.model = tmp.path();
    auto lr_backend = make_backend(lr);
    CHECK(lr_backend->name() == "lr");
    CHECK(predict_category(lr_backend->classify("only left stock")) == Category::Scarcity);
    lr.model = tmp / "model-lr.json";
    CHECK(make_backend(lr)->name() == "lr");
    lr.model.reset();
    CHECK_THROWS_AS((void)make_backend(lr), InvalidArgument);

    BackendOptions transformer;
    transformer.kind = BackendKind::Transformer;
    CHECK_THROWS_AS((void)make_backend(transformer), InvalidArgument);
    transformer.model = testing::fixtures() / "onnx" / "keyword" / "model";
    CHECK(predict_category(make_backend(transformer)->classify("Hurry! Only 2 left in stock")) == Category::Scarcity);
    transformer.model = tmp / "missing";
    CHECK_THROWS_AS((void)make_backend(transformer), ArtifactLoadError);

    BackendOptions remote;
    remote.kind = BackendKind::Remote;
    CHECK_THROWS_AS((void)make_backend(remote), InvalidArgument);

    BackendOptions custom;
    testing::write_file(tmp / "lex.json", R"({"Scarcity":[{"pattern":"zebra","weight":3}],
        "Urgency":[{"pattern":"u1","weight":1}],"Misdirection":[{"pattern":"m1","weight":1}],
        "Social Proof":[{"pattern":"s1","weight":1}],"Forced Action":[{"pattern":"f1","weight":1}],
        "Obstruction":[{"pattern":"o1","weight":1}],"Sneaking":[{"pattern":"k1","weight":1}]})");
    custom.lexicon = tmp / "lex.json";
    CHECK(predict_category(make_backend(custom)->classify("a zebra appears")) == Category::Scarcity);
}

TEST_CASE("scan_site pools all pages") {
    auto backend = make_backend({});
    std::vector<PageSource> pages = {
        {"p1", "<p>Hurry! Only 2 left in stock</p><p>Blue cotton shirt</p>"},
        {"p2", ""},
        {"p3", "<p>Offer ends in 10 minutes</p><p>Soft fabric</p>"},
    };
    auto report = scan_site("s", pages, *backend, {});
    CHECK(report.site_id == "s");
    CHECK(report.page_urls == std::vector<std::string>{"p1", "p2", "p3"});
    CHECK(report.n_segments == 4);
    CHECK(report.fractions[index_of(Category::NotDarkPattern)] == 0.5);
    CHECK(report.fractions[index_of(Category::Scarcity)] == 0.25);
    CHECK(report.fractions[index_of(Category::Urgency)] == 0.25);
    REQUIRE(report.flagged.size() == 2);
    CHECK(report.flagged[0].segment.page_url == "p1");
    CHECK(report.flagged[1].segment.page_url == "p3");

    std::vector<PageSource> empty = {{"e1", ""}, {"e2", "<script>x()</script>"}};
    CHECK_THROWS_AS((void)scan_site("s", empty, *backend, {}), EmptySite);
}

TEST_CASE("scan_corpus is sorted and independent of the job count") {
    auto backend = make_backend({});
    ScanOptions serial;
    ScanOptions parallel;
    parallel.jobs = 4;
    auto a = scan_corpus(testing::fixtures() / "corpus", *backend, serial);
    auto b = scan_corpus(testing::fixtures() / "corpus", *backend, parallel);
    REQUIRE(a.size() == 3);
    CHECK(a[0].site_id == "shop-alpha");
    CHECK(a[1].site_id == "shop-beta");
    CHECK(a[2].site_id == "shop-gamma");
    REQUIRE(b.size() == a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(render_report(a[i], ReportFormat::Json) == render_report(b[i], ReportFormat::Json));
    CHECK(a[0].flagged.size() == 10);
    CHECK(a[1].flagged.size() == 20);
    CHECK(a[2].flagged.size() == 30);

    ScanOptions mean;
    mean.mode = AggregationMode::MeanProbability;
    auto m = scan_corpus(testing::fixtures() / "corpus", *backend, mean);
    CHECK(m[0].mode == AggregationMode::MeanProbability);
}

TEST_CASE("parallel_for visits every index once and rethrows") {
    std::vector<std::atomic<int>> hits(100);
    parallel_for(100, 8, [&](std::size_t k) { ++hits[k]; });
    for (auto& h : hits) CHECK(h.load() == 1);
    parallel_for(0, 4, [](std::size_t) { FAIL("called"); });

    CHECK_THROWS_AS(parallel_for(50, 4,
                                 [](std::size_t k) {
                                     if (k == 17) throw EmptySite("boom");
                                 }),
                    EmptySite);
    CHECK_THROWS_AS(parallel_for(5, 1,
                                 [](std::size_t k) {
                                     if (k == 3) throw InvalidArgument("serial");
                                 }),
                    InvalidArgument);
}
