#include <doctest.h>

#include <filesystem>
#include <string>

#include "perfmodel/errors.hpp"
#include "perfmodel/report.hpp"
#include "perfmodel/rng.hpp"
#include "perfmodel/synth.hpp"

using namespace perfmodel;
namespace fs = std::filesystem;

namespace {

ParamSchema demo_schema() {
    return ParamSchema({{"n1", {2, 4}}, {"n2", {1, 2, 3}}},
                       {{"g", {"u", "v", "w"}}},
                       {{"e1", {1, 2, 3}}, {"e2", {8, 16}}});
}

// structurally valid single-seed result with chosen slot statistics
FitResult result_with_stats(const ParamSchema& schema, std::vector<SlotStat> stats) {
    FitResult r;
    std::vector<double> flat;
    for (const auto& s : stats) flat.push_back(s.mean);
    SeedFit sf;
    sf.seed = 1;
    sf.model = unflatten(schema, flat);
    sf.cost = 0.5;
    r.per_seed.push_back(std::move(sf));
    r.slot_stats = std::move(stats);
    r.representative_index = 0;
    r.train_metrics = MetricsReport{0.1, 1.0, 1.0, 0.9};
    return r;
}

} // namespace

TEST_CASE("scaling classification") {
    const double tau = 0.05;
    CHECK(classify_scaling(-0.99, tau) == ScalingClass::ideal);
    CHECK(classify_scaling(-0.74, tau) == ScalingClass::sublinear);
    CHECK(classify_scaling(-1.02, tau) == ScalingClass::ideal);
    CHECK(classify_scaling(-1.35, tau) == ScalingClass::superlinear);
    CHECK(classify_scaling(0.0, tau) == ScalingClass::non_scaling);
    CHECK(classify_scaling(0.8, tau) == ScalingClass::non_scaling);

    SUBCASE("boundaries resolve per the closed ideal band") {
        CHECK(classify_scaling(-1.0 - tau, tau) == ScalingClass::ideal);
        CHECK(classify_scaling(std::nextafter(-1.0 - tau, -2.0), tau) == ScalingClass::superlinear);
        CHECK(classify_scaling(-1.0 + tau, tau) == ScalingClass::ideal);
        CHECK(classify_scaling(std::nextafter(-1.0 + tau, 0.0), tau) == ScalingClass::sublinear);
    }
    SUBCASE("tolerance must be positive") {
        CHECK_THROWS_AS(classify_scaling(-1.0, 0.0), std::invalid_argument);
    }
}

TEST_CASE("scaling report carries one verdict per extrinsic parameter") {
    auto schema = demo_schema();
    // layout: n1 a,p | n2 a,p | g u,v,w | e1 q | e2 q | C
    std::vector<SlotStat> stats(flat_size(schema), SlotStat{1.0, 0.1});
    const FlatLayout layout = FlatLayout::of(schema);
    stats[layout.extrinsic_offset] = {-0.99, 0.004};
    stats[layout.extrinsic_offset + 1] = {-0.74, 0.001};
    FitResult r = result_with_stats(schema, stats);

    auto verdicts = scaling_report(schema, r);
    REQUIRE(verdicts.size() == 2);
    CHECK(verdicts[0].parameter == "e1");
    CHECK(verdicts[0].q_mean == -0.99);
    CHECK(verdicts[0].classification == ScalingClass::ideal);
    CHECK(verdicts[1].parameter == "e2");
    CHECK(verdicts[1].classification == ScalingClass::sublinear);

    auto text = scaling_report_text(verdicts);
    CHECK(text.find("e1") != std::string::npos);
    CHECK(text.find("ideal") != std::string::npos);
    CHECK(text.find("sublinear") != std::string::npos);

    auto j = scaling_report_json(verdicts);
    CHECK(j[0]["classification"] == "ideal");
    CHECK(j[1]["q_mean"] == -0.74);

    SUBCASE("no extrinsic parameters is an error") {
        ParamSchema flat_only({{"n", {1, 2}}}, {}, {});
        FitResult r2 = result_with_stats(flat_only, std::vector<SlotStat>(3, SlotStat{1.0, 0.0}));
        CHECK_THROWS_AS(scaling_report(flat_only, r2), std::invalid_argument);
    }
}

TEST_CASE("coefficient table shape") {
    auto schema = demo_schema();
    std::vector<SlotStat> stats(flat_size(schema));
    for (std::size_t m = 0; m < stats.size(); ++m) {
        stats[m] = {static_cast<double>(m) + 0.25, 0.5};
    }
    FitResult r = result_with_stats(schema, stats);
    const std::string text = coefficient_table_text(schema, r);

    // numeric rows carry a and p; categorical rows carry "-" in the power column
    CHECK(text.find("Intrinsic parameters") != std::string::npos);
    CHECK(text.find("Extrinsic parameters") != std::string::npos);
    CHECK(text.find("Constant term") != std::string::npos);
    CHECK(text.find("n1") != std::string::npos);
    CHECK(text.find("g:u") != std::string::npos);
    CHECK(text.find("g:w") != std::string::npos);

    // every categorical level line ends in the placeholder power column
    std::istringstream lines(text);
    std::string line;
    int cat_rows = 0;
    while (std::getline(lines, line)) {
        if (line.find("g:") != std::string::npos) {
            ++cat_rows;
            CHECK(line.rfind('-') == line.size() - 1);
        }
    }
    CHECK(cat_rows == 3);

    SUBCASE("single-seed spread renders as zero") {
        FitResult one = result_with_stats(schema, std::vector<SlotStat>(flat_size(schema),
                                                                        SlotStat{2.0, 0.0}));
        const std::string t = coefficient_table_text(schema, one);
        CHECK(t.find("+- 0") != std::string::npos);
    }
}

TEST_CASE("coefficient table CSV is long-form parameter,role,mean,std") {
    auto schema = demo_schema();
    std::vector<SlotStat> stats(flat_size(schema), SlotStat{1.5, 0.25});
    FitResult r = result_with_stats(schema, stats);
    const std::string csv = coefficient_table_csv(schema, r);
    CHECK(csv.rfind("parameter,role,mean,std\n", 0) == 0);
    CHECK(csv.find("n1,a,1.5,0.25") != std::string::npos);
    CHECK(csv.find("n1,p,1.5,0.25") != std::string::npos);
    CHECK(csv.find("g:v,a,1.5,0.25") != std::string::npos);
    CHECK(csv.find("e2,q,1.5,0.25") != std::string::npos);
    CHECK(csv.find("C,C,1.5,0.25") != std::string::npos);
    // rows: 2 numeric x2 + 3 levels + 2 extrinsic + C = 10 (+ header)
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);
}

TEST_CASE("scatter data") {
    ParamSchema schema({{"n", {2, 3, 4}}}, {}, {{"e", {1, 2}}});
    ParamVector gt{{{3.0, 1.0}}, {}, {-1.0}, 1.0};
    auto assignments = sample_configs(schema, 25, 6);
    SynthConfig cfg;
    cfg.ground_truth = gt;
    Dataset d = generate(schema, assignments, cfg).dataset;

    auto rows = scatter_data(d, gt);
    REQUIRE(rows.size() == d.size());
    for (const auto& [measured, predicted] : rows) {
        CHECK(measured == predicted); // generating model sits on the diagonal
    }

    SUBCASE("CSV output loads back through the two-column assignments reader") {
        auto path = (fs::temp_directory_path() / "perfmodel_scatter.csv").string();
        write_scatter_csv(path, rows);
        ParamSchema two({{"measured_ms", {1.0}}, {"predicted_ms", {1.0}}}, {}, {});
        auto back = load_assignments(path, two);
        REQUIRE(back.size() == rows.size());
        for (std::size_t k = 0; k < rows.size(); ++k) {
            CHECK(back[k].numeric[0] == rows[k].first);
            CHECK(back[k].numeric[1] == rows[k].second);
        }
    }
}
