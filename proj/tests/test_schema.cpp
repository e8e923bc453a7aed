#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "perfmodel/errors.hpp"
#include "perfmodel/rng.hpp"
#include "perfmodel/schema.hpp"

using namespace perfmodel;
namespace fs = std::filesystem;

namespace {

ParamSchema small_schema() {
    return ParamSchema(
        {{"kernel_size", {2, 3, 4, 5}}, {"batch_ratio", {0.5, 1.0, 2.0}}},
        {{"activation", {"relu", "tanh", "sigmoid"}}},
        {{"ngpus", {1, 2, 3}}});
}

TrialRecord make_record(double k, double b, const std::string& act, double g, double t) {
    return {{{k, b}, {act}, {g}}, t};
}

fs::path temp_file(const char* name) {
    auto dir = fs::temp_directory_path() / "perfmodel_schema_tests";
    fs::create_directories(dir);
    return dir / name;
}

void write(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

// independent oracle: median by definition, midpoint of the sorted middle
double median_oracle(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

TEST_CASE("schema invariants are enforced at construction") {
    CHECK_NOTHROW(small_schema());
    // duplicate name across groups
    CHECK_THROWS_AS(ParamSchema({{"x", {1, 2}}}, {}, {{"x", {1, 2}}}), data_error);
    // non-positive domain value
    CHECK_THROWS_AS(ParamSchema({{"x", {0.0, 2}}}, {}, {}), data_error);
    CHECK_THROWS_AS(ParamSchema({}, {}, {{"x", {-1.0}}}), data_error);
    // empty domain
    CHECK_THROWS_AS(ParamSchema({{"x", {}}}, {}, {}), data_error);
    // single-level categorical
    CHECK_THROWS_AS(ParamSchema({}, {{"g", {"only"}}}, {}), data_error);
    // reserved / malformed names
    CHECK_THROWS_AS(ParamSchema({{"time_ms", {1.0}}}, {}, {}), data_error);
    CHECK_THROWS_AS(ParamSchema({{"a,b", {1.0}}}, {}, {}), data_error);
}

TEST_CASE("dataset construction validates records against the schema") {
    auto schema = small_schema();
    std::vector<TrialRecord> good = {make_record(2, 0.5, "relu", 1, 10.0)};
    CHECK_NOTHROW(Dataset(schema, good));

    SUBCASE("non-positive numeric names record and field") {
        std::vector<TrialRecord> bad = {good[0], make_record(0.0, 0.5, "relu", 1, 10.0)};
        try {
            Dataset d(schema, bad);
            FAIL("expected data_error");
        } catch (const data_error& e) {
            const std::string msg = e.what();
            CHECK(msg.find("record 2") != std::string::npos);
            CHECK(msg.find("kernel_size") != std::string::npos);
        }
    }
    SUBCASE("unknown categorical level") {
        std::vector<TrialRecord> bad = {make_record(2, 0.5, "gelu", 1, 10.0)};
        try {
            Dataset d(schema, bad);
            FAIL("expected data_error");
        } catch (const data_error& e) {
            CHECK(std::string(e.what()).find("gelu") != std::string::npos);
        }
    }
    SUBCASE("non-positive time") {
        std::vector<TrialRecord> bad = {make_record(2, 0.5, "relu", 1, 0.0)};
        CHECK_THROWS_AS(Dataset(schema, bad), data_error);
    }
}

TEST_CASE("CSV ingestion") {
    auto schema = small_schema();
    auto p = temp_file("ok.csv");

    SUBCASE("three valid rows load in order") {
        write(p, "kernel_size,batch_ratio,activation,ngpus,time_ms\n"
                 "2,0.5,relu,1,10.5\n"
                 "3,1,tanh,2,20\n"
                 "5,2,sigmoid,3,7.25\n");
        Dataset d = load_dataset(p.string(), FileFormat::csv, schema);
        REQUIRE(d.size() == 3);
        CHECK(d.records()[0].values.numeric[0] == 2.0);
        CHECK(d.records()[1].values.categorical[0] == "tanh");
        CHECK(d.records()[2].time_ms == 7.25);
    }
    SUBCASE("columns may appear in any order") {
        write(p, "time_ms,ngpus,activation,batch_ratio,kernel_size\n"
                 "10.5,1,relu,0.5,2\n");
        Dataset d = load_dataset(p.string(), FileFormat::csv, schema);
        REQUIRE(d.size() == 1);
        CHECK(d.records()[0].values.numeric[0] == 2.0);
        CHECK(d.records()[0].time_ms == 10.5);
    }
    SUBCASE("zero value is rejected naming row and field") {
        write(p, "kernel_size,batch_ratio,activation,ngpus,time_ms\n"
                 "2,0.5,relu,1,10.5\n"
                 "0,0.5,relu,1,10.5\n");
        try {
            load_dataset(p.string(), FileFormat::csv, schema);
            FAIL("expected data_error");
        } catch (const data_error& e) {
            const std::string msg = e.what();
            CHECK(msg.find("record 2") != std::string::npos);
            CHECK(msg.find("kernel_size") != std::string::npos);
        }
    }
    SUBCASE("unknown level is rejected") {
        write(p, "kernel_size,batch_ratio,activation,ngpus,time_ms\n"
                 "2,0.5,gelu,1,10.5\n");
        CHECK_THROWS_AS(load_dataset(p.string(), FileFormat::csv, schema), data_error);
    }
    SUBCASE("unknown column is rejected") {
        write(p, "kernel_size,batch_ratio,activation,ngpus,extra,time_ms\n");
        CHECK_THROWS_AS(load_dataset(p.string(), FileFormat::csv, schema), data_error);
    }
    SUBCASE("missing column is rejected") {
        write(p, "kernel_size,batch_ratio,activation,time_ms\n");
        CHECK_THROWS_AS(load_dataset(p.string(), FileFormat::csv, schema), data_error);
    }
    SUBCASE("malformed number is rejected") {
        write(p, "kernel_size,batch_ratio,activation,ngpus,time_ms\n"
                 "two,0.5,relu,1,10.5\n");
        CHECK_THROWS_AS(load_dataset(p.string(), FileFormat::csv, schema), data_error);
    }
}

TEST_CASE("serialize then load reproduces a dataset exactly") {
    auto schema = small_schema();
    // values chosen to stress shortest-round-trip formatting
    std::vector<TrialRecord> records = {
        make_record(2, 0.5, "relu", 1, 0.1),
        make_record(3, 1.0 / 3.0 + 1, "tanh", 2, 123.456789012345),
        make_record(5, 2, "sigmoid", 3, 1e-9),
    };
    Dataset d(schema, records);

    for (auto format : {FileFormat::csv, FileFormat::json}) {
        auto p = temp_file(format == FileFormat::csv ? "rt.csv" : "rt.json");
        save_dataset(d, p.string(), format);
        Dataset back = load_dataset(p.string(), format, schema);
        REQUIRE(back.size() == d.size());
        for (std::size_t k = 0; k < d.size(); ++k) {
            CHECK(back.records()[k] == d.records()[k]); // bit-equal values, same order
        }
    }
}

TEST_CASE("raw trial groups round-trip through JSON") {
    auto schema = small_schema();
    std::vector<RawTrialGroup> groups = {
        {"t00001", {{2, 0.5}, {"relu"}, {1}}, {5.0, 3.0, 9.0}},
        {"t00002", {{3, 1.0}, {"tanh"}, {2}}, {7.0}},
    };
    auto p = temp_file("raw.json");
    save_raw_groups(schema, groups, p.string());
    auto back = load_raw_groups(p.string(), schema);
    REQUIRE(back.size() == 2);
    CHECK(back[0].trial_id == "t00001");
    CHECK(back[0].repetitions_ms == std::vector<double>{5.0, 3.0, 9.0});
    CHECK(back[1].values.numeric[0] == 3.0);
}

TEST_CASE("aggregate_repetitions takes the median") {
    auto schema = small_schema();
    Assignment a{{2, 0.5}, {"relu"}, {1}};
    auto dataset_for = [&](std::vector<double> reps) {
        std::vector<RawTrialGroup> g = {{"t", a, std::move(reps)}};
        return aggregate_repetitions(schema, g);
    };
    CHECK(dataset_for({5.0, 3.0, 9.0}).records()[0].time_ms == 5.0);
    CHECK(dataset_for({7.0}).records()[0].time_ms == 7.0);
    CHECK(dataset_for({2.0, 4.0}).records()[0].time_ms == 3.0);

    SUBCASE("empty repetition list is an error") {
        std::vector<RawTrialGroup> g = {{"t", a, {}}};
        CHECK_THROWS_AS(aggregate_repetitions(schema, g), data_error);
    }

    SUBCASE("matches the sort-based oracle for lengths 1..7") {
        rng::Engine eng(99);
        for (std::size_t len = 1; len <= 7; ++len) {
            for (int rep = 0; rep < 50; ++rep) {
                std::vector<double> reps;
                for (std::size_t i = 0; i < len; ++i) {
                    reps.push_back(rng::uniform(eng, 0.1, 100.0));
                }
                CHECK(dataset_for(reps).records()[0].time_ms == median_oracle(reps));
            }
        }
    }
}

TEST_CASE("split") {
    auto schema = small_schema();
    auto dataset_of = [&](std::size_t n) {
        std::vector<TrialRecord> recs;
        for (std::size_t k = 0; k < n; ++k) {
            recs.push_back(make_record(2, 0.5, "relu", 1, 1.0 + static_cast<double>(k)));
        }
        return Dataset(schema, recs);
    };

    SUBCASE("1500 at 0.6 gives 900/600") {
        auto [train, test] = split(dataset_of(1500), 0.6, 7);
        CHECK(train.size() == 900);
        CHECK(test.size() == 600);
    }
    SUBCASE("3 at 0.6 gives 2/1") {
        auto [train, test] = split(dataset_of(3), 0.6, 7);
        CHECK(train.size() == 2);
        CHECK(test.size() == 1);
    }
    SUBCASE("10 at 0.5 gives 5/5 and the same seed twice gives identical partitions") {
        auto d = dataset_of(10);
        auto [a1, b1] = split(d, 0.5, 123);
        auto [a2, b2] = split(d, 0.5, 123);
        CHECK(a1.size() == 5);
        CHECK(b1.size() == 5);
        CHECK(a1.records() == a2.records());
        CHECK(b1.records() == b2.records());
    }
    SUBCASE("partitions are disjoint and their union is the input multiset") {
        auto d = dataset_of(41);
        auto [train, test] = split(d, 0.37, 5);
        CHECK(train.size() + test.size() == d.size());
        std::multiset<double> seen;
        for (const auto& r : train.records()) seen.insert(r.time_ms);
        for (const auto& r : test.records()) seen.insert(r.time_ms);
        std::multiset<double> expect;
        for (const auto& r : d.records()) expect.insert(r.time_ms);
        CHECK(seen == expect);
    }
    SUBCASE("fraction outside (0,1) is rejected") {
        CHECK_THROWS_AS(split(dataset_of(5), 0.0, 1), std::invalid_argument);
        CHECK_THROWS_AS(split(dataset_of(5), 1.0, 1), std::invalid_argument);
    }
}

TEST_CASE("schema JSON round-trip") {
    auto schema = small_schema();
    auto p = temp_file("schema.json");
    schema.save(p.string());
    auto back = ParamSchema::load(p.string());
    CHECK(back == schema);

    SUBCASE("unknown key rejected") {
        write(p, R"({"intrinsic_numeric": [], "bogus": []})");
        CHECK_THROWS_AS(ParamSchema::load(p.string()), data_error);
    }
}
