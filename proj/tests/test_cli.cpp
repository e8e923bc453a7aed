// Drives the installed binary end to end through a shell; checks artifacts,
// determinism, and the exit-code classes.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace std::string_literals;
namespace fs = std::filesystem;

namespace {

const std::string kCli = PERFMODEL_CLI_PATH;
const std::string kSchema = std::string(PERFMODEL_DATA_DIR) + "/default_schema.json";

struct RunResult {
    int exit_code;
    std::string output; // stdout + stderr
};

RunResult run(const std::string& args) {
    const auto log = fs::temp_directory_path() / "perfmodel_cli_test.log";
    const std::string cmd = kCli + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    int code = -1;
    if (WIFEXITED(status)) code = WEXITSTATUS(status);
    return {code, ss.str()};
}

fs::path work_dir() {
    auto dir = fs::temp_directory_path() / "perfmodel_cli_work";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    out << content;
}

const char* kTinyModel = R"({
  "numeric": {
    "kernel_size": {"a": 8.0, "p": 1.2}, "pooling_size": {"a": 4.0, "p": -1.0},
    "num_filters": {"a": 2.0, "p": 0.7}, "learning_rate": {"a": 0.0, "p": 0.0},
    "stride": {"a": 15.0, "p": -1.0}, "dropout": {"a": 3.0, "p": 1.0}
  },
  "categorical": {
    "activation": {"relu": 20.0, "tanh": 24.0, "sigmoid": 28.0},
    "optimizer": {"adam": 15.0, "sgd": 10.0},
    "dataset": {"mnist": 30.0, "fashion_mnist": 32.0, "cifar10": 45.0},
    "padding": {"valid": 5.0, "same": 8.0}
  },
  "extrinsic": {"ngpus": {"q": -0.9}, "batchsize": {"q": -0.5}},
  "constant": 4.0
})";

} // namespace

TEST_CASE("sample is deterministic and validates inputs") {
    auto dir = work_dir();
    auto a1 = (dir / "a1.csv").string();
    auto a2 = (dir / "a2.csv").string();
    CHECK(run("sample --schema " + kSchema + " --trials 50 --seed 7 --out " + a1).exit_code == 0);
    CHECK(run("sample --schema " + kSchema + " --trials 50 --seed 7 --out " + a2).exit_code == 0);
    CHECK(slurp(a1) == slurp(a2));
    CHECK(slurp(a1).find("kernel_size,") == 0);

    SUBCASE("missing schema file names the path and exits with the data class") {
        auto r = run("sample --schema /nonexistent/schema.json --trials 5 --out " +
                     (dir / "x.csv").string());
        CHECK(r.exit_code == 3);
        CHECK(r.output.find("/nonexistent/schema.json") != std::string::npos);
    }
    SUBCASE("unknown flag is a config error") {
        CHECK(run("sample --schema " + kSchema + " --trials 5 --bogus 1").exit_code == 2);
    }
    SUBCASE("missing subcommand is a config error") {
        CHECK(run("").exit_code == 2);
    }
    SUBCASE("options load from a config file and flags override it") {
        spit(dir / "run.ini", "[sample]\ntrials=25\nseed=9\nout=\"" + (dir / "cfg.csv").string() +
                                  "\"\n");
        CHECK(run("--config " + (dir / "run.ini").string() + " sample --schema " + kSchema)
                  .exit_code == 0);
        const std::string from_cfg = slurp(dir / "cfg.csv");
        CHECK(std::count(from_cfg.begin(), from_cfg.end(), '\n') == 26); // header + 25

        CHECK(run("--config " + (dir / "run.ini").string() + " sample --schema " + kSchema +
                  " --trials 7 --out " + (dir / "cfg7.csv").string())
                  .exit_code == 0);
        const std::string overridden = slurp(dir / "cfg7.csv");
        CHECK(std::count(overridden.begin(), overridden.end(), '\n') == 8);
    }
}

TEST_CASE("generate, fit, predict, report pipeline") {
    auto dir = work_dir();
    spit(dir / "truth.json", kTinyModel);

    auto r1 = run("sample --schema " + kSchema + " --trials 120 --seed 3 --out " +
                  (dir / "assign.csv").string());
    REQUIRE(r1.exit_code == 0);
    auto r2 = run("generate --schema " + kSchema + " --model " + (dir / "truth.json").string() +
                  " --assignments " + (dir / "assign.csv").string() +
                  " --seed 5 --out " + (dir / "data.csv").string() +
                  " --raw-out " + (dir / "raw.json").string());
    REQUIRE(r2.exit_code == 0);

    SUBCASE("fit emits the artifact set and echoes lambda in the result") {
        auto r = run("--out-dir " + (dir / "fit1").string() + " fit --schema " + kSchema +
                     " --train " + (dir / "data.csv").string() +
                     " --train-fraction 0.6 --split-seed 1 --seeds 1,2" +
                     " --max-generations 40 --reg l2 --lambda 0.001");
        REQUIRE(r.exit_code == 0);
        CHECK(r.output.find("MAPE") != std::string::npos);
        for (const char* name :
             {"fit_result.json", "coefficient_table.txt", "coefficient_table.csv",
              "scaling_report.txt", "scaling_report.json", "scatter_train.csv",
              "scatter_test.csv"}) {
            CHECK(fs::exists(dir / "fit1" / name));
        }
        const std::string result = slurp(dir / "fit1" / "fit_result.json");
        CHECK(result.find("\"lambda\": 0.001") != std::string::npos);
        CHECK(result.find("\"kind\": \"l2\"") != std::string::npos);

        // distinct seeds disagree, so some aggregate spread is nonzero
        std::istringstream rows(slurp(dir / "fit1" / "coefficient_table.csv"));
        std::string row;
        std::getline(rows, row); // header
        bool any_spread = false;
        while (std::getline(rows, row)) {
            if (row.substr(row.rfind(',') + 1) != "0") any_spread = true;
        }
        CHECK(any_spread);

        SUBCASE("report re-renders tables from the stored result") {
            auto rr = run("--out-dir " + (dir / "rep").string() + " report --schema " + kSchema +
                          " --result " + (dir / "fit1" / "fit_result.json").string());
            CHECK(rr.exit_code == 0);
            CHECK(slurp(dir / "rep" / "coefficient_table.txt") ==
                  slurp(dir / "fit1" / "coefficient_table.txt"));
        }
    }

    SUBCASE("fit is byte-reproducible for fixed seeds") {
        const std::string flags = " fit --schema " + kSchema + " --train " +
                                  (dir / "data.csv").string() +
                                  " --train-fraction 0.5 --split-seed 2 --seeds 1,2" +
                                  " --max-generations 30";
        REQUIRE(run("--out-dir " + (dir / "da").string() + " --threads 2" + flags).exit_code == 0);
        REQUIRE(run("--out-dir " + (dir / "db").string() + " --threads 1" + flags).exit_code == 0);
        for (const char* name : {"fit_result.json", "coefficient_table.csv", "scatter_test.csv"}) {
            CHECK(slurp(dir / "da" / name) == slurp(dir / "db" / name));
        }
    }

    SUBCASE("predict with a constant model emits that constant") {
        spit(dir / "const.json", R"({
          "numeric": {"kernel_size": {"a":0,"p":0}, "pooling_size": {"a":0,"p":0},
                       "num_filters": {"a":0,"p":0}, "learning_rate": {"a":0,"p":0},
                       "stride": {"a":0,"p":0}, "dropout": {"a":0,"p":0}},
          "categorical": {"activation": {"relu":0,"tanh":0,"sigmoid":0},
                           "optimizer": {"adam":0,"sgd":0},
                           "dataset": {"mnist":0,"fashion_mnist":0,"cifar10":0},
                           "padding": {"valid":0,"same":0}},
          "extrinsic": {"ngpus": {"q":0}, "batchsize": {"q":0}},
          "constant": 3.5
        })");
        auto r = run("predict --schema " + kSchema + " --model " + (dir / "const.json").string() +
                     " --assignments " + (dir / "assign.csv").string() + " --out " +
                     (dir / "pred.csv").string());
        REQUIRE(r.exit_code == 0);
        std::istringstream lines(slurp(dir / "pred.csv"));
        std::string line;
        std::getline(lines, line);
        CHECK(line.find("predicted_ms") != std::string::npos);
        int rows = 0;
        while (std::getline(lines, line)) {
            ++rows;
            CHECK(line.substr(line.rfind(',') + 1) == "3.5");
        }
        CHECK(rows == 120);
    }

    SUBCASE("predict on an empty assignments file emits just the header") {
        spit(dir / "empty.csv",
             "kernel_size,pooling_size,num_filters,learning_rate,stride,dropout,"
             "activation,optimizer,dataset,padding,ngpus,batchsize\n");
        auto r = run("predict --schema " + kSchema + " --model " + (dir / "truth.json").string() +
                     " --assignments " + (dir / "empty.csv").string() + " --out " +
                     (dir / "pred_empty.csv").string());
        CHECK(r.exit_code == 0);
        const std::string out = slurp(dir / "pred_empty.csv");
        CHECK(std::count(out.begin(), out.end(), '\n') == 1);
        CHECK(out.find("predicted_ms") != std::string::npos);
    }

    SUBCASE("malformed dataset is a data error") {
        spit(dir / "bad.csv", "kernel_size,time_ms\n1,2\n");
        auto r = run("fit --schema " + kSchema + " --train " + (dir / "bad.csv").string() +
                     " --seeds 1 --max-generations 5");
        CHECK(r.exit_code == 3);
    }
}

TEST_CASE("sweep emits one row per lambda with a stable header") {
    auto dir = work_dir();
    spit(dir / "truth.json", kTinyModel);
    REQUIRE(run("sample --schema " + kSchema + " --trials 80 --seed 11 --out " +
                (dir / "sw_assign.csv").string())
                .exit_code == 0);
    REQUIRE(run("generate --schema " + kSchema + " --model " + (dir / "truth.json").string() +
                " --assignments " + (dir / "sw_assign.csv").string() + " --seed 12 --out " +
                (dir / "sw_data.csv").string())
                .exit_code == 0);
    auto r = run("--out-dir " + (dir / "sw").string() + " sweep --schema " + kSchema +
                 " --train " + (dir / "sw_data.csv").string() +
                 " --train-fraction 0.6 --split-seed 3 --seeds 1,2 --max-generations 25" +
                 " --reg l2 --lambdas 0,0.001,1 --out sweep.csv");
    REQUIRE(r.exit_code == 0);
    const std::string csv = slurp(dir / "sw" / "sweep.csv");
    CHECK(csv.rfind("lambda,r2_test,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4); // header + 3 lambdas
    CHECK(csv.find("\n0,") != std::string::npos);
    CHECK(csv.find("\n0.001,") != std::string::npos);
    CHECK(csv.find("\n1,") != std::string::npos);
}
