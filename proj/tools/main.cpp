// Command-line front end: sample, generate, fit, sweep, predict, report.
// Logs go to stderr; data artifacts go to files under --out-dir.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "perfmodel/detail/text.hpp"
#include "perfmodel/errors.hpp"
#include "perfmodel/fitting.hpp"
#include "perfmodel/metrics.hpp"
#include "perfmodel/model.hpp"
#include "perfmodel/optimizer.hpp"
#include "perfmodel/report.hpp"
#include "perfmodel/schema.hpp"
#include "perfmodel/synth.hpp"

namespace fs = std::filesystem;
using namespace perfmodel;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

FileFormat format_of(const std::string& path) {
    const auto ext = fs::path(path).extension().string();
    if (ext == ".csv") return FileFormat::csv;
    if (ext == ".json") return FileFormat::json;
    throw config_error("cannot tell the format of '" + path + "' (use a .csv or .json name)");
}

// "10" -> 1..10, "3..7" -> 3..7, "1,4,9" -> listed seeds
std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
    std::vector<std::uint64_t> seeds;
    auto parse_one = [](const std::string& s) {
        try {
            return static_cast<std::uint64_t>(std::stoull(s));
        } catch (const std::exception&) {
            throw config_error("bad seed value '" + s + "'");
        }
    };
    if (auto dots = spec.find(".."); dots != std::string::npos) {
        const std::uint64_t lo = parse_one(spec.substr(0, dots));
        const std::uint64_t hi = parse_one(spec.substr(dots + 2));
        if (hi < lo) throw config_error("seed range '" + spec + "' is reversed");
        for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    } else if (spec.find(',') != std::string::npos) {
        std::string cur;
        for (char c : spec + ",") {
            if (c == ',') {
                if (!cur.empty()) seeds.push_back(parse_one(cur));
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
    } else {
        const std::uint64_t n = parse_one(spec);
        if (n == 0) throw config_error("seed count must be >= 1");
        for (std::uint64_t s = 1; s <= n; ++s) seeds.push_back(s);
    }
    if (seeds.empty()) throw config_error("no seeds given");
    return seeds;
}

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open file: " + path);
    try {
        nlohmann::json j;
        in >> j;
        return j;
    } catch (const nlohmann::json::parse_error& e) {
        throw data_error("malformed JSON in " + path + ": " + e.what());
    }
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write file: " + path);
    out << content;
}

std::string percent1(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f%%", fraction * 100.0);
    return buf;
}

void log_metrics(const char* label, const MetricsReport& m) {
    std::cerr << label << ": MAPE " << percent1(m.mape) << "  RMSE "
              << detail::format_double(m.rmse) << " ms";
    if (m.r2) std::cerr << "  R2 " << detail::format_double(*m.r2);
    std::cerr << "\n";
}

struct FitOptions {
    std::string schema_path;
    std::string train_path;
    std::string test_path;
    double train_fraction = 0.6;
    bool no_split = false;
    std::uint64_t split_seed = 0;
    std::string reg_kind = "none";
    double lambda = kDefaultLambda;
    std::string seeds_spec = "1..10";
    DeConfig de;
    double coeff_lo = 0.0, coeff_hi = 1000.0;
    double power_lo = -5.0, power_hi = 5.0;
    double scaling_tolerance = kDefaultScalingTolerance;
};

void add_fit_options(CLI::App* cmd, FitOptions& o, bool with_test) {
    cmd->add_option("--schema", o.schema_path, "Schema JSON file")->required();
    cmd->add_option("--train", o.train_path, "Training dataset (.csv or .json)")->required();
    if (with_test) {
        auto* test_opt = cmd->add_option("--test", o.test_path, "Held-out dataset (.csv or .json)");
        cmd->add_option("--train-fraction", o.train_fraction,
                        "Split --train into train/test with this fraction (default 0.6)")
            ->check(CLI::Range(std::nextafter(0.0, 1.0), std::nextafter(1.0, 0.0)))
            ->excludes(test_opt);
        cmd->add_flag("--no-split", o.no_split, "Train on the whole file, no held-out split")
            ->excludes(test_opt);
        cmd->add_option("--split-seed", o.split_seed, "Seed for the train/test shuffle");
    }
    cmd->add_option("--reg", o.reg_kind, "Regularization kind: none, l1, l2")
        ->check(CLI::IsMember({"none", "l1", "l2"}));
    cmd->add_option("--lambda", o.lambda, "Regularization weight");
    cmd->add_option("--seeds", o.seeds_spec, "Seed list: N, lo..hi, or a,b,c (default 1..10)");
    cmd->add_option("--pop-multiplier", o.de.pop_multiplier, "Population = multiplier x dimension");
    cmd->add_option("--mutation-lo", o.de.mutation_lo, "Dither interval lower edge");
    cmd->add_option("--mutation-hi", o.de.mutation_hi, "Dither interval upper edge");
    cmd->add_option("--recombination", o.de.recombination, "Crossover probability");
    cmd->add_option("--max-generations", o.de.max_generations, "Generation budget");
    cmd->add_option("--tol", o.de.tol, "Relative convergence tolerance");
    cmd->add_option("--coeff-lo", o.coeff_lo, "Lower bound for coefficients and C");
    cmd->add_option("--coeff-hi", o.coeff_hi, "Upper bound for coefficients and C");
    cmd->add_option("--power-lo", o.power_lo, "Lower bound for powers");
    cmd->add_option("--power-hi", o.power_hi, "Upper bound for powers");
    cmd->add_option("--scaling-tolerance", o.scaling_tolerance,
                    "Half-width of the ideal-scaling band around -1");
}

Bounds bounds_from_options(const ParamSchema& schema, const FitOptions& o) {
    const FlatLayout layout = FlatLayout::of(schema);
    Bounds b = default_bounds(schema);
    for (std::size_t m = 0; m < b.size(); ++m) {
        const bool is_power =
            (m < 2 * layout.n_numeric && m % 2 == 1) ||
            (m >= layout.extrinsic_offset && m < layout.constant_offset);
        b[m] = is_power ? Bound{o.power_lo, o.power_hi} : Bound{o.coeff_lo, o.coeff_hi};
    }
    return b;
}

FitConfig config_from_options(const ParamSchema& schema, const FitOptions& o, unsigned threads) {
    FitConfig c;
    c.de = o.de;
    c.bounds = bounds_from_options(schema, o);
    c.reg = RegMode::make(o.reg_kind == "none"   ? RegKind::none
                          : o.reg_kind == "l1"   ? RegKind::l1
                                                 : RegKind::l2,
                          o.reg_kind == "none" ? 0.0 : o.lambda);
    c.seeds = parse_seeds(o.seeds_spec);
    c.threads = threads;
    return c;
}

void write_fit_outputs(const fs::path& out_dir, const ParamSchema& schema, const FitResult& result,
                       const RegMode& reg, double scaling_tolerance, const Dataset& train,
                       const Dataset* test) {
    write_text((out_dir / "fit_result.json").string(),
               fit_result_to_json(schema, result, reg).dump(2) + "\n");
    write_text((out_dir / "coefficient_table.txt").string(),
               coefficient_table_text(schema, result));
    write_text((out_dir / "coefficient_table.csv").string(), coefficient_table_csv(schema, result));
    if (!schema.extrinsic().empty()) {
        const auto verdicts = scaling_report(schema, result, scaling_tolerance);
        write_text((out_dir / "scaling_report.txt").string(), scaling_report_text(verdicts));
        write_text((out_dir / "scaling_report.json").string(),
                   scaling_report_json(verdicts).dump(2) + "\n");
    }
    const auto& model = result.representative().model;
    write_scatter_csv((out_dir / "scatter_train.csv").string(), scatter_data(train, model));
    if (test != nullptr) {
        write_scatter_csv((out_dir / "scatter_test.csv").string(), scatter_data(*test, model));
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fit multiplicative-additive power-law performance models to iteration timings"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from an INI/TOML file (flags take precedence)");

    std::string out_dir = ".";
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    app.add_option("--out-dir", out_dir, "Directory for output artifacts")
        ->envname("PERFMODEL_OUT_DIR");
    app.add_option("--threads", threads, "Cap on concurrent fit workers");

    // sample
    auto* cmd_sample = app.add_subcommand("sample", "Draw random parameter assignments");
    std::string sample_schema, sample_out = "assignments.csv";
    std::size_t sample_trials = 0;
    std::uint64_t sample_seed = 0;
    cmd_sample->add_option("--schema", sample_schema, "Schema JSON file")->required();
    cmd_sample->add_option("--trials", sample_trials, "Number of assignments")->required();
    cmd_sample->add_option("--seed", sample_seed, "Sampling seed");
    cmd_sample->add_option("--out", sample_out, "Output CSV (relative to --out-dir)");

    // generate
    auto* cmd_generate = app.add_subcommand("generate", "Evaluate a ground-truth model into a synthetic dataset");
    std::string gen_schema, gen_model, gen_assignments, gen_out = "dataset.csv", gen_raw_out;
    std::string gen_noise = "none";
    double gen_sigma = 0.0;
    int gen_repetitions = 3;
    std::size_t gen_trials = 0;
    std::uint64_t gen_seed = 0, gen_sample_seed = 0;
    cmd_generate->add_option("--schema", gen_schema, "Schema JSON file")->required();
    cmd_generate->add_option("--model", gen_model, "Ground-truth model JSON")->required();
    cmd_generate->add_option("--assignments", gen_assignments, "Assignments CSV to evaluate");
    cmd_generate->add_option("--trials", gen_trials, "Sample this many assignments instead");
    cmd_generate->add_option("--sample-seed", gen_sample_seed, "Seed for internal sampling");
    cmd_generate->add_option("--noise", gen_noise, "none or gaussian_relative")
        ->check(CLI::IsMember({"none", "gaussian_relative"}));
    cmd_generate->add_option("--sigma", gen_sigma, "Relative noise level");
    cmd_generate->add_option("--repetitions", gen_repetitions, "Timings per trial");
    cmd_generate->add_option("--seed", gen_seed, "Noise seed");
    cmd_generate->add_option("--out", gen_out, "Aggregated dataset (.csv or .json)");
    cmd_generate->add_option("--raw-out", gen_raw_out, "Raw repetitions JSON");

    // fit
    auto* cmd_fit = app.add_subcommand("fit", "Fit the model with multi-seed differential evolution");
    FitOptions fit_opts;
    add_fit_options(cmd_fit, fit_opts, /*with_test=*/true);

    // sweep
    auto* cmd_sweep = app.add_subcommand("sweep", "Fit once per lambda and tabulate the effect");
    FitOptions sweep_opts;
    sweep_opts.reg_kind = "l2";
    add_fit_options(cmd_sweep, sweep_opts, /*with_test=*/true);
    std::vector<double> sweep_lambdas;
    std::string sweep_out = "sweep.csv", sweep_json_out;
    cmd_sweep->add_option("--lambdas", sweep_lambdas, "Lambda values, comma separated")
        ->required()
        ->delimiter(',');
    cmd_sweep->add_option("--out", sweep_out, "Sweep CSV output");
    cmd_sweep->add_option("--json-out", sweep_json_out, "Optional full per-lambda JSON");

    // predict
    auto* cmd_predict = app.add_subcommand("predict", "Evaluate a fitted model on assignments");
    std::string pred_schema, pred_model, pred_assignments, pred_out = "predictions.csv";
    cmd_predict->add_option("--schema", pred_schema, "Schema JSON file")->required();
    cmd_predict->add_option("--model", pred_model, "Model JSON (bare or fit result)")->required();
    cmd_predict->add_option("--assignments", pred_assignments, "Assignments CSV")->required();
    cmd_predict->add_option("--out", pred_out, "Predictions CSV");

    // report
    auto* cmd_report = app.add_subcommand("report", "Re-render tables from a saved fit result");
    std::string rep_schema, rep_result;
    double rep_tau = kDefaultScalingTolerance;
    cmd_report->add_option("--schema", rep_schema, "Schema JSON file")->required();
    cmd_report->add_option("--result", rep_result, "fit_result.json from a fit run")->required();
    cmd_report->add_option("--scaling-tolerance", rep_tau,
                           "Half-width of the ideal-scaling band around -1");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        const fs::path out(out_dir);
        fs::create_directories(out);
        auto in_out_dir = [&](const std::string& name) {
            return fs::path(name).is_absolute() ? name : (out / name).string();
        };

        if (*cmd_sample) {
            const ParamSchema schema = ParamSchema::load(sample_schema);
            const auto assignments = sample_configs(schema, sample_trials, sample_seed);
            const std::string path = in_out_dir(sample_out);
            save_assignments(schema, assignments, path);
            std::cerr << "sample: wrote " << assignments.size() << " assignments to " << path
                      << "\n";
        } else if (*cmd_generate) {
            const ParamSchema schema = ParamSchema::load(gen_schema);
            const ParamVector truth = model_from_result_json(schema, load_json(gen_model));
            std::vector<Assignment> assignments;
            if (!gen_assignments.empty()) {
                assignments = load_assignments(gen_assignments, schema);
            } else if (gen_trials > 0) {
                assignments = sample_configs(schema, gen_trials, gen_sample_seed);
            } else {
                throw config_error("generate needs --assignments or --trials");
            }
            SynthConfig cfg;
            cfg.ground_truth = truth;
            cfg.noise = gen_noise == "none" ? NoiseKind::none : NoiseKind::gaussian_relative;
            cfg.sigma = gen_sigma;
            cfg.repetitions = gen_repetitions;
            cfg.seed = gen_seed;
            SynthOutput synth = generate(schema, assignments, cfg);
            const std::string path = in_out_dir(gen_out);
            save_dataset(synth.dataset, path, format_of(path));
            std::cerr << "generate: wrote " << synth.dataset.size() << " records to " << path
                      << "\n";
            if (!gen_raw_out.empty()) {
                const std::string raw_path = in_out_dir(gen_raw_out);
                save_raw_groups(schema, synth.raw, raw_path);
                std::cerr << "generate: wrote raw repetitions to " << raw_path << "\n";
            }
        } else if (*cmd_fit) {
            const ParamSchema schema = ParamSchema::load(fit_opts.schema_path);
            Dataset train = load_dataset(fit_opts.train_path, format_of(fit_opts.train_path), schema);
            std::optional<Dataset> test;
            if (!fit_opts.test_path.empty()) {
                test = load_dataset(fit_opts.test_path, format_of(fit_opts.test_path), schema);
            } else if (!fit_opts.no_split) {
                auto [tr, te] = split(train, fit_opts.train_fraction, fit_opts.split_seed);
                train = std::move(tr);
                test = std::move(te);
                std::cerr << "fit: split into " << train.size() << " train / " << test->size()
                          << " test records\n";
            }
            const FitConfig config = config_from_options(schema, fit_opts, threads);
            const FitResult result = fit(train, test ? &*test : nullptr, config);
            write_fit_outputs(out, schema, result, config.reg, fit_opts.scaling_tolerance, train,
                              test ? &*test : nullptr);
            std::cerr << "fit: representative seed " << result.representative().seed << ", cost "
                      << detail::format_double(result.representative().cost) << "\n";
            log_metrics("fit: train", result.train_metrics);
            if (result.test_metrics) log_metrics("fit: test", *result.test_metrics);
            std::cerr << "fit: artifacts in " << out.string() << "\n";
        } else if (*cmd_sweep) {
            const ParamSchema schema = ParamSchema::load(sweep_opts.schema_path);
            if (sweep_opts.no_split && sweep_opts.test_path.empty()) {
                throw config_error("sweep needs a test set; drop --no-split or pass --test");
            }
            Dataset train = load_dataset(sweep_opts.train_path, format_of(sweep_opts.train_path),
                                         schema);
            std::optional<Dataset> test;
            if (!sweep_opts.test_path.empty()) {
                test = load_dataset(sweep_opts.test_path, format_of(sweep_opts.test_path), schema);
            } else {
                auto [tr, te] = split(train, sweep_opts.train_fraction, sweep_opts.split_seed);
                train = std::move(tr);
                test = std::move(te);
            }
            const FitConfig config = config_from_options(schema, sweep_opts, threads);
            const auto entries = lambda_sweep(train, *test, config, sweep_lambdas);

            const FlatLayout layout = FlatLayout::of(schema);
            std::string csv =
                "lambda,r2_test,l1_numeric_a,l1_numeric_p,l1_categorical,l1_extrinsic_q,"
                "constant,l1_non_constant\n";
            for (const auto& e : entries) {
                const auto flat = flatten(e.result.representative().model);
                double na = 0, np = 0, cat = 0, q = 0, non_c = 0;
                for (std::size_t i = 0; i < layout.n_numeric; ++i) {
                    na += std::abs(flat[2 * i]);
                    np += std::abs(flat[2 * i + 1]);
                }
                for (std::size_t m = 2 * layout.n_numeric; m < layout.extrinsic_offset; ++m) {
                    cat += std::abs(flat[m]);
                }
                for (std::size_t m = layout.extrinsic_offset; m < layout.constant_offset; ++m) {
                    q += std::abs(flat[m]);
                }
                for (std::size_t m = 0; m < layout.constant_offset; ++m) {
                    non_c += std::abs(flat[m]);
                }
                csv += detail::format_double(e.lambda);
                csv.push_back(',');
                csv += e.r2_test ? detail::format_double(*e.r2_test) : "";
                for (double v : {na, np, cat, q, flat[layout.constant_offset], non_c}) {
                    csv.push_back(',');
                    csv += detail::format_double(v);
                }
                csv.push_back('\n');
            }
            const std::string path = in_out_dir(sweep_out);
            write_text(path, csv);
            std::cerr << "sweep: wrote " << entries.size() << " rows to " << path << "\n";
            if (!sweep_json_out.empty()) {
                nlohmann::ordered_json arr = nlohmann::ordered_json::array();
                for (const auto& e : entries) {
                    arr.push_back({{"lambda", e.lambda},
                                   {"result", fit_result_to_json(
                                                  schema, e.result,
                                                  RegMode::make(config.reg.kind, e.lambda))}});
                }
                write_text(in_out_dir(sweep_json_out), arr.dump(2) + "\n");
            }
        } else if (*cmd_predict) {
            const ParamSchema schema = ParamSchema::load(pred_schema);
            const ParamVector model = model_from_result_json(schema, load_json(pred_model));
            const auto assignments = load_assignments(pred_assignments, schema);
            std::string csv;
            for (const auto& p : schema.numeric()) csv += p.name + ",";
            for (const auto& g : schema.categorical()) csv += g.name + ",";
            for (const auto& p : schema.extrinsic()) csv += p.name + ",";
            csv += "predicted_ms\n";
            for (const auto& a : assignments) {
                for (double v : a.numeric) csv += detail::format_double(v) + ",";
                for (const auto& level : a.categorical) csv += level + ",";
                for (double v : a.extrinsic) csv += detail::format_double(v) + ",";
                csv += detail::format_double(evaluate(schema, model, a));
                csv.push_back('\n');
            }
            const std::string path = in_out_dir(pred_out);
            write_text(path, csv);
            std::cerr << "predict: wrote " << assignments.size() << " predictions to " << path
                      << "\n";
        } else if (*cmd_report) {
            const ParamSchema schema = ParamSchema::load(rep_schema);
            const FitResult result = fit_result_from_json(schema, load_json(rep_result));
            write_text((out / "coefficient_table.txt").string(),
                       coefficient_table_text(schema, result));
            write_text((out / "coefficient_table.csv").string(),
                       coefficient_table_csv(schema, result));
            if (!schema.extrinsic().empty()) {
                const auto verdicts = scaling_report(schema, result, rep_tau);
                write_text((out / "scaling_report.txt").string(), scaling_report_text(verdicts));
                write_text((out / "scaling_report.json").string(),
                           scaling_report_json(verdicts).dump(2) + "\n");
                std::cerr << scaling_report_text(verdicts);
            }
            std::cerr << "report: artifacts in " << out.string() << "\n";
        }
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const data_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const numeric_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
