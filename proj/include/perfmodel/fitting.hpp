#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "perfmodel/metrics.hpp"
#include "perfmodel/model.hpp"
#include "perfmodel/optimizer.hpp"
#include "perfmodel/schema.hpp"

namespace perfmodel {

enum class RegKind { none, l1, l2 };

/// Regularization mode. The penalty covers every slot except the constant
/// (powers included) and does not scale with dataset size. lambda == 0
/// normalizes to kind none.
struct RegMode {
    RegKind kind = RegKind::none;
    double lambda = 0.0;

    static RegMode none() { return {}; }
    static RegMode l1(double lambda);
    static RegMode l2(double lambda);
    static RegMode make(RegKind kind, double lambda);
};

inline constexpr double kDefaultLambda = 1e-3;

struct FitConfig {
    DeConfig de;
    Bounds bounds;       // empty -> default_bounds(schema)
    RegMode reg;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    unsigned threads = 1;
};

struct SeedFit {
    std::uint64_t seed = 0;
    ParamVector model;
    double cost = 0.0; // regularized cost, the quantity DE minimized
    int generations = 0;
    bool converged = false;
};

struct SlotStat {
    double mean = 0.0;
    double stddev = 0.0; // population (N) convention
};

struct FitResult {
    std::vector<SeedFit> per_seed;       // seed order
    std::vector<SlotStat> slot_stats;    // flat layout order, across seeds
    std::size_t representative_index = 0; // lowest-cost seed (first on ties)
    MetricsReport train_metrics;          // penalty-free, representative vector
    std::optional<MetricsReport> test_metrics;

    const SeedFit& representative() const { return per_seed[representative_index]; }
};

/// Mean absolute error of the model's predictions over the dataset (the
/// fitting cost without any penalty).
double cost_mae(const Dataset& dataset, std::span<const double> flat_x);

/// cost_mae plus lambda * sum over non-constant slots of |x| (l1) or x^2
/// (l2). Kind none returns cost_mae exactly.
double cost_regularized(const Dataset& dataset, std::span<const double> flat_x, const RegMode& reg);

/// Multi-seed DE fit of the model to the training data. Metrics are
/// computed on raw predictions of the representative (lowest-cost) vector,
/// never including the penalty term. `test` may be null.
FitResult fit(const Dataset& train, const Dataset* test, const FitConfig& config);

struct SweepEntry {
    double lambda = 0.0;
    std::optional<double> r2_test;
    FitResult result;
};

/// One full fit per lambda with the same seeds, in input order. Entries
/// with lambda == 0 are unregularized. config.reg.kind selects the penalty
/// form and must be l1 or l2.
std::vector<SweepEntry> lambda_sweep(const Dataset& train, const Dataset& test,
                                     const FitConfig& config, std::span<const double> lambdas);

nlohmann::ordered_json fit_result_to_json(const ParamSchema& schema, const FitResult& result,
                                          const RegMode& reg);
FitResult fit_result_from_json(const ParamSchema& schema, const nlohmann::json& j);

/// Accepts either a bare model JSON or a full fit-result JSON (using its
/// representative model).
ParamVector model_from_result_json(const ParamSchema& schema, const nlohmann::json& j);

} // namespace perfmodel
