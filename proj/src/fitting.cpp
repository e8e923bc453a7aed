#include "perfmodel/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "perfmodel/errors.hpp"

namespace perfmodel {

namespace {

// Dataset rewritten for the DE hot path: positional values plus
// pre-resolved flat-vector slots for the selected categorical levels. The
// prediction arithmetic repeats evaluate() operation for operation, so both
// paths agree bit for bit.
struct CompiledData {
    FlatLayout layout;
    std::size_t n_records = 0;
    std::vector<double> numeric;         // n_records x n_numeric
    std::vector<std::uint32_t> cat_slot; // n_records x n_groups
    std::vector<double> extrinsic;       // n_records x n_extrinsic
    std::vector<double> time;            // n_records

    static CompiledData of(const Dataset& dataset) {
        const ParamSchema& schema = dataset.schema();
        CompiledData c;
        c.layout = FlatLayout::of(schema);
        c.n_records = dataset.size();
        c.numeric.reserve(c.n_records * c.layout.n_numeric);
        c.cat_slot.reserve(c.n_records * c.layout.n_groups);
        c.extrinsic.reserve(c.n_records * c.layout.n_extrinsic);
        c.time.reserve(c.n_records);
        for (const auto& rec : dataset.records()) {
            c.numeric.insert(c.numeric.end(), rec.values.numeric.begin(), rec.values.numeric.end());
            for (std::size_t g = 0; g < c.layout.n_groups; ++g) {
                const std::size_t slot = c.layout.group_offsets[g] +
                                         schema.level_index(g, rec.values.categorical[g]);
                c.cat_slot.push_back(static_cast<std::uint32_t>(slot));
            }
            c.extrinsic.insert(c.extrinsic.end(), rec.values.extrinsic.begin(),
                               rec.values.extrinsic.end());
            c.time.push_back(rec.time_ms);
        }
        return c;
    }

    double predict(std::size_t k, const double* x) const {
        const double* nv = numeric.data() + k * layout.n_numeric;
        const std::uint32_t* cs = cat_slot.data() + k * layout.n_groups;
        const double* ev = extrinsic.data() + k * layout.n_extrinsic;
        double intrinsic = 0.0;
        for (std::size_t i = 0; i < layout.n_numeric; ++i) {
            intrinsic += x[2 * i] * std::pow(nv[i], x[2 * i + 1]);
        }
        for (std::size_t g = 0; g < layout.n_groups; ++g) {
            intrinsic += x[cs[g]];
        }
        double scale = 1.0;
        for (std::size_t j = 0; j < layout.n_extrinsic; ++j) {
            scale *= std::pow(ev[j], x[layout.extrinsic_offset + j]);
        }
        return intrinsic * scale + x[layout.constant_offset];
    }

    double mae(const double* x) const {
        double sum = 0.0;
        for (std::size_t k = 0; k < n_records; ++k) {
            sum += std::abs(time[k] - predict(k, x));
        }
        return sum / static_cast<double>(n_records);
    }
};

double penalty(std::span<const double> x, const FlatLayout& layout, RegKind kind) {
    double p = 0.0;
    if (kind == RegKind::l1) {
        for (std::size_t m = 0; m < layout.constant_offset; ++m) {
            p += std::abs(x[m]);
        }
    } else {
        for (std::size_t m = 0; m < layout.constant_offset; ++m) {
            p += x[m] * x[m];
        }
    }
    return p;
}

double cost_on(const CompiledData& data, std::span<const double> x, const RegMode& reg) {
    if (x.size() != data.layout.size) {
        throw std::invalid_argument("flat vector length does not match schema layout");
    }
    const double mae = data.mae(x.data());
    if (reg.kind == RegKind::none) {
        return mae;
    }
    return mae + reg.lambda * penalty(x, data.layout, reg.kind);
}

std::vector<double> predict_all(const CompiledData& data, std::span<const double> x) {
    std::vector<double> out(data.n_records);
    for (std::size_t k = 0; k < data.n_records; ++k) {
        out[k] = data.predict(k, x.data());
        if (!std::isfinite(out[k])) {
            throw numeric_error("prediction overflowed at record " + std::to_string(k + 1));
        }
    }
    return out;
}

} // namespace

RegMode RegMode::l1(double lambda) { return make(RegKind::l1, lambda); }
RegMode RegMode::l2(double lambda) { return make(RegKind::l2, lambda); }

RegMode RegMode::make(RegKind kind, double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("lambda must be finite and >= 0");
    }
    if (kind == RegKind::none || lambda == 0.0) {
        return {RegKind::none, 0.0};
    }
    return {kind, lambda};
}

double cost_mae(const Dataset& dataset, std::span<const double> flat_x) {
    if (dataset.size() == 0) {
        throw std::invalid_argument("cost over an empty dataset");
    }
    return cost_on(CompiledData::of(dataset), flat_x, RegMode::none());
}

double cost_regularized(const Dataset& dataset, std::span<const double> flat_x,
                        const RegMode& reg) {
    if (dataset.size() == 0) {
        throw std::invalid_argument("cost over an empty dataset");
    }
    return cost_on(CompiledData::of(dataset), flat_x, RegMode::make(reg.kind, reg.lambda));
}

FitResult fit(const Dataset& train, const Dataset* test, const FitConfig& config) {
    if (train.size() == 0) {
        throw std::invalid_argument("training dataset is empty");
    }
    if (test != nullptr && !(test->schema() == train.schema())) {
        throw std::invalid_argument("train and test schemas differ");
    }
    const ParamSchema& schema = train.schema();
    const FlatLayout layout = FlatLayout::of(schema);
    Bounds bounds = config.bounds.empty() ? default_bounds(schema) : config.bounds;
    if (bounds.size() != layout.size) {
        throw std::invalid_argument("bounds dimension " + std::to_string(bounds.size()) +
                                    " does not match model dimension " +
                                    std::to_string(layout.size));
    }
    const RegMode reg = RegMode::make(config.reg.kind, config.reg.lambda);

    const CompiledData data = CompiledData::of(train);
    Objective objective = [&data, reg](std::span<const double> x) {
        return cost_on(data, x, reg);
    };
    auto runs = minimize_multi(objective, bounds, config.de, config.seeds, config.threads);

    FitResult result;
    result.per_seed.reserve(runs.size());
    for (std::size_t k = 0; k < runs.size(); ++k) {
        SeedFit sf;
        sf.seed = config.seeds[k];
        sf.model = unflatten(schema, runs[k].best_x);
        sf.cost = runs[k].best_cost;
        sf.generations = runs[k].generations_run;
        sf.converged = runs[k].converged;
        result.per_seed.push_back(std::move(sf));
    }

    result.slot_stats.resize(layout.size);
    const double n_seeds = static_cast<double>(runs.size());
    for (std::size_t m = 0; m < layout.size; ++m) {
        double mean = 0.0;
        for (const auto& r : runs) mean += r.best_x[m];
        mean /= n_seeds;
        double var = 0.0;
        for (const auto& r : runs) {
            const double d = r.best_x[m] - mean;
            var += d * d;
        }
        result.slot_stats[m] = {mean, std::sqrt(var / n_seeds)};
    }

    result.representative_index = 0;
    for (std::size_t k = 1; k < result.per_seed.size(); ++k) {
        if (result.per_seed[k].cost < result.per_seed[result.representative_index].cost) {
            result.representative_index = k;
        }
    }

    const auto& best = runs[result.representative_index].best_x;
    result.train_metrics = compute_metrics(data.time, predict_all(data, best));
    if (test != nullptr && test->size() > 0) {
        const CompiledData test_data = CompiledData::of(*test);
        result.test_metrics = compute_metrics(test_data.time, predict_all(test_data, best));
    }
    return result;
}

std::vector<SweepEntry> lambda_sweep(const Dataset& train, const Dataset& test,
                                     const FitConfig& config, std::span<const double> lambdas) {
    if (lambdas.empty()) {
        throw std::invalid_argument("lambda list must not be empty");
    }
    if (config.reg.kind == RegKind::none) {
        throw std::invalid_argument("lambda_sweep needs an l1 or l2 penalty form");
    }
    for (double l : lambdas) {
        if (!(l >= 0.0) || !std::isfinite(l)) {
            throw std::invalid_argument("lambda values must be finite and >= 0");
        }
    }
    std::vector<SweepEntry> entries;
    entries.reserve(lambdas.size());
    for (double l : lambdas) {
        FitConfig c = config;
        c.reg = RegMode::make(config.reg.kind, l);
        SweepEntry e;
        e.lambda = l;
        e.result = fit(train, &test, c);
        if (e.result.test_metrics) {
            e.r2_test = e.result.test_metrics->r2;
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

namespace {

nlohmann::ordered_json stat_json(const SlotStat& s) {
    return {{"mean", s.mean}, {"std", s.stddev}};
}

} // namespace

nlohmann::ordered_json fit_result_to_json(const ParamSchema& schema, const FitResult& result,
                                          const RegMode& reg) {
    const FlatLayout layout = FlatLayout::of(schema);
    nlohmann::ordered_json j;
    j["regularization"] = {{"kind", reg.kind == RegKind::none ? "none"
                                    : reg.kind == RegKind::l1 ? "l1"
                                                              : "l2"},
                           {"lambda", reg.lambda}};
    j["seeds"] = nlohmann::ordered_json::array();
    for (const auto& s : result.per_seed) j["seeds"].push_back(s.seed);

    j["per_seed"] = nlohmann::ordered_json::array();
    for (const auto& s : result.per_seed) {
        j["per_seed"].push_back({{"seed", s.seed},
                                 {"cost", s.cost},
                                 {"generations", s.generations},
                                 {"converged", s.converged},
                                 {"model", param_vector_to_json(schema, s.model)}});
    }

    nlohmann::ordered_json agg;
    agg["numeric"] = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < schema.numeric().size(); ++i) {
        agg["numeric"][schema.numeric()[i].name] = {
            {"a", stat_json(result.slot_stats[2 * i])},
            {"p", stat_json(result.slot_stats[2 * i + 1])}};
    }
    agg["categorical"] = nlohmann::ordered_json::object();
    for (std::size_t g = 0; g < schema.categorical().size(); ++g) {
        const auto& group = schema.categorical()[g];
        nlohmann::ordered_json levels;
        for (std::size_t l = 0; l < group.levels.size(); ++l) {
            levels[group.levels[l]] = stat_json(result.slot_stats[layout.group_offsets[g] + l]);
        }
        agg["categorical"][group.name] = std::move(levels);
    }
    agg["extrinsic"] = nlohmann::ordered_json::object();
    for (std::size_t jx = 0; jx < schema.extrinsic().size(); ++jx) {
        agg["extrinsic"][schema.extrinsic()[jx].name] = {
            {"q", stat_json(result.slot_stats[layout.extrinsic_offset + jx])}};
    }
    agg["constant"] = stat_json(result.slot_stats[layout.constant_offset]);
    j["aggregate"] = std::move(agg);

    const auto& rep = result.representative();
    j["representative"] = {{"seed", rep.seed},
                           {"cost", rep.cost},
                           {"model", param_vector_to_json(schema, rep.model)}};

    j["metrics"] = nlohmann::ordered_json::object();
    j["metrics"]["train"] = metrics_to_json(result.train_metrics);
    j["metrics"]["test"] =
        result.test_metrics ? metrics_to_json(*result.test_metrics) : nlohmann::ordered_json(nullptr);
    return j;
}

FitResult fit_result_from_json(const ParamSchema& schema, const nlohmann::json& j) try {
    if (!j.is_object() || !j.contains("per_seed") || !j.contains("aggregate") ||
        !j.contains("representative") || !j.contains("metrics")) {
        throw data_error("fit result: missing per_seed, aggregate, representative, or metrics");
    }
    const FlatLayout layout = FlatLayout::of(schema);
    FitResult result;
    for (const auto& s : j.at("per_seed")) {
        SeedFit sf;
        sf.seed = s.at("seed").get<std::uint64_t>();
        sf.cost = s.at("cost").get<double>();
        sf.generations = s.at("generations").get<int>();
        sf.converged = s.at("converged").get<bool>();
        sf.model = param_vector_from_json(schema, s.at("model"));
        result.per_seed.push_back(std::move(sf));
    }
    if (result.per_seed.empty()) {
        throw data_error("fit result: per_seed is empty");
    }

    const auto& agg = j.at("aggregate");
    auto stat_of = [](const nlohmann::json& s) -> SlotStat {
        return {s.at("mean").get<double>(), s.at("std").get<double>()};
    };
    result.slot_stats.resize(layout.size);
    for (std::size_t i = 0; i < schema.numeric().size(); ++i) {
        const auto& e = agg.at("numeric").at(schema.numeric()[i].name);
        result.slot_stats[2 * i] = stat_of(e.at("a"));
        result.slot_stats[2 * i + 1] = stat_of(e.at("p"));
    }
    for (std::size_t g = 0; g < schema.categorical().size(); ++g) {
        const auto& group = schema.categorical()[g];
        for (std::size_t l = 0; l < group.levels.size(); ++l) {
            result.slot_stats[layout.group_offsets[g] + l] =
                stat_of(agg.at("categorical").at(group.name).at(group.levels[l]));
        }
    }
    for (std::size_t jx = 0; jx < schema.extrinsic().size(); ++jx) {
        result.slot_stats[layout.extrinsic_offset + jx] =
            stat_of(agg.at("extrinsic").at(schema.extrinsic()[jx].name).at("q"));
    }
    result.slot_stats[layout.constant_offset] = stat_of(agg.at("constant"));

    const auto rep_seed = j.at("representative").at("seed").get<std::uint64_t>();
    result.representative_index = 0;
    for (std::size_t k = 0; k < result.per_seed.size(); ++k) {
        if (result.per_seed[k].seed == rep_seed) {
            result.representative_index = k;
            break;
        }
    }

    result.train_metrics = metrics_from_json(j.at("metrics").at("train"));
    const auto& test = j.at("metrics").at("test");
    if (test.is_object()) {
        result.test_metrics = metrics_from_json(test);
    }
    return result;
} catch (const nlohmann::json::exception& e) {
    throw data_error(std::string("fit result: ") + e.what());
}

ParamVector model_from_result_json(const ParamSchema& schema, const nlohmann::json& j) {
    if (j.is_object() && j.contains("representative")) {
        const auto& rep = j.at("representative");
        if (!rep.is_object() || !rep.contains("model")) {
            throw data_error("fit result: 'representative' lacks a 'model'");
        }
        return param_vector_from_json(schema, rep.at("model"));
    }
    return param_vector_from_json(schema, j);
}

} // namespace perfmodel
