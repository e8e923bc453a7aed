#include "perfmodel/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "perfmodel/errors.hpp"
#include "perfmodel/rng.hpp"

namespace perfmodel {

std::vector<Assignment> sample_configs(const ParamSchema& schema, std::size_t trials,
                                       std::uint64_t seed) {
    if (trials < 1) {
        throw std::invalid_argument("trials must be >= 1");
    }
    rng::Engine eng(seed);
    std::vector<Assignment> out;
    out.reserve(trials);
    for (std::size_t t = 0; t < trials; ++t) {
        Assignment a;
        a.numeric.reserve(schema.numeric().size());
        for (const auto& p : schema.numeric()) {
            a.numeric.push_back(p.domain[rng::pick(eng, p.domain.size())]);
        }
        a.categorical.reserve(schema.categorical().size());
        for (const auto& g : schema.categorical()) {
            a.categorical.push_back(g.levels[rng::pick(eng, g.levels.size())]);
        }
        a.extrinsic.reserve(schema.extrinsic().size());
        for (const auto& p : schema.extrinsic()) {
            a.extrinsic.push_back(p.domain[rng::pick(eng, p.domain.size())]);
        }
        out.push_back(std::move(a));
    }
    return out;
}

SynthOutput generate(const ParamSchema& schema, std::span<const Assignment> assignments,
                     const SynthConfig& config) {
    if (!(config.sigma >= 0.0) || !std::isfinite(config.sigma)) {
        throw std::invalid_argument("sigma must be finite and >= 0");
    }
    if (config.repetitions < 1) {
        throw std::invalid_argument("repetitions must be >= 1");
    }
    const Bounds bounds = default_bounds(schema);
    const std::vector<double> flat = flatten(config.ground_truth);
    if (flat.size() != bounds.size()) {
        throw std::invalid_argument("ground truth is not dimensioned for the schema");
    }
    for (std::size_t m = 0; m < flat.size(); ++m) {
        if (flat[m] < bounds[m].lo || flat[m] > bounds[m].hi) {
            throw std::invalid_argument("ground truth slot " + std::to_string(m) +
                                        " lies outside the default bounds");
        }
    }

    rng::Engine eng(config.seed);
    std::vector<RawTrialGroup> raw;
    raw.reserve(assignments.size());
    for (std::size_t k = 0; k < assignments.size(); ++k) {
        const double t_true = evaluate(schema, config.ground_truth, assignments[k]);
        if (!(t_true > 0.0)) {
            throw data_error("ground-truth prediction is not positive at assignment " +
                             std::to_string(k + 1));
        }
        RawTrialGroup g;
        char id[24];
        std::snprintf(id, sizeof(id), "t%05zu", k + 1);
        g.trial_id = id;
        g.values = assignments[k];
        g.repetitions_ms.reserve(static_cast<std::size_t>(config.repetitions));
        for (int r = 0; r < config.repetitions; ++r) {
            double t = t_true;
            if (config.noise == NoiseKind::gaussian_relative) {
                const double eps = std::clamp(config.sigma * rng::gaussian(eng),
                                              -5.0 * config.sigma, 5.0 * config.sigma);
                // floor keeps times positive when sigma is large
                t = t_true * std::max(1.0 + eps, 1e-12);
            }
            g.repetitions_ms.push_back(t);
        }
        raw.push_back(std::move(g));
    }
    Dataset dataset = aggregate_repetitions(schema, raw);
    return {std::move(dataset), std::move(raw)};
}

} // namespace perfmodel
