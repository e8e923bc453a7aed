#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "perfmodel/model.hpp"
#include "perfmodel/schema.hpp"

namespace perfmodel {

enum class NoiseKind { none, gaussian_relative };

/// Synthetic dataset generation from a known ground-truth model. Noise is
/// multiplicative: each repetition is t_true * (1 + eps) with
/// eps ~ N(0, sigma^2) truncated at +-5 sigma and the factor floored to
/// keep times positive.
struct SynthConfig {
    ParamVector ground_truth;
    NoiseKind noise = NoiseKind::none;
    double sigma = 0.0;
    int repetitions = 3;
    std::uint64_t seed = 0;
};

struct SynthOutput {
    Dataset dataset; // median-aggregated
    std::vector<RawTrialGroup> raw;
};

/// Draws `trials` assignments, each parameter independently uniform over
/// its domain or levels. Deterministic for a fixed seed.
std::vector<Assignment> sample_configs(const ParamSchema& schema, std::size_t trials,
                                       std::uint64_t seed);

/// Evaluates the ground truth on every assignment and emits noisy
/// repetitions plus their median-aggregated dataset. The ground truth must
/// lie inside the default bounds and must predict a positive time on every
/// assignment.
SynthOutput generate(const ParamSchema& schema, std::span<const Assignment> assignments,
                     const SynthConfig& config);

} // namespace perfmodel
