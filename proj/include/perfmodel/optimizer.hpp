#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "perfmodel/model.hpp"

namespace perfmodel {

enum class DeStrategy { best1bin };

/// Differential evolution settings. Defaults mirror the common best/1/bin
/// configuration: population 15 x dimension (at least 15), mutation factor
/// dithered uniformly in (0.5, 1.0) once per generation, crossover 0.7,
/// relative convergence tolerance 0.01. There is no gradient polish phase;
/// the returned vector is pure DE output.
struct DeConfig {
    DeStrategy strategy = DeStrategy::best1bin;
    int pop_multiplier = 15;
    double mutation_lo = 0.5;
    double mutation_hi = 1.0;
    double recombination = 0.7;
    int max_generations = 1000;
    double tol = 0.01;
    std::uint64_t seed = 0;
};

struct DeResult {
    std::vector<double> best_x;
    double best_cost = 0.0;
    int generations_run = 0;
    std::vector<double> cost_trace; // best cost after init and after each generation
    bool converged = false;         // stopped on tolerance rather than budget
};

using Objective = std::function<double(std::span<const double>)>;

/// Bounded global minimization with best/1/bin differential evolution.
///
/// Per generation each individual builds a trial vector from the current
/// best plus a dithered difference of two distinct others, with binomial
/// crossover forcing at least one mutant gene. An out-of-bounds gene is
/// redrawn uniformly inside its box, which keeps feeding diversity into
/// slots that collapse against a bound, so every vector the objective ever
/// sees lies inside the bounds. A trial replaces its parent when its cost
/// is <= the parent's.
/// Terminates when std(population costs) <= tol * |mean(population costs)|
/// or after max_generations.
///
/// Deterministic for a fixed seed: one mt19937_64 stream drives, in order,
/// population init (individual-major), then per generation the dither
/// factor, then per individual the two partner picks, the forced crossover
/// index, one uniform draw per slot, and one redraw per out-of-bounds gene.
///
/// Throws numeric_error (with the offending vector) if the objective
/// returns a non-finite value.
DeResult minimize(const Objective& objective, const Bounds& bounds, const DeConfig& config);

/// One independent minimize() per seed, in seed order. `threads` caps the
/// number of concurrent runs; results do not depend on it. Seeds must be
/// distinct. The objective must be pure (it is shared across threads).
std::vector<DeResult> minimize_multi(const Objective& objective, const Bounds& bounds,
                                     const DeConfig& config,
                                     std::span<const std::uint64_t> seeds, unsigned threads = 1);

} // namespace perfmodel
