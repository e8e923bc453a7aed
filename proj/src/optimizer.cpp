#include "perfmodel/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include "perfmodel/detail/text.hpp"
#include "perfmodel/errors.hpp"
#include "perfmodel/rng.hpp"

namespace perfmodel {

namespace {

void validate(const Bounds& bounds, const DeConfig& config) {
    if (bounds.empty()) {
        throw std::invalid_argument("bounds must not be empty");
    }
    for (const auto& b : bounds) {
        if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || !(b.lo < b.hi)) {
            throw std::invalid_argument("each bound needs finite lo < hi");
        }
    }
    if (config.pop_multiplier < 1) {
        throw std::invalid_argument("pop_multiplier must be >= 1");
    }
    if (!(config.mutation_lo > 0.0 && config.mutation_lo < config.mutation_hi &&
          config.mutation_hi < 2.0)) {
        throw std::invalid_argument("mutation interval must satisfy 0 < lo < hi < 2");
    }
    if (!(config.recombination > 0.0 && config.recombination <= 1.0)) {
        throw std::invalid_argument("recombination must lie in (0, 1]");
    }
    if (config.max_generations < 1) {
        throw std::invalid_argument("max_generations must be >= 1");
    }
    if (!(config.tol >= 0.0)) {
        throw std::invalid_argument("tol must be >= 0");
    }
}

[[noreturn]] void abort_non_finite(std::span<const double> x, double value) {
    std::ostringstream msg;
    msg << "objective returned a non-finite value (" << value << ") at x = [";
    for (std::size_t d = 0; d < x.size(); ++d) {
        if (d) msg << ", ";
        msg << detail::format_double(x[d]);
    }
    msg << "]";
    throw numeric_error(msg.str());
}

inline double checked_eval(const Objective& objective, std::span<const double> x) {
    const double v = objective(x);
    if (!std::isfinite(v)) {
        abort_non_finite(x, v);
    }
    return v;
}

} // namespace

DeResult minimize(const Objective& objective, const Bounds& bounds, const DeConfig& config) {
    validate(bounds, config);
    const std::size_t dim = bounds.size();
    const std::size_t pop_size = std::max<std::size_t>(
        15, static_cast<std::size_t>(config.pop_multiplier) * dim);

    rng::Engine eng(config.seed);

    std::vector<std::vector<double>> pop(pop_size, std::vector<double>(dim));
    std::vector<double> cost(pop_size);
    for (std::size_t i = 0; i < pop_size; ++i) {
        for (std::size_t d = 0; d < dim; ++d) {
            pop[i][d] = rng::uniform(eng, bounds[d].lo, bounds[d].hi);
        }
        cost[i] = checked_eval(objective, pop[i]);
    }

    std::size_t best_i = 0;
    for (std::size_t i = 1; i < pop_size; ++i) {
        if (cost[i] < cost[best_i]) best_i = i;
    }
    std::vector<double> best_x = pop[best_i];
    double best_cost = cost[best_i];

    DeResult result;
    result.cost_trace.push_back(best_cost);

    std::vector<double> trial(dim);
    int gen = 0;
    for (gen = 1; gen <= config.max_generations; ++gen) {
        const double f = rng::uniform(eng, config.mutation_lo, config.mutation_hi);
        for (std::size_t i = 0; i < pop_size; ++i) {
            std::size_t r1 = i;
            while (r1 == i) r1 = static_cast<std::size_t>(rng::pick(eng, pop_size));
            std::size_t r2 = i;
            while (r2 == i || r2 == r1) r2 = static_cast<std::size_t>(rng::pick(eng, pop_size));
            const std::size_t forced = static_cast<std::size_t>(rng::pick(eng, dim));
            for (std::size_t d = 0; d < dim; ++d) {
                const double u = rng::unit(eng);
                if (u < config.recombination || d == forced) {
                    double v = best_x[d] + f * (pop[r1][d] - pop[r2][d]);
                    if (v < bounds[d].lo || v > bounds[d].hi) {
                        // out-of-bounds genes are redrawn uniformly over the
                        // whole box; this feeds diversity back into slots
                        // that collapse against a bound
                        v = rng::uniform(eng, bounds[d].lo, bounds[d].hi);
                    }
                    trial[d] = v;
                } else {
                    trial[d] = pop[i][d];
                }
            }
            const double c = checked_eval(objective, trial);
            if (c <= cost[i]) {
                pop[i] = trial;
                cost[i] = c;
                if (c < best_cost) {
                    best_cost = c;
                    best_x = trial;
                }
            }
        }
        result.cost_trace.push_back(best_cost);

        double mean = 0.0;
        for (double c : cost) mean += c;
        mean /= static_cast<double>(pop_size);
        double var = 0.0;
        for (double c : cost) var += (c - mean) * (c - mean);
        var /= static_cast<double>(pop_size);
        if (std::sqrt(var) <= config.tol * std::abs(mean)) {
            result.converged = true;
            break;
        }
    }

    result.generations_run = std::min(gen, config.max_generations);
    result.best_x = std::move(best_x);
    result.best_cost = best_cost;
    return result;
}

std::vector<DeResult> minimize_multi(const Objective& objective, const Bounds& bounds,
                                     const DeConfig& config,
                                     std::span<const std::uint64_t> seeds, unsigned threads) {
    if (seeds.empty()) {
        throw std::invalid_argument("seeds must not be empty");
    }
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        for (std::size_t j = i + 1; j < seeds.size(); ++j) {
            if (seeds[i] == seeds[j]) {
                throw std::invalid_argument("duplicate seed " + std::to_string(seeds[i]));
            }
        }
    }

    std::vector<DeResult> results(seeds.size());
    std::vector<std::exception_ptr> errors(seeds.size());
    auto run_one = [&](std::size_t k) {
        try {
            DeConfig c = config;
            c.seed = seeds[k];
            results[k] = minimize(objective, bounds, c);
        } catch (const numeric_error& e) {
            errors[k] = std::make_exception_ptr(
                numeric_error("seed " + std::to_string(seeds[k]) + ": " + e.what()));
        } catch (...) {
            errors[k] = std::current_exception();
        }
    };

    const unsigned workers =
        std::min<unsigned>(std::max(1u, threads), static_cast<unsigned>(seeds.size()));
    if (workers <= 1) {
        for (std::size_t k = 0; k < seeds.size(); ++k) run_one(k);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t k = w; k < seeds.size(); k += workers) run_one(k);
            });
        }
        for (auto& t : pool) t.join();
    }

    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return results;
}

} // namespace perfmodel
