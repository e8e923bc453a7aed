#pragma once

#include <optional>
#include <span>

#include <json.hpp>

namespace perfmodel {

/// Mean absolute percentage error, as a fraction. Requires measured > 0.
/// The per-record terms are reduced in a fixed order independent of input
/// order, so the result is permutation invariant.
double mape(std::span<const double> measured, std::span<const double> predicted);

double mse(std::span<const double> measured, std::span<const double> predicted);
double rmse(std::span<const double> measured, std::span<const double> predicted);

/// 1 - SS_res / SS_tot with SS_tot around the measured mean. Throws
/// data_error when the measured series is constant (or has < 2 points).
double r2(std::span<const double> measured, std::span<const double> predicted);

struct MetricsReport {
    double mape = 0.0;         // fraction, not percent
    double mse = 0.0;          // ms^2
    double rmse = 0.0;         // ms
    std::optional<double> r2;  // absent when undefined (constant measured series)
};

/// All four metrics at once; r2 is left empty instead of throwing when it
/// is undefined for the series.
MetricsReport compute_metrics(std::span<const double> measured, std::span<const double> predicted);

nlohmann::ordered_json metrics_to_json(const MetricsReport& m);
MetricsReport metrics_from_json(const nlohmann::json& j);

} // namespace perfmodel
