#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "perfmodel/fitting.hpp"
#include "perfmodel/schema.hpp"

namespace perfmodel {

enum class ScalingClass { superlinear, ideal, sublinear, non_scaling };

/// q < -1-tau superlinear; |q+1| <= tau ideal; -1+tau < q < 0 sublinear;
/// q >= 0 non-scaling.
ScalingClass classify_scaling(double q, double tau);

std::string to_string(ScalingClass c);

struct ScalingVerdict {
    std::string parameter;
    double q_mean = 0.0;
    double q_std = 0.0;
    ScalingClass classification = ScalingClass::non_scaling;
    double tolerance = 0.05;
};

inline constexpr double kDefaultScalingTolerance = 0.05;

std::vector<ScalingVerdict> scaling_report(const ParamSchema& schema, const FitResult& result,
                                           double tau = kDefaultScalingTolerance);

/// Aligned plain-text coefficient table: numeric rows with a and p columns,
/// categorical level rows with "-" in the power column, an extrinsic
/// section with q, and the constant. Entries are "mean +- std" across seeds.
std::string coefficient_table_text(const ParamSchema& schema, const FitResult& result);

/// Long-form CSV of the same table: parameter,role,mean,std.
std::string coefficient_table_csv(const ParamSchema& schema, const FitResult& result);

std::string scaling_report_text(std::span<const ScalingVerdict> verdicts);
nlohmann::ordered_json scaling_report_json(std::span<const ScalingVerdict> verdicts);

/// (measured, predicted) per record, in record order.
std::vector<std::pair<double, double>> scatter_data(const Dataset& dataset, const ParamVector& model);

/// CSV with header measured_ms,predicted_ms.
void write_scatter_csv(const std::string& path, std::span<const std::pair<double, double>> rows);

} // namespace perfmodel
