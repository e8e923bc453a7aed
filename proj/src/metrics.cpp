#include "perfmodel/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "perfmodel/errors.hpp"

namespace perfmodel {

namespace {

void check_series(std::span<const double> measured, std::span<const double> predicted) {
    if (measured.size() != predicted.size()) {
        throw std::invalid_argument("measured and predicted series differ in length");
    }
    if (measured.empty()) {
        throw std::invalid_argument("metrics need at least one record");
    }
}

} // namespace

double mape(std::span<const double> measured, std::span<const double> predicted) {
    check_series(measured, predicted);
    std::vector<double> terms(measured.size());
    for (std::size_t k = 0; k < measured.size(); ++k) {
        if (!(measured[k] > 0.0)) {
            throw data_error("mape: measured value at record " + std::to_string(k + 1) +
                             " must be positive");
        }
        terms[k] = std::abs(measured[k] - predicted[k]) / measured[k];
    }
    // sorted reduction: the sum does not depend on record order
    std::sort(terms.begin(), terms.end());
    double sum = 0.0;
    for (double t : terms) sum += t;
    return sum / static_cast<double>(terms.size());
}

double mse(std::span<const double> measured, std::span<const double> predicted) {
    check_series(measured, predicted);
    double sum = 0.0;
    for (std::size_t k = 0; k < measured.size(); ++k) {
        const double e = measured[k] - predicted[k];
        sum += e * e;
    }
    return sum / static_cast<double>(measured.size());
}

double rmse(std::span<const double> measured, std::span<const double> predicted) {
    return std::sqrt(mse(measured, predicted));
}

double r2(std::span<const double> measured, std::span<const double> predicted) {
    check_series(measured, predicted);
    if (measured.size() < 2) {
        throw data_error("r2 is undefined for fewer than 2 records");
    }
    double mean = 0.0;
    for (double t : measured) mean += t;
    mean /= static_cast<double>(measured.size());
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t k = 0; k < measured.size(); ++k) {
        const double r = measured[k] - predicted[k];
        const double d = measured[k] - mean;
        ss_res += r * r;
        ss_tot += d * d;
    }
    if (ss_tot == 0.0) {
        throw data_error("r2 is undefined for a constant measured series");
    }
    return 1.0 - ss_res / ss_tot;
}

MetricsReport compute_metrics(std::span<const double> measured, std::span<const double> predicted) {
    MetricsReport m;
    m.mape = mape(measured, predicted);
    m.mse = mse(measured, predicted);
    m.rmse = std::sqrt(m.mse);
    try {
        m.r2 = r2(measured, predicted);
    } catch (const data_error&) {
        m.r2.reset();
    }
    return m;
}

nlohmann::ordered_json metrics_to_json(const MetricsReport& m) {
    nlohmann::ordered_json j;
    j["mape"] = m.mape;
    j["mse"] = m.mse;
    j["rmse"] = m.rmse;
    if (m.r2) {
        j["r2"] = *m.r2;
    } else {
        j["r2"] = nullptr;
    }
    return j;
}

MetricsReport metrics_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("mape") || !j.contains("mse") || !j.contains("rmse")) {
        throw data_error("metrics: expected an object with mape, mse, rmse");
    }
    MetricsReport m;
    m.mape = j.at("mape").get<double>();
    m.mse = j.at("mse").get<double>();
    m.rmse = j.at("rmse").get<double>();
    if (j.contains("r2") && j.at("r2").is_number()) {
        m.r2 = j.at("r2").get<double>();
    }
    return m;
}

} // namespace perfmodel
