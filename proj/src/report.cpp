#include "perfmodel/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "perfmodel/detail/text.hpp"
#include "perfmodel/errors.hpp"

namespace perfmodel {

ScalingClass classify_scaling(double q, double tau) {
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        throw std::invalid_argument("scaling tolerance must be finite and > 0");
    }
    // compare against the computed band edges so the boundaries are exact
    const double lo = -1.0 - tau;
    const double hi = -1.0 + tau;
    if (q < lo) return ScalingClass::superlinear;
    if (q <= hi) return ScalingClass::ideal;
    if (q < 0.0) return ScalingClass::sublinear;
    return ScalingClass::non_scaling;
}

std::string to_string(ScalingClass c) {
    switch (c) {
    case ScalingClass::superlinear: return "superlinear";
    case ScalingClass::ideal: return "ideal";
    case ScalingClass::sublinear: return "sublinear";
    case ScalingClass::non_scaling: return "non-scaling";
    }
    return "?";
}

std::vector<ScalingVerdict> scaling_report(const ParamSchema& schema, const FitResult& result,
                                           double tau) {
    if (schema.extrinsic().empty()) {
        throw std::invalid_argument("schema has no extrinsic parameters to classify");
    }
    const FlatLayout layout = FlatLayout::of(schema);
    std::vector<ScalingVerdict> verdicts;
    verdicts.reserve(schema.extrinsic().size());
    for (std::size_t j = 0; j < schema.extrinsic().size(); ++j) {
        const SlotStat& s = result.slot_stats[layout.extrinsic_offset + j];
        ScalingVerdict v;
        v.parameter = schema.extrinsic()[j].name;
        v.q_mean = s.mean;
        v.q_std = s.stddev;
        v.classification = classify_scaling(s.mean, tau);
        v.tolerance = tau;
        verdicts.push_back(std::move(v));
    }
    return verdicts;
}

namespace {

std::string fmt_stat(const SlotStat& s) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g +- %.4g", s.mean, s.stddev);
    return buf;
}

void row(std::ostringstream& out, const std::string& name, std::size_t name_w,
         const std::string& col1, const std::string& col2, bool two_cols) {
    out << "  " << name;
    for (std::size_t i = name.size(); i < name_w; ++i) out << ' ';
    out << "  " << col1;
    if (two_cols) {
        for (std::size_t i = col1.size(); i < 22; ++i) out << ' ';
        out << "  " << col2;
    }
    out << '\n';
}

} // namespace

std::string coefficient_table_text(const ParamSchema& schema, const FitResult& result) {
    const FlatLayout layout = FlatLayout::of(schema);
    std::size_t name_w = 9; // "Parameter"
    for (const auto& p : schema.numeric()) name_w = std::max(name_w, p.name.size());
    for (const auto& g : schema.categorical()) {
        for (const auto& l : g.levels) name_w = std::max(name_w, g.name.size() + l.size() + 1);
    }
    for (const auto& p : schema.extrinsic()) name_w = std::max(name_w, p.name.size());

    std::ostringstream out;
    out << "Intrinsic parameters\n";
    row(out, "Parameter", name_w, "a", "p", true);
    for (std::size_t i = 0; i < schema.numeric().size(); ++i) {
        row(out, schema.numeric()[i].name, name_w, fmt_stat(result.slot_stats[2 * i]),
            fmt_stat(result.slot_stats[2 * i + 1]), true);
    }
    for (std::size_t g = 0; g < schema.categorical().size(); ++g) {
        const auto& group = schema.categorical()[g];
        for (std::size_t l = 0; l < group.levels.size(); ++l) {
            row(out, group.name + ":" + group.levels[l], name_w,
                fmt_stat(result.slot_stats[layout.group_offsets[g] + l]), "-", true);
        }
    }
    out << "Extrinsic parameters\n";
    row(out, "Parameter", name_w, "q", "", false);
    for (std::size_t j = 0; j < schema.extrinsic().size(); ++j) {
        row(out, schema.extrinsic()[j].name, name_w,
            fmt_stat(result.slot_stats[layout.extrinsic_offset + j]), "", false);
    }
    out << "Constant term\n";
    row(out, "C", name_w, fmt_stat(result.slot_stats[layout.constant_offset]), "", false);
    return out.str();
}

std::string coefficient_table_csv(const ParamSchema& schema, const FitResult& result) {
    const FlatLayout layout = FlatLayout::of(schema);
    std::string out = "parameter,role,mean,std\n";
    auto line = [&](const std::string& name, const char* role, const SlotStat& s) {
        out += name;
        out.push_back(',');
        out += role;
        out.push_back(',');
        out += detail::format_double(s.mean);
        out.push_back(',');
        out += detail::format_double(s.stddev);
        out.push_back('\n');
    };
    for (std::size_t i = 0; i < schema.numeric().size(); ++i) {
        line(schema.numeric()[i].name, "a", result.slot_stats[2 * i]);
        line(schema.numeric()[i].name, "p", result.slot_stats[2 * i + 1]);
    }
    for (std::size_t g = 0; g < schema.categorical().size(); ++g) {
        const auto& group = schema.categorical()[g];
        for (std::size_t l = 0; l < group.levels.size(); ++l) {
            line(group.name + ":" + group.levels[l], "a",
                 result.slot_stats[layout.group_offsets[g] + l]);
        }
    }
    for (std::size_t j = 0; j < schema.extrinsic().size(); ++j) {
        line(schema.extrinsic()[j].name, "q", result.slot_stats[layout.extrinsic_offset + j]);
    }
    line("C", "C", result.slot_stats[layout.constant_offset]);
    return out;
}

std::string scaling_report_text(std::span<const ScalingVerdict> verdicts) {
    std::size_t name_w = 9;
    for (const auto& v : verdicts) name_w = std::max(name_w, v.parameter.size());
    std::ostringstream out;
    out << "Scaling report (q = fitted extrinsic power; -1 is ideal scaling)\n";
    for (const auto& v : verdicts) {
        out << "  " << v.parameter;
        for (std::size_t i = v.parameter.size(); i < name_w; ++i) out << ' ';
        char buf[96];
        std::snprintf(buf, sizeof(buf), "  q = %.4g +- %.4g  ->  %s\n", v.q_mean, v.q_std,
                      to_string(v.classification).c_str());
        out << buf;
    }
    return out.str();
}

nlohmann::ordered_json scaling_report_json(std::span<const ScalingVerdict> verdicts) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& v : verdicts) {
        arr.push_back({{"parameter", v.parameter},
                       {"q_mean", v.q_mean},
                       {"q_std", v.q_std},
                       {"classification", to_string(v.classification)},
                       {"tolerance", v.tolerance}});
    }
    return arr;
}

std::vector<std::pair<double, double>> scatter_data(const Dataset& dataset,
                                                    const ParamVector& model) {
    std::vector<std::pair<double, double>> rows;
    rows.reserve(dataset.size());
    for (const auto& rec : dataset.records()) {
        rows.emplace_back(rec.time_ms, evaluate(dataset.schema(), model, rec));
    }
    return rows;
}

void write_scatter_csv(const std::string& path,
                       std::span<const std::pair<double, double>> rows) {
    std::string out = "measured_ms,predicted_ms\n";
    for (const auto& [measured, predicted] : rows) {
        out += detail::format_double(measured);
        out.push_back(',');
        out += detail::format_double(predicted);
        out.push_back('\n');
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw data_error("cannot write file: " + path);
    }
    f << out;
}

} // namespace perfmodel
