#include "perfmodel/model.hpp"

#include <cmath>
#include <fstream>

#include "perfmodel/detail/text.hpp"
#include "perfmodel/errors.hpp"

namespace perfmodel {

FlatLayout FlatLayout::of(const ParamSchema& schema) {
    FlatLayout l;
    l.n_numeric = schema.numeric().size();
    l.n_groups = schema.categorical().size();
    l.n_extrinsic = schema.extrinsic().size();
    std::size_t off = 2 * l.n_numeric;
    for (const auto& g : schema.categorical()) {
        l.group_offsets.push_back(off);
        off += g.levels.size();
    }
    l.extrinsic_offset = off;
    l.constant_offset = off + l.n_extrinsic;
    l.size = l.constant_offset + 1;
    return l;
}

std::size_t flat_size(const ParamSchema& schema) {
    return FlatLayout::of(schema).size;
}

std::vector<double> flatten(const ParamVector& x) {
    std::vector<double> flat;
    flat.reserve(2 * x.numeric.size() + x.extrinsic_powers.size() + 1);
    for (const auto& term : x.numeric) {
        flat.push_back(term.coeff);
        flat.push_back(term.power);
    }
    for (const auto& group : x.categorical) {
        flat.insert(flat.end(), group.begin(), group.end());
    }
    flat.insert(flat.end(), x.extrinsic_powers.begin(), x.extrinsic_powers.end());
    flat.push_back(x.constant);
    return flat;
}

ParamVector unflatten(const ParamSchema& schema, std::span<const double> flat) {
    const FlatLayout layout = FlatLayout::of(schema);
    if (flat.size() != layout.size) {
        throw std::invalid_argument("flat vector length " + std::to_string(flat.size()) +
                                    " does not match layout size " + std::to_string(layout.size));
    }
    ParamVector x;
    x.numeric.reserve(layout.n_numeric);
    for (std::size_t i = 0; i < layout.n_numeric; ++i) {
        x.numeric.push_back({flat[2 * i], flat[2 * i + 1]});
    }
    x.categorical.reserve(layout.n_groups);
    for (std::size_t g = 0; g < layout.n_groups; ++g) {
        const std::size_t off = layout.group_offsets[g];
        const std::size_t levels = schema.categorical()[g].levels.size();
        x.categorical.emplace_back(flat.begin() + off, flat.begin() + off + levels);
    }
    x.extrinsic_powers.assign(flat.begin() + layout.extrinsic_offset,
                              flat.begin() + layout.constant_offset);
    x.constant = flat[layout.constant_offset];
    return x;
}

Bounds default_bounds(const ParamSchema& schema) {
    const FlatLayout layout = FlatLayout::of(schema);
    constexpr Bound coeff{0.0, 1000.0};
    constexpr Bound power{-5.0, 5.0};
    Bounds b(layout.size, coeff);
    for (std::size_t i = 0; i < layout.n_numeric; ++i) {
        b[2 * i + 1] = power;
    }
    for (std::size_t j = 0; j < layout.n_extrinsic; ++j) {
        b[layout.extrinsic_offset + j] = power;
    }
    return b;
}

// The term order here (numeric sum, then categorical coefficients, then the
// extrinsic product) is the reference arithmetic; the fitting module's
// compiled evaluation repeats it operation for operation so both paths give
// bit-identical predictions.
double evaluate(const ParamSchema& schema, const ParamVector& x, const Assignment& values) {
    validate_assignment(schema, values, "assignment");
    if (x.numeric.size() != schema.numeric().size() ||
        x.categorical.size() != schema.categorical().size() ||
        x.extrinsic_powers.size() != schema.extrinsic().size()) {
        throw std::invalid_argument("parameter vector is not dimensioned for the schema");
    }
    double intrinsic = 0.0;
    for (std::size_t i = 0; i < x.numeric.size(); ++i) {
        intrinsic += x.numeric[i].coeff * std::pow(values.numeric[i], x.numeric[i].power);
    }
    for (std::size_t g = 0; g < x.categorical.size(); ++g) {
        intrinsic += x.categorical[g][schema.level_index(g, values.categorical[g])];
    }
    double scale = 1.0;
    for (std::size_t j = 0; j < x.extrinsic_powers.size(); ++j) {
        scale *= std::pow(values.extrinsic[j], x.extrinsic_powers[j]);
    }
    const double t = intrinsic * scale + x.constant;
    if (!std::isfinite(t)) {
        throw numeric_error("model evaluation overflowed to a non-finite value");
    }
    return t;
}

double evaluate(const ParamSchema& schema, const ParamVector& x, const TrialRecord& record) {
    return evaluate(schema, x, record.values);
}

nlohmann::ordered_json param_vector_to_json(const ParamSchema& schema, const ParamVector& x) {
    if (flatten(x).size() != flat_size(schema)) {
        throw std::invalid_argument("parameter vector is not dimensioned for the schema");
    }
    nlohmann::ordered_json j;
    j["numeric"] = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < schema.numeric().size(); ++i) {
        j["numeric"][schema.numeric()[i].name] = {{"a", x.numeric[i].coeff},
                                                  {"p", x.numeric[i].power}};
    }
    j["categorical"] = nlohmann::ordered_json::object();
    for (std::size_t g = 0; g < schema.categorical().size(); ++g) {
        const auto& group = schema.categorical()[g];
        nlohmann::ordered_json levels;
        for (std::size_t l = 0; l < group.levels.size(); ++l) {
            levels[group.levels[l]] = x.categorical[g][l];
        }
        j["categorical"][group.name] = std::move(levels);
    }
    j["extrinsic"] = nlohmann::ordered_json::object();
    for (std::size_t jx = 0; jx < schema.extrinsic().size(); ++jx) {
        j["extrinsic"][schema.extrinsic()[jx].name] = {{"q", x.extrinsic_powers[jx]}};
    }
    j["constant"] = x.constant;
    return j;
}

ParamVector param_vector_from_json(const ParamSchema& schema, const nlohmann::json& j) {
    if (!j.is_object()) {
        throw data_error("model: expected a JSON object");
    }
    auto section = [&](const char* key) -> const nlohmann::json& {
        auto it = j.find(key);
        if (it == j.end()) {
            throw data_error(std::string("model: missing '") + key + "' section");
        }
        return *it;
    };
    auto number_at = [&](const nlohmann::json& obj, const std::string& owner,
                         const char* role) -> double {
        auto it = obj.find(role);
        if (it == obj.end() || !it->is_number()) {
            throw data_error("model: '" + owner + "' needs a numeric '" + role + "'");
        }
        return it->get<double>();
    };
    ParamVector x;
    const auto& numeric = section("numeric");
    for (const auto& p : schema.numeric()) {
        auto it = numeric.find(p.name);
        if (it == numeric.end()) {
            throw data_error("model: missing numeric term '" + p.name + "'");
        }
        x.numeric.push_back({number_at(*it, p.name, "a"), number_at(*it, p.name, "p")});
    }
    const auto& categorical = section("categorical");
    for (const auto& g : schema.categorical()) {
        auto it = categorical.find(g.name);
        if (it == categorical.end()) {
            throw data_error("model: missing categorical group '" + g.name + "'");
        }
        std::vector<double> coeffs;
        for (const auto& level : g.levels) {
            auto lv = it->find(level);
            if (lv == it->end() || !lv->is_number()) {
                throw data_error("model: group '" + g.name + "' needs a numeric coefficient for level '" +
                                 level + "'");
            }
            coeffs.push_back(lv->get<double>());
        }
        x.categorical.push_back(std::move(coeffs));
    }
    const auto& extrinsic = section("extrinsic");
    for (const auto& p : schema.extrinsic()) {
        auto it = extrinsic.find(p.name);
        if (it == extrinsic.end()) {
            throw data_error("model: missing extrinsic term '" + p.name + "'");
        }
        x.extrinsic_powers.push_back(number_at(*it, p.name, "q"));
    }
    auto c = j.find("constant");
    if (c == j.end() || !c->is_number()) {
        throw data_error("model: missing numeric 'constant'");
    }
    x.constant = c->get<double>();
    return x;
}

ParamVector load_param_vector(const std::string& path, const ParamSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw data_error("cannot open file: " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw data_error("malformed JSON in " + path + ": " + e.what());
    }
    return param_vector_from_json(schema, j);
}

} // namespace perfmodel
