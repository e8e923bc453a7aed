#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "perfmodel/schema.hpp"

namespace perfmodel {

/// Box constraint for one slot of the flat parameter vector.
struct Bound {
    double lo;
    double hi;
};

using Bounds = std::vector<Bound>;

/// Coefficient and power of one intrinsic numeric term a * I^p.
struct NumericTerm {
    double coeff = 0.0; // a
    double power = 0.0; // p

    bool operator==(const NumericTerm&) const = default;
};

/// The unknown vector of the performance model
///
///   t = (sum_i a_i * I_i^p_i  +  sum_g c_{g,level(g)}) * prod_j E_j^q_j + C
///
/// Categorical groups contribute one additive coefficient per level, active
/// when that level is selected; no power slot is allocated for them.
struct ParamVector {
    std::vector<NumericTerm> numeric;              // per intrinsic numeric, schema order
    std::vector<std::vector<double>> categorical;  // per group, per level coefficient
    std::vector<double> extrinsic_powers;          // q per extrinsic, schema order
    double constant = 0.0;                         // C

    bool operator==(const ParamVector&) const = default;
};

/// Flattening order (a pure function of the schema): per numeric parameter
/// a then p, then categorical level coefficients (group order, level order),
/// then extrinsic powers, then the constant.
struct FlatLayout {
    std::size_t n_numeric = 0;
    std::size_t n_groups = 0;
    std::size_t n_extrinsic = 0;
    std::vector<std::size_t> group_offsets; // flat index of each group's first level
    std::size_t extrinsic_offset = 0;
    std::size_t constant_offset = 0;
    std::size_t size = 0; // M = 2*n_numeric + total levels + n_extrinsic + 1

    static FlatLayout of(const ParamSchema& schema);
};

std::size_t flat_size(const ParamSchema& schema);

std::vector<double> flatten(const ParamVector& x);
ParamVector unflatten(const ParamSchema& schema, std::span<const double> flat);

/// Coefficient and constant slots get [0, 1000]; power slots get [-5, 5].
Bounds default_bounds(const ParamSchema& schema);

/// Predicted iteration time in milliseconds for one assignment. Throws
/// numeric_error if the result is not finite.
double evaluate(const ParamSchema& schema, const ParamVector& x, const Assignment& values);
double evaluate(const ParamSchema& schema, const ParamVector& x, const TrialRecord& record);

/// JSON form keyed by parameter name and role (a/p/q/constant). The flat
/// slot order is an internal contract and is never serialized.
nlohmann::ordered_json param_vector_to_json(const ParamSchema& schema, const ParamVector& x);
ParamVector param_vector_from_json(const ParamSchema& schema, const nlohmann::json& j);
ParamVector load_param_vector(const std::string& path, const ParamSchema& schema);

} // namespace perfmodel
