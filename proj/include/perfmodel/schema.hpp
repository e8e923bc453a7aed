#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace perfmodel {

/// A numeric parameter (intrinsic or extrinsic) with the finite set of
/// positive values it may take when sampling configurations.
struct NumericParam {
    std::string name;
    std::vector<double> domain;
};

/// A categorical parameter: a named group with at least two levels.
struct CategoricalParam {
    std::string name;
    std::vector<std::string> levels;
};

/// Declares the parameters of a performance model: intrinsic numeric terms,
/// intrinsic categorical groups, and extrinsic scaling factors. Immutable
/// after construction; construction validates all invariants (unique names,
/// positive non-empty domains, >= 2 levels per group).
class ParamSchema {
public:
    ParamSchema(std::vector<NumericParam> numeric,
                std::vector<CategoricalParam> categorical,
                std::vector<NumericParam> extrinsic);

    const std::vector<NumericParam>& numeric() const { return numeric_; }
    const std::vector<CategoricalParam>& categorical() const { return categorical_; }
    const std::vector<NumericParam>& extrinsic() const { return extrinsic_; }

    /// Index of `level` within group `group_index`; throws data_error if unknown.
    std::size_t level_index(std::size_t group_index, const std::string& level) const;

    /// Total number of categorical level slots across all groups.
    std::size_t total_levels() const;

    bool operator==(const ParamSchema& other) const;

    static ParamSchema from_json(const nlohmann::json& j);
    static ParamSchema load(const std::string& path);
    nlohmann::ordered_json to_json() const;
    void save(const std::string& path) const;

private:
    std::vector<NumericParam> numeric_;
    std::vector<CategoricalParam> categorical_;
    std::vector<NumericParam> extrinsic_;
};

/// One parameter assignment, stored positionally in schema order.
/// Categorical values are level strings, never pre-encoded integers.
struct Assignment {
    std::vector<double> numeric;
    std::vector<std::string> categorical;
    std::vector<double> extrinsic;

    bool operator==(const Assignment&) const = default;
};

/// One observation: a parameter assignment plus the measured iteration time
/// in milliseconds.
struct TrialRecord {
    Assignment values;
    double time_ms = 0.0;

    bool operator==(const TrialRecord&) const = default;
};

/// A group of repeated timings for a single parameter assignment, before
/// median aggregation.
struct RawTrialGroup {
    std::string trial_id;
    Assignment values;
    std::vector<double> repetitions_ms;
};

/// An ordered collection of trial records validated against a schema.
/// Immutable after construction; safe to share across threads.
class Dataset {
public:
    Dataset(ParamSchema schema, std::vector<TrialRecord> records);

    const ParamSchema& schema() const { return schema_; }
    const std::vector<TrialRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }

private:
    ParamSchema schema_;
    std::vector<TrialRecord> records_;
};

enum class FileFormat { csv, json };

/// Validates one assignment against the schema. `label` names the record in
/// error messages (e.g. "record 3"). Numeric and extrinsic values must be
/// positive and finite but need not belong to the declared sampling domain;
/// categorical values must be declared levels.
void validate_assignment(const ParamSchema& schema, const Assignment& a, const std::string& label);

Dataset load_dataset(const std::string& path, FileFormat format, const ParamSchema& schema);
void save_dataset(const Dataset& dataset, const std::string& path, FileFormat format);

std::vector<Assignment> load_assignments(const std::string& path, const ParamSchema& schema);
void save_assignments(const ParamSchema& schema, std::span<const Assignment> assignments,
                      const std::string& path);

std::vector<RawTrialGroup> load_raw_groups(const std::string& path, const ParamSchema& schema);
void save_raw_groups(const ParamSchema& schema, std::span<const RawTrialGroup> groups,
                     const std::string& path);

/// Median of each group's repetitions (even count: mean of the two central
/// values) becomes the record's measured time.
Dataset aggregate_repetitions(const ParamSchema& schema, std::span<const RawTrialGroup> groups);

/// Disjoint shuffled partition with round(N * train_fraction) training
/// records. Deterministic for a fixed seed.
std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction, std::uint64_t seed);

} // namespace perfmodel
