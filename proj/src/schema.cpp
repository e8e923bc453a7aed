#include "perfmodel/schema.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "perfmodel/detail/text.hpp"
#include "perfmodel/errors.hpp"
#include "perfmodel/rng.hpp"

namespace perfmodel {

namespace {

void check_identifier(const std::string& s, const std::string& role) {
    if (s.empty()) {
        throw data_error(role + " must not be empty");
    }
    for (char c : s) {
        if (c == ',' || c == '"' || c == '\n' || c == '\r' ||
            static_cast<unsigned char>(c) <= 0x20) {
            throw data_error(role + " '" + s + "' contains whitespace, comma, or quote");
        }
    }
}

void check_domain(const NumericParam& p, const std::string& group) {
    if (p.domain.empty()) {
        throw data_error(group + " parameter '" + p.name + "' has an empty domain");
    }
    std::unordered_set<double> seen;
    for (double v : p.domain) {
        if (!std::isfinite(v) || v <= 0.0) {
            throw data_error(group + " parameter '" + p.name +
                             "' domain value must be positive and finite, got " +
                             detail::format_double(v));
        }
        if (!seen.insert(v).second) {
            throw data_error(group + " parameter '" + p.name + "' has duplicate domain value " +
                             detail::format_double(v));
        }
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw data_error("cannot open file: " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw data_error("cannot write file: " + path);
    }
    out << content;
    if (!out) {
        throw data_error("write failed: " + path);
    }
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::string content = read_file(path);
    std::vector<std::string> lines;
    std::string cur;
    for (char c : content) {
        if (c == '\n') {
            if (!cur.empty() && cur.back() == '\r') {
                cur.pop_back();
            }
            lines.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) {
        if (cur.back() == '\r') {
            cur.pop_back();
        }
        lines.push_back(cur);
    }
    // drop trailing blank lines
    while (!lines.empty() && lines.back().empty()) {
        lines.pop_back();
    }
    return lines;
}

constexpr const char* kTimeColumn = "time_ms";
constexpr const char* kRepsKey = "time_ms_reps";
constexpr const char* kTrialIdKey = "trial_id";

// Column order used by every writer: numeric, categorical, extrinsic.
std::vector<std::string> schema_columns(const ParamSchema& schema) {
    std::vector<std::string> cols;
    for (const auto& p : schema.numeric()) cols.push_back(p.name);
    for (const auto& g : schema.categorical()) cols.push_back(g.name);
    for (const auto& p : schema.extrinsic()) cols.push_back(p.name);
    return cols;
}

struct ColumnMap {
    // position of each schema parameter in the CSV row
    std::vector<std::size_t> numeric;
    std::vector<std::size_t> categorical;
    std::vector<std::size_t> extrinsic;
    std::size_t time = 0;
};

ColumnMap map_header(const std::vector<std::string>& header, const ParamSchema& schema,
                     bool expect_time) {
    std::unordered_map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (!pos.emplace(header[i], i).second) {
            throw data_error("duplicate column '" + header[i] + "'");
        }
    }
    std::unordered_set<std::string> known;
    auto find = [&](const std::string& name) {
        auto it = pos.find(name);
        if (it == pos.end()) {
            throw data_error("missing column '" + name + "'");
        }
        known.insert(name);
        return it->second;
    };
    ColumnMap m;
    for (const auto& p : schema.numeric()) m.numeric.push_back(find(p.name));
    for (const auto& g : schema.categorical()) m.categorical.push_back(find(g.name));
    for (const auto& p : schema.extrinsic()) m.extrinsic.push_back(find(p.name));
    if (expect_time) {
        m.time = find(kTimeColumn);
    }
    for (const auto& h : header) {
        if (!known.count(h)) {
            throw data_error("unknown column '" + h + "'");
        }
    }
    return m;
}

double parse_field(const std::string& field, std::size_t row, const std::string& name) {
    auto v = detail::parse_double(field);
    if (!v) {
        throw data_error("record " + std::to_string(row) + ", field '" + name +
                         "': not a number: '" + field + "'");
    }
    return *v;
}

Assignment parse_row(const std::vector<std::string>& fields, const ColumnMap& m,
                     const ParamSchema& schema, std::size_t row) {
    Assignment a;
    a.numeric.reserve(m.numeric.size());
    a.categorical.reserve(m.categorical.size());
    a.extrinsic.reserve(m.extrinsic.size());
    for (std::size_t i = 0; i < m.numeric.size(); ++i) {
        a.numeric.push_back(parse_field(fields[m.numeric[i]], row, schema.numeric()[i].name));
    }
    for (std::size_t g = 0; g < m.categorical.size(); ++g) {
        a.categorical.push_back(fields[m.categorical[g]]);
    }
    for (std::size_t j = 0; j < m.extrinsic.size(); ++j) {
        a.extrinsic.push_back(parse_field(fields[m.extrinsic[j]], row, schema.extrinsic()[j].name));
    }
    return a;
}

Assignment assignment_from_json(const nlohmann::json& obj, const ParamSchema& schema,
                                std::size_t row, const std::vector<std::string>& extra_keys) {
    if (!obj.is_object()) {
        throw data_error("record " + std::to_string(row) + ": expected an object");
    }
    std::unordered_set<std::string> known(extra_keys.begin(), extra_keys.end());
    auto get = [&](const std::string& name) -> const nlohmann::json& {
        auto it = obj.find(name);
        if (it == obj.end()) {
            throw data_error("record " + std::to_string(row) + ": missing value for '" + name + "'");
        }
        known.insert(name);
        return *it;
    };
    auto number = [&](const std::string& name) {
        const auto& v = get(name);
        if (!v.is_number()) {
            throw data_error("record " + std::to_string(row) + ", field '" + name +
                             "': expected a number");
        }
        return v.get<double>();
    };
    Assignment a;
    for (const auto& p : schema.numeric()) {
        a.numeric.push_back(number(p.name));
    }
    for (const auto& g : schema.categorical()) {
        const auto& v = get(g.name);
        if (!v.is_string()) {
            throw data_error("record " + std::to_string(row) + ", field '" + g.name +
                             "': expected a string level");
        }
        a.categorical.push_back(v.get<std::string>());
    }
    for (const auto& p : schema.extrinsic()) {
        a.extrinsic.push_back(number(p.name));
    }
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!known.count(it.key())) {
            throw data_error("record " + std::to_string(row) + ": unknown key '" + it.key() + "'");
        }
    }
    return a;
}

void append_assignment_json(nlohmann::ordered_json& obj, const ParamSchema& schema,
                            const Assignment& a) {
    for (std::size_t i = 0; i < schema.numeric().size(); ++i) {
        obj[schema.numeric()[i].name] = a.numeric[i];
    }
    for (std::size_t g = 0; g < schema.categorical().size(); ++g) {
        obj[schema.categorical()[g].name] = a.categorical[g];
    }
    for (std::size_t j = 0; j < schema.extrinsic().size(); ++j) {
        obj[schema.extrinsic()[j].name] = a.extrinsic[j];
    }
}

void append_assignment_csv(std::string& out, const Assignment& a) {
    bool first = true;
    auto sep = [&] {
        if (!first) out.push_back(',');
        first = false;
    };
    for (double v : a.numeric) {
        sep();
        out += detail::format_double(v);
    }
    for (const auto& level : a.categorical) {
        sep();
        out += level;
    }
    for (double v : a.extrinsic) {
        sep();
        out += detail::format_double(v);
    }
}

double median_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) {
        return values[n / 2];
    }
    return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

nlohmann::json parse_json_file(const std::string& path) {
    try {
        return nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw data_error("malformed JSON in " + path + ": " + e.what());
    }
}

} // namespace

ParamSchema::ParamSchema(std::vector<NumericParam> numeric,
                         std::vector<CategoricalParam> categorical,
                         std::vector<NumericParam> extrinsic)
    : numeric_(std::move(numeric)), categorical_(std::move(categorical)),
      extrinsic_(std::move(extrinsic)) {
    std::unordered_set<std::string> names;
    auto claim = [&](const std::string& name) {
        check_identifier(name, "parameter name");
        if (name == kTimeColumn || name == kRepsKey || name == kTrialIdKey) {
            throw data_error("parameter name '" + name + "' is reserved");
        }
        if (!names.insert(name).second) {
            throw data_error("duplicate parameter name '" + name + "'");
        }
    };
    for (const auto& p : numeric_) {
        claim(p.name);
        check_domain(p, "intrinsic numeric");
    }
    for (const auto& g : categorical_) {
        claim(g.name);
        if (g.levels.size() < 2) {
            throw data_error("categorical parameter '" + g.name + "' needs at least 2 levels");
        }
        std::unordered_set<std::string> seen;
        for (const auto& level : g.levels) {
            check_identifier(level, "level of '" + g.name + "'");
            if (!seen.insert(level).second) {
                throw data_error("categorical parameter '" + g.name + "' has duplicate level '" +
                                 level + "'");
            }
        }
    }
    for (const auto& p : extrinsic_) {
        claim(p.name);
        check_domain(p, "extrinsic");
    }
}

std::size_t ParamSchema::level_index(std::size_t group_index, const std::string& level) const {
    const auto& g = categorical_.at(group_index);
    auto it = std::find(g.levels.begin(), g.levels.end(), level);
    if (it == g.levels.end()) {
        throw data_error("unknown level '" + level + "' for parameter '" + g.name + "'");
    }
    return static_cast<std::size_t>(it - g.levels.begin());
}

std::size_t ParamSchema::total_levels() const {
    std::size_t n = 0;
    for (const auto& g : categorical_) {
        n += g.levels.size();
    }
    return n;
}

bool ParamSchema::operator==(const ParamSchema& other) const {
    auto eq_numeric = [](const std::vector<NumericParam>& a, const std::vector<NumericParam>& b) {
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i].name != b[i].name || a[i].domain != b[i].domain) return false;
        }
        return true;
    };
    if (!eq_numeric(numeric_, other.numeric_) || !eq_numeric(extrinsic_, other.extrinsic_)) {
        return false;
    }
    if (categorical_.size() != other.categorical_.size()) return false;
    for (std::size_t g = 0; g < categorical_.size(); ++g) {
        if (categorical_[g].name != other.categorical_[g].name ||
            categorical_[g].levels != other.categorical_[g].levels) {
            return false;
        }
    }
    return true;
}

ParamSchema ParamSchema::from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw data_error("schema: expected a JSON object");
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() != "intrinsic_numeric" && it.key() != "intrinsic_categorical" &&
            it.key() != "extrinsic") {
            throw data_error("schema: unknown key '" + it.key() + "'");
        }
    }
    auto numeric_group = [&](const char* key) {
        std::vector<NumericParam> out;
        if (!j.contains(key)) return out;
        for (const auto& e : j.at(key)) {
            if (!e.is_object() || !e.contains("name") || !e.contains("domain")) {
                throw data_error(std::string("schema: entries under '") + key +
                                 "' need 'name' and 'domain'");
            }
            NumericParam p;
            p.name = e.at("name").get<std::string>();
            for (const auto& v : e.at("domain")) {
                if (!v.is_number()) {
                    throw data_error("schema: domain of '" + p.name + "' must hold numbers");
                }
                p.domain.push_back(v.get<double>());
            }
            out.push_back(std::move(p));
        }
        return out;
    };
    std::vector<CategoricalParam> categorical;
    if (j.contains("intrinsic_categorical")) {
        for (const auto& e : j.at("intrinsic_categorical")) {
            if (!e.is_object() || !e.contains("name") || !e.contains("levels")) {
                throw data_error("schema: entries under 'intrinsic_categorical' need 'name' and 'levels'");
            }
            CategoricalParam g;
            g.name = e.at("name").get<std::string>();
            for (const auto& v : e.at("levels")) {
                if (!v.is_string()) {
                    throw data_error("schema: levels of '" + g.name + "' must be strings");
                }
                g.levels.push_back(v.get<std::string>());
            }
            categorical.push_back(std::move(g));
        }
    }
    return ParamSchema(numeric_group("intrinsic_numeric"), std::move(categorical),
                       numeric_group("extrinsic"));
}

ParamSchema ParamSchema::load(const std::string& path) {
    return from_json(parse_json_file(path));
}

nlohmann::ordered_json ParamSchema::to_json() const {
    nlohmann::ordered_json j;
    j["intrinsic_numeric"] = nlohmann::ordered_json::array();
    for (const auto& p : numeric_) {
        j["intrinsic_numeric"].push_back({{"name", p.name}, {"domain", p.domain}});
    }
    j["intrinsic_categorical"] = nlohmann::ordered_json::array();
    for (const auto& g : categorical_) {
        j["intrinsic_categorical"].push_back({{"name", g.name}, {"levels", g.levels}});
    }
    j["extrinsic"] = nlohmann::ordered_json::array();
    for (const auto& p : extrinsic_) {
        j["extrinsic"].push_back({{"name", p.name}, {"domain", p.domain}});
    }
    return j;
}

void ParamSchema::save(const std::string& path) const {
    write_file(path, to_json().dump(2) + "\n");
}

void validate_assignment(const ParamSchema& schema, const Assignment& a, const std::string& label) {
    if (a.numeric.size() != schema.numeric().size() ||
        a.categorical.size() != schema.categorical().size() ||
        a.extrinsic.size() != schema.extrinsic().size()) {
        throw data_error(label + ": value count does not match schema");
    }
    for (std::size_t i = 0; i < a.numeric.size(); ++i) {
        if (!std::isfinite(a.numeric[i]) || a.numeric[i] <= 0.0) {
            throw data_error(label + ", field '" + schema.numeric()[i].name +
                             "': value must be positive and finite, got " +
                             detail::format_double(a.numeric[i]));
        }
    }
    for (std::size_t g = 0; g < a.categorical.size(); ++g) {
        const auto& levels = schema.categorical()[g].levels;
        if (std::find(levels.begin(), levels.end(), a.categorical[g]) == levels.end()) {
            throw data_error(label + ", field '" + schema.categorical()[g].name +
                             "': unknown level '" + a.categorical[g] + "'");
        }
    }
    for (std::size_t j = 0; j < a.extrinsic.size(); ++j) {
        if (!std::isfinite(a.extrinsic[j]) || a.extrinsic[j] <= 0.0) {
            throw data_error(label + ", field '" + schema.extrinsic()[j].name +
                             "': value must be positive and finite, got " +
                             detail::format_double(a.extrinsic[j]));
        }
    }
}

Dataset::Dataset(ParamSchema schema, std::vector<TrialRecord> records)
    : schema_(std::move(schema)), records_(std::move(records)) {
    for (std::size_t k = 0; k < records_.size(); ++k) {
        const std::string label = "record " + std::to_string(k + 1);
        validate_assignment(schema_, records_[k].values, label);
        if (!std::isfinite(records_[k].time_ms) || records_[k].time_ms <= 0.0) {
            throw data_error(label + ", field '" + std::string(kTimeColumn) +
                             "': measured time must be positive, got " +
                             detail::format_double(records_[k].time_ms));
        }
    }
}

Dataset load_dataset(const std::string& path, FileFormat format, const ParamSchema& schema) {
    std::vector<TrialRecord> records;
    if (format == FileFormat::csv) {
        auto lines = read_lines(path);
        if (lines.empty()) {
            throw data_error("empty CSV file: " + path);
        }
        auto header = split_csv(lines[0]);
        ColumnMap m = map_header(header, schema, /*expect_time=*/true);
        for (std::size_t r = 1; r < lines.size(); ++r) {
            auto fields = split_csv(lines[r]);
            if (fields.size() != header.size()) {
                throw data_error("record " + std::to_string(r) + ": expected " +
                                 std::to_string(header.size()) + " fields, got " +
                                 std::to_string(fields.size()));
            }
            TrialRecord rec;
            rec.values = parse_row(fields, m, schema, r);
            rec.time_ms = parse_field(fields[m.time], r, kTimeColumn);
            records.push_back(std::move(rec));
        }
    } else {
        auto j = parse_json_file(path);
        if (!j.is_array()) {
            throw data_error(path + ": expected a JSON array of records");
        }
        std::size_t r = 0;
        for (const auto& obj : j) {
            ++r;
            TrialRecord rec;
            rec.values = assignment_from_json(obj, schema, r, {kTimeColumn});
            auto it = obj.find(kTimeColumn);
            if (it == obj.end() || !it->is_number()) {
                throw data_error("record " + std::to_string(r) + ": missing numeric '" +
                                 kTimeColumn + "'");
            }
            rec.time_ms = it->get<double>();
            records.push_back(std::move(rec));
        }
    }
    return Dataset(schema, std::move(records));
}

void save_dataset(const Dataset& dataset, const std::string& path, FileFormat format) {
    const ParamSchema& schema = dataset.schema();
    if (format == FileFormat::csv) {
        std::string out;
        auto cols = schema_columns(schema);
        for (const auto& c : cols) {
            out += c;
            out.push_back(',');
        }
        out += kTimeColumn;
        out.push_back('\n');
        for (const auto& rec : dataset.records()) {
            append_assignment_csv(out, rec.values);
            out.push_back(',');
            out += detail::format_double(rec.time_ms);
            out.push_back('\n');
        }
        write_file(path, out);
    } else {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& rec : dataset.records()) {
            nlohmann::ordered_json obj;
            append_assignment_json(obj, schema, rec.values);
            obj[kTimeColumn] = rec.time_ms;
            arr.push_back(std::move(obj));
        }
        write_file(path, arr.dump(2) + "\n");
    }
}

std::vector<Assignment> load_assignments(const std::string& path, const ParamSchema& schema) {
    auto lines = read_lines(path);
    if (lines.empty()) {
        throw data_error("empty CSV file: " + path);
    }
    auto header = split_csv(lines[0]);
    ColumnMap m = map_header(header, schema, /*expect_time=*/false);
    std::vector<Assignment> out;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        auto fields = split_csv(lines[r]);
        if (fields.size() != header.size()) {
            throw data_error("record " + std::to_string(r) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        }
        Assignment a = parse_row(fields, m, schema, r);
        validate_assignment(schema, a, "record " + std::to_string(r));
        out.push_back(std::move(a));
    }
    return out;
}

void save_assignments(const ParamSchema& schema, std::span<const Assignment> assignments,
                      const std::string& path) {
    std::string out;
    auto cols = schema_columns(schema);
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (i) out.push_back(',');
        out += cols[i];
    }
    out.push_back('\n');
    for (const auto& a : assignments) {
        append_assignment_csv(out, a);
        out.push_back('\n');
    }
    write_file(path, out);
}

std::vector<RawTrialGroup> load_raw_groups(const std::string& path, const ParamSchema& schema) {
    auto j = parse_json_file(path);
    if (!j.is_array()) {
        throw data_error(path + ": expected a JSON array of trial groups");
    }
    std::vector<RawTrialGroup> out;
    std::size_t r = 0;
    for (const auto& obj : j) {
        ++r;
        RawTrialGroup g;
        g.values = assignment_from_json(obj, schema, r, {kTrialIdKey, kRepsKey});
        validate_assignment(schema, g.values, "record " + std::to_string(r));
        auto id = obj.find(kTrialIdKey);
        if (id == obj.end() || !id->is_string()) {
            throw data_error("record " + std::to_string(r) + ": missing string '" + kTrialIdKey + "'");
        }
        g.trial_id = id->get<std::string>();
        auto reps = obj.find(kRepsKey);
        if (reps == obj.end() || !reps->is_array()) {
            throw data_error("record " + std::to_string(r) + ": missing array '" + kRepsKey + "'");
        }
        for (const auto& v : *reps) {
            if (!v.is_number()) {
                throw data_error("record " + std::to_string(r) + ", field '" + kRepsKey +
                                 "': expected numbers");
            }
            g.repetitions_ms.push_back(v.get<double>());
        }
        out.push_back(std::move(g));
    }
    return out;
}

void save_raw_groups(const ParamSchema& schema, std::span<const RawTrialGroup> groups,
                     const std::string& path) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& g : groups) {
        nlohmann::ordered_json obj;
        obj[kTrialIdKey] = g.trial_id;
        append_assignment_json(obj, schema, g.values);
        obj[kRepsKey] = g.repetitions_ms;
        arr.push_back(std::move(obj));
    }
    write_file(path, arr.dump(2) + "\n");
}

Dataset aggregate_repetitions(const ParamSchema& schema, std::span<const RawTrialGroup> groups) {
    std::vector<TrialRecord> records;
    records.reserve(groups.size());
    for (std::size_t k = 0; k < groups.size(); ++k) {
        if (groups[k].repetitions_ms.empty()) {
            throw data_error("trial group " + std::to_string(k + 1) + " ('" + groups[k].trial_id +
                             "') has no repetitions");
        }
        TrialRecord rec;
        rec.values = groups[k].values;
        rec.time_ms = median_of(groups[k].repetitions_ms);
        records.push_back(std::move(rec));
    }
    return Dataset(schema, std::move(records));
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction,
                                  std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument("train_fraction must lie in (0, 1)");
    }
    const std::size_t n = dataset.size();
    if (n == 0) {
        throw std::invalid_argument("cannot split an empty dataset");
    }
    const auto n_train = static_cast<std::size_t>(
        std::llround(static_cast<double>(n) * train_fraction));

    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    rng::Engine eng(seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(rng::pick(eng, i + 1));
        std::swap(idx[i], idx[j]);
    }

    std::vector<TrialRecord> train, test;
    train.reserve(n_train);
    test.reserve(n - std::min(n, n_train));
    for (std::size_t i = 0; i < n; ++i) {
        (i < n_train ? train : test).push_back(dataset.records()[idx[i]]);
    }
    return {Dataset(dataset.schema(), std::move(train)), Dataset(dataset.schema(), std::move(test))};
}

} // namespace perfmodel
