#pragma once

#include "leadmetric/actions.hpp"
#include "leadmetric/metrics.hpp"

#include <json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace leadmetric {

/// Object keys are kept sorted, so equal values always dump to equal text.
using Json = nlohmann::json;

inline constexpr const char* kActionFormat = "leadmetric-action/1";

/// Canonical text: two-space indentation, sorted keys, trailing newline.
std::string dump(const Json& j);

/// Parses JSON text; syntax errors report "where:line:column".
Json parse_json(std::string_view text, const std::string& where);
Json read_json_file(const std::string& path);
std::string read_text_file(const std::string& path);
/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& text);

/// Field access with path-qualified diagnostics ("generators[1]: ...").
class JsonReader {
public:
    JsonReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {}

    const Json& value() const { return j_; }
    const std::string& path() const { return path_; }
    JsonReader field(const std::string& key) const;
    bool has(const std::string& key) const;
    JsonReader at(std::size_t i) const;
    std::size_t size() const;
    /// Rejects keys outside `allowed`.
    void only_keys(std::initializer_list<const char*> allowed) const;

    std::string string() const;
    std::uint64_t uint() const;
    bool boolean() const;
    Rational rational() const;
    Integer integer() const;
    [[noreturn]] void fail(const std::string& message) const;

private:
    void expect(bool ok, const char* what) const;
    const Json& j_;
    std::string path_;
};

Json encode(const Rational& value);
Json encode_integer(const Integer& value);
Json encode(const GroupElement& g);
Json encode(const FiniteSubset& s);
Json encode(const PointSet& s);
Json encode(const CylinderUnion& c);
Json encode(const MeasurableSet& s);
Json encode(const GeneratingFamily& f);
Json encode(const MetricInterval& m);
Json encode_permutation(const Permutation& p);
Json encode(const Action& t);

GroupElement decode_element(const GroupModel& model, const JsonReader& r);
FiniteSubset decode_subset(const GroupModel& model, const JsonReader& r);
PointSet decode_pointset(const JsonReader& r);
CylinderUnion decode_cylinder(const GroupModel& model, const JsonReader& r);
MeasurableSet decode_set(const GroupModel& model, const JsonReader& r);
GeneratingFamily decode_family(const GroupModel& model, const JsonReader& r);
MetricInterval decode_interval(const JsonReader& r);
Permutation decode_permutation(const JsonReader& r);
/// Validation failures of the action itself (non-bijective images, weights
/// not summing to 1) are reported as ParseError at the offending field.
Action decode_action(const JsonReader& r);

Action parse_action_text(std::string_view text, const std::string& where = "<action>");
Action load_action(const std::string& path);
void save_action(const std::string& path, const Action& t);

}  // namespace leadmetric
