#include "leadmetric/io.hpp"

#include "leadmetric/caps.hpp"
#include "leadmetric/errors.hpp"

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace leadmetric {

namespace {

bool decimal_literal(const std::string& s) {
    std::size_t i = (!s.empty() && s[0] == '-') ? 1 : 0;
    if (i == s.size()) return false;
    for (std::size_t k = i; k < s.size(); ++k) {
        if (!std::isdigit(static_cast<unsigned char>(s[k]))) return false;
    }
    const std::string digits = s.substr(i);
    return !(digits.size() > 1 && digits[0] == '0') && s != "-0";
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

}  // namespace

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json parse_json(std::string_view text, const std::string& where) {
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        const auto [line, column] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
        std::string what = e.what();
        const auto cut = what.find("parse error");
        if (cut != std::string::npos) what = what.substr(cut);
        throw ParseError(where + ":" + std::to_string(line) + ":" + std::to_string(column), what);
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path, "cannot open file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

Json read_json_file(const std::string& path) { return parse_json(read_text_file(path), path); }

void write_file_atomic(const std::string& path, const std::string& text) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << text;
        out.flush();
        if (!out) throw Error("short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error("cannot rename " + tmp.string() + " to " + path + ": " + ec.message());
    }
}

void JsonReader::fail(const std::string& message) const { throw ParseError(path_.empty() ? "<root>" : path_, message); }

void JsonReader::expect(bool ok, const char* what) const {
    if (!ok) fail(std::string("expected ") + what + ", got " + j_.type_name());
}

JsonReader JsonReader::field(const std::string& key) const {
    expect(j_.is_object(), "object");
    const auto it = j_.find(key);
    const std::string sub = path_.empty() ? key : path_ + "." + key;
    if (it == j_.end()) throw ParseError(sub, "missing field");
    return JsonReader(*it, sub);
}

bool JsonReader::has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

JsonReader JsonReader::at(std::size_t i) const {
    expect(j_.is_array(), "array");
    return JsonReader(j_.at(i), path_ + "[" + std::to_string(i) + "]");
}

std::size_t JsonReader::size() const {
    expect(j_.is_array(), "array");
    return j_.size();
}

void JsonReader::only_keys(std::initializer_list<const char*> allowed) const {
    expect(j_.is_object(), "object");
    for (const auto& [key, _] : j_.items()) {
        bool known = false;
        for (const char* a : allowed) known = known || key == a;
        if (!known) throw ParseError(path_.empty() ? key : path_ + "." + key, "unknown field");
    }
}

std::string JsonReader::string() const {
    expect(j_.is_string(), "string");
    return j_.get<std::string>();
}

std::uint64_t JsonReader::uint() const {
    expect(j_.is_number_unsigned() || (j_.is_number_integer() && j_.get<std::int64_t>() >= 0), "nonnegative integer");
    return j_.get<std::uint64_t>();
}

bool JsonReader::boolean() const {
    expect(j_.is_boolean(), "boolean");
    return j_.get<bool>();
}

Rational JsonReader::rational() const {
    const std::string s = string();
    try {
        return parse_rational(s);
    } catch (const ParseError& e) {
        fail(e.what());
    }
}

Integer JsonReader::integer() const {
    const std::string s = string();
    if (!decimal_literal(s)) fail("malformed integer \"" + s + "\"");
    return Integer(s);
}

Json encode(const Rational& value) { return to_string(value); }

Json encode_integer(const Integer& value) { return value.str(); }

Json encode(const GroupElement& g) {
    Json out = Json::array();
    for (std::size_t i = 0; i < g.size(); ++i) out.push_back(encode_integer(g[i]));
    return out;
}

Json encode(const FiniteSubset& s) {
    Json out = Json::array();
    for (const auto& g : s) out.push_back(encode(g));
    return out;
}

Json encode(const PointSet& s) {
    Json pts = Json::array();
    for (auto p : s.points()) pts.push_back(p);
    return Json{{"ground", s.ground_size()}, {"points", pts}};
}

Json encode(const CylinderUnion& c) {
    Json support = Json::array();
    for (const auto& g : c.support()) support.push_back(encode(g));
    return Json{{"alphabet", c.alphabet()}, {"support", support}, {"patterns", c.patterns()}};
}

Json encode(const MeasurableSet& s) {
    if (const auto* p = std::get_if<PointSet>(&s)) {
        Json out = encode(*p);
        out["kind"] = "points";
        return out;
    }
    Json out = encode(std::get<CylinderUnion>(s));
    out["kind"] = "cylinders";
    return out;
}

Json encode(const GeneratingFamily& f) {
    Json sets = Json::array();
    for (const auto& s : f.sets) sets.push_back(encode(s));
    return Json{{"complete", f.complete}, {"sets", sets}};
}

Json encode(const MetricInterval& m) {
    return Json{{"lower", encode(m.lower)},
                {"upper", encode(m.upper)},
                {"truncation", {{"M", m.family_prefix}, {"R", m.radius}}},
                {"certified", m.certified}};
}

Json encode_permutation(const Permutation& p) { return Json(p); }

Json encode(const Action& t) {
    Json out{{"format", kActionFormat}, {"group", t.model().descriptor()}, {"backend", backend_name(t.backend())}};
    if (t.backend() == Backend::Permutation) {
        const auto& p = t.permutation();
        out["ground_size"] = p.ground_size();
        Json gens = Json::array();
        for (const auto& img : p.generator_images()) gens.push_back(encode_permutation(img));
        out["generators"] = gens;
    } else {
        Json weights = Json::array();
        for (const auto& w : t.bernoulli().weights()) weights.push_back(encode(w));
        out["weights"] = weights;
    }
    return out;
}

GroupElement decode_element(const GroupModel& model, const JsonReader& r) {
    if (r.size() != model.coordinates()) {
        r.fail(model.descriptor() + " elements have " + std::to_string(model.coordinates()) + " coordinates, got " +
               std::to_string(r.size()));
    }
    std::vector<Integer> coords;
    for (std::size_t i = 0; i < r.size(); ++i) coords.push_back(r.at(i).integer());
    return model.element(coords);
}

FiniteSubset decode_subset(const GroupModel& model, const JsonReader& r) {
    std::vector<GroupElement> out;
    for (std::size_t i = 0; i < r.size(); ++i) out.push_back(decode_element(model, r.at(i)));
    FiniteSubset s(out);
    if (s.size() != out.size()) r.fail("duplicate elements");
    return s;
}

PointSet decode_pointset(const JsonReader& r) {
    const auto ground = r.field("ground").uint();
    if (ground == 0 || ground > caps().max_ground_size) r.field("ground").fail("ground size out of range");
    const auto pts = r.field("points");
    std::vector<std::uint32_t> points;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto p = pts.at(i).uint();
        if (p >= ground) pts.at(i).fail("point " + std::to_string(p) + " outside the ground set");
        if (!points.empty() && p <= points.back()) pts.at(i).fail("points must be strictly increasing");
        points.push_back(static_cast<std::uint32_t>(p));
    }
    return PointSet::from_points(static_cast<std::uint32_t>(ground), points);
}

CylinderUnion decode_cylinder(const GroupModel& model, const JsonReader& r) {
    const auto alphabet = r.field("alphabet").uint();
    if (alphabet < 2 || alphabet > 1024) r.field("alphabet").fail("alphabet size out of range");
    const auto sup = r.field("support");
    std::vector<GroupElement> support;
    for (std::size_t i = 0; i < sup.size(); ++i) support.push_back(decode_element(model, sup.at(i)));
    const auto pats = r.field("patterns");
    std::vector<Pattern> patterns;
    for (std::size_t i = 0; i < pats.size(); ++i) {
        const auto row = pats.at(i);
        if (row.size() != support.size()) row.fail("pattern length differs from the support size");
        Pattern p;
        for (std::size_t k = 0; k < row.size(); ++k) {
            const auto sym = row.at(k).uint();
            if (sym >= alphabet) row.at(k).fail("symbol outside the alphabet");
            p.push_back(static_cast<std::uint32_t>(sym));
        }
        patterns.push_back(std::move(p));
    }
    try {
        return CylinderUnion::make(static_cast<std::uint32_t>(alphabet), support, patterns);
    } catch (const Error& e) {
        r.fail(e.what());
    }
}

MeasurableSet decode_set(const GroupModel& model, const JsonReader& r) {
    const std::string kind = r.field("kind").string();
    if (kind == "points") {
        r.only_keys({"kind", "ground", "points"});
        return decode_pointset(r);
    }
    if (kind == "cylinders") {
        r.only_keys({"kind", "alphabet", "support", "patterns"});
        return decode_cylinder(model, r);
    }
    r.field("kind").fail("unknown set kind \"" + kind + "\"");
}

GeneratingFamily decode_family(const GroupModel& model, const JsonReader& r) {
    r.only_keys({"complete", "sets"});
    GeneratingFamily f;
    f.complete = r.field("complete").boolean();
    const auto sets = r.field("sets");
    for (std::size_t i = 0; i < sets.size(); ++i) f.sets.push_back(decode_set(model, sets.at(i)));
    return f;
}

MetricInterval decode_interval(const JsonReader& r) {
    r.only_keys({"lower", "upper", "truncation", "certified"});
    MetricInterval m;
    m.lower = r.field("lower").rational();
    m.upper = r.field("upper").rational();
    const auto t = r.field("truncation");
    t.only_keys({"M", "R"});
    m.family_prefix = t.field("M").uint();
    m.radius = t.field("R").uint();
    m.certified = r.field("certified").boolean();
    if (m.upper < m.lower) r.fail("upper end below lower end");
    return m;
}

Permutation decode_permutation(const JsonReader& r) {
    Permutation p;
    p.reserve(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        const auto v = r.at(i).uint();
        if (v > UINT32_MAX) r.at(i).fail("image out of range");
        p.push_back(static_cast<std::uint32_t>(v));
    }
    return p;
}

Action decode_action(const JsonReader& r) {
    const std::string format = r.field("format").string();
    if (format != kActionFormat) r.field("format").fail("unsupported format \"" + format + "\"");
    GroupModel model = [&] {
        try {
            return GroupModel::parse(r.field("group").string());
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            r.field("group").fail(e.what());
        }
    }();
    const std::string backend = r.field("backend").string();
    if (backend == "permutation") {
        r.only_keys({"format", "group", "backend", "ground_size", "generators"});
        const auto n = r.field("ground_size").uint();
        if (n == 0 || n > caps().max_ground_size) r.field("ground_size").fail("ground size out of range");
        const auto gens = r.field("generators");
        std::vector<Permutation> images;
        for (std::size_t i = 0; i < gens.size(); ++i) {
            images.push_back(decode_permutation(gens.at(i)));
            if (images.back().size() != n) {
                gens.at(i).fail("image has " + std::to_string(images.back().size()) + " entries, expected " +
                                std::to_string(n));
            }
        }
        std::optional<Action> t;
        try {
            t.emplace(PermutationAction(model, static_cast<std::uint32_t>(n), std::move(images)));
        } catch (const ValidationError& e) {
            gens.fail(e.what());
        }
        for (const auto& c : verify_action(*t).checks) {
            if (!c.pass) gens.fail("relation " + c.relation + " fails (" + c.witness + ")");
        }
        return *t;
    }
    if (backend == "bernoulli") {
        r.only_keys({"format", "group", "backend", "weights"});
        const auto ws = r.field("weights");
        std::vector<Rational> weights;
        for (std::size_t i = 0; i < ws.size(); ++i) weights.push_back(ws.at(i).rational());
        try {
            return BernoulliAction(model, std::move(weights));
        } catch (const ValidationError& e) {
            ws.fail(e.what());
        }
    }
    r.field("backend").fail("unknown backend \"" + backend + "\"");
}

Action parse_action_text(std::string_view text, const std::string& where) {
    const Json j = parse_json(text, where);
    return decode_action(JsonReader(j, ""));
}

Action load_action(const std::string& path) {
    const Json j = read_json_file(path);
    try {
        return decode_action(JsonReader(j, ""));
    } catch (const ParseError& e) {
        throw ParseError(path, e.what());
    }
}

void save_action(const std::string& path, const Action& t) { write_file_atomic(path, dump(encode(t))); }

}  // namespace leadmetric
