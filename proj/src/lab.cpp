#include "leadmetric/lab.hpp"

#include "leadmetric/caps.hpp"
#include "leadmetric/constructions.hpp"
#include "leadmetric/errors.hpp"
#include "leadmetric/metrics.hpp"
#include "leadmetric/proximity.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <functional>
#include <map>

namespace leadmetric {

namespace {

const std::vector<std::string> kTasks = {"metric", "profile",     "tower",   "tile",  "special",
                                         "certify", "fingerprint", "density", "replay"};

void need_actions(const std::vector<Action>& actions, std::size_t n, const std::string& task) {
    if (actions.size() < n) {
        throw DomainError(task + " needs " + std::to_string(n) + " action(s), got " + std::to_string(actions.size()));
    }
}

const Rational& need(const std::optional<Rational>& v, const char* flag) {
    if (!v) throw DomainError(std::string("missing --") + flag);
    return *v;
}

std::vector<std::size_t> first_indices(std::size_t m) {
    std::vector<std::size_t> q;
    for (std::size_t i = 1; i <= m; ++i) q.push_back(i);
    return q;
}

Json encode_points(const PointSet& s) {
    Json pts = Json::array();
    for (auto p : s.points()) pts.push_back(p);
    return pts;
}

std::vector<std::uint64_t> sides_or_ones(const TaskParams& p, const GroupModel& model) {
    if (!p.sides.empty()) {
        if (p.sides.size() != model.coordinates()) {
            throw DomainError("--sides needs " + std::to_string(model.coordinates()) + " values");
        }
        return p.sides;
    }
    return std::vector<std::uint64_t>(model.coordinates(), 1);
}

Json encode_conditions(const RefineConditions& c) {
    return Json{{"disjoint_union", c.disjoint_union}, {"invariant", c.invariant}, {"large", c.large}, {"failure", c.failure}};
}

Json encode_tower_check(const TowerCheck& c) {
    return Json{{"levels_match", c.levels_match},
                {"disjoint", c.disjoint},
                {"equal_mass", c.equal_mass},
                {"remainder_complement", c.remainder_complement},
                {"small_remainder", c.small_remainder},
                {"failure", c.failure}};
}

Json encode_tower(const RokhlinTower& t) {
    return Json{{"base", encode_points(t.base)},
                {"levels", t.levels.size()},
                {"remainder", encode_points(t.remainder)},
                {"remainder_mass", encode(t.remainder_mass())},
                {"epsilon", encode(t.epsilon)},
                {"reached", t.reached}};
}

TaskOutput task_metric(const std::vector<Action>& actions, const TaskParams& p) {
    need_actions(actions, 2, "metric");
    const Action& t = actions[0];
    const Action& s = actions[1];
    const std::size_t prefix = p.truncate_family.value_or(8);
    const GeneratingFamily family = default_family(t, std::max<std::size_t>(prefix, 8));
    const Truncation trunc{prefix, p.truncate_ball.value_or(4)};
    TaskOutput out;
    Json report{{"task", "metric"}, {"family_prefix", prefix}};
    const MetricInterval w = lead_w(t, s, family, prefix, p.radius);
    report["w"] = encode(w);
    if (same_space(t, s)) {
        const MetricInterval d = weak_d(t, s, family, trunc);
        report["d"] = encode(d);
        report["m"] = encode(d + w);
    } else {
        report["d"] = nullptr;
        report["note"] = "d and m need one measure space; only w is reported";
    }
    if (p.epsilon) {
        const bool ok = w.upper < *p.epsilon;
        report["assertion"] = {{"name", "w upper < epsilon"}, {"lhs", encode(w.upper)}, {"rhs", encode(*p.epsilon)},
                               {"holds", ok}};
        if (!ok) out.exit_code = kExitFailed;
    }
    out.report = report;
    return out;
}

TaskOutput task_profile(const std::vector<Action>& actions, const TaskParams& p) {
    need_actions(actions, 1, "profile");
    const Action& t = actions[0];
    const std::size_t prefix = p.truncate_family.value_or(2);
    const GeneratingFamily family = default_family(t, std::max<std::size_t>(prefix, 8));
    const MixingProfile prof = mixing_profile(t, family, prefix, p.radius.value_or(8));
    Json rows = Json::array();
    for (const auto& [r, v] : prof.rows) rows.push_back({{"radius", r}, {"value", encode(v)}});
    TaskOutput out;
    out.report = Json{{"task", "profile"},
                      {"family_prefix", prefix},
                      {"rows", rows},
                      {"mixing_certified", prof.mixing_certified},
                      {"zero_beyond", prof.zero_beyond ? Json(*prof.zero_beyond) : Json(nullptr)},
                      {"csv", {{"file", "profile.csv"}, {"lossy", true}}}};
    out.text_files.emplace_back("profile.csv", profile_csv(prof.rows));
    return out;
}

TaskOutput task_tower(const std::vector<Action>& actions, const TaskParams& p) {
    need_actions(actions, 1, "tower");
    const Action& q = actions[0];
    const Tile shape = box_tile(q.model(), sides_or_ones(p, q.model()));
    const RokhlinTower tower = build_tower(q, shape.shape, need(p.epsilon, "epsilon"));
    const TowerCheck check = check_tower(q, tower);
    TaskOutput out;
    out.report = Json{{"task", "tower"}, {"tile", encode(shape.shape)}, {"tower", encode_tower(tower)},
                      {"check", encode_tower_check(check)}, {"ok", check.ok()}};
    if (!check.ok()) out.exit_code = kExitFailed;
    return out;
}

TaskOutput task_tile(const std::vector<Action>& actions, const TaskParams& p) {
    need_actions(actions, 1, "tile");
    const Action& q = actions[0];
    const Tile f = box_tile(q.model(), sides_or_ones(p, q.model()));
    const FiniteSubset c = q.model().ball(p.radius.value_or(1));
    const RefinedTower res = refine_with_tower(q, f, c, need(p.epsilon, "epsilon"));
    TaskOutput out;
    out.report = Json{{"task", "tile"},
                      {"F", encode(f.shape)},
                      {"C", encode(c)},
                      {"G", encode(res.refined.set)},
                      {"centers", encode(res.refined.centers)},
                      {"conditions", encode_conditions(res.conditions)},
                      {"tower", encode_tower(res.tower)},
                      {"tower_check", encode_tower_check(res.tower_check)},
                      {"ok", res.ok()}};
    if (!res.ok()) out.exit_code = kExitFailed;
    return out;
}

TaskOutput task_special(const std::vector<Action>& actions, const TaskParams& p) {
    need_actions(actions, 2, "special");
    const Action& s = actions[0];
    const Action& q = actions[1];
    const Rational& eps = need(p.epsilon, "epsilon");
    const Tile f = box_tile(s.model(), sides_or_ones(p, s.model()));
    std::vector<PointSet> r = p.s_sets;
    if (r.empty()) {
        for (const auto& a : family_prefix(default_family(s), p.truncate_family.value_or(1))) {
            r.push_back(std::get<PointSet>(a));
        }
    }
    const std::vector<MeasurableSet> r_sets(r.begin(), r.end());
    const SelectionOptions opts{100'000, p.radius.value_or(32)};
    ElementSelection sel = select_elements(s, f.shape, r_sets, eps, 0, opts);
    const RefinedTower l4 = refine_with_tower(q, f, s.model().ball(sel.c_radius), eps);
    sel = select_elements(s, f.shape, r_sets, eps, l4.refined.centers.size(), opts);
    TaskOutput out;
    Json report{{"task", "special"},
                {"selection_complete", sel.complete},
                {"c_radius", sel.c_radius},
                {"G", encode(l4.refined.set)},
                {"centers", encode(l4.refined.centers)},
                {"refined_tower_ok", l4.ok()}};
    Json elements = Json::array();
    for (const auto& g : sel.elements) elements.push_back(encode(g));
    report["elements"] = elements;
    bool ok = sel.complete && l4.ok();
    if (ok) {
        const SpecialActionParams params{s, q, r, f.shape, l4.refined.centers, sel.elements, l4.tower, std::nullopt};
        const SpecialAction sp = build_special_action(params);
        const bool relations = verify_action(sp.z).ok();
        report["relations_ok"] = relations;
        report["z_ground_size"] = sp.z.permutation().ground_size();
        Json r_z = Json::array();
        for (const auto& a : sp.r_z) r_z.push_back(encode(a));
        report["r_z"] = r_z;
        out.json_files.emplace_back("z_action.json", encode(sp.z));
        ok = ok && relations;
    }
    report["ok"] = ok;
    out.report = report;
    if (!ok) out.exit_code = kExitFailed;
    return out;
}

TaskOutput task_certify(const std::vector<Action>& actions, const TaskParams& p) {
    ProximityConfig cfg;
    if (p.radius) cfg.s_mixing_radius = *p.radius;
    ProximityCertificate cert = [&] {
        if (p.desk) return certify_proximity(desk_inputs(p.delta.value_or(ratio(9, 10))), cfg);
        need_actions(actions, 3, "certify");
        if (p.s_sets.empty()) throw DomainError("certify needs S's sets (--s-sets)");
        const ProximityInputs in{actions[0], default_family(actions[0], p.truncate_family.value_or(8)), actions[1],
                                p.s_sets, actions[2], need(p.delta, "delta")};
        return certify_proximity(in, cfg);
    }();
    TaskOutput out;
    const Json doc = encode(cert);
    out.report = Json{{"task", "certify"}, {"summary", doc["summary"]}, {"certificate", "certificate.json"}};
    out.json_files.emplace_back("certificate.json", doc);
    if (!cert.passed()) {
        out.exit_code = kExitFailed;
        out.message = "failed stage " + cert.failed_stage();
    }
    return out;
}

TaskOutput task_fingerprint(const std::vector<Action>& actions, const TaskParams& p) {
    need_actions(actions, 1, "fingerprint");
    const Action& t = actions[0];
    const Rational& eps = need(p.epsilon, "epsilon");
    const std::size_t m = p.truncate_family.value_or(1);
    const GeneratingFamily family = default_family(t, std::max<std::size_t>(m, 8));
    const auto q = first_indices(m);
    const Fingerprint fp = fingerprint(t, family, q, eps);
    Json marginals = Json::array();
    for (const auto& v : fp.marginals) marginals.push_back(encode(v));
    Json cells = Json::array();
    for (const auto& c : fp.cells) cells.push_back(encode_integer(c));
    Json elements = Json::array();
    for (const auto& g : fp.elements) elements.push_back(encode(g));
    TaskOutput out;
    Json report{{"task", "fingerprint"}, {"epsilon", encode(eps)}, {"q", q}, {"n", fp.n},
                {"marginals", marginals}, {"elements", elements}, {"cells", cells}};
    if (actions.size() >= 2) {
        const FingerprintComparison cmp = fingerprint_close(t, actions[1], family, q, eps);
        report["comparison"] = {{"equal", cmp.equal}, {"sup", encode(cmp.sup)}, {"holds", cmp.holds()}};
        if (!cmp.holds()) out.exit_code = kExitFailed;
    }
    out.report = report;
    return out;
}

TaskOutput task_density(const std::vector<Action>& actions, const TaskParams& p) {
    need_actions(actions, 1, "density");
    const DensityReport rep = density_demo(actions, first_indices(p.truncate_family.value_or(2)), need(p.epsilon, "epsilon"));
    Json entries = Json::array();
    for (const auto& e : rep.entries) {
        entries.push_back({{"index", e.index},
                           {"cardinalities_match", e.cardinalities_match},
                           {"distance", encode(e.distance)},
                           {"within", e.within}});
    }
    TaskOutput out;
    out.report = Json{{"task", "density"}, {"product_size", rep.product_size}, {"epsilon", encode(rep.epsilon)},
                      {"entries", entries}, {"ok", rep.ok()}};
    if (!rep.ok()) out.exit_code = kExitFailed;
    return out;
}

TaskOutput task_replay(const std::vector<Action>&, const TaskParams& p) {
    if (!p.certificate) throw DomainError("replay needs a certificate path");
    const ReplayResult res = replay(read_json_file(*p.certificate));
    TaskOutput out;
    out.report = Json{{"task", "replay"},
                      {"verdict", res.verdict},
                      {"stored_verdict", res.stored_verdict},
                      {"checked", res.checked},
                      {"first_failure", res.first_failure ? encode(*res.first_failure) : Json(nullptr)},
                      {"mismatch", res.mismatch}};
    if (!res.verdict) {
        out.exit_code = kExitFailed;
        if (res.first_failure) {
            const auto& f = *res.first_failure;
            out.message = "first failing inequality [" + f.stage + "] " + f.name + ": " + to_string(f.lhs) + " " +
                          f.relation + " " + to_string(f.rhs) + (f.note.empty() ? "" : " (" + f.note + ")");
        } else {
            out.message = res.mismatch.empty() ? "stored verdict is a failure" : res.mismatch;
        }
    }
    return out;
}

std::string timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

const std::vector<std::string>& task_names() { return kTasks; }

TaskOutput run_task(const std::string& task, const std::vector<Action>& actions, const TaskParams& params) {
    static const std::map<std::string, std::function<TaskOutput(const std::vector<Action>&, const TaskParams&)>> table = {
        {"metric", task_metric},   {"profile", task_profile},         {"tower", task_tower},
        {"tile", task_tile},       {"special", task_special},         {"certify", task_certify},
        {"fingerprint", task_fingerprint}, {"density", task_density}, {"replay", task_replay}};
    TaskOutput out;
    const auto it = table.find(task);
    try {
        if (it == table.end()) throw DomainError("unknown task \"" + task + "\"");
        out = it->second(actions, params);
    } catch (const ResourceLimit& e) {
        out = TaskOutput{};
        out.exit_code = kExitResource;
        out.message = std::string("resource cap exceeded: ") + e.what();
        out.report = Json{{"task", task}, {"status", "resource-limit"}, {"error", e.what()},
                          {"note", "partial results only; raise the caps via LEADMETRIC_CAPS"}};
        return out;
    } catch (const Error& e) {
        out = TaskOutput{};
        out.exit_code = kExitUsage;
        out.message = e.what();
        out.report = Json{{"task", task}, {"status", "error"}, {"error", e.what()}};
        return out;
    }
    out.report["status"] = out.exit_code == kExitPass ? "pass" : "fail";
    return out;
}

std::vector<std::string> write_outputs(const std::string& dir, const TaskOutput& out) {
    namespace fs = std::filesystem;
    std::vector<std::string> written;
    auto put = [&](const std::string& name, const std::string& text) {
        write_file_atomic((fs::path(dir) / name).string(), text);
        written.push_back(name);
    };
    put("report.json", dump(out.report));
    for (const auto& [name, j] : out.json_files) put(name, dump(j));
    for (const auto& [name, text] : out.text_files) put(name, text);
    return written;
}

std::string profile_csv(const std::vector<std::pair<std::uint64_t, Rational>>& rows) {
    std::string csv = "radius,value\n";
    for (const auto& [r, v] : rows) csv += std::to_string(r) + "," + to_decimal(v) + "\n";
    return csv;
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Scenario parse_scenario(const std::string& path) {
    namespace fs = std::filesystem;
    const Json doc = read_json_file(path);
    const fs::path base = fs::path(path).parent_path();
    auto resolve = [&](const std::string& ref) {
        const fs::path p(ref);
        return (p.is_absolute() || base.empty() ? p : base / p).string();
    };
    Scenario s;
    try {
        const JsonReader r(doc, "");
        r.only_keys({"format", "name", "group", "task", "actions", "parameters", "outputs"});
        if (r.field("format").string() != "leadmetric-scenario/1") r.field("format").fail("unsupported format");
        s.name = r.field("name").string();
        s.group = r.field("group").string();
        s.task = r.field("task").string();
        if (std::find(kTasks.begin(), kTasks.end(), s.task) == kTasks.end()) r.field("task").fail("unknown task");
        const GroupModel model = GroupModel::parse(s.group);
        const auto acts = r.field("actions");
        for (std::size_t i = 0; i < acts.size(); ++i) {
            const auto a = acts.at(i);
            if (a.has("file")) {
                a.only_keys({"file"});
                s.actions.push_back(load_action(resolve(a.field("file").string())));
            } else {
                s.actions.push_back(decode_action(a));
            }
            if (s.actions.back().model() != model) a.fail("action group differs from the scenario group " + s.group);
        }
        const auto p = r.field("parameters");
        p.only_keys({"epsilon", "delta", "radius", "truncate_family", "truncate_ball", "sides", "s_sets", "certificate",
                     "desk"});
        if (p.has("epsilon")) s.params.epsilon = p.field("epsilon").rational();
        if (p.has("delta")) s.params.delta = p.field("delta").rational();
        if (p.has("radius")) s.params.radius = p.field("radius").uint();
        if (p.has("truncate_family")) s.params.truncate_family = p.field("truncate_family").uint();
        if (p.has("truncate_ball")) s.params.truncate_ball = p.field("truncate_ball").uint();
        if (p.has("sides")) {
            const auto sides = p.field("sides");
            for (std::size_t i = 0; i < sides.size(); ++i) s.params.sides.push_back(sides.at(i).uint());
        }
        if (p.has("s_sets")) {
            const auto sets = p.field("s_sets");
            for (std::size_t i = 0; i < sets.size(); ++i) {
                sets.at(i).only_keys({"ground", "points"});
                s.params.s_sets.push_back(decode_pointset(sets.at(i)));
            }
        }
        if (p.has("certificate")) s.params.certificate = resolve(p.field("certificate").string());
        if (p.has("desk")) s.params.desk = p.field("desk").boolean();
        s.out_dir = resolve(r.field("outputs").string());
    } catch (const ParseError& e) {
        throw ParseError(path, e.what());
    }
    s.canonical = dump(doc);
    return s;
}

RunRecord run_scenario(const Scenario& s) {
    namespace fs = std::filesystem;
    RunRecord rec;
    rec.scenario_hash = fnv1a_hex(s.canonical);
    rec.tool_version = kToolVersion;
    rec.started = timestamp();
    const TaskOutput out = run_task(s.task, s.actions, s.params);
    rec.outputs = write_outputs(s.out_dir, out);
    rec.exit_status = out.exit_code;
    rec.finished = timestamp();
    const Json run{{"scenario", s.name},       {"scenario_hash", rec.scenario_hash}, {"tool_version", rec.tool_version},
                   {"outputs", rec.outputs},   {"exit_status", rec.exit_status},     {"message", out.message},
                   {"times", "run_times.json"}};
    write_file_atomic((fs::path(s.out_dir) / "run.json").string(), dump(run));
    write_file_atomic((fs::path(s.out_dir) / "run_times.json").string(),
                      dump(Json{{"started", rec.started}, {"finished", rec.finished}}));
    return rec;
}

}  // namespace leadmetric
