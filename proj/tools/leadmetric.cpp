#include "leadmetric/errors.hpp"
#include "leadmetric/lab.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace leadmetric;

namespace {

struct VerbFlags {
    std::string group;
    std::vector<std::string> actions;
    std::string out;
    std::string epsilon, delta;
    std::optional<std::uint64_t> radius;
    std::optional<std::size_t> truncate_family;
    std::optional<std::uint64_t> truncate_ball;
    std::vector<std::uint64_t> sides;
    std::string s_sets;
    std::string certificate;
    bool desk = false;
};

TaskParams to_params(const VerbFlags& f) {
    TaskParams p;
    if (!f.epsilon.empty()) p.epsilon = parse_rational(f.epsilon, true);
    if (!f.delta.empty()) p.delta = parse_rational(f.delta, true);
    p.radius = f.radius;
    p.truncate_family = f.truncate_family;
    p.truncate_ball = f.truncate_ball;
    p.sides = f.sides;
    if (!f.s_sets.empty()) {
        const Json doc = read_json_file(f.s_sets);
        const JsonReader r(doc, f.s_sets);
        for (std::size_t i = 0; i < r.size(); ++i) p.s_sets.push_back(decode_pointset(r.at(i)));
    }
    if (!f.certificate.empty()) p.certificate = f.certificate;
    p.desk = f.desk;
    return p;
}

int run_verb(const std::string& verb, const VerbFlags& f) {
    TaskOutput out;
    try {
        std::vector<Action> actions;
        std::optional<GroupModel> model;
        if (!f.group.empty()) model = GroupModel::parse(f.group);
        for (const auto& path : f.actions) {
            actions.push_back(load_action(path));
            if (model && actions.back().model() != *model) {
                throw ParseError(path, "action group differs from --group " + f.group);
            }
        }
        out = run_task(verb, actions, to_params(f));
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    if (!f.out.empty()) {
        try {
            write_outputs(f.out, out);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitUsage;
        }
    } else {
        std::cout << dump(out.report);
    }
    if (!out.message.empty()) std::cerr << out.message << "\n";
    return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact metrics, towers and certificates for measure-preserving group actions"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    VerbFlags flags;
    const std::map<std::string, std::string> verbs = {
        {"metric", "Weak metric d, correlation sup w and m = d + w for two actions"},
        {"profile", "Mixing profile rows (radius, value) as JSON and CSV"},
        {"tower", "Greedy Rokhlin tower over a box tile"},
        {"tile", "Refined tile and tower with the four invariance conditions"},
        {"special", "Special action Z built from S and Q"},
        {"certify", "Search and check the full conjugacy-proximity certificate"},
        {"fingerprint", "Countable parameter pack of a Bernoulli action"},
        {"density", "Conjugates of a product approximating each factor"},
        {"replay", "Re-verify a certificate without re-running searches"},
    };
    for (const auto& [name, help] : verbs) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--group", flags.group, "Group descriptor, e.g. Z, Z^2, H3");
        sub->add_option("--action", flags.actions, "Action file (repeatable)")->check(CLI::ExistingFile);
        sub->add_option("--out", flags.out, "Output directory");
        sub->add_option("--epsilon", flags.epsilon, "Tolerance as p/q");
        sub->add_option("--delta", flags.delta, "Target bound as p/q");
        sub->add_option("--radius", flags.radius, "Ball radius or declared horizon");
        sub->add_option("--truncate-family", flags.truncate_family, "Family prefix M");
        sub->add_option("--truncate-ball", flags.truncate_ball, "Ball truncation R");
        sub->add_option("--sides", flags.sides, "Box tile side per coordinate");
        sub->add_option("--s-sets", flags.s_sets, "JSON array of point sets of S")->check(CLI::ExistingFile);
        sub->add_option("--certificate", flags.certificate, "Certificate file")->check(CLI::ExistingFile);
        sub->add_flag("--desk", flags.desk, "Use the built-in desk instance");
        sub->callback([&flags, name = name] { throw CLI::RuntimeError(run_verb(name, flags)); });
    }
    std::string scenario;
    std::string scenario_out;
    auto* run = app.add_subcommand("run", "Run a scenario file");
    run->add_option("scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", scenario_out, "Override the scenario's output directory");
    run->callback([&scenario, &scenario_out] {
        try {
            Scenario s = parse_scenario(scenario);
            if (!scenario_out.empty()) s.out_dir = scenario_out;
            const RunRecord rec = run_scenario(s);
            std::cout << "scenario " << rec.scenario_hash << " exit " << rec.exit_status << "\n";
            throw CLI::RuntimeError(rec.exit_status);
        } catch (const Error& e) {
            std::cerr << "error: " << e.what() << "\n";
            throw CLI::RuntimeError(kExitUsage);
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::RuntimeError& e) {
        return e.get_exit_code();
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }
    return 0;
}
