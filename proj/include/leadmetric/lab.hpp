#pragma once

#include "leadmetric/io.hpp"

#include <optional>
#include <string>
#include <vector>

namespace leadmetric {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kExitPass = 0, kExitFailed = 1, kExitUsage = 2, kExitResource = 3 };

/// Task-specific knobs shared by the CLI verbs and scenario files.
struct TaskParams {
    std::optional<Rational> epsilon;
    std::optional<Rational> delta;
    std::optional<std::uint64_t> radius;
    std::optional<std::size_t> truncate_family;
    std::optional<std::uint64_t> truncate_ball;
    std::vector<std::uint64_t> sides;
    std::vector<PointSet> s_sets;         // certify: S's sets aligned with T's family
    std::optional<std::string> certificate;  // replay: certificate path
    bool desk = false;                    // certify: built-in desk instance
};

/// Files a task produces, keyed by file name; JSON values are dumped in
/// canonical form, `text` files verbatim.
struct TaskOutput {
    int exit_code = kExitPass;
    std::string message;
    Json report;
    std::vector<std::pair<std::string, Json>> json_files;
    std::vector<std::pair<std::string, std::string>> text_files;
};

const std::vector<std::string>& task_names();

/// Runs one task. Errors never escape: parse and domain errors give exit 2,
/// resource caps exit 3 with a partial-results note in the report.
TaskOutput run_task(const std::string& task, const std::vector<Action>& actions, const TaskParams& params);

/// Writes report.json and every produced file into `dir` atomically.
std::vector<std::string> write_outputs(const std::string& dir, const TaskOutput& out);

/// CSV with header "radius,value"; values are 17-digit decimal renderings.
std::string profile_csv(const std::vector<std::pair<std::uint64_t, Rational>>& rows);

/// Scenario file:
///   {"format": "leadmetric-scenario/1", "name", "group", "task",
///    "actions": [action document | {"file": path}], "parameters": {...},
///    "outputs": directory}
/// Relative file references resolve against the scenario's directory.
struct Scenario {
    std::string name;
    std::string group;
    std::string task;
    std::vector<Action> actions;
    TaskParams params;
    std::string out_dir;
    std::string canonical;  // canonical dump of the scenario document
};

Scenario parse_scenario(const std::string& path);

struct RunRecord {
    std::string scenario_hash;  // FNV-1a 64 of the canonical scenario text
    std::string tool_version;
    std::vector<std::string> outputs;
    int exit_status = 0;
    std::string started;
    std::string finished;
};

/// Runs the scenario, writes its outputs plus run.json (deterministic) and
/// run_times.json (timestamps).
RunRecord run_scenario(const Scenario& s);

std::string fnv1a_hex(const std::string& text);

}  // namespace leadmetric
