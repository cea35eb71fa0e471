#include "leadmetric/caps.hpp"
#include "leadmetric/errors.hpp"
#include "leadmetric/lab.hpp"
#include "leadmetric/metrics.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

using namespace leadmetric;
namespace fs = std::filesystem;

namespace {

const fs::path kData = LEADMETRIC_DATA_DIR;

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("leadmetric_lab_" + name);
    fs::remove_all(dir);
    return dir;
}

Action fixture(const std::string& name) { return load_action((kData / "actions" / name).string()); }

// Exact value of a plain decimal string such as "0.25" or "1.5e-3".
Rational decimal_value(const std::string& text) {
    const auto e = text.find_first_of("eE");
    std::string mantissa = text.substr(0, e);
    long exponent = e == std::string::npos ? 0 : std::stol(text.substr(e + 1));
    const auto dot = mantissa.find('.');
    if (dot != std::string::npos) {
        exponent -= static_cast<long>(mantissa.size() - dot - 1);
        mantissa.erase(dot, 1);
    }
    Rational v{mpz_class(mantissa, 10)};
    const Rational ten = 10;
    for (; exponent > 0; --exponent) v *= ten;
    for (; exponent < 0; ++exponent) v /= ten;
    return v;
}

}  // namespace

TEST(Lab, MetricOnIdenticalActionsIsZeroToTail) {
    const Action t = fixture("rotation_z8.json");
    const auto out = run_task("metric", {t, t}, {});
    ASSERT_EQ(out.exit_code, kExitPass) << out.message;
    const auto d = decode_interval(JsonReader(out.report["d"], "d"));
    const auto w = decode_interval(JsonReader(out.report["w"], "w"));
    EXPECT_EQ(d.lower, 0);
    EXPECT_EQ(w.upper, 0);
    EXPECT_EQ(d.upper, weak_d(t, t, default_family(t), Truncation{8, 4}).upper);
}

TEST(Lab, EpsilonAssertionDrivesTheExitCode) {
    const Action t = fixture("rotation_z8.json");
    const Action s = fixture("rotation_z8_step3.json");
    TaskParams p;
    p.epsilon = ratio(1, 1000);
    EXPECT_EQ(run_task("metric", {t, s}, p).exit_code, kExitFailed);
    p.epsilon = ratio(1, 100);
    EXPECT_EQ(run_task("metric", {t, s}, p).exit_code, kExitPass);
}

TEST(Lab, ProfileCsvHeaderAndRendering) {
    TaskParams p;
    p.radius = 5;
    p.truncate_family = 4;
    const auto out = run_task("profile", {fixture("bernoulli_third.json")}, p);
    ASSERT_EQ(out.exit_code, kExitPass) << out.message;
    ASSERT_EQ(out.text_files.size(), 1u);
    std::istringstream csv(out.text_files[0].second);
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "radius,value");
    const Json& rows = out.report["rows"];
    std::size_t i = 0;
    while (std::getline(csv, line)) {
        ASSERT_LT(i, rows.size());
        const auto comma = line.find(',');
        EXPECT_EQ(std::stoull(line.substr(0, comma)), rows[i]["radius"].get<std::uint64_t>());
        const Rational exact = parse_rational(rows[i]["value"].get<std::string>());
        const Rational diff = decimal_value(line.substr(comma + 1)) - exact;
        EXPECT_LE(abs(diff), ratio(1, 1'000'000'000'000)) << line;
        ++i;
    }
    EXPECT_EQ(i, rows.size());
    EXPECT_TRUE(out.report["csv"]["lossy"].get<bool>());
}

TEST(Lab, FingerprintWorkedExample) {
    TaskParams p;
    p.epsilon = ratio(1, 4);
    const auto out = run_task("fingerprint", {fixture("bernoulli_half.json")}, p);
    ASSERT_EQ(out.exit_code, kExitPass) << out.message;
    EXPECT_EQ(out.report["n"], 0);
    EXPECT_EQ(out.report["cells"], Json::array({"4"}));
}

TEST(Lab, TowerOnZ10LeavesOneTenth) {
    TaskParams p;
    p.sides = {3};
    p.epsilon = ratio(1, 5);
    const auto out = run_task("tower", {fixture("rotation_z10.json")}, p);
    ASSERT_EQ(out.exit_code, kExitPass) << out.message;
    EXPECT_EQ(out.report["tower"]["remainder_mass"], "1/10");
}

TEST(Lab, UsageErrorsExitTwo) {
    EXPECT_EQ(run_task("nonsense", {}, {}).exit_code, kExitUsage);
    EXPECT_EQ(run_task("tower", {fixture("rotation_z10.json")}, {}).exit_code, kExitUsage);
    EXPECT_EQ(run_task("metric", {fixture("rotation_z10.json")}, {}).exit_code, kExitUsage);
}

TEST(Lab, ResourceCapExitsThreeWithNote) {
    const Caps saved = caps();
    Caps tight = saved;
    tight.max_ball_radius = 2;
    set_caps(tight);
    TaskParams p;
    p.epsilon = ratio(1, 2);
    p.radius = 10;
    const auto out = run_task("tile", {fixture("rotation_z64.json")}, p);
    set_caps(saved);
    EXPECT_EQ(out.exit_code, kExitResource) << out.message;
    EXPECT_EQ(out.report["status"], "resource-limit");
    EXPECT_NE(out.report["note"].get<std::string>().find("partial"), std::string::npos);
}

TEST(Lab, CertifyThenReplayTampered) {
    TaskParams p;
    p.desk = true;
    const auto cert = run_task("certify", {}, p);
    ASSERT_EQ(cert.exit_code, kExitPass) << cert.message;
    ASSERT_EQ(cert.json_files.size(), 1u);
    const fs::path dir = scratch("replay");
    write_outputs(dir.string(), cert);

    TaskParams r;
    r.certificate = (dir / "certificate.json").string();
    const auto good = run_task("replay", {}, r);
    EXPECT_EQ(good.exit_code, kExitPass) << good.message;

    Json doc = cert.json_files[0].second;
    doc["pack"]["construction"]["selection"]["elements"][3] = Json::array({"-7"});
    write_file_atomic((dir / "tampered.json").string(), dump(doc));
    r.certificate = (dir / "tampered.json").string();
    const auto bad = run_task("replay", {}, r);
    EXPECT_EQ(bad.exit_code, kExitFailed);
    EXPECT_NE(bad.message.find("first failing inequality [selection]"), std::string::npos) << bad.message;
    EXPECT_EQ(bad.report["first_failure"]["stage"], "selection");
}

TEST(Lab, FixtureActionsRoundTripBitExact) {
    for (const auto& entry : fs::directory_iterator(kData / "actions")) {
        const std::string text = read_text_file(entry.path().string());
        const Json doc = parse_json(text, entry.path().string());
        EXPECT_EQ(dump(encode(decode_action(JsonReader(doc, "")))), dump(doc)) << entry.path();
        EXPECT_EQ(dump(doc), text) << entry.path() << " is not stored canonically";
    }
}

TEST(Lab, ScenarioRunsAreByteIdentical) {
    for (const char* name : {"metric_rotations", "profile_bernoulli", "tile_torus"}) {
        Scenario s = parse_scenario((kData / "scenarios" / (std::string(name) + ".json")).string());
        std::vector<std::string> reports;
        for (const char* run : {"a", "b"}) {
            s.out_dir = scratch(std::string(name) + "_" + run).string();
            const RunRecord rec = run_scenario(s);
            EXPECT_EQ(rec.exit_status, kExitPass) << name;
            std::string all;
            for (const auto& file : rec.outputs) all += read_text_file((fs::path(s.out_dir) / file).string());
            all += read_text_file((fs::path(s.out_dir) / "run.json").string());
            reports.push_back(all);
        }
        EXPECT_EQ(reports[0], reports[1]) << name;
    }
}

TEST(Lab, ScenarioValidation) {
    const fs::path dir = scratch("scenario");
    fs::create_directories(dir);
    auto write = [&](const Json& j) {
        const auto path = (dir / "s.json").string();
        write_file_atomic(path, dump(j));
        return path;
    };
    const std::string action = (kData / "actions" / "rotation_z8.json").string();
    Json base{{"format", "leadmetric-scenario/1"}, {"name", "x"},  {"group", "Z"}, {"task", "metric"},
              {"actions", Json::array({{{"file", action}}})},     {"parameters", Json::object()},
              {"outputs", "out"}};
    const Scenario ok = parse_scenario(write(base));
    EXPECT_EQ(ok.out_dir, (dir / "out").string());
    EXPECT_EQ(ok.actions.size(), 1u);

    Json bad = base;
    bad["task"] = "plot";
    EXPECT_THROW(parse_scenario(write(bad)), ParseError);
    bad = base;
    bad["group"] = "Z^2";
    EXPECT_THROW(parse_scenario(write(bad)), ParseError);
    bad = base;
    bad["parameters"]["epsilon"] = "2/4";
    EXPECT_THROW(parse_scenario(write(bad)), ParseError);
    bad = base;
    bad["actions"][0]["file"] = "missing.json";
    EXPECT_THROW(parse_scenario(write(bad)), Error);
}

TEST(Lab, HashIsStable) {
    EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
    EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}
