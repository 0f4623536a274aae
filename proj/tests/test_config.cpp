#include <filesystem>
#include <fstream>
#include <functional>

#include <gtest/gtest.h>

#include "hmec/config.hpp"

using namespace hmec;
using Json = nlohmann::json;

namespace {

std::string error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST(Config, PresetsLoad) {
    for (const char* name : {"desk", "paper", "paper-matlab"}) {
        const auto c = config_from_json(preset_json(name));
        EXPECT_EQ(c.nodes.size(), 4u) << name;
        EXPECT_EQ(c.nodes[0].kind, NodeKind::GS);
        EXPECT_EQ(c.nodes[1].kind, NodeKind::GV);
        EXPECT_LE(c.scenario.road.distance_to(c.nodes[1].position), kRoadTolerance);
    }
    EXPECT_EQ(config_from_json(preset_json("paper")).experiment.ue_start, 50u);
    EXPECT_EQ(config_from_json(preset_json("paper-matlab")).net.learning_rate, 1.5);
    EXPECT_THROW(preset_json("huge"), ConfigError);
}

TEST(Config, DefaultsFillOptionalFields) {
    const auto c = config_from_json(preset_json("desk"));
    EXPECT_EQ(c.experiment.horizon, 200u);
    EXPECT_EQ(c.nodes[2].altitude_m, c.scenario.uav_altitude_m);
    EXPECT_EQ(c.nodes[2].coverage_radius_m, 25.0);
    EXPECT_EQ(c.experiment.schedulers.size(), 5u);
}

TEST(Config, MissingRequiredFieldIsNamed) {
    auto j = preset_json("desk");
    j["scenario"].erase("zone_height");
    EXPECT_NE(error_of([&] { config_from_json(j); }).find("scenario.zone_height"), std::string::npos);
    j = preset_json("desk");
    j["nodes"][1].erase("capacity_cps");
    EXPECT_NE(error_of([&] { config_from_json(j); }).find("nodes[1].capacity_cps"), std::string::npos);
    j = preset_json("desk");
    j.erase("scenario");
    EXPECT_NE(error_of([&] { config_from_json(j); }).find("scenario"), std::string::npos);
}

TEST(Config, UnknownFieldAndBadTypeRejected) {
    auto j = preset_json("desk");
    j["experiment"] = {{"horizn", 5}};
    EXPECT_NE(error_of([&] { config_from_json(j); }).find("experiment.horizn"), std::string::npos);
    j = preset_json("desk");
    j["experiment"] = {{"horizon", "ten"}};
    EXPECT_NE(error_of([&] { config_from_json(j); }).find("experiment.horizon"), std::string::npos);
    j = preset_json("desk");
    j["experiment"] = {{"schedulers", {"Greedy", "Magic"}}};
    EXPECT_NE(error_of([&] { config_from_json(j); }).find("Magic"), std::string::npos);
}

TEST(Config, ParseErrorReportsLineAndColumn) {
    const std::string text = "{\n  \"scenario\": {\n    \"zone_width\": 50,,\n  }\n}\n";
    const auto msg = error_of([&] { parse_config_text(text); });
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("column"), std::string::npos) << msg;
}

TEST(Config, RoundTripIsCanonical) {
    auto j = preset_json("desk");
    j["experiment"] = {{"seed", 9}, {"horizon", 30}, {"schedulers", {"Greedy", "Oracle"}}};
    j["dnn"] = {{"threshold_rule", "fixed"}, {"entropy_threshold", 0.4}};
    const auto c = config_from_json(j);
    const auto dumped = config_to_json(c);
    const auto back = config_from_json(dumped);
    EXPECT_EQ(config_to_json(back), dumped);
    EXPECT_EQ(config_hash(back), config_hash(c));
    EXPECT_EQ(back.experiment.schedulers.back(), SchedulerKind::Oracle);
    EXPECT_EQ(back.dnn.threshold_rule, ThresholdRule::Fixed);
}

TEST(Config, HashIsStableAndSensitive) {
    const auto a = config_from_json(preset_json("desk"));
    const auto b = config_from_json(preset_json("desk"));
    EXPECT_EQ(config_hash(a), config_hash(b));
    EXPECT_EQ(config_hash(a).size(), 16u);
    auto c = a;
    c.experiment.seed = 2;
    EXPECT_NE(config_hash(a), config_hash(c));
}

TEST(Config, LoadConfigMergesFileOverPreset) {
    const auto dir = std::filesystem::temp_directory_path() / "hmec_test_config";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "cfg.json").string();
    {
        std::ofstream os(path);
        os << R"({"experiment": {"horizon": 7}, "net": {"learning_rate": 0.2}})";
    }
    const auto c = load_config(path, "paper");
    EXPECT_EQ(c.experiment.horizon, 7u);
    EXPECT_EQ(c.experiment.ue_start, 50u);
    EXPECT_EQ(c.net.learning_rate, 0.2);
    EXPECT_THROW(load_config((dir / "missing.json").string()), ConfigError);
    std::filesystem::remove_all(dir);
}

TEST(Config, SchedulerNames) {
    EXPECT_EQ(detail::parse_scheduler("DNN-ARE"), SchedulerKind::DnnAre);
    EXPECT_EQ(detail::parse_scheduler("Local"), SchedulerKind::Local);
    EXPECT_STREQ(to_string(SchedulerKind::DrlAre), "DRL-ARE");
    EXPECT_THROW(detail::parse_scheduler("nope"), ConfigError);
}
