#include <doctest.h>

#include <filesystem>

#include "senc/config.hpp"
#include "senc/scenario.hpp"

using namespace senc;

namespace {

void check_same_geometry(const PlatformGeometry& a, const PlatformGeometry& b) {
    for (std::size_t i = 0; i < kLegCount; ++i) {
        CHECK(a.base_points[i] == b.base_points[i]);
        CHECK(a.helmet_points[i] == b.helmet_points[i]);
    }
    CHECK(a.workspace.translation_mm == b.workspace.translation_mm);
    CHECK(a.workspace.rotation_deg == b.workspace.rotation_deg);
}

const std::string kData = SENC_DATA_DIR;

}  // namespace

TEST_CASE("rig config round trip") {
    SUBCASE("geometry only") {
        RigConfig cfg;
        const RigConfig back = parse_rig_config(rig_config_to_json(cfg));
        check_same_geometry(back.geometry, cfg.geometry);
        CHECK_FALSE(back.has_encoders);
    }

    SUBCASE("with encoders") {
        RigConfig cfg;
        cfg.has_encoders = true;
        for (std::size_t i = 0; i < kLegCount; ++i) cfg.encoders[i].first_index_length_mm = 6.0 + 0.75 * i;
        cfg.encoders[2].counts_per_mm = 50.0;
        cfg.geometry.workspace = {12.0, 8.0};
        const std::string text = rig_config_to_json(cfg);
        const RigConfig back = parse_rig_config(text);
        REQUIRE(back.has_encoders);
        for (std::size_t i = 0; i < kLegCount; ++i) {
            CHECK(back.encoders[i].first_index_length_mm == cfg.encoders[i].first_index_length_mm);
            CHECK(back.encoders[i].counts_per_mm == cfg.encoders[i].counts_per_mm);
            CHECK(back.encoders[i].index_spacing_counts == 4000);
        }
        check_same_geometry(back.geometry, cfg.geometry);
        CHECK(rig_config_to_json(back) == text);
    }

    SUBCASE("file round trip") {
        const auto path = std::filesystem::temp_directory_path() / "senc_rig_test.json";
        RigConfig cfg;
        save_rig_config(path.string(), cfg);
        check_same_geometry(load_rig_config(path.string()).geometry, cfg.geometry);
        std::filesystem::remove(path);
        CHECK_THROWS_AS(load_rig_config(path.string()), ConfigError);
    }
}

TEST_CASE("shipped geometry file matches the built-in one") {
    const RigConfig cfg = load_rig_config(kData + "/default_geometry.json");
    check_same_geometry(cfg.geometry, PlatformGeometry::default_geometry());
    CHECK_FALSE(cfg.has_encoders);
}

TEST_CASE("malformed rig configs") {
    const std::string pts = "[[1,0,0],[0,1,0],[0,0,1],[1,1,0],[0,1,1],[1,0,1]]";
    CHECK_NOTHROW(parse_rig_config(R"({"base_points": )" + pts + R"(, "helmet_points": )" + pts + "}"));

    CHECK_THROWS_AS(parse_rig_config("not json"), ConfigError);
    CHECK_THROWS_AS(parse_rig_config("{}"), ConfigError);
    CHECK_THROWS_AS(parse_rig_config(R"({"base_points": [[1,2,3]], "helmet_points": )" + pts + "}"), ConfigError);
    CHECK_THROWS_AS(parse_rig_config(R"({"base_points": [[1,2],[0,1,0],[0,0,1],[1,1,0],[0,1,1],[1,0,1]],
                                          "helmet_points": )" + pts + "}"),
                    ConfigError);
    CHECK_THROWS_AS(parse_rig_config(R"({"base_points": )" + pts + R"(, "helmet_points": )" + pts +
                                     R"(, "workspace": {"translation_mm": -1, "rotation_deg": 10}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_rig_config(R"({"base_points": )" + pts + R"(, "helmet_points": )" + pts +
                                     R"(, "encoders": [{"first_index_length_mm": 8}]})"),
                    ConfigError);
    // three index pulses 66.7 mm apart cannot start at 150 mm on a 200 mm string
    const std::string enc = R"({"first_index_length_mm": 150})";
    std::string six = "[" + enc;
    for (int i = 1; i < 6; ++i) six += "," + enc;
    six += "]";
    CHECK_THROWS_AS(parse_rig_config(R"({"base_points": )" + pts + R"(, "helmet_points": )" + pts +
                                     R"(, "encoders": )" + six + "}"),
                    ConfigError);
}

TEST_CASE("shipped scenarios load") {
    for (const char* file : {"ideal", "tcp_error", "calibration", "noisy", "static", "stream"}) {
        CAPTURE(file);
        const Scenario sc = load_scenario(kData + "/scenarios/" + file + ".json");
        CHECK(sc.name != "unnamed");
        check_same_geometry(sc.rig.geometry, PlatformGeometry::default_geometry());
        CHECK_FALSE(sc.motion.commands.empty());
    }
    CHECK_THROWS_AS(load_scenario(kData + "/scenarios/missing.json"), ConfigError);
    CHECK_THROWS_AS(parse_scenario(R"({"motion": "nowhere.json"})"), ConfigError);
    CHECK_THROWS_AS(parse_scenario(R"({"seed": "seven"})"), ConfigError);
}
