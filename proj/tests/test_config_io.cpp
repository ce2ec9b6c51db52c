#include <doctest.h>

#include <cmath>

#include "cpk/config.hpp"
#include "cpk/constants.hpp"
#include "cpk/errors.hpp"
#include "cpk/io.hpp"
#include "cpk/tomography.hpp"

using namespace cpk;

TEST_CASE("empty config gives the defaults") {
    const auto c = parse_config("{}");
    CHECK(c.cavity.mirrors.t2 == doctest::Approx(90e-6).epsilon(1e-12));
    CHECK(c.cavity.mirrors.alpha_loss() == doctest::Approx(26e-6).epsilon(1e-12));
    CHECK(config_hash(c) == config_hash(default_config()));
    CHECK(c.drive.rabi_mhz == 14);
    CHECK(c.seed == 1);
}

TEST_CASE("validation names the key") {
    try {
        parse_config(R"({"cavity": {"t2_ppm": -5}})");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("cavity.t2_ppm") != std::string::npos);
    }
    try {
        parse_config(R"({"drive": {"rabbi_mhz": 3}})");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("drive.rabbi_mhz") != std::string::npos);
    }
    try {
        parse_config(R"({"analysis": {"bootstrap_m": "many"}})");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("analysis.bootstrap_m") != std::string::npos);
    }
}

TEST_CASE("parse errors carry line and column") {
    try {
        parse_config("{\n  \"cavity\": {\n    \"t2_ppm\": 90,,\n  }\n}");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(e.column() > 1);
    }
}

TEST_CASE("hash is stable across re-serialisation") {
    const auto c = parse_config(R"({"cavity": {"t2_ppm": 120.5}, "seed": 9})");
    const auto again = parse_config(to_json(c).dump(4));
    CHECK(config_hash(c) == config_hash(again));
    CHECK(config_hash(c) != config_hash(default_config()));
    CHECK(config_hash(c).size() == 16);
    // key order does not matter
    const auto a = parse_config(R"({"seed": 3, "drive": {"rabi_mhz": 20}})");
    const auto b = parse_config(R"({"drive": {"rabi_mhz": 20}, "seed": 3})");
    CHECK(config_hash(a) == config_hash(b));
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("dotted overrides") {
    const auto c = with_override(default_config(), "drive.rabi_mhz", 24.0);
    CHECK(c.drive.rabi_mhz == 24.0);
    CHECK_THROWS_AS(with_override(default_config(), "drive.nope", 1.0), ValidationError);
    CHECK_THROWS_AS(with_override(default_config(), "cavity.t2_ppm", -1.0), ValidationError);
}

TEST_CASE("number formatting round trips") {
    for (double v : {0.1, 1.0 / 3.0, 123456789.125, -2.5e-17, 0.0}) {
        const std::string s = format_number(v);
        CHECK(std::stod(s) == v);
    }
    CHECK(format_number(10) == "10");
    CHECK(format_number(0.5) == "0.5");
}

TEST_CASE("counts CSV round trip and validation") {
    const auto counts = expected_counts(target_state(0.4), 1000);
    CountTable rounded;
    for (int b = 0; b < 9; ++b)
        for (int o = 0; o < 4; ++o) rounded.counts[b][o] = std::round(counts.counts[b][o]);
    const auto text = counts_csv(rounded);
    const auto back = parse_counts_csv(text);
    CHECK(back.counts == rounded.counts);
    CHECK(text.rfind("photon_basis,ion_basis,outcome,counts\n", 0) == 0);

    std::string missing = text.substr(0, text.rfind("Y,Y"));
    CHECK_THROWS_AS(parse_counts_csv(missing), ValidationError);
    CHECK_THROWS_AS(parse_counts_csv(text + "Z,Z,++,1\n"), ValidationError);
    CHECK_THROWS_AS(parse_counts_csv("a,b,c\n"), ValidationError);
    std::string negative = text;
    negative.replace(negative.find("Z,Z,++,"), 7, "Z,Z,++,-");
    CHECK_THROWS_AS(parse_counts_csv(negative), ValidationError);
}

TEST_CASE("time-tag CSV round trip") {
    TimeTagSet s;
    s.attempts = 7;
    s.tags = {{0, 1.25, 0, "V"}, {3, 40.5, 1, "H"}, {3, 41.0, 1, ""}};
    const auto back = parse_timetags_csv(timetags_csv(s));
    CHECK(back.attempts == 7);
    REQUIRE(back.tags.size() == 3);
    CHECK(back.tags[1].t_us == 40.5);
    CHECK(back.tags[1].pol == "H");
    CHECK(back.tags[2].pol.empty());
    const auto inferred = parse_timetags_csv("attempt_index,t_us,detector,pol\n4,1.0,0,V\n");
    CHECK(inferred.attempts == 5);
    CHECK_THROWS_AS(parse_timetags_csv("attempt_index,t_us,detector,pol\nx,1,0,V\n"), ValidationError);
    CHECK_THROWS_AS(parse_timetags_csv("t,a\n"), ValidationError);
}

TEST_CASE("bounds report at the defaults") {
    const auto j = bounds_report(default_config());
    CHECK(j["p_bound"].get<double>() == doctest::Approx(0.728).epsilon(0.005 / 0.728));
    CHECK(j["p_esc"].get<double>() == doctest::Approx(0.776).epsilon(0.001 / 0.776));
    CHECK(j["cooperativity"].get<double>() == doctest::Approx(0.49).epsilon(0.01 / 0.49));
}

TEST_CASE("manifest lists outputs") {
    const auto m = manifest("bounds", default_config(), {"a.json"}, "t0", "t1");
    CHECK(m["command"] == "bounds");
    CHECK(m["outputs"].size() == 1);
    CHECK(m["config_hash"] == config_hash(default_config()));
}
