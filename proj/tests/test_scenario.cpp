#include <doctest.h>

#include <fstream>

#include "ssim/error.hpp"
#include "ssim/scenario.hpp"

using namespace ssim;
using nlohmann::json;

#ifndef SSIM_SCENARIO_DIR
#define SSIM_SCENARIO_DIR "."
#endif

namespace {

std::string cruise_path() {
    return std::string(SSIM_SCENARIO_DIR) + "/cruise.json";
}

}  // namespace

TEST_CASE("bundled cruise scenario loads and validates") {
    Scenario s = Scenario::load(cruise_path());
    CHECK(s.duration_s == 129600.0);
    CHECK(s.vehicle.mass_kg == 178.0);
    CHECK(s.vehicle.inertia.wheels.size() == 4);
    CHECK(s.power.arrays.size() == 5);
    CHECK(s.power.battery.capacity_wh == 80.0);
    CHECK(s.comms.link.frequency_hz == 8.45e9);
    CHECK(s.comms.link.coding_gain_db == 7.3);
    CHECK(s.executive.events.soc_charge_threshold == 0.30);
    CHECK(s.target_body == "asteroid");

    // The transfer-mode initial state was resolved by the Lambert solve:
    // heliocentric orbital speed at 1.2 AU.
    CHECK(s.initial_nav.velocity_m_s.norm() > 2.5e4);
    CHECK(s.initial_nav.velocity_m_s.norm() < 3.0e4);
}

TEST_CASE("overrides apply after parse and before validation") {
    Scenario base = Scenario::load(cruise_path());
    Scenario tuned = Scenario::load(
        cruise_path(), {"executive.soc_charge_threshold=0.5", "seed=7"});
    CHECK(base.executive.events.soc_charge_threshold == 0.30);
    CHECK(tuned.executive.events.soc_charge_threshold == 0.5);
    CHECK(tuned.seed == 7);

    // Array-indexed override.
    Scenario wheel = Scenario::load(cruise_path(),
                                    {"vehicle.wheels.0.max_torque_nm=0.05"});
    CHECK(wheel.vehicle.inertia.wheels[0].max_torque_nm == 0.05);

    // An invalid override value fails validation, not silently.
    CHECK_THROWS_AS(Scenario::load(cruise_path(), {"dt_s=-1"}), ConfigError);
}

TEST_CASE("unknown override keys get a nearest-key suggestion") {
    try {
        Scenario::load(cruise_path(), {"executive.soc_charge_treshold=0.5"});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        std::string msg = e.what();
        CHECK(msg.find("soc_charge_threshold") != std::string::npos);
        CHECK(msg.find("did you mean") != std::string::npos);
    }
}

TEST_CASE("load failures carry the offending path or key") {
    CHECK_THROWS_WITH_AS(Scenario::load("/nonexistent/file.json"),
                         doctest::Contains("/nonexistent/file.json"), ConfigError);

    // Invalid JSON.
    std::string bad = "/tmp/ssim_bad_scenario.json";
    std::ofstream(bad) << "{ not json";
    CHECK_THROWS_AS(Scenario::load(bad), ConfigError);

    // Missing required key.
    std::ofstream(bad) << "{\"duration_s\": 10}";
    CHECK_THROWS_WITH_AS(Scenario::load(bad), doctest::Contains("dt_s"),
                         ConfigError);
}

TEST_CASE("scenario validation rejects inconsistent timing") {
    Scenario s = Scenario::load(cruise_path());
    s.duration_s = 100.5;
    s.dt_s = 1.0;
    CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("multiple"), ConfigError);

    s = Scenario::load(cruise_path());
    s.duration_s = 0.0;  // zero-duration runs are allowed
    s.tcm.enabled = false;
    s.validate();
}

TEST_CASE("effective config round-trips") {
    Scenario s = Scenario::load(cruise_path());
    json echo = s.to_json();
    Scenario back = Scenario::from_json(echo);
    back.validate();
    CHECK(back.duration_s == s.duration_s);
    CHECK(back.seed == s.seed);
    CHECK(back.vehicle.inertia.wheels.size() == s.vehicle.inertia.wheels.size());
    CHECK(back.executive.recharge_complete_soc == s.executive.recharge_complete_soc);
    CHECK((back.initial_nav.position_m - s.initial_nav.position_m).norm() == 0.0);
    CHECK((back.initial_nav.velocity_m_s - s.initial_nav.velocity_m_s).norm() == 0.0);

    // The echo is the override keyspace: dotted keys cover nested paths.
    auto keys = dotted_keys(echo);
    auto has = [&](const char* k) {
        return std::find(keys.begin(), keys.end(), k) != keys.end();
    };
    CHECK(has("executive.soc_charge_threshold"));
    CHECK(has("vehicle.wheels.0.max_torque_nm"));
    CHECK(has("comms.link.gt_db_k"));
}
