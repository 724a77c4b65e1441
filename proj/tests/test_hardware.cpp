#include <catch2/catch_amalgamated.hpp>

#include "automapper/errors.hpp"
#include "automapper/hardware.hpp"
#include "test_support.hpp"

using namespace automapper;
using namespace automapper::testing;

namespace {

nlohmann::json default_json() { return to_json(default_hardware()); }

void expect_schema(nlohmann::json j, const std::string& field) {
    try {
        parse_hardware(j);
        FAIL("expected SchemaError for " << field);
    } catch (const SchemaError& e) {
        INFO(e.what());
        CHECK(e.field().find(field) != std::string::npos);
    }
}

}  // namespace

TEST_CASE("default hardware is a 900-PE array at 16-bit reference width", "[hardware]") {
    const HardwareSpec hw = default_hardware();
    CHECK(hw.array.rows == 30);
    CHECK(hw.array.cols == 30);
    CHECK(hw.array.total_pes() == 900);
    CHECK(hw.ref_bits == 16);
    CHECK(hw.array.mac_energy == 1.0);
    CHECK(hw.level(Level::RF).energy_per_word == 1.0);
    CHECK(hw.array.noc_energy_per_word == 2.0);
    CHECK(hw.level(Level::GB).energy_per_word == 6.0);
    CHECK(hw.level(Level::DRAM).energy_per_word == 200.0);
    CHECK_FALSE(hw.level(Level::DRAM).capacity_bits.has_value());
    CHECK_NOTHROW(check_hardware(hw));
}

TEST_CASE("shipped hardware file matches the built-in default", "[hardware]") {
    CHECK(load_hardware(data_dir() / "default_hw.json") == default_hardware());
    const HardwareSpec small = load_hardware(data_dir() / "small_hw.json");
    CHECK(small.array.total_pes() == 16);
}

TEST_CASE("a single-PE machine with a tiny RF is valid", "[hardware]") {
    auto j = default_json();
    j["pe_array"]["rows"] = 1;
    j["pe_array"]["cols"] = 1;
    j["levels"][0]["capacity_bits"] = 48;
    const HardwareSpec hw = parse_hardware(j);
    CHECK(hw.array.total_pes() == 1);
    CHECK(hw.level(Level::RF).capacity_bits == 48);
}

TEST_CASE("hardware schema violations name the field", "[hardware][errors]") {
    {
        auto j = default_json();
        j["levels"][2]["capacity_bits"] = 1 << 30;
        expect_schema(j, "levels[2].capacity_bits");
    }
    {
        auto j = default_json();
        j["levels"][1]["energy_per_word"] = -1.0;
        expect_schema(j, "levels[1].energy_per_word");
    }
    {
        auto j = default_json();
        std::swap(j["levels"][0], j["levels"][1]);
        expect_schema(j, "levels[0].name");
    }
    {
        auto j = default_json();
        j["levels"].erase(2);
        expect_schema(j, "levels");
    }
    {
        auto j = default_json();
        j["levels"][0]["capacity_bits"] = nullptr;
        expect_schema(j, "levels[0].capacity_bits");
    }
    {
        auto j = default_json();
        j["levels"][0]["capacity_bits"] = 8;  // below ref_bits
        expect_schema(j, "levels[0].capacity_bits");
    }
    {
        auto j = default_json();
        j["pe_array"]["rows"] = 0;
        expect_schema(j, "pe_array.rows");
    }
    {
        auto j = default_json();
        j["ref_bits"] = 0;
        expect_schema(j, "ref_bits");
    }
    {
        auto j = default_json();
        j["levels"][1]["bandwidth_bits_per_cycle"] = 0;
        expect_schema(j, "bandwidth_bits_per_cycle");
    }
    {
        auto j = default_json();
        j["area"] = 3;
        expect_schema(j, "area");
    }
}

TEST_CASE("hardware JSON round-trips", "[hardware][property]") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::int64_t> axis(1, 64);
    std::uniform_int_distribution<std::int64_t> cap(16, 1 << 24);
    std::uniform_real_distribution<double> energy(0.0, 500.0);
    for (int trial = 0; trial < 50; ++trial) {
        HwParams p;
        p.rows = axis(rng);
        p.cols = axis(rng);
        p.rf_bits = cap(rng);
        p.gb_bits = cap(rng);
        if (trial % 2) p.dram_bw = axis(rng);
        HardwareSpec hw = make_hw(p);
        hw.levels[2].energy_per_word = energy(rng);
        hw.array.noc_energy_per_word = energy(rng);
        CHECK(parse_hardware(to_json(hw)) == hw);
    }
}
