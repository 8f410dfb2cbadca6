#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "vlsim/scenario.hpp"

using namespace vlsim;
using fixtures::flow;

namespace fs = std::filesystem;

namespace {

// Independent received-power oracle for the default channel.
double rxDbm(double txDbm, Position a, Position b)
{
    const double d = std::max(std::hypot(a.x - b.x, a.y - b.y), 35.0);
    return txDbm - (128.1 + 37.6 * std::log10(d / 1000.0));
}

std::vector<Trajectory> tenVehicles()
{
    std::vector<Trajectory> out;
    for (int i = 0; i < 10; ++i) {
        const double x0 = 40.0 + 97.0 * i;
        const double x1 = i % 2 ? x0 - 300.0 : x0 + 300.0;
        out.push_back(fixtures::straightRun("veh" + std::to_string(i), 0.5 * i, 0.5 * i + 4.0, x0, x1, 20.0 + i,
                                            0.5));
    }
    return out;
}

ScenarioConfig tenVehicleConfig()
{
    ScenarioConfig cfg = fixtures::twoCells(10.0);
    cfg.handover.enabled = true;
    cfg.flows = {flow(Direction::DL, "ALL", 2000, 5, 0, 10), flow(Direction::UL, "ALL", 800, 10, 0, 10)};
    return cfg;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("vlsim_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void checkConservation(const MetricsReport& r)
{
    for (const auto& v : r.vehicles) {
        INFO(v.name);
        CHECK(fixtures::unaccounted(v) == 0);
    }
}

} // namespace

TEST_CASE("a run without vehicles still ticks every TTI")
{
    Scenario s(fixtures::twoCells(0.5), {});
    const MetricsReport r = s.run();
    CHECK(r.ttis == 500);
    CHECK(r.events == 501);
    CHECK(r.vehicles.empty());
    REQUIRE(r.cells.size() == 2);
    for (const auto& c : r.cells) {
        CHECK(c.rbCapacity == 500 * 50);
        CHECK(c.rbAllocated[0] == 0);
        CHECK(c.rbAllocated[1] == 0);
    }
    CHECK(r.eventLog.back() == "0.500000 END");
}

TEST_CASE("ten vehicles on two cells")
{
    const auto trajs = tenVehicles();
    Scenario s(tenVehicleConfig(), trajs);
    const MetricsReport r = s.run();

    REQUIRE(r.vehicles.size() == 10);
    checkConservation(r);
    for (std::size_t i = 0; i < trajs.size(); ++i) {
        const auto& v = r.vehicles[i];
        CHECK(v.name == trajs[i].vehicle());
        CHECK(v.enter == trajs[i].enterTime());
        REQUIRE(v.leave);
        CHECK(*v.leave == trajs[i].leaveTime());
        const Position p = trajs[i].samples().front().position;
        const NodeId expected = rxDbm(46, {0, 0}, p) >= rxDbm(46, {1000, 0}, p) ? 1 : 2;
        CHECK(v.firstCell == expected);
        CHECK(v.bitsDelivered > 0);
        CHECK(v.cellTimeline.size() == static_cast<std::size_t>(v.handovers) + 1);
    }
    CHECK(r.traffic.generated == r.traffic.enqueued + r.traffic.unattached + r.traffic.lostInCore);
    CHECK(r.cells[0].rbAllocated[0] > 0);
    CHECK(r.cells[1].rbAllocated[1] > 0);
}

TEST_CASE("same seed reproduces, a different seed with shadowing does not")
{
    auto cfg = tenVehicleConfig();
    cfg.channel.shadowingEnabled = true;
    const auto a = Scenario(cfg, tenVehicles()).run();
    const auto b = Scenario(cfg, tenVehicles()).run();
    CHECK(vehiclesCsv(a) == vehiclesCsv(b));
    CHECK(cellsCsv(a) == cellsCsv(b));
    CHECK(a.eventLog == b.eventLog);

    cfg.seed = 2;
    const auto c = Scenario(cfg, tenVehicles()).run();
    CHECK(vehiclesCsv(a) + cellsCsv(a) != vehiclesCsv(c) + cellsCsv(c));
    checkConservation(c);
}

TEST_CASE("packets still in the core when the vehicle leaves are lost")
{
    ScenarioConfig cfg = fixtures::twoCells(0.2);
    cfg.backhaul.oneWayDelay = SimTime::fromMillis(10);
    cfg.flows = {flow(Direction::DL, "car0", 1000, 5, 0, 0.2)};
    Scenario s(cfg, {fixtures::parked("car0", 0, 0.105, {100, 0})});
    const MetricsReport r = s.run();

    const auto& v = r.vehicles.at(0);
    CHECK(v.bitsOffered == 21 * 1000);   // created at 0, 5, ..., 100 ms
    CHECK(v.bitsDelivered == 19 * 1000); // reached the cell by 100 ms
    CHECK(v.bitsLostCore == 2 * 1000);   // due at 105 and 110 ms
    CHECK(v.bitsResidual == 0);
    CHECK(r.traffic.lostInCore == 2);
    CHECK(r.traffic.unattached == 19);
    // created at t, at the cell at t + 10 ms, done one TTI later
    CHECK(v.meanLatencyMs() == doctest::Approx(11.0));
    CHECK(v.latencyMaxMs == doctest::Approx(11.0));
    checkConservation(r);
}

TEST_CASE("uplink latency includes the backhaul")
{
    ScenarioConfig cfg = fixtures::twoCells(0.1);
    cfg.backhaul.oneWayDelay = SimTime::fromMillis(4);
    cfg.flows = {flow(Direction::UL, "car0", 500, 2, 0, 0.1)};
    const MetricsReport r = Scenario(cfg, {fixtures::parked("car0", 0, 1, {50, 0})}).run();
    const auto& v = r.vehicles.at(0);
    CHECK(v.bitsDelivered == 50 * 500);
    CHECK(v.meanLatencyMs() == doctest::Approx(5.0));
    CHECK(!v.leave);
    checkConservation(r);
}

TEST_CASE("leaving clears queued data into the residual")
{
    ScenarioConfig cfg = fixtures::twoCells(0.1);
    cfg.fixedCqi = 1;
    // far larger than 50 RBs can carry, so it never leaves the queue
    cfg.flows = {flow(Direction::UL, "car0", 100000, 1, 0, 0.001), flow(Direction::DL, "car0", 1000, 1, 0, 0.001)};
    const MetricsReport r = Scenario(cfg, {fixtures::parked("car0", 0, 0.05, {100, 0})}).run();
    const auto& v = r.vehicles.at(0);
    CHECK(v.bitsOffered == 101000);
    CHECK(v.bitsDelivered == 1000);
    CHECK(v.bitsResidual == 100000);
    checkConservation(r);
}

TEST_CASE("a handover drops the downlink queue")
{
    ScenarioConfig cfg = fixtures::twoCells(20);
    cfg.handover = {true, 0.0, SimTime{}};
    cfg.flows = {flow(Direction::DL, "car0", 200000, 1, 0, 0.001)};
    const MetricsReport r = Scenario(cfg, {fixtures::straightRun("car0", 0, 20, 400, 600)}).run();
    const auto& v = r.vehicles.at(0);
    CHECK(v.handovers == 1);
    CHECK(v.bitsDroppedHandover == 200000);
    REQUIRE(r.handovers.size() == 1);
    CHECK(r.handovers[0].source == 1);
    CHECK(r.handovers[0].target == 2);
    CHECK(r.handovers[0].executed == r.handovers[0].decided + kTti);
    checkConservation(r);
}

TEST_CASE("manual association ignores geometry")
{
    ScenarioConfig cfg = fixtures::twoCells(1);
    cfg.dynamicCellAssociation = false;
    cfg.carDefault.masterId = 1;
    cfg.cars[1].masterId = 2;
    const MetricsReport r =
        Scenario(cfg, {fixtures::parked("a", 0, 1, {990, 0}), fixtures::parked("b", 0.5, 1, {10, 0})}).run();
    CHECK(r.vehicle("a")->firstCell == 1);
    CHECK(r.vehicle("b")->firstCell == 2);

    cfg.carDefault.masterId.reset();
    CHECK_THROWS_AS(Scenario(cfg, {fixtures::parked("a", 0, 1, {0, 0})}), ConfigError);
}

TEST_CASE("scenario construction rejects inconsistent configs")
{
    ScenarioConfig cfg = fixtures::twoCells(1);
    cfg.cars[3].masterId = 1;
    CHECK_THROWS_AS(Scenario(cfg, {fixtures::parked("a", 0, 1, {0, 0})}), ConfigError);
    cfg.cars.clear();
    cfg.flows = {flow(Direction::DL, "nobody", 100, 10, 0, 1)};
    CHECK_THROWS_AS(Scenario(cfg, {fixtures::parked("a", 0, 1, {0, 0})}), ConfigError);
}

TEST_CASE("output files")
{
    ScenarioConfig cfg = fixtures::twoCells(0.05);
    cfg.positionLogInterval = SimTime::fromMillis(10);
    cfg.flows = {flow(Direction::DL, "ALL", 1000, 5, 0, 0.05)};
    const MetricsReport r = Scenario(cfg, {fixtures::parked("car0", 0, 0.02, {100, 0})}).run();
    const fs::path dir = scratch("outputs");

    const auto written = writeOutputs(r, dir);
    CHECK(written.size() == 5);
    for (const auto& p : written)
        CHECK(fs::exists(p));
    for (const auto& e : fs::directory_iterator(dir))
        CHECK(e.path().extension() != ".tmp");

    const std::string vehicles = slurp(dir / "vehicles.csv");
    CHECK(vehicles.rfind("vehicle,enter_s,leave_s,bits_offered,bits_delivered,bits_dropped_radio,"
                         "bits_dropped_handover,bits_lost_core,mean_latency_ms,max_latency_ms,handovers,"
                         "first_cell,cell_timeline\n",
                         0) == 0);
    CHECK(slurp(dir / "cells.csv").rfind("cell,dir,rb_allocated,rb_capacity,utilization\n", 0) == 0);
    CHECK(slurp(dir / "run.csv").rfind("seed,sim_end_s,events,wall_ms\n", 0) == 0);
    CHECK(vehicles.find("car0,0.000000,0.020000,") != std::string::npos);

    // rewriting replaces the previous content
    std::ofstream(dir / "vehicles.csv") << "stale";
    writeOutputs(r, dir);
    CHECK(slurp(dir / "vehicles.csv") == vehicles);
}

TEST_CASE("golden tiny scenario")
{
    ScenarioConfig cfg = fixtures::twoCells(2.0);
    cfg.handover = {true, 1.0, SimTime::fromMillis(40)};
    cfg.flows = {flow(Direction::DL, "ALL", 3000, 4, 0, 2), flow(Direction::UL, "ALL", 1200, 8, 0.1, 1.5)};
    const MetricsReport r = Scenario(cfg, {fixtures::straightRun("a", 0, 2, 420, 580, 0, 0.25),
                                           fixtures::parked("b", 0.3, 1.7, {900, 40}),
                                           fixtures::straightRun("c", 0.6, 1.6, 100, 160, -30, 0.5)})
                                 .run();
    checkConservation(r);

    const fs::path golden = VLSIM_GOLDEN_DIR;
    const std::string actual = vehiclesCsv(r) + cellsCsv(r);
    if (std::getenv("VLSIM_UPDATE_GOLDEN")) {
        fs::create_directories(golden);
        std::ofstream(golden / "tiny.csv", std::ios::binary) << actual;
    }
    REQUIRE(fs::exists(golden / "tiny.csv"));
    CHECK(actual == slurp(golden / "tiny.csv"));
}
