#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vlsim/binder.hpp"
#include "vlsim/channel.hpp"
#include "vlsim/config.hpp"
#include "vlsim/engine.hpp"
#include "vlsim/mac.hpp"
#include "vlsim/mobility.hpp"
#include "vlsim/rrc.hpp"
#include "vlsim/traffic.hpp"

namespace vlsim {

struct VehicleMetrics
{
    std::string name;
    NodeId node = kNoNode;
    SimTime enter;
    std::optional<SimTime> leave;

    std::int64_t bitsOffered = 0;
    std::int64_t bitsDelivered = 0;
    std::int64_t bitsDroppedRadio = 0; // failed decode or buffer overflow
    std::int64_t bitsDroppedHandover = 0;
    std::int64_t bitsLostCore = 0;
    std::int64_t bitsResidual = 0; // queued or in the core at leave/end

    std::uint64_t packetsDelivered = 0;
    double latencySumMs = 0.0;
    double latencyMaxMs = 0.0;

    int handovers = 0;
    NodeId firstCell = kNoNode;
    std::vector<std::pair<SimTime, NodeId>> cellTimeline;
    std::vector<std::pair<SimTime, Position>> positions;

    double meanLatencyMs() const { return packetsDelivered ? latencySumMs / static_cast<double>(packetsDelivered) : 0.0; }
};

struct CellMetrics
{
    NodeId cell = kNoNode;
    std::string name;
    std::array<std::int64_t, 2> rbAllocated{};   // DL, UL
    std::array<std::int64_t, 2> ueGrants{};      // scheduled UEs summed over TTIs
    std::int64_t rbCapacity = 0;                 // per direction
};

struct HandoverRecord
{
    std::string vehicle;
    NodeId source;
    NodeId target;
    SimTime decided;
    SimTime executed;
};

struct MetricsReport
{
    std::uint64_t seed = 0;
    SimTime simEnd;
    std::uint64_t events = 0;
    double wallMs = 0.0;
    std::int64_t ttis = 0;

    std::vector<VehicleMetrics> vehicles; // in entry order
    std::vector<CellMetrics> cells;
    std::vector<HandoverRecord> handovers;
    TrafficCounters traffic;
    std::vector<std::string> eventLog;

    std::string cellName(NodeId cell) const;
    const VehicleMetrics* vehicle(const std::string& name) const;
};

/**
 * Wires engine, mobility, binder, channel, rrc, mac and traffic into one
 * run. Per TTI: positions -> pending handovers -> handover checks -> CQI ->
 * schedule and record every cell -> transmit -> metrics.
 */
class Scenario
{
  public:
    Scenario(ScenarioConfig config, std::vector<Trajectory> trajectories);
    ~Scenario();

    /// Called at the end of every TTI with the delivered bits per vehicle.
    using TtiObserver = std::function<void(TtiIndex, const std::map<std::string, std::int64_t>&)>;
    void setTtiObserver(TtiObserver observer);

    MetricsReport run();

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Loads the trace named by the config and runs it.
MetricsReport runScenario(const ScenarioConfig& config);

/// Writes vehicles.csv, cells.csv, run.csv and events.log (plus positions.csv when logged).
std::vector<std::filesystem::path> writeOutputs(const MetricsReport& report, const std::filesystem::path& outDir);

std::string vehiclesCsv(const MetricsReport& report);
std::string cellsCsv(const MetricsReport& report);
std::string runCsv(const MetricsReport& report);

} // namespace vlsim
