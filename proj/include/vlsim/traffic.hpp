#pragma once

#include <string>
#include <vector>

#include "vlsim/engine.hpp"

namespace vlsim {

inline const std::string kAllVehicles = "ALL";

/// Constant-bit-rate flow between the remote server and one or all vehicles.
struct FlowSpec
{
    Direction direction = Direction::DL;
    std::string target = kAllVehicles;
    std::int64_t packetBits = 1000;
    SimTime interval = SimTime::fromMillis(10);
    SimTime start;
    SimTime stop;

    void validate() const;
    bool operator==(const FlowSpec&) const = default;
};

struct BackhaulConfig
{
    SimTime oneWayDelay;

    bool operator==(const BackhaulConfig&) const = default;
};

/// PACKET_ARRIVAL events at start, start + interval, ... strictly before stop.
std::vector<SimEvent> generateFlowEvents(const FlowSpec& spec, std::size_t flowIndex, const std::string& vehicle);

/// Expands ALL into one flow per vehicle; otherwise only the named target.
std::vector<SimEvent> generateFlowEvents(const FlowSpec& spec, std::size_t flowIndex,
                                         const std::vector<std::string>& vehicles);

/// The BACKHAUL_DELIVERY that hands `packet` to the serving eNB after the core delay.
SimEvent backhaulDeliver(const Packet& packet, NodeId servingCell, const BackhaulConfig& config, SimTime now);

/// Every generated packet ends in exactly one of the three fates.
struct TrafficCounters
{
    std::uint64_t generated = 0;
    std::uint64_t enqueued = 0;
    std::uint64_t lostInCore = 0;
    std::uint64_t unattached = 0;
    std::uint64_t inCore = 0; // handed to the backhaul, not yet delivered
};

} // namespace vlsim
