#include "vlsim/traffic.hpp"

namespace vlsim {

void FlowSpec::validate() const
{
    if (packetBits <= 0)
        throw ConfigError("flow packetBits must be positive");
    if (interval <= SimTime{})
        throw ConfigError("flow interval must be positive");
    if (stop < start)
        throw ConfigError("flow stop precedes start");
}

std::vector<SimEvent> generateFlowEvents(const FlowSpec& spec, std::size_t flowIndex, const std::string& vehicle)
{
    spec.validate();
    std::vector<SimEvent> out;
    std::uint64_t id = 1;
    for (SimTime t = spec.start; t < spec.stop; t += spec.interval) {
        Packet p;
        p.id = id++;
        p.flow = flowIndex;
        p.vehicle = vehicle;
        p.direction = spec.direction;
        p.bits = spec.packetBits;
        p.created = t;
        out.push_back({t, 0, EventKind::PACKET_ARRIVAL, PacketPayload{std::move(p)}});
    }
    return out;
}

std::vector<SimEvent> generateFlowEvents(const FlowSpec& spec, std::size_t flowIndex,
                                         const std::vector<std::string>& vehicles)
{
    std::vector<SimEvent> out;
    for (const auto& v : vehicles) {
        if (spec.target != kAllVehicles && spec.target != v)
            continue;
        auto events = generateFlowEvents(spec, flowIndex, v);
        out.insert(out.end(), std::make_move_iterator(events.begin()), std::make_move_iterator(events.end()));
    }
    return out;
}

SimEvent backhaulDeliver(const Packet& packet, NodeId servingCell, const BackhaulConfig& config, SimTime now)
{
    return {now + config.oneWayDelay, 0, EventKind::BACKHAUL_DELIVERY, PacketPayload{packet, servingCell}};
}

} // namespace vlsim
