#include "vlsim/rrc.hpp"

namespace vlsim {

std::vector<std::pair<NodeId, double>> measureCells(const Binder& binder, NodeId ue, const Channel& channel)
{
    const NodeRecord& rx = binder.node(ue);
    std::vector<std::pair<NodeId, double>> out;
    for (NodeId cell : binder.enbs())
        out.emplace_back(cell, channel.receivedPower(binder.node(cell), rx));
    return out;
}

NodeId initialAssociation(Binder& binder, NodeId ue, const AssociationPolicy& policy, const Channel& channel)
{
    if (policy.mode == AssociationMode::MANUAL) {
        if (!binder.isLive(policy.manualCell) || binder.node(policy.manualCell).kind != NodeKind::ENB) {
            throw ConfigError("manual association references unknown eNB " +
                              std::to_string(policy.manualCell));
        }
        binder.setServingCell(ue, policy.manualCell);
        return policy.manualCell;
    }

    const auto powers = measureCells(binder, ue, channel);
    if (powers.empty())
        throw AssociationError("no eNB registered to associate " + binder.node(ue).name);

    std::vector<double> metric;
    metric.reserve(powers.size());
    if (policy.metric == AssociationMetric::SINR) {
        // fully loaded neighbours: every other cell interferes
        double total = dbmToMw(channel.noiseDbm());
        for (const auto& [cell, p] : powers)
            total += dbmToMw(p);
        for (const auto& [cell, p] : powers)
            metric.push_back(dbmToMw(p) / (total - dbmToMw(p)));
    }
    else {
        for (const auto& [cell, p] : powers)
            metric.push_back(p);
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < powers.size(); ++i) {
        if (metric[i] > metric[best])
            best = i;
    }
    binder.setServingCell(ue, powers[best].first);
    return powers[best].first;
}

std::optional<HandoverDecision> handoverCheck(const Binder& binder, NodeId ue, SimTime now,
                                              const HandoverConfig& config, const Channel& channel,
                                              HandoverState& state)
{
    if (!config.enabled)
        return std::nullopt;

    const NodeId serving = binder.node(ue).servingCell;
    if (serving == kNoNode)
        throw ContractError("handover check on unattached UE " + std::to_string(ue));

    const auto powers = measureCells(binder, ue, channel);
    double servingPower = 0.0;
    std::optional<std::pair<NodeId, double>> best;
    for (const auto& [cell, p] : powers) {
        if (cell == serving)
            servingPower = p;
        else if (!best || p > best->second)
            best = std::make_pair(cell, p);
    }

    if (!best || !(best->second - servingPower > config.hysteresisDb)) {
        state = {};
        return std::nullopt;
    }
    if (state.candidate != best->first) {
        state.candidate = best->first;
        state.conditionSince = now;
    }
    if (now - *state.conditionSince >= config.timeToTrigger) {
        HandoverDecision d{ue, serving, best->first, now};
        state = {};
        return d;
    }
    return std::nullopt;
}

HandoverResult executeHandover(Binder& binder, Mac& mac, NodeId ue, NodeId target)
{
    HandoverResult result;
    if (!binder.isLive(ue) || !binder.isLive(target) || binder.node(target).kind != NodeKind::ENB)
        return result;

    const NodeId source = binder.node(ue).servingCell;
    if (source != kNoNode)
        result.revokedRbs = binder.revokeGrants(ue, source);
    result.droppedBits = mac.clear(ue, Direction::DL);
    binder.setServingCell(ue, target);
    result.executed = true;
    return result;
}

} // namespace vlsim
