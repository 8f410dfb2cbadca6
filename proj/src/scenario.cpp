#include "vlsim/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>

namespace vlsim {

std::string MetricsReport::cellName(NodeId cell) const
{
    for (const auto& c : cells) {
        if (c.cell == cell)
            return c.name;
    }
    return std::to_string(cell);
}

const VehicleMetrics* MetricsReport::vehicle(const std::string& name) const
{
    for (const auto& v : vehicles) {
        if (v.name == name)
            return &v;
    }
    return nullptr;
}

namespace {

std::string fmtSeconds(SimTime t)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", t.seconds());
    return buf;
}

} // namespace

struct Scenario::Impl
{
    struct Vehicle
    {
        const Trajectory* trajectory;
        int rank;
        std::size_t metrics; // index into report.vehicles, valid once entered
        NodeId node = kNoNode;
        HandoverState hoState;
        std::optional<HandoverDecision> pending;
    };

    ScenarioConfig cfg;
    std::vector<Trajectory> trajectories;
    Engine engine;
    Binder binder;
    Channel channel;
    Mac mac;
    MetricsReport report;
    std::map<std::string, Vehicle> vehicles;
    std::map<NodeId, std::string> liveByNode;
    std::map<NodeId, std::size_t> cellIndex;
    std::map<std::string, std::int64_t> inCoreBits;
    TtiObserver observer;

    Impl(ScenarioConfig c, std::vector<Trajectory> trajs)
        : cfg(std::move(c)), engine(cfg.seed), binder(cfg.numRbs),
          channel(cfg.channel, cfg.cqi, &engine.rng()), mac(cfg.scheduler, cfg.bufferBytes * 8)
    {
        std::sort(trajs.begin(), trajs.end(), [](const Trajectory& a, const Trajectory& b) {
            if (a.enterTime() != b.enterTime())
                return a.enterTime() < b.enterTime();
            return a.vehicle() < b.vehicle();
        });
        for (const auto& [index, car] : cfg.cars) {
            if (index >= static_cast<int>(trajs.size())) {
                throw ConfigError("car[" + std::to_string(index) + "] configured but the trace has only " +
                                  std::to_string(trajs.size()) + " vehicles");
            }
        }
        for (std::size_t i = 0; i < trajs.size(); ++i) {
            const int rank = static_cast<int>(i);
            if (!cfg.dynamicCellAssociation && !cfg.masterIdFor(rank)) {
                throw ConfigError("dynamicCellAssociation is off and car[" + std::to_string(rank) + "] (" +
                                  trajs[i].vehicle() + ") has no masterId");
            }
            trajectories.push_back(applyAccident(trajs[i], cfg.accidentFor(rank)));
        }
        for (const auto& f : cfg.flows) {
            const bool known = f.target == kAllVehicles ||
                               std::any_of(trajs.begin(), trajs.end(),
                                           [&f](const Trajectory& t) { return t.vehicle() == f.target; });
            if (!known)
                throw ConfigError("flow target '" + f.target + "' is not a vehicle of the trace");
        }
        for (std::size_t i = 0; i < trajectories.size(); ++i)
            vehicles.emplace(trajectories[i].vehicle(), Vehicle{&trajectories[i], static_cast<int>(i), 0, kNoNode, {}, std::nullopt});
    }

    void log(SimTime t, const std::string& text) { report.eventLog.push_back(fmtSeconds(t) + " " + text); }

    VehicleMetrics& metricsOf(const std::string& name) { return report.vehicles[vehicles.at(name).metrics]; }

    void onEnter(const SimEvent& ev)
    {
        const auto& name = std::get<VehiclePayload>(ev.payload).vehicle;
        Vehicle& v = vehicles.at(name);
        const SimTime now = ev.fireTime;
        const auto& rec = binder.registerNode(NodeKind::UE, name, cfg.ueTxPowerDbm, v.trajectory->positionAt(now));
        v.node = rec.id;
        liveByNode[rec.id] = name;

        AssociationPolicy policy;
        policy.metric = cfg.associationMetric;
        if (cfg.dynamicCellAssociation) {
            policy.mode = AssociationMode::DYNAMIC;
        }
        else {
            policy.mode = AssociationMode::MANUAL;
            policy.manualCell = *cfg.masterIdFor(v.rank);
        }
        const NodeId cell = initialAssociation(binder, rec.id, policy, channel);

        VehicleMetrics m;
        m.name = name;
        m.node = rec.id;
        m.enter = now;
        m.firstCell = cell;
        m.cellTimeline.emplace_back(now, cell);
        v.metrics = report.vehicles.size();
        report.vehicles.push_back(std::move(m));

        std::ostringstream os;
        os << "ENTER " << name << " node=" << rec.id << " address=" << rec.address;
        log(now, os.str());
        log(now, "ATTACH " + name + " cell=" + report.cellName(cell));
    }

    void onLeave(const SimEvent& ev)
    {
        const auto& name = std::get<VehiclePayload>(ev.payload).vehicle;
        Vehicle& v = vehicles.at(name);
        if (v.node == kNoNode)
            throw ContractError("vehicle " + name + " leaves without having entered");
        VehicleMetrics& m = metricsOf(name);
        m.bitsResidual += mac.clear(v.node, Direction::DL) + mac.clear(v.node, Direction::UL);
        m.leave = ev.fireTime;
        binder.deregisterNode(v.node);
        liveByNode.erase(v.node);
        v.node = kNoNode;
        v.pending.reset();
        v.hoState = {};
        log(ev.fireTime, "LEAVE " + name);
    }

    void enqueueDl(const Packet& p, SimTime now)
    {
        inCoreBits[p.vehicle] -= p.bits;
        --report.traffic.inCore;
        Vehicle& v = vehicles.at(p.vehicle);
        VehicleMetrics& m = metricsOf(p.vehicle);
        if (v.node == kNoNode) {
            ++report.traffic.lostInCore;
            m.bitsLostCore += p.bits;
            return;
        }
        ++report.traffic.enqueued;
        if (!mac.enqueue(binder, v.node, Direction::DL, p, now))
            m.bitsDroppedRadio += p.bits;
    }

    void onArrival(const SimEvent& ev)
    {
        const Packet& p = std::get<PacketPayload>(ev.payload).packet;
        ++report.traffic.generated;
        auto it = vehicles.find(p.vehicle);
        if (it == vehicles.end() || it->second.node == kNoNode) {
            ++report.traffic.unattached;
            return;
        }
        Vehicle& v = it->second;
        VehicleMetrics& m = metricsOf(p.vehicle);
        m.bitsOffered += p.bits;
        if (p.direction == Direction::UL) {
            ++report.traffic.enqueued;
            if (!mac.enqueue(binder, v.node, Direction::UL, p, ev.fireTime))
                m.bitsDroppedRadio += p.bits;
            return;
        }
        inCoreBits[p.vehicle] += p.bits;
        ++report.traffic.inCore;
        SimEvent delivery = backhaulDeliver(p, binder.node(v.node).servingCell, cfg.backhaul, ev.fireTime);
        if (cfg.backhaul.oneWayDelay == SimTime{})
            enqueueDl(p, ev.fireTime);
        else
            engine.schedule(std::move(delivery));
    }

    void onDelivery(const SimEvent& ev) { enqueueDl(std::get<PacketPayload>(ev.payload).packet, ev.fireTime); }

    int cqiFor(NodeId ue, NodeId cell, TtiIndex tti, Direction dir) const
    {
        if (cfg.fixedCqi > 0)
            return cfg.fixedCqi;
        std::optional<TtiIndex> history;
        if (tti > 0)
            history = tti - 1;
        return cqiFromSinr(linearMeanDb(channel.widebandSinr(binder, ue, cell, history, dir)), cfg.cqi);
    }

    void onTick(const SimEvent& ev)
    {
        const SimTime now = ev.fireTime;
        const TtiIndex tti = ttiOf(now);
        if (tti != binder.currentTti())
            binder.advanceTti(tti);

        const bool logPositions = cfg.positionLogInterval > SimTime{} &&
                                  now.micros() % cfg.positionLogInterval.micros() == 0;
        for (const auto& [node, name] : liveByNode) {
            const Vehicle& v = vehicles.at(name);
            const Position p = v.trajectory->positionAt(now);
            binder.setPosition(node, p);
            if (logPositions)
                metricsOf(name).positions.emplace_back(now, p);
        }

        for (const auto& [node, name] : liveByNode) {
            Vehicle& v = vehicles.at(name);
            if (!v.pending)
                continue;
            const HandoverDecision d = *v.pending;
            v.pending.reset();
            const HandoverResult r = executeHandover(binder, mac, node, d.target);
            if (!r.executed) {
                v.hoState = {};
                log(now, "HANDOVER_ABORTED " + name + " target=" + report.cellName(d.target));
                continue;
            }
            VehicleMetrics& m = metricsOf(name);
            ++m.handovers;
            m.bitsDroppedHandover += r.droppedBits;
            m.cellTimeline.emplace_back(now, d.target);
            report.handovers.push_back({name, d.source, d.target, d.decidedAt, now});
            log(now, "HANDOVER " + name + " from=" + report.cellName(d.source) + " to=" +
                         report.cellName(d.target) + " decided=" + fmtSeconds(d.decidedAt));
        }

        for (const auto& [node, name] : liveByNode) {
            Vehicle& v = vehicles.at(name);
            if (auto d = handoverCheck(binder, node, now, cfg.handover, channel, v.hoState))
                v.pending = d;
        }

        std::vector<Allocation> allocations;
        for (NodeId cell : binder.enbs()) {
            const auto served = binder.uesServedBy(cell);
            for (Direction dir : {Direction::DL, Direction::UL}) {
                std::vector<UeDemand> demands;
                for (NodeId ue : served) {
                    const auto backlog = mac.backlogBits(ue, dir);
                    if (backlog > 0)
                        demands.push_back({ue, cqiFor(ue, cell, tti, dir), backlog});
                }
                Allocation alloc = mac.schedule(cell, dir, tti, demands, cfg.numRbs, cfg.cqi);
                validateAllocation(alloc, cfg.numRbs);
                for (const auto& [ue, grant] : alloc.grants)
                    binder.recordAllocation(tti, dir, cell, grant.rbs, dir == Direction::DL ? cell : ue, ue);
                auto& cm = report.cells[cellIndex.at(cell)];
                const std::size_t d = dir == Direction::DL ? 0 : 1;
                cm.rbAllocated[d] += static_cast<std::int64_t>(alloc.rbCount());
                cm.ueGrants[d] += static_cast<std::int64_t>(alloc.grants.size());
                allocations.push_back(std::move(alloc));
            }
        }

        const SimTime done = now + kTti;
        std::map<std::string, std::int64_t> deliveredThisTti;
        for (const auto& alloc : allocations) {
            TtiOutcome out = mac.transmit(alloc, channel, binder);
            for (const auto& f : out.delivered) {
                VehicleMetrics& m = metricsOf(f.packet.vehicle);
                m.bitsDelivered += f.packet.bits;
                ++m.packetsDelivered;
                SimTime latency = done - f.packet.created;
                if (f.direction == Direction::UL)
                    latency += cfg.backhaul.oneWayDelay;
                m.latencySumMs += latency.millis();
                m.latencyMaxMs = std::max(m.latencyMaxMs, latency.millis());
                deliveredThisTti[f.packet.vehicle] += f.packet.bits;
            }
            for (const auto& f : out.dropped)
                metricsOf(f.packet.vehicle).bitsDroppedRadio += f.packet.bits;
        }

        for (auto& c : report.cells)
            c.rbCapacity += cfg.numRbs;
        ++report.ttis;
        if (observer)
            observer(tti, deliveredThisTti);
    }

    MetricsReport run()
    {
        const auto wallStart = std::chrono::steady_clock::now();
        report = MetricsReport{};
        report.seed = cfg.seed;
        report.simEnd = cfg.simEnd;

        for (const auto& e : cfg.enbs) {
            const auto& rec = binder.registerNode(NodeKind::ENB, e.name, e.txPowerDbm, e.position);
            cellIndex[rec.id] = report.cells.size();
            report.cells.push_back({rec.id, e.name, {}, {}, 0});
            log(SimTime{}, "ENB " + e.name + " node=" + std::to_string(rec.id));
        }

        engine.setHandler(EventKind::VEHICLE_ENTER, [this](const SimEvent& e) { onEnter(e); });
        engine.setHandler(EventKind::VEHICLE_LEAVE, [this](const SimEvent& e) { onLeave(e); });
        engine.setHandler(EventKind::PACKET_ARRIVAL, [this](const SimEvent& e) { onArrival(e); });
        engine.setHandler(EventKind::BACKHAUL_DELIVERY, [this](const SimEvent& e) { onDelivery(e); });
        engine.setHandler(EventKind::TTI_TICK, [this](const SimEvent& e) { onTick(e); });

        for (auto& ev : lifecycleEvents(trajectories)) {
            if (ev.fireTime <= cfg.simEnd)
                engine.schedule(std::move(ev));
        }
        std::vector<std::string> names;
        for (const auto& t : trajectories)
            names.push_back(t.vehicle());
        for (std::size_t i = 0; i < cfg.flows.size(); ++i) {
            FlowSpec flow = cfg.flows[i];
            flow.stop = std::min(flow.stop, cfg.simEnd);
            if (flow.start > flow.stop)
                continue;
            for (auto& ev : generateFlowEvents(flow, i, names))
                engine.schedule(std::move(ev));
        }
        engine.schedule(cfg.simEnd, EventKind::SIM_END);
        engine.startTtiClock(SimTime{}, cfg.simEnd);

        const RunSummary summary = engine.runUntil(cfg.simEnd);

        for (auto& m : report.vehicles) {
            const Vehicle& v = vehicles.at(m.name);
            if (v.node != kNoNode)
                m.bitsResidual += mac.backlogBits(v.node, Direction::DL) + mac.backlogBits(v.node, Direction::UL);
            m.bitsResidual += inCoreBits[m.name];
        }
        log(cfg.simEnd, "END");

        report.events = summary.total();
        report.wallMs = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - wallStart).count();
        return report;
    }
};

Scenario::Scenario(ScenarioConfig config, std::vector<Trajectory> trajectories)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(trajectories)))
{
}

Scenario::~Scenario() = default;

void Scenario::setTtiObserver(TtiObserver observer) { impl_->observer = std::move(observer); }

MetricsReport Scenario::run() { return impl_->run(); }

MetricsReport runScenario(const ScenarioConfig& config)
{
    Scenario scenario(config, loadTrace(config.traceFile));
    return scenario.run();
}

} // namespace vlsim
