#include "vlsim/engine.hpp"

#include <numeric>
#include <sstream>

namespace vlsim {

const char* eventName(EventKind kind)
{
    switch (kind) {
        case EventKind::TTI_TICK: return "TTI_TICK";
        case EventKind::VEHICLE_ENTER: return "VEHICLE_ENTER";
        case EventKind::VEHICLE_LEAVE: return "VEHICLE_LEAVE";
        case EventKind::PACKET_ARRIVAL: return "PACKET_ARRIVAL";
        case EventKind::BACKHAUL_DELIVERY: return "BACKHAUL_DELIVERY";
        case EventKind::SIM_END: return "SIM_END";
    }
    return "?";
}

std::uint64_t RunSummary::total() const
{
    return std::accumulate(processed.begin(), processed.end(), std::uint64_t{0});
}

namespace {

std::string describe(const SimEvent& event, const std::string& what)
{
    std::ostringstream os;
    os << eventName(event.kind) << " #" << event.sequence << " at " << event.fireTime.millis()
       << " ms: " << what;
    return os.str();
}

} // namespace

EventError::EventError(const SimEvent& event, const std::string& what)
    : Error(describe(event, what)), kind_(event.kind), fireTime_(event.fireTime),
      sequence_(event.sequence)
{
}

Engine::Engine(std::uint64_t seed) : rng_(seed) {}

EventHandle Engine::schedule(SimEvent event)
{
    if (event.fireTime < clock_) {
        std::ostringstream os;
        os << "cannot schedule " << eventName(event.kind) << " at " << event.fireTime.millis()
           << " ms, clock is at " << clock_.millis() << " ms";
        throw ContractError(os.str());
    }
    event.sequence = nextSequence_++;
    EventHandle handle{event.fireTime, event.sequence};
    queue_.emplace(Key{event.fireTime.micros(), event.sequence}, std::move(event));
    return handle;
}

EventHandle Engine::schedule(SimTime at, EventKind kind, EventPayload payload)
{
    return schedule(SimEvent{at, 0, kind, std::move(payload)});
}

bool Engine::cancel(const EventHandle& handle)
{
    return queue_.erase(Key{handle.fireTime.micros(), handle.sequence}) > 0;
}

void Engine::setHandler(EventKind kind, Handler handler)
{
    handlers_[static_cast<std::size_t>(kind)] = std::move(handler);
}

void Engine::startTtiClock(SimTime first, SimTime stop)
{
    tickArmed_ = true;
    tickStop_ = stop;
    if (first < stop)
        schedule(first, EventKind::TTI_TICK);
}

RunSummary Engine::runUntil(SimTime end)
{
    if (end < clock_)
        throw ContractError("runUntil target lies in the past");

    RunSummary summary;
    while (!queue_.empty()) {
        auto it = queue_.begin();
        if (it->first.first > end.micros())
            break;
        SimEvent event = std::move(it->second);
        queue_.erase(it);
        clock_ = event.fireTime;

        if (event.kind == EventKind::TTI_TICK && tickArmed_) {
            SimTime next = event.fireTime + kTti;
            if (next < tickStop_)
                schedule(next, EventKind::TTI_TICK);
        }

        const auto& handler = handlers_[static_cast<std::size_t>(event.kind)];
        if (handler) {
            try {
                handler(event);
            }
            catch (const EventError&) {
                throw;
            }
            catch (const std::exception& e) {
                throw EventError(event, e.what());
            }
        }

        ++summary.processed[static_cast<std::size_t>(event.kind)];
        if (tracing_)
            summary.trace.push_back({event.fireTime, event.sequence, event.kind});
    }
    clock_ = end;
    return summary;
}

} // namespace vlsim
