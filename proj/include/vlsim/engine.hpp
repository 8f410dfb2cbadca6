#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "vlsim/types.hpp"

namespace vlsim {

enum class EventKind
{
    TTI_TICK,
    VEHICLE_ENTER,
    VEHICLE_LEAVE,
    PACKET_ARRIVAL,
    BACKHAUL_DELIVERY,
    SIM_END,
};

inline constexpr std::size_t kNumEventKinds = 6;

const char* eventName(EventKind kind);
inline std::ostream& operator<<(std::ostream& os, EventKind k) { return os << eventName(k); }

struct NoPayload
{};

struct VehiclePayload
{
    std::string vehicle;
};

/// An application packet travelling between the server and a vehicle.
struct Packet
{
    std::uint64_t id = 0;
    std::size_t flow = 0;
    std::string vehicle;
    Direction direction = Direction::DL;
    std::int64_t bits = 0;
    SimTime created;
};

struct PacketPayload
{
    Packet packet;
    NodeId cell = kNoNode; // serving cell when handed to the backhaul
};

using EventPayload = std::variant<NoPayload, VehiclePayload, PacketPayload>;

struct SimEvent
{
    SimTime fireTime;
    std::uint64_t sequence = 0; // assigned by Engine::schedule
    EventKind kind = EventKind::SIM_END;
    EventPayload payload;
};

struct EventHandle
{
    SimTime fireTime;
    std::uint64_t sequence = 0;
};

struct TraceEntry
{
    SimTime time;
    std::uint64_t sequence;
    EventKind kind;

    bool operator==(const TraceEntry&) const = default;
};

struct RunSummary
{
    std::array<std::uint64_t, kNumEventKinds> processed{};
    std::vector<TraceEntry> trace; // filled only when tracing is enabled

    std::uint64_t count(EventKind kind) const { return processed[static_cast<std::size_t>(kind)]; }
    std::uint64_t total() const;
};

/// Raised when a handler throws; carries the offending event.
class EventError : public Error
{
  public:
    EventError(const SimEvent& event, const std::string& what);

    EventKind kind() const { return kind_; }
    SimTime fireTime() const { return fireTime_; }
    std::uint64_t sequence() const { return sequence_; }

  private:
    EventKind kind_;
    SimTime fireTime_;
    std::uint64_t sequence_;
};

/**
 * Discrete-event core. Events fire ordered by (fire time, insertion
 * sequence). A TTI_TICK that has been handled re-arms itself one TTI later
 * when the periodic tick is enabled.
 */
class Engine
{
  public:
    using Handler = std::function<void(const SimEvent&)>;

    explicit Engine(std::uint64_t seed = 1);

    SimTime now() const { return clock_; }

    EventHandle schedule(SimEvent event);
    EventHandle schedule(SimTime at, EventKind kind, EventPayload payload = NoPayload{});
    bool cancel(const EventHandle& handle);

    void setHandler(EventKind kind, Handler handler);

    /// Starts the periodic TTI_TICK at `first`; ticks at or after `stop` are not scheduled.
    void startTtiClock(SimTime first, SimTime stop = SimTime::fromMicros(INT64_MAX));

    RunSummary runUntil(SimTime end);

    std::size_t pending() const { return queue_.size(); }

    void setTracing(bool on) { tracing_ = on; }

    std::mt19937_64& rng() { return rng_; }

  private:
    using Key = std::pair<std::int64_t, std::uint64_t>;

    std::map<Key, SimEvent> queue_;
    std::array<Handler, kNumEventKinds> handlers_;
    SimTime clock_;
    std::uint64_t nextSequence_ = 1;
    bool tracing_ = false;
    bool tickArmed_ = false;
    SimTime tickStop_;
    std::mt19937_64 rng_;
};

} // namespace vlsim
