#pragma once

#include <deque>
#include <map>
#include <optional>
#include <vector>

#include "vlsim/binder.hpp"
#include "vlsim/channel.hpp"
#include "vlsim/engine.hpp"

namespace vlsim {

inline constexpr std::int64_t kDefaultBufferBits = 8LL * 1024 * 1024; // 1 MiB

struct QueuedPacket
{
    Packet packet;
    SimTime enqueued;
};

/// FIFO of MAC-atomic packets for one (UE, direction).
class TxBuffer
{
  public:
    TxBuffer(NodeId owner, Direction dir, std::int64_t capacityBits);

    NodeId owner() const { return owner_; }
    Direction direction() const { return direction_; }

    /// Tail drop: returns false (and counts the drop) when the packet does not fit.
    bool push(const Packet& p, SimTime now);
    const QueuedPacket& front() const { return queue_.front(); }
    QueuedPacket pop();
    bool empty() const { return queue_.empty(); }
    std::size_t size() const { return queue_.size(); }

    /// Drops everything queued and returns the bits removed.
    std::int64_t clear();

    std::int64_t occupancyBits() const { return occupancy_; }
    std::int64_t enqueuedBits() const { return enqueued_; }
    std::int64_t overflowBits() const { return overflow_; }

    const std::deque<QueuedPacket>& queue() const { return queue_; }

  private:
    NodeId owner_;
    Direction direction_;
    std::int64_t capacity_;
    std::deque<QueuedPacket> queue_;
    std::int64_t occupancy_ = 0;
    std::int64_t enqueued_ = 0;
    std::int64_t overflow_ = 0;
};

struct UeDemand
{
    NodeId ue = kNoNode;
    int cqi = 0;
    std::int64_t backlogBits = 0;
};

struct Grant
{
    std::vector<int> rbs;
    int cqi = 0;

    bool operator==(const Grant&) const = default;
};

struct Allocation
{
    TtiIndex tti = 0;
    NodeId cell = kNoNode;
    Direction direction = Direction::DL;
    std::map<NodeId, Grant> grants;

    std::size_t rbCount() const;
};

/// RBs needed to drain `backlogBits` at the given CQI; 0 when the CQI carries nothing.
int rbDemand(std::int64_t backlogBits, int cqi, const CqiTables& tables);

/**
 * Round-robin: RBs are dealt one at a time around the backlogged UEs
 * (ascending id, starting after the persistent per-cell pointer), skipping
 * UEs whose demand is met. The pointer then rests on the UE that received
 * the last RB.
 */
class RoundRobinScheduler
{
  public:
    Allocation schedule(NodeId cell, Direction dir, TtiIndex tti, const std::vector<UeDemand>& demands,
                        int numRbs, const CqiTables& tables);

    NodeId pointer(NodeId cell, Direction dir) const;

  private:
    std::map<std::pair<NodeId, Direction>, NodeId> pointer_;
};

/// Greedy fill by descending CQI; equal CQI goes to the lower node id.
Allocation scheduleMaxCqi(NodeId cell, Direction dir, TtiIndex tti, const std::vector<UeDemand>& demands,
                          int numRbs, const CqiTables& tables);

/// Throws ContractError when grants overlap or fall outside 0..numRbs-1.
void validateAllocation(const Allocation& alloc, int numRbs);

enum class SchedulerKind { RR, MAXCQI };

struct PacketFate
{
    NodeId ue;
    Direction direction;
    Packet packet;
    SimTime enqueued;
};

struct TtiOutcome
{
    std::vector<PacketFate> delivered;
    std::vector<PacketFate> dropped;
    std::int64_t deliveredBits = 0;
    std::int64_t droppedBits = 0;
    std::map<NodeId, std::int64_t> deliveredBitsByUe;
};

/**
 * Per-UE transmission buffers for both directions plus the scheduler and
 * the decode-gated transmit step. DL buffers live conceptually at the
 * serving eNB and are keyed by the UE they feed.
 */
class Mac
{
  public:
    explicit Mac(SchedulerKind kind = SchedulerKind::RR, std::int64_t bufferCapacityBits = kDefaultBufferBits);

    /// Throws if `owner` is not registered; returns false on overflow drop.
    bool enqueue(const Binder& binder, NodeId owner, Direction dir, const Packet& packet, SimTime now);

    const TxBuffer* buffer(NodeId owner, Direction dir) const;
    std::int64_t backlogBits(NodeId owner, Direction dir) const;

    /// Clears one buffer; returns the bits removed.
    std::int64_t clear(NodeId owner, Direction dir);

    Allocation schedule(NodeId cell, Direction dir, TtiIndex tti, const std::vector<UeDemand>& demands,
                        int numRbs, const CqiTables& tables);

    /**
     * Sends up to each grant's capacity from the head of the grantee's
     * buffer and gates the whole grant on one decode decision. The
     * allocation must already be recorded in the Binder.
     */
    TtiOutcome transmit(const Allocation& alloc, const Channel& channel, const Binder& binder);

    SchedulerKind schedulerKind() const { return kind_; }
    RoundRobinScheduler& roundRobin() { return rr_; }

  private:
    SchedulerKind kind_;
    std::int64_t capacity_;
    RoundRobinScheduler rr_;
    std::map<std::pair<NodeId, Direction>, TxBuffer> buffers_;
};

} // namespace vlsim
