#include "vlsim/mac.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace vlsim {

TxBuffer::TxBuffer(NodeId owner, Direction dir, std::int64_t capacityBits)
    : owner_(owner), direction_(dir), capacity_(capacityBits)
{
}

bool TxBuffer::push(const Packet& p, SimTime now)
{
    if (occupancy_ + p.bits > capacity_) {
        overflow_ += p.bits;
        return false;
    }
    queue_.push_back({p, now});
    occupancy_ += p.bits;
    enqueued_ += p.bits;
    return true;
}

QueuedPacket TxBuffer::pop()
{
    QueuedPacket q = std::move(queue_.front());
    queue_.pop_front();
    occupancy_ -= q.packet.bits;
    return q;
}

std::int64_t TxBuffer::clear()
{
    const std::int64_t bits = occupancy_;
    queue_.clear();
    occupancy_ = 0;
    return bits;
}

std::size_t Allocation::rbCount() const
{
    std::size_t n = 0;
    for (const auto& [ue, g] : grants)
        n += g.rbs.size();
    return n;
}

int rbDemand(std::int64_t backlogBits, int cqi, const CqiTables& tables)
{
    if (cqi < 1 || backlogBits <= 0)
        return 0;
    const std::int64_t per = bitsPerRb(cqi, tables);
    const std::int64_t n = (backlogBits + per - 1) / per;
    return static_cast<int>(std::min<std::int64_t>(n, std::numeric_limits<int>::max()));
}

namespace {

struct Eligible
{
    NodeId ue;
    int cqi;
    int need;
};

std::vector<Eligible> eligible(const std::vector<UeDemand>& demands, const CqiTables& tables)
{
    std::vector<Eligible> out;
    for (const auto& d : demands) {
        const int need = rbDemand(d.backlogBits, d.cqi, tables);
        if (need > 0)
            out.push_back({d.ue, d.cqi, need});
    }
    std::sort(out.begin(), out.end(), [](const Eligible& a, const Eligible& b) { return a.ue < b.ue; });
    return out;
}

} // namespace

Allocation RoundRobinScheduler::schedule(NodeId cell, Direction dir, TtiIndex tti,
                                         const std::vector<UeDemand>& demands, int numRbs,
                                         const CqiTables& tables)
{
    Allocation alloc{tti, cell, dir, {}};
    const auto ues = eligible(demands, tables);
    if (ues.empty())
        return alloc;

    const NodeId after = pointer(cell, dir);
    const auto first = std::find_if(ues.begin(), ues.end(), [after](const Eligible& e) { return e.ue > after; });
    std::vector<Eligible> order(first, ues.end());
    order.insert(order.end(), ues.begin(), first);

    const std::size_t k = order.size();
    std::vector<int> count(k, 0);
    int left = numRbs;
    int unmet = static_cast<int>(k);
    std::size_t last = k;
    for (std::size_t pos = 0; left > 0 && unmet > 0; pos = (pos + 1) % k) {
        if (count[pos] >= order[pos].need)
            continue;
        ++count[pos];
        --left;
        last = pos;
        if (count[pos] == order[pos].need)
            --unmet;
    }
    pointer_[{cell, dir}] = order[last].ue;

    int rb = 0;
    for (std::size_t i = 0; i < k; ++i) {
        if (count[i] == 0)
            continue;
        Grant g;
        g.cqi = order[i].cqi;
        g.rbs.resize(static_cast<std::size_t>(count[i]));
        std::iota(g.rbs.begin(), g.rbs.end(), rb);
        rb += count[i];
        alloc.grants.emplace(order[i].ue, std::move(g));
    }
    return alloc;
}

NodeId RoundRobinScheduler::pointer(NodeId cell, Direction dir) const
{
    auto it = pointer_.find({cell, dir});
    return it == pointer_.end() ? kNoNode : it->second;
}

Allocation scheduleMaxCqi(NodeId cell, Direction dir, TtiIndex tti, const std::vector<UeDemand>& demands,
                          int numRbs, const CqiTables& tables)
{
    Allocation alloc{tti, cell, dir, {}};
    auto ues = eligible(demands, tables);
    std::stable_sort(ues.begin(), ues.end(), [](const Eligible& a, const Eligible& b) { return a.cqi > b.cqi; });

    int rb = 0;
    for (const auto& e : ues) {
        if (rb >= numRbs)
            break;
        const int n = std::min(e.need, numRbs - rb);
        Grant g;
        g.cqi = e.cqi;
        g.rbs.resize(static_cast<std::size_t>(n));
        std::iota(g.rbs.begin(), g.rbs.end(), rb);
        rb += n;
        alloc.grants.emplace(e.ue, std::move(g));
    }
    return alloc;
}

void validateAllocation(const Allocation& alloc, int numRbs)
{
    std::vector<bool> used(static_cast<std::size_t>(numRbs), false);
    for (const auto& [ue, g] : alloc.grants) {
        if (g.rbs.empty())
            throw ContractError("empty grant for UE " + std::to_string(ue));
        for (int rb : g.rbs) {
            if (rb < 0 || rb >= numRbs)
                throw ContractError("grant RB " + std::to_string(rb) + " out of range");
            if (used[rb])
                throw ContractError("RB " + std::to_string(rb) + " granted twice");
            used[rb] = true;
        }
    }
}

Mac::Mac(SchedulerKind kind, std::int64_t bufferCapacityBits) : kind_(kind), capacity_(bufferCapacityBits) {}

bool Mac::enqueue(const Binder& binder, NodeId owner, Direction dir, const Packet& packet, SimTime now)
{
    if (!binder.isLive(owner))
        throw ContractError("enqueue for unregistered node " + std::to_string(owner));
    auto it = buffers_.try_emplace({owner, dir}, owner, dir, capacity_).first;
    return it->second.push(packet, now);
}

const TxBuffer* Mac::buffer(NodeId owner, Direction dir) const
{
    auto it = buffers_.find({owner, dir});
    return it == buffers_.end() ? nullptr : &it->second;
}

std::int64_t Mac::backlogBits(NodeId owner, Direction dir) const
{
    const TxBuffer* b = buffer(owner, dir);
    return b ? b->occupancyBits() : 0;
}

std::int64_t Mac::clear(NodeId owner, Direction dir)
{
    auto it = buffers_.find({owner, dir});
    if (it == buffers_.end())
        return 0;
    return it->second.clear();
}

Allocation Mac::schedule(NodeId cell, Direction dir, TtiIndex tti, const std::vector<UeDemand>& demands,
                         int numRbs, const CqiTables& tables)
{
    if (kind_ == SchedulerKind::MAXCQI)
        return scheduleMaxCqi(cell, dir, tti, demands, numRbs, tables);
    return rr_.schedule(cell, dir, tti, demands, numRbs, tables);
}

TtiOutcome Mac::transmit(const Allocation& alloc, const Channel& channel, const Binder& binder)
{
    TtiOutcome out;
    for (const auto& [ue, grant] : alloc.grants) {
        auto it = buffers_.find({ue, alloc.direction});
        if (it == buffers_.end() || it->second.empty())
            continue;
        TxBuffer& buf = it->second;

        std::int64_t room = static_cast<std::int64_t>(grant.rbs.size()) * bitsPerRb(grant.cqi, channel.tables());
        std::size_t fits = 0;
        for (const auto& q : buf.queue()) {
            if (q.packet.bits > room)
                break;
            room -= q.packet.bits;
            ++fits;
        }
        if (fits == 0)
            continue;

        const auto sinr = channel.sinr(binder, ue, alloc.cell, alloc.tti, alloc.direction, grant.rbs);
        const bool ok = decode(sinr, grant.cqi, channel.tables());
        std::vector<QueuedPacket> sent;
        for (std::size_t i = 0; i < fits; ++i)
            sent.push_back(buf.pop());
        for (auto& q : sent) {
            PacketFate fate{ue, alloc.direction, std::move(q.packet), q.enqueued};
            if (ok) {
                out.deliveredBits += fate.packet.bits;
                out.deliveredBitsByUe[ue] += fate.packet.bits;
                out.delivered.push_back(std::move(fate));
            }
            else {
                out.droppedBits += fate.packet.bits;
                out.dropped.push_back(std::move(fate));
            }
        }
    }
    return out;
}

} // namespace vlsim
