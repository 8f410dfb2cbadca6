#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>

#include "vlsim/mac.hpp"

using namespace vlsim;

namespace {

Packet packet(std::uint64_t id, std::int64_t bits, const std::string& vehicle = "car0")
{
    Packet p;
    p.id = id;
    p.bits = bits;
    p.vehicle = vehicle;
    return p;
}

std::map<NodeId, int> rbCounts(const Allocation& a)
{
    std::map<NodeId, int> out;
    for (const auto& [ue, g] : a.grants)
        out[ue] = static_cast<int>(g.rbs.size());
    return out;
}

// Deep buffers: every UE gets floor(N/K); the first N mod K after the pointer get one more.
std::map<NodeId, int> pointerWalkOracle(const std::vector<NodeId>& sortedUes, NodeId& pointer, int numRbs)
{
    const std::size_t k = sortedUes.size();
    std::size_t start = 0;
    while (start < k && sortedUes[start] <= pointer)
        ++start;
    start %= k;
    const int base = numRbs / static_cast<int>(k);
    const int extra = numRbs % static_cast<int>(k);
    std::map<NodeId, int> out;
    for (std::size_t i = 0; i < k; ++i)
        out[sortedUes[(start + i) % k]] = base + (static_cast<int>(i) < extra ? 1 : 0);
    const std::size_t lastIdx = extra == 0 ? (start + k - 1) % k : (start + static_cast<std::size_t>(extra) - 1) % k;
    pointer = sortedUes[lastIdx];
    return out;
}

} // namespace

TEST_CASE("enqueue")
{
    Binder b;
    const NodeId ue = b.registerNode(NodeKind::UE, "car0", 26).id;
    Mac mac(SchedulerKind::RR, 4000);

    CHECK(mac.enqueue(b, ue, Direction::DL, packet(1, 1000), SimTime{}));
    CHECK(mac.backlogBits(ue, Direction::DL) == 1000);
    CHECK(mac.backlogBits(ue, Direction::UL) == 0);

    CHECK(mac.enqueue(b, ue, Direction::DL, packet(2, 2500), SimTime{}));
    CHECK_FALSE(mac.enqueue(b, ue, Direction::DL, packet(3, 1000), SimTime{}));
    const TxBuffer* buf = mac.buffer(ue, Direction::DL);
    CHECK(buf->overflowBits() == 1000);
    CHECK(buf->front().packet.id == 1);
    CHECK(buf->size() == 2);

    b.deregisterNode(ue);
    CHECK_THROWS_AS(mac.enqueue(b, ue, Direction::DL, packet(4, 10), SimTime{}), ContractError);
}

TEST_CASE("round-robin grants")
{
    const auto t = CqiTables::standard();
    const std::int64_t deep = 1'000'000;

    SUBCASE("one UE takes everything")
    {
        RoundRobinScheduler rr;
        const auto a = rr.schedule(1, Direction::DL, 0, {{5, 9, deep}}, 50, t);
        CHECK(rbCounts(a) == std::map<NodeId, int>{{5, 50}});
    }
    SUBCASE("two UEs split evenly")
    {
        RoundRobinScheduler rr;
        const auto a = rr.schedule(1, Direction::DL, 0, {{5, 9, deep}, {6, 9, deep}}, 50, t);
        CHECK(rbCounts(a) == std::map<NodeId, int>{{5, 25}, {6, 25}});
    }
    SUBCASE("three UEs rotate the remainder")
    {
        RoundRobinScheduler rr;
        NodeId oraclePointer = kNoNode;
        const std::vector<UeDemand> d{{3, 9, deep}, {4, 9, deep}, {5, 9, deep}};
        std::map<NodeId, int> totals;
        for (int tti = 0; tti < 3; ++tti) {
            const auto got = rbCounts(rr.schedule(1, Direction::DL, tti, d, 50, t));
            const auto want = pointerWalkOracle({3, 4, 5}, oraclePointer, 50);
            CHECK(got == want);
            CHECK(rr.pointer(1, Direction::DL) == oraclePointer);
            if (tti == 0)
                CHECK(got == std::map<NodeId, int>{{3, 17}, {4, 17}, {5, 16}});
            for (const auto& [ue, n] : got)
                totals[ue] += n;
        }
        CHECK(totals == std::map<NodeId, int>{{3, 50}, {4, 50}, {5, 50}});
    }
    SUBCASE("demand caps pass spare RBs along")
    {
        RoundRobinScheduler rr;
        // 3 RBs worth at CQI 9 (346 bits/RB)
        const auto a = rr.schedule(1, Direction::DL, 0, {{3, 9, 3 * 346}, {4, 9, deep}}, 50, t);
        CHECK(rbCounts(a) == std::map<NodeId, int>{{3, 3}, {4, 47}});
        validateAllocation(a, 50);
    }
    SUBCASE("unbacklogged or CQI 0 UEs are skipped")
    {
        RoundRobinScheduler rr;
        const auto a = rr.schedule(1, Direction::DL, 0, {{3, 0, deep}, {4, 9, 0}}, 50, t);
        CHECK(a.grants.empty());
    }
}

TEST_CASE("round-robin matches the pointer walk across random UE sets")
{
    const auto t = CqiTables::standard();
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        RoundRobinScheduler rr;
        NodeId oraclePointer = kNoNode;
        const int numRbs = std::uniform_int_distribution<int>(1, 100)(rng);
        for (int tti = 0; tti < 10; ++tti) {
            std::vector<NodeId> ues;
            for (NodeId id = 1; id <= 12; ++id) {
                if (rng() % 2)
                    ues.push_back(id);
            }
            if (ues.empty())
                continue;
            std::vector<UeDemand> d;
            for (NodeId u : ues)
                d.push_back({u, 15, 10'000'000});
            const auto a = rr.schedule(1, Direction::UL, tti, d, numRbs, t);
            validateAllocation(a, numRbs);
            auto want = pointerWalkOracle(ues, oraclePointer, numRbs);
            std::erase_if(want, [](const auto& kv) { return kv.second == 0; });
            CHECK(rbCounts(a) == want);
        }
    }
}

TEST_CASE("max-CQI grants")
{
    const auto t = CqiTables::standard();
    const std::int64_t deep = 1'000'000;
    CHECK(rbCounts(scheduleMaxCqi(1, Direction::DL, 0, {{3, 7, deep}, {4, 12, deep}}, 50, t)) ==
          std::map<NodeId, int>{{4, 50}});
    CHECK(rbCounts(scheduleMaxCqi(1, Direction::DL, 0, {{4, 9, deep}, {3, 9, deep}}, 50, t)) ==
          std::map<NodeId, int>{{3, 50}});
    const std::int64_t tenRbs = 10 * bitsPerRb(12, t);
    CHECK(rbCounts(scheduleMaxCqi(1, Direction::DL, 0, {{3, 7, deep}, {4, 12, tenRbs}}, 50, t)) ==
          std::map<NodeId, int>{{3, 40}, {4, 10}});
}

TEST_CASE("max-CQI equals greedy fill by descending CQI")
{
    const auto t = CqiTables::standard();
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<UeDemand> d;
        const int n = std::uniform_int_distribution<int>(1, 8)(rng);
        for (int i = 0; i < n; ++i) {
            d.push_back({static_cast<NodeId>(i + 1), std::uniform_int_distribution<int>(0, 15)(rng),
                         std::uniform_int_distribution<std::int64_t>(0, 20000)(rng)});
        }
        const auto a = scheduleMaxCqi(1, Direction::DL, 0, d, 50, t);
        validateAllocation(a, 50);

        // oracle: repeatedly pick the best remaining (highest CQI, lowest id)
        std::map<NodeId, int> want;
        auto pool = d;
        int left = 50;
        while (left > 0) {
            auto best = pool.end();
            for (auto it = pool.begin(); it != pool.end(); ++it) {
                if (it->cqi < 1 || it->backlogBits <= 0)
                    continue;
                if (best == pool.end() || it->cqi > best->cqi || (it->cqi == best->cqi && it->ue < best->ue))
                    best = it;
            }
            if (best == pool.end())
                break;
            const int per = bitsPerRb(best->cqi, t);
            const int need = static_cast<int>((best->backlogBits + per - 1) / per);
            want[best->ue] = std::min(need, left);
            left -= want[best->ue];
            pool.erase(best);
        }
        CHECK(rbCounts(a) == want);

        // dominance: no granted UE has a lower CQI than an ungranted backlogged one
        for (const auto& g : d) {
            if (!a.grants.count(g.ue) || g.cqi < 1)
                continue;
            for (const auto& o : d) {
                if (!a.grants.count(o.ue) && o.backlogBits > 0 && o.cqi >= 1)
                    CHECK(g.cqi >= o.cqi);
            }
        }
    }
}

TEST_CASE("validateAllocation rejects overlaps")
{
    Allocation a;
    a.grants[1] = {{0, 1, 2}, 5};
    a.grants[2] = {{2, 3}, 5};
    CHECK_THROWS_AS(validateAllocation(a, 50), ContractError);
    a.grants[2] = {{49, 50}, 5};
    CHECK_THROWS_AS(validateAllocation(a, 50), ContractError);
}

TEST_CASE("transmit")
{
    const auto t = CqiTables::standard();
    const Channel ch(ChannelParams{}, t);

    SUBCASE("single UE, CQI 15, interference free")
    {
        Binder b;
        const NodeId cell = b.registerNode(NodeKind::ENB, "enb0", 46, {0, 0}).id;
        const NodeId ue = b.registerNode(NodeKind::UE, "car0", 26, {100, 0}).id;
        b.setServingCell(ue, cell);
        Mac mac;
        mac.enqueue(b, ue, Direction::DL, packet(1, 10000), SimTime{});
        const auto a = mac.schedule(cell, Direction::DL, 0, {{ue, 15, 10000}}, 50, t);
        // 10000 bits need ceil(10000 / 799) = 13 RBs
        CHECK(a.rbCount() == 13);
        for (const auto& [u, g] : a.grants)
            b.recordAllocation(0, Direction::DL, cell, g.rbs, cell, u);
        const auto out = mac.transmit(a, ch, b);
        CHECK(out.deliveredBits == 10000);
        CHECK(out.droppedBits == 0);
        CHECK(mac.backlogBits(ue, Direction::DL) == 0);

        Allocation full{0, cell, Direction::DL, {}};
        full.grants[ue] = {std::vector<int>(), 15};
        for (int rb = 0; rb < 50; ++rb)
            full.grants[ue].rbs.push_back(rb);
        CHECK(static_cast<std::int64_t>(full.grants[ue].rbs.size()) * bitsPerRb(15, t) == 39950);
    }
    SUBCASE("overlapping RBs at close range drop both grants")
    {
        Binder b;
        const NodeId c1 = b.registerNode(NodeKind::ENB, "enb0", 46, {0, 0}).id;
        const NodeId c2 = b.registerNode(NodeKind::ENB, "enb1", 46, {200, 0}).id;
        const NodeId u1 = b.registerNode(NodeKind::UE, "car0", 26, {100, 0}).id;
        const NodeId u2 = b.registerNode(NodeKind::UE, "car1", 26, {101, 0}).id;
        b.setServingCell(u1, c1);
        b.setServingCell(u2, c2);
        Mac mac;
        mac.enqueue(b, u1, Direction::DL, packet(1, 2000, "car0"), SimTime{});
        mac.enqueue(b, u2, Direction::DL, packet(1, 2000, "car1"), SimTime{});
        const auto a1 = mac.schedule(c1, Direction::DL, 0, {{u1, 12, 2000}}, 50, t);
        const auto a2 = mac.schedule(c2, Direction::DL, 0, {{u2, 12, 2000}}, 50, t);
        for (const auto* a : {&a1, &a2}) {
            for (const auto& [u, g] : a->grants)
                b.recordAllocation(0, Direction::DL, a->cell, g.rbs, a->cell, u);
        }
        // independent check: both near the midpoint, SINR about 0 dB, far below CQI 12
        const auto s = ch.sinr(b, u1, c1, 0, Direction::DL, a1.grants.at(u1).rbs);
        CHECK(linearMeanDb(s) < t.threshold(12));
        const auto o1 = mac.transmit(a1, ch, b);
        const auto o2 = mac.transmit(a2, ch, b);
        CHECK(o1.droppedBits == 2000);
        CHECK(o2.droppedBits == 2000);
        CHECK(o1.deliveredBits + o2.deliveredBits == 0);
    }
    SUBCASE("empty allocation")
    {
        Binder b;
        Mac mac;
        const auto out = mac.transmit(Allocation{}, ch, b);
        CHECK(out.deliveredBits == 0);
        CHECK(out.droppedBits == 0);
    }
    SUBCASE("a packet larger than the grant stays queued")
    {
        Binder b;
        const NodeId cell = b.registerNode(NodeKind::ENB, "enb0", 46, {0, 0}).id;
        const NodeId ue = b.registerNode(NodeKind::UE, "car0", 26, {100, 0}).id;
        b.setServingCell(ue, cell);
        Mac mac;
        mac.enqueue(b, ue, Direction::UL, packet(1, 500), SimTime{});
        mac.enqueue(b, ue, Direction::UL, packet(2, 5000), SimTime{});
        Allocation a{0, cell, Direction::UL, {}};
        a.grants[ue] = {{0, 1}, 15}; // 1598 bits
        b.recordAllocation(0, Direction::UL, cell, {0, 1}, ue);
        const auto out = mac.transmit(a, ch, b);
        CHECK(out.deliveredBits == 500);
        CHECK(mac.backlogBits(ue, Direction::UL) == 5000);
    }
    SUBCASE("grant outside the ledger is a contract error")
    {
        Binder b;
        const NodeId cell = b.registerNode(NodeKind::ENB, "enb0", 46, {0, 0}).id;
        const NodeId ue = b.registerNode(NodeKind::UE, "car0", 26, {100, 0}).id;
        b.setServingCell(ue, cell);
        Mac mac;
        mac.enqueue(b, ue, Direction::DL, packet(1, 100), SimTime{});
        Allocation a{0, cell, Direction::DL, {}};
        a.grants[ue] = {{4}, 15};
        CHECK_THROWS_AS(mac.transmit(a, ch, b), ContractError);
    }
}
