#include "vlsim/binder.hpp"

#include <algorithm>

namespace vlsim {

Binder::Binder(int numRbs) : numRbs_(numRbs)
{
    if (numRbs <= 0)
        throw ConfigError("numRbs must be positive");
}

const NodeRecord& Binder::registerNode(NodeKind kind, const std::string& name, double txPowerDbm,
                                       Position position)
{
    if (names_.count(name))
        throw BinderError("a live node named '" + name + "' is already registered");
    NodeRecord rec;
    rec.id = nextId_++;
    rec.kind = kind;
    rec.name = name;
    rec.address = nextAddress_++;
    rec.txPowerDbm = txPowerDbm;
    rec.position = position;
    names_[name] = rec.id;
    return nodes_.emplace(rec.id, std::move(rec)).first->second;
}

void Binder::deregisterNode(NodeId id)
{
    auto it = nodes_.find(id);
    if (it == nodes_.end())
        throw BinderError("deregistration of unknown or already removed node " + std::to_string(id));
    names_.erase(it->second.name);
    nodes_.erase(it);

    for (auto& [nid, rec] : nodes_) {
        if (rec.servingCell == id)
            rec.servingCell = kNoNode;
    }
    purge(current_, id);
    purge(previous_, id);
}

void Binder::purge(TtiGrid& grid, NodeId id)
{
    for (auto& dirGrid : grid) {
        dirGrid.erase(id);
        for (auto& [cell, rbs] : dirGrid) {
            for (auto& e : rbs) {
                if (e.transmitter == id || e.grantee == id)
                    e = GridEntry{};
            }
        }
    }
}

const NodeRecord& Binder::node(NodeId id) const
{
    auto it = nodes_.find(id);
    if (it == nodes_.end())
        throw BinderError("node " + std::to_string(id) + " is not registered");
    return it->second;
}

std::optional<NodeId> Binder::findByName(const std::string& name) const
{
    auto it = names_.find(name);
    if (it == names_.end())
        return std::nullopt;
    return it->second;
}

std::vector<NodeId> Binder::liveNodes() const
{
    std::vector<NodeId> out;
    out.reserve(nodes_.size());
    for (const auto& [id, rec] : nodes_)
        out.push_back(id);
    return out;
}

std::vector<NodeId> Binder::enbs() const
{
    std::vector<NodeId> out;
    for (const auto& [id, rec] : nodes_) {
        if (rec.kind == NodeKind::ENB)
            out.push_back(id);
    }
    return out;
}

std::vector<NodeId> Binder::ues() const
{
    std::vector<NodeId> out;
    for (const auto& [id, rec] : nodes_) {
        if (rec.kind == NodeKind::UE)
            out.push_back(id);
    }
    return out;
}

std::vector<NodeId> Binder::uesServedBy(NodeId cell) const
{
    std::vector<NodeId> out;
    for (const auto& [id, rec] : nodes_) {
        if (rec.kind == NodeKind::UE && rec.servingCell == cell)
            out.push_back(id);
    }
    return out;
}

void Binder::setPosition(NodeId id, Position p)
{
    auto it = nodes_.find(id);
    if (it == nodes_.end())
        throw BinderError("node " + std::to_string(id) + " is not registered");
    it->second.position = p;
}

void Binder::setServingCell(NodeId ue, NodeId cell)
{
    auto it = nodes_.find(ue);
    if (it == nodes_.end() || it->second.kind != NodeKind::UE)
        throw BinderError("serving cell can only be set on a live UE");
    if (cell != kNoNode && node(cell).kind != NodeKind::ENB)
        throw BinderError("serving cell " + std::to_string(cell) + " is not an eNB");
    it->second.servingCell = cell;
}

void Binder::advanceTti(TtiIndex next)
{
    if (next != currentTti_ + 1) {
        throw BinderError("non-consecutive TTI advance from " + std::to_string(currentTti_) + " to " +
                          std::to_string(next));
    }
    previous_ = std::move(current_);
    current_ = TtiGrid{};
    hasPrevious_ = true;
    currentTti_ = next;
}

const Binder::TtiGrid& Binder::gridFor(TtiIndex tti) const
{
    if (tti == currentTti_)
        return current_;
    if (hasPrevious_ && tti == currentTti_ - 1)
        return previous_;
    throw BinderError("TTI " + std::to_string(tti) + " is not retained (current " +
                      std::to_string(currentTti_) + ")");
}

void Binder::recordAllocation(TtiIndex tti, Direction dir, NodeId cell, const std::vector<int>& rbs,
                              NodeId transmitter, NodeId grantee)
{
    if (tti != currentTti_)
        throw BinderError("allocations can only be recorded for the current TTI");
    if (node(cell).kind != NodeKind::ENB)
        throw BinderError("allocation cell " + std::to_string(cell) + " is not an eNB");
    node(transmitter);
    if (grantee == kNoNode)
        grantee = transmitter;
    else
        node(grantee);

    auto& grid = current_[dirIndex(dir)];
    auto found = grid.find(cell);
    const CellGrid empty(static_cast<std::size_t>(numRbs_));
    const CellGrid& existing = found == grid.end() ? empty : found->second;

    std::vector<bool> seen(static_cast<std::size_t>(numRbs_), false);
    for (int rb : rbs) {
        if (rb < 0 || rb >= numRbs_)
            throw BinderError("RB index " + std::to_string(rb) + " out of range");
        if (seen[rb] || existing[rb].transmitter != kNoNode) {
            throw LedgerConflictError("RB " + std::to_string(rb) + " of cell " + std::to_string(cell) +
                                      " " + directionName(dir) + " already allocated in TTI " +
                                      std::to_string(tti));
        }
        seen[rb] = true;
    }

    auto& target = grid.try_emplace(cell, static_cast<std::size_t>(numRbs_)).first->second;
    for (int rb : rbs)
        target[rb] = GridEntry{transmitter, grantee};
}

std::size_t Binder::revokeGrants(NodeId ue, NodeId cell)
{
    std::size_t removed = 0;
    for (auto& dirGrid : current_) {
        auto it = dirGrid.find(cell);
        if (it == dirGrid.end())
            continue;
        for (auto& e : it->second) {
            if (e.grantee == ue) {
                e = GridEntry{};
                ++removed;
            }
        }
    }
    return removed;
}

std::optional<GridEntry> Binder::entry(TtiIndex tti, Direction dir, NodeId cell, int rb) const
{
    const auto& grid = gridFor(tti)[dirIndex(dir)];
    auto it = grid.find(cell);
    if (it == grid.end() || rb < 0 || rb >= numRbs_ || it->second[rb].transmitter == kNoNode)
        return std::nullopt;
    return it->second[rb];
}

std::vector<CoChannelTransmitter> Binder::coChannelTransmitters(TtiIndex tti, Direction dir, int rb,
                                                                NodeId excludingCell) const
{
    std::vector<CoChannelTransmitter> out;
    if (rb < 0 || rb >= numRbs_)
        return out;
    for (const auto& [cell, rbs] : gridFor(tti)[dirIndex(dir)]) {
        if (cell == excludingCell)
            continue;
        const NodeId tx = rbs[rb].transmitter;
        if (tx == kNoNode)
            continue;
        const auto& rec = node(tx);
        out.push_back({tx, cell, rec.txPowerDbm, rec.position});
    }
    return out;
}

std::vector<GridCell> Binder::gridEntries(TtiIndex tti, Direction dir) const
{
    std::vector<GridCell> out;
    for (const auto& [cell, rbs] : gridFor(tti)[dirIndex(dir)]) {
        for (int rb = 0; rb < numRbs_; ++rb) {
            if (rbs[rb].transmitter != kNoNode)
                out.push_back({cell, rb, rbs[rb]});
        }
    }
    return out;
}

std::size_t Binder::allocatedCount(TtiIndex tti, Direction dir, NodeId cell) const
{
    const auto& grid = gridFor(tti)[dirIndex(dir)];
    auto it = grid.find(cell);
    if (it == grid.end())
        return 0;
    return static_cast<std::size_t>(std::count_if(it->second.begin(), it->second.end(),
                                                  [](const GridEntry& e) { return e.transmitter != kNoNode; }));
}

} // namespace vlsim
