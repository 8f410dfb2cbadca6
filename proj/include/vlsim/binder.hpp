#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vlsim/types.hpp"

namespace vlsim {

struct NodeRecord
{
    NodeId id = kNoNode;
    NodeKind kind = NodeKind::UE;
    std::string name;
    std::uint32_t address = 0;
    double txPowerDbm = 0.0;
    Position position;
    NodeId servingCell = kNoNode; // UE only
};

class BinderError : public Error
{
  public:
    using Error::Error;
};

/// Raised when an RB is allocated twice within one cell, direction and TTI.
class LedgerConflictError : public BinderError
{
  public:
    using BinderError::BinderError;
};

/// One occupied RB: who transmits on it and on whose behalf.
struct GridEntry
{
    NodeId transmitter = kNoNode;
    NodeId grantee = kNoNode; // the UE the RB was granted for
};

struct GridCell
{
    NodeId cell;
    int rb;
    GridEntry entry;
};

struct CoChannelTransmitter
{
    NodeId node;
    NodeId cell;
    double txPowerDbm;
    Position position;
};

/**
 * Global registry of live nodes plus the per-TTI resource-block ledger.
 *
 * Node ids and addresses come from monotonic counters starting at 1 and are
 * never reused. The ledger keeps the current TTI and one TTI of history.
 */
class Binder
{
  public:
    explicit Binder(int numRbs = 50);

    int numRbs() const { return numRbs_; }

    const NodeRecord& registerNode(NodeKind kind, const std::string& name, double txPowerDbm,
                                   Position position = {});
    void deregisterNode(NodeId id);

    bool isLive(NodeId id) const { return nodes_.count(id) > 0; }
    const NodeRecord& node(NodeId id) const;
    std::optional<NodeId> findByName(const std::string& name) const;

    /// Live node ids in ascending order.
    std::vector<NodeId> liveNodes() const;
    std::vector<NodeId> enbs() const;
    std::vector<NodeId> ues() const;
    std::vector<NodeId> uesServedBy(NodeId cell) const;

    void setPosition(NodeId id, Position p);
    void setServingCell(NodeId ue, NodeId cell);

    TtiIndex currentTti() const { return currentTti_; }
    void advanceTti(TtiIndex next);

    /// All-or-nothing: either every RB in `rbs` is recorded or none is.
    void recordAllocation(TtiIndex tti, Direction dir, NodeId cell, const std::vector<int>& rbs,
                          NodeId transmitter, NodeId grantee = kNoNode);

    /// Drops this TTI's entries granted to `ue` in `cell`; returns how many were removed.
    std::size_t revokeGrants(NodeId ue, NodeId cell);

    std::optional<GridEntry> entry(TtiIndex tti, Direction dir, NodeId cell, int rb) const;

    /// Every transmitter on `rb` in any cell other than `excludingCell`.
    std::vector<CoChannelTransmitter> coChannelTransmitters(TtiIndex tti, Direction dir, int rb,
                                                            NodeId excludingCell) const;

    /// Full scan of one TTI's ledger, ordered by (cell, rb).
    std::vector<GridCell> gridEntries(TtiIndex tti, Direction dir) const;

    std::size_t allocatedCount(TtiIndex tti, Direction dir, NodeId cell) const;

  private:
    using CellGrid = std::vector<GridEntry>;              // index = rb
    using DirectionGrid = std::map<NodeId, CellGrid>;     // cell -> rbs
    using TtiGrid = std::array<DirectionGrid, 2>;         // DL, UL

    const TtiGrid& gridFor(TtiIndex tti) const;
    static std::size_t dirIndex(Direction d) { return d == Direction::DL ? 0 : 1; }
    void purge(TtiGrid& grid, NodeId id);

    int numRbs_;
    std::map<NodeId, NodeRecord> nodes_;
    std::map<std::string, NodeId> names_;
    NodeId nextId_ = 1;
    std::uint32_t nextAddress_ = 1;
    TtiIndex currentTti_ = 0;
    TtiGrid current_;
    TtiGrid previous_;
    bool hasPrevious_ = false;
};

} // namespace vlsim
