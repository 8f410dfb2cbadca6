#pragma once

#include <optional>
#include <vector>

#include "vlsim/binder.hpp"
#include "vlsim/channel.hpp"
#include "vlsim/mac.hpp"

namespace vlsim {

enum class AssociationMode { DYNAMIC, MANUAL };

/// What DYNAMIC association maximizes.
enum class AssociationMetric { RX_POWER, SINR };

struct AssociationPolicy
{
    AssociationMode mode = AssociationMode::DYNAMIC;
    NodeId manualCell = kNoNode;
    AssociationMetric metric = AssociationMetric::RX_POWER;
};

struct HandoverConfig
{
    bool enabled = false;
    double hysteresisDb = 3.0;
    SimTime timeToTrigger = SimTime::fromMillis(256);

    bool operator==(const HandoverConfig&) const = default;
};

/// Time-to-trigger bookkeeping for one UE.
struct HandoverState
{
    std::optional<NodeId> candidate;
    std::optional<SimTime> conditionSince;
};

struct HandoverDecision
{
    NodeId ue;
    NodeId source;
    NodeId target;
    SimTime decidedAt;
};

class AssociationError : public Error
{
  public:
    using Error::Error;
};

/// Received power at `ue` from every live eNB, ascending by cell id.
std::vector<std::pair<NodeId, double>> measureCells(const Binder& binder, NodeId ue, const Channel& channel);

/**
 * Picks the serving cell of a freshly registered UE and records it in the
 * Binder. DYNAMIC takes the strongest cell (ties to the lowest id); MANUAL
 * uses the configured cell wherever the UE is.
 */
NodeId initialAssociation(Binder& binder, NodeId ue, const AssociationPolicy& policy, const Channel& channel);

/**
 * A3-style check: the strongest other cell must exceed the serving cell by
 * more than the hysteresis for at least the time-to-trigger. The clock
 * restarts when the candidate changes or the condition lapses.
 */
std::optional<HandoverDecision> handoverCheck(const Binder& binder, NodeId ue, SimTime now,
                                              const HandoverConfig& config, const Channel& channel,
                                              HandoverState& state);

struct HandoverResult
{
    bool executed = false;
    std::int64_t droppedBits = 0; // DL bits discarded at the old eNB
    std::size_t revokedRbs = 0;
};

/// Switches the UE to `target`; aborts (state reset by the caller) if the target is gone.
HandoverResult executeHandover(Binder& binder, Mac& mac, NodeId ue, NodeId target);

} // namespace vlsim
