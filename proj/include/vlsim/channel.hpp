#pragma once

#include <array>
#include <map>
#include <memory>
#include <random>
#include <vector>

#include "vlsim/binder.hpp"
#include "vlsim/types.hpp"

namespace vlsim {

struct ChannelParams
{
    double pathlossA = 128.1;      // dB at 1 km
    double pathlossB = 37.6;       // dB per decade
    double minDistance = 35.0;     // m
    double noiseFigure = 9.0;      // dB
    double rbBandwidth = 180e3;    // Hz
    bool shadowingEnabled = false;
    double shadowingSigma = 8.0;   // dB

    void validate() const;
    bool operator==(const ChannelParams&) const = default;
};

/// CQI link-adaptation tables; index k-1 holds the entry for CQI k.
struct CqiTables
{
    std::array<double, 15> sinrThresholds;
    std::array<double, 15> efficiency;
    std::array<int, 15> bitsPerRb;

    static CqiTables standard();

    /// bits per RB = floor(efficiency * 144 resource elements)
    static std::array<int, 15> bitsFromEfficiency(const std::array<double, 15>& efficiency);

    double threshold(int cqi) const { return sinrThresholds.at(static_cast<std::size_t>(cqi - 1)); }

    void validate() const;
    bool operator==(const CqiTables&) const = default;
};

class PathLossModel
{
  public:
    virtual ~PathLossModel() = default;
    virtual double loss(double distanceM) const = 0;
};

/// PL = A + B log10(max(d, d_min) / 1 km)
class LogDistancePathLoss final : public PathLossModel
{
  public:
    explicit LogDistancePathLoss(const ChannelParams& params);
    double loss(double distanceM) const override;

  private:
    double a_;
    double b_;
    double minDistance_;
};

double pathLoss(double distanceM, const ChannelParams& params);

/// Thermal noise over one RB plus the receiver noise figure.
double noisePowerDbm(const ChannelParams& params);

int cqiFromSinr(double meanSinrDb, const CqiTables& tables);
bool decode(const std::vector<double>& perRbSinrDb, int cqiUsed, const CqiTables& tables);
int bitsPerRb(int cqi, const CqiTables& tables);

/// Linear-domain mean of dB values, returned in dB.
double linearMeanDb(const std::vector<double>& valuesDb);

/**
 * Radio abstraction over the Binder's registry and RB ledger. Holds the
 * per-pair shadowing draws, which stay fixed for the run and are symmetric
 * in (tx, rx) so UL and DL see the same channel.
 */
class Channel
{
  public:
    Channel(ChannelParams params, CqiTables tables, std::mt19937_64* rng = nullptr,
            std::unique_ptr<PathLossModel> model = nullptr);

    const ChannelParams& params() const { return params_; }
    const CqiTables& tables() const { return tables_; }

    /// tx power minus path loss, no shadowing.
    double receivedPower(double txPowerDbm, const Position& tx, const Position& rx) const;

    /// Including the shadowing draw for the (tx, rx) node pair when enabled.
    double receivedPower(const NodeRecord& tx, const NodeRecord& rx) const;

    double receivedPower(NodeId tx, const Position& txPos, double txPowerDbm, NodeId rx,
                         const Position& rxPos) const;

    /// Per-RB SINR of the transmission between `ue` and `servingCell` on `rbs` in TTI `tti`.
    std::vector<double> sinr(const Binder& binder, NodeId ue, NodeId servingCell, TtiIndex tti,
                             Direction dir, const std::vector<int>& rbs) const;

    /// Wideband SINR estimate over all RBs, with interference taken from `tti`'s ledger.
    std::vector<double> widebandSinr(const Binder& binder, NodeId ue, NodeId servingCell,
                                     std::optional<TtiIndex> tti, Direction dir) const;

    double noiseDbm() const { return noiseDbm_; }

  private:
    double shadowing(NodeId a, NodeId b) const;
    double sinrOnRb(const Binder& binder, const NodeRecord& tx, const NodeRecord& rx, NodeId cell,
                    std::optional<TtiIndex> tti, Direction dir, int rb) const;

    ChannelParams params_;
    CqiTables tables_;
    std::unique_ptr<PathLossModel> model_;
    std::mt19937_64* rng_;
    double noiseDbm_;
    mutable std::map<std::pair<NodeId, NodeId>, double> shadow_;
};

} // namespace vlsim
