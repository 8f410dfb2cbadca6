#include "vlsim/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vlsim {

void ChannelParams::validate() const
{
    if (!(pathlossB > 0))
        throw ConfigError("channel.pathlossB must be positive");
    if (!(minDistance > 0))
        throw ConfigError("channel.minDistance must be positive");
    if (!(rbBandwidth > 0))
        throw ConfigError("channel.rbBandwidth must be positive");
    if (shadowingSigma < 0)
        throw ConfigError("channel.shadowingSigma must be non-negative");
}

CqiTables CqiTables::standard()
{
    CqiTables t;
    t.sinrThresholds = {-6.7, -4.7, -2.3, 0.2, 2.4, 4.3, 5.9, 8.1, 10.3, 11.7, 14.1, 16.3, 18.7, 21.0, 22.7};
    t.efficiency = {0.1523, 0.2344, 0.3770, 0.6016, 0.8770, 1.1758, 1.4766, 1.9141,
                    2.4063, 2.7305, 3.3223, 3.9023, 4.5234, 5.1152, 5.5547};
    t.bitsPerRb = bitsFromEfficiency(t.efficiency);
    return t;
}

std::array<int, 15> CqiTables::bitsFromEfficiency(const std::array<double, 15>& efficiency)
{
    std::array<int, 15> bits{};
    for (std::size_t i = 0; i < efficiency.size(); ++i)
        bits[i] = static_cast<int>(std::floor(efficiency[i] * 144.0));
    return bits;
}

void CqiTables::validate() const
{
    for (std::size_t i = 1; i < 15; ++i) {
        if (!(sinrThresholds[i] > sinrThresholds[i - 1]))
            throw ConfigError("CQI SINR thresholds must be strictly ascending");
        if (!(bitsPerRb[i] > bitsPerRb[i - 1]))
            throw ConfigError("CQI bits-per-RB table must be strictly ascending");
    }
    if (bitsPerRb[0] <= 0)
        throw ConfigError("CQI bits-per-RB entries must be positive");
}

LogDistancePathLoss::LogDistancePathLoss(const ChannelParams& params)
    : a_(params.pathlossA), b_(params.pathlossB), minDistance_(params.minDistance)
{
}

double LogDistancePathLoss::loss(double distanceM) const
{
    return a_ + b_ * std::log10(std::max(distanceM, minDistance_) / 1000.0);
}

double pathLoss(double distanceM, const ChannelParams& params)
{
    return LogDistancePathLoss(params).loss(distanceM);
}

double noisePowerDbm(const ChannelParams& params)
{
    return -174.0 + 10.0 * std::log10(params.rbBandwidth) + params.noiseFigure;
}

int cqiFromSinr(double meanSinrDb, const CqiTables& tables)
{
    int cqi = 0;
    for (int k = 1; k <= 15; ++k) {
        if (meanSinrDb >= tables.threshold(k))
            cqi = k;
    }
    return cqi;
}

double linearMeanDb(const std::vector<double>& valuesDb)
{
    if (valuesDb.empty())
        throw ContractError("mean of an empty SINR list");
    double sum = 0.0;
    for (double v : valuesDb)
        sum += dbmToMw(v);
    return mwToDbm(sum / static_cast<double>(valuesDb.size()));
}

bool decode(const std::vector<double>& perRbSinrDb, int cqiUsed, const CqiTables& tables)
{
    if (cqiUsed < 1 || cqiUsed > 15)
        throw ContractError("decode requires a CQI in 1..15");
    return linearMeanDb(perRbSinrDb) >= tables.threshold(cqiUsed);
}

int bitsPerRb(int cqi, const CqiTables& tables)
{
    if (cqi < 1 || cqi > 15)
        throw ContractError("CQI " + std::to_string(cqi) + " carries no data");
    return tables.bitsPerRb[static_cast<std::size_t>(cqi - 1)];
}

Channel::Channel(ChannelParams params, CqiTables tables, std::mt19937_64* rng,
                 std::unique_ptr<PathLossModel> model)
    : params_(params), tables_(tables), model_(std::move(model)), rng_(rng),
      noiseDbm_(noisePowerDbm(params))
{
    params_.validate();
    tables_.validate();
    if (!model_)
        model_ = std::make_unique<LogDistancePathLoss>(params_);
    if (params_.shadowingEnabled && rng_ == nullptr)
        throw ContractError("shadowing requires a random generator");
}

double Channel::receivedPower(double txPowerDbm, const Position& tx, const Position& rx) const
{
    return txPowerDbm - model_->loss(distance(tx, rx));
}

double Channel::shadowing(NodeId a, NodeId b) const
{
    if (!params_.shadowingEnabled)
        return 0.0;
    const auto key = std::minmax(a, b);
    auto it = shadow_.find(key);
    if (it != shadow_.end())
        return it->second;
    std::normal_distribution<double> draw(0.0, params_.shadowingSigma);
    const double v = draw(*rng_);
    shadow_.emplace(key, v);
    return v;
}

double Channel::receivedPower(NodeId tx, const Position& txPos, double txPowerDbm, NodeId rx,
                              const Position& rxPos) const
{
    return receivedPower(txPowerDbm, txPos, rxPos) - shadowing(tx, rx);
}

double Channel::receivedPower(const NodeRecord& tx, const NodeRecord& rx) const
{
    return receivedPower(tx.id, tx.position, tx.txPowerDbm, rx.id, rx.position);
}

double Channel::sinrOnRb(const Binder& binder, const NodeRecord& tx, const NodeRecord& rx, NodeId cell,
                         std::optional<TtiIndex> tti, Direction dir, int rb) const
{
    const double signal = dbmToMw(receivedPower(tx, rx));
    double denom = dbmToMw(noiseDbm_);
    if (tti) {
        for (const auto& i : binder.coChannelTransmitters(*tti, dir, rb, cell))
            denom += dbmToMw(receivedPower(i.node, i.position, i.txPowerDbm, rx.id, rx.position));
    }
    return mwToDbm(signal / denom);
}

std::vector<double> Channel::sinr(const Binder& binder, NodeId ue, NodeId servingCell, TtiIndex tti,
                                  Direction dir, const std::vector<int>& rbs) const
{
    const NodeRecord& ueRec = binder.node(ue);
    const NodeRecord& cellRec = binder.node(servingCell);
    const NodeRecord& tx = dir == Direction::DL ? cellRec : ueRec;
    const NodeRecord& rx = dir == Direction::DL ? ueRec : cellRec;

    std::vector<double> out;
    out.reserve(rbs.size());
    for (int rb : rbs) {
        const auto e = binder.entry(tti, dir, servingCell, rb);
        if (!e || e->transmitter != tx.id) {
            throw ContractError("RB " + std::to_string(rb) + " of cell " + std::to_string(servingCell) +
                                " is not allocated to node " + std::to_string(tx.id));
        }
        out.push_back(sinrOnRb(binder, tx, rx, servingCell, tti, dir, rb));
    }
    return out;
}

std::vector<double> Channel::widebandSinr(const Binder& binder, NodeId ue, NodeId servingCell,
                                          std::optional<TtiIndex> tti, Direction dir) const
{
    const NodeRecord& ueRec = binder.node(ue);
    const NodeRecord& cellRec = binder.node(servingCell);
    const NodeRecord& tx = dir == Direction::DL ? cellRec : ueRec;
    const NodeRecord& rx = dir == Direction::DL ? ueRec : cellRec;

    std::vector<double> out(static_cast<std::size_t>(binder.numRbs()));
    for (int rb = 0; rb < binder.numRbs(); ++rb)
        out[rb] = sinrOnRb(binder, tx, rx, servingCell, tti, dir, rb);
    return out;
}

} // namespace vlsim
