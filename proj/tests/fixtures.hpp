#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "vlsim/config.hpp"
#include "vlsim/mobility.hpp"
#include "vlsim/scenario.hpp"

namespace fixtures {

/// Straight constant-speed run from x0 to x1 at height y, sampled every `step` seconds.
inline vlsim::Trajectory straightRun(const std::string& name, double t0, double t1, double x0, double x1,
                                     double y = 0.0, double step = 1.0)
{
    std::vector<vlsim::TrajectorySample> samples;
    const int n = static_cast<int>(std::llround((t1 - t0) / step));
    for (int i = 0; i <= n; ++i) {
        const double f = static_cast<double>(i) / n;
        samples.push_back({vlsim::SimTime::fromSeconds(t0 + i * step), {x0 + f * (x1 - x0), y}});
    }
    return vlsim::Trajectory(name, std::move(samples));
}

inline vlsim::Trajectory parked(const std::string& name, double t0, double t1, vlsim::Position p)
{
    return vlsim::Trajectory(name, {{vlsim::SimTime::fromSeconds(t0), p}, {vlsim::SimTime::fromSeconds(t1), p}});
}

/// Two 46 dBm eNBs at (0, 0) and (1000, 0).
inline vlsim::ScenarioConfig twoCells(double simEndS)
{
    vlsim::ScenarioConfig cfg;
    cfg.simEnd = vlsim::SimTime::fromSeconds(simEndS);
    cfg.enbs = {{"enb0", {0, 0}, 46.0}, {"enb1", {1000, 0}, 46.0}};
    cfg.dynamicCellAssociation = true;
    return cfg;
}

inline vlsim::FlowSpec flow(vlsim::Direction dir, const std::string& target, std::int64_t bits, double intervalMs,
                            double startS, double stopS)
{
    vlsim::FlowSpec f;
    f.direction = dir;
    f.target = target;
    f.packetBits = bits;
    f.interval = vlsim::SimTime::fromSeconds(intervalMs / 1000.0);
    f.start = vlsim::SimTime::fromSeconds(startS);
    f.stop = vlsim::SimTime::fromSeconds(stopS);
    return f;
}

inline void writeTrace(const std::filesystem::path& path, const std::vector<vlsim::Trajectory>& trajs)
{
    std::ofstream out(path);
    out.precision(17);
    out << "time_s,vehicle,x_m,y_m\n";
    for (const auto& t : trajs) {
        for (const auto& s : t.samples())
            out << s.time.seconds() << ',' << t.vehicle() << ',' << s.position.x << ',' << s.position.y << '\n';
    }
}

inline std::int64_t unaccounted(const vlsim::VehicleMetrics& m)
{
    return m.bitsOffered - (m.bitsDelivered + m.bitsDroppedRadio + m.bitsDroppedHandover + m.bitsLostCore +
                            m.bitsResidual);
}

} // namespace fixtures
