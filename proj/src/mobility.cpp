#include "vlsim/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace vlsim {

Trajectory::Trajectory(std::string vehicle, std::vector<TrajectorySample> samples)
    : vehicle_(std::move(vehicle)), samples_(std::move(samples))
{
    if (samples_.empty())
        throw ContractError("trajectory of " + vehicle_ + " has no samples");
    for (std::size_t i = 1; i < samples_.size(); ++i) {
        if (samples_[i].time <= samples_[i - 1].time)
            throw ContractError("trajectory of " + vehicle_ + " is not strictly increasing in time");
    }
}

Position Trajectory::positionAt(SimTime t) const
{
    if (!covers(t)) {
        std::ostringstream os;
        os << vehicle_ << ": t = " << t.seconds() << " s outside lifetime [" << enterTime().seconds()
           << ", " << leaveTime().seconds() << "] s";
        throw OutOfLifetimeError(os.str());
    }
    auto hi = std::lower_bound(samples_.begin(), samples_.end(), t,
                               [](const TrajectorySample& s, SimTime v) { return s.time < v; });
    if (hi->time == t)
        return hi->position;
    auto lo = std::prev(hi);
    const double f = static_cast<double>((t - lo->time).micros()) /
                     static_cast<double>((hi->time - lo->time).micros());
    return {lo->position.x + f * (hi->position.x - lo->position.x),
            lo->position.y + f * (hi->position.y - lo->position.y)};
}

double Trajectory::pathLength() const
{
    double total = 0.0;
    for (std::size_t i = 1; i < samples_.size(); ++i)
        total += distance(samples_[i - 1].position, samples_[i].position);
    return total;
}

namespace {

std::string describeLine(std::size_t line, const std::string& what)
{
    return "trace line " + std::to_string(line) + ": " + what;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parseNumber(const std::string& field, std::size_t line, const char* column)
{
    try {
        std::size_t used = 0;
        double v = std::stod(field, &used);
        if (used != field.size() || !std::isfinite(v))
            throw std::invalid_argument(field);
        return v;
    }
    catch (const std::logic_error&) {
        throw TraceParseError(line, std::string("bad ") + column + " value '" + field + "'");
    }
}

} // namespace

TraceParseError::TraceParseError(std::size_t line, const std::string& what)
    : Error(describeLine(line, what)), line_(line)
{
}

std::vector<Trajectory> parseTrace(std::istream& in)
{
    std::map<std::string, std::vector<TrajectorySample>> byVehicle;
    std::map<std::string, std::size_t> lastLine;
    std::string raw;
    std::size_t lineNo = 0;
    bool headerSeen = false;

    while (std::getline(in, raw)) {
        ++lineNo;
        const std::string line = trim(raw);
        if (line.empty())
            continue;
        if (!headerSeen) {
            headerSeen = true;
            if (line != "time_s,vehicle,x_m,y_m")
                throw TraceParseError(lineNo, "expected header 'time_s,vehicle,x_m,y_m'");
            continue;
        }

        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ','))
            fields.push_back(trim(field));
        if (fields.size() != 4)
            throw TraceParseError(lineNo, "expected 4 fields, got " + std::to_string(fields.size()));
        if (fields[1].empty())
            throw TraceParseError(lineNo, "empty vehicle name");

        const double t = parseNumber(fields[0], lineNo, "time_s");
        if (t < 0)
            throw TraceParseError(lineNo, "negative time");
        TrajectorySample sample{SimTime::fromSeconds(t),
                                {parseNumber(fields[2], lineNo, "x_m"), parseNumber(fields[3], lineNo, "y_m")}};
        auto& samples = byVehicle[fields[1]];
        if (!samples.empty() && sample.time <= samples.back().time) {
            throw TraceParseError(lineNo, "timestamps for " + fields[1] +
                                              " not strictly increasing (previous row at line " +
                                              std::to_string(lastLine[fields[1]]) + ")");
        }
        samples.push_back(sample);
        lastLine[fields[1]] = lineNo;
    }

    std::vector<Trajectory> out;
    out.reserve(byVehicle.size());
    for (auto& [name, samples] : byVehicle)
        out.emplace_back(name, std::move(samples));
    return out;
}

std::vector<Trajectory> loadTrace(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open trace file " + path);
    return parseTrace(in);
}

Trajectory applyAccident(const Trajectory& traj, const AccidentSpec& spec)
{
    if (spec.count == 0)
        return traj;
    if (spec.count != 1)
        throw ContractError("only a single accident per vehicle is supported");
    if (spec.duration <= SimTime{})
        throw ContractError("accident duration must be positive");

    const SimTime stopAt = traj.enterTime() + spec.start;
    if (stopAt > traj.leaveTime()) {
        std::clog << "warning: accident of " << traj.vehicle() << " at " << stopAt.seconds()
                  << " s begins after its leave time; ignored\n";
        return traj;
    }

    const Position frozen = traj.positionAt(stopAt);
    std::vector<TrajectorySample> out;
    for (const auto& s : traj.samples()) {
        if (s.time < stopAt)
            out.push_back(s);
    }
    out.push_back({stopAt, frozen});
    out.push_back({stopAt + spec.duration, frozen});
    for (const auto& s : traj.samples()) {
        if (s.time > stopAt)
            out.push_back({s.time + spec.duration, s.position});
    }
    return Trajectory(traj.vehicle(), std::move(out));
}

std::vector<SimEvent> lifecycleEvents(const std::vector<Trajectory>& trajs)
{
    std::vector<SimEvent> events;
    events.reserve(2 * trajs.size());
    for (const auto& t : trajs) {
        events.push_back({t.enterTime(), 0, EventKind::VEHICLE_ENTER, VehiclePayload{t.vehicle()}});
        events.push_back({t.leaveTime(), 0, EventKind::VEHICLE_LEAVE, VehiclePayload{t.vehicle()}});
    }
    // stable: a single-sample vehicle enters before it leaves
    std::stable_sort(events.begin(), events.end(), [](const SimEvent& a, const SimEvent& b) {
        const auto& na = std::get<VehiclePayload>(a.payload).vehicle;
        const auto& nb = std::get<VehiclePayload>(b.payload).vehicle;
        if (a.fireTime != b.fireTime)
            return a.fireTime < b.fireTime;
        return na < nb;
    });
    return events;
}

} // namespace vlsim
