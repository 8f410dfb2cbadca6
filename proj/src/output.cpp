#include <cstdio>
#include <fstream>
#include <sstream>

#include "vlsim/scenario.hpp"

namespace vlsim {

namespace {

std::string fixed(double v, int digits)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string seconds(SimTime t) { return fixed(t.seconds(), 6); }

void writeAtomically(const std::filesystem::path& path, const std::string& content)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out)
            throw Error("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec)
        throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

} // namespace

std::string vehiclesCsv(const MetricsReport& report)
{
    std::ostringstream os;
    os << "vehicle,enter_s,leave_s,bits_offered,bits_delivered,bits_dropped_radio,bits_dropped_handover,"
          "bits_lost_core,mean_latency_ms,max_latency_ms,handovers,first_cell,cell_timeline\n";
    for (const auto& v : report.vehicles) {
        os << v.name << ',' << seconds(v.enter) << ',' << (v.leave ? seconds(*v.leave) : "") << ','
           << v.bitsOffered << ',' << v.bitsDelivered << ',' << v.bitsDroppedRadio << ','
           << v.bitsDroppedHandover << ',' << v.bitsLostCore << ',' << fixed(v.meanLatencyMs(), 3) << ','
           << fixed(v.latencyMaxMs, 3) << ',' << v.handovers << ',' << report.cellName(v.firstCell) << ',';
        for (std::size_t i = 0; i < v.cellTimeline.size(); ++i) {
            if (i)
                os << ';';
            os << seconds(v.cellTimeline[i].first) << ':' << report.cellName(v.cellTimeline[i].second);
        }
        os << '\n';
    }
    return os.str();
}

std::string cellsCsv(const MetricsReport& report)
{
    std::ostringstream os;
    os << "cell,dir,rb_allocated,rb_capacity,utilization\n";
    for (const auto& c : report.cells) {
        for (std::size_t d = 0; d < 2; ++d) {
            const double util = c.rbCapacity ? static_cast<double>(c.rbAllocated[d]) / static_cast<double>(c.rbCapacity) : 0.0;
            os << c.name << ',' << (d == 0 ? "DL" : "UL") << ',' << c.rbAllocated[d] << ',' << c.rbCapacity
               << ',' << fixed(util, 6) << '\n';
        }
    }
    return os.str();
}

std::string runCsv(const MetricsReport& report)
{
    std::ostringstream os;
    os << "seed,sim_end_s,events,wall_ms\n";
    os << report.seed << ',' << seconds(report.simEnd) << ',' << report.events << ',' << fixed(report.wallMs, 3)
       << '\n';
    return os.str();
}

std::vector<std::filesystem::path> writeOutputs(const MetricsReport& report, const std::filesystem::path& outDir)
{
    std::error_code ec;
    std::filesystem::create_directories(outDir, ec);
    if (ec)
        throw Error("cannot create output directory " + outDir.string() + ": " + ec.message());

    std::vector<std::filesystem::path> written;
    auto emit = [&](const char* name, const std::string& content) {
        const auto path = outDir / name;
        writeAtomically(path, content);
        written.push_back(path);
    };
    emit("vehicles.csv", vehiclesCsv(report));
    emit("cells.csv", cellsCsv(report));
    emit("run.csv", runCsv(report));

    std::string log;
    for (const auto& line : report.eventLog)
        log += line + '\n';
    emit("events.log", log);

    bool anyPositions = false;
    std::ostringstream pos;
    pos << "time_s,vehicle,x_m,y_m\n";
    for (const auto& v : report.vehicles) {
        for (const auto& [t, p] : v.positions) {
            anyPositions = true;
            pos << seconds(t) << ',' << v.name << ',' << fixed(p.x, 3) << ',' << fixed(p.y, 3) << '\n';
        }
    }
    if (anyPositions)
        emit("positions.csv", pos.str());
    return written;
}

} // namespace vlsim
