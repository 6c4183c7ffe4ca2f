#include "guiding/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace guiding::io {

std::string format_time(double t) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9f", t);
    return buf;
}

std::string format_value(double v) {
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, result.ptr);
}

json topology_to_json(const NetworkTopology& topology) {
    json edges = json::array();
    for (const Edge& e : topology.edges()) edges.push_back({e.target, e.source, e.weight});
    return json{{"num_users", topology.num_users()}, {"edges", edges}};
}

NetworkTopology topology_from_json(const json& j, bool allow_self_loops) {
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
        edges.push_back(Edge{e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<double>()});
    }
    return NetworkTopology::from_edges(std::move(edges), j.at("num_users").get<int>(),
                                       allow_self_loops);
}

std::string event_log_to_csv(const EventLog& log) {
    std::ostringstream os;
    os << "t,user\n";
    for (const Event& e : log.events) os << format_time(e.t) << "," << e.user << "\n";
    return os.str();
}

EventLog event_log_from_csv(const std::string& csv, double t0, double t1) {
    EventLog log;
    log.t0 = t0;
    log.t1 = t1;
    std::istringstream is(csv);
    std::string line;
    if (!std::getline(is, line) || line != "t,user")
        throw std::invalid_argument("event_log_from_csv: missing `t,user` header");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("event_log_from_csv: malformed row: " + line);
        log.events.push_back(
            Event{std::stod(line.substr(0, comma)), std::stoi(line.substr(comma + 1))});
    }
    return log;
}

std::string trajectory_to_csv(const Trajectory& traj) {
    std::ostringstream os;
    os << "t,user,x,u\n";
    for (int k = 0; k < traj.grid.size(); ++k) {
        const std::string t = format_time(traj.grid.point(k));
        for (int i = 0; i < traj.x.cols(); ++i) {
            os << t << "," << i << "," << format_value(traj.x(k, i)) << ","
               << format_value(traj.u(k, i)) << "\n";
        }
    }
    return os.str();
}

json cost_breakdown_to_json(const CostBreakdown& cost) {
    return json{{"state_cost", cost.state_cost},
                {"control_cost", cost.control_cost},
                {"terminal_cost", cost.terminal_cost},
                {"total", cost.total}};
}

json monte_carlo_cost_to_json(const MonteCarloCost& mc) {
    json runs = json::array();
    for (const CostBreakdown& c : mc.runs) runs.push_back(cost_breakdown_to_json(c));
    return json{{"n_runs", mc.runs.size()},
                {"mean", mc.mean},
                {"variance", mc.variance},
                {"variance_defined", mc.variance_defined},
                {"runs", runs}};
}

json value_coefficients_to_json(const ValueCoefficients& coeffs) {
    json j;
    j["kind"] = to_string(coeffs.kind);
    j["grid"] = {{"t0", coeffs.grid.t0}, {"t1", coeffs.grid.t1}, {"steps", coeffs.grid.steps}};
    j["v0"] = coeffs.v0;
    json v1 = json::array();
    for (int k = 0; k < coeffs.v1.rows(); ++k) {
        json row = json::array();
        for (int i = 0; i < coeffs.v1.cols(); ++i) row.push_back(coeffs.v1(k, i));
        v1.push_back(row);
    }
    j["v1"] = v1;
    if (coeffs.kind == ObjectiveKind::LSOG) {
        json v11 = json::array();
        for (const Mat& m : coeffs.v11) {
            json tri = json::array();
            for (int r = 0; r < m.rows(); ++r) {
                json row = json::array();
                for (int c = 0; c <= r; ++c) row.push_back(m(r, c));
                tri.push_back(row);
            }
            v11.push_back(tri);
        }
        j["v11"] = v11;
    }
    return j;
}

ValueCoefficients value_coefficients_from_json(const json& j) {
    ValueCoefficients out;
    out.kind = objective_kind_from_string(j.at("kind").get<std::string>());
    out.grid = TimeGrid::uniform(j.at("grid").at("t0").get<double>(),
                                 j.at("grid").at("t1").get<double>(),
                                 j.at("grid").at("steps").get<int>());
    out.v0 = j.at("v0").get<std::vector<double>>();
    const auto& v1 = j.at("v1");
    const int rows = static_cast<int>(v1.size());
    const int n = rows > 0 ? static_cast<int>(v1.at(0).size()) : 0;
    out.v1 = Mat::Zero(rows, n);
    for (int k = 0; k < rows; ++k)
        for (int i = 0; i < n; ++i) out.v1(k, i) = v1.at(k).at(i).get<double>();
    if (out.kind == ObjectiveKind::LSOG) {
        for (const auto& tri : j.at("v11")) {
            Mat m = Mat::Zero(n, n);
            for (int r = 0; r < n; ++r)
                for (int c = 0; c <= r; ++c) m(r, c) = m(c, r) = tri.at(r).at(c).get<double>();
            out.v11.push_back(std::move(m));
        }
    }
    return out;
}

std::string link_events_to_csv(const LinkEvents& events) {
    std::ostringstream os;
    os << "t,source,target\n";
    for (const LinkEvent& e : events.records)
        os << format_time(e.t) << "," << e.source << "," << e.target << "\n";
    return os.str();
}

LinkEvents link_events_from_csv(const std::string& csv, double t0, double t1) {
    LinkEvents out;
    out.t0 = t0;
    out.t1 = t1;
    std::istringstream is(csv);
    std::string line;
    if (!std::getline(is, line) || line != "t,source,target")
        throw std::invalid_argument("link_events_from_csv: missing `t,source,target` header");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw std::invalid_argument("link_events_from_csv: malformed row: " + line);
        out.records.push_back(LinkEvent{std::stod(line.substr(0, c1)),
                                        std::stoi(line.substr(c1 + 1, c2 - c1 - 1)),
                                        std::stoi(line.substr(c2 + 1))});
    }
    return out;
}

json gamma_fit_to_json(const GammaFit& fit) {
    json gamma = json::array();
    for (int i = 0; i < fit.gamma.size(); ++i) gamma.push_back(fit.gamma(i));
    return json{{"gamma", gamma}, {"loglik", fit.loglik}, {"n_events", fit.n_events}};
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_file: cannot open " + path);
    out << contents;
    if (!out) throw std::runtime_error("write_file: failed writing " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_file: cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace guiding::io
