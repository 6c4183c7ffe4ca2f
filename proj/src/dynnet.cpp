#include "guiding/dynnet.hpp"

#include "guiding/rng.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace guiding {

std::optional<double> LinkCreationModel::control_start_of(int node) const {
    if (birth_times.empty()) return std::nullopt;
    if (node < 0 || node >= num_users)
        throw std::invalid_argument("control_start_of: node index out of range");
    const double t = birth_times[static_cast<std::size_t>(node)];
    if (t <= 0.0) return std::nullopt;
    return t;
}

void LinkCreationModel::validate() const {
    if (num_users <= 0) throw std::invalid_argument("LinkCreationModel: num_users must be positive");
    if (gamma.size() != num_users)
        throw std::invalid_argument("LinkCreationModel: gamma length must equal num_users");
    if ((gamma.array() < 0.0).any())
        throw std::invalid_argument("LinkCreationModel: gamma must be nonnegative");
    if (static_cast<int>(candidates.size()) != num_users)
        throw std::invalid_argument("LinkCreationModel: candidate sets must cover every node");
    std::set<std::pair<int, int>> linked;
    for (const Edge& e : initial_edges) linked.insert({e.source, e.target});
    for (int i = 0; i < num_users; ++i) {
        for (int s : candidates[static_cast<std::size_t>(i)]) {
            if (s < 0 || s >= num_users)
                throw std::invalid_argument("LinkCreationModel: candidate target out of range");
            if (s == i) throw std::invalid_argument("LinkCreationModel: candidate set contains self");
            if (linked.count({i, s}))
                throw std::invalid_argument("LinkCreationModel: candidate duplicates an existing link");
        }
    }
}

LinkCreationModel make_link_model(int num_users, const Vec& gamma, std::vector<Edge> initial_edges,
                                  double nominal_weight) {
    LinkCreationModel model;
    model.num_users = num_users;
    model.gamma = gamma;
    model.initial_edges = std::move(initial_edges);
    model.nominal_weight = nominal_weight;
    std::set<std::pair<int, int>> linked;
    for (const Edge& e : model.initial_edges) linked.insert({e.source, e.target});
    model.candidates.assign(static_cast<std::size_t>(num_users), {});
    for (int i = 0; i < num_users; ++i) {
        for (int s = 0; s < num_users; ++s) {
            if (s == i || linked.count({i, s})) continue;
            model.candidates[static_cast<std::size_t>(i)].push_back(s);
        }
    }
    model.validate();
    return model;
}

LinkEvents simulate_link_creation(const LinkCreationModel& model, double t1, std::uint64_t seed) {
    model.validate();
    if (!(t1 > 0.0)) throw std::invalid_argument("simulate_link_creation: horizon must be positive");
    Rng rng = make_rng(derive_seed(seed, stream::events));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    LinkEvents out;
    out.t0 = 0.0;
    out.t1 = t1;
    for (int i = 0; i < model.num_users; ++i) {
        const double g = model.gamma(i);
        for (int s : model.candidates[static_cast<std::size_t>(i)]) {
            if (g <= 0.0) continue;
            const double wait = -std::log(1.0 - unif(rng)) / g;
            if (wait < t1) out.records.push_back(LinkEvent{wait, i, s});
        }
    }
    std::sort(out.records.begin(), out.records.end(),
              [](const LinkEvent& a, const LinkEvent& b) { return a.t < b.t; });
    return out;
}

GammaFit fit_gamma(const LinkEvents& events, const LinkCreationModel& skeleton, double t1) {
    skeleton.validate();
    const int n = skeleton.num_users;

    std::vector<std::set<int>> cand(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        cand[static_cast<std::size_t>(i)] = {skeleton.candidates[static_cast<std::size_t>(i)].begin(),
                                             skeleton.candidates[static_cast<std::size_t>(i)].end()};

    std::vector<int> n_links(static_cast<std::size_t>(n), 0);
    std::vector<double> risk(static_cast<std::size_t>(n), 0.0);
    std::set<std::pair<int, int>> linked_at; // pairs observed to link
    std::vector<std::vector<std::pair<int, double>>> link_time(static_cast<std::size_t>(n));
    for (const LinkEvent& e : events.records) {
        if (e.source < 0 || e.source >= n || !cand[static_cast<std::size_t>(e.source)].count(e.target))
            throw std::invalid_argument("fit_gamma: event pair not in the candidate set");
        if (!linked_at.insert({e.source, e.target}).second)
            throw std::invalid_argument("fit_gamma: repeated link for one pair");
        n_links[static_cast<std::size_t>(e.source)] += 1;
        link_time[static_cast<std::size_t>(e.source)].emplace_back(e.target, e.t);
    }

    for (int i = 0; i < n; ++i) {
        double r = 0.0;
        std::set<int> remaining = cand[static_cast<std::size_t>(i)];
        for (const auto& [s, t] : link_time[static_cast<std::size_t>(i)]) {
            r += t - events.t0;
            remaining.erase(s);
        }
        r += static_cast<double>(remaining.size()) * (t1 - events.t0);
        risk[static_cast<std::size_t>(i)] = r;
    }

    GammaFit fit;
    fit.gamma = Vec::Zero(n);
    fit.n_events = static_cast<int>(events.records.size());
    for (int i = 0; i < n; ++i) {
        const int k = n_links[static_cast<std::size_t>(i)];
        const double r = risk[static_cast<std::size_t>(i)];
        if (k > 0 && r <= 0.0) {
            std::ostringstream os;
            os << "fit_gamma: node " << i << " has " << k << " links but zero at-risk time";
            throw std::invalid_argument(os.str());
        }
        if (k > 0) {
            fit.gamma(i) = k / r;
            fit.loglik += k * std::log(fit.gamma(i)) - fit.gamma(i) * r;
        }
    }
    return fit;
}

Mat expected_adjacency(const LinkCreationModel& model, double t) {
    model.validate();
    if (t < 0.0) throw std::invalid_argument("expected_adjacency: t must be nonnegative");
    const int n = model.num_users;
    Mat out = Mat::Zero(n, n);
    for (const Edge& e : model.initial_edges) out(e.target, e.source) = e.weight;
    for (int i = 0; i < n; ++i) {
        const double p = 1.0 - std::exp(-model.gamma(i) * t);
        if (p == 0.0) continue;
        // link i -> s carries the influence of i on s: entry (s, i)
        for (int s : model.candidates[static_cast<std::size_t>(i)])
            out(s, i) = p * model.nominal_weight;
    }
    return out;
}

std::pair<LinkEvents, LinkCreationModel> node_birth_to_links(
    const std::vector<BirthEvent>& births, int u_max, const Vec& gamma,
    std::vector<Edge> initial_edges, double nominal_weight, double t1) {
    LinkEvents events;
    events.t0 = 0.0;
    events.t1 = t1;
    double last = -std::numeric_limits<double>::infinity();
    std::vector<double> birth_times(static_cast<std::size_t>(u_max), 0.0);
    for (const BirthEvent& b : births) {
        if (b.node < 0 || b.node >= u_max) {
            std::ostringstream os;
            os << "node_birth_to_links: node " << b.node << " outside [0, " << u_max << ")";
            throw std::invalid_argument(os.str());
        }
        if (b.t < last)
            throw std::invalid_argument("node_birth_to_links: birth times must be nondecreasing");
        last = b.t;
        events.records.push_back(LinkEvent{b.t, b.node, b.target});
        birth_times[static_cast<std::size_t>(b.node)] = b.t;
    }

    LinkCreationModel model = make_link_model(u_max, gamma, std::move(initial_edges), nominal_weight);
    model.birth_times = std::move(birth_times);
    return {std::move(events), std::move(model)};
}

} // namespace guiding
