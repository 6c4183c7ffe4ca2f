#pragma once

#include "guiding/network.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace guiding {

struct LinkEvent {
    double t = 0.0;
    int source = 0;
    int target = 0;
};

/// Link-creation records on [t0, t1); at most one per ordered pair.
struct LinkEvents {
    std::vector<LinkEvent> records;
    double t0 = 0.0;
    double t1 = 0.0;
};

/// Per-source-rate link-creation model: candidate pair (i, s) links at an
/// exponential(gamma_i) time; existing links and self-pairs are never candidates.
struct LinkCreationModel {
    int num_users = 0;
    Vec gamma;                                // per-node creation rate, >= 0
    std::vector<Edge> initial_edges;          // pre-existing links with weights
    std::vector<std::vector<int>> candidates; // per source, allowed targets
    double nominal_weight = 1.0;              // weight given to an expected new link
    std::optional<double> control_start_of(int node) const; // node-birth masking
    std::vector<double> birth_times;          // empty = all controllable from t0

    void validate() const;
};

/// All non-linked ordered pairs as candidates, rates filled per source.
LinkCreationModel make_link_model(int num_users, const Vec& gamma,
                                  std::vector<Edge> initial_edges, double nominal_weight);

LinkEvents simulate_link_creation(const LinkCreationModel& model, double t1, std::uint64_t seed);

struct GammaFit {
    Vec gamma;
    double loglik = 0.0;
    int n_events = 0;
};

/// Closed-form MLE gamma_u = n_u / R_u with R_u the summed at-risk time of u's
/// candidate pairs (censored at t1). gamma_u = 0 when u created no links.
GammaFit fit_gamma(const LinkEvents& events, const LinkCreationModel& skeleton, double t1);

/// E[A(t)]: existing links keep their weight; candidate (i, s) contributes
/// (1 - exp(-gamma_i t)) * nominal_weight; everything else is zero.
Mat expected_adjacency(const LinkCreationModel& model, double t);

struct BirthEvent {
    double t = 0.0;
    int node = 0;   // the arriving user
    int target = 0; // who it attaches to
};

/// Maps node births into an equivalent fixed-dimension link-creation process:
/// each birth becomes the link event (t, node, target); unborn nodes carry
/// empty candidate sets and a control start at their birth time.
std::pair<LinkEvents, LinkCreationModel> node_birth_to_links(
    const std::vector<BirthEvent>& births, int u_max, const Vec& gamma,
    std::vector<Edge> initial_edges, double nominal_weight, double t1);

} // namespace guiding
