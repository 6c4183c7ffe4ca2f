#include "guiding/network.hpp"

#include "guiding/rng.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace guiding {

namespace {

void check_user_index(int idx, int num_users, const char* what) {
    if (idx < 0 || idx >= num_users) {
        std::ostringstream os;
        os << what << " index " << idx << " outside [0, " << num_users << ")";
        throw std::invalid_argument(os.str());
    }
}

} // namespace

NetworkTopology NetworkTopology::from_edges(std::vector<Edge> edges, int num_users,
                                            bool allow_self_loops) {
    if (num_users <= 0) throw std::invalid_argument("NetworkTopology: num_users must be positive");
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        return std::tie(a.source, a.target) < std::tie(b.source, b.target);
    });
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const Edge& e = edges[k];
        check_user_index(e.target, num_users, "edge target");
        check_user_index(e.source, num_users, "edge source");
        if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
            std::ostringstream os;
            os << "edge (" << e.target << ", " << e.source << ") has invalid weight " << e.weight;
            throw std::invalid_argument(os.str());
        }
        if (e.target == e.source && !allow_self_loops) {
            std::ostringstream os;
            os << "self-loop at user " << e.target << " not enabled";
            throw std::invalid_argument(os.str());
        }
        if (k > 0 && edges[k - 1].source == e.source && edges[k - 1].target == e.target) {
            std::ostringstream os;
            os << "duplicate edge (target " << e.target << ", source " << e.source << ")";
            throw std::invalid_argument(os.str());
        }
    }
    NetworkTopology out;
    out.num_users_ = num_users;
    out.edges_ = std::move(edges);
    out.build_columns();
    return out;
}

NetworkTopology NetworkTopology::random(int num_users, double sparsity, double lo, double hi,
                                        std::uint64_t seed, bool allow_self_loops) {
    if (num_users <= 0) throw std::invalid_argument("NetworkTopology: num_users must be positive");
    if (!(sparsity >= 0.0 && sparsity <= 1.0))
        throw std::invalid_argument("random topology: sparsity must lie in [0, 1]");
    if (!(lo <= hi) || lo < 0.0)
        throw std::invalid_argument("random topology: need 0 <= lo <= hi");

    Rng rng = make_rng(derive_seed(seed, stream::topology));
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_real_distribution<double> weight(lo, hi);
    std::vector<Edge> edges;
    for (int j = 0; j < num_users; ++j) {
        for (int i = 0; i < num_users; ++i) {
            if (i == j && !allow_self_loops) continue;
            if (coin(rng) < sparsity) edges.push_back(Edge{i, j, weight(rng)});
        }
    }
    return from_edges(std::move(edges), num_users, allow_self_loops);
}

void NetworkTopology::build_columns() {
    columns_.assign(static_cast<std::size_t>(num_users_), {});
    for (const Edge& e : edges_)
        columns_[static_cast<std::size_t>(e.source)].emplace_back(e.target, e.weight);
    for (auto& col : columns_) std::sort(col.begin(), col.end());
    if (num_users_ <= kDenseCacheLimit) {
        dense_cache_ = Mat::Zero(num_users_, num_users_);
        for (const Edge& e : edges_) dense_cache_(e.target, e.source) = e.weight;
    }
}

Vec NetworkTopology::column_of(int source) const {
    check_user_index(source, num_users_, "column");
    if (dense_cache_.size() > 0) return dense_cache_.col(source);
    Vec col = Vec::Zero(num_users_);
    for (const auto& [target, w] : columns_[static_cast<std::size_t>(source)]) col(target) = w;
    return col;
}

const std::vector<std::pair<int, double>>& NetworkTopology::column_entries(int source) const {
    check_user_index(source, num_users_, "column");
    return columns_[static_cast<std::size_t>(source)];
}

Mat NetworkTopology::dense() const {
    if (dense_cache_.size() > 0) return dense_cache_;
    Mat out = Mat::Zero(num_users_, num_users_);
    for (const Edge& e : edges_) out(e.target, e.source) = e.weight;
    return out;
}

bool NetworkTopology::operator==(const NetworkTopology& o) const {
    if (num_users_ != o.num_users_ || edges_.size() != o.edges_.size()) return false;
    for (std::size_t k = 0; k < edges_.size(); ++k) {
        if (edges_[k].target != o.edges_[k].target || edges_[k].source != o.edges_[k].source ||
            edges_[k].weight != o.edges_[k].weight)
            return false;
    }
    return true;
}

Mat assemble_lambda_matrix(const NetworkTopology& topology, const Vec& lam) {
    const int n = topology.num_users();
    if (lam.size() != n)
        throw std::invalid_argument("assemble_lambda_matrix: intensity length mismatch");
    if ((lam.array() < 0.0).any())
        throw std::invalid_argument("assemble_lambda_matrix: intensities must be nonnegative");
    Mat out = Mat::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        for (const auto& [i, w] : topology.column_entries(j)) out(i, j) = w * lam(j);
    }
    return out;
}

Vec jump_quadratic_diagonal(const NetworkTopology& topology, const Vec& lam, const Mat& v11) {
    const int n = topology.num_users();
    if (lam.size() != n)
        throw std::invalid_argument("jump_quadratic_contraction: intensity length mismatch");
    if (v11.rows() != n || v11.cols() != n)
        throw std::invalid_argument("jump_quadratic_contraction: v11 dimension mismatch");
    Vec diag = Vec::Zero(n);
    for (int j = 0; j < n; ++j) {
        if (lam(j) == 0.0) continue;
        const auto& col = topology.column_entries(j);
        // a_j^T v11 a_j over the sparse support of a_j
        double q = 0.0;
        for (const auto& [r, wr] : col)
            for (const auto& [c, wc] : col) q += wr * v11(r, c) * wc;
        diag(j) = lam(j) * q;
    }
    return diag;
}

Mat jump_quadratic_contraction(const NetworkTopology& topology, const Vec& lam, const Mat& v11) {
    return jump_quadratic_diagonal(topology, lam, v11).asDiagonal();
}

void HawkesParams::validate() const {
    if (eta.size() != topology.num_users())
        throw std::invalid_argument("HawkesParams: eta length must equal num_users");
    if ((eta.array() < 0.0).any())
        throw std::invalid_argument("HawkesParams: eta must be nonnegative");
    if (!(omega1 > 0.0)) throw std::invalid_argument("HawkesParams: omega1 must be positive");
}

void OpinionParams::validate() const {
    if (b.size() != topology.num_users())
        throw std::invalid_argument("OpinionParams: b length must equal num_users");
    if (!(omega2 > 0.0)) throw std::invalid_argument("OpinionParams: omega2 must be positive");
    if (!(theta >= 0.0)) throw std::invalid_argument("OpinionParams: theta must be nonnegative");
}

void SurvivalRates::validate() const {
    std::set<std::pair<int, int>> seen;
    for (const PairRate& r : rates) {
        if (!(r.rate >= 0.0) || !std::isfinite(r.rate))
            throw std::invalid_argument("SurvivalRates: rates must be finite and nonnegative");
        if (!seen.insert({r.i, r.j}).second)
            throw std::invalid_argument("SurvivalRates: duplicate pair");
    }
}

void ControlProblem::validate(int num_users) const {
    if (!(rho > 0.0)) throw std::invalid_argument("ControlProblem: rho must be positive");
    if (!(grid.t1 > grid.t0)) throw std::invalid_argument("ControlProblem: empty horizon");
    if (grid.steps < 1) throw std::invalid_argument("ControlProblem: grid needs >= 2 points");
    if (kind == ObjectiveKind::LSOG && target.size() != num_users)
        throw std::invalid_argument("ControlProblem: LSOG target length must equal num_users");
}

std::string to_string(ObjectiveKind kind) {
    return kind == ObjectiveKind::LSOG ? "lsog" : "oim";
}

ObjectiveKind objective_kind_from_string(const std::string& s) {
    if (s == "lsog" || s == "LSOG") return ObjectiveKind::LSOG;
    if (s == "oim" || s == "OIM") return ObjectiveKind::OIM;
    throw std::invalid_argument("unknown objective kind: " + s);
}

} // namespace guiding
