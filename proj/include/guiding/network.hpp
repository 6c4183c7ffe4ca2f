#pragma once

#include "guiding/common.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace guiding {

/// Directed weighted edge: `weight` scales the influence of `source` on `target`,
/// i.e. entry A(target, source) of the adjacency matrix.
struct Edge {
    int target = 0;
    int source = 0;
    double weight = 0.0;
};

/// Immutable directed weighted adjacency with column (per-source) access.
/// Columns are kept sorted; a dense cache is built for small networks where
/// column access dominates the solver inner loops.
class NetworkTopology {
public:
    NetworkTopology() = default;

    static NetworkTopology from_edges(std::vector<Edge> edges, int num_users,
                                      bool allow_self_loops = false);

    /// Each off-diagonal entry is independently present with probability
    /// `sparsity`; present weights are uniform in [lo, hi].
    static NetworkTopology random(int num_users, double sparsity, double lo, double hi,
                                  std::uint64_t seed, bool allow_self_loops = false);

    int num_users() const { return num_users_; }
    std::size_t num_edges() const { return edges_.size(); }

    /// Edges in canonical order: sorted by (source, target).
    const std::vector<Edge>& edges() const { return edges_; }

    /// Dense j-th adjacency column a_j (zeros where no edge).
    Vec column_of(int source) const;

    /// Sparse entries of column `source` as (target, weight), sorted by target.
    const std::vector<std::pair<int, double>>& column_entries(int source) const;

    Mat dense() const;

    bool operator==(const NetworkTopology& o) const;

private:
    int num_users_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::pair<int, double>>> columns_;
    Mat dense_cache_; // populated for num_users_ <= kDenseCacheLimit
    static constexpr int kDenseCacheLimit = 64;

    void build_columns();
};

/// Lambda(t) = sum_j lambda_j B^j = A diag(lambda), assembled without
/// materializing the rank-one B^j matrices.
Mat assemble_lambda_matrix(const NetworkTopology& topology, const Vec& lam);

/// Diagonal of sum_j lambda_j B^{jT} v11 B^j; entry j equals
/// lambda_j a_j^T v11 a_j.
Vec jump_quadratic_diagonal(const NetworkTopology& topology, const Vec& lam, const Mat& v11);

/// Same contraction as a (diagonal) dense matrix.
Mat jump_quadratic_contraction(const NetworkTopology& topology, const Vec& lam, const Mat& v11);

struct HawkesParams {
    Vec eta;                   // base intensity, >= 0
    NetworkTopology topology;  // carries beta_ij
    double omega1 = 1.0;       // kernel decay, > 0

    void validate() const;
};

enum class HMode { unit, linear };

struct OpinionParams {
    Vec b;                     // base content
    NetworkTopology topology;  // carries alpha_ij
    double omega2 = 1.0;       // decay, > 0
    double theta = 0.0;        // diffusion level, >= 0
    HMode h_mode = HMode::linear;

    void validate() const;
};

struct PairRate {
    int i = 0;
    int j = 0;
    double rate = 0.0; // eta_ij >= 0
};

struct SurvivalRates {
    std::vector<PairRate> rates;

    void validate() const;
};

enum class ObjectiveKind { LSOG, OIM };

struct ControlProblem {
    ObjectiveKind kind = ObjectiveKind::LSOG;
    Vec target;        // `a`, LSOG only
    double rho = 1.0;  // control tradeoff, > 0
    TimeGrid grid;
    bool running_state_cost = false;

    void validate(int num_users) const;
};

std::string to_string(ObjectiveKind kind);
ObjectiveKind objective_kind_from_string(const std::string& s);

} // namespace guiding
