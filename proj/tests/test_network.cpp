#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "guiding/network.hpp"
#include "guiding/rng.hpp"

using namespace guiding;

namespace {

// brute-force rank-one jump matrices B^j = a_j e_j^T
Mat naive_bj(const NetworkTopology& topo, int j) {
    const int n = topo.num_users();
    Mat b = Mat::Zero(n, n);
    b.col(j) = topo.column_of(j);
    return b;
}

} // namespace

TEST_CASE("empty topology has zero columns") {
    const auto topo = NetworkTopology::from_edges({}, 2);
    CHECK(topo.num_edges() == 0);
    CHECK(topo.column_of(0).isZero());
    CHECK(topo.column_of(1).isZero());
    CHECK(topo.dense().isZero());
}

TEST_CASE("direct construction stores exact weights") {
    const auto topo =
        NetworkTopology::from_edges({Edge{0, 1, 0.3}, Edge{1, 0, 0.2}}, 2);
    Vec c1 = topo.column_of(1);
    CHECK(c1(0) == 0.3);
    CHECK(c1(1) == 0.0);
    Vec c0 = topo.column_of(0);
    CHECK(c0(0) == 0.0);
    CHECK(c0(1) == 0.2);
}

TEST_CASE("construction rejects bad edges") {
    CHECK_THROWS_AS(NetworkTopology::from_edges({Edge{0, 1, 0.3}, Edge{0, 1, 0.4}}, 2),
                    std::invalid_argument);
    CHECK_THROWS_AS(NetworkTopology::from_edges({Edge{0, 1, -0.1}}, 2), std::invalid_argument);
    CHECK_THROWS_AS(NetworkTopology::from_edges({Edge{1, 1, 0.2}}, 2), std::invalid_argument);
    CHECK_NOTHROW(NetworkTopology::from_edges({Edge{1, 1, 0.2}}, 2, /*allow_self_loops=*/true));
    CHECK_THROWS_AS(NetworkTopology::from_edges({Edge{0, 5, 0.1}}, 2), std::invalid_argument);
}

TEST_CASE("random topology: determinism, sparsity, weight range") {
    const auto a = NetworkTopology::random(50, 0.1, 0.0, 0.01, 42);
    const auto b = NetworkTopology::random(50, 0.1, 0.0, 0.01, 42);
    CHECK(a == b);
    const auto c = NetworkTopology::random(50, 0.1, 0.0, 0.01, 43);
    CHECK_FALSE(a == c);

    for (const Edge& e : a.edges()) {
        CHECK(e.weight >= 0.0);
        CHECK(e.weight <= 0.01);
        CHECK(e.source != e.target);
    }

    CHECK(NetworkTopology::random(50, 0.0, 0.0, 1.0, 1).num_edges() == 0);

    // expected nnz = sparsity * U * (U - 1); allow a wide statistical band
    const auto big = NetworkTopology::random(1000, 0.001, 0.0, 0.01, 7);
    const double expected = 0.001 * 1000 * 999;
    const double sd = std::sqrt(expected * (1.0 - 0.001));
    CHECK(std::abs(static_cast<double>(big.num_edges()) - expected) < 5.0 * sd);
}

TEST_CASE("assemble_lambda_matrix worked example") {
    const auto topo =
        NetworkTopology::from_edges({Edge{0, 1, 0.3}, Edge{1, 0, 0.2}}, 2);
    Vec lam(2);
    lam << 1.0, 2.0;
    const Mat l = assemble_lambda_matrix(topo, lam);
    CHECK(l(0, 0) == 0.0);
    CHECK(l(0, 1) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(l(1, 0) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(l(1, 1) == 0.0);

    CHECK(assemble_lambda_matrix(topo, Vec::Zero(2)).isZero());
    const auto single = NetworkTopology::from_edges({}, 1);
    CHECK(assemble_lambda_matrix(single, Vec::Ones(1)).isZero());
    CHECK_THROWS_AS(assemble_lambda_matrix(topo, Vec::Ones(3)), std::invalid_argument);
}

TEST_CASE("jump_quadratic_contraction worked example") {
    const auto topo =
        NetworkTopology::from_edges({Edge{0, 1, 0.3}, Edge{1, 0, 0.2}}, 2);
    Vec lam(2);
    lam << 1.0, 2.0;
    const Mat d = jump_quadratic_contraction(topo, lam, Mat::Identity(2, 2));
    CHECK(d(0, 0) == doctest::Approx(0.04).epsilon(1e-12));
    CHECK(d(1, 1) == doctest::Approx(0.18).epsilon(1e-12));
    CHECK(d(0, 1) == 0.0);
    CHECK(d(1, 0) == 0.0);

    CHECK(jump_quadratic_contraction(topo, lam, Mat::Zero(2, 2)).isZero());
    CHECK(jump_quadratic_contraction(topo, Vec::Zero(2), Mat::Identity(2, 2)).isZero());
}

TEST_CASE("sparse contractions match naive rank-one sums") {
    Rng rng = make_rng(99);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        const int n = 2 + static_cast<int>(unif(rng) * 8);
        const auto topo = NetworkTopology::random(n, 0.4, 0.0, 1.0, 1000 + rep);
        Vec lam(n);
        for (int i = 0; i < n; ++i) lam(i) = 2.0 * unif(rng);
        Mat sym = Mat::Zero(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j) sym(i, j) = sym(j, i) = unif(rng) - 0.5;

        Mat naive_lambda = Mat::Zero(n, n);
        Mat naive_jump = Mat::Zero(n, n);
        for (int j = 0; j < n; ++j) {
            const Mat bj = naive_bj(topo, j);
            naive_lambda += lam(j) * bj;
            naive_jump += lam(j) * bj.transpose() * sym * bj;
        }

        CHECK((assemble_lambda_matrix(topo, lam) - naive_lambda).cwiseAbs().maxCoeff() == 0.0);
        const Mat contraction = jump_quadratic_contraction(topo, lam, sym);
        CHECK((contraction - naive_jump).cwiseAbs().maxCoeff() <=
              1e-12 * (1.0 + naive_jump.cwiseAbs().maxCoeff()));
        // contraction must be exactly diagonal
        Mat off = contraction;
        off.diagonal().setZero();
        CHECK(off.isZero(0.0));

        // linearity in lambda
        Vec lam2 = lam.reverse();
        const Mat sum_form = assemble_lambda_matrix(topo, Vec(lam + lam2));
        const Mat split_form =
            assemble_lambda_matrix(topo, lam) + assemble_lambda_matrix(topo, lam2);
        CHECK((sum_form - split_form).cwiseAbs().maxCoeff() <= 1e-14);
    }
}
