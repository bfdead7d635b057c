#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "meshph/complex.hpp"
#include "meshph/errors.hpp"
#include "meshph/mesher.hpp"
#include "meshph/rng.hpp"

using namespace meshph;

namespace {

// oriented triangle: edges 0->1, 1->2, 2->0, one face traversing all of them
// forward
CellComplex triangle() {
    return build_complex(3, {{0, 1}, {1, 2}, {2, 0}}, {{{0, 1}, {1, 1}, {2, 1}}});
}

// dense signed matrix from a SignedIncidence, for oracle products
std::vector<std::vector<int>> dense(const SignedIncidence& d) {
    std::vector<std::vector<int>> m(static_cast<std::size_t>(d.rows()),
                                    std::vector<int>(static_cast<std::size_t>(d.cols()), 0));
    for (const auto& e : d.entries()) m[e.row][e.col] = e.sign;
    return m;
}

} // namespace

TEST_CASE("golden triangle incidence matrices") {
    const CellComplex tri = triangle();
    const auto d0 = dense(tri.incidence(0));
    const std::vector<std::vector<int>> d0_expected = {{-1, 1, 0}, {0, -1, 1}, {1, 0, -1}};
    CHECK(d0 == d0_expected);
    const auto d1 = dense(tri.incidence(1));
    const std::vector<std::vector<int>> d1_expected = {{1, 1, 1}};
    CHECK(d1 == d1_expected);
}

TEST_CASE("golden triangle matvecs") {
    const CellComplex tri = triangle();
    const std::vector<double> q = {2.0, -3.0, 5.0};
    const std::vector<double> dq = tri.incidence(0).apply(q);
    CHECK(dq[0] == q[1] - q[0]);
    CHECK(dq[1] == q[2] - q[1]);
    CHECK(dq[2] == q[0] - q[2]);

    const std::vector<double> u = {1.5, -0.25, 4.0};
    const std::vector<double> d1u = tri.incidence(1).apply(u);
    CHECK(d1u.size() == 1);
    CHECK(d1u[0] == u[0] + u[1] + u[2]);

    const std::vector<double> d0t = tri.incidence(0).apply_transpose(u);
    CHECK(d0t[0] == -u[0] + u[2]);
    CHECK(d0t[1] == u[0] - u[1]);
    CHECK(d0t[2] == u[1] - u[2]);
}

TEST_CASE("zero vectors map to zero") {
    const CellComplex tri = triangle();
    const std::vector<double> zq(3, 0.0);
    for (double v : tri.incidence(0).apply(zq)) CHECK(v == 0.0);
    for (double v : tri.incidence(0).apply_transpose(zq)) CHECK(v == 0.0);
}

TEST_CASE("single edge complex") {
    const CellComplex c = build_complex(2, {{0, 1}});
    CHECK(c.dimension() == 1);
    const auto d0 = dense(c.incidence(0));
    CHECK(d0 == std::vector<std::vector<int>>{{-1, 1}});
}

TEST_CASE("chain property on the periodic grid, dense oracle") {
    const MeshGeometry grid = periodic_grid(2, 2, 1.0);
    const auto d0 = dense(grid.d0());
    const auto d1 = dense(grid.d1());
    CHECK(grid.n_nodes() == 4);
    CHECK(grid.n_edges() == 8);
    CHECK(grid.n_faces() == 4);
    for (std::size_t f = 0; f < d1.size(); ++f)
        for (std::size_t n = 0; n < d0[0].size(); ++n) {
            int acc = 0;
            for (std::size_t e = 0; e < d0.size(); ++e) acc += d1[f][e] * d0[e][n];
            CHECK(acc == 0);
        }
    CHECK_NOTHROW(check_chain_property(grid.complex));
}

TEST_CASE("transpose consistency <y, Dx> == <D^T y, x>") {
    const MeshGeometry grid = periodic_grid(3, 4, 2.0);
    const SignedIncidence& d0 = grid.d0();
    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x(static_cast<std::size_t>(d0.cols()));
        std::vector<double> y(static_cast<std::size_t>(d0.rows()));
        for (double& v : x) v = rng.uniform(-1.0, 1.0);
        for (double& v : y) v = rng.uniform(-1.0, 1.0);
        const std::vector<double> dx = d0.apply(x);
        const std::vector<double> dty = d0.apply_transpose(y);
        double lhs = 0.0, rhs = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) lhs += y[i] * dx[i];
        for (std::size_t i = 0; i < x.size(); ++i) rhs += dty[i] * x[i];
        CHECK(std::abs(lhs - rhs) <= 1e-13 * std::max(std::abs(lhs), 1.0));
    }
}

TEST_CASE("transpose matvec matches dense oracle on grid edges") {
    const MeshGeometry grid = periodic_grid(2, 2, 1.0);
    const SignedIncidence& d0 = grid.d0();
    const auto d0_dense = dense(d0);
    Rng rng(7);
    std::vector<double> u(static_cast<std::size_t>(d0.rows()));
    for (double& v : u) v = rng.uniform(-2.0, 2.0);
    const std::vector<double> got = d0.apply_transpose(u);
    for (int c = 0; c < d0.cols(); ++c) {
        double want = 0.0;
        for (int r = 0; r < d0.rows(); ++r) want += d0_dense[r][c] * u[r];
        CHECK(got[c] == doctest::Approx(want).epsilon(1e-14));
    }
}

TEST_CASE("row structure of D0: row sums vanish") {
    const MeshGeometry grid = periodic_grid(4, 3, 2.0);
    const auto d0 = dense(grid.d0());
    for (const auto& row : d0) {
        int sum = 0;
        for (int v : row) sum += v;
        CHECK(sum == 0);
    }
}

TEST_CASE("flip single edge of the triangle") {
    const CellComplex tri = triangle();
    OrientationGauge gauge{1, {-1, 1, 1}};
    const CellComplex flipped = flip_orientation(tri, gauge);
    const auto d0 = dense(flipped.incidence(0));
    CHECK(d0[0] == std::vector<int>{1, -1, 0});
    CHECK(d0[1] == std::vector<int>{0, -1, 1});
    const auto d1 = dense(flipped.incidence(1));
    CHECK(d1[0] == std::vector<int>{-1, 1, 1});
}

TEST_CASE("flip is an involution, bitwise") {
    const CellComplex tri = triangle();
    OrientationGauge gauge{1, {-1, -1, -1}};
    CHECK(flip_orientation(flip_orientation(tri, gauge), gauge) == tri);
}

TEST_CASE("whole-degree flip negates D_k columnwise") {
    const CellComplex tri = triangle();
    OrientationGauge gauge{1, {-1, -1, -1}};
    const CellComplex flipped = flip_orientation(tri, gauge);
    const auto orig = dense(tri.incidence(1));
    const auto got = dense(flipped.incidence(1));
    for (std::size_t r = 0; r < orig.size(); ++r)
        for (std::size_t c = 0; c < orig[r].size(); ++c) CHECK(got[r][c] == -orig[r][c]);
}

TEST_CASE("random flips keep the chain property") {
    const MeshGeometry grid = periodic_grid(2, 2, 1.0);
    Rng rng(11);
    for (int degree = 0; degree <= 2; ++degree) {
        OrientationGauge gauge;
        gauge.degree = degree;
        gauge.signs.resize(static_cast<std::size_t>(grid.complex.count(degree)));
        for (auto& s : gauge.signs) s = rng.coin() ? 1 : -1;
        const CellComplex flipped = flip_orientation(grid.complex, gauge);
        CHECK_NOTHROW(check_chain_property(flipped));
    }
}

TEST_CASE("permutations") {
    const CellComplex tri = triangle();
    SUBCASE("identity is a no-op") {
        const std::vector<int> id = {0, 1, 2};
        CHECK(permute_cells(tri, 0, id) == tri);
    }
    SUBCASE("swapping nodes 0 and 1 swaps D0 columns") {
        const std::vector<int> swap01 = {1, 0, 2};
        const auto got = dense(permute_cells(tri, 0, swap01).incidence(0));
        const auto orig = dense(tri.incidence(0));
        for (std::size_t r = 0; r < got.size(); ++r) {
            CHECK(got[r][0] == orig[r][1]);
            CHECK(got[r][1] == orig[r][0]);
            CHECK(got[r][2] == orig[r][2]);
        }
    }
    SUBCASE("random node permutation keeps the chain property on the grid") {
        const MeshGeometry grid = periodic_grid(2, 2, 1.0);
        Rng rng(3);
        std::vector<int> perm(static_cast<std::size_t>(grid.n_nodes()));
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
        for (std::size_t i = perm.size(); i > 1; --i)
            std::swap(perm[i - 1],
                      perm[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1))]);
        CHECK_NOTHROW(check_chain_property(permute_cells(grid.complex, 0, perm)));
    }
}

TEST_CASE("builder errors") {
    CHECK_THROWS_AS(build_complex(2, {{0, 5}}), BadReference);
    CHECK_THROWS_AS(build_complex(2, {{1, 1}}), DegenerateCell);
    CHECK_THROWS_AS(build_complex(2, {{0, 1}}, {{{3, 1}}}), BadReference);
    // a face traversing the same edge twice forward is not a chain
    CHECK_THROWS_AS(build_complex(3, {{0, 1}, {1, 2}, {2, 0}}, {{{0, 1}, {1, 1}, {2, -1}}}),
                    ChainViolation);
    const CellComplex tri = triangle();
    CHECK_THROWS_AS(tri.incidence(0).apply(std::vector<double>(5, 0.0)), DimensionMismatch);
    CHECK_THROWS_AS(permute_cells(tri, 0, std::vector<int>{0, 0, 1}), NotAPermutation);
    CHECK_THROWS_AS(flip_orientation(tri, OrientationGauge{1, {1, 1}}), DimensionMismatch);
}

TEST_CASE("json round trip") {
    const MeshGeometry grid = periodic_grid(3, 2, 1.0);
    const std::string text = complex_to_json(grid.complex);
    const CellComplex back = complex_from_json(text);
    CHECK(back == grid.complex);
}
