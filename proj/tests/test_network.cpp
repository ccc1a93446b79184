#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "repcost/errors.hpp"
#include "repcost/network.hpp"
#include "repcost/phi.hpp"
#include "repcost/random.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

using namespace repcost;

namespace {

Mat random_mat(std::uint64_t seed, int r, int c) {
    Rng rng(seed);
    Mat M(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) M(i, j) = rng.normal();
    return M;
}

Vec random_vec(std::uint64_t seed, int n) {
    Rng rng(seed);
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.normal();
    return v;
}

ShallowNet single_unit_net() {
    ShallowNet net;
    net.W = Mat(1, 2);
    net.W << 1.0, 0.0;
    net.a = Vec::Ones(1);
    net.b = Vec::Zero(1);
    net.c = 0.0;
    return net;
}

DeepNet random_deep(std::uint64_t seed, int L, int d, int K) {
    DeepNet net;
    int cols = d;
    for (int i = 0; i < L - 1; ++i) {
        const int rows = (i == L - 2) ? K : 3 + (int)(seed + i) % 3;
        net.layers.push_back(random_mat(seed + 11 * i, rows, cols));
        cols = rows;
    }
    net.a = random_vec(seed + 101, K);
    net.b = random_vec(seed + 202, K);
    net.c = 0.3;
    return net;
}

} // namespace

TEST_CASE("shallow eval") {
    ShallowNet net = single_unit_net();
    Vec x(2);
    x << 2.0, -5.0;
    CHECK(eval(net, x) == doctest::Approx(2.0).epsilon(1e-15));
    x << -2.0, 7.0;
    CHECK(eval(net, x) == 0.0); // ReLU clamps
}

TEST_CASE("eval rejects dimension mismatch") {
    CHECK_THROWS_AS(eval(single_unit_net(), Vec::Ones(3)), InvalidInput);
}

TEST_CASE("collapse matches deep evaluation") {
    DeepNet deep = random_deep(3, 4, 3, 5);
    ShallowNet flat = collapse(deep);
    Rng rng(77);
    for (int probe = 0; probe < 100; ++probe) {
        Vec x(3);
        for (int i = 0; i < 3; ++i) x(i) = rng.normal();
        CHECK(std::abs(eval(deep, x) - eval(flat, x)) < 1e-12);
    }
}

TEST_CASE("collapse identities") {
    Mat W = random_mat(5, 4, 2);
    DeepNet two{{W}, random_vec(6, 4), random_vec(7, 4), 0.1};
    CHECK((collapse(two).W - W).norm() == 0.0);

    DeepNet with_id{{W, Mat::Identity(4, 4)}, two.a, two.b, two.c};
    CHECK((collapse(with_id).W - W).norm() == 0.0);
}

TEST_CASE("cost_CL") {
    Mat W(1, 2);
    W << 1.0, 0.0;
    DeepNet net{{W}, Vec::Ones(1), Vec::Zero(1), 0.0};
    CHECK(cost_CL(net) == doctest::Approx(1.0).epsilon(1e-15));

    DeepNet zero{{Mat::Zero(2, 2)}, Vec::Zero(2), Vec::Ones(2), 3.0};
    CHECK(cost_CL(zero) == 0.0); // biases excluded

    DeepNet three{{Mat::Identity(2, 2), W}, Vec::Ones(1), Vec::Zero(1), 0.0};
    CHECK(cost_CL(three) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("rescale_units keeps the function") {
    ShallowNet net = single_unit_net();
    SUBCASE("all-ones lambda is the identity") {
        ShallowNet same = rescale_units(net, Vec::Ones(1));
        CHECK((same.W - net.W).norm() == 0.0);
        CHECK((same.a - net.a).norm() == 0.0);
        CHECK((same.b - net.b).norm() == 0.0);
    }
    SUBCASE("doubling lambda halves a and doubles W, b") {
        ShallowNet r = rescale_units(net, 2.0 * Vec::Ones(1));
        CHECK(r.W(0, 0) == 2.0);
        CHECK(r.a(0) == 0.5);
        Vec x(2);
        x << 1.0, 0.0;
        CHECK(eval(r, x) == doctest::Approx(eval(net, x)).epsilon(1e-15));
    }
    SUBCASE("random net, random positive lambda") {
        ShallowNet big{random_mat(8, 5, 3), random_vec(9, 5), random_vec(10, 5), -0.2};
        Rng rng(11);
        Vec lam(5);
        for (int i = 0; i < 5; ++i) lam(i) = 0.1 + 2.0 * rng.uniform();
        ShallowNet r = rescale_units(big, lam);
        for (int probe = 0; probe < 100; ++probe) {
            Vec x = random_vec(100 + probe, 3);
            CHECK(std::abs(eval(r, x) - eval(big, x)) < 1e-12);
        }
        // the function is invariant but the 2-layer cost is not
        CHECK(cost_CL(big) != doctest::Approx(cost_CL(r)).epsilon(1e-6));
    }
    SUBCASE("nonpositive lambda is rejected") {
        CHECK_THROWS_AS(rescale_units(net, Vec::Zero(1)), InvalidInput);
    }
}

TEST_CASE("normalize_units keeps the function and yields unit rows") {
    ShallowNet net{3.0 * random_mat(21, 4, 3), random_vec(22, 4), random_vec(23, 4), 0.4};
    ShallowNet unit = normalize_units(net);
    for (int k = 0; k < 4; ++k) CHECK(unit.W.row(k).norm() == doctest::Approx(1.0).epsilon(1e-12));
    for (int probe = 0; probe < 50; ++probe) {
        Vec x = random_vec(300 + probe, 3);
        CHECK(std::abs(eval(unit, x) - eval(net, x)) < 1e-12);
    }
}

TEST_CASE("balanced factorization at L = 2 is the matrix itself") {
    ShallowNet net{random_mat(31, 3, 2), random_vec(32, 3), random_vec(33, 3), 0.0};
    DeepNet deep = balanced_factorization(net, 2);
    REQUIRE(deep.layers.size() == 1);
    CHECK((deep.layers[0] - net.W).norm() == 0.0);
    CHECK(deep.layers[0].squaredNorm() == doctest::Approx(net.W.squaredNorm()));
}

TEST_CASE("balanced factorization of a unit rank-one matrix at L = 3") {
    Vec u(3), v(2);
    u << 1, 0, 0;
    v << 0, 1;
    ShallowNet net{u * v.transpose(), Vec::Zero(3), Vec::Zero(3), 0.0};
    DeepNet deep = balanced_factorization(net, 3);
    REQUIRE(deep.layers.size() == 2);
    double sum = 0.0;
    for (const Mat& M : deep.layers) {
        CHECK(M.squaredNorm() == doctest::Approx(1.0).epsilon(1e-12));
        sum += M.squaredNorm();
    }
    CHECK(sum == doctest::Approx(2.0 * schatten_qnorm_pow(net.W, 1.0)).epsilon(1e-12));
}

TEST_CASE("balanced factorization attains the schatten identity") {
    for (std::uint64_t seed : {41ull, 42ull, 43ull}) {
        ShallowNet net{random_mat(seed, 4, 3), random_vec(seed + 1, 4), random_vec(seed + 2, 4), 0.0};
        for (int L : {3, 4, 5}) {
            DeepNet deep = balanced_factorization(net, L);
            REQUIRE((int)deep.layers.size() == L - 1);
            double sum = 0.0;
            for (const Mat& M : deep.layers) sum += M.squaredNorm();
            const double target = (L - 1) * schatten_qnorm_pow(net.W, 2.0 / (L - 1));
            CHECK(sum == doctest::Approx(target).epsilon(1e-9));
            CHECK((collapse(deep).W - net.W).norm() / net.W.norm() < 1e-9);
            // the resulting deep cost matches the optimum closed form
            const double cost = cost_CL(deep);
            const double expect = (net.a.squaredNorm() + target) / L;
            CHECK(cost == doctest::Approx(expect).epsilon(1e-9));
        }
    }
}

TEST_CASE("balanced factorization of the zero matrix") {
    ShallowNet net{Mat::Zero(3, 2), Vec::Zero(3), Vec::Zero(3), 0.0};
    DeepNet deep = balanced_factorization(net, 4);
    CHECK(collapse(deep).W.norm() == 0.0);
    CHECK(cost_CL(deep) == 0.0);
}

TEST_CASE("network JSON round trip") {
    ShallowNet net{random_mat(51, 3, 2), random_vec(52, 3), random_vec(53, 3), -1.25};
    ShallowNet back = shallow_from_json(to_json(net));
    CHECK((back.W - net.W).norm() == 0.0);
    CHECK((back.a - net.a).norm() == 0.0);
    CHECK((back.b - net.b).norm() == 0.0);
    CHECK(back.c == net.c);

    DeepNet deep = random_deep(61, 3, 2, 4);
    DeepNet deep_back = deep_from_json(to_json(deep));
    REQUIRE(deep_back.layers.size() == deep.layers.size());
    for (std::size_t i = 0; i < deep.layers.size(); ++i)
        CHECK((deep_back.layers[i] - deep.layers[i]).norm() == 0.0);
}

TEST_CASE("validation catches bad shapes") {
    ShallowNet bad{Mat::Identity(2, 2), Vec::Ones(3), Vec::Zero(2), 0.0};
    CHECK_THROWS_AS(bad.validate(), InvalidInput);
    DeepNet mis{{Mat::Identity(2, 2), Mat::Identity(3, 3)}, Vec::Ones(3), Vec::Zero(3), 0.0};
    CHECK_THROWS_AS(mis.validate(), InvalidInput);
}
