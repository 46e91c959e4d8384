#include <doctest.h>

#include <cmath>
#include <limits>

#include "pnpde/errors.hpp"
#include "pnpde/metrics.hpp"

using namespace pnpde;

TEST_CASE("sup error") {
    Eigen::MatrixXd a(2, 3);
    a << 1, 2, 3, 4, 5, 6;
    CHECK(sup_error(a, a) == 0.0);
    CHECK(sup_error(a, (a.array() + 0.25).matrix()) == doctest::Approx(0.25));
    CHECK_THROWS_AS(sup_error(a, Eigen::MatrixXd::Zero(3, 2)), InvalidArgument);
}

TEST_CASE("sup error on a grid is monotone under refinement") {
    auto u = [](double x) { return std::sin(3.0 * x); };
    auto v = [](double x) { return std::sin(3.0 * x) + 0.1 * x * x; };
    double previous = 0.0;
    for (int k : {2, 4, 8, 16, 32}) {
        Eigen::MatrixXd a(1, k + 1), b(1, k + 1);
        for (int j = 0; j <= k; ++j) {
            const double x = -1.3 + 2.0 * j / k;  // nested grids
            a(0, j) = u(x);
            b(0, j) = v(x);
        }
        const double e = sup_error(a, b);
        CHECK(e >= previous);
        previous = e;
    }
}

TEST_CASE("z score") {
    Eigen::MatrixXd mean(1, 1), sd(1, 1), truth(1, 1);
    mean << 1.2;
    truth << 1.0;
    sd << 0.05;
    const auto z = z_score(mean, sd, 2.0, truth, 1e-6);
    CHECK(z.value == doctest::Approx(2.0));
    CHECK_FALSE(z.infinite);
    CHECK(z_score(truth, sd, 2.0, truth, 1e-6).value == 0.0);
}

TEST_CASE("z score is invariant to joint rescaling") {
    Eigen::MatrixXd mean(2, 2), truth(2, 2), sd(2, 2);
    mean << 0.1, 0.4, -0.3, 0.2;
    truth << 0.0, 0.5, -0.1, 0.2;
    sd << 0.2, 0.1, 0.3, 0.05;
    const double c = 7.5;
    const double a = z_score(mean, sd, 1.3, truth, 1e-6).value;
    const double b = z_score(c * mean, sd, c * 1.3, c * truth, 1e-6).value;
    CHECK(b == doctest::Approx(a).epsilon(1e-12));
}

TEST_CASE("z score floor, skipping and infinity") {
    Eigen::MatrixXd mean(1, 3), truth(1, 3), sd(1, 3);
    mean << 0.0, 1.0, 2.0;
    truth << 0.0, 1.0, 2.5;
    sd << 0.0, 1e-12, 1.0;
    const auto z = z_score(mean, sd, 1.0, truth, 1e-6);
    CHECK(z.skipped == 1);
    CHECK(z.clipped == 1);
    CHECK(z.value == doctest::Approx(0.5));

    Eigen::MatrixXd spike = mean;
    spike(0, 1) = 1.001;  // error at a clipped node: ratio 1e-3 / 1e-6
    CHECK(z_score(spike, sd, 1.0, truth, 1e-6).value == doctest::Approx(1000.0));

    const auto zero_sigma = z_score(mean, sd, 0.0, truth, 1e-6);
    CHECK(zero_sigma.infinite);
    CHECK(std::isinf(zero_sigma.value));
}

TEST_CASE("log-log slopes") {
    const std::vector<double> n{9, 17, 33, 65};
    std::vector<double> inv(4), flat(4, 0.3);
    for (int k = 0; k < 4; ++k) inv[k] = 2.0 / n[k];
    CHECK(log_log_slope(n, inv) == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(std::abs(log_log_slope(n, flat)) < 1e-12);
    CHECK_THROWS_AS(log_log_slope(std::vector<double>{1, 2}, std::vector<double>{1, 2}), InvalidArgument);

    std::vector<MetricRow> rows;
    for (std::size_t m : {17u, 33u}) {
        for (std::size_t nn : {9u, 17u, 33u}) {
            MetricRow r;
            r.n = nn;
            r.m = m;
            r.e_inf = static_cast<double>(m) / static_cast<double>(nn * nn);
            rows.push_back(r);
        }
    }
    const auto by_n = convergence_slopes(rows, SweepAxis::n);
    REQUIRE(by_n.size() == 2);
    CHECK(by_n.at(17) == doctest::Approx(-2.0).epsilon(1e-9));
    CHECK(by_n.at(33) == doctest::Approx(-2.0).epsilon(1e-9));
    CHECK_THROWS_AS(convergence_slopes(rows, SweepAxis::m), InvalidArgument);
}
