#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fusionspec/errors.hpp"
#include "fusionspec/rngkit.hpp"
#include "fusionspec/spectra.hpp"

using namespace fusionspec;
using rngkit::Purpose;
using rngkit::SeedSpec;

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// One-sample Kolmogorov-Smirnov statistic against the standard normal.
double ks_against_normal(std::vector<double> samples) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double ks = 0.0;
    for (size_t i = 0; i < samples.size(); ++i) {
        const double f = normal_cdf(samples[i]);
        ks = std::max(ks, std::max(std::abs((i + 1) / n - f), std::abs(f - i / n)));
    }
    return ks;
}

}  // namespace

TEST_SUITE("rngkit") {

TEST_CASE("gaussian cloud has the right shape and scaling") {
    const auto cloud = rngkit::sample_gaussian_cloud(4, 3, {1, 0, Purpose::XCloud});
    CHECK(cloud.data.rows() == 3);
    CHECK(cloud.data.cols() == 4);
    CHECK(cloud.p == 3);
    CHECK(cloud.n == 4);
    CHECK(cloud.aspect_ratio() == doctest::Approx(4.0 / 3.0));
    CHECK(cloud.data.allFinite());
}

TEST_CASE("column norms concentrate at one") {
    const auto cloud = rngkit::sample_gaussian_cloud(2000, 2000, {7, 0, Purpose::XCloud});
    const double mean_sq = cloud.data.colwise().squaredNorm().mean();
    CHECK(std::abs(mean_sq - 1.0) < 0.01);
}

TEST_CASE("samplers are pure functions of the seed spec") {
    const SeedSpec s{42, 3, Purpose::YCloud};
    const auto a = rngkit::sample_gaussian_cloud(50, 20, s);
    const auto b = rngkit::sample_gaussian_cloud(50, 20, s);
    CHECK(a.data == b.data);

    const auto c = rngkit::sample_gaussian_cloud(50, 20, s.with_stream(4));
    CHECK(a.data != c.data);
    const auto d = rngkit::sample_gaussian_cloud(50, 20, s.with_purpose(Purpose::XCloud));
    CHECK(a.data != d.data);
}

TEST_CASE("invalid dimensions are rejected") {
    CHECK_THROWS_AS(rngkit::sample_gaussian_cloud(1, 3, {0, 0, Purpose::XCloud}),
                    dimension_error);
    CHECK_THROWS_AS(rngkit::sample_gaussian_cloud(4, 0, {0, 0, Purpose::XCloud}),
                    dimension_error);
    CHECK_THROWS_AS(rngkit::sample_haar_orthogonal(0, {0, 0, Purpose::Haar}),
                    dimension_error);
}

TEST_CASE("haar matrices are orthogonal") {
    const auto u = rngkit::sample_haar_orthogonal(50, {11, 0, Purpose::Haar});
    const Eigen::MatrixXd err =
        u.transpose() * u - Eigen::MatrixXd::Identity(50, 50);
    CHECK(err.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("haar at n=1 hits both signs") {
    int plus = 0, minus = 0;
    for (int s = 0; s < 64; ++s) {
        const auto u = rngkit::sample_haar_orthogonal(
            1, {5, static_cast<std::uint64_t>(s), Purpose::Haar});
        CHECK(std::abs(std::abs(u(0, 0)) - 1.0) < 1e-15);
        (u(0, 0) > 0 ? plus : minus)++;
    }
    CHECK(plus > 10);
    CHECK(minus > 10);
}

TEST_CASE("haar first entry scaled by sqrt(n) is standard normal") {
    const int n = 200, draws = 2000;
    std::vector<double> samples(draws);
    for (int s = 0; s < draws; ++s) {
        const auto u = rngkit::sample_haar_orthogonal(
            n, {123, static_cast<std::uint64_t>(s), Purpose::Haar});
        samples[static_cast<size_t>(s)] = u(0, 0) * std::sqrt(static_cast<double>(n));
    }
    CHECK(ks_against_normal(std::move(samples)) < 0.05);
}

TEST_CASE("haar conjugation preserves the spectrum of a symmetric matrix") {
    rngkit::CounterRng rng({9, 0, Purpose::Other});
    const int n = 40;
    Eigen::MatrixXd m(n, n);
    std::uint64_t ctr = 0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) m(i, j) = rng.gaussian_at(ctr++);
    const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    const auto u = rngkit::sample_haar_orthogonal(n, {9, 1, Purpose::Haar});
    const Eigen::MatrixXd conj_raw = u * sym * u.transpose();
    const Eigen::MatrixXd conj = 0.5 * (conj_raw + conj_raw.transpose());
    const auto ea = spectra::eigenvalues_symmetric(sym);
    const auto eb = spectra::eigenvalues_symmetric(conj);
    for (int i = 0; i < n; ++i)
        CHECK(ea.atoms[static_cast<size_t>(i)] ==
              doctest::Approx(eb.atoms[static_cast<size_t>(i)]).epsilon(1e-9));
}

TEST_CASE("alternative pair kills every sample but the first") {
    const auto [x, y] = rngkit::sample_alternative_pair(20, 7, 5, {3, 0, Purpose::Other});
    CHECK(x.p == 7);
    CHECK(y.p == 5);
    for (int j = 1; j < 20; ++j) CHECK(x.data.col(j).cwiseAbs().maxCoeff() == 0.0);
    // First column is a multiple of the all-ones vector with the stated coefficient.
    const double expected =
        0.25 * y.data.col(0).sum() / std::sqrt(7.0 * 5.0);
    for (int i = 0; i < 7; ++i) CHECK(x.data(i, 0) == doctest::Approx(expected));
}

TEST_CASE("inverse normal cdf matches known quantiles") {
    CHECK(rngkit::inverse_normal_cdf(0.5) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(rngkit::inverse_normal_cdf(0.975) == doctest::Approx(1.959963984540054));
    CHECK(rngkit::inverse_normal_cdf(0.025) == doctest::Approx(-1.959963984540054));
    CHECK(rngkit::inverse_normal_cdf(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-9));
}

}  // TEST_SUITE
