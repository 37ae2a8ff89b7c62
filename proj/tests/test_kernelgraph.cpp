#include <doctest.h>

#include <Eigen/SVD>
#include <cmath>

#include "fusionspec/errors.hpp"
#include "fusionspec/kernelgraph.hpp"
#include "fusionspec/rngkit.hpp"
#include "fusionspec/spectra.hpp"

using namespace fusionspec;
using rngkit::Purpose;

namespace {

int numerical_rank(const Eigen::MatrixXd& m, double rel_tol = 1e-10) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0) return 0;
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > rel_tol * sv(0)) ++r;
    return r;
}

double op_norm_sym(const Eigen::MatrixXd& m) {
    const auto eigs = spectra::eigenvalues_symmetric(0.5 * (m + m.transpose()));
    double v = 0.0;
    for (double a : eigs.atoms) v = std::max(v, std::abs(a));
    return v;
}

rngkit::DataCloud cloud_from(const Eigen::MatrixXd& data) {
    return {data, static_cast<int>(data.rows()), static_cast<int>(data.cols())};
}

}  // namespace

TEST_SUITE("kernelgraph") {

TEST_CASE("gaussian kernel constants at sigma one") {
    const auto k = kernelgraph::gaussian_kernel(1.0);
    CHECK(k.varsigma() == doctest::Approx(1.0 - 2.0 * std::exp(-1.0)).epsilon(1e-14));
    CHECK(k.f2() == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(-2.0 * k.df2() == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(k.f0() == doctest::Approx(1.0));
}

TEST_CASE("gaussian kernels satisfy the validity conditions at every bandwidth") {
    // varsigma = 1 - e^{-u}(1 + u) with u = 1/sigma^2 is positive for all
    // u > 0, so the whole family is admissible; small sigma pushes varsigma
    // toward 1, large sigma toward 0+.
    for (double sigma : {0.1, 0.3, 1.0, 3.0, 30.0}) {
        const auto k = kernelgraph::gaussian_kernel(sigma);
        CHECK(k.varsigma() > 0.0);
        CHECK(k.f2() > 0.0);
    }
    const auto tight = kernelgraph::gaussian_kernel(0.3);
    const double u = 1.0 / 0.09;
    CHECK(tight.varsigma() == doctest::Approx(1.0 - std::exp(-u) * (1.0 + u)).epsilon(1e-12));
    CHECK(tight.varsigma() > 0.99);
    CHECK_THROWS_AS(kernelgraph::gaussian_kernel(0.0), contract_error);
}

TEST_CASE("kernels violating the validity conditions are rejected") {
    // Linear taper with f(2) barely positive: varsigma < 0.
    const double b = 2.0001;
    CHECK_THROWS_AS(kernelgraph::KernelFn(
                        "taper", [b](double t) { return 1.0 - t / b; },
                        [b](double) { return -1.0 / b; }, [](double) { return 0.0; }),
                    kernel_condition_error);
    // f(2) = 0 exactly.
    CHECK_THROWS_AS(kernelgraph::KernelFn(
                        "taper2", [](double t) { return 1.0 - t / 2.0; },
                        [](double) { return -0.5; }, [](double) { return 0.0; }),
                    kernel_condition_error);
    // Increasing function fails the monotonicity spot check.
    CHECK_THROWS_AS(kernelgraph::KernelFn(
                        "rising", [](double t) { return 1.0 + t; },
                        [](double) { return 1.0; }, [](double) { return 0.0; }),
                    kernel_condition_error);
}

TEST_CASE("identical samples give the flat affinity") {
    Eigen::MatrixXd data(3, 2);
    data.col(0) << 0.1, -0.2, 0.3;
    data.col(1) = data.col(0);
    const auto b = kernelgraph::build_affinity(cloud_from(data),
                                               kernelgraph::gaussian_kernel(1.0));
    CHECK(b.W(0, 0) == doctest::Approx(1.0));
    CHECK(b.W(0, 1) == doctest::Approx(1.0));
    CHECK(b.A(0, 0) == doctest::Approx(0.5));
    CHECK(b.A(1, 0) == doctest::Approx(0.5));
}

TEST_CASE("distance two evaluates the kernel at two") {
    Eigen::MatrixXd data = Eigen::MatrixXd::Zero(2, 2);
    data(0, 0) = 1.0;
    data(1, 1) = 1.0;  // ||x1 - x2||^2 = 2
    const auto b = kernelgraph::build_affinity(cloud_from(data),
                                               kernelgraph::gaussian_kernel(1.0));
    CHECK(b.W(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("affinity invariants hold on a null draw") {
    const auto cloud = rngkit::sample_gaussian_cloud(150, 80, {5, 0, Purpose::XCloud});
    const auto kernel = kernelgraph::gaussian_kernel(1.0);
    const auto b = kernelgraph::build_affinity(cloud, kernel);
    CHECK((b.W - b.W.transpose()).cwiseAbs().maxCoeff() == 0.0);
    for (int i = 0; i < b.n; ++i) {
        CHECK(b.W(i, i) == doctest::Approx(kernel.f0()));
        CHECK(b.D(i) > 0.0);
        CHECK(std::abs(b.A.row(i).sum() - 1.0) <= 1e-12);
    }
}

TEST_CASE("degenerate degrees raise an error") {
    // A valid but vanishingly small kernel underflows the degree floor.
    const double tiny = 1e-305;
    kernelgraph::KernelFn k(
        "tiny", [tiny](double t) { return tiny * std::exp(-t); },
        [tiny](double t) { return -tiny * std::exp(-t); },
        [tiny](double t) { return tiny * std::exp(-t); });
    Eigen::MatrixXd data(1, 2);
    data << 0.0, 1.0;
    CHECK_THROWS_AS(kernelgraph::build_affinity(cloud_from(data), k),
                    degenerate_degree_error);
}

TEST_CASE("shift decomposition reconstructs exactly with the stated ranks") {
    const auto cloud = rngkit::sample_gaussian_cloud(60, 40, {6, 0, Purpose::XCloud});
    const auto kernel = kernelgraph::gaussian_kernel(1.0);
    const auto b = kernelgraph::build_affinity(cloud, kernel);
    const auto sd = kernelgraph::shift_decomposition(b, cloud);

    const Eigen::MatrixXd recon = sd.sh0 + sd.sh1 + sd.sh2 + sd.w_tilde;
    const double wmax = b.W.cwiseAbs().maxCoeff();
    CHECK((recon - b.W).cwiseAbs().maxCoeff() <= 1e-12 * wmax);

    CHECK(numerical_rank(sd.sh0) == 1);
    CHECK(numerical_rank(sd.sh1) <= 2);
    CHECK(numerical_rank(sd.sh2) <= 3);
}

TEST_CASE("equal samples collapse psi to a constant") {
    Eigen::MatrixXd data(2, 4);
    for (int j = 0; j < 4; ++j) data.col(j) << 0.6, -0.8;
    const auto kernel = kernelgraph::gaussian_kernel(1.0);
    const auto b = kernelgraph::build_affinity(cloud_from(data), kernel);
    const auto sd = kernelgraph::shift_decomposition(b, cloud_from(data));
    for (int i = 1; i < 4; ++i) CHECK(sd.psi(i) == doctest::Approx(sd.psi(0)));
    CHECK(numerical_rank(sd.sh1) <= 2);
}

TEST_CASE("shift norms at n = p = 500 stay in the frozen window") {
    // The rank-one cross term makes ||sh1|| order |f'(2)| sqrt(2 n) here, not
    // vanishing; what is small is the part acting orthogonally to the ones
    // vector. Constants frozen from oracle runs at this seed.
    const int n = 500;
    const auto cloud = rngkit::sample_gaussian_cloud(n, n, {100, 0, Purpose::XCloud});
    const auto kernel = kernelgraph::gaussian_kernel(1.0);
    const auto b = kernelgraph::build_affinity(cloud, kernel);
    const auto sd = kernelgraph::shift_decomposition(b, cloud);
    const double norms = op_norm_sym(sd.sh1) + op_norm_sym(sd.sh2);
    CHECK(norms > 3.0);
    CHECK(norms < 9.0);

    const Eigen::MatrixXd proj =
        Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
    CHECK(op_norm_sym(proj * (sd.sh1 + sd.sh2) * proj) < 0.5);
}

TEST_CASE("degree deviation matches hand arithmetic on identical samples") {
    Eigen::MatrixXd data(3, 2);
    data.col(0) << 0.3, 0.1, -0.2;
    data.col(1) = data.col(0);
    const auto b = kernelgraph::build_affinity(cloud_from(data),
                                               kernelgraph::gaussian_kernel(1.0));
    // D(i) = 2, n/D(i) = 1, 1/f(2) = e.
    CHECK(kernelgraph::degree_deviation(b) ==
          doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-12));
}

TEST_CASE("degree deviation is permutation invariant and concentrates") {
    const int n = 300;
    const auto kernel = kernelgraph::gaussian_kernel(1.0);
    const auto cloud = rngkit::sample_gaussian_cloud(n, n, {8, 0, Purpose::XCloud});
    const auto b = kernelgraph::build_affinity(cloud, kernel);
    const double dev = kernelgraph::degree_deviation(b);
    CHECK(dev <= 10.0 * std::log(n) / std::sqrt(static_cast<double>(n)));

    Eigen::MatrixXd shuffled(cloud.p, n);
    for (int j = 0; j < n; ++j) shuffled.col(j) = cloud.data.col((j * 7 + 3) % n);
    const auto b2 = kernelgraph::build_affinity(cloud_from(shuffled), kernel);
    CHECK(kernelgraph::degree_deviation(b2) == doctest::Approx(dev).epsilon(1e-12));
}

TEST_CASE("k matrices on an orthonormal cloud") {
    const int n = 5;
    const auto kernel = kernelgraph::gaussian_kernel(1.0);
    const auto cloud = cloud_from(Eigen::MatrixXd::Identity(n, n));
    const auto [k, kb] = kernelgraph::k_matrices(cloud, kernel);
    const double expect = -2.0 * kernel.df2() + kernel.varsigma();
    for (int i = 0; i < n; ++i) {
        CHECK(k(i, i) == doctest::Approx(kernel.f0()));
        for (int j = 0; j < n; ++j)
            CHECK(kb(i, j) == doctest::Approx(i == j ? expect : 0.0));
    }
}

TEST_CASE("gram-shift product approximates the affinity matrix") {
    const int n = 300;
    const auto kernel = kernelgraph::gaussian_kernel(1.0);
    const auto cloud = rngkit::sample_gaussian_cloud(n, n, {12, 0, Purpose::XCloud});
    const auto b = kernelgraph::build_affinity(cloud, kernel);
    const auto sd = kernelgraph::shift_decomposition(b, cloud);
    const auto [k, kb] = kernelgraph::k_matrices(cloud, kernel);
    const Eigen::MatrixXd approx = kb + sd.sh0 + sd.sh1 + sd.sh2;
    CHECK(op_norm_sym(b.W - approx) <= std::pow(n, -0.1));
}

}  // TEST_SUITE
