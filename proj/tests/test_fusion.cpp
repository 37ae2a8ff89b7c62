#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fusionspec/errors.hpp"
#include "fusionspec/fusion.hpp"
#include "fusionspec/kernelgraph.hpp"
#include "fusionspec/rngkit.hpp"
#include "fusionspec/spectra.hpp"
#include "fusionspec/verify.hpp"

using namespace fusionspec;
using rngkit::Purpose;

namespace {

kernelgraph::AffinityBundle bundle_with_a(const Eigen::MatrixXd& a) {
    kernelgraph::AffinityBundle b;
    b.n = static_cast<int>(a.rows());
    b.A = a;
    b.W = a;
    b.D = Eigen::VectorXd::Ones(b.n);
    b.kernel = kernelgraph::gaussian_kernel(1.0).values();
    return b;
}

rngkit::DataCloud constant_cloud(int n, int p, double fill) {
    rngkit::DataCloud c;
    c.p = p;
    c.n = n;
    c.data = Eigen::MatrixXd::Constant(p, n, fill);
    return c;
}

}  // namespace

TEST_SUITE("fusion") {

TEST_CASE("identity bundles give the identity product") {
    const auto b = bundle_with_a(Eigen::MatrixXd::Identity(6, 6));
    const auto s = fusion::ncca_matrix(b, b);
    CHECK((s.matrix - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-15);
    const auto ad = fusion::ad_matrix(b, b);
    CHECK((ad.matrix - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("identical point clouds give the flat doubly stochastic product") {
    const int n = 8;
    const auto kernel = kernelgraph::gaussian_kernel(1.0);
    const auto bx = kernelgraph::build_affinity(constant_cloud(n, 3, 0.4), kernel);
    const auto by = kernelgraph::build_affinity(constant_cloud(n, 5, -0.1), kernel);
    const auto s = fusion::ncca_matrix(bx, by);
    CHECK((s.matrix - Eigen::MatrixXd::Constant(n, n, 1.0 / n)).cwiseAbs().maxCoeff() <
          1e-14);
    const auto spec = spectra::eigenvalues_general(s.matrix);
    CHECK(spec.re(0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("dimension mismatch is rejected") {
    const auto a = bundle_with_a(Eigen::MatrixXd::Identity(4, 4));
    const auto b = bundle_with_a(Eigen::MatrixXd::Identity(5, 5));
    CHECK_THROWS_AS(fusion::ncca_matrix(a, b), dimension_error);
    CHECK_THROWS_AS(fusion::ad_matrix(a, b), dimension_error);
}

TEST_CASE("top eigenvalue of the product is trivial on a null draw") {
    const int n = 300;
    const auto kernel = kernelgraph::gaussian_kernel(1.0);
    const auto cx = rngkit::sample_gaussian_cloud(n, n, {51, 0, Purpose::XCloud});
    const auto cy = rngkit::sample_gaussian_cloud(n, n, {51, 0, Purpose::YCloud});
    const auto bx = kernelgraph::build_affinity(cx, kernel);
    const auto by = kernelgraph::build_affinity(cy, kernel);
    const auto spec = spectra::eigenvalues_general(fusion::ncca_matrix(bx, by).matrix);
    CHECK(std::abs(spec.re(0) - 1.0) <= 10.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("ad matrix is row stochastic with unit top eigenvalue") {
    const int n = 150;
    const auto kernel = kernelgraph::gaussian_kernel(1.0);
    const auto cx = rngkit::sample_gaussian_cloud(n, 80, {53, 0, Purpose::XCloud});
    const auto cy = rngkit::sample_gaussian_cloud(n, 60, {53, 0, Purpose::YCloud});
    const auto bx = kernelgraph::build_affinity(cx, kernel);
    const auto by = kernelgraph::build_affinity(cy, kernel);
    const auto ad = fusion::ad_matrix(bx, by);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    CHECK((ad.matrix * ones - ones).cwiseAbs().maxCoeff() <= 1e-10);
    const auto spec = spectra::eigenvalues_general(ad.matrix);
    CHECK(std::abs(spec.re(0) - 1.0) <= 1e-8);

    // A_y = I formally reduces the product to A_x.
    const auto id = bundle_with_a(Eigen::MatrixXd::Identity(n, n));
    const auto reduced = fusion::ad_matrix(bx, id);
    CHECK((reduced.matrix - bx.A).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("trace of the product computed two ways agrees") {
    const int n = 100;
    const auto kernel = kernelgraph::gaussian_kernel(1.0);
    const auto cx = rngkit::sample_gaussian_cloud(n, 50, {57, 0, Purpose::XCloud});
    const auto cy = rngkit::sample_gaussian_cloud(n, 70, {57, 0, Purpose::YCloud});
    const auto bx = kernelgraph::build_affinity(cx, kernel);
    const auto by = kernelgraph::build_affinity(cy, kernel);
    const auto s = fusion::ncca_matrix(bx, by);
    const double t1 = s.matrix.trace();
    const double t2 = bx.A.cwiseProduct(by.A).sum();  // tr(A_x A_y')
    CHECK(std::abs(t1 - t2) <= 1e-10 * (1.0 + std::abs(t1)));
}

TEST_CASE("reduction chain members line up") {
    const int n = 200;
    const auto kernel = kernelgraph::gaussian_kernel(1.0);
    const auto cx = rngkit::sample_gaussian_cloud(n, n, {61, 0, Purpose::XCloud});
    const auto cy = rngkit::sample_gaussian_cloud(n, n, {61, 0, Purpose::YCloud});
    const auto chain = fusion::reduction_chain(cx, cy, kernel, {61, 0, Purpose::Haar});
    REQUIRE(chain.size() == 5);
    CHECK(chain[0].kind == fusion::FusionKind::NCCA);
    CHECK(chain[0].n2_scaled);

    const auto sp_full = spectra::eigenvalues_general(chain[0].matrix);
    const auto sp_s1 = spectra::eigenvalues_general(chain[1].matrix);

    // lambda_{i+2} of the scaled product tracks lambda_i of the first
    // reduction; edge indices fluctuate more, so the band applies from i = 3.
    const double band = 10.0 / std::sqrt(static_cast<double>(n));
    std::vector<double> diffs;
    for (int i = 3; i + 2 <= n; ++i)
        diffs.push_back(std::abs(sp_full.re(i + 1) - sp_s1.re(i - 1)));
    CHECK(*std::max_element(diffs.begin(), diffs.end()) <= band);
    std::nth_element(diffs.begin(), diffs.begin() + static_cast<std::ptrdiff_t>(diffs.size() / 2), diffs.end());
    CHECK(diffs[diffs.size() / 2] <= 0.1);

    // S3 is similar to a symmetric positive matrix: real spectrum.
    const auto sp_s3 = spectra::eigenvalues_general(chain[3].matrix);
    for (const auto& l : sp_s3.eigenvalues)
        CHECK(std::abs(l.imag()) <= 1e-8 * std::max(1.0, std::abs(l.real())));
}

TEST_CASE("deterministic-equivalent member matches the third reduction in law") {
    const int n = 400;
    const auto kernel = kernelgraph::gaussian_kernel(1.0);
    const auto cx = rngkit::sample_gaussian_cloud(n, n, {63, 0, Purpose::XCloud});
    const auto cy = rngkit::sample_gaussian_cloud(n, n, {63, 0, Purpose::YCloud});
    const auto chain = fusion::reduction_chain(cx, cy, kernel, {63, 0, Purpose::Haar});

    const auto sp_s3 = spectra::eigenvalues_general(chain[3].matrix);
    const auto sp_q = spectra::eigenvalues_general(chain[4].matrix);
    std::vector<double> a, b;
    for (int i = 0; i < n; ++i) {
        a.push_back(sp_s3.re(i));
        b.push_back(sp_q.re(i));
    }
    const double ks =
        verify::levy_distance(spectra::EmpiricalMeasure{a}, spectra::EmpiricalMeasure{b});
    // Levy distance lower-bounds Kolmogorov; both stay well under 0.1 here.
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double ks_sup = 0.0;
    for (size_t k = 0; k < a.size(); ++k) {
        const double fa = static_cast<double>(k + 1) / n;
        const double fb =
            static_cast<double>(std::upper_bound(b.begin(), b.end(), a[k]) - b.begin()) / n;
        ks_sup = std::max(ks_sup, std::abs(fa - fb));
    }
    CHECK(ks <= 0.1);
    CHECK(ks_sup <= 0.1);
}

TEST_CASE("eigenvalue ratios are invariant under the n^2 scaling") {
    const int n = 120;
    const auto kernel = kernelgraph::gaussian_kernel(1.0);
    const auto cx = rngkit::sample_gaussian_cloud(n, 60, {67, 0, Purpose::XCloud});
    const auto cy = rngkit::sample_gaussian_cloud(n, 60, {67, 0, Purpose::YCloud});
    const auto bx = kernelgraph::build_affinity(cx, kernel);
    const auto by = kernelgraph::build_affinity(cy, kernel);
    const Eigen::MatrixXd s = fusion::ncca_matrix(bx, by).matrix;

    const auto sp1 = spectra::eigenvalues_general(s);
    const auto sp2 = spectra::eigenvalues_general(static_cast<double>(n) * n * s);
    for (int i = 2; i < 20; ++i) {
        const double r1 = sp1.re(i) / sp1.re(i + 1);
        const double r2 = sp2.re(i) / sp2.re(i + 1);
        CHECK(std::abs(r1 - r2) <= 1e-12 * std::max(1.0, std::abs(r1)));
    }
}

}  // TEST_SUITE
