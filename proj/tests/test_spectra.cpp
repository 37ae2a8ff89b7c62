#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>

#include "fusionspec/errors.hpp"
#include "fusionspec/freeprob.hpp"
#include "fusionspec/kernelgraph.hpp"
#include "fusionspec/rngkit.hpp"
#include "fusionspec/spectra.hpp"

using namespace fusionspec;
using rngkit::Purpose;

TEST_SUITE("spectra") {

TEST_CASE("diagonal matrices sort descending") {
    Eigen::MatrixXd m = Eigen::Vector3d(3.0, 1.0, 2.0).asDiagonal();
    const auto spec = spectra::eigenvalues_general(m);
    CHECK(spec.re(0) == doctest::Approx(3.0));
    CHECK(spec.re(1) == doctest::Approx(2.0));
    CHECK(spec.re(2) == doctest::Approx(1.0));
}

TEST_CASE("rotation matrix orders the conjugate pair by imaginary part") {
    Eigen::MatrixXd m(2, 2);
    m << 0.0, -1.0, 1.0, 0.0;
    const auto spec = spectra::eigenvalues_general(m);
    CHECK(spec.eigenvalues[0].imag() == doctest::Approx(1.0));
    CHECK(spec.eigenvalues[1].imag() == doctest::Approx(-1.0));
    CHECK(spec.conjugate_pairing_ok);
}

TEST_CASE("trace residuals stay small on random matrices") {
    rngkit::CounterRng rng({17, 0, Purpose::Other});
    Eigen::MatrixXd m(50, 50);
    std::uint64_t ctr = 0;
    for (int j = 0; j < 50; ++j)
        for (int i = 0; i < 50; ++i) m(i, j) = rng.gaussian_at(ctr++);
    const auto spec = spectra::eigenvalues_general(m);
    CHECK(spec.trace_residual <= 1e-8 * (1.0 + std::abs(m.trace())));
    CHECK(spec.trace2_residual <= 1e-6 * (1.0 + std::abs(m.cwiseProduct(m.transpose()).sum())));
    CHECK(spec.conjugate_pairing_ok);
}

TEST_CASE("similarity under a permutation leaves the spectrum unchanged") {
    rngkit::CounterRng rng({23, 0, Purpose::Other});
    const int n = 24;
    Eigen::MatrixXd m(n, n);
    std::uint64_t ctr = 0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) m(i, j) = rng.gaussian_at(ctr++);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(n);
    perm.setIdentity();
    for (int i = n - 1; i > 0; --i)
        perm.applyTranspositionOnTheRight(i, static_cast<int>(rng.u64_at(1000 + static_cast<std::uint64_t>(i)) % static_cast<std::uint64_t>(i + 1)));
    const Eigen::MatrixXd pm = perm * m * perm.inverse();
    auto a = spectra::eigenvalues_general(m).eigenvalues;
    auto b = spectra::eigenvalues_general(pm).eigenvalues;
    for (size_t k = 0; k < a.size(); ++k) CHECK(std::abs(a[k] - b[k]) < 1e-8);
}

TEST_CASE("symmetric solver handles identity and rank one") {
    const auto id = spectra::eigenvalues_symmetric(Eigen::MatrixXd::Identity(4, 4));
    for (double v : id.atoms) CHECK(v == doctest::Approx(1.0));

    const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(4, 4);
    const auto rk1 = spectra::eigenvalues_symmetric(ones);
    CHECK(rk1.atoms[0] == doctest::Approx(4.0));
    for (int i = 1; i < 4; ++i) CHECK(rk1.atoms[static_cast<size_t>(i)] == doctest::Approx(0.0));
}

TEST_CASE("symmetric solver rejects asymmetric input") {
    Eigen::MatrixXd m(2, 2);
    m << 1.0, 2.0, 3.0, 4.0;
    CHECK_THROWS_AS(spectra::eigenvalues_symmetric(m), contract_error);
}

TEST_CASE("gram-shift matrix has its top atom at the law's edge") {
    const int n = 500;
    const auto kernel = kernelgraph::gaussian_kernel(1.0);
    const auto cloud = rngkit::sample_gaussian_cloud(n, n, {31, 0, Purpose::XCloud});
    const auto [k, kb] = kernelgraph::k_matrices(cloud, kernel);
    const auto eigs = spectra::eigenvalues_symmetric(0.5 * (kb + kb.transpose()));
    const double edge = kernel.varsigma() + 4.0 * std::exp(-1.0);
    CHECK(std::abs(eigs.atoms[0] - edge) < 0.05);
    // Positive definiteness: smallest atom stays above varsigma - tolerance.
    CHECK(eigs.atoms.back() >= kernel.varsigma() - 1e-10);
}

TEST_CASE("esd stieltjes basics") {
    spectra::EmpiricalMeasure one_atom{{0.0}};
    const auto v = spectra::esd_stieltjes(one_atom, {0.0, 1.0});
    CHECK(std::abs(v - std::complex<double>(0.0, 1.0)) < 1e-15);

    spectra::EmpiricalMeasure m{{2.0, 1.0, -0.5, 0.25}};
    for (double eta : {0.1, 0.5, 2.0}) {
        const auto w = spectra::esd_stieltjes(m, {0.3, eta});
        CHECK(std::abs(w) <= 1.0 / eta + 1e-15);
    }
    CHECK_THROWS_AS(spectra::esd_stieltjes(m, {0.3, -1.0}), transform_domain_error);
}

TEST_CASE("large gram esd matches the closed-form law") {
    const int n = 2000;
    const auto cloud = rngkit::sample_gaussian_cloud(n, n, {41, 0, Purpose::XCloud});
    const Eigen::MatrixXd gram = cloud.data.transpose() * cloud.data;
    const auto eigs = spectra::eigenvalues_symmetric(0.5 * (gram + gram.transpose()));
    const std::complex<double> z(1.0, 0.05);
    const auto emp = spectra::esd_stieltjes(eigs, z);
    const auto law = freeprob::SpectralMeasure::mp(1.0, 1.0).stieltjes(z);
    CHECK(std::abs(emp - law) <= 0.02);
}

TEST_CASE("product spectrum equals the symmetrized product spectrum") {
    const int n = 120;
    const auto kernel = kernelgraph::gaussian_kernel(1.0);
    const auto cx = rngkit::sample_gaussian_cloud(n, n, {43, 0, Purpose::XCloud});
    const auto cy = rngkit::sample_gaussian_cloud(n, n, {43, 0, Purpose::YCloud});
    const auto [kx, kbx] = kernelgraph::k_matrices(cx, kernel);
    const auto [ky, kby] = kernelgraph::k_matrices(cy, kernel);

    const auto prod = spectra::eigenvalues_general(kbx * kby);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (kbx + kbx.transpose()));
    const Eigen::MatrixXd root = es.operatorSqrt();
    const Eigen::MatrixXd sym_raw = root * kby * root;
    const auto sym = spectra::eigenvalues_symmetric(0.5 * (sym_raw + sym_raw.transpose()));
    for (int i = 0; i < n; ++i) {
        CHECK(std::abs(prod.eigenvalues[static_cast<size_t>(i)].imag()) < 1e-7);
        CHECK(std::abs(prod.re(i) - sym.atoms[static_cast<size_t>(i)]) < 1e-7);
    }
}

}  // TEST_SUITE
