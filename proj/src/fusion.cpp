#include "fusionspec/fusion.hpp"

#include "fusionspec/errors.hpp"
#include "fusionspec/freeprob.hpp"

namespace fusionspec::fusion {

namespace {

void require_same_n(const kernelgraph::AffinityBundle& bx,
                    const kernelgraph::AffinityBundle& by) {
    if (bx.n != by.n) throw dimension_error("fusion: bundles disagree on n");
}

}  // namespace

FusionMatrix ncca_matrix(const kernelgraph::AffinityBundle& bx,
                         const kernelgraph::AffinityBundle& by) {
    require_same_n(bx, by);
    return {bx.A * by.A.transpose(), FusionKind::NCCA, false};
}

FusionMatrix ad_matrix(const kernelgraph::AffinityBundle& bx,
                       const kernelgraph::AffinityBundle& by) {
    require_same_n(bx, by);
    return {bx.A * by.A, FusionKind::AD, false};
}

std::vector<FusionMatrix> reduction_chain(const rngkit::DataCloud& cx,
                                          const rngkit::DataCloud& cy,
                                          const kernelgraph::KernelFn& kernel,
                                          const rngkit::SeedSpec& haar_seed) {
    if (cx.n != cy.n) throw dimension_error("reduction_chain: clouds disagree on n");
    const int n = cx.n;
    const double nn = static_cast<double>(n);
    const double inv_f2_sq = 1.0 / (kernel.f2() * kernel.f2());

    const auto bx = kernelgraph::build_affinity(cx, kernel);
    const auto by = kernelgraph::build_affinity(cy, kernel);
    const auto sdx = kernelgraph::shift_decomposition(bx, cx);
    const auto sdy = kernelgraph::shift_decomposition(by, cy);

    std::vector<FusionMatrix> chain;
    chain.reserve(5);
    chain.push_back({nn * nn * (bx.A * by.A.transpose()), FusionKind::NCCA, true});

    const Eigen::VectorXd dx_inv = nn * bx.D.cwiseInverse();
    const Eigen::VectorXd dy_inv = nn * by.D.cwiseInverse();
    chain.push_back({dx_inv.asDiagonal() * (sdx.w_tilde * sdy.w_tilde) *
                         dy_inv.asDiagonal(),
                     FusionKind::S1, true});
    chain.push_back({inv_f2_sq * (sdx.w_tilde * sdy.w_tilde), FusionKind::S2, true});

    const auto [kx, kbx] = kernelgraph::k_matrices(cx, kernel);
    const auto [ky, kby] = kernelgraph::k_matrices(cy, kernel);
    chain.push_back({inv_f2_sq * (kbx * kby), FusionKind::S3, true});

    const double s2 = -2.0 * kernel.df2();
    const auto nu_x = freeprob::SpectralMeasure::mp(nn / cx.p, s2, kernel.varsigma());
    const auto nu_y = freeprob::SpectralMeasure::mp(nn / cy.p, s2, kernel.varsigma());
    const auto [sig_x, sig_y] =
        freeprob::sigma_matrices(nu_x, nu_y, n, cx.p, cy.p, kernel.varsigma());
    const Eigen::MatrixXd u = rngkit::sample_haar_orthogonal(n, haar_seed);
    chain.push_back({inv_f2_sq * (u * sig_x.asDiagonal() * u.transpose() *
                                  sig_y.asDiagonal()),
                     FusionKind::Qxy, true});
    return chain;
}

}  // namespace fusionspec::fusion
