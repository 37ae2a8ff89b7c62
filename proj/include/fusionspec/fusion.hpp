#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fusionspec/kernelgraph.hpp"
#include "fusionspec/rngkit.hpp"

namespace fusionspec::fusion {

enum class FusionKind { NCCA, AD, S1, S2, S3, Qxy };

struct FusionMatrix {
    Eigen::MatrixXd matrix;
    FusionKind kind = FusionKind::NCCA;
    bool n2_scaled = false;  // whether the n^2 factor is applied
};

// S_xy = A_x A_y'.
FusionMatrix ncca_matrix(const kernelgraph::AffinityBundle& bx,
                         const kernelgraph::AffinityBundle& by);

// A_xy = A_x A_y; row sums are exactly one up to rounding.
FusionMatrix ad_matrix(const kernelgraph::AffinityBundle& bx,
                       const kernelgraph::AffinityBundle& by);

// Diagnostic reduction chain {n^2 S_xy, S1, S2, S3, Qxy}:
//   S1  = (n^{-1} D_x)^{-1} Wt_x Wt_y (n^{-1} D_y)^{-1}
//   S2  = f(2)^{-2} Wt_x Wt_y
//   S3  = f(2)^{-2} Kbreve_x Kbreve_y
//   Qxy = f(2)^{-2} U Sigma_x U' Sigma_y   with a fresh Haar U.
std::vector<FusionMatrix> reduction_chain(const rngkit::DataCloud& cx,
                                          const rngkit::DataCloud& cy,
                                          const kernelgraph::KernelFn& kernel,
                                          const rngkit::SeedSpec& haar_seed);

}  // namespace fusionspec::fusion
