#pragma once

#include <Eigen/Dense>

#include "fusionspec/kernelgraph.hpp"
#include "fusionspec/rngkit.hpp"

// Straight-line serial implementations of the parallel kernels. These exist
// to pin down the parallel versions in tests and benchmarks; they trade all
// performance for obviousness.
namespace fusionspec::ref {

Eigen::MatrixXd gram(const rngkit::DataCloud& cloud);

kernelgraph::AffinityBundle build_affinity(const rngkit::DataCloud& cloud,
                                           const kernelgraph::KernelFn& kernel);

kernelgraph::ShiftDecomposition shift_decomposition(
    const kernelgraph::AffinityBundle& bundle, const rngkit::DataCloud& cloud);

rngkit::DataCloud sample_gaussian_cloud(int n, int p, const rngkit::SeedSpec& seed);

}  // namespace fusionspec::ref
