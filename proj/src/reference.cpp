#include "fusionspec/reference.hpp"

#include <cmath>

#include "fusionspec/errors.hpp"

namespace fusionspec::ref {

Eigen::MatrixXd gram(const rngkit::DataCloud& cloud) {
    Eigen::MatrixXd g(cloud.n, cloud.n);
    for (int j = 0; j < cloud.n; ++j)
        for (int i = 0; i < cloud.n; ++i) {
            double acc = 0.0;
            for (int k = 0; k < cloud.p; ++k) acc += cloud.data(k, i) * cloud.data(k, j);
            g(i, j) = acc;
        }
    return g;
}

kernelgraph::AffinityBundle build_affinity(const rngkit::DataCloud& cloud,
                                           const kernelgraph::KernelFn& kernel) {
    const int n = cloud.n;
    if (n < 2) throw dimension_error("ref::build_affinity: need at least two samples");
    kernelgraph::AffinityBundle bundle;
    bundle.n = n;
    bundle.kernel = kernel.values();
    bundle.W.resize(n, n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < j; ++i) {
            double d2 = (cloud.data.col(i) - cloud.data.col(j)).squaredNorm();
            if (d2 < 0.0) d2 = 0.0;
            const double w = kernel(d2);
            bundle.W(i, j) = w;
            bundle.W(j, i) = w;
        }
        bundle.W(j, j) = kernel.f0();
    }
    bundle.D.resize(n);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += bundle.W(i, j);
        bundle.D(i) = acc;
    }
    for (int i = 0; i < n; ++i)
        if (!(bundle.D(i) > 1e-300))
            throw degenerate_degree_error("ref::build_affinity: degree collapsed");
    bundle.A.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) bundle.A(i, j) = bundle.W(i, j) / bundle.D(i);
    return bundle;
}

kernelgraph::ShiftDecomposition shift_decomposition(
    const kernelgraph::AffinityBundle& bundle, const rngkit::DataCloud& cloud) {
    const int n = bundle.n;
    kernelgraph::ShiftDecomposition sd;
    sd.psi.resize(n);
    for (int i = 0; i < n; ++i) sd.psi(i) = cloud.data.col(i).squaredNorm() - 1.0;
    sd.sh0.resize(n, n);
    sd.sh1.resize(n, n);
    sd.sh2.resize(n, n);
    sd.w_tilde.resize(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            sd.sh0(i, j) = bundle.kernel.f2;
            sd.sh1(i, j) = bundle.kernel.df2 * (sd.psi(i) + sd.psi(j));
            sd.sh2(i, j) = 0.5 * bundle.kernel.ddf2 *
                           (sd.psi(i) * sd.psi(i) + sd.psi(j) * sd.psi(j) +
                            2.0 * sd.psi(i) * sd.psi(j));
            sd.w_tilde(i, j) = bundle.W(i, j) - sd.sh0(i, j) - sd.sh1(i, j) - sd.sh2(i, j);
        }
    return sd;
}

rngkit::DataCloud sample_gaussian_cloud(int n, int p, const rngkit::SeedSpec& seed) {
    rngkit::CounterRng rng(seed);
    rngkit::DataCloud cloud;
    cloud.p = p;
    cloud.n = n;
    cloud.data.resize(p, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(p));
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < p; ++i)
            cloud.data(i, j) =
                rng.gaussian_at(static_cast<std::uint64_t>(j) * p + i) * scale;
    return cloud;
}

}  // namespace fusionspec::ref
