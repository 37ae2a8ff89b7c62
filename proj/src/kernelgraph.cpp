#include "fusionspec/kernelgraph.hpp"

#include <cmath>

#include "fusionspec/errors.hpp"
#include "fusionspec/parallel.hpp"

namespace fusionspec::kernelgraph {

KernelFn::KernelFn(std::string name, std::function<double(double)> f,
                   std::function<double(double)> df, std::function<double(double)> ddf,
                   double bandwidth)
    : name_(std::move(name)),
      f_(std::move(f)),
      df_(std::move(df)),
      ddf_(std::move(ddf)),
      bandwidth_(bandwidth) {
    values_.f0 = f_(0.0);
    values_.f2 = f_(2.0);
    values_.df2 = df_(2.0);
    values_.ddf2 = ddf_(2.0);
    values_.varsigma = values_.f0 + 2.0 * values_.df2 - values_.f2;
    if (!(values_.f2 > 0.0))
        throw kernel_condition_error("kernel '" + name_ + "': f(2) must be positive");
    if (!(values_.varsigma > 0.0))
        throw kernel_condition_error("kernel '" + name_ +
                                     "': f(0) + 2 f'(2) - f(2) must be positive");
    // Monotonicity spot check: 0 followed by 63 log-spaced points up to 10.
    double prev = values_.f0;
    for (int k = 0; k < 63; ++k) {
        const double t = 1e-6 * std::pow(10.0 / 1e-6, k / 62.0);
        const double v = f_(t);
        if (v > prev + 1e-12)
            throw kernel_condition_error("kernel '" + name_ +
                                         "': not decreasing near t=" + std::to_string(t));
        prev = v;
    }
}

KernelFn gaussian_kernel(double sigma) {
    if (!(sigma > 0.0)) throw contract_error("gaussian_kernel: sigma must be positive");
    const double inv = 1.0 / (2.0 * sigma * sigma);
    return KernelFn(
        "gaussian", [inv](double t) { return std::exp(-t * inv); },
        [inv](double t) { return -inv * std::exp(-t * inv); },
        [inv](double t) { return inv * inv * std::exp(-t * inv); }, sigma);
}

AffinityBundle build_affinity(const rngkit::DataCloud& cloud, const KernelFn& kernel) {
    const int n = cloud.n;
    if (n < 2) throw dimension_error("build_affinity: need at least two samples");
    if (!cloud.data.allFinite()) throw contract_error("build_affinity: non-finite data");

    const Eigen::MatrixXd gram = cloud.data.transpose() * cloud.data;
    const Eigen::VectorXd sq = gram.diagonal();

    AffinityBundle bundle;
    bundle.n = n;
    bundle.kernel = kernel.values();
    bundle.W.resize(n, n);
    // Column j owns W(i,j) for i<j and the mirrored W(j,i), so every entry is
    // written by exactly one thread and the result is thread-count independent.
    parallel_for(0, n, [&](std::int64_t j) {
        for (int i = 0; i < static_cast<int>(j); ++i) {
            double d2 = sq(i) + sq(j) - 2.0 * gram(i, static_cast<int>(j));
            if (d2 < 0.0) d2 = 0.0;
            const double w = kernel(d2);
            bundle.W(i, static_cast<int>(j)) = w;
            bundle.W(static_cast<int>(j), i) = w;
        }
        bundle.W(static_cast<int>(j), static_cast<int>(j)) = kernel.f0();
    });

    bundle.D.resize(n);
    parallel_for(0, n, [&](std::int64_t i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += bundle.W(static_cast<int>(i), j);
        bundle.D(static_cast<int>(i)) = acc;
    });
    for (int i = 0; i < n; ++i)
        if (!(bundle.D(i) > 1e-300))
            throw degenerate_degree_error("build_affinity: degree " + std::to_string(i) +
                                          " collapsed to " + std::to_string(bundle.D(i)));

    bundle.A.resize(n, n);
    parallel_for(0, n, [&](std::int64_t i) {
        bundle.A.row(i) = bundle.W.row(i) / bundle.D(static_cast<int>(i));
    });
    return bundle;
}

ShiftDecomposition shift_decomposition(const AffinityBundle& bundle,
                                       const rngkit::DataCloud& cloud) {
    const int n = bundle.n;
    if (cloud.n != n) throw dimension_error("shift_decomposition: cloud/bundle mismatch");

    ShiftDecomposition sd;
    sd.psi = cloud.data.colwise().squaredNorm().transpose().array() - 1.0;
    const Eigen::VectorXd psi2 = sd.psi.array().square();
    const double f2 = bundle.kernel.f2;
    const double df2 = bundle.kernel.df2;
    const double half_ddf2 = 0.5 * bundle.kernel.ddf2;

    sd.sh0.resize(n, n);
    sd.sh1.resize(n, n);
    sd.sh2.resize(n, n);
    sd.w_tilde.resize(n, n);
    parallel_for(0, n, [&](std::int64_t jj) {
        const int j = static_cast<int>(jj);
        for (int i = 0; i < n; ++i) {
            sd.sh0(i, j) = f2;
            sd.sh1(i, j) = df2 * (sd.psi(j) + sd.psi(i));
            sd.sh2(i, j) = half_ddf2 * (psi2(j) + psi2(i) + 2.0 * sd.psi(i) * sd.psi(j));
            sd.w_tilde(i, j) = bundle.W(i, j) - sd.sh0(i, j) - sd.sh1(i, j) - sd.sh2(i, j);
        }
    });
    return sd;
}

double degree_deviation(const AffinityBundle& bundle) {
    const double inv_f2 = 1.0 / bundle.kernel.f2;
    double dev = 0.0;
    for (int i = 0; i < bundle.n; ++i)
        dev = std::max(dev, std::abs(bundle.n / bundle.D(i) - inv_f2));
    return dev;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> k_matrices(const rngkit::DataCloud& cloud,
                                                       const KernelFn& kernel) {
    const int n = cloud.n;
    const Eigen::MatrixXd gram = cloud.data.transpose() * cloud.data;
    Eigen::MatrixXd k(n, n), k_breve(n, n);
    const double f2 = kernel.f2(), df2 = kernel.df2(), vs = kernel.varsigma();
    parallel_for(0, n, [&](std::int64_t j) {
        for (int i = 0; i < n; ++i) {
            const double g = gram(i, static_cast<int>(j));
            k(i, static_cast<int>(j)) =
                (i == static_cast<int>(j)) ? kernel.f0() : f2 - 2.0 * df2 * g;
            k_breve(i, static_cast<int>(j)) =
                -2.0 * df2 * g + ((i == static_cast<int>(j)) ? vs : 0.0);
        }
    });
    return {std::move(k), std::move(k_breve)};
}

}  // namespace fusionspec::kernelgraph
