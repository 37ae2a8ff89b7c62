#include "fusionspec/inference.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "fusionspec/errors.hpp"
#include "fusionspec/fusion.hpp"
#include "fusionspec/parallel.hpp"

namespace fusionspec::inference {

namespace {

// Stream id layout: every (setting, role, replicate) triple maps to its own
// block so concurrent replicates never share a stream.
constexpr std::uint64_t kSettingStride = 1ull << 40;
constexpr std::uint64_t kRetryOffset = 1ull << 32;
constexpr std::uint64_t kPowerOffset = 1ull << 33;

// T(L) for all L in [3, L0] in one sweep (running max of ratios).
std::vector<double> ratio_profile(const spectra::Spectrum& spec, int L0) {
    std::vector<double> out(static_cast<size_t>(L0 - 2));
    double running = 0.0;
    for (int i = 3; i <= L0; ++i) {
        const double denom = spec.re(i);  // Re lambda_{i+1}, zero-based index i
        const double numer = spec.re(i - 1);
        if (denom == 0.0)
            throw degenerate_spectrum_error("ratio statistic: Re lambda_" +
                                            std::to_string(i + 1) + " is zero");
        running = std::max(running, std::abs(numer / denom));
        out[static_cast<size_t>(i - 3)] = running;
    }
    return out;
}

}  // namespace

spectra::Spectrum ncca_spectrum(const rngkit::DataCloud& x, const rngkit::DataCloud& y,
                                const kernelgraph::KernelFn& kernel) {
    const auto bx = kernelgraph::build_affinity(x, kernel);
    const auto by = kernelgraph::build_affinity(y, kernel);
    return spectra::eigenvalues_general(fusion::ncca_matrix(bx, by).matrix);
}

RatioStatistic ratio_statistic(const spectra::Spectrum& spec, int L) {
    if (L < 3) throw contract_error("ratio_statistic: need L >= 3");
    if (spec.size() < L + 1)
        throw dimension_error("ratio_statistic: spectrum shorter than L + 1");
    RatioStatistic rs;
    rs.L = L;
    rs.value = ratio_profile(spec, L).back();
    return rs;
}

CalibrationTable calibrate(int n, int p1, int p2, const kernelgraph::KernelFn& kernel,
                           double alpha, int L0, int B, const rngkit::SeedSpec& seed) {
    if (B < 100) throw contract_error("calibrate: need B >= 100");
    if (L0 < 3) throw contract_error("calibrate: need L0 >= 3");
    if (!(alpha > 0.0 && alpha < 1.0)) throw contract_error("calibrate: alpha in (0,1)");
    if (n < L0 + 1) throw dimension_error("calibrate: need n > L0");

    const size_t cols = static_cast<size_t>(L0 - 2);
    std::vector<double> stats(static_cast<size_t>(B) * cols);
    std::vector<std::string> failures(static_cast<size_t>(B));

    parallel_for(0, B, [&](std::int64_t b) {
        auto run = [&](std::uint64_t stream) {
            const auto x = rngkit::sample_gaussian_cloud(
                n, p1, {seed.master_seed, stream, rngkit::Purpose::XCloud});
            const auto y = rngkit::sample_gaussian_cloud(
                n, p2, {seed.master_seed, stream, rngkit::Purpose::YCloud});
            return ratio_profile(ncca_spectrum(x, y, kernel), L0);
        };
        std::vector<double> row;
        try {
            row = run(static_cast<std::uint64_t>(b));
        } catch (const numeric_error&) {
            // One retry on a reserved stream, then give up for this replicate.
            try {
                row = run(kRetryOffset + static_cast<std::uint64_t>(b));
            } catch (const numeric_error& e2) {
                failures[static_cast<size_t>(b)] = e2.what();
                return;
            }
        }
        std::copy(row.begin(), row.end(), stats.begin() + static_cast<size_t>(b) * cols);
    });
    for (int b = 0; b < B; ++b)
        if (!failures[static_cast<size_t>(b)].empty())
            throw numeric_error("calibrate: replicate " + std::to_string(b) +
                                " failed twice: " + failures[static_cast<size_t>(b)]);

    CalibrationTable table;
    table.n = n;
    table.p1 = p1;
    table.p2 = p2;
    table.alpha = alpha;
    table.L0 = L0;
    table.B = B;
    table.master_seed = seed.master_seed;
    table.kernel_name = kernel.name();
    table.kernel_sigma = kernel.bandwidth();
    table.theta_of_L.resize(cols);

    const size_t kth = static_cast<size_t>(std::ceil(alpha * B)) - 1;
    std::vector<double> dev(static_cast<size_t>(B));
    for (size_t col = 0; col < cols; ++col) {
        for (size_t b = 0; b < static_cast<size_t>(B); ++b)
            dev[b] = std::abs(stats[b * cols + col] - 1.0);
        std::nth_element(dev.begin(), dev.begin() + static_cast<std::ptrdiff_t>(kth),
                         dev.end());
        table.theta_of_L[col] = dev[kth];
    }

    table.theta_star = *std::max_element(table.theta_of_L.begin(), table.theta_of_L.end());
    table.L_star = 3;
    for (int L = 3; L <= L0; ++L)
        if (table.theta(L) >= table.theta_star - 1e-12) table.L_star = L;
    return table;
}

TestOutcome run_test(const rngkit::DataCloud& x, const rngkit::DataCloud& y,
                     const kernelgraph::KernelFn& kernel, const CalibrationTable& calib) {
    if (x.n != calib.n || y.n != calib.n || x.p != calib.p1 || y.p != calib.p2)
        throw dimension_error("run_test: data dimensions do not match the calibration");
    TestOutcome out;
    out.statistic = ratio_statistic(ncca_spectrum(x, y, kernel), calib.L_star);
    out.statistic.spectrum_ref = "ncca";
    out.theta_star = calib.theta_star;
    out.L_star = calib.L_star;
    out.significance = 1.0 - calib.alpha;
    out.reject = std::abs(out.statistic.value - 1.0) > calib.theta_star;
    return out;
}

std::vector<PowerPoint> power_curve(const std::vector<std::array<int, 3>>& settings,
                                    const kernelgraph::KernelFn& kernel,
                                    const PowerSettings& ps, const rngkit::SeedSpec& seed) {
    std::vector<PowerPoint> out;
    out.reserve(settings.size());
    for (size_t si = 0; si < settings.size(); ++si) {
        const auto [n, p1, p2] = settings[si];
        const std::uint64_t base = (static_cast<std::uint64_t>(si) + 1) * kSettingStride;
        const rngkit::SeedSpec calib_seed{seed.master_seed + base, 0,
                                          rngkit::Purpose::Other};
        const auto table =
            calibrate(n, p1, p2, kernel, ps.alpha, ps.L0, ps.B_calib, calib_seed);

        std::vector<std::uint8_t> rejected(static_cast<size_t>(ps.B_power), 0);
        parallel_for(0, ps.B_power, [&](std::int64_t b) {
            const rngkit::SeedSpec alt_seed{seed.master_seed + base,
                                            kPowerOffset + static_cast<std::uint64_t>(b),
                                            rngkit::Purpose::Other};
            const auto [xa, ya] = rngkit::sample_alternative_pair(n, p1, p2, alt_seed);
            try {
                rejected[static_cast<size_t>(b)] =
                    run_test(xa, ya, kernel, table).reject ? 1 : 0;
            } catch (const degenerate_spectrum_error&) {
                // Exact rank collapse under the alternative: the ratio is
                // unbounded, which is maximal evidence against the null.
                rejected[static_cast<size_t>(b)] = 1;
            }
        });
        double hits = 0.0;
        for (auto r : rejected) hits += r;
        out.push_back({n, p1, p2, hits / ps.B_power, 1.0 - ps.alpha});
    }
    return out;
}

std::vector<double> imaginary_ratio_profile(const spectra::Spectrum& spec, int k) {
    if (k < 1 || k > spec.size()) throw contract_error("imaginary_ratio_profile: bad k");
    std::vector<double> out(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) {
        const auto& l = spec.eigenvalues[static_cast<size_t>(i)];
        out[static_cast<size_t>(i)] = (l.real() == 0.0)
                                          ? std::numeric_limits<double>::infinity()
                                          : std::abs(l.imag()) / std::abs(l.real());
    }
    return out;
}

}  // namespace fusionspec::inference
