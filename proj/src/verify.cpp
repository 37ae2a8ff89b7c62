#include "fusionspec/verify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "fusionspec/errors.hpp"
#include "fusionspec/freeprob.hpp"
#include "fusionspec/fusion.hpp"
#include "fusionspec/parallel.hpp"

namespace fusionspec::verify {

Constants default_constants() { return Constants{}; }

Constants load_constants(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("load_constants: cannot open " + path);
    std::map<std::string, double> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        key.erase(std::remove_if(key.begin(), key.end(), ::isspace), key.end());
        if (key.empty()) continue;
        kv[key] = std::stod(line.substr(eq + 1));
    }
    Constants c;
    auto get = [&](const char* key, double& slot) {
        if (auto it = kv.find(key); it != kv.end()) slot = it->second;
    };
    get("edge_cluster_c", c.edge_cluster_c);
    get("lambda1_c", c.lambda1_c);
    get("rigidity_edge_c", c.rigidity_edge_c);
    get("rigidity_bulk_c", c.rigidity_bulk_c);
    get("rigidity_crossover_c", c.rigidity_crossover_c);
    get("rigidity_theta", c.rigidity_theta);
    get("rigidity_eps", c.rigidity_eps);
    get("degree_dev_c", c.degree_dev_c);
    return c;
}

void save_constants(const Constants& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("save_constants: cannot open " + path);
    out << "edge_cluster_c=" << c.edge_cluster_c << "\n"
        << "lambda1_c=" << c.lambda1_c << "\n"
        << "rigidity_edge_c=" << c.rigidity_edge_c << "\n"
        << "rigidity_bulk_c=" << c.rigidity_bulk_c << "\n"
        << "rigidity_crossover_c=" << c.rigidity_crossover_c << "\n"
        << "rigidity_theta=" << c.rigidity_theta << "\n"
        << "rigidity_eps=" << c.rigidity_eps << "\n"
        << "degree_dev_c=" << c.degree_dev_c << "\n";
}

spectra::EmpiricalMeasure mc_free_conv_oracle(const Eigen::VectorXd& sigma_x,
                                              const Eigen::VectorXd& sigma_y, int trials,
                                              const rngkit::SeedSpec& seed) {
    if (trials < 1) throw contract_error("mc_free_conv_oracle: need trials >= 1");
    if (sigma_x.size() != sigma_y.size())
        throw dimension_error("mc_free_conv_oracle: diagonal size mismatch");
    const int n = static_cast<int>(sigma_x.size());
    if ((sigma_x.array() < 0.0).any())
        throw contract_error("mc_free_conv_oracle: sigma_x must be nonnegative");
    const Eigen::VectorXd root_x = sigma_x.cwiseSqrt();

    std::vector<double> pooled(static_cast<size_t>(trials) * n);
    parallel_for(0, trials, [&](std::int64_t t) {
        const Eigen::MatrixXd u = rngkit::sample_haar_orthogonal(
            n, seed.with_stream(static_cast<std::uint64_t>(t)).with_purpose(
                   rngkit::Purpose::Haar));
        // Sigma_x U Sigma_y U' is similar to the symmetric
        // sqrt(Sigma_x) U Sigma_y U' sqrt(Sigma_x); same spectrum, real solver.
        const Eigen::MatrixXd sym = root_x.asDiagonal() * u * sigma_y.asDiagonal() *
                                    u.transpose() * root_x.asDiagonal();
        const Eigen::MatrixXd symm = 0.5 * (sym + sym.transpose());
        const auto eigs = spectra::eigenvalues_symmetric(symm);
        std::copy(eigs.atoms.begin(), eigs.atoms.end(),
                  pooled.begin() + static_cast<size_t>(t) * n);
    });
    std::sort(pooled.begin(), pooled.end(), std::greater<>());
    return {std::move(pooled)};
}

RigidityReport check_rigidity(const rngkit::DataCloud& cloud,
                              const kernelgraph::KernelFn& kernel, const Constants& c) {
    const int n = cloud.n;
    const auto bundle = kernelgraph::build_affinity(cloud, kernel);
    const auto eigs = spectra::eigenvalues_symmetric(bundle.W);

    const auto nu = freeprob::SpectralMeasure::mp(static_cast<double>(n) / cloud.p,
                                                  -2.0 * kernel.df2(), kernel.varsigma());
    const int half = n / 2;
    RigidityReport rep;
    rep.deviations.resize(static_cast<size_t>(half));
    rep.band.resize(static_cast<size_t>(half));
    const double crossover =
        c.rigidity_crossover_c * std::pow(n, 5.0 / 6.0 + 1.5 * c.rigidity_theta);
    const double edge_band =
        c.rigidity_edge_c * std::pow(n, -1.0 / 9.0 + 2.0 * c.rigidity_theta);
    parallel_for(1, half + 1, [&](std::int64_t i) {
        const double gamma = nu.typical_location(static_cast<int>(i), n);
        rep.deviations[static_cast<size_t>(i - 1)] =
            std::abs(eigs.atoms[static_cast<size_t>(i)] - gamma);
        rep.band[static_cast<size_t>(i - 1)] =
            (static_cast<double>(i) <= crossover)
                ? edge_band
                : c.rigidity_bulk_c * std::pow(n, 1.0 / 12.0 + c.rigidity_eps) *
                      std::pow(static_cast<double>(i), -1.0 / 3.0);
    });

    int pass = 0;
    for (int i = 0; i < half; ++i)
        if (rep.deviations[static_cast<size_t>(i)] <= rep.band[static_cast<size_t>(i)])
            ++pass;
    rep.pass_fraction = static_cast<double>(pass) / half;

    std::vector<double> bulk(rep.deviations.begin() + n / 10, rep.deviations.end());
    std::nth_element(bulk.begin(), bulk.begin() + static_cast<std::ptrdiff_t>(bulk.size() / 2),
                     bulk.end());
    rep.median_bulk_deviation = bulk[bulk.size() / 2];

    rep.degree_dev = kernelgraph::degree_deviation(bundle);
    rep.degree_dev_bound = c.degree_dev_c * std::log(n) / std::sqrt(n);
    return rep;
}

EdgeReport check_edge_cluster(const rngkit::DataCloud& cx, const rngkit::DataCloud& cy,
                              const kernelgraph::KernelFn& kernel, int L,
                              const Constants& c) {
    if (L < 3) throw contract_error("check_edge_cluster: need L >= 3");
    const int n = cx.n;
    const double f2 = kernel.f2();
    const double s2 = -2.0 * kernel.df2();
    const double vs = kernel.varsigma();

    const auto bx = kernelgraph::build_affinity(cx, kernel);
    const auto by = kernelgraph::build_affinity(cy, kernel);
    const auto sxy = fusion::ncca_matrix(bx, by);
    const auto spec = spectra::eigenvalues_general(sxy.matrix);

    // Limit law of f(2)^{-2} Kbreve_x Kbreve_y: convolve the 1/f(2)-scaled
    // kernel laws so the product picks up the full f(2)^{-2} factor.
    const auto nu_x =
        freeprob::SpectralMeasure::mp(static_cast<double>(n) / cx.p, s2 / f2, vs / f2);
    const auto nu_y =
        freeprob::SpectralMeasure::mp(static_cast<double>(n) / cy.p, s2 / f2, vs / f2);
    auto m_conv = [&](freeprob::Complex z) {
        return freeprob::free_mult_convolve(nu_x, nu_y, z).m_conv;
    };
    const double lo = nu_x.support_lower() * nu_y.support_lower() * 0.4;
    const double hi = nu_x.support_upper() * nu_y.support_upper() * 1.25;
    const auto recovered = freeprob::invert_to_density(m_conv, lo, hi, 1e-4);

    EdgeReport rep;
    rep.L = L;
    rep.gamma1 = recovered.measure.typical_location(1, n);
    rep.bound = c.edge_cluster_c * std::pow(n, -1.0 / 9.0);
    rep.gaps.resize(static_cast<size_t>(L - 2));
    const double nn = static_cast<double>(n);
    for (int i = 3; i <= L; ++i) {
        const double lam = nn * nn * spec.re(i - 1);
        rep.gaps[static_cast<size_t>(i - 3)] = std::abs(lam - rep.gamma1);
    }
    rep.max_gap = *std::max_element(rep.gaps.begin(), rep.gaps.end());

    rep.lambda1_gap = std::abs(spec.re(0) - 1.0);
    rep.lambda1_bound = c.lambda1_c / std::sqrt(nn);
    const auto ad = fusion::ad_matrix(bx, by);
    const auto ad_spec = spectra::eigenvalues_general(ad.matrix);
    rep.ad_lambda1_gap = std::abs(ad_spec.re(0) - 1.0);
    return rep;
}

InequalityRecord inequality_harness(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw dimension_error("inequality_harness: dimension mismatch");
    const auto ea = spectra::eigenvalues_symmetric(a);
    const auto eb = spectra::eigenvalues_symmetric(b);
    const int n = static_cast<int>(ea.atoms.size());

    InequalityRecord rec;
    for (int i = 0; i < n; ++i) {
        const double d = ea.atoms[static_cast<size_t>(i)] - eb.atoms[static_cast<size_t>(i)];
        rec.hw_lhs += d * d;
    }
    rec.hw_rhs = ((a - b) * (a - b)).trace();
    rec.hw_ok = rec.hw_lhs <= rec.hw_rhs + 1e-9 * (1.0 + std::abs(rec.hw_rhs));

    const auto esum = spectra::eigenvalues_symmetric(a + b);
    rec.weyl_ok = true;
    const int stride = std::max(1, n / 12);
    for (int i = 1; i <= n && rec.weyl_ok; i += stride)
        for (int j = 1; i + j - 1 <= n && rec.weyl_ok; j += stride) {
            const double lhs = esum.atoms[static_cast<size_t>(i + j - 2)];
            const double rhs =
                ea.atoms[static_cast<size_t>(i - 1)] + eb.atoms[static_cast<size_t>(j - 1)];
            if (lhs > rhs + 1e-9 * (1.0 + std::abs(rhs))) rec.weyl_ok = false;
        }

    rec.levy = levy_distance(ea, eb);
    const auto ediff = spectra::eigenvalues_symmetric(a - b);
    double opn = 0.0;
    for (double v : ediff.atoms) opn = std::max(opn, std::abs(v));
    rec.op_norm_diff = opn;
    rec.levy_bound_ok = rec.levy <= opn + 1e-9 * (1.0 + opn);
    return rec;
}

double levy_distance(const spectra::EmpiricalMeasure& a, const spectra::EmpiricalMeasure& b) {
    std::vector<double> xa = a.atoms, xb = b.atoms;
    std::sort(xa.begin(), xa.end());
    std::sort(xb.begin(), xb.end());
    auto cdf = [](const std::vector<double>& v, double x) {
        return static_cast<double>(std::upper_bound(v.begin(), v.end(), x) - v.begin()) /
               static_cast<double>(v.size());
    };
    // L(F,G) = inf{eps: F(x-eps)-eps <= G(x) <= F(x+eps)+eps}; for step CDFs
    // it is enough to test at the atoms. Bisection on eps.
    auto ok = [&](double eps) {
        for (double x : xb) {
            const double g = cdf(xb, x);
            if (cdf(xa, x - eps) - eps > g + 1e-12) return false;
            if (g > cdf(xa, x + eps) + eps + 1e-12) return false;
        }
        for (double x : xa) {
            const double f = cdf(xa, x);
            if (cdf(xb, x - eps) - eps > f + 1e-12) return false;
            if (f > cdf(xb, x + eps) + eps + 1e-12) return false;
        }
        return true;
    };
    double lo = 0.0, hi = 1.0;
    const double spread = std::max(std::abs(xa.back() - xb.front()),
                                   std::abs(xb.back() - xa.front()));
    hi = std::max(1.0, spread);
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? hi : lo) = mid;
    }
    return hi;
}

double kolmogorov_distance(const spectra::EmpiricalMeasure& emp,
                           const std::vector<double>& grid_x,
                           const std::vector<double>& grid_density) {
    if (grid_x.size() != grid_density.size() || grid_x.size() < 2)
        throw contract_error("kolmogorov_distance: bad grid");
    std::vector<double> sorted = emp.atoms;
    std::sort(sorted.begin(), sorted.end());
    double cdf = 0.0, ks = 0.0;
    for (size_t k = 0; k + 1 < grid_x.size(); ++k) {
        cdf += 0.5 * (grid_density[k] + grid_density[k + 1]) * (grid_x[k + 1] - grid_x[k]);
        const double femp =
            static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), grid_x[k + 1]) -
                                sorted.begin()) /
            static_cast<double>(sorted.size());
        ks = std::max(ks, std::abs(femp - std::min(cdf, 1.0)));
    }
    return ks;
}

}  // namespace fusionspec::verify
