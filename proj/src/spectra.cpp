#include "fusionspec/spectra.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fusionspec/errors.hpp"

namespace fusionspec::spectra {

namespace {

void require_square_finite(const Eigen::MatrixXd& m, const char* who) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw dimension_error(std::string(who) + ": matrix must be square and non-empty");
    if (!m.allFinite()) throw contract_error(std::string(who) + ": non-finite entries");
}

// Sort order: descending Re, then descending Im, then original index.
void sort_spectrum(std::vector<std::complex<double>>& ev) {
    std::vector<int> idx(ev.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        const auto &x = ev[static_cast<size_t>(a)], &y = ev[static_cast<size_t>(b)];
        if (x.real() != y.real()) return x.real() > y.real();
        if (x.imag() != y.imag()) return x.imag() > y.imag();
        return a < b;
    });
    std::vector<std::complex<double>> out(ev.size());
    for (size_t k = 0; k < idx.size(); ++k) out[k] = ev[static_cast<size_t>(idx[k])];
    ev.swap(out);
}

bool conjugate_pairs_match(const std::vector<std::complex<double>>& ev, double tol) {
    std::vector<double> imag;
    for (const auto& l : ev)
        if (std::abs(l.imag()) > tol) imag.push_back(l.imag());
    std::sort(imag.begin(), imag.end());
    size_t i = 0, j = imag.size();
    while (i < j) {
        if (j - i == 1) return false;
        if (std::abs(imag[i] + imag[j - 1]) > tol) return false;
        ++i;
        --j;
    }
    return true;
}

}  // namespace

Spectrum eigenvalues_general(const Eigen::MatrixXd& m) {
    require_square_finite(m, "eigenvalues_general");
    const int n = static_cast<int>(m.rows());
    Eigen::MatrixXd work = m;  // dgeev overwrites its input
    std::vector<double> wr(static_cast<size_t>(n)), wi(static_cast<size_t>(n));
    const lapack_int info =
        LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, work.data(), n, wr.data(), wi.data(),
                      nullptr, 1, nullptr, 1);
    if (info < 0) throw contract_error("eigenvalues_general: bad argument to dgeev");
    if (info > 0) {
        std::vector<std::complex<double>> partial;
        for (int i = info; i < n; ++i)
            partial.emplace_back(wr[static_cast<size_t>(i)], wi[static_cast<size_t>(i)]);
        throw solver_error("eigenvalues_general: QR iteration did not converge; " +
                               std::to_string(n - info) + "/" + std::to_string(n) +
                               " eigenvalues available",
                           std::move(partial));
    }

    Spectrum spec;
    spec.eigenvalues.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        spec.eigenvalues[static_cast<size_t>(i)] = {wr[static_cast<size_t>(i)],
                                                    wi[static_cast<size_t>(i)]};
    sort_spectrum(spec.eigenvalues);

    std::complex<double> sum1 = 0.0, sum2 = 0.0;
    for (const auto& l : spec.eigenvalues) {
        sum1 += l;
        sum2 += l * l;
    }
    const double tr1 = m.trace();
    const double tr2 = m.cwiseProduct(m.transpose()).sum();
    spec.trace_residual = std::abs(sum1 - std::complex<double>(tr1));
    spec.trace2_residual = std::abs(sum2 - std::complex<double>(tr2));
    spec.conjugate_pairing_ok = conjugate_pairs_match(spec.eigenvalues, 1e-8);
    return spec;
}

EmpiricalMeasure eigenvalues_symmetric(const Eigen::MatrixXd& m) {
    require_square_finite(m, "eigenvalues_symmetric");
    const double scale = m.cwiseAbs().maxCoeff();
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(scale, 1.0))
        throw contract_error("eigenvalues_symmetric: input is not symmetric");

    const int n = static_cast<int>(m.rows());
    Eigen::MatrixXd work = m;
    std::vector<double> w(static_cast<size_t>(n));
    const lapack_int info =
        LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', n, work.data(), n, w.data());
    if (info != 0) throw solver_error("eigenvalues_symmetric: dsyevd failed");
    EmpiricalMeasure out;
    out.atoms.assign(w.rbegin(), w.rend());  // descending
    return out;
}

std::complex<double> esd_stieltjes(const EmpiricalMeasure& m, std::complex<double> z) {
    if (!(z.imag() > 0.0)) throw transform_domain_error("esd_stieltjes: need Im z > 0");
    if (m.atoms.empty()) throw contract_error("esd_stieltjes: empty measure");
    std::complex<double> acc = 0.0;
    for (double a : m.atoms) acc += 1.0 / (std::complex<double>(a) - z);
    return acc / static_cast<double>(m.atoms.size());
}

Eigen::MatrixXd qr_orthonormal_haar(const Eigen::MatrixXd& g) {
    require_square_finite(g, "qr_orthonormal_haar");
    const int n = static_cast<int>(g.rows());
    Eigen::MatrixXd a = g;
    std::vector<double> tau(static_cast<size_t>(n));
    if (LAPACKE_dgeqrf(LAPACK_COL_MAJOR, n, n, a.data(), n, tau.data()) != 0)
        throw solver_error("qr_orthonormal_haar: dgeqrf failed");
    std::vector<double> rdiag(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) rdiag[static_cast<size_t>(j)] = a(j, j);
    if (LAPACKE_dorgqr(LAPACK_COL_MAJOR, n, n, n, a.data(), n, tau.data()) != 0)
        throw solver_error("qr_orthonormal_haar: dorgqr failed");
    for (int j = 0; j < n; ++j)
        if (rdiag[static_cast<size_t>(j)] < 0.0) a.col(j) = -a.col(j);
    return a;
}

}  // namespace fusionspec::spectra
