#include "fusionspec/csvio.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "fusionspec/errors.hpp"

namespace fusionspec::csvio {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open for reading: " + path);
    return in;
}

std::vector<std::vector<double>> read_rows(std::istream& is, const std::string& path) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw io_error("bad numeric cell '" + cell + "' in " + path);
            }
        }
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) throw io_error("no data rows in " + path);
    for (const auto& r : rows)
        if (r.size() != rows.front().size()) throw io_error("ragged rows in " + path);
    return rows;
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_cloud(std::ostream& os, const rngkit::DataCloud& cloud) {
    os << "# p=" << cloud.p << " n=" << cloud.n << "\n";
    for (int i = 0; i < cloud.p; ++i) {
        for (int j = 0; j < cloud.n; ++j) {
            if (j) os << ',';
            os << format_double(cloud.data(i, j));
        }
        os << '\n';
    }
}

void write_cloud_file(const std::string& path, const rngkit::DataCloud& cloud) {
    auto out = open_out(path);
    write_cloud(out, cloud);
}

rngkit::DataCloud read_cloud_file(const std::string& path) {
    auto in = open_in(path);
    const auto rows = read_rows(in, path);
    rngkit::DataCloud cloud;
    cloud.p = static_cast<int>(rows.size());
    cloud.n = static_cast<int>(rows.front().size());
    cloud.data.resize(cloud.p, cloud.n);
    for (int i = 0; i < cloud.p; ++i)
        for (int j = 0; j < cloud.n; ++j)
            cloud.data(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
    if (!cloud.data.allFinite()) throw io_error("non-finite entries in " + path);
    return cloud;
}

void write_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) os << ',';
            os << format_double(m(i, j));
        }
        os << '\n';
    }
}

void write_matrix_file(const std::string& path, const Eigen::MatrixXd& m) {
    auto out = open_out(path);
    write_matrix(out, m);
}

Eigen::MatrixXd read_matrix_file(const std::string& path) {
    auto in = open_in(path);
    const auto rows = read_rows(in, path);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            m(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
    return m;
}

void write_spectrum(std::ostream& os, const spectra::Spectrum& spec,
                    const std::string& index_label) {
    os << index_label << ",re,im\n";
    for (int i = 0; i < spec.size(); ++i) {
        const auto& l = spec.eigenvalues[static_cast<size_t>(i)];
        os << (i + 1) << ',' << format_double(l.real()) << ',' << format_double(l.imag())
           << '\n';
    }
}

void write_spectrum_file(const std::string& path, const spectra::Spectrum& spec,
                         const std::string& index_label) {
    auto out = open_out(path);
    write_spectrum(out, spec, index_label);
}

void write_pairs(std::ostream& os, const std::string& header_a, const std::string& header_b,
                 const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw contract_error("write_pairs: size mismatch");
    os << header_a << ',' << header_b << '\n';
    for (size_t k = 0; k < a.size(); ++k)
        os << format_double(a[k]) << ',' << format_double(b[k]) << '\n';
}

void write_pairs_file(const std::string& path, const std::string& header_a,
                      const std::string& header_b, const std::vector<double>& a,
                      const std::vector<double>& b) {
    auto out = open_out(path);
    write_pairs(out, header_a, header_b, a, b);
}

}  // namespace fusionspec::csvio
