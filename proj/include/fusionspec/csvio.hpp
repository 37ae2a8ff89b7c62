#pragma once

#include <Eigen/Dense>
#include <ostream>
#include <string>
#include <vector>

#include "fusionspec/rngkit.hpp"
#include "fusionspec/spectra.hpp"

namespace fusionspec::csvio {

// DataCloud CSV: optional comment header "# p=<p> n=<n>", then p rows of n
// comma separated values (row i is coordinate i across samples).
void write_cloud(std::ostream& os, const rngkit::DataCloud& cloud);
void write_cloud_file(const std::string& path, const rngkit::DataCloud& cloud);
rngkit::DataCloud read_cloud_file(const std::string& path);

// Dense matrix, row-major, 17 significant digits.
void write_matrix(std::ostream& os, const Eigen::MatrixXd& m);
void write_matrix_file(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_file(const std::string& path);

// Spectrum CSV with header "rank,re,im" in the deterministic order.
void write_spectrum(std::ostream& os, const spectra::Spectrum& spec,
                    const std::string& index_label = "rank");
void write_spectrum_file(const std::string& path, const spectra::Spectrum& spec,
                         const std::string& index_label = "rank");

// Two-column CSV with header.
void write_pairs(std::ostream& os, const std::string& header_a, const std::string& header_b,
                 const std::vector<double>& a, const std::vector<double>& b);
void write_pairs_file(const std::string& path, const std::string& header_a,
                      const std::string& header_b, const std::vector<double>& a,
                      const std::vector<double>& b);

std::string format_double(double v);  // %.17g

}  // namespace fusionspec::csvio
