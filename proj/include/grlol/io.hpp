#pragma once

#include <string>
#include <utility>
#include <vector>

#include "grlol/design.hpp"
#include "grlol/partition.hpp"

namespace grlol::io {

// Flat-file contracts. Every table is delimiter separated (comma, tab or
// blank runs, detected from the first data line) with an optional header
// row; a first line that does not parse as numbers is taken as a header.
// Indices in files are 1-based.

Matrix read_matrix(const std::string& path);
/// One value per row (a single column), or a single row.
Vector read_vector(const std::string& path);

DesignMatrix read_design(const std::string& path);
ResponseVector read_response(const std::string& path);

/// Comma separated, shortest round-trip formatting, optional header.
void write_matrix(const std::string& path, const Matrix& m, const std::vector<std::string>& header = {});
/// Gram matrix with header x1..xk.
void write_gram(const std::string& path, const Matrix& gram);

/// Lines `group,predictor,rank`. Ranks within a group must be 1..t_j.
Partition read_partition(const std::string& path, Index k);
void write_partition(const std::string& path, const Partition& part);

/// Lines `index,value`.
void write_coefficients(const std::string& path, const Vector& beta);
Vector read_coefficients(const std::string& path);

/// Ordered key=value lines.
using Record = std::vector<std::pair<std::string, std::string>>;
void write_record(const std::string& path, const Record& rec);
Record read_record(const std::string& path);
std::string record_value(const Record& rec, const std::string& key);

/// Writes `<output>.manifest`: the given entries followed by build versions.
void write_manifest(const std::string& output_path, const Record& entries);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
std::string format_indices(const std::vector<Index>& zero_based);

} // namespace grlol::io
