#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace grlol {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Column (predictor) indices, 0-based.
using IndexSet = std::vector<Index>;

using Seed = std::uint64_t;

} // namespace grlol
