#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace ctgp {

/// Symmetric block-tridiagonal matrix with square blocks of equal size, as
/// produced by a Markovian trajectory prior with measurements bound to at
/// most two adjacent knots.
class BlockTridiagonal {
 public:
  BlockTridiagonal(std::size_t num_blocks, int block_size);

  std::size_t num_blocks() const { return diag_.size(); }
  int block_size() const { return block_size_; }

  Eigen::MatrixXd& diag(std::size_t k) { return diag_[k]; }
  const Eigen::MatrixXd& diag(std::size_t k) const { return diag_[k]; }
  /// Block (k, k + 1); block (k + 1, k) is its transpose.
  Eigen::MatrixXd& upper(std::size_t k) { return upper_[k]; }
  const Eigen::MatrixXd& upper(std::size_t k) const { return upper_[k]; }

  /// Solves A x = rhs by block Cholesky. Throws SingularSystem if A is not
  /// (numerically) positive definite.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

  Eigen::MatrixXd to_dense() const;

 private:
  int block_size_;
  std::vector<Eigen::MatrixXd> diag_;
  std::vector<Eigen::MatrixXd> upper_;
};

}  // namespace ctgp
