#include "ctgp/block_tridiagonal.hpp"

#include <Eigen/Cholesky>

#include <string>

#include "ctgp/errors.hpp"

namespace ctgp {

BlockTridiagonal::BlockTridiagonal(std::size_t num_blocks, int block_size)
    : block_size_(block_size),
      diag_(num_blocks, Eigen::MatrixXd::Zero(block_size, block_size)),
      upper_(num_blocks > 0 ? num_blocks - 1 : 0, Eigen::MatrixXd::Zero(block_size, block_size)) {}

Eigen::VectorXd BlockTridiagonal::solve(const Eigen::VectorXd& rhs) const {
  const std::size_t n = diag_.size();
  const int b = block_size_;
  if (rhs.size() != static_cast<Eigen::Index>(n) * b) {
    throw InvalidArgument("right-hand side size does not match the block system");
  }

  // A = L L^T with lower-bidiagonal block factor: diagonal factors via LLT,
  // sub-diagonal blocks S_k = U_k^T L_k^-T.
  std::vector<Eigen::LLT<Eigen::MatrixXd>> factors(n);
  std::vector<Eigen::MatrixXd> sub(n > 0 ? n - 1 : 0);
  for (std::size_t k = 0; k < n; ++k) {
    Eigen::MatrixXd schur = diag_[k];
    if (k > 0) schur.noalias() -= sub[k - 1] * sub[k - 1].transpose();
    factors[k].compute(schur);
    const double scale = diag_[k].diagonal().cwiseAbs().maxCoeff();
    const Eigen::VectorXd pivots = Eigen::MatrixXd(factors[k].matrixL()).diagonal();
    if (factors[k].info() != Eigen::Success || !pivots.allFinite() ||
        pivots.cwiseAbs2().minCoeff() <= 1e-13 * scale) {
      throw SingularSystem("normal equations are singular at block " + std::to_string(k) +
                           " (unfixed gauge or unobservable state)");
    }
    if (k + 1 < n) {
      // S = U^T L^-T  <=>  L S^T = U
      sub[k] = factors[k].matrixL().solve(upper_[k]).transpose();
    }
  }

  // Forward substitution L y = rhs.
  Eigen::VectorXd y(rhs.size());
  for (std::size_t k = 0; k < n; ++k) {
    Eigen::VectorXd r = rhs.segment(k * b, b);
    if (k > 0) r.noalias() -= sub[k - 1] * y.segment((k - 1) * b, b);
    y.segment(k * b, b) = factors[k].matrixL().solve(r);
  }
  // Back substitution L^T x = y.
  Eigen::VectorXd x(rhs.size());
  for (std::size_t kk = n; kk-- > 0;) {
    Eigen::VectorXd r = y.segment(kk * b, b);
    if (kk + 1 < n) r.noalias() -= sub[kk].transpose() * x.segment((kk + 1) * b, b);
    x.segment(kk * b, b) = factors[kk].matrixU().solve(r);
  }
  return x;
}

Eigen::MatrixXd BlockTridiagonal::to_dense() const {
  const Eigen::Index n = static_cast<Eigen::Index>(diag_.size()) * block_size_;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < diag_.size(); ++k) {
    out.block(k * block_size_, k * block_size_, block_size_, block_size_) = diag_[k];
    if (k + 1 < diag_.size()) {
      out.block(k * block_size_, (k + 1) * block_size_, block_size_, block_size_) = upper_[k];
      out.block((k + 1) * block_size_, k * block_size_, block_size_, block_size_) =
          upper_[k].transpose();
    }
  }
  return out;
}

}  // namespace ctgp
