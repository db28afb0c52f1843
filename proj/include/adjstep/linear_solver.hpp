/// @file linear_solver.hpp
/// @brief Block-sparse matrices on the cell adjacency graph, plugged into Eigen's
/// BiCGSTAB as a matrix-free operator with block-Jacobi preconditioning.
#pragma once

#include "adjstep/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/LU>
#include <Eigen/SparseCore>

#include <algorithm>
#include <vector>

namespace adjstep {
template <int N>
class BlockMatrix;
}

namespace Eigen::internal {
template <int N>
struct traits<adjstep::BlockMatrix<N>> : public traits<Eigen::SparseMatrix<double>> {};
}  // namespace Eigen::internal

namespace adjstep {

/// Block-CSR matrix with dense N x N blocks following the mesh's face graph.
/// The pattern is fixed at construction; values are overwritten in place.
template <int N>
class BlockMatrix : public Eigen::EigenBase<BlockMatrix<N>> {
 public:
  using Block = Eigen::Matrix<double, N, N>;
  using Scalar = double;
  using RealScalar = double;
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic, IsRowMajor = false };

  explicit BlockMatrix(const Mesh& mesh);

  Eigen::Index rows() const { return static_cast<Eigen::Index>(num_block_rows()) * N; }
  Eigen::Index cols() const { return rows(); }
  int num_block_rows() const { return static_cast<int>(row_ptr_.size()) - 1; }

  template <typename Rhs>
  Eigen::Product<BlockMatrix, Rhs, Eigen::AliasFreeProduct> operator*(
      const Eigen::MatrixBase<Rhs>& x) const {
    return Eigen::Product<BlockMatrix, Rhs, Eigen::AliasFreeProduct>(*this, x.derived());
  }

  void set_zero() {
    for (Block& b : blocks_) b.setZero();
  }

  void add_diagonal(int cell, const Block& b) { blocks_[diag_[cell]] += b; }
  /// Adds the four blocks coupling the two cells of an interior face.
  void add_face(int face, const Block& ll, const Block& lr, const Block& rl, const Block& rr) {
    const FaceSlots& s = face_slots_[face];
    blocks_[s.ll] += ll;
    blocks_[s.lr] += lr;
    blocks_[s.rl] += rl;
    blocks_[s.rr] += rr;
  }

  const Block& diagonal_block(int cell) const { return blocks_[diag_[cell]]; }

  /// y += alpha * A x
  template <typename Dest, typename Src>
  void multiply_add(Dest& y, const Src& x, double alpha) const {
    const int nb = num_block_rows();
    for (int i = 0; i < nb; ++i) {
      Eigen::Matrix<double, N, 1> acc = Eigen::Matrix<double, N, 1>::Zero();
      for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
        acc.noalias() += blocks_[k] * x.template segment<N>(col_[k] * N);
      y.template segment<N>(i * N) += alpha * acc;
    }
  }

  /// Dense copy, for tests.
  Eigen::MatrixXd to_dense() const;

 private:
  struct FaceSlots {
    int ll = -1, lr = -1, rl = -1, rr = -1;
  };
  std::vector<int> row_ptr_;
  std::vector<int> col_;
  std::vector<int> diag_;
  std::vector<Block, Eigen::aligned_allocator<Block>> blocks_;
  std::vector<FaceSlots> face_slots_;
};

template <int N>
BlockMatrix<N>::BlockMatrix(const Mesh& mesh) {
  const int nc = static_cast<int>(mesh.num_cells());
  std::vector<std::vector<int>> cols(nc);
  for (int c = 0; c < nc; ++c) {
    cols[c].push_back(c);
    for (int f : mesh.cell_faces(c)) {
      const int nb = mesh.neighbor(f, c);
      if (nb >= 0) cols[c].push_back(nb);
    }
    std::sort(cols[c].begin(), cols[c].end());
    cols[c].erase(std::unique(cols[c].begin(), cols[c].end()), cols[c].end());
  }
  row_ptr_.assign(nc + 1, 0);
  for (int c = 0; c < nc; ++c) row_ptr_[c + 1] = row_ptr_[c] + static_cast<int>(cols[c].size());
  col_.resize(row_ptr_[nc]);
  for (int c = 0; c < nc; ++c) std::copy(cols[c].begin(), cols[c].end(), col_.begin() + row_ptr_[c]);
  blocks_.assign(col_.size(), Block::Zero());

  auto slot = [&](int row, int col) {
    const auto first = col_.begin() + row_ptr_[row];
    const auto last = col_.begin() + row_ptr_[row + 1];
    return static_cast<int>(std::lower_bound(first, last, col) - col_.begin());
  };
  diag_.resize(nc);
  for (int c = 0; c < nc; ++c) diag_[c] = slot(c, c);
  face_slots_.resize(mesh.num_faces());
  for (int f = 0; f < static_cast<int>(mesh.num_faces()); ++f) {
    const Face& fc = mesh.face(f);
    if (fc.is_boundary()) continue;
    face_slots_[f] = {slot(fc.left, fc.left), slot(fc.left, fc.right), slot(fc.right, fc.left),
                      slot(fc.right, fc.right)};
  }
}

template <int N>
Eigen::MatrixXd BlockMatrix<N>::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows(), cols());
  for (int i = 0; i < num_block_rows(); ++i)
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) d.template block<N, N>(i * N, col_[k] * N) = blocks_[k];
  return d;
}

/// Block-diagonal preconditioner with the Eigen preconditioner interface.
template <int N>
class BlockJacobiPreconditioner {
 public:
  using Block = Eigen::Matrix<double, N, N>;
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic };

  BlockJacobiPreconditioner() = default;
  explicit BlockJacobiPreconditioner(const BlockMatrix<N>& m) { compute(m); }

  BlockJacobiPreconditioner& analyzePattern(const BlockMatrix<N>&) { return *this; }
  BlockJacobiPreconditioner& factorize(const BlockMatrix<N>& m) {
    inv_.resize(m.num_block_rows());
    for (int b = 0; b < m.num_block_rows(); ++b) inv_[b] = m.diagonal_block(b).inverse();
    return *this;
  }
  BlockJacobiPreconditioner& compute(const BlockMatrix<N>& m) { return factorize(m); }

  template <typename Rhs>
  Eigen::VectorXd solve(const Rhs& b) const {
    Eigen::VectorXd x(b.size());
    for (int k = 0; k < static_cast<int>(inv_.size()); ++k)
      x.template segment<N>(k * N).noalias() = inv_[k] * b.template segment<N>(k * N);
    return x;
  }

  Eigen::ComputationInfo info() { return Eigen::Success; }

 private:
  std::vector<Block, Eigen::aligned_allocator<Block>> inv_;
};

struct LinearSolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Solves A x = b with BiCGSTAB and block-Jacobi preconditioning; x starts at zero.
template <int N>
LinearSolveStats solve_block_system(const BlockMatrix<N>& a, const Eigen::VectorXd& b,
                                    Eigen::VectorXd& x, double tol, int max_iter) {
  Eigen::BiCGSTAB<BlockMatrix<N>, BlockJacobiPreconditioner<N>> solver;
  solver.setTolerance(tol);
  solver.setMaxIterations(max_iter);
  solver.compute(a);
  x = solver.solve(b);
  LinearSolveStats st;
  st.iterations = static_cast<int>(solver.iterations());
  st.relative_residual = solver.error();
  st.converged = solver.info() == Eigen::Success;
  return st;
}

}  // namespace adjstep

namespace Eigen::internal {
template <int N, typename Rhs>
struct generic_product_impl<adjstep::BlockMatrix<N>, Rhs, SparseShape, DenseShape, GemvProduct>
    : generic_product_impl_base<adjstep::BlockMatrix<N>, Rhs,
                                generic_product_impl<adjstep::BlockMatrix<N>, Rhs>> {
  template <typename Dest>
  static void scaleAndAddTo(Dest& dst, const adjstep::BlockMatrix<N>& lhs, const Rhs& rhs,
                            const double& alpha) {
    lhs.multiply_add(dst, rhs, alpha);
  }
};
}  // namespace Eigen::internal
