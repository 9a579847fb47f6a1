#pragma once

// Reference implementations written independently of the library paths
// they check: no Eigen decompositions, no shared helpers.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mimovlc/common.hpp"

namespace mimovlc::oracle {

struct Svd {
    Eigen::MatrixXd u;
    std::vector<double> s;
    Eigen::MatrixXd v;
};

/// One-sided Jacobi SVD, singular values descending.
Svd jacobi_svd(const Eigen::MatrixXd& a);

/// Moore-Penrose inverse from jacobi_svd with the same relative floor.
Eigen::MatrixXd pinv(const Eigen::MatrixXd& a, double rel_floor = 1e-12);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
std::vector<double> symmetric_eigenvalues(Eigen::MatrixXd a);

/// Determinant by Laplace expansion (small matrices only).
double laplace_det(const Eigen::MatrixXd& a);

/// Label of the nearest of `points` by exhaustive search; ties go to the
/// smaller label.
unsigned nearest_label(std::span<const cplx> points, cplx r);

/// Points of a Gray square QAM built from the textbook definition:
/// per-axis reflected binary code, levels +-1, +-3, ... scaled to unit energy.
std::vector<cplx> gray_qam(int order);

/// Exhaustive maximum-likelihood vector over points^N for y = H x.
std::vector<unsigned> ml_vector(const Eigen::MatrixXd& h, std::span<const cplx> y, std::span<const cplx> points);

} // namespace mimovlc::oracle
