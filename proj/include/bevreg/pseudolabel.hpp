#pragma once

#include <Eigen/Core>

#include "bevreg/association.hpp"

namespace bevreg {

struct PseudoLabelConfig {
  double alpha = 0.5;
  double epsilon = 1e-9;

  void validate() const;
};

// Per row: s_ij = 1 - d_ij / (max_j d_ij + epsilon). A row whose maximum is
// zero becomes all ones. Negative or non-finite entries throw DomainError.
Eigen::MatrixXd inverse_normalize_rows(const Eigen::MatrixXd& m, double epsilon = 1e-9);

// alpha * dis_bar + (1 - alpha) * ang_bar.
Eigen::MatrixXd spatial_similarity(const Eigen::MatrixXd& dis_bar, const Eigen::MatrixXd& ang_bar,
                                   const PseudoLabelConfig& cfg);

// Frobenius norm of m_pred - m_spatial.
double app_loss_value(const SimilarityMatrix& m_pred, const Eigen::MatrixXd& m_spatial);

// Spatial pseudo-label matrix between two views already in one frame.
SimilarityMatrix spatial_pseudo_labels(const ViewPoses& rows, const ViewPoses& cols, const PseudoLabelConfig& cfg);

}  // namespace bevreg
