#include "bevreg/pseudolabel.hpp"

#include <cmath>
#include <string>

#include "bevreg/errors.hpp"

namespace bevreg {

void PseudoLabelConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
}

Eigen::MatrixXd inverse_normalize_rows(const Eigen::MatrixXd& m, double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double row_max = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      if (!std::isfinite(v) || v < 0.0) {
        throw DomainError("entry (" + std::to_string(i) + ", " + std::to_string(j) + ") must be finite and >= 0");
      }
      row_max = std::max(row_max, v);
    }
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out(i, j) = row_max == 0.0 ? 1.0 : 1.0 - m(i, j) / (row_max + epsilon);
    }
  }
  return out;
}

Eigen::MatrixXd spatial_similarity(const Eigen::MatrixXd& dis_bar, const Eigen::MatrixXd& ang_bar,
                                   const PseudoLabelConfig& cfg) {
  cfg.validate();
  if (dis_bar.rows() != ang_bar.rows() || dis_bar.cols() != ang_bar.cols()) {
    throw ShapeError("distance and angle similarity matrices differ in shape");
  }
  if (cfg.alpha == 1.0) return dis_bar;
  if (cfg.alpha == 0.0) return ang_bar;
  return cfg.alpha * dis_bar + (1.0 - cfg.alpha) * ang_bar;
}

double app_loss_value(const SimilarityMatrix& m_pred, const Eigen::MatrixXd& m_spatial) {
  if (m_pred.values.rows() != m_spatial.rows() || m_pred.values.cols() != m_spatial.cols()) {
    throw ShapeError("predicted and spatial similarity matrices differ in shape");
  }
  return (m_pred.values - m_spatial).norm();
}

SimilarityMatrix spatial_pseudo_labels(const ViewPoses& rows, const ViewPoses& cols, const PseudoLabelConfig& cfg) {
  const Eigen::MatrixXd dis_bar = inverse_normalize_rows(distance_matrix(rows.poses, cols.poses), cfg.epsilon);
  const Eigen::MatrixXd ang_bar = inverse_normalize_rows(angle_matrix(rows.poses, cols.poses), cfg.epsilon);
  return {spatial_similarity(dis_bar, ang_bar, cfg), rows.view_id, cols.view_id};
}

}  // namespace bevreg
