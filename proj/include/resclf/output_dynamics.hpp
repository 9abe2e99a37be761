#pragma once

#include <Eigen/Dense>

namespace resclf {

/// Output counts. k1 velocity (relative degree one) outputs, k2 pose
/// (relative degree two) outputs.
struct OutputDims {
  int k1 = 0;
  int k2 = 1;

  /// Length of the transverse state eta = (y1, y2, dy2).
  int eta_size() const { return k1 + 2 * k2; }
  /// Number of auxiliary inputs mu.
  int input_size() const { return k1 + k2; }

  // Offsets into eta.
  int y1_offset() const { return 0; }
  int y2_offset() const { return k1; }
  int dy2_offset() const { return k1 + k2; }

  bool operator==(const OutputDims&) const = default;
};

/// Throws std::invalid_argument unless k1, k2 >= 0 and k1 + k2 >= 1.
void validate(const OutputDims& dims);

/// Feedback-linearized output dynamics  eta_dot = F eta + G mu.
///
/// Layout of eta is fixed to (y1, y2, dy2). F carries a single identity
/// block mapping dy2 into the y2 rows; G has identity blocks in the y1 and
/// dy2 rows.
struct OutputDynamics {
  OutputDims dims;
  Eigen::MatrixXd F;
  Eigen::MatrixXd G;
};

OutputDynamics build_fg(const OutputDims& dims);

/// eta split into the velocity part and the pose part eta2 = (y2, dy2).
struct EtaState {
  Eigen::VectorXd y1;
  Eigen::VectorXd eta2;
};

EtaState split_eta(const Eigen::VectorXd& eta, const OutputDims& dims);
Eigen::VectorXd merge_eta(const EtaState& state);

/// Full transverse/zero-dynamics state.
struct FullState {
  Eigen::VectorXd eta;
  Eigen::VectorXd z;
};

/// Canonical embedding (y1, z) -> (y1, 0, z) of the partial zero dynamics
/// into the full state.
FullState canonical_embed(const Eigen::VectorXd& y1, const Eigen::VectorXd& z,
                          const OutputDims& dims);

/// Rank of [G, FG, ..., F^{n-1}G], computed with a rank-revealing QR.
int controllability_rank(const OutputDynamics& dyn);

}  // namespace resclf
