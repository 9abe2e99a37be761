#include "resclf/output_dynamics.hpp"

#include <stdexcept>
#include <string>

namespace resclf {

void validate(const OutputDims& dims) {
  if (dims.k1 < 0 || dims.k2 < 0) {
    throw std::invalid_argument("output counts must be non-negative");
  }
  if (dims.k1 + dims.k2 < 1) {
    throw std::invalid_argument("k1 + k2 must be at least 1");
  }
}

OutputDynamics build_fg(const OutputDims& dims) {
  validate(dims);
  const int n = dims.eta_size();
  const int m = dims.input_size();

  OutputDynamics dyn{dims, Eigen::MatrixXd::Zero(n, n),
                     Eigen::MatrixXd::Zero(n, m)};
  dyn.F.block(dims.y2_offset(), dims.dy2_offset(), dims.k2, dims.k2)
      .setIdentity();
  dyn.G.block(dims.y1_offset(), 0, dims.k1, dims.k1).setIdentity();
  dyn.G.block(dims.dy2_offset(), dims.k1, dims.k2, dims.k2).setIdentity();
  return dyn;
}

EtaState split_eta(const Eigen::VectorXd& eta, const OutputDims& dims) {
  if (eta.size() != dims.eta_size()) {
    throw std::invalid_argument("eta has length " + std::to_string(eta.size()) +
                                ", expected " +
                                std::to_string(dims.eta_size()));
  }
  return {eta.head(dims.k1), eta.tail(2 * dims.k2)};
}

Eigen::VectorXd merge_eta(const EtaState& state) {
  if (state.eta2.size() % 2 != 0) {
    throw std::invalid_argument("eta2 must have even length");
  }
  Eigen::VectorXd eta(state.y1.size() + state.eta2.size());
  eta << state.y1, state.eta2;
  return eta;
}

FullState canonical_embed(const Eigen::VectorXd& y1, const Eigen::VectorXd& z,
                          const OutputDims& dims) {
  if (y1.size() != dims.k1) {
    throw std::invalid_argument("y1 length does not match k1");
  }
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(dims.eta_size());
  eta.head(dims.k1) = y1;
  return {eta, z};
}

int controllability_rank(const OutputDynamics& dyn) {
  const int n = dyn.dims.eta_size();
  const int m = dyn.dims.input_size();
  Eigen::MatrixXd ctrb(n, n * m);
  Eigen::MatrixXd block = dyn.G;
  for (int i = 0; i < n; ++i) {
    ctrb.middleCols(i * m, m) = block;
    block = dyn.F * block;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(ctrb);
  return static_cast<int>(qr.rank());
}

}  // namespace resclf
