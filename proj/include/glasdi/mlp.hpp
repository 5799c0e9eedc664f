#pragma once

// Dense MLP used for the encoder and decoder. Hidden layers apply a smooth
// activation; the output layer is affine. Besides plain evaluation the
// network supports forward-mode tangents (Jacobian-vector products) and a
// reverse sweep through the (value, tangent) computation, which is what the
// gradient-consistency losses need.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace glasdi {

enum class Activation { Tanh, Sigmoid, Linear };

Activation parse_activation(const std::string& name);
std::string to_string(Activation act);

struct MlpParams {
  std::vector<std::size_t> layer_sizes;
  Activation activation = Activation::Tanh;
  /// weights[l] is (layer_sizes[l+1] x layer_sizes[l]).
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  std::size_t n_affine() const { return weights.size(); }
  std::size_t input_size() const { return layer_sizes.front(); }
  std::size_t output_size() const { return layer_sizes.back(); }
  std::size_t parameter_count() const;
  /// Throws DimensionMismatch when shapes do not chain.
  void validate() const;
};

/// Glorot-uniform weights (bound sqrt(6/(fan_in+fan_out))) and zero biases,
/// deterministic in `seed`.
MlpParams init_mlp(const std::vector<std::size_t>& layer_sizes, Activation activation,
                   std::uint64_t seed);

/// Columns of `x` are independent inputs.
Eigen::MatrixXd forward(const MlpParams& net, const Eigen::MatrixXd& x);
Eigen::VectorXd forward(const MlpParams& net, const Eigen::VectorXd& x);

/// J(x) * xdot.
Eigen::MatrixXd jvp(const MlpParams& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& xdot);
Eigen::VectorXd jvp(const MlpParams& net, const Eigen::VectorXd& x, const Eigen::VectorXd& xdot);

inline Eigen::VectorXd encode(const Eigen::VectorXd& u, const MlpParams& enc) { return forward(enc, u); }
inline Eigen::VectorXd decode(const Eigen::VectorXd& z, const MlpParams& dec) { return forward(dec, z); }
inline Eigen::VectorXd encoder_jvp(const Eigen::VectorXd& u, const Eigen::VectorXd& udot,
                                   const MlpParams& enc) {
  return jvp(enc, u, udot);
}
inline Eigen::VectorXd decoder_jvp(const Eigen::VectorXd& z, const Eigen::VectorXd& zdot,
                                   const MlpParams& dec) {
  return jvp(dec, z, zdot);
}

struct MlpGradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static MlpGradients zeros_like(const MlpParams& net);
  void set_zero();
};

/// Cached intermediates of a batched forward pass with optional tangents.
struct DualTape {
  bool with_tangent = false;
  /// inputs[l] feeds affine map l; inputs.back() is the network output.
  std::vector<Eigen::MatrixXd> inputs;
  std::vector<Eigen::MatrixXd> tangents;
  /// Pre-activations and pre-activation tangents of each affine map.
  std::vector<Eigen::MatrixXd> pre;
  std::vector<Eigen::MatrixXd> pre_tangent;

  const Eigen::MatrixXd& value() const { return inputs.back(); }
  const Eigen::MatrixXd& tangent() const { return tangents.back(); }
};

/// Pass an empty `xdot` (zero columns) for a value-only tape.
DualTape forward_dual(const MlpParams& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& xdot);

struct InputAdjoint {
  Eigen::MatrixXd value;
  Eigen::MatrixXd tangent;
};

/// Reverse sweep: given adjoints of the output value and tangent, add the
/// parameter gradients into `grads` and return the input adjoints (empty
/// unless `need_input_adjoint`). `out_tangent_adj` is ignored for
/// value-only tapes.
InputAdjoint backward_dual(const MlpParams& net, const DualTape& tape,
                           const Eigen::MatrixXd& out_value_adj,
                           const Eigen::MatrixXd& out_tangent_adj, MlpGradients& grads,
                           bool need_input_adjoint);

}  // namespace glasdi
