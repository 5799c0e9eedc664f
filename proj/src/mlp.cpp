#include "glasdi/mlp.hpp"

#include <cmath>

#include "glasdi/errors.hpp"
#include "glasdi/random.hpp"

namespace glasdi {

namespace {

Eigen::MatrixXd activate(Activation act, const Eigen::MatrixXd& pre) {
  switch (act) {
    case Activation::Tanh:
      return pre.array().tanh().matrix();
    case Activation::Sigmoid:
      return (1.0 / (1.0 + (-pre.array()).exp())).matrix();
    case Activation::Linear:
      return pre;
  }
  return pre;
}

// First derivative, expressed through the activated value h.
Eigen::ArrayXXd first_derivative(Activation act, const Eigen::MatrixXd& h) {
  switch (act) {
    case Activation::Tanh:
      return 1.0 - h.array().square();
    case Activation::Sigmoid:
      return h.array() * (1.0 - h.array());
    case Activation::Linear:
      return Eigen::ArrayXXd::Ones(h.rows(), h.cols());
  }
  return {};
}

Eigen::ArrayXXd second_derivative(Activation act, const Eigen::MatrixXd& h) {
  switch (act) {
    case Activation::Tanh:
      return -2.0 * h.array() * (1.0 - h.array().square());
    case Activation::Sigmoid:
      return h.array() * (1.0 - h.array()) * (1.0 - 2.0 * h.array());
    case Activation::Linear:
      return Eigen::ArrayXXd::Zero(h.rows(), h.cols());
  }
  return {};
}

void check_input(const MlpParams& net, const Eigen::MatrixXd& x) {
  if (static_cast<std::size_t>(x.rows()) != net.input_size()) {
    throw DimensionMismatch("MLP input has " + std::to_string(x.rows()) + " rows, expected " +
                            std::to_string(net.input_size()));
  }
}

}  // namespace

Activation parse_activation(const std::string& name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "linear") return Activation::Linear;
  throw InvalidConfig("unknown activation '" + name + "'");
}

std::string to_string(Activation act) {
  switch (act) {
    case Activation::Tanh:
      return "tanh";
    case Activation::Sigmoid:
      return "sigmoid";
    case Activation::Linear:
      return "linear";
  }
  return "unknown";
}

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  }
  return n;
}

void MlpParams::validate() const {
  if (layer_sizes.size() < 2) throw DimensionMismatch("MLP needs at least two layers");
  if (weights.size() != layer_sizes.size() - 1 || biases.size() != weights.size()) {
    throw DimensionMismatch("MLP layer count does not match parameter count");
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const auto out = static_cast<Eigen::Index>(layer_sizes[l + 1]);
    const auto in = static_cast<Eigen::Index>(layer_sizes[l]);
    if (weights[l].rows() != out || weights[l].cols() != in || biases[l].size() != out) {
      throw DimensionMismatch("MLP layer " + std::to_string(l) + " has inconsistent shape");
    }
  }
}

MlpParams init_mlp(const std::vector<std::size_t>& layer_sizes, Activation activation,
                   std::uint64_t seed) {
  if (layer_sizes.size() < 2) throw InvalidConfig("MLP needs at least two layer sizes");
  for (auto n : layer_sizes) {
    if (n == 0) throw InvalidConfig("MLP layer sizes must be >= 1");
  }
  MlpParams net;
  net.layer_sizes = layer_sizes;
  net.activation = activation;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(layer_sizes[l]);
    const auto out = static_cast<Eigen::Index>(layer_sizes[l + 1]);
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    Eigen::MatrixXd w(out, in);
    for (Eigen::Index c = 0; c < in; ++c) {
      for (Eigen::Index r = 0; r < out; ++r) w(r, c) = uniform(rng, -bound, bound);
    }
    net.weights.push_back(std::move(w));
    net.biases.push_back(Eigen::VectorXd::Zero(out));
  }
  return net;
}

Eigen::MatrixXd forward(const MlpParams& net, const Eigen::MatrixXd& x) {
  check_input(net, x);
  Eigen::MatrixXd h = x;
  for (std::size_t l = 0; l < net.n_affine(); ++l) {
    Eigen::MatrixXd pre = net.weights[l] * h;
    pre.colwise() += net.biases[l];
    h = (l + 1 < net.n_affine()) ? activate(net.activation, pre) : std::move(pre);
  }
  return h;
}

Eigen::VectorXd forward(const MlpParams& net, const Eigen::VectorXd& x) {
  return forward(net, Eigen::MatrixXd(x)).col(0);
}

Eigen::MatrixXd jvp(const MlpParams& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& xdot) {
  if (xdot.rows() != x.rows() || xdot.cols() != x.cols()) {
    throw DimensionMismatch("jvp: tangent shape differs from input");
  }
  return forward_dual(net, x, xdot).tangent();
}

Eigen::VectorXd jvp(const MlpParams& net, const Eigen::VectorXd& x, const Eigen::VectorXd& xdot) {
  return jvp(net, Eigen::MatrixXd(x), Eigen::MatrixXd(xdot)).col(0);
}

MlpGradients MlpGradients::zeros_like(const MlpParams& net) {
  MlpGradients g;
  for (std::size_t l = 0; l < net.n_affine(); ++l) {
    g.weights.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
    g.biases.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
  }
  return g;
}

void MlpGradients::set_zero() {
  for (auto& w : weights) w.setZero();
  for (auto& b : biases) b.setZero();
}

DualTape forward_dual(const MlpParams& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& xdot) {
  check_input(net, x);
  DualTape tape;
  tape.with_tangent = xdot.cols() > 0;
  if (tape.with_tangent && (xdot.rows() != x.rows() || xdot.cols() != x.cols())) {
    throw DimensionMismatch("forward_dual: tangent shape differs from input");
  }
  const std::size_t n = net.n_affine();
  tape.inputs.reserve(n + 1);
  tape.pre.reserve(n);
  tape.inputs.push_back(x);
  if (tape.with_tangent) {
    tape.tangents.reserve(n + 1);
    tape.pre_tangent.reserve(n);
    tape.tangents.push_back(xdot);
  }
  for (std::size_t l = 0; l < n; ++l) {
    Eigen::MatrixXd pre = net.weights[l] * tape.inputs[l];
    pre.colwise() += net.biases[l];
    const bool hidden = l + 1 < n;
    Eigen::MatrixXd h = hidden ? activate(net.activation, pre) : pre;
    if (tape.with_tangent) {
      Eigen::MatrixXd s = net.weights[l] * tape.tangents[l];
      Eigen::MatrixXd t = hidden ? (first_derivative(net.activation, h) * s.array()).matrix() : s;
      tape.pre_tangent.push_back(std::move(s));
      tape.tangents.push_back(std::move(t));
    }
    tape.pre.push_back(std::move(pre));
    tape.inputs.push_back(std::move(h));
  }
  return tape;
}

InputAdjoint backward_dual(const MlpParams& net, const DualTape& tape,
                           const Eigen::MatrixXd& out_value_adj,
                           const Eigen::MatrixXd& out_tangent_adj, MlpGradients& grads,
                           bool need_input_adjoint) {
  const std::size_t n = net.n_affine();
  Eigen::MatrixXd gh = out_value_adj;
  Eigen::MatrixXd gt;
  if (tape.with_tangent) gt = out_tangent_adj;

  for (std::size_t l = n; l-- > 0;) {
    const bool hidden = l + 1 < n;
    Eigen::MatrixXd ga, gs;
    if (hidden) {
      const Eigen::MatrixXd& h = tape.inputs[l + 1];
      const Eigen::ArrayXXd d1 = first_derivative(net.activation, h);
      if (tape.with_tangent) {
        const Eigen::ArrayXXd d2 = second_derivative(net.activation, h);
        ga = (gh.array() * d1 + gt.array() * d2 * tape.pre_tangent[l].array()).matrix();
        gs = (gt.array() * d1).matrix();
      } else {
        ga = (gh.array() * d1).matrix();
      }
    } else {
      ga = std::move(gh);
      if (tape.with_tangent) gs = std::move(gt);
    }

    grads.weights[l].noalias() += ga * tape.inputs[l].transpose();
    if (tape.with_tangent) grads.weights[l].noalias() += gs * tape.tangents[l].transpose();
    grads.biases[l] += ga.rowwise().sum();

    if (l > 0 || need_input_adjoint) {
      gh.noalias() = net.weights[l].transpose() * ga;
      if (tape.with_tangent) gt.noalias() = net.weights[l].transpose() * gs;
    }
  }
  InputAdjoint adj;
  if (need_input_adjoint) {
    adj.value = std::move(gh);
    if (tape.with_tangent) adj.tangent = std::move(gt);
  }
  return adj;
}

}  // namespace glasdi
