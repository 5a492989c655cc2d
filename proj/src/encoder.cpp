#include "structcomp/encoder.hpp"

#include <cmath>
#include <sstream>

#include "structcomp/error.hpp"

namespace structcomp {

std::string to_string(Arch a) { return a == Arch::linear ? "linear" : "mlp2"; }
std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "identity"; }

Arch arch_from_string(const std::string& s) {
  if (s == "linear") return Arch::linear;
  if (s == "mlp2") return Arch::mlp2;
  throw ValidationError("unknown encoder arch '" + s + "' (expected linear or mlp2)");
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "identity") return Activation::identity;
  throw ValidationError("unknown activation '" + s + "' (expected relu or identity)");
}

void EncoderParams::validate() const {
  const std::size_t expected = arch == Arch::linear ? 1 : 2;
  if (weights.size() != expected) {
    throw ValidationError("EncoderParams: " + to_string(arch) + " needs " + std::to_string(expected) +
                          " weight matrices, got " + std::to_string(weights.size()));
  }
  if (arch == Arch::mlp2 && weights[0].cols() != weights[1].rows()) {
    throw ValidationError("EncoderParams: W1 is " + shape_string(weights[0]) + " but W2 is " +
                          shape_string(weights[1]));
  }
  for (const auto& w : weights)
    if (!w.all_finite()) throw ValidationError("EncoderParams: non-finite weight");
}

EncoderParams init_params(Arch arch, Index in_dim, Index hidden_dim, Index out_dim, Rng& rng,
                          std::array<Activation, 2> activations) {
  auto glorot = [&rng](Index fan_in, Index fan_out) {
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    return DenseMatrix::random_uniform(fan_in, fan_out, -a, a, rng);
  };
  EncoderParams p;
  p.arch = arch;
  p.activations = activations;
  if (arch == Arch::linear) {
    p.weights.push_back(glorot(in_dim, out_dim));
  } else {
    p.weights.push_back(glorot(in_dim, hidden_dim));
    p.weights.push_back(glorot(hidden_dim, out_dim));
  }
  return p;
}

namespace {

void apply(Activation act, DenseMatrix& m) {
  if (act == Activation::identity) return;
  for (double& v : m.values()) v = v > 0.0 ? v : 0.0;
}

// grad ⊙ σ'(pre), with ReLU'(0) = 0.
void apply_derivative(Activation act, const DenseMatrix& pre, DenseMatrix& grad) {
  if (act == Activation::identity) return;
  auto g = grad.values();
  auto p = pre.values();
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!(p[i] > 0.0)) g[i] = 0.0;
}

void require_input(const DenseMatrix& x, const EncoderParams& params, const char* what) {
  params.validate();
  if (x.cols() != params.input_dim()) {
    std::ostringstream os;
    os << what << ": input is " << shape_string(x) << " but the first weight is " << shape_string(params.weights[0]);
    throw ValidationError(os.str());
  }
}

// Shared forward body; `a_hat` null means no propagation (MLP path).
std::pair<DenseMatrix, ForwardTape> forward(const SparseGraph* a_hat, const DenseMatrix& x,
                                            const EncoderParams& params) {
  ForwardTape tape;
  tape.arch = params.arch;
  tape.activations = params.activations;
  tape.propagator = a_hat;

  DenseMatrix h = x;
  const std::size_t layers = params.weights.size();
  for (std::size_t l = 0; l < layers; ++l) {
    tape.layer_inputs.push_back(h);
    DenseMatrix pre = matmul(h, params.weights[l]);
    if (a_hat) pre = spmm(*a_hat, pre);
    tape.pre_activations.push_back(pre);
    if (params.arch == Arch::mlp2) apply(params.activations[l], pre);
    h = std::move(pre);
  }
  return {std::move(h), std::move(tape)};
}

}  // namespace

std::pair<DenseMatrix, ForwardTape> mlp_forward(const DenseMatrix& x, const EncoderParams& params) {
  require_input(x, params, "mlp_forward");
  if (params.arch != Arch::mlp2) throw ValidationError("mlp_forward: params are not an mlp2 encoder");
  return forward(nullptr, x, params);
}

std::pair<DenseMatrix, ForwardTape> linear_forward(const DenseMatrix& x, const EncoderParams& params) {
  require_input(x, params, "linear_forward");
  if (params.arch != Arch::linear) throw ValidationError("linear_forward: params are not a linear encoder");
  return forward(nullptr, x, params);
}

std::pair<DenseMatrix, ForwardTape> encoder_forward(const DenseMatrix& x, const EncoderParams& params) {
  return params.arch == Arch::linear ? linear_forward(x, params) : mlp_forward(x, params);
}

std::pair<DenseMatrix, ForwardTape> gcn_forward_tape(const SparseGraph& a_hat, const DenseMatrix& x,
                                                     const EncoderParams& params) {
  require_input(x, params, "gcn_forward");
  if (a_hat.num_nodes() != x.rows()) {
    std::ostringstream os;
    os << "gcn_forward: graph has " << a_hat.num_nodes() << " nodes but features are " << shape_string(x);
    throw ValidationError(os.str());
  }
  return forward(&a_hat, x, params);
}

DenseMatrix gcn_forward(const SparseGraph& a_hat, const DenseMatrix& x, const EncoderParams& params) {
  return gcn_forward_tape(a_hat, x, params).first;
}

std::vector<DenseMatrix> encoder_backward(const ForwardTape& tape, const EncoderParams& params,
                                          const DenseMatrix& grad_z) {
  params.validate();
  if (tape.arch != params.arch || tape.layer_inputs.size() != params.weights.size() ||
      tape.pre_activations.size() != params.weights.size()) {
    throw ValidationError("encoder_backward: tape does not match the parameter set");
  }
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    if (tape.layer_inputs[l].cols() != params.weights[l].rows() ||
        tape.pre_activations[l].cols() != params.weights[l].cols()) {
      throw ValidationError("encoder_backward: tape layer " + std::to_string(l) + " does not match weight " +
                            shape_string(params.weights[l]));
    }
  }
  require_same_shape(grad_z, tape.pre_activations.back(), "encoder_backward: grad_z");

  std::vector<DenseMatrix> grads(params.weights.size());
  DenseMatrix delta = grad_z;
  for (std::size_t l = params.weights.size(); l-- > 0;) {
    if (params.arch == Arch::mlp2) apply_derivative(params.activations[l], tape.pre_activations[l], delta);
    // Â is symmetric, so the adjoint of Y ↦ ÂY is Y ↦ ÂY.
    if (tape.propagator) delta = spmm(*tape.propagator, delta);
    grads[l] = matmul_tn(tape.layer_inputs[l], delta);
    if (l > 0) delta = matmul_nt(delta, params.weights[l]);
  }
  return grads;
}

}  // namespace structcomp
