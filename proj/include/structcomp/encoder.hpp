#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "structcomp/dense_matrix.hpp"
#include "structcomp/sparse_graph.hpp"

namespace structcomp {

enum class Arch {
  linear,  ///< Z = X W
  mlp2,    ///< Z = σ₂(σ₁(X W₁) W₂)
};

enum class Activation { relu, identity };

std::string to_string(Arch a);
std::string to_string(Activation a);
Arch arch_from_string(const std::string& s);
Activation activation_from_string(const std::string& s);

/// Weights shared by the compressed-node MLP used for training and the GCN
/// used at inference. `weights` holds W (linear) or W₁, W₂ (mlp2);
/// `activations` gives σ₁, σ₂ for mlp2 and is ignored for linear.
struct EncoderParams {
  Arch arch = Arch::mlp2;
  std::vector<DenseMatrix> weights;
  std::array<Activation, 2> activations{Activation::relu, Activation::relu};

  Index input_dim() const { return weights.front().rows(); }
  Index output_dim() const { return weights.back().cols(); }
  void validate() const;

  friend bool operator==(const EncoderParams&, const EncoderParams&) = default;
};

/// Glorot-uniform initialization, a = sqrt(6 / (fan_in + fan_out)).
EncoderParams init_params(Arch arch, Index in_dim, Index hidden_dim, Index out_dim, Rng& rng,
                          std::array<Activation, 2> activations = {Activation::relu, Activation::relu});

/// Everything encoder_backward needs from a forward pass. For the GCN path
/// `propagator` points at the Â used in the forward pass.
struct ForwardTape {
  Arch arch = Arch::linear;
  std::array<Activation, 2> activations{Activation::relu, Activation::relu};
  std::vector<DenseMatrix> pre_activations;  // one per layer
  std::vector<DenseMatrix> layer_inputs;     // input to each layer's weight product
  const SparseGraph* propagator = nullptr;
};

std::pair<DenseMatrix, ForwardTape> mlp_forward(const DenseMatrix& x, const EncoderParams& params);
std::pair<DenseMatrix, ForwardTape> linear_forward(const DenseMatrix& x, const EncoderParams& params);
/// Dispatches on params.arch.
std::pair<DenseMatrix, ForwardTape> encoder_forward(const DenseMatrix& x, const EncoderParams& params);

/// Z = σ(Â σ(Â X W₁) W₂), or Â X W for the linear arch.
DenseMatrix gcn_forward(const SparseGraph& a_hat, const DenseMatrix& x, const EncoderParams& params);
/// Same as gcn_forward but keeps a tape; `a_hat` must outlive the tape.
std::pair<DenseMatrix, ForwardTape> gcn_forward_tape(const SparseGraph& a_hat, const DenseMatrix& x,
                                                     const EncoderParams& params);

/// Gradients of a downstream scalar with respect to every weight matrix,
/// given ∂/∂Z = grad_z. ReLU'(0) is taken as 0.
std::vector<DenseMatrix> encoder_backward(const ForwardTape& tape, const EncoderParams& params,
                                          const DenseMatrix& grad_z);

}  // namespace structcomp
