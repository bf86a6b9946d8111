#pragma once

#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "hrv/nn/tensor.hpp"

namespace hrv::nn {

// One node of the dynamically built reverse-mode graph. Ops capture their
// parents by shared pointer, so releasing the loss frees the whole graph
// while parameter leaves survive in the model.
struct Node {
    Tensor value;
    Tensor grad;  // allocated on demand during backward
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;
    std::string name;

    Tensor& ensure_grad();
};

using Var = std::shared_ptr<Node>;

Var make_leaf(Tensor value, bool requires_grad = false, std::string name = {});
Var make_op(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backward_fn);

// Reverse-mode sweep from a scalar root. Zeroes the grads of every node
// reachable from the root first, then seeds d(root)/d(root) = 1.
void backward(const Var& root);

// ---- elementwise / structural ----
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double c);
Var add_rows(const Var& x, const Var& rows);  // (B,L,D) + (L,D)
Var silu(const Var& x);
Var reshape(const Var& x, std::vector<int> shape);
Var transpose12(const Var& x);                // (B,I,J) -> (B,J,I)
Var concat_tokens(const Var& token, const Var& x);  // (B,1,D) ++ (B,L,D)
Var slice_token0(const Var& x);               // (B,L,D) -> (B,D)
Var mean_axis1(const Var& x);                 // (B,L,D) -> (B,D)

// ---- dense / conv primitives ----
Var linear(const Var& x, const Var& w, const Var& b);  // x (...,Din), w (Din,Dout), b (Dout) or null
Var conv1d(const Var& x, const Var& w, const Var& b);  // x (B,Cin,T), w (Cout,Cin,K), same padding
Var dwconv1d(const Var& x, const Var& w, const Var& b);  // x (B,C,T), w (C,K), same padding
Var avgpool1d(const Var& x, int kernel, int stride);   // (B,C,T) -> (B,C,T')
Var global_avgpool1d(const Var& x);                    // (B,C,T) -> (B,C)
Var glu_channels(const Var& x);                        // (B,2C,T) -> (B,C,T)

// ---- normalization / regularization ----
Var layernorm(const Var& x, const Var& gamma, const Var& beta, double eps = 1e-5);

struct BatchNormState {
    Tensor running_mean;  // (C)
    Tensor running_var;   // (C)
    double momentum = 0.1;
    bool initialized = false;
};
Var batchnorm1d(const Var& x, const Var& gamma, const Var& beta, BatchNormState& state,
                bool training, double eps = 1e-5);

Var dropout(const Var& x, double p, bool training, std::mt19937_64& rng);

// ---- attention pieces ----
Var split_heads(const Var& x, int n_heads);  // (B,L,D) -> (B,H,L,D/H)
Var merge_heads(const Var& x);               // (B,H,L,dh) -> (B,L,H*dh)
Var bmm(const Var& a, const Var& b, bool transpose_b);  // (B,H,L,K) x (B,H,{M,K}|{K,M})
Var softmax_lastdim(const Var& x);
// score[b,h,i,j] = sum_d q[b,h,i,d] * p[h, i-j+L-1, d]
Var relative_position_scores(const Var& q, const Var& p);
Var add_head_bias(const Var& q, const Var& bias);  // (B,H,L,dh) + (H,dh)

// ---- loss ----
// Cross-entropy with label smoothing; mean over the batch.
Var cross_entropy_smoothed(const Var& logits, const std::vector<int>& labels, double smoothing);

// Inference-path softmax over rows of (B,C), no graph involvement.
Tensor softmax_rows(const Tensor& logits);

// Fixed sin-cos encoding table: row p encodes positions[p] across dim columns.
Tensor sincos_encoding(const std::vector<double>& positions, int dim);

}  // namespace hrv::nn
