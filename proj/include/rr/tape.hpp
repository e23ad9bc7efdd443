#pragma once

#include <functional>
#include <vector>

#include "rr/tensor.hpp"

namespace rr::nd {

// Reverse-mode autodiff tape. Nodes are appended in topological order during
// the forward pass (every parent precedes its children), so the backward
// sweep is a single descending loop that visits each node exactly once. The
// tape is rebuilt for every forward pass; calling backward() twice without
// rebuilding is rejected.
class Tape {
public:
    using Id = int;

    struct Node {
        Tensor val;
        Tensor grad;  // allocated lazily on first accumulation
        bool needs_grad = false;
        bool reachable = false;
        std::function<void(Tape&, Node&)> back;  // empty for leaves
    };

    Tape() { nodes_.reserve(1024); }

    // --- leaves -----------------------------------------------------------
    Id leaf(Tensor t, bool needs_grad = true);
    Id constant(Tensor t) { return leaf(std::move(t), false); }

    // --- ops --------------------------------------------------------------
    Id matmul(Id a, Id b);                        // [m,k]x[k,n] -> [m,n]; [m,k]x[k] -> [m]
    Id vecmat(Id v, Id m);                        // [k] x [k,n] -> [n]  (v^T M)
    Id stack_scalars(const std::vector<Id>& s);   // n scalars -> [n]
    Id weighted_sum(const std::vector<Id>& vecs, Id weights);  // sum_i w[i] * vecs[i]
    Id add(Id a, Id b);                           // same shape
    Id sub(Id a, Id b);
    Id mul(Id a, Id b);                           // elementwise
    Id scale(Id a, double c);
    Id add_const(Id a, double c);
    Id concat(const std::vector<Id>& parts);      // 1-D concat
    Id slice(Id a, int start, int len);           // 1-D slice
    Id row(Id table, int r);                      // row of a 2-D node -> 1-D
    Id stack_rows(const std::vector<Id>& rows);   // B vectors [F] -> [B,F]
    Id mul_rowvec(Id x, Id v);                    // [B,F] * [F] broadcast over rows
    Id add_rowvec(Id x, Id v);
    Id leaky_relu(Id a, double slope);
    Id sigmoid(Id a);
    Id tanh_(Id a);
    Id softmax(Id a);                             // 1-D, max-subtracted
    Id l2_normalize(Id a, double eps = 1e-12);    // 1-D; passthrough when ||a|| <= eps
    Id dot(Id a, Id b);                           // 1-D x 1-D -> scalar
    Id sum(Id a);                                 // -> scalar
    Id mean(const std::vector<Id>& scalars);      // mean of scalar nodes
    Id bce(Id p, double y, double eps = 1e-12);   // scalar p in (0,1), y in {0,1}

    // Batch norm over rows of x[B,F] using batch statistics; gamma/beta are
    // [F]. Batch mean/var (biased) are written to *out_mean / *out_var for
    // running-stat updates. Requires B >= 2.
    Id batchnorm_train(Id x, Id gamma, Id beta, double eps,
                       Tensor* out_mean = nullptr, Tensor* out_var = nullptr);

    // --- backward ---------------------------------------------------------
    void backward(Id loss);

    const Tensor& val(Id i) const { return nodes_[static_cast<size_t>(i)].val; }
    // Gradient of the loss w.r.t. node i; zero tensor if i was not reached.
    Tensor grad(Id i) const;

    size_t size() const { return nodes_.size(); }

private:
    Id push(Tensor val, std::vector<Id> parents, std::function<void(Tape&, Node&)> back);
    Node& node(Id i) { return nodes_[static_cast<size_t>(i)]; }
    void accumulate(Id i, const double* g, int64_t n);
    Tensor& ensure_grad(Id i);

    std::vector<Node> nodes_;
    std::vector<std::vector<Id>> parents_;
    bool backward_done_ = false;
};

}  // namespace rr::nd
