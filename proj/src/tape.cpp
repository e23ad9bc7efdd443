#include "rr/tape.hpp"

#include <algorithm>
#include <cmath>

#include "rr/kernels.hpp"

namespace rr::nd {

Tape::Id Tape::push(Tensor val, std::vector<Id> parents, std::function<void(Tape&, Node&)> back) {
    Node n;
    n.val = std::move(val);
    for (Id p : parents)
        if (node(p).needs_grad) n.needs_grad = true;
    if (n.needs_grad) n.back = std::move(back);
    nodes_.push_back(std::move(n));
    parents_.push_back(std::move(parents));
    return static_cast<Id>(nodes_.size()) - 1;
}

Tape::Id Tape::leaf(Tensor t, bool needs_grad) {
    require_finite(t, "leaf");
    Node n;
    n.val = std::move(t);
    n.needs_grad = needs_grad;
    nodes_.push_back(std::move(n));
    parents_.push_back({});
    return static_cast<Id>(nodes_.size()) - 1;
}

Tensor& Tape::ensure_grad(Id i) {
    Node& n = node(i);
    if (n.grad.data.empty() && n.val.numel() > 0)
        n.grad = Tensor::zeros(n.val.shape);
    return n.grad;
}

void Tape::accumulate(Id i, const double* g, int64_t n) {
    if (!node(i).needs_grad) return;
    Tensor& dst = ensure_grad(i);
    kernels::axpy(1.0, g, dst.data.data(), n);
}

Tape::Id Tape::matmul(Id a, Id b) {
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    require_finite(A, "matmul lhs");
    require_finite(B, "matmul rhs");
    if (A.rank() != 2 || (B.rank() != 2 && B.rank() != 1))
        throw std::invalid_argument("matmul: lhs must be 2-D, rhs 2-D or 1-D");
    const int m = A.shape[0], k = A.shape[1];
    const int n = B.rank() == 2 ? B.shape[1] : 1;
    if (B.shape[0] != k) throw std::invalid_argument("matmul: inner dimensions mismatch");
    Tensor C = B.rank() == 2 ? Tensor::zeros({m, n}) : Tensor::zeros({m});
    kernels::matmul_acc(A.data.data(), B.data.data(), C.data.data(), m, k, n);
    return push(std::move(C), {a, b}, [a, b, m, k, n](Tape& t, Node& self) {
        const double* g = self.grad.data.data();
        if (t.node(a).needs_grad) {
            // dA = g * B^T
            Tensor& da = t.ensure_grad(a);
            kernels::matmul_nt_acc(g, t.val(b).data.data(), da.data.data(), m, n, k);
        }
        if (t.node(b).needs_grad) {
            // dB = A^T * g
            Tensor& db = t.ensure_grad(b);
            kernels::matmul_tn_acc(t.val(a).data.data(), g, db.data.data(), k, m, n);
        }
    });
}

Tape::Id Tape::vecmat(Id v, Id m) {
    const Tensor& V = val(v);
    const Tensor& M = val(m);
    require_finite(V, "vecmat lhs");
    require_finite(M, "vecmat rhs");
    if (V.rank() != 1 || M.rank() != 2 || M.shape[0] != V.shape[0])
        throw std::invalid_argument("vecmat: shape mismatch");
    const int k = M.shape[0], n = M.shape[1];
    Tensor C = Tensor::zeros({n});
    // C = V^T M, accumulation order over k matches the serial kernel
    kernels::matmul_acc(V.data.data(), M.data.data(), C.data.data(), 1, k, n);
    return push(std::move(C), {v, m}, [v, m, k, n](Tape& t, Node& self) {
        const double* g = self.grad.data.data();
        if (t.node(v).needs_grad) {
            // dV = M g
            Tensor& dv = t.ensure_grad(v);
            kernels::matmul_acc(t.val(m).data.data(), g, dv.data.data(), k, n, 1);
        }
        if (t.node(m).needs_grad) {
            // dM = V outer g
            Tensor& dm = t.ensure_grad(m);
            kernels::matmul_acc(t.val(v).data.data(), g, dm.data.data(), k, 1, n);
        }
    });
}

Tape::Id Tape::stack_scalars(const std::vector<Id>& s) {
    if (s.empty()) throw std::invalid_argument("stack_scalars: empty input");
    std::vector<double> out;
    out.reserve(s.size());
    for (Id i : s) {
        if (!val(i).is_scalar()) throw std::invalid_argument("stack_scalars: scalar nodes required");
        out.push_back(val(i).data[0]);
    }
    return push(Tensor::vec(std::move(out)), std::vector<Id>(s), [s](Tape& t, Node& self) {
        for (size_t i = 0; i < s.size(); ++i) t.accumulate(s[i], &self.grad.data[i], 1);
    });
}

Tape::Id Tape::weighted_sum(const std::vector<Id>& vecs, Id weights) {
    const Tensor& W = val(weights);
    if (W.rank() != 1 || W.shape[0] != static_cast<int>(vecs.size()))
        throw std::invalid_argument("weighted_sum: weight count mismatch");
    require_finite(W, "weighted_sum");
    const int d = val(vecs[0]).shape[0];
    Tensor C = Tensor::zeros({d});
    for (size_t i = 0; i < vecs.size(); ++i) {
        const Tensor& v = val(vecs[i]);
        if (v.rank() != 1 || v.shape[0] != d) throw std::invalid_argument("weighted_sum: ragged input");
        kernels::axpy(W.data[i], v.data.data(), C.data.data(), d);
    }
    std::vector<Id> parents(vecs);
    parents.push_back(weights);
    return push(std::move(C), std::move(parents), [vecs, weights, d](Tape& t, Node& self) {
        const Tensor& W = t.val(weights);
        for (size_t i = 0; i < vecs.size(); ++i) {
            if (t.node(vecs[i]).needs_grad) {
                Tensor& dv = t.ensure_grad(vecs[i]);
                kernels::axpy(W.data[i], self.grad.data.data(), dv.data.data(), d);
            }
        }
        if (t.node(weights).needs_grad) {
            Tensor& dw = t.ensure_grad(weights);
            for (size_t i = 0; i < vecs.size(); ++i) {
                const Tensor& v = t.val(vecs[i]);
                double acc = 0.0;
                for (int j = 0; j < d; ++j) acc += v.data[static_cast<size_t>(j)] * self.grad.data[static_cast<size_t>(j)];
                dw.data[i] += acc;
            }
        }
    });
}

Tape::Id Tape::add(Id a, Id b) {
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    require_finite(A, "add");
    require_finite(B, "add");
    if (!A.same_shape(B)) throw std::invalid_argument("add: shape mismatch");
    Tensor C = A;
    for (size_t i = 0; i < C.data.size(); ++i) C.data[i] += B.data[i];
    return push(std::move(C), {a, b}, [a, b](Tape& t, Node& self) {
        t.accumulate(a, self.grad.data.data(), self.grad.numel());
        t.accumulate(b, self.grad.data.data(), self.grad.numel());
    });
}

Tape::Id Tape::sub(Id a, Id b) {
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    require_finite(A, "sub");
    require_finite(B, "sub");
    if (!A.same_shape(B)) throw std::invalid_argument("sub: shape mismatch");
    Tensor C = A;
    for (size_t i = 0; i < C.data.size(); ++i) C.data[i] -= B.data[i];
    return push(std::move(C), {a, b}, [a, b](Tape& t, Node& self) {
        t.accumulate(a, self.grad.data.data(), self.grad.numel());
        if (t.node(b).needs_grad) {
            Tensor& db = t.ensure_grad(b);
            kernels::axpy(-1.0, self.grad.data.data(), db.data.data(), self.grad.numel());
        }
    });
}

Tape::Id Tape::mul(Id a, Id b) {
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    require_finite(A, "mul");
    require_finite(B, "mul");
    if (!A.same_shape(B)) throw std::invalid_argument("mul: shape mismatch");
    Tensor C = A;
    for (size_t i = 0; i < C.data.size(); ++i) C.data[i] *= B.data[i];
    return push(std::move(C), {a, b}, [a, b](Tape& t, Node& self) {
        const int64_t n = self.grad.numel();
        if (t.node(a).needs_grad) {
            Tensor& da = t.ensure_grad(a);
            const Tensor& bv = t.val(b);
            for (int64_t i = 0; i < n; ++i) da.data[i] += self.grad.data[i] * bv.data[i];
        }
        if (t.node(b).needs_grad) {
            Tensor& db = t.ensure_grad(b);
            const Tensor& av = t.val(a);
            for (int64_t i = 0; i < n; ++i) db.data[i] += self.grad.data[i] * av.data[i];
        }
    });
}

Tape::Id Tape::scale(Id a, double c) {
    Tensor C = val(a);
    require_finite(C, "scale");
    for (double& v : C.data) v *= c;
    return push(std::move(C), {a}, [a, c](Tape& t, Node& self) {
        if (!t.node(a).needs_grad) return;
        Tensor& da = t.ensure_grad(a);
        kernels::axpy(c, self.grad.data.data(), da.data.data(), self.grad.numel());
    });
}

Tape::Id Tape::add_const(Id a, double c) {
    Tensor C = val(a);
    require_finite(C, "add_const");
    for (double& v : C.data) v += c;
    return push(std::move(C), {a}, [a](Tape& t, Node& self) {
        t.accumulate(a, self.grad.data.data(), self.grad.numel());
    });
}

Tape::Id Tape::concat(const std::vector<Id>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat: empty input");
    std::vector<double> out;
    std::vector<int> lens;
    for (Id p : parts) {
        const Tensor& v = val(p);
        if (v.rank() != 1) throw std::invalid_argument("concat: 1-D inputs only");
        require_finite(v, "concat");
        lens.push_back(v.shape[0]);
        out.insert(out.end(), v.data.begin(), v.data.end());
    }
    return push(Tensor::vec(std::move(out)), std::vector<Id>(parts),
                [parts, lens](Tape& t, Node& self) {
                    int off = 0;
                    for (size_t i = 0; i < parts.size(); ++i) {
                        t.accumulate(parts[i], self.grad.data.data() + off, lens[i]);
                        off += lens[i];
                    }
                });
}

Tape::Id Tape::slice(Id a, int start, int len) {
    const Tensor& A = val(a);
    if (A.rank() != 1 || start < 0 || start + len > A.shape[0])
        throw std::invalid_argument("slice: out of range");
    Tensor C({len}, std::vector<double>(A.data.begin() + start, A.data.begin() + start + len));
    return push(std::move(C), {a}, [a, start, len](Tape& t, Node& self) {
        if (!t.node(a).needs_grad) return;
        Tensor& da = t.ensure_grad(a);
        kernels::axpy(1.0, self.grad.data.data(), da.data.data() + start, len);
    });
}

Tape::Id Tape::row(Id table, int r) {
    const Tensor& T = val(table);
    if (T.rank() != 2 || r < 0 || r >= T.shape[0]) throw std::invalid_argument("row: out of range");
    const int cols = T.shape[1];
    Tensor C({cols}, std::vector<double>(T.data.begin() + static_cast<int64_t>(r) * cols,
                                         T.data.begin() + static_cast<int64_t>(r + 1) * cols));
    require_finite(C, "row");
    return push(std::move(C), {table}, [table, r, cols](Tape& t, Node& self) {
        if (!t.node(table).needs_grad) return;
        Tensor& dt = t.ensure_grad(table);
        kernels::axpy(1.0, self.grad.data.data(), dt.data.data() + static_cast<int64_t>(r) * cols,
                      cols);
    });
}

Tape::Id Tape::stack_rows(const std::vector<Id>& rows) {
    if (rows.empty()) throw std::invalid_argument("stack_rows: empty input");
    const int f = val(rows[0]).shape[0];
    Tensor C = Tensor::zeros({static_cast<int>(rows.size()), f});
    for (size_t i = 0; i < rows.size(); ++i) {
        const Tensor& v = val(rows[i]);
        if (v.rank() != 1 || v.shape[0] != f) throw std::invalid_argument("stack_rows: ragged input");
        std::copy(v.data.begin(), v.data.end(), C.data.begin() + static_cast<int64_t>(i) * f);
    }
    return push(std::move(C), std::vector<Id>(rows), [rows, f](Tape& t, Node& self) {
        for (size_t i = 0; i < rows.size(); ++i)
            t.accumulate(rows[i], self.grad.data.data() + static_cast<int64_t>(i) * f, f);
    });
}

Tape::Id Tape::mul_rowvec(Id x, Id v) {
    const Tensor& X = val(x);
    const Tensor& V = val(v);
    if (X.rank() != 2 || V.rank() != 1 || X.shape[1] != V.shape[0])
        throw std::invalid_argument("mul_rowvec: shape mismatch");
    Tensor C = X;
    const int B = X.shape[0], F = X.shape[1];
    for (int i = 0; i < B; ++i)
        for (int j = 0; j < F; ++j) C.at(i, j) *= V[static_cast<size_t>(j)];
    return push(std::move(C), {x, v}, [x, v](Tape& t, Node& self) {
        const Tensor& X = t.val(x);
        const Tensor& V = t.val(v);
        const int B = X.shape[0], F = X.shape[1];
        if (t.node(x).needs_grad) {
            Tensor& dx = t.ensure_grad(x);
            for (int i = 0; i < B; ++i)
                for (int j = 0; j < F; ++j)
                    dx.at(i, j) += self.grad.at(i, j) * V[static_cast<size_t>(j)];
        }
        if (t.node(v).needs_grad) {
            Tensor& dv = t.ensure_grad(v);
            for (int i = 0; i < B; ++i)
                for (int j = 0; j < F; ++j)
                    dv[static_cast<size_t>(j)] += self.grad.at(i, j) * X.at(i, j);
        }
    });
}

Tape::Id Tape::add_rowvec(Id x, Id v) {
    const Tensor& X = val(x);
    const Tensor& V = val(v);
    if (X.rank() != 2 || V.rank() != 1 || X.shape[1] != V.shape[0])
        throw std::invalid_argument("add_rowvec: shape mismatch");
    Tensor C = X;
    const int B = X.shape[0], F = X.shape[1];
    for (int i = 0; i < B; ++i)
        for (int j = 0; j < F; ++j) C.at(i, j) += V[static_cast<size_t>(j)];
    return push(std::move(C), {x, v}, [x, v](Tape& t, Node& self) {
        const int B = self.grad.shape[0], F = self.grad.shape[1];
        t.accumulate(x, self.grad.data.data(), self.grad.numel());
        if (t.node(v).needs_grad) {
            Tensor& dv = t.ensure_grad(v);
            for (int i = 0; i < B; ++i)
                for (int j = 0; j < F; ++j) dv[static_cast<size_t>(j)] += self.grad.at(i, j);
        }
    });
}

Tape::Id Tape::leaky_relu(Id a, double slope) {
    if (!(slope > 0.0 && slope < 1.0)) throw std::invalid_argument("leaky_relu: slope not in (0,1)");
    Tensor C = val(a);
    require_finite(C, "leaky_relu");
    for (double& v : C.data)
        if (v < 0.0) v *= slope;
    return push(std::move(C), {a}, [a, slope](Tape& t, Node& self) {
        if (!t.node(a).needs_grad) return;
        Tensor& da = t.ensure_grad(a);
        const Tensor& x = t.val(a);
        for (size_t i = 0; i < da.data.size(); ++i)
            da.data[i] += self.grad.data[i] * (x.data[i] >= 0.0 ? 1.0 : slope);
    });
}

Tape::Id Tape::sigmoid(Id a) {
    Tensor C = val(a);
    require_finite(C, "sigmoid");
    for (double& v : C.data) v = 1.0 / (1.0 + std::exp(-v));
    return push(std::move(C), {a}, [a](Tape& t, Node& self) {
        if (!t.node(a).needs_grad) return;
        Tensor& da = t.ensure_grad(a);
        for (size_t i = 0; i < da.data.size(); ++i) {
            const double s = self.val.data[i];
            da.data[i] += self.grad.data[i] * s * (1.0 - s);
        }
    });
}

Tape::Id Tape::tanh_(Id a) {
    Tensor C = val(a);
    require_finite(C, "tanh");
    for (double& v : C.data) v = std::tanh(v);
    return push(std::move(C), {a}, [a](Tape& t, Node& self) {
        if (!t.node(a).needs_grad) return;
        Tensor& da = t.ensure_grad(a);
        for (size_t i = 0; i < da.data.size(); ++i) {
            const double y = self.val.data[i];
            da.data[i] += self.grad.data[i] * (1.0 - y * y);
        }
    });
}

Tape::Id Tape::softmax(Id a) {
    const Tensor& A = val(a);
    if (A.rank() != 1 || A.shape[0] < 1) throw std::invalid_argument("softmax: non-empty 1-D input required");
    require_finite(A, "softmax");
    Tensor C = A;
    const double mx = *std::max_element(C.data.begin(), C.data.end());
    double z = 0.0;
    for (double& v : C.data) {
        v = std::exp(v - mx);
        z += v;
    }
    for (double& v : C.data) v /= z;
    return push(std::move(C), {a}, [a](Tape& t, Node& self) {
        if (!t.node(a).needs_grad) return;
        Tensor& da = t.ensure_grad(a);
        const Tensor& y = self.val;
        double gy = 0.0;
        for (size_t i = 0; i < y.data.size(); ++i) gy += self.grad.data[i] * y.data[i];
        for (size_t i = 0; i < y.data.size(); ++i)
            da.data[i] += y.data[i] * (self.grad.data[i] - gy);
    });
}

Tape::Id Tape::l2_normalize(Id a, double eps) {
    const Tensor& A = val(a);
    if (A.rank() != 1) throw std::invalid_argument("l2_normalize: 1-D input required");
    require_finite(A, "l2_normalize");
    const double norm = l2_norm(A);
    if (norm <= eps) {
        // zero-guard: passthrough, identity gradient
        Tensor C = A;
        return push(std::move(C), {a}, [a](Tape& t, Node& self) {
            t.accumulate(a, self.grad.data.data(), self.grad.numel());
        });
    }
    Tensor C = A;
    for (double& v : C.data) v /= norm;
    return push(std::move(C), {a}, [a, norm](Tape& t, Node& self) {
        if (!t.node(a).needs_grad) return;
        Tensor& da = t.ensure_grad(a);
        const Tensor& y = self.val;
        double gy = 0.0;
        for (size_t i = 0; i < y.data.size(); ++i) gy += self.grad.data[i] * y.data[i];
        for (size_t i = 0; i < y.data.size(); ++i)
            da.data[i] += (self.grad.data[i] - gy * y.data[i]) / norm;
    });
}

Tape::Id Tape::dot(Id a, Id b) {
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    if (A.rank() != 1 || B.rank() != 1 || A.shape[0] != B.shape[0])
        throw std::invalid_argument("dot: shape mismatch");
    require_finite(A, "dot");
    require_finite(B, "dot");
    double s = 0.0;
    for (size_t i = 0; i < A.data.size(); ++i) s += A.data[i] * B.data[i];
    return push(Tensor::scalar(s), {a, b}, [a, b](Tape& t, Node& self) {
        const double g = self.grad.data[0];
        if (t.node(a).needs_grad) {
            Tensor& da = t.ensure_grad(a);
            kernels::axpy(g, t.val(b).data.data(), da.data.data(), da.numel());
        }
        if (t.node(b).needs_grad) {
            Tensor& db = t.ensure_grad(b);
            kernels::axpy(g, t.val(a).data.data(), db.data.data(), db.numel());
        }
    });
}

Tape::Id Tape::sum(Id a) {
    const Tensor& A = val(a);
    require_finite(A, "sum");
    double s = 0.0;
    for (double v : A.data) s += v;
    return push(Tensor::scalar(s), {a}, [a](Tape& t, Node& self) {
        if (!t.node(a).needs_grad) return;
        Tensor& da = t.ensure_grad(a);
        const double g = self.grad.data[0];
        for (double& v : da.data) v += g;
    });
}

Tape::Id Tape::mean(const std::vector<Id>& scalars) {
    if (scalars.empty()) throw std::invalid_argument("mean: empty input");
    double s = 0.0;
    for (Id i : scalars) {
        if (!val(i).is_scalar()) throw std::invalid_argument("mean: scalar nodes required");
        s += val(i).data[0];
    }
    const double inv = 1.0 / static_cast<double>(scalars.size());
    return push(Tensor::scalar(s * inv), std::vector<Id>(scalars),
                [scalars, inv](Tape& t, Node& self) {
                    const double g = self.grad.data[0] * inv;
                    for (Id i : scalars) t.accumulate(i, &g, 1);
                });
}

Tape::Id Tape::bce(Id p, double y, double eps) {
    const Tensor& P = val(p);
    if (!P.is_scalar()) throw std::invalid_argument("bce: scalar probability required");
    require_finite(P, "bce");
    const double pc = std::min(std::max(P.data[0], eps), 1.0 - eps);
    const bool clamped = pc != P.data[0];
    const double loss = -(y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc));
    return push(Tensor::scalar(loss), {p}, [p, y, pc, clamped](Tape& t, Node& self) {
        if (clamped || !t.node(p).needs_grad) return;
        const double d = (-y / pc + (1.0 - y) / (1.0 - pc)) * self.grad.data[0];
        t.accumulate(p, &d, 1);
    });
}

Tape::Id Tape::batchnorm_train(Id x, Id gamma, Id beta, double eps, Tensor* out_mean,
                               Tensor* out_var) {
    const Tensor& X = val(x);
    if (X.rank() != 2 || X.shape[0] < 2)
        throw std::invalid_argument("batchnorm_train: batch of >= 2 rows required");
    const int B = X.shape[0], F = X.shape[1];
    if (val(gamma).shape != std::vector<int>{F} || val(beta).shape != std::vector<int>{F})
        throw std::invalid_argument("batchnorm_train: gamma/beta shape mismatch");
    require_finite(X, "batchnorm_train");
    Tensor mu = Tensor::zeros({F}), var = Tensor::zeros({F});
    for (int j = 0; j < F; ++j) {
        double m = 0.0;
        for (int i = 0; i < B; ++i) m += X.at(i, j);
        m /= B;
        double v = 0.0;
        for (int i = 0; i < B; ++i) {
            const double d = X.at(i, j) - m;
            v += d * d;
        }
        mu[static_cast<size_t>(j)] = m;
        var[static_cast<size_t>(j)] = v / B;  // biased
    }
    if (out_mean) *out_mean = mu;
    if (out_var) *out_var = var;
    Tensor xhat = Tensor::zeros({B, F});
    Tensor Y = Tensor::zeros({B, F});
    const Tensor& G = val(gamma);
    const Tensor& Be = val(beta);
    std::vector<double> ivar(static_cast<size_t>(F));
    for (int j = 0; j < F; ++j) ivar[static_cast<size_t>(j)] = 1.0 / std::sqrt(var[static_cast<size_t>(j)] + eps);
    for (int i = 0; i < B; ++i)
        for (int j = 0; j < F; ++j) {
            const double xh = (X.at(i, j) - mu[static_cast<size_t>(j)]) * ivar[static_cast<size_t>(j)];
            xhat.at(i, j) = xh;
            Y.at(i, j) = G[static_cast<size_t>(j)] * xh + Be[static_cast<size_t>(j)];
        }
    return push(std::move(Y), {x, gamma, beta},
                [x, gamma, beta, xhat, ivar, B, F](Tape& t, Node& self) {
                    const Tensor& G = t.val(gamma);
                    if (t.node(gamma).needs_grad) {
                        Tensor& dg = t.ensure_grad(gamma);
                        for (int i = 0; i < B; ++i)
                            for (int j = 0; j < F; ++j)
                                dg[static_cast<size_t>(j)] += self.grad.at(i, j) * xhat.at(i, j);
                    }
                    if (t.node(beta).needs_grad) {
                        Tensor& db = t.ensure_grad(beta);
                        for (int i = 0; i < B; ++i)
                            for (int j = 0; j < F; ++j) db[static_cast<size_t>(j)] += self.grad.at(i, j);
                    }
                    if (t.node(x).needs_grad) {
                        // standard batch-norm backward through batch statistics
                        Tensor& dx = t.ensure_grad(x);
                        for (int j = 0; j < F; ++j) {
                            double sum_dy = 0.0, sum_dy_xhat = 0.0;
                            for (int i = 0; i < B; ++i) {
                                const double dyh = self.grad.at(i, j) * G[static_cast<size_t>(j)];
                                sum_dy += dyh;
                                sum_dy_xhat += dyh * xhat.at(i, j);
                            }
                            for (int i = 0; i < B; ++i) {
                                const double dyh = self.grad.at(i, j) * G[static_cast<size_t>(j)];
                                dx.at(i, j) += ivar[static_cast<size_t>(j)] *
                                               (dyh - sum_dy / B - xhat.at(i, j) * sum_dy_xhat / B);
                            }
                        }
                    }
                });
}

void Tape::backward(Id loss) {
    if (backward_done_) throw std::logic_error("backward called twice without a new forward pass");
    backward_done_ = true;
    Node& ln = node(loss);
    if (!ln.val.is_scalar()) throw std::invalid_argument("backward: loss must be a scalar node");
    ln.reachable = true;
    ensure_grad(loss).data[0] = 1.0;
    for (Id i = loss; i >= 0; --i) {
        Node& n = node(i);
        if (!n.reachable || !n.needs_grad) continue;
        for (Id p : parents_[static_cast<size_t>(i)]) node(p).reachable = true;
        if (n.back) {
            ensure_grad(i);
            n.back(*this, n);
        }
    }
}

Tensor Tape::grad(Id i) const {
    const Node& n = nodes_[static_cast<size_t>(i)];
    if (n.grad.data.empty()) return Tensor::zeros(n.val.shape);
    return n.grad;
}

}  // namespace rr::nd
