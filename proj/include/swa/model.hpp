// SPDX-License-Identifier: Apache-2.0
//
// Desk-scale MLP classifier in F64: linear layers with optional batch norm
// on hidden pre-activations, rectifier activations, softmax cross-entropy.
// Backward passes are hand-derived reverse-mode accumulation per layer; the
// gradient check in the test suite pins them against finite differences.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "swa/dataset.hpp"
#include "swa/error.hpp"
#include "swa/rng.hpp"
#include "swa/tensor_store.hpp"

namespace swa {

/// Architecture description. Activation is fixed to the rectifier and all
/// arithmetic is F64. Batch norm, when enabled, applies to hidden
/// pre-activations only, so at least one hidden layer is required.
struct ModelSpec {
    int input_dim = 0;
    std::vector<int> hidden_dims;
    int output_dim = 0;
    bool use_batchnorm = false;
};

inline void validate(const ModelSpec& spec) {
    if (spec.input_dim <= 0) throw ConfigError("model: input_dim must be positive");
    if (spec.output_dim <= 0) throw ConfigError("model: output_dim must be positive");
    for (int h : spec.hidden_dims) {
        if (h <= 0) throw ConfigError("model: hidden dims must be positive");
    }
    if (spec.use_batchnorm && spec.hidden_dims.empty()) {
        throw ConfigError("model: batch norm requires at least one hidden layer");
    }
}

/// Minimal row-major dense matrix; just what the trainer needs.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, 0.0) {}

    double& operator()(int i, int j) { return v[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return v[static_cast<std::size_t>(i) * cols + j]; }
    double* row(int i) { return v.data() + static_cast<std::size_t>(i) * cols; }
    const double* row(int i) const { return v.data() + static_cast<std::size_t>(i) * cols; }
};

namespace detail {

// C = A (n x k) * B^T with B (m x k)  ->  n x m
inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows, b.rows);
    for (int i = 0; i < a.rows; ++i) {
        for (int j = 0; j < b.rows; ++j) {
            double s = 0.0;
            const double* ar = a.row(i);
            const double* br = b.row(j);
            for (int k = 0; k < a.cols; ++k) s += ar[k] * br[k];
            c(i, j) = s;
        }
    }
    return c;
}

// C = A (n x k) * B (k x m)  ->  n x m
inline Matrix matmul_nn(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) {
        double* cr = c.row(i);
        for (int k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            const double* br = b.row(k);
            for (int j = 0; j < b.cols; ++j) cr[j] += aik * br[j];
        }
    }
    return c;
}

// C = A^T (k x n)^T... i.e. A (n x k), B (n x m) -> k x m
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    Matrix c(a.cols, b.cols);
    for (int i = 0; i < a.rows; ++i) {
        const double* ar = a.row(i);
        const double* br = b.row(i);
        for (int k = 0; k < a.cols; ++k) {
            double* cr = c.row(k);
            const double aik = ar[k];
            for (int j = 0; j < b.cols; ++j) cr[j] += aik * br[j];
        }
    }
    return c;
}

inline bool all_finite(const std::vector<double>& v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

} // namespace detail

struct LinearLayer {
    Matrix w;  // out x in
    std::vector<double> b;
};

struct BnLayer {
    std::vector<double> gamma, beta, running_mean, running_var;
};

/// Trainable batch-norm parameters only (gamma/beta); used for gradients
/// and momentum buffers, which never touch the running statistics.
struct BnParamState {
    std::vector<double> gamma, beta;
};

/// Full model state: weights, batch-norm state, and the optimizer's
/// momentum buffers. Checkpoints hold weights and BN statistics only.
struct Parameters {
    ModelSpec spec;
    std::vector<LinearLayer> fc;
    std::vector<BnLayer> bn;
    std::vector<LinearLayer> fc_momentum;
    std::vector<BnParamState> bn_momentum;
};

struct Gradients {
    std::vector<LinearLayer> fc;
    std::vector<BnParamState> bn;
};

/// He-style initialization: weights ~ N(0, sqrt(2 / fan_in)), biases zero,
/// gamma 1, beta 0, running stats (0, 1), momentum buffers zero.
inline Parameters init_parameters(const ModelSpec& spec, std::uint64_t seed) {
    validate(spec);
    DetRng rng(seed);
    Parameters p;
    p.spec = spec;

    std::vector<int> dims;
    dims.push_back(spec.input_dim);
    dims.insert(dims.end(), spec.hidden_dims.begin(), spec.hidden_dims.end());
    dims.push_back(spec.output_dim);

    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const int fan_in = dims[l];
        const int fan_out = dims[l + 1];
        LinearLayer layer;
        layer.w = Matrix(fan_out, fan_in);
        layer.b.assign(fan_out, 0.0);
        const double std_dev = std::sqrt(2.0 / fan_in);
        for (double& x : layer.w.v) x = std_dev * rng.normal();
        p.fc.push_back(layer);
        LinearLayer zero;
        zero.w = Matrix(fan_out, fan_in);
        zero.b.assign(fan_out, 0.0);
        p.fc_momentum.push_back(std::move(zero));
    }
    if (spec.use_batchnorm) {
        for (int h : spec.hidden_dims) {
            BnLayer bn;
            bn.gamma.assign(h, 1.0);
            bn.beta.assign(h, 0.0);
            bn.running_mean.assign(h, 0.0);
            bn.running_var.assign(h, 1.0);
            p.bn.push_back(std::move(bn));
            BnParamState buf;
            buf.gamma.assign(h, 0.0);
            buf.beta.assign(h, 0.0);
            p.bn_momentum.push_back(std::move(buf));
        }
    }
    return p;
}

enum class Mode { Train, Eval };

/// Per-feature batch statistics a train-mode forward normalized with.
struct BnBatchStats {
    std::vector<double> mean, var;
};

struct ForwardResult {
    Matrix logits;
    std::vector<BnBatchStats> bn_stats;  // one per BN layer, train mode only
};

namespace detail {

struct ForwardCache {
    std::vector<Matrix> inputs;   // input to each linear layer
    std::vector<Matrix> preact;   // z = x W^T + b, hidden layers only
    std::vector<Matrix> normed;   // x-hat, BN layers only
    std::vector<Matrix> bn_out;   // gamma * x-hat + beta (or z when no BN)
    std::vector<BnBatchStats> bn_stats;
    Matrix logits;
};

inline void add_bias_rows(Matrix& m, const std::vector<double>& b) {
    for (int i = 0; i < m.rows; ++i) {
        double* r = m.row(i);
        for (int j = 0; j < m.cols; ++j) r[j] += b[j];
    }
}

inline ForwardCache forward_cached(const Parameters& p, const Matrix& batch, Mode mode) {
    validate(p.spec);
    if (batch.cols != p.spec.input_dim) {
        throw ConfigError("forward: batch has " + std::to_string(batch.cols) + " features, model expects " +
                          std::to_string(p.spec.input_dim));
    }
    if (batch.rows < 1) {
        throw ConfigError("forward: empty batch");
    }
    const bool use_bn = p.spec.use_batchnorm;
    if (use_bn && mode == Mode::Train && batch.rows < 2) {
        throw NumericError("forward: train-mode batch norm needs batch size >= 2 (variance undefined)");
    }

    ForwardCache cache;
    Matrix act = batch;
    const std::size_t n_hidden = p.spec.hidden_dims.size();
    for (std::size_t l = 0; l < n_hidden; ++l) {
        cache.inputs.push_back(act);
        Matrix z = matmul_nt(act, p.fc[l].w);
        add_bias_rows(z, p.fc[l].b);
        if (!all_finite(z.v)) {
            throw NumericError("non-finite activations in layer " + std::to_string(l));
        }
        cache.preact.push_back(z);

        Matrix y;
        if (use_bn) {
            const int n = z.rows;
            const int d = z.cols;
            BnBatchStats stats;
            std::vector<double> mean(d, 0.0), var(d, 0.0);
            if (mode == Mode::Train) {
                for (int i = 0; i < n; ++i) {
                    const double* r = z.row(i);
                    for (int j = 0; j < d; ++j) mean[j] += r[j];
                }
                for (int j = 0; j < d; ++j) mean[j] /= n;
                for (int i = 0; i < n; ++i) {
                    const double* r = z.row(i);
                    for (int j = 0; j < d; ++j) {
                        const double c = r[j] - mean[j];
                        var[j] += c * c;
                    }
                }
                for (int j = 0; j < d; ++j) {
                    var[j] /= n;
                    if (var[j] <= 0.0) {
                        throw NumericError("batch variance is zero in layer " + std::to_string(l));
                    }
                }
            } else {
                mean = p.bn[l].running_mean;
                var = p.bn[l].running_var;
                for (int j = 0; j < d; ++j) {
                    if (var[j] <= 0.0) {
                        throw NumericError("running variance is not positive in layer " + std::to_string(l));
                    }
                }
            }
            Matrix normed(n, d);
            y = Matrix(n, d);
            for (int j = 0; j < d; ++j) {
                const double inv_std = 1.0 / std::sqrt(var[j]);
                const double g = p.bn[l].gamma[j];
                const double bb = p.bn[l].beta[j];
                for (int i = 0; i < n; ++i) {
                    const double xh = (z(i, j) - mean[j]) * inv_std;
                    normed(i, j) = xh;
                    y(i, j) = g * xh + bb;
                }
            }
            stats.mean = std::move(mean);
            stats.var = std::move(var);
            if (mode == Mode::Train) {
                cache.bn_stats.push_back(std::move(stats));
            }
            cache.normed.push_back(std::move(normed));
        } else {
            y = z;
        }
        cache.bn_out.push_back(y);

        // rectifier
        for (double& x : y.v) x = x > 0.0 ? x : 0.0;
        act = std::move(y);
    }

    cache.inputs.push_back(act);
    Matrix logits = matmul_nt(act, p.fc.back().w);
    add_bias_rows(logits, p.fc.back().b);
    if (!all_finite(logits.v)) {
        throw NumericError("non-finite activations in layer " + std::to_string(n_hidden));
    }
    cache.logits = std::move(logits);
    return cache;
}

} // namespace detail

/// Run the network on a batch. Train mode normalizes hidden pre-activations
/// with the batch's own statistics (biased variance) and returns them; eval
/// mode uses the stored running statistics. Running statistics are never
/// modified here; apply update_running_stats with the returned batch stats.
inline ForwardResult forward(const Parameters& p, const Matrix& batch, Mode mode) {
    detail::ForwardCache cache = detail::forward_cached(p, batch, mode);
    return {std::move(cache.logits), std::move(cache.bn_stats)};
}

inline constexpr double kBnEmaMomentum = 0.1;

/// Standard EMA update of BN running statistics from one batch's stats.
inline void update_running_stats(Parameters& p, const std::vector<BnBatchStats>& stats,
                                 double momentum = kBnEmaMomentum) {
    for (std::size_t l = 0; l < stats.size(); ++l) {
        BnLayer& bn = p.bn[l];
        for (std::size_t j = 0; j < bn.running_mean.size(); ++j) {
            bn.running_mean[j] = (1.0 - momentum) * bn.running_mean[j] + momentum * stats[l].mean[j];
            bn.running_var[j] = (1.0 - momentum) * bn.running_var[j] + momentum * stats[l].var[j];
        }
    }
}

struct LossAndGrad {
    double loss = 0.0;
    Gradients grad;
    std::vector<BnBatchStats> bn_stats;
};

/// Mean softmax cross-entropy over the batch plus gradients for every
/// trainable tensor (weights, biases, gamma, beta). Running statistics get
/// no gradient. Train-mode forward, so BN uses batch statistics.
inline LossAndGrad loss_and_grad(const Parameters& p, const Matrix& batch, const std::vector<int>& labels) {
    if (static_cast<int>(labels.size()) != batch.rows) {
        throw ConfigError("loss_and_grad: labels size does not match batch size");
    }
    for (int y : labels) {
        if (y < 0 || y >= p.spec.output_dim) {
            throw RangeError("loss_and_grad: label " + std::to_string(y) + " outside [0, " +
                             std::to_string(p.spec.output_dim) + ")");
        }
    }

    detail::ForwardCache cache = detail::forward_cached(p, batch, Mode::Train);
    const int n = batch.rows;
    const int c = p.spec.output_dim;

    // Softmax cross-entropy, logsumexp-stabilized; dlogits = (p - onehot)/n.
    Matrix dlogits(n, c);
    double loss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double* row = cache.logits.row(i);
        double max_logit = row[0];
        for (int j = 1; j < c; ++j) max_logit = std::max(max_logit, row[j]);
        double sum_exp = 0.0;
        for (int j = 0; j < c; ++j) sum_exp += std::exp(row[j] - max_logit);
        const double lse = max_logit + std::log(sum_exp);
        loss += lse - row[labels[i]];
        for (int j = 0; j < c; ++j) {
            dlogits(i, j) = (std::exp(row[j] - lse) - (j == labels[i] ? 1.0 : 0.0)) / n;
        }
    }
    loss /= n;
    if (!std::isfinite(loss)) {
        throw NumericError("non-finite loss");
    }

    LossAndGrad out;
    out.loss = loss;
    out.bn_stats = cache.bn_stats;
    const std::size_t n_hidden = p.spec.hidden_dims.size();
    out.grad.fc.resize(p.fc.size());
    if (p.spec.use_batchnorm) out.grad.bn.resize(n_hidden);

    // Output layer.
    out.grad.fc.back().w = detail::matmul_tn(dlogits, cache.inputs.back());
    out.grad.fc.back().b.assign(c, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < c; ++j) out.grad.fc.back().b[j] += dlogits(i, j);
    }
    Matrix dact = detail::matmul_nn(dlogits, p.fc.back().w);

    // Hidden layers, in reverse.
    for (std::size_t li = n_hidden; li-- > 0;) {
        const Matrix& y = cache.bn_out[li];
        Matrix dy = std::move(dact);
        for (std::size_t k = 0; k < dy.v.size(); ++k) {
            if (y.v[k] <= 0.0) dy.v[k] = 0.0;
        }

        Matrix dz;
        if (p.spec.use_batchnorm) {
            const Matrix& xh = cache.normed[li];
            const BnBatchStats& stats = cache.bn_stats[li];
            const int d = dy.cols;
            BnParamState& bng = out.grad.bn[li];
            bng.gamma.assign(d, 0.0);
            bng.beta.assign(d, 0.0);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < d; ++j) {
                    bng.gamma[j] += dy(i, j) * xh(i, j);
                    bng.beta[j] += dy(i, j);
                }
            }
            // Fused batch-norm backward for biased variance:
            // dz = inv_std * (dxh - mean(dxh) - xh * mean(dxh * xh))
            dz = Matrix(n, d);
            for (int j = 0; j < d; ++j) {
                const double g = p.bn[li].gamma[j];
                const double inv_std = 1.0 / std::sqrt(stats.var[j]);
                double sum_dxh = 0.0, sum_dxh_xh = 0.0;
                for (int i = 0; i < n; ++i) {
                    const double dxh = dy(i, j) * g;
                    sum_dxh += dxh;
                    sum_dxh_xh += dxh * xh(i, j);
                }
                const double mean_dxh = sum_dxh / n;
                const double mean_dxh_xh = sum_dxh_xh / n;
                for (int i = 0; i < n; ++i) {
                    const double dxh = dy(i, j) * g;
                    dz(i, j) = inv_std * (dxh - mean_dxh - xh(i, j) * mean_dxh_xh);
                }
            }
        } else {
            dz = std::move(dy);
        }

        out.grad.fc[li].w = detail::matmul_tn(dz, cache.inputs[li]);
        out.grad.fc[li].b.assign(dz.cols, 0.0);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < dz.cols; ++j) out.grad.fc[li].b[j] += dz(i, j);
        }
        dact = detail::matmul_nn(dz, p.fc[li].w);
    }
    return out;
}

/// SGD with momentum and decoupled-from-schedule weight decay folded into
/// the gradient: buf = momentum*buf + g + wd*p; p -= lr*buf. Running
/// statistics are untouched.
inline void sgd_step(Parameters& p, const Gradients& g, double lr, double momentum, double weight_decay) {
    if (lr <= 0.0) {
        throw RangeError("sgd_step: lr must be positive");
    }
    for (std::size_t l = 0; l < p.fc.size(); ++l) {
        auto step = [&](std::vector<double>& param, const std::vector<double>& grad, std::vector<double>& buf) {
            for (std::size_t i = 0; i < param.size(); ++i) {
                buf[i] = momentum * buf[i] + grad[i] + weight_decay * param[i];
                param[i] -= lr * buf[i];
            }
        };
        step(p.fc[l].w.v, g.fc[l].w.v, p.fc_momentum[l].w.v);
        step(p.fc[l].b, g.fc[l].b, p.fc_momentum[l].b);
        if (p.spec.use_batchnorm && l < p.bn.size()) {
            step(p.bn[l].gamma, g.bn[l].gamma, p.bn_momentum[l].gamma);
            step(p.bn[l].beta, g.bn[l].beta, p.bn_momentum[l].beta);
        }
    }
}

struct EvalResult {
    double loss = 0.0;
    double accuracy = 0.0;
};

/// Eval-mode forward over the full dataset in its stored order. Accuracy is
/// the argmax-match fraction with ties broken toward the lower class index.
inline EvalResult evaluate(const Parameters& p, const Dataset& data) {
    if (data.size() == 0) {
        throw ConfigError("evaluate: dataset is empty");
    }
    Matrix batch(data.size(), data.dim);
    std::copy(data.x.begin(), data.x.end(), batch.v.begin());
    const ForwardResult fwd = forward(p, batch, Mode::Eval);

    const int n = data.size();
    const int c = p.spec.output_dim;
    double loss = 0.0;
    int correct = 0;
    for (int i = 0; i < n; ++i) {
        const double* row = fwd.logits.row(i);
        double max_logit = row[0];
        int argmax = 0;
        for (int j = 1; j < c; ++j) {
            if (row[j] > max_logit) {
                max_logit = row[j];
                argmax = j;
            }
        }
        double sum_exp = 0.0;
        for (int j = 0; j < c; ++j) sum_exp += std::exp(row[j] - max_logit);
        loss += max_logit + std::log(sum_exp) - row[data.y[i]];
        if (argmax == data.y[i]) ++correct;
    }
    return {loss / n, static_cast<double>(correct) / n};
}

/// Replace every BN layer's running statistics with the exact mean and
/// biased variance of that layer's pre-activation inputs over one full
/// deterministic pass (sum and sum-of-squares in 64-bit, no EMA). Layers
/// are processed front to back, each seeing the outputs produced with the
/// statistics already recomputed for earlier layers, so a repeat pass is a
/// no-op.
inline void recompute_bn_statistics(Parameters& p, const Dataset& data) {
    validate(p.spec);
    if (!p.spec.use_batchnorm) {
        throw ConfigError("recompute_bn_statistics: model has no batch norm layers");
    }
    if (data.size() < 2) {
        throw ConfigError("recompute_bn_statistics: need at least 2 samples");
    }

    const int n = data.size();
    Matrix act(n, data.dim);
    std::copy(data.x.begin(), data.x.end(), act.v.begin());

    for (std::size_t l = 0; l < p.spec.hidden_dims.size(); ++l) {
        Matrix z = detail::matmul_nt(act, p.fc[l].w);
        detail::add_bias_rows(z, p.fc[l].b);

        const int d = z.cols;
        std::vector<double> sum(d, 0.0), sum_sq(d, 0.0);
        for (int i = 0; i < n; ++i) {
            const double* r = z.row(i);
            for (int j = 0; j < d; ++j) {
                sum[j] += r[j];
                sum_sq[j] += r[j] * r[j];
            }
        }
        BnLayer& bn = p.bn[l];
        for (int j = 0; j < d; ++j) {
            const double mean = sum[j] / n;
            bn.running_mean[j] = mean;
            bn.running_var[j] = std::max(0.0, sum_sq[j] / n - mean * mean);
        }

        // Feed the next layer what an eval-mode forward would now produce.
        for (int j = 0; j < d; ++j) {
            const double inv_std = 1.0 / std::sqrt(bn.running_var[j]);
            const double g = bn.gamma[j];
            const double bb = bn.beta[j];
            for (int i = 0; i < n; ++i) {
                const double y = g * (z(i, j) - bn.running_mean[j]) * inv_std + bb;
                z(i, j) = y > 0.0 ? y : 0.0;
            }
        }
        act = std::move(z);
    }
}

/// Export weights and BN statistics (not momentum buffers) as a checkpoint.
inline Checkpoint to_checkpoint(const Parameters& p) {
    Checkpoint ckpt;
    for (std::size_t l = 0; l < p.fc.size(); ++l) {
        const std::string prefix = "fc" + std::to_string(l);
        ckpt.add(NamedTensor(prefix + ".weight", {p.fc[l].w.rows, p.fc[l].w.cols}, p.fc[l].w.v));
        ckpt.add(NamedTensor(prefix + ".bias", {static_cast<std::int64_t>(p.fc[l].b.size())}, p.fc[l].b));
    }
    for (std::size_t l = 0; l < p.bn.size(); ++l) {
        const std::string prefix = "bn" + std::to_string(l);
        const auto len = static_cast<std::int64_t>(p.bn[l].gamma.size());
        ckpt.add(NamedTensor(prefix + ".gamma", {len}, p.bn[l].gamma));
        ckpt.add(NamedTensor(prefix + ".beta", {len}, p.bn[l].beta));
        ckpt.add(NamedTensor(prefix + ".running_mean", {len}, p.bn[l].running_mean));
        ckpt.add(NamedTensor(prefix + ".running_var", {len}, p.bn[l].running_var));
    }
    return ckpt;
}

/// Rebuild parameters from a checkpoint produced by to_checkpoint (momentum
/// buffers start at zero). Tensor set and shapes must match the spec
/// exactly; values are widened to F64 if stored as F32.
inline Parameters params_from_checkpoint(const ModelSpec& spec, const Checkpoint& ckpt) {
    Parameters p = init_parameters(spec, 0);
    const Checkpoint expected = to_checkpoint(p);

    std::vector<std::string> issues;
    for (const auto& [name, want] : expected.tensors) {
        const NamedTensor* got = ckpt.find(name);
        if (!got) {
            issues.push_back("missing tensor '" + name + "'");
        } else if (got->shape() != want.shape()) {
            issues.push_back("shape mismatch for '" + name + "'");
        }
    }
    for (const auto& [name, t] : ckpt.tensors) {
        if (!expected.find(name)) issues.push_back("unexpected tensor '" + name + "'");
    }
    if (!issues.empty()) {
        std::string msg = "params_from_checkpoint: checkpoint does not match model spec:";
        for (const auto& issue : issues) msg += " " + issue + ";";
        throw IncompatibleError(msg);
    }

    auto load = [&](const std::string& name, std::vector<double>& dst) {
        const NamedTensor& t = *ckpt.find(name);
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = t.at(i);
    };
    for (std::size_t l = 0; l < p.fc.size(); ++l) {
        const std::string prefix = "fc" + std::to_string(l);
        load(prefix + ".weight", p.fc[l].w.v);
        load(prefix + ".bias", p.fc[l].b);
        std::fill(p.fc_momentum[l].w.v.begin(), p.fc_momentum[l].w.v.end(), 0.0);
        std::fill(p.fc_momentum[l].b.begin(), p.fc_momentum[l].b.end(), 0.0);
    }
    for (std::size_t l = 0; l < p.bn.size(); ++l) {
        const std::string prefix = "bn" + std::to_string(l);
        load(prefix + ".gamma", p.bn[l].gamma);
        load(prefix + ".beta", p.bn[l].beta);
        load(prefix + ".running_mean", p.bn[l].running_mean);
        load(prefix + ".running_var", p.bn[l].running_var);
    }
    return p;
}

} // namespace swa
