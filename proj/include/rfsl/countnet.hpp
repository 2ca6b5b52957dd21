#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "rfsl/error.hpp"
#include "rfsl/matrix.hpp"
#include "rfsl/network.hpp"
#include "rfsl/parallel.hpp"
#include "rfsl/rng.hpp"

namespace rfsl {

// Message-passing + sort-pooling readout architecture. The final 1-unit
// iteration provides the node ordering key; the convolution stage sees the
// concatenated embeddings of the earlier iterations (96 channels for the
// default widths), unless include_sort_channel adds the key as a channel.
struct GcnArchitecture {
    std::vector<int> widths{32, 32, 32, 1}; // per-iteration widths, last is the sort key
    int conv1_filters = 16;
    int conv2_filters = 32;
    int conv2_kernel = 5;
    int pool_width = 2;
    int pool_stride = 2;
    int dense1_units = 128;
    double clamp_lo = 0.0;
    double clamp_hi = 20.0;
    bool include_sort_channel = false;

    int iterations() const { return static_cast<int>(widths.size()); }

    // number of embedding layers concatenated into the conv input
    int concat_layers() const { return iterations() >= 2 ? iterations() - 1 : 1; }

    int concat_channels() const {
        int c = 0;
        for (int k = 0; k < concat_layers(); ++k) c += widths[k];
        if (include_sort_channel) c += widths.back();
        return c;
    }

    static GcnArchitecture with_iterations(int k) {
        if (k < 1 || k > 8) fail("invalid-config", "iterations must lie in [1, 8]");
        GcnArchitecture arch;
        if (k == 1) {
            arch.widths = {1};
        } else {
            arch.widths.assign(k, 32);
            arch.widths.back() = 1;
        }
        return arch;
    }
};

struct ModelParams {
    GcnArchitecture arch;
    int n_nodes = 0;
    int feature_width = 0;

    std::vector<Matrix> gcn_w;              // [k]: prev_width x widths[k]
    std::vector<std::vector<double>> gcn_b; // [k]: widths[k]
    Matrix conv1_w;                         // conv1_filters x concat_channels
    std::vector<double> conv1_b;
    Matrix conv2_w; // conv2_filters x (conv2_kernel * conv1_filters)
    std::vector<double> conv2_b;
    Matrix dense1_w; // dense1_units x flattened conv2 output
    std::vector<double> dense1_b;
    std::vector<double> dense2_w; // dense1_units
    double dense2_b = 0.0;

    std::vector<double> norm_mean; // per feature column
    std::vector<double> norm_std;  // population std; constant columns use 1
};

struct LabeledGraphSample {
    Matrix features; // n_nodes x feature_width
    int label = 0;
};

namespace detail {

inline int pooled_length(const GcnArchitecture& a, int n_nodes) {
    if (n_nodes < a.pool_width) return 0;
    return (n_nodes - a.pool_width) / a.pool_stride + 1;
}

inline int conv2_length(const GcnArchitecture& a, int n_nodes) {
    return pooled_length(a, n_nodes) - a.conv2_kernel + 1;
}

inline void check_node_count(const GcnArchitecture& a, int n_nodes) {
    if (n_nodes < 2) fail("too-few-nodes", "readout pooling needs at least 2 nodes");
    if (conv2_length(a, n_nodes) < 1)
        fail("too-few-nodes",
             "conv stage needs at least " +
                 std::to_string((a.conv2_kernel - 1) * a.pool_stride + a.pool_width) + " nodes");
}

} // namespace detail

// Row-normalized D + I; the mean-aggregation operator of the message pass.
inline Matrix normalized_adjacency(const NetworkGraph& graph) {
    const int n = graph.node_count();
    Matrix dn(n, n);
    for (int u = 0; u < n; ++u) {
        const double deg = 1.0 + static_cast<double>(graph.neighbors[u].size());
        dn(u, u) = 1.0 / deg;
        for (int v : graph.neighbors[u]) dn(u, v) = 1.0 / deg;
    }
    return dn;
}

inline ModelParams init_params(const GcnArchitecture& arch, int n_nodes, int feature_width,
                               std::uint64_t seed) {
    if (arch.widths.empty() || arch.widths.back() != 1)
        fail("invalid-config", "final iteration width must be 1 (sort key)");
    detail::check_node_count(arch, n_nodes);

    ModelParams p;
    p.arch = arch;
    p.n_nodes = n_nodes;
    p.feature_width = feature_width;

    int tensor_id = 0;
    auto glorot = [&](Matrix& m, int fan_in, int fan_out) {
        Rng rng(derive_seed(seed, tensor_id++));
        const double s = std::sqrt(6.0 / (fan_in + fan_out));
        for (double& v : m.data()) v = rng.uniform(-s, s);
    };

    int prev = feature_width;
    for (int k = 0; k < arch.iterations(); ++k) {
        Matrix w(prev, arch.widths[k]);
        glorot(w, prev, arch.widths[k]);
        p.gcn_w.push_back(std::move(w));
        p.gcn_b.emplace_back(arch.widths[k], 0.0);
        prev = arch.widths[k];
    }

    const int cc = arch.concat_channels();
    p.conv1_w = Matrix(arch.conv1_filters, cc);
    glorot(p.conv1_w, cc, arch.conv1_filters);
    p.conv1_b.assign(arch.conv1_filters, 0.0);

    p.conv2_w = Matrix(arch.conv2_filters, arch.conv2_kernel * arch.conv1_filters);
    glorot(p.conv2_w, arch.conv2_kernel * arch.conv1_filters, arch.conv2_filters);
    p.conv2_b.assign(arch.conv2_filters, 0.0);

    const int flat = detail::conv2_length(arch, n_nodes) * arch.conv2_filters;
    p.dense1_w = Matrix(arch.dense1_units, flat);
    glorot(p.dense1_w, flat, arch.dense1_units);
    p.dense1_b.assign(arch.dense1_units, 0.0);

    Matrix d2(1, arch.dense1_units);
    glorot(d2, arch.dense1_units, 1);
    p.dense2_w.assign(d2.data().begin(), d2.data().end());
    p.dense2_b = 0.0;

    p.norm_mean.assign(feature_width, 0.0);
    p.norm_std.assign(feature_width, 1.0);
    return p;
}

// Mutable flat views over every trainable tensor, in a fixed order shared
// by the optimizer and the finite-difference checks.
inline std::vector<std::pair<double*, std::size_t>> tensor_views(ModelParams& p) {
    std::vector<std::pair<double*, std::size_t>> v;
    for (auto& w : p.gcn_w) v.emplace_back(w.data().data(), w.data().size());
    for (auto& b : p.gcn_b) v.emplace_back(b.data(), b.size());
    v.emplace_back(p.conv1_w.data().data(), p.conv1_w.data().size());
    v.emplace_back(p.conv1_b.data(), p.conv1_b.size());
    v.emplace_back(p.conv2_w.data().data(), p.conv2_w.data().size());
    v.emplace_back(p.conv2_b.data(), p.conv2_b.size());
    v.emplace_back(p.dense1_w.data().data(), p.dense1_w.data().size());
    v.emplace_back(p.dense1_b.data(), p.dense1_b.size());
    v.emplace_back(p.dense2_w.data(), p.dense2_w.size());
    v.emplace_back(&p.dense2_b, 1);
    return v;
}

inline ModelParams zeros_like(const ModelParams& p) {
    ModelParams z = p;
    for (auto& [ptr, n] : tensor_views(z))
        for (std::size_t i = 0; i < n; ++i) ptr[i] = 0.0;
    return z;
}

inline std::size_t parameter_count(ModelParams& p) {
    std::size_t n = 0;
    for (auto& [ptr, len] : tensor_views(p)) n += len;
    return n;
}

// Per-iteration node embeddings Z_1 .. Z_K for one sample. Z_0 is the
// column-normalized feature matrix.
inline std::vector<Matrix> message_passing_forward(const ModelParams& p, const Matrix& norm_adj,
                                                   const Matrix& features) {
    if (features.rows() != norm_adj.rows() || features.cols() != p.feature_width)
        fail("shape-mismatch", "feature matrix does not match model shapes");
    Matrix z(features.rows(), features.cols());
    for (int i = 0; i < features.rows(); ++i)
        for (int j = 0; j < features.cols(); ++j)
            z(i, j) = (features(i, j) - p.norm_mean[j]) / p.norm_std[j];

    std::vector<Matrix> embeddings;
    embeddings.reserve(p.arch.iterations());
    for (int k = 0; k < p.arch.iterations(); ++k) {
        const Matrix mixed = matmul(norm_adj, z);
        Matrix act = matmul(mixed, p.gcn_w[k]);
        for (int i = 0; i < act.rows(); ++i)
            for (int j = 0; j < act.cols(); ++j) act(i, j) = std::tanh(act(i, j) + p.gcn_b[k][j]);
        embeddings.push_back(std::move(act));
        z = embeddings.back();
    }
    return embeddings;
}

namespace detail {

struct ForwardCache {
    Matrix normalized;              // Z_0
    std::vector<Matrix> mixed;      // Dn * Z_{k-1}
    std::vector<Matrix> z;          // Z_k (post-tanh)
    std::vector<int> order;         // node indices, sort-key descending
    Matrix sorted;                  // concatenated embeddings in sorted order
    Matrix conv1_out;               // positions x filters (post-tanh)
    Matrix pooled;                  // pooled positions x filters
    std::vector<int> pool_argmax;   // source position per pooled cell
    Matrix conv2_out;               // positions x filters (post-tanh)
    std::vector<double> flat;       // conv2 output, row-major
    std::vector<double> dense1_out; // post-tanh
    double out = 0.0;
};

inline std::vector<int> sort_order(const Matrix& key_col) {
    std::vector<int> order(key_col.rows());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double ka = key_col(a, 0), kb = key_col(b, 0);
        if (ka != kb) return ka > kb;
        return a < b;
    });
    return order;
}

// Readout stages on top of cached embeddings (c.z must be filled).
inline void readout(const ModelParams& p, ForwardCache& c) {
    const GcnArchitecture& a = p.arch;
    const int n = c.z.front().rows();
    check_node_count(a, n);
    const int flat_expected = conv2_length(a, n) * a.conv2_filters;
    if (flat_expected != p.dense1_w.cols())
        fail("shape-mismatch", "model was built for a different node count");

    c.order = sort_order(c.z.back());

    const int cc = a.concat_channels();
    c.sorted = Matrix(n, cc);
    for (int pos = 0; pos < n; ++pos) {
        const int node = c.order[pos];
        int col = 0;
        for (int k = 0; k < a.concat_layers(); ++k)
            for (int j = 0; j < a.widths[k]; ++j) c.sorted(pos, col++) = c.z[k](node, j);
        if (a.include_sort_channel) c.sorted(pos, col++) = c.z.back()(node, 0);
    }

    // conv stage 1: kernel == stride == channel count, one output per node
    c.conv1_out = Matrix(n, a.conv1_filters);
    for (int pos = 0; pos < n; ++pos) {
        const double* row = c.sorted.row(pos);
        for (int f = 0; f < a.conv1_filters; ++f) {
            const double* w = p.conv1_w.row(f);
            double acc = p.conv1_b[f];
            for (int ch = 0; ch < cc; ++ch) acc += w[ch] * row[ch];
            c.conv1_out(pos, f) = std::tanh(acc);
        }
    }

    const int q = pooled_length(a, n);
    c.pooled = Matrix(q, a.conv1_filters);
    c.pool_argmax.assign(static_cast<std::size_t>(q) * a.conv1_filters, 0);
    for (int i = 0; i < q; ++i) {
        const int base = i * a.pool_stride;
        for (int f = 0; f < a.conv1_filters; ++f) {
            int best = base;
            double bv = c.conv1_out(base, f);
            for (int w = 1; w < a.pool_width; ++w) {
                const double v = c.conv1_out(base + w, f);
                if (v > bv) {
                    bv = v;
                    best = base + w;
                }
            }
            c.pooled(i, f) = bv;
            c.pool_argmax[static_cast<std::size_t>(i) * a.conv1_filters + f] = best;
        }
    }

    const int r_len = conv2_length(a, n);
    c.conv2_out = Matrix(r_len, a.conv2_filters);
    for (int r = 0; r < r_len; ++r) {
        for (int g = 0; g < a.conv2_filters; ++g) {
            const double* w = p.conv2_w.row(g);
            double acc = p.conv2_b[g];
            for (int dr = 0; dr < a.conv2_kernel; ++dr) {
                const double* prow = c.pooled.row(r + dr);
                const double* wk = w + dr * a.conv1_filters;
                for (int f = 0; f < a.conv1_filters; ++f) acc += wk[f] * prow[f];
            }
            c.conv2_out(r, g) = std::tanh(acc);
        }
    }

    c.flat.assign(c.conv2_out.data().begin(), c.conv2_out.data().end());

    c.dense1_out.assign(a.dense1_units, 0.0);
    for (int i = 0; i < a.dense1_units; ++i) {
        const double* w = p.dense1_w.row(i);
        double acc = p.dense1_b[i];
        for (std::size_t j = 0; j < c.flat.size(); ++j) acc += w[j] * c.flat[j];
        c.dense1_out[i] = std::tanh(acc);
    }

    double out = p.dense2_b;
    for (int i = 0; i < a.dense1_units; ++i) out += p.dense2_w[i] * c.dense1_out[i];
    c.out = out;
}

inline void forward(const ModelParams& p, const Matrix& norm_adj, const Matrix& features,
                    ForwardCache& c) {
    const int n = norm_adj.rows();
    if (features.rows() != n || features.cols() != p.feature_width)
        fail("shape-mismatch", "feature matrix does not match model shapes");

    c.normalized = Matrix(n, p.feature_width);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p.feature_width; ++j)
            c.normalized(i, j) = (features(i, j) - p.norm_mean[j]) / p.norm_std[j];

    c.mixed.clear();
    c.z.clear();
    const Matrix* prev = &c.normalized;
    for (int k = 0; k < p.arch.iterations(); ++k) {
        c.mixed.push_back(matmul(norm_adj, *prev));
        Matrix act = matmul(c.mixed.back(), p.gcn_w[k]);
        for (int i = 0; i < act.rows(); ++i)
            for (int j = 0; j < act.cols(); ++j)
                act(i, j) = std::tanh(act(i, j) + p.gcn_b[k][j]);
        c.z.push_back(std::move(act));
        prev = &c.z.back();
    }

    readout(p, c);
}

// Accumulates d(loss)/d(params) into grad, given d(loss)/d(out).
inline void backward(const ModelParams& p, const Matrix& norm_adj, const ForwardCache& c,
                     double dout, ModelParams& grad) {
    const GcnArchitecture& a = p.arch;
    const int n = norm_adj.rows();
    const int cc = a.concat_channels();

    // dense head
    std::vector<double> dh(a.dense1_units);
    grad.dense2_b += dout;
    for (int i = 0; i < a.dense1_units; ++i) {
        grad.dense2_w[i] += dout * c.dense1_out[i];
        dh[i] = dout * p.dense2_w[i];
    }

    std::vector<double> dflat(c.flat.size(), 0.0);
    for (int i = 0; i < a.dense1_units; ++i) {
        const double dpre = dh[i] * (1.0 - c.dense1_out[i] * c.dense1_out[i]);
        grad.dense1_b[i] += dpre;
        double* gw = grad.dense1_w.row(i);
        const double* w = p.dense1_w.row(i);
        for (std::size_t j = 0; j < c.flat.size(); ++j) {
            gw[j] += dpre * c.flat[j];
            dflat[j] += dpre * w[j];
        }
    }

    // conv stage 2
    const int r_len = c.conv2_out.rows();
    Matrix dpooled(c.pooled.rows(), c.pooled.cols());
    for (int r = 0; r < r_len; ++r) {
        for (int g = 0; g < a.conv2_filters; ++g) {
            const double o = c.conv2_out(r, g);
            const double dpre =
                dflat[static_cast<std::size_t>(r) * a.conv2_filters + g] * (1.0 - o * o);
            grad.conv2_b[g] += dpre;
            double* gw = grad.conv2_w.row(g);
            const double* w = p.conv2_w.row(g);
            for (int dr = 0; dr < a.conv2_kernel; ++dr) {
                const double* prow = c.pooled.row(r + dr);
                double* dprow = dpooled.row(r + dr);
                double* gwk = gw + dr * a.conv1_filters;
                const double* wk = w + dr * a.conv1_filters;
                for (int f = 0; f < a.conv1_filters; ++f) {
                    gwk[f] += dpre * prow[f];
                    dprow[f] += dpre * wk[f];
                }
            }
        }
    }

    // unpool through the argmax
    Matrix dconv1(n, a.conv1_filters);
    for (int i = 0; i < c.pooled.rows(); ++i)
        for (int f = 0; f < a.conv1_filters; ++f)
            dconv1(c.pool_argmax[static_cast<std::size_t>(i) * a.conv1_filters + f], f) +=
                dpooled(i, f);

    // conv stage 1
    Matrix dsorted(n, cc);
    for (int pos = 0; pos < n; ++pos) {
        const double* srow = c.sorted.row(pos);
        double* dsrow = dsorted.row(pos);
        for (int f = 0; f < a.conv1_filters; ++f) {
            const double o = c.conv1_out(pos, f);
            const double dpre = dconv1(pos, f) * (1.0 - o * o);
            if (dpre == 0.0) continue;
            grad.conv1_b[f] += dpre;
            double* gw = grad.conv1_w.row(f);
            const double* w = p.conv1_w.row(f);
            for (int ch = 0; ch < cc; ++ch) {
                gw[ch] += dpre * srow[ch];
                dsrow[ch] += dpre * w[ch];
            }
        }
    }

    // un-sort into per-iteration embedding gradients; the ordering itself is
    // piecewise constant, so the sort key receives gradient only when it is
    // included as a channel
    std::vector<Matrix> dz;
    dz.reserve(a.iterations());
    for (int k = 0; k < a.iterations(); ++k) dz.emplace_back(n, a.widths[k]);
    for (int pos = 0; pos < n; ++pos) {
        const int node = c.order[pos];
        int col = 0;
        for (int k = 0; k < a.concat_layers(); ++k)
            for (int j = 0; j < a.widths[k]; ++j) dz[k](node, j) += dsorted(pos, col++);
        if (a.include_sort_channel) dz.back()(node, 0) += dsorted(pos, col++);
    }

    // message-passing chain
    for (int k = a.iterations() - 1; k >= 0; --k) {
        Matrix dact = std::move(dz[k]);
        for (int i = 0; i < dact.rows(); ++i)
            for (int j = 0; j < dact.cols(); ++j) {
                const double z = c.z[k](i, j);
                dact(i, j) *= (1.0 - z * z);
            }
        const Matrix gw = matmul_at_b(c.mixed[k], dact);
        for (std::size_t i = 0; i < gw.data().size(); ++i)
            grad.gcn_w[k].data()[i] += gw.data()[i];
        for (int j = 0; j < dact.cols(); ++j) {
            double s = 0.0;
            for (int i = 0; i < dact.rows(); ++i) s += dact(i, j);
            grad.gcn_b[k][j] += s;
        }
        if (k > 0) {
            const Matrix dmixed = matmul_a_bt(dact, p.gcn_w[k]);
            const Matrix up = matmul_at_b(norm_adj, dmixed);
            for (std::size_t i = 0; i < up.data().size(); ++i) dz[k - 1].data()[i] += up.data()[i];
        }
    }
}

} // namespace detail

// Count estimate from precomputed embeddings (the sort-pool/conv/dense
// stages only); raw, unclamped.
inline double readout_forward(const ModelParams& p, const std::vector<Matrix>& embeddings) {
    if (embeddings.size() != static_cast<std::size_t>(p.arch.iterations()))
        fail("shape-mismatch", "embedding count does not match the architecture");
    detail::ForwardCache c;
    c.z = embeddings;
    detail::readout(p, c);
    return c.out;
}

inline double estimate(const ModelParams& p, const Matrix& norm_adj, const Matrix& features) {
    detail::ForwardCache c;
    detail::forward(p, norm_adj, features, c);
    return c.out;
}

// Discretized prediction: clamp to the counting range, round half up.
inline int predict_count(const ModelParams& p, const Matrix& norm_adj, const Matrix& features) {
    const double clamped = std::clamp(estimate(p, norm_adj, features), p.arch.clamp_lo, p.arch.clamp_hi);
    return static_cast<int>(std::floor(clamped + 0.5));
}

// Mean squared error over the batch plus gradients for every tensor.
// Per-sample passes may run in parallel; the reduction is always in sample
// order, so the result is independent of the thread count.
inline double loss_and_gradients(const ModelParams& p, const Matrix& norm_adj,
                                 const std::vector<const LabeledGraphSample*>& batch,
                                 ModelParams& grads, int jobs = 1) {
    if (batch.empty()) fail("invalid-config", "empty batch");
    const int b = static_cast<int>(batch.size());

    std::vector<ModelParams> slot_grads(b, zeros_like(p));
    std::vector<double> sq_err(b);
    parallel_for(b, jobs, [&](int i) {
        detail::ForwardCache c;
        detail::forward(p, norm_adj, batch[i]->features, c);
        const double residual = c.out - static_cast<double>(batch[i]->label);
        sq_err[i] = residual * residual;
        detail::backward(p, norm_adj, c, 2.0 * residual / b, slot_grads[i]);
    });

    grads = zeros_like(p);
    auto gv = tensor_views(grads);
    double loss = 0.0;
    for (int i = 0; i < b; ++i) {
        loss += sq_err[i];
        auto sv = tensor_views(slot_grads[i]);
        for (std::size_t t = 0; t < gv.size(); ++t)
            for (std::size_t j = 0; j < gv[t].second; ++j) gv[t].first[j] += sv[t].first[j];
    }
    loss /= b;
    if (!std::isfinite(loss)) fail("divergence", "non-finite loss");
    return loss;
}

struct TrainConfig {
    double learning_rate = 1e-3;
    int batch_size = 32;
    int max_epochs = 200;
    int early_stop_patience = 10;
    std::uint64_t rng_seed = 1;
    double val_fraction = 0.15;
    int jobs = 1;
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

// Column-wise normalization stats over all nodes of the given samples.
inline void compute_normalization(const std::vector<const LabeledGraphSample*>& samples,
                                  std::vector<double>& mean, std::vector<double>& stdev) {
    if (samples.empty()) fail("invalid-config", "no samples for normalization");
    const int cols = samples.front()->features.cols();
    mean.assign(cols, 0.0);
    stdev.assign(cols, 0.0);
    std::size_t rows = 0;
    for (const auto* s : samples) rows += s->features.rows();
    for (int j = 0; j < cols; ++j) {
        double m = 0.0;
        for (const auto* s : samples)
            for (int i = 0; i < s->features.rows(); ++i) m += s->features(i, j);
        m /= static_cast<double>(rows);
        double var = 0.0;
        for (const auto* s : samples)
            for (int i = 0; i < s->features.rows(); ++i) {
                const double d = s->features(i, j) - m;
                var += d * d;
            }
        var /= static_cast<double>(rows);
        const double sd = std::sqrt(var);
        mean[j] = m;
        stdev[j] = sd < 1e-12 ? 1.0 : sd;
    }
}

namespace detail {

struct AdamState {
    std::vector<std::vector<double>> m, v;
    long step = 0;

    explicit AdamState(ModelParams& p) {
        for (auto& [ptr, n] : tensor_views(p)) {
            m.emplace_back(n, 0.0);
            v.emplace_back(n, 0.0);
        }
    }

    void update(ModelParams& p, ModelParams& g, double lr) {
        constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        ++step;
        auto pv = tensor_views(p);
        auto gv = tensor_views(g);
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
        for (std::size_t t = 0; t < pv.size(); ++t) {
            double* w = pv[t].first;
            const double* gr = gv[t].first;
            for (std::size_t j = 0; j < pv[t].second; ++j) {
                m[t][j] = b1 * m[t][j] + (1.0 - b1) * gr[j];
                v[t][j] = b2 * v[t][j] + (1.0 - b2) * gr[j] * gr[j];
                w[j] -= lr * (m[t][j] / c1) / (std::sqrt(v[t][j] / c2) + eps);
            }
        }
    }
};

inline double mean_squared_error(const ModelParams& p, const Matrix& norm_adj,
                                 const std::vector<const LabeledGraphSample*>& samples, int jobs) {
    if (samples.empty()) return 0.0;
    std::vector<double> errs(samples.size());
    parallel_for(static_cast<int>(samples.size()), jobs, [&](int i) {
        const double r = estimate(p, norm_adj, samples[i]->features) - samples[i]->label;
        errs[i] = r * r;
    });
    double acc = 0.0;
    for (double e : errs) acc += e;
    return acc / static_cast<double>(samples.size());
}

inline void seeded_shuffle(std::vector<int>& idx, Rng& rng) {
    for (std::size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[rng.uniform_index(i)]);
}

} // namespace detail

struct TrainResult {
    ModelParams params;
    std::vector<EpochStats> history;
};

// Mini-batch Adam on the squared-error loss with validation-based early
// stopping; fully reproducible from cfg.rng_seed.
inline TrainResult train(const std::vector<LabeledGraphSample>& dataset, const Matrix& norm_adj,
                         const GcnArchitecture& arch, const TrainConfig& cfg) {
    if (dataset.empty()) fail("invalid-config", "empty training dataset");
    if (cfg.learning_rate <= 0.0 || cfg.batch_size < 1)
        fail("invalid-config", "learning_rate must be positive and batch_size >= 1");

    std::vector<int> idx(dataset.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng split_rng(derive_seed(cfg.rng_seed, 0x5117));
    detail::seeded_shuffle(idx, split_rng);

    const int val_n = std::min(static_cast<int>(dataset.size()) - 1,
                               static_cast<int>(std::lround(cfg.val_fraction * dataset.size())));
    std::vector<const LabeledGraphSample*> val, tr;
    for (std::size_t i = 0; i < idx.size(); ++i)
        (static_cast<int>(i) < val_n ? val : tr).push_back(&dataset[idx[i]]);

    ModelParams params = init_params(arch, norm_adj.rows(), dataset.front().features.cols(),
                                     derive_seed(cfg.rng_seed, 0x1417));
    compute_normalization(tr, params.norm_mean, params.norm_std);

    detail::AdamState adam(params);
    ModelParams grads = zeros_like(params);
    TrainResult result;
    ModelParams best = params;
    double best_val = std::numeric_limits<double>::infinity();
    int since_best = 0;

    std::vector<int> order(tr.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        Rng erng(derive_seed(cfg.rng_seed, 0xE000 + static_cast<std::uint64_t>(epoch)));
        detail::seeded_shuffle(order, erng);

        double epoch_loss = 0.0;
        int batches = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            std::vector<const LabeledGraphSample*> batch;
            const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            for (std::size_t i = start; i < stop; ++i) batch.push_back(tr[order[i]]);
            epoch_loss += loss_and_gradients(params, norm_adj, batch, grads, cfg.jobs);
            adam.update(params, grads, cfg.learning_rate);
            ++batches;
        }
        epoch_loss /= std::max(1, batches);

        const double val_loss =
            val.empty() ? epoch_loss : detail::mean_squared_error(params, norm_adj, val, cfg.jobs);
        result.history.push_back({epoch, epoch_loss, val_loss});
        if (!std::isfinite(epoch_loss) || !std::isfinite(val_loss))
            fail("divergence", "non-finite loss at epoch " + std::to_string(epoch));

        if (val_loss < best_val) {
            best_val = val_loss;
            best = params;
            since_best = 0;
        } else if (++since_best > cfg.early_stop_patience) {
            break;
        }
    }

    result.params = std::move(best);
    return result;
}

struct EvalReport {
    double overall = 0.0;
    std::map<int, std::pair<int, int>> per_label; // label -> (samples, hits)

    double accuracy_at(int label) const {
        const auto it = per_label.find(label);
        if (it == per_label.end() || it->second.first == 0) return 0.0;
        return static_cast<double>(it->second.second) / it->second.first;
    }
};

inline EvalReport evaluate(const ModelParams& p, const Matrix& norm_adj,
                           const std::vector<LabeledGraphSample>& dataset, int jobs = 1) {
    EvalReport rep;
    if (dataset.empty()) return rep;
    std::vector<int> preds(dataset.size());
    parallel_for(static_cast<int>(dataset.size()), jobs, [&](int i) {
        preds[i] = predict_count(p, norm_adj, dataset[i].features);
    });
    int hits = 0;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        auto& cell = rep.per_label[dataset[i].label];
        ++cell.first;
        if (preds[i] == dataset[i].label) {
            ++cell.second;
            ++hits;
        }
    }
    rep.overall = static_cast<double>(hits) / static_cast<double>(dataset.size());
    return rep;
}

struct SweepPoint {
    int k = 0;
    double accuracy = 0.0;
};

// Accuracy versus message-passing depth: one training per K on a shared
// train/test split.
inline std::vector<SweepPoint> iteration_sweep(const std::vector<LabeledGraphSample>& dataset,
                                               const Matrix& norm_adj,
                                               const std::vector<int>& k_values,
                                               const TrainConfig& cfg, double test_fraction = 0.2) {
    std::vector<int> idx(dataset.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(derive_seed(cfg.rng_seed, 0x7e57));
    detail::seeded_shuffle(idx, rng);
    const int test_n = static_cast<int>(std::lround(test_fraction * dataset.size()));

    std::vector<LabeledGraphSample> test, tr;
    for (std::size_t i = 0; i < idx.size(); ++i)
        (static_cast<int>(i) < test_n ? test : tr).push_back(dataset[idx[i]]);

    std::vector<SweepPoint> out;
    for (int k : k_values) {
        const TrainResult res = train(tr, norm_adj, GcnArchitecture::with_iterations(k), cfg);
        out.push_back({k, evaluate(res.params, norm_adj, test, cfg.jobs).overall});
    }
    return out;
}

} // namespace rfsl
