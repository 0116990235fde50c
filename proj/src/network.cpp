#include "biaslab/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#if defined(__AVX512F__) || (defined(__AVX2__) && defined(__FMA__))
#include <immintrin.h>
#endif

namespace biaslab {

namespace {

void require(bool condition, const char* message) {
    if (!condition) {
        throw std::invalid_argument(message);
    }
}

// W * X where every output entry is the fused-multiply-add chain
// acc = fma(W(i,k), X(k,j), acc) for k = 0..K-1 starting from zero. The
// result for a column never depends on which other columns share the batch,
// so batched and single-sample forwards agree bit for bit. The vector paths
// and the scalar fallback produce identical values.
Matrix multiply_columns(const Matrix& w, const Matrix& x) {
    const Eigen::Index rows = w.rows();
    const Eigen::Index depth = w.cols();
    const Eigen::Index cols = x.cols();
    Matrix y(rows, cols);
#if defined(__AVX512F__)
    constexpr Eigen::Index kRowBlock = 8;
#elif defined(__AVX2__) && defined(__FMA__)
    constexpr Eigen::Index kRowBlock = 4;
#else
    constexpr Eigen::Index kRowBlock = 1;
#endif
    constexpr Eigen::Index kColBlock = 4;
    const Eigen::Index row_blocks = (rows + kRowBlock - 1) / kRowBlock;

    // Pack W so each row block is a contiguous depth x kRowBlock panel.
    thread_local std::vector<double> packed;
    packed.assign(static_cast<std::size_t>(row_blocks * kRowBlock * depth), 0.0);
    for (Eigen::Index b = 0; b < row_blocks; ++b) {
        for (Eigen::Index k = 0; k < depth; ++k) {
            for (Eigen::Index r = 0; r < kRowBlock; ++r) {
                const Eigen::Index i = b * kRowBlock + r;
                if (i < rows) {
                    packed[static_cast<std::size_t>((b * depth + k) * kRowBlock + r)] = w(i, k);
                }
            }
        }
    }

    double out[kColBlock][kRowBlock];
    for (Eigen::Index j0 = 0; j0 < cols; j0 += kColBlock) {
        const Eigen::Index ncols = std::min(kColBlock, cols - j0);
        const double* xcol[kColBlock];
        for (Eigen::Index c = 0; c < kColBlock; ++c) {
            // Reuse the last real column for padding; its results are dropped.
            xcol[c] = x.data() + (j0 + std::min(c, ncols - 1)) * depth;
        }
        for (Eigen::Index b = 0; b < row_blocks; ++b) {
            const double* panel = packed.data() + b * depth * kRowBlock;
#if defined(__AVX512F__)
            __m512d acc[kColBlock];
            for (auto& a : acc) a = _mm512_setzero_pd();
            for (Eigen::Index k = 0; k < depth; ++k) {
                const __m512d wv = _mm512_loadu_pd(panel + k * kRowBlock);
                for (Eigen::Index c = 0; c < kColBlock; ++c) {
                    acc[c] = _mm512_fmadd_pd(wv, _mm512_set1_pd(xcol[c][k]), acc[c]);
                }
            }
            for (Eigen::Index c = 0; c < kColBlock; ++c) _mm512_storeu_pd(out[c], acc[c]);
#elif defined(__AVX2__) && defined(__FMA__)
            __m256d acc[kColBlock];
            for (auto& a : acc) a = _mm256_setzero_pd();
            for (Eigen::Index k = 0; k < depth; ++k) {
                const __m256d wv = _mm256_loadu_pd(panel + k * kRowBlock);
                for (Eigen::Index c = 0; c < kColBlock; ++c) {
                    acc[c] = _mm256_fmadd_pd(wv, _mm256_set1_pd(xcol[c][k]), acc[c]);
                }
            }
            for (Eigen::Index c = 0; c < kColBlock; ++c) _mm256_storeu_pd(out[c], acc[c]);
#else
            for (Eigen::Index c = 0; c < kColBlock; ++c) {
                double acc = 0.0;
                for (Eigen::Index k = 0; k < depth; ++k) acc = std::fma(panel[k], xcol[c][k], acc);
                out[c][0] = acc;
            }
#endif
            const Eigen::Index nrows = std::min(kRowBlock, rows - b * kRowBlock);
            for (Eigen::Index c = 0; c < ncols; ++c) {
                std::memcpy(y.data() + (j0 + c) * rows + b * kRowBlock, out[c],
                            sizeof(double) * static_cast<std::size_t>(nrows));
            }
        }
    }
    return y;
}

Matrix affine(const Layer& l, const Matrix& x) {
    Matrix pre = multiply_columns(l.weight, x);
    pre.colwise() += l.bias;
    return pre;
}

Matrix activate(HiddenActivation act, const Matrix& pre) {
    if (act == HiddenActivation::Relu) {
        return pre.cwiseMax(0.0);
    }
    return pre;
}

Vector half_range(const NetworkParams& net) {
    return 0.5 * (net.output_high - net.output_low);
}

Vector center(const NetworkParams& net) {
    return 0.5 * (net.output_high + net.output_low);
}

Matrix apply_output(const NetworkParams& net, const Matrix& pre) {
    if (net.output == OutputTransform::Identity) {
        return pre;
    }
    Matrix out = pre.unaryExpr([](double v) { return std::tanh(v); });
    const Vector half = half_range(net);
    const Vector mid = center(net);
    out = (half.asDiagonal() * out).colwise() + mid;
    // Keep rounding from stepping outside the box.
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
        out.col(c) = out.col(c).cwiseMax(net.output_low).cwiseMin(net.output_high);
    }
    return out;
}

void check_layer_shapes(const std::vector<Layer>& a, const std::vector<Layer>& b) {
    require(a.size() == b.size(), "layer count mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) {
        require(a[i].weight.rows() == b[i].weight.rows() && a[i].weight.cols() == b[i].weight.cols() &&
                    a[i].bias.size() == b[i].bias.size(),
                "layer shape mismatch");
    }
}

}  // namespace

Eigen::Index NetworkParams::input_width() const {
    return layers.empty() ? 0 : layers.front().weight.cols();
}

Eigen::Index NetworkParams::output_width() const {
    return layers.empty() ? 0 : layers.back().weight.rows();
}

std::size_t NetworkParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) {
        n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    }
    return n;
}

void NetworkParams::validate() const {
    require(!layers.empty(), "network has no layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& l = layers[i];
        require(l.bias.size() == l.weight.rows(), "bias length must equal weight rows");
        if (i + 1 < layers.size()) {
            require(layers[i + 1].weight.cols() == l.weight.rows(), "layer dimensions do not chain");
        }
        require(l.weight.allFinite() && l.bias.allFinite(), "non-finite parameter entry");
    }
    if (output == OutputTransform::BoundedTanh) {
        require(output_low.size() == output_width() && output_high.size() == output_width(),
                "output bounds must match output width");
        require((output_low.array() < output_high.array()).all(), "output bounds need low < high");
    }
}

NetworkParams make_network(const std::vector<int>& widths, OutputTransform output, std::mt19937_64& rng,
                           HiddenActivation hidden) {
    require(widths.size() >= 2, "need at least input and output widths");
    NetworkParams net;
    net.hidden = hidden;
    net.output = output;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        require(widths[i] > 0 && widths[i + 1] > 0, "layer widths must be positive");
        const double bound = 1.0 / std::sqrt(static_cast<double>(widths[i]));
        std::uniform_real_distribution<double> uniform(-bound, bound);
        Layer layer{Matrix(widths[i + 1], widths[i]), Vector(widths[i + 1])};
        // Fill in a fixed order so initialization is reproducible.
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
                layer.weight(r, c) = uniform(rng);
            }
        }
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) {
            layer.bias(r) = uniform(rng);
        }
        net.layers.push_back(std::move(layer));
    }
    if (output == OutputTransform::BoundedTanh) {
        net.output_low = Vector::Constant(widths.back(), -1.0);
        net.output_high = Vector::Constant(widths.back(), 1.0);
    }
    return net;
}

NetworkParams make_bounded_network(const std::vector<int>& widths, const Vector& low, const Vector& high,
                                   std::mt19937_64& rng) {
    NetworkParams net = make_network(widths, OutputTransform::BoundedTanh, rng);
    net.output_low = low;
    net.output_high = high;
    net.validate();
    return net;
}

Gradients zeros_like(const NetworkParams& net) {
    Gradients g;
    g.reserve(net.layers.size());
    for (const auto& l : net.layers) {
        g.push_back(Layer{Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
    }
    return g;
}

ForwardCache forward_cached(const NetworkParams& net, const Matrix& input) {
    if (input.rows() != net.input_width()) {
        throw std::invalid_argument("input width " + std::to_string(input.rows()) + " does not match network input " +
                                    std::to_string(net.input_width()));
    }
    ForwardCache cache;
    cache.inputs.reserve(net.layers.size());
    cache.preactivations.reserve(net.layers.size());
    Matrix x = input;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const auto& l = net.layers[i];
        Matrix pre = affine(l, x);
        cache.inputs.push_back(std::move(x));
        const bool last = i + 1 == net.layers.size();
        x = last ? apply_output(net, pre) : activate(net.hidden, pre);
        cache.preactivations.push_back(std::move(pre));
    }
    cache.output = std::move(x);
    return cache;
}

Matrix forward(const NetworkParams& net, const Matrix& input) {
    if (input.rows() != net.input_width()) {
        throw std::invalid_argument("input width " + std::to_string(input.rows()) + " does not match network input " +
                                    std::to_string(net.input_width()));
    }
    Matrix x = input;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const auto& l = net.layers[i];
        Matrix pre = affine(l, x);
        const bool last = i + 1 == net.layers.size();
        x = last ? apply_output(net, pre) : activate(net.hidden, pre);
    }
    return x;
}

Vector forward(const NetworkParams& net, const Vector& input) {
    Matrix batch = input;
    return forward(net, batch).col(0);
}

BackwardResult backward(const NetworkParams& net, const ForwardCache& cache, const Matrix& output_grad) {
    require(output_grad.rows() == net.output_width() && output_grad.cols() == cache.output.cols(),
            "output gradient shape mismatch");
    BackwardResult result{zeros_like(net), Matrix()};
    Matrix delta = output_grad;
    if (net.output == OutputTransform::BoundedTanh) {
        const Matrix t = cache.preactivations.back().unaryExpr([](double v) { return std::tanh(v); });
        const Vector half = half_range(net);
        delta = (half.asDiagonal() * delta).cwiseProduct((1.0 - t.array().square()).matrix());
    }
    for (std::size_t idx = net.layers.size(); idx-- > 0;) {
        const auto& l = net.layers[idx];
        auto& g = result.grads[idx];
        g.weight.noalias() = delta * cache.inputs[idx].transpose();
        g.bias = delta.rowwise().sum();
        Matrix upstream = l.weight.transpose() * delta;
        if (idx > 0 && net.hidden == HiddenActivation::Relu) {
            const Matrix& pre = cache.preactivations[idx - 1];
            upstream = upstream.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
        }
        delta = std::move(upstream);
    }
    result.input_grad = std::move(delta);
    return result;
}

MseResult grad_mse(const NetworkParams& net, const Matrix& inputs, const Matrix& targets) {
    require(inputs.cols() == targets.cols(), "inputs and targets need the same batch length");
    require(targets.rows() == net.output_width(), "target width must equal network output width");
    require(inputs.cols() > 0, "empty batch");
    const ForwardCache cache = forward_cached(net, inputs);
    const Matrix diff = cache.output - targets;
    const double batch = static_cast<double>(inputs.cols());
    MseResult out;
    out.loss = diff.squaredNorm() / batch;
    out.grads = backward(net, cache, (2.0 / batch) * diff).grads;
    return out;
}

Matrix concat_rows(const Matrix& top, const Matrix& bottom) {
    require(top.cols() == bottom.cols(), "concat_rows: column count mismatch");
    Matrix out(top.rows() + bottom.rows(), top.cols());
    out.topRows(top.rows()) = top;
    out.bottomRows(bottom.rows()) = bottom;
    return out;
}

Gradients grad_dpg(const NetworkParams& actor, const NetworkParams& critic, const Matrix& states) {
    require(critic.input_width() == states.rows() + actor.output_width(),
            "critic input width must equal state width plus action width");
    require(critic.output_width() == 1, "critic must output a scalar");
    require(states.cols() > 0, "empty batch");
    const ForwardCache actor_pass = forward_cached(actor, states);
    const ForwardCache critic_pass = forward_cached(critic, concat_rows(states, actor_pass.output));
    const double batch = static_cast<double>(states.cols());
    const Matrix dq = Matrix::Constant(1, states.cols(), 1.0 / batch);
    const BackwardResult critic_back = backward(critic, critic_pass, dq);
    const Matrix action_grad = critic_back.input_grad.bottomRows(actor.output_width());
    return backward(actor, actor_pass, action_grad).grads;
}

AdamState AdamState::for_network(const NetworkParams& net, AdamConfig config) {
    require(config.learning_rate > 0.0 && config.epsilon > 0.0, "Adam learning rate and epsilon must be positive");
    require(config.beta1 >= 0.0 && config.beta1 < 1.0 && config.beta2 >= 0.0 && config.beta2 < 1.0,
            "Adam moment decay must lie in [0, 1)");
    return AdamState{config, zeros_like(net), zeros_like(net), 0};
}

void adam_step(NetworkParams& params, const Gradients& grads, AdamState& state) {
    check_layer_shapes(params.layers, grads);
    check_layer_shapes(params.layers, state.first_moment);
    check_layer_shapes(params.layers, state.second_moment);
    for (const auto& g : grads) {
        require(g.weight.allFinite() && g.bias.allFinite(), "non-finite gradient entry");
    }
    state.step += 1;
    const auto& cfg = state.config;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(cfg.beta1, t);
    const double correction2 = 1.0 - std::pow(cfg.beta2, t);

    auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
        param.array() -= cfg.learning_rate * (m.array() / correction1) /
                         ((v.array() / correction2).sqrt() + cfg.epsilon);
    };
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        update(params.layers[i].weight, grads[i].weight, state.first_moment[i].weight, state.second_moment[i].weight);
        update(params.layers[i].bias, grads[i].bias, state.first_moment[i].bias, state.second_moment[i].bias);
    }
}

void soft_update(NetworkParams& target, const NetworkParams& source, double tau) {
    require(tau >= 0.0 && tau <= 1.0, "tau must lie in [0, 1]");
    check_layer_shapes(target.layers, source.layers);
    if (tau == 1.0) {
        for (std::size_t i = 0; i < target.layers.size(); ++i) {
            target.layers[i] = source.layers[i];
        }
        return;
    }
    for (std::size_t i = 0; i < target.layers.size(); ++i) {
        target.layers[i].weight = tau * source.layers[i].weight + (1.0 - tau) * target.layers[i].weight;
        target.layers[i].bias = tau * source.layers[i].bias + (1.0 - tau) * target.layers[i].bias;
    }
}

bool same_shape(const NetworkParams& a, const NetworkParams& b) {
    if (a.layers.size() != b.layers.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.layers.size(); ++i) {
        if (a.layers[i].weight.rows() != b.layers[i].weight.rows() ||
            a.layers[i].weight.cols() != b.layers[i].weight.cols()) {
            return false;
        }
    }
    return true;
}

double max_abs_difference(const NetworkParams& a, const NetworkParams& b) {
    check_layer_shapes(a.layers, b.layers);
    double m = 0.0;
    for (std::size_t i = 0; i < a.layers.size(); ++i) {
        m = std::max(m, (a.layers[i].weight - b.layers[i].weight).cwiseAbs().maxCoeff());
        m = std::max(m, (a.layers[i].bias - b.layers[i].bias).cwiseAbs().maxCoeff());
    }
    return m;
}

void save_network(std::ostream& os, const NetworkParams& net) {
    net.validate();
    os << "biaslab-network 1\n";
    os << "hidden " << (net.hidden == HiddenActivation::Relu ? "relu" : "identity") << " output "
       << (net.output == OutputTransform::Identity ? "identity" : "bounded_tanh") << '\n';
    os << std::setprecision(17);
    if (net.output == OutputTransform::BoundedTanh) {
        os << "bounds " << net.output_low.size();
        for (Eigen::Index i = 0; i < net.output_low.size(); ++i) os << ' ' << net.output_low(i);
        for (Eigen::Index i = 0; i < net.output_high.size(); ++i) os << ' ' << net.output_high(i);
        os << '\n';
    }
    os << "layers " << net.layers.size() << '\n';
    for (const auto& l : net.layers) {
        os << "layer " << l.weight.rows() << ' ' << l.weight.cols() << '\n';
        for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < l.weight.cols(); ++c) {
                os << l.weight(r, c) << (c + 1 == l.weight.cols() ? '\n' : ' ');
            }
        }
        for (Eigen::Index r = 0; r < l.bias.size(); ++r) {
            os << l.bias(r) << (r + 1 == l.bias.size() ? '\n' : ' ');
        }
    }
}

NetworkParams load_network(std::istream& is) {
    auto expect = [&](const std::string& word) {
        std::string got;
        if (!(is >> got) || got != word) {
            throw std::runtime_error("malformed network checkpoint: expected '" + word + "'");
        }
    };
    expect("biaslab-network");
    int version = 0;
    if (!(is >> version) || version != 1) {
        throw std::runtime_error("unsupported network checkpoint version");
    }
    NetworkParams net;
    std::string hidden, output;
    expect("hidden");
    is >> hidden;
    expect("output");
    is >> output;
    net.hidden = hidden == "relu" ? HiddenActivation::Relu : HiddenActivation::Identity;
    net.output = output == "bounded_tanh" ? OutputTransform::BoundedTanh : OutputTransform::Identity;
    if (net.output == OutputTransform::BoundedTanh) {
        expect("bounds");
        Eigen::Index n = 0;
        is >> n;
        net.output_low.resize(n);
        net.output_high.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) is >> net.output_low(i);
        for (Eigen::Index i = 0; i < n; ++i) is >> net.output_high(i);
    }
    expect("layers");
    std::size_t count = 0;
    is >> count;
    for (std::size_t k = 0; k < count; ++k) {
        expect("layer");
        Eigen::Index rows = 0, cols = 0;
        is >> rows >> cols;
        if (!is || rows <= 0 || cols <= 0) {
            throw std::runtime_error("malformed network checkpoint: bad layer shape");
        }
        Layer l{Matrix(rows, cols), Vector(rows)};
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) is >> l.weight(r, c);
        for (Eigen::Index r = 0; r < rows; ++r) is >> l.bias(r);
        net.layers.push_back(std::move(l));
    }
    if (!is) {
        throw std::runtime_error("malformed network checkpoint: truncated");
    }
    net.validate();
    return net;
}

}  // namespace biaslab
