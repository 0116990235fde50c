#pragma once

// Dense feed-forward networks with exact reverse-mode gradients, the Adam
// optimizer and Polyak target tracking. Batches are stored column-wise: a
// batch of B inputs of width d is a d x B matrix.

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

namespace biaslab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class HiddenActivation { Relu, Identity };

/// Output transform applied after the last affine layer. BoundedTanh maps
/// into [low, high] per dimension via center + half_range * tanh(z).
enum class OutputTransform { Identity, BoundedTanh };

struct Layer {
    Matrix weight;  // out x in
    Vector bias;    // out
};

struct NetworkParams {
    std::vector<Layer> layers;
    HiddenActivation hidden = HiddenActivation::Relu;
    OutputTransform output = OutputTransform::Identity;
    Vector output_low;   // only meaningful for BoundedTanh
    Vector output_high;

    Eigen::Index input_width() const;
    Eigen::Index output_width() const;
    std::size_t parameter_count() const;

    /// Throws std::invalid_argument if layer dimensions do not chain, bounds
    /// are malformed, or any entry is non-finite.
    void validate() const;
};

/// Same shapes as NetworkParams::layers.
using Gradients = std::vector<Layer>;

/// Builds a network with the given layer widths (input first, output last).
/// Weights and biases are drawn uniformly from +-1/sqrt(fan_in).
NetworkParams make_network(const std::vector<int>& widths, OutputTransform output, std::mt19937_64& rng,
                           HiddenActivation hidden = HiddenActivation::Relu);

/// Same as make_network, with the output transform bounded to [low, high].
NetworkParams make_bounded_network(const std::vector<int>& widths, const Vector& low, const Vector& high,
                                   std::mt19937_64& rng);

Gradients zeros_like(const NetworkParams& net);

Matrix forward(const NetworkParams& net, const Matrix& input);
Vector forward(const NetworkParams& net, const Vector& input);

/// Intermediate values of one forward pass, kept for backward().
struct ForwardCache {
    std::vector<Matrix> inputs;       // input to each layer
    std::vector<Matrix> preactivations;
    Matrix output;
};

ForwardCache forward_cached(const NetworkParams& net, const Matrix& input);

struct BackwardResult {
    Gradients grads;
    Matrix input_grad;
};

/// Propagates d(objective)/d(output) back through the cached pass.
BackwardResult backward(const NetworkParams& net, const ForwardCache& cache, const Matrix& output_grad);

struct MseResult {
    Gradients grads;
    double loss = 0.0;
};

/// Loss is (1/B) * sum_b ||net(x_b) - t_b||^2; grads are exact.
MseResult grad_mse(const NetworkParams& net, const Matrix& inputs, const Matrix& targets);

/// Gradient with respect to the actor's parameters of the batch mean of
/// critic(concat(s, actor(s))). The critic is held fixed. This is the
/// ascent direction; negate it before handing it to a minimizer.
Gradients grad_dpg(const NetworkParams& actor, const NetworkParams& critic, const Matrix& states);

/// Stacks states over actions row-wise to form critic inputs.
Matrix concat_rows(const Matrix& top, const Matrix& bottom);

struct AdamConfig {
    double learning_rate = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    AdamConfig config;
    Gradients first_moment;
    Gradients second_moment;
    std::uint64_t step = 0;

    static AdamState for_network(const NetworkParams& net, AdamConfig config = {});
};

/// One bias-corrected Adam descent step. Throws std::invalid_argument on a
/// shape mismatch or a non-finite gradient entry; params are untouched then.
void adam_step(NetworkParams& params, const Gradients& grads, AdamState& state);

/// target <- tau * source + (1 - tau) * target, element-wise.
void soft_update(NetworkParams& target, const NetworkParams& source, double tau);

bool same_shape(const NetworkParams& a, const NetworkParams& b);
double max_abs_difference(const NetworkParams& a, const NetworkParams& b);

// Text checkpoint format, one network per stream section:
//   biaslab-network 1
//   hidden <relu|identity> output <identity|bounded_tanh>
//   bounds <n> low... high...        (bounded_tanh only)
//   layers <L>
//   layer <out> <in>  followed by out*in weights (row-major) then out biases
// Values are written with 17 significant digits, so a save/load round trip
// reproduces the parameters exactly.
void save_network(std::ostream& os, const NetworkParams& net);
NetworkParams load_network(std::istream& is);

}  // namespace biaslab
