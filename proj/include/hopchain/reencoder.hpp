#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hopchain/dense_index.hpp"

namespace hopchain {

/// Second-hop query map g(q, d1) = W2 * relu(W1 * [q; d1] + b1) + b2.
///
/// Parameters are row-major: w1 is hidden x 2*dim, w2 is dim x hidden.
struct ReEncoderModel {
    std::size_t dim = 0;
    std::size_t hidden = 0;
    std::vector<double> w1;
    std::vector<double> b1;
    std::vector<double> w2;
    std::vector<double> b2;

    static ReEncoderModel zeros(std::size_t dim, std::size_t hidden);
    /// Each layer uniform in (-1/sqrt(fan_in), 1/sqrt(fan_in)), biases included.
    static ReEncoderModel initialized(std::size_t dim, std::size_t hidden, std::uint64_t seed);

    std::size_t parameter_count() const noexcept {
        return w1.size() + b1.size() + w2.size() + b2.size();
    }
    /// Throws PreconditionError if shapes disagree or any parameter is non-finite.
    void validate() const;

    /// Throws DimensionError unless both inputs have length dim.
    Embedding reencode(std::span<const double> q_qa, std::span<const double> d1) const;

    friend bool operator==(const ReEncoderModel&, const ReEncoderModel&) = default;
};

enum class TrainObjective {
    Mse,           // mean over triples of ||g(q, d1) - d2||^2
    InnerProduct,  // mean over triples of -<g(q, d1), d2>
};

struct TrainConfig {
    double learning_rate = 0.05;
    int epochs = 500;
    int batch_size = 16;
    std::uint64_t seed = 7;
    std::size_t hidden = 0;  // 0 selects 4 * dim
    TrainObjective objective = TrainObjective::Mse;

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct ChainTriple {
    Embedding q_qa;
    Embedding d1;
    Embedding d2_target;
};

struct TrainResult {
    ReEncoderModel model;
    std::vector<double> epoch_loss;  // full training-set loss after each epoch
};

/// Mini-batch gradient descent with a fixed learning rate. Initialization and
/// per-epoch shuffling are driven by config.seed alone, so identical inputs
/// give bit-identical parameters.
///
/// Throws PreconditionError on empty input or bad config, DimensionError on
/// inconsistent triples and DivergenceError on a non-finite epoch loss.
TrainResult train(std::span<const ChainTriple> triples, const TrainConfig& config);

/// Loss of one batch under `objective`.
double batch_loss(const ReEncoderModel& model, std::span<const ChainTriple> batch,
                  TrainObjective objective = TrainObjective::Mse);

/// Analytic gradient of batch_loss, laid out like the model's parameters.
ReEncoderModel loss_gradient(const ReEncoderModel& model, std::span<const ChainTriple> batch,
                             TrainObjective objective = TrainObjective::Mse);

/// Maximum relative error between loss_gradient and central finite
/// differences of the single-triple loss, over every parameter.
///
/// Relative error is |a - n| / max(|a|, |n|, 1e-8); parameters where both are
/// exactly zero contribute 0. A W1/b1 entry whose +-epsilon stencil flips the
/// sign of a hidden pre-activation sits on a ReLU kink, where the finite
/// difference is not a derivative, and is skipped.
///
/// Throws PreconditionError unless 0 < epsilon <= 1e-2.
double gradient_check(const ReEncoderModel& model, const ChainTriple& triple, double epsilon,
                      TrainObjective objective = TrainObjective::Mse);

/// JSON document with dim, hidden and the four row-major parameter arrays.
void write_model(const ReEncoderModel& model, std::ostream& out,
                 const std::string& config_digest = {});
ReEncoderModel read_model(std::istream& in, const std::string& source = "<stream>");
void save_model(const ReEncoderModel& model, const std::string& path,
                const std::string& config_digest = {});
ReEncoderModel load_model(const std::string& path);

}  // namespace hopchain
