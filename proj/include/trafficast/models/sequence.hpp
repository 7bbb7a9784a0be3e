#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "trafficast/models/forecaster.hpp"
#include "trafficast/supervised.hpp"

namespace trafficast::models {

enum class SequenceArch { lstm, bilstm, fclstm, gru, encoder, cnn };
enum class Shuffle { every_epoch, never };

std::string to_string(SequenceArch arch);

/// 1-D convolution structure (input window treated as a Tx1 image).
struct ConvSpec {
    std::size_t input_length = 5;
    std::size_t conv1_channels = 16;
    std::size_t conv2_channels = 32;
    std::size_t kernel = 3;
    std::size_t dense = 64;

    static ConvSpec paper_defaults() { return {}; }
};

struct SequenceModelSpec {
    SequenceArch arch = SequenceArch::lstm;
    std::size_t hidden = 100;   // recurrent units (per direction for bilstm)
    std::size_t window = 10;    // input lag
    std::size_t epochs = 100;
    std::size_t minibatch = 32;
    Shuffle shuffle = Shuffle::every_epoch;
    std::uint64_t seed = 0;
    double learning_rate = 0.001;
    std::size_t fc_width = 64;  // fclstm dense layer
    ConvSpec conv;

    /// Study configuration per architecture; the reduced profile divides
    /// epochs and recurrent hidden units by 4 for desk-scale runs.
    static SequenceModelSpec paper_defaults(SequenceArch arch, Profile profile,
                                            std::uint64_t seed);
};

/// A sequence model with a flat trainable parameter vector. Forward pass and
/// reverse-mode gradients are exact; training is deterministic given the
/// spec's seed.
class SequenceModel final : public Forecaster {
public:
    explicit SequenceModel(SequenceModelSpec spec);

    std::size_t lag() const override { return spec_.window; }
    double predict(std::span<const double> window) const override;

    const SequenceModelSpec& spec() const { return spec_; }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }
    std::size_t param_count() const { return params_.size(); }

    /// Mean-squared-error loss over the selected rows plus its gradient with
    /// respect to every parameter (resized and overwritten).
    double batch_loss_and_gradient(const Matrix& inputs, std::span<const double> targets,
                                   std::span<const std::size_t> rows,
                                   std::vector<double>& grad) const;

    double rmse_on(const SupervisedSet& set) const;

private:
    SequenceModelSpec spec_;
    std::vector<double> params_;
};

/// Exact reverse-mode gradient of the batch MSE (thin wrapper used by tests
/// and by the ANFIS-style gradient checks).
std::vector<double> backprop_through_time(const SequenceModel& model, const Matrix& inputs,
                                          std::span<const double> targets,
                                          std::span<const std::size_t> rows);

/// Minibatch Adam with the spec's shuffle policy; returns the parameters
/// from the epoch with the lowest validation RMSE (final epoch when the
/// validation set is empty). Throws Diverged when the loss leaves the
/// finite range.
SequenceModel train_sequence_model(const SequenceModelSpec& spec, const SupervisedSet& train,
                                   const SupervisedSet& validation);

// Flat binary checkpoints: magic, spec header, parameter count,
// little-endian IEEE-754 doubles.
void save_checkpoint(const SequenceModel& model, const std::string& path);
SequenceModel load_checkpoint(const std::string& path);

} // namespace trafficast::models
