#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "trafficast/matrix.hpp"

namespace trafficast::models {

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

/// LSTM cell parameters, one weight set per gate in (input, forget, output,
/// candidate) order.
struct LstmCellParams {
    std::size_t input_size = 1;
    std::size_t hidden_size = 1;
    Matrix input_weights[4];      // hidden x input
    Matrix recurrent_weights[4];  // hidden x hidden
    std::vector<double> biases[4];

    static LstmCellParams zeros(std::size_t input_size, std::size_t hidden_size);
};

/// One LSTM step: i,f,o = sigmoid gates, g = tanh candidate,
/// c = f.c_prev + i.g, h = o.tanh(c). Returns (h, c).
std::pair<std::vector<double>, std::vector<double>> lstm_cell_forward(
    const LstmCellParams& params, std::span<const double> x, std::span<const double> h_prev,
    std::span<const double> c_prev);

/// GRU cell parameters in (update, reset, candidate) order.
struct GruCellParams {
    std::size_t input_size = 1;
    std::size_t hidden_size = 1;
    Matrix input_weights[3];
    Matrix recurrent_weights[3];
    std::vector<double> biases[3];

    static GruCellParams zeros(std::size_t input_size, std::size_t hidden_size);
};

/// One GRU step: z,r = sigmoid gates, n = tanh(Wx + U(r.h) + b),
/// h' = (1-z).h + z.n.
std::vector<double> gru_cell_forward(const GruCellParams& params, std::span<const double> x,
                                     std::span<const double> h_prev);

} // namespace trafficast::models
