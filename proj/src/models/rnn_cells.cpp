#include "trafficast/models/rnn_cells.hpp"

#include "trafficast/errors.hpp"

namespace trafficast::models {

LstmCellParams LstmCellParams::zeros(std::size_t input_size, std::size_t hidden_size) {
    LstmCellParams p;
    p.input_size = input_size;
    p.hidden_size = hidden_size;
    for (int g = 0; g < 4; ++g) {
        p.input_weights[g] = Matrix(hidden_size, input_size);
        p.recurrent_weights[g] = Matrix(hidden_size, hidden_size);
        p.biases[g].assign(hidden_size, 0.0);
    }
    return p;
}

std::pair<std::vector<double>, std::vector<double>> lstm_cell_forward(
    const LstmCellParams& params, std::span<const double> x, std::span<const double> h_prev,
    std::span<const double> c_prev) {
    const std::size_t in = params.input_size;
    const std::size_t hidden = params.hidden_size;
    if (x.size() != in || h_prev.size() != hidden || c_prev.size() != hidden) {
        throw DimensionMismatch("lstm_cell_forward: input/state sizes do not match the cell");
    }

    std::vector<double> gate[4];
    for (int g = 0; g < 4; ++g) {
        gate[g].resize(hidden);
        for (std::size_t u = 0; u < hidden; ++u) {
            double pre = params.biases[g][u];
            const auto wx = params.input_weights[g].row(u);
            for (std::size_t j = 0; j < in; ++j) pre += wx[j] * x[j];
            const auto wh = params.recurrent_weights[g].row(u);
            for (std::size_t j = 0; j < hidden; ++j) pre += wh[j] * h_prev[j];
            gate[g][u] = g == 3 ? std::tanh(pre) : sigmoid(pre);
        }
    }

    std::vector<double> c(hidden), h(hidden);
    for (std::size_t u = 0; u < hidden; ++u) {
        c[u] = gate[1][u] * c_prev[u] + gate[0][u] * gate[3][u];
        h[u] = gate[2][u] * std::tanh(c[u]);
    }
    return {std::move(h), std::move(c)};
}

GruCellParams GruCellParams::zeros(std::size_t input_size, std::size_t hidden_size) {
    GruCellParams p;
    p.input_size = input_size;
    p.hidden_size = hidden_size;
    for (int g = 0; g < 3; ++g) {
        p.input_weights[g] = Matrix(hidden_size, input_size);
        p.recurrent_weights[g] = Matrix(hidden_size, hidden_size);
        p.biases[g].assign(hidden_size, 0.0);
    }
    return p;
}

std::vector<double> gru_cell_forward(const GruCellParams& params, std::span<const double> x,
                                     std::span<const double> h_prev) {
    const std::size_t in = params.input_size;
    const std::size_t hidden = params.hidden_size;
    if (x.size() != in || h_prev.size() != hidden) {
        throw DimensionMismatch("gru_cell_forward: input/state sizes do not match the cell");
    }

    auto gate_pre = [&](int g, std::span<const double> recur, std::size_t u) {
        double pre = params.biases[g][u];
        const auto wx = params.input_weights[g].row(u);
        for (std::size_t j = 0; j < in; ++j) pre += wx[j] * x[j];
        const auto wh = params.recurrent_weights[g].row(u);
        for (std::size_t j = 0; j < hidden; ++j) pre += wh[j] * recur[j];
        return pre;
    };

    std::vector<double> z(hidden), r(hidden), gated(hidden), h(hidden);
    for (std::size_t u = 0; u < hidden; ++u) z[u] = sigmoid(gate_pre(0, h_prev, u));
    for (std::size_t u = 0; u < hidden; ++u) r[u] = sigmoid(gate_pre(1, h_prev, u));
    for (std::size_t u = 0; u < hidden; ++u) gated[u] = r[u] * h_prev[u];
    for (std::size_t u = 0; u < hidden; ++u) {
        const double candidate = std::tanh(gate_pre(2, gated, u));
        h[u] = (1.0 - z[u]) * h_prev[u] + z[u] * candidate;
    }
    return h;
}

} // namespace trafficast::models
