#include "trafficast/models/sequence.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "trafficast/errors.hpp"
#include "trafficast/models/rnn_cells.hpp"
#include "trafficast/optim.hpp"
#include "trafficast/rng.hpp"

namespace trafficast::models {

std::string to_string(SequenceArch arch) {
    switch (arch) {
    case SequenceArch::lstm: return "lstm";
    case SequenceArch::bilstm: return "bilstm";
    case SequenceArch::fclstm: return "fclstm";
    case SequenceArch::gru: return "gru";
    case SequenceArch::encoder: return "encoder";
    case SequenceArch::cnn: return "cnn";
    }
    return "unknown";
}

std::string to_string(Profile p) {
    return p == Profile::paper ? "paper" : "reduced";
}

Profile profile_from_string(const std::string& name) {
    if (name == "paper") return Profile::paper;
    if (name == "reduced") return Profile::reduced;
    throw InvalidArgument("unknown profile '" + name + "' (expected paper or reduced)");
}

SequenceModelSpec SequenceModelSpec::paper_defaults(SequenceArch arch, Profile profile,
                                                    std::uint64_t seed) {
    SequenceModelSpec spec;
    spec.arch = arch;
    spec.seed = seed;
    switch (arch) {
    case SequenceArch::lstm:
        spec.hidden = 100;
        spec.window = 10;
        spec.epochs = 100;
        spec.shuffle = Shuffle::every_epoch;
        break;
    case SequenceArch::bilstm:
        spec.hidden = 128;
        spec.window = 10;
        spec.epochs = 200;
        spec.shuffle = Shuffle::every_epoch;
        break;
    case SequenceArch::fclstm:
        spec.hidden = 100;
        spec.window = 10;
        spec.epochs = 100;
        spec.shuffle = Shuffle::never;
        break;
    case SequenceArch::gru:
        spec.hidden = 128;
        spec.window = 10;
        spec.epochs = 200;
        spec.shuffle = Shuffle::every_epoch;
        break;
    case SequenceArch::encoder:
        spec.hidden = 100;
        spec.window = 10;
        spec.epochs = 100;
        spec.shuffle = Shuffle::every_epoch;
        break;
    case SequenceArch::cnn:
        spec.hidden = 0;
        spec.window = 5;
        spec.epochs = 100;
        spec.shuffle = Shuffle::every_epoch;
        spec.conv = ConvSpec::paper_defaults();
        break;
    }
    if (profile == Profile::reduced) {
        spec.epochs = std::max<std::size_t>(1, spec.epochs / 4);
        if (spec.hidden > 0) spec.hidden = std::max<std::size_t>(1, spec.hidden / 4);
    }
    return spec;
}

namespace {

// ---------------------------------------------------------------------------
// Flat parameter layouts.
// LSTM cell block: wx (4H, input dim 1), wh (4H x H), b (4H); gate order
// i, f, o, g. GRU block: 3 gates in z, r, n order.
// ---------------------------------------------------------------------------

struct CellLayout {
    std::size_t wx = 0;
    std::size_t wh = 0;
    std::size_t b = 0;
    std::size_t hidden = 0;
};

struct ModelLayout {
    CellLayout cell;       // first (or only) recurrent cell
    CellLayout cell_back;  // bilstm backward direction
    std::size_t dense1_w = 0, dense1_b = 0;  // fclstm / cnn hidden dense
    std::size_t out_w = 0, out_b = 0;
    // cnn
    std::size_t conv1_w = 0, conv1_b = 0, conv2_w = 0, conv2_b = 0;
    std::size_t total = 0;
};

CellLayout lay_cell(std::size_t& cursor, std::size_t hidden, std::size_t gates) {
    CellLayout c;
    c.hidden = hidden;
    c.wx = cursor;
    cursor += gates * hidden;
    c.wh = cursor;
    cursor += gates * hidden * hidden;
    c.b = cursor;
    cursor += gates * hidden;
    return c;
}

ModelLayout make_layout(const SequenceModelSpec& spec) {
    ModelLayout lay;
    std::size_t cursor = 0;
    const std::size_t h = spec.hidden;
    switch (spec.arch) {
    case SequenceArch::lstm:
    case SequenceArch::encoder:
        lay.cell = lay_cell(cursor, h, 4);
        lay.out_w = cursor;
        cursor += h;
        break;
    case SequenceArch::bilstm:
        lay.cell = lay_cell(cursor, h, 4);
        lay.cell_back = lay_cell(cursor, h, 4);
        lay.out_w = cursor;
        cursor += 2 * h;
        break;
    case SequenceArch::fclstm:
        lay.cell = lay_cell(cursor, h, 4);
        lay.dense1_w = cursor;
        cursor += spec.fc_width * h;
        lay.dense1_b = cursor;
        cursor += spec.fc_width;
        lay.out_w = cursor;
        cursor += spec.fc_width;
        break;
    case SequenceArch::gru:
        lay.cell = lay_cell(cursor, h, 3);
        lay.out_w = cursor;
        cursor += h;
        break;
    case SequenceArch::cnn: {
        const auto& c = spec.conv;
        lay.conv1_w = cursor;
        cursor += c.conv1_channels * c.kernel;
        lay.conv1_b = cursor;
        cursor += c.conv1_channels;
        lay.conv2_w = cursor;
        cursor += c.conv2_channels * c.conv1_channels * c.kernel;
        lay.conv2_b = cursor;
        cursor += c.conv2_channels;
        lay.dense1_w = cursor;
        cursor += c.dense * (c.conv2_channels * c.input_length);
        lay.dense1_b = cursor;
        cursor += c.dense;
        lay.out_w = cursor;
        cursor += c.dense;
        break;
    }
    }
    lay.out_b = cursor;
    cursor += 1;
    lay.total = cursor;
    return lay;
}

void glorot_fill(std::span<double> block, std::size_t fan_in, std::size_t fan_out,
                 RngStream& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : block) v = rng.uniform(-limit, limit);
}

void init_cell(std::vector<double>& p, const CellLayout& c, std::size_t gates, RngStream& rng,
               bool lstm_forget_bias) {
    const std::size_t h = c.hidden;
    for (std::size_t g = 0; g < gates; ++g) {
        glorot_fill({p.data() + c.wx + g * h, h}, 1, h, rng);
        glorot_fill({p.data() + c.wh + g * h * h, h * h}, h, h, rng);
    }
    // Biases stay zero except the LSTM forget gate (index 1).
    if (lstm_forget_bias) {
        for (std::size_t u = 0; u < h; ++u) p[c.b + h + u] = 1.0;
    }
}

void init_params(std::vector<double>& p, const SequenceModelSpec& spec, const ModelLayout& lay) {
    RngStream rng(derive_seed(spec.seed, "init-" + to_string(spec.arch)));
    switch (spec.arch) {
    case SequenceArch::lstm:
    case SequenceArch::encoder:
        init_cell(p, lay.cell, 4, rng, true);
        glorot_fill({p.data() + lay.out_w, spec.hidden}, spec.hidden, 1, rng);
        break;
    case SequenceArch::bilstm:
        init_cell(p, lay.cell, 4, rng, true);
        init_cell(p, lay.cell_back, 4, rng, true);
        glorot_fill({p.data() + lay.out_w, 2 * spec.hidden}, 2 * spec.hidden, 1, rng);
        break;
    case SequenceArch::fclstm:
        init_cell(p, lay.cell, 4, rng, true);
        glorot_fill({p.data() + lay.dense1_w, spec.fc_width * spec.hidden}, spec.hidden,
                    spec.fc_width, rng);
        glorot_fill({p.data() + lay.out_w, spec.fc_width}, spec.fc_width, 1, rng);
        break;
    case SequenceArch::gru:
        init_cell(p, lay.cell, 3, rng, false);
        glorot_fill({p.data() + lay.out_w, spec.hidden}, spec.hidden, 1, rng);
        break;
    case SequenceArch::cnn: {
        const auto& c = spec.conv;
        glorot_fill({p.data() + lay.conv1_w, c.conv1_channels * c.kernel}, c.kernel,
                    c.conv1_channels * c.kernel, rng);
        glorot_fill({p.data() + lay.conv2_w, c.conv2_channels * c.conv1_channels * c.kernel},
                    c.conv1_channels * c.kernel, c.conv2_channels * c.kernel, rng);
        glorot_fill({p.data() + lay.dense1_w, c.dense * c.conv2_channels * c.input_length},
                    c.conv2_channels * c.input_length, c.dense, rng);
        glorot_fill({p.data() + lay.out_w, c.dense}, c.dense, 1, rng);
        break;
    }
    }
}

// ---------------------------------------------------------------------------
// LSTM sequence kernels (scalar input per step). Caches store activations in
// processing order; `reversed` walks the window back to front.
// ---------------------------------------------------------------------------

struct LstmCaches {
    std::vector<double> gates;   // T * 4H (i, f, o, g after activation)
    std::vector<double> c;       // T * H
    std::vector<double> tanh_c;  // T * H
    std::vector<double> h;       // T * H

    void resize(std::size_t t_steps, std::size_t h_units) {
        gates.resize(t_steps * 4 * h_units);
        c.resize(t_steps * h_units);
        tanh_c.resize(t_steps * h_units);
        h.resize(t_steps * h_units);
    }
};

void lstm_forward_seq(const double* p, const CellLayout& L, std::span<const double> x,
                      bool reversed, LstmCaches& cache) {
    const std::size_t h_units = L.hidden;
    const std::size_t t_steps = x.size();
    const double* wx = p + L.wx;
    const double* wh = p + L.wh;
    const double* b = p + L.b;

    for (std::size_t t = 0; t < t_steps; ++t) {
        const double xt = reversed ? x[t_steps - 1 - t] : x[t];
        const double* h_prev = t > 0 ? cache.h.data() + (t - 1) * h_units : nullptr;
        const double* c_prev = t > 0 ? cache.c.data() + (t - 1) * h_units : nullptr;
        double* gates = cache.gates.data() + t * 4 * h_units;
        for (std::size_t g = 0; g < 4; ++g) {
            double* out = gates + g * h_units;
            const double* whg = wh + g * h_units * h_units;
            for (std::size_t u = 0; u < h_units; ++u) {
                double pre = b[g * h_units + u] + wx[g * h_units + u] * xt;
                if (h_prev != nullptr) {
                    const double* row = whg + u * h_units;
                    double acc = 0.0;
                    for (std::size_t j = 0; j < h_units; ++j) acc += row[j] * h_prev[j];
                    pre += acc;
                }
                out[u] = g == 3 ? std::tanh(pre) : sigmoid(pre);
            }
        }
        double* ct = cache.c.data() + t * h_units;
        double* tct = cache.tanh_c.data() + t * h_units;
        double* ht = cache.h.data() + t * h_units;
        for (std::size_t u = 0; u < h_units; ++u) {
            const double cp = c_prev != nullptr ? c_prev[u] : 0.0;
            ct[u] = gates[h_units + u] * cp + gates[u] * gates[3 * h_units + u];
            tct[u] = std::tanh(ct[u]);
            ht[u] = gates[2 * h_units + u] * tct[u];
        }
    }
}

// Backpropagates d(final hidden state) through the whole window,
// accumulating parameter gradients into `grad`.
void lstm_backward_seq(const double* p, const CellLayout& L, std::span<const double> x,
                       bool reversed, const LstmCaches& cache, std::span<const double> dh_final,
                       double* grad) {
    const std::size_t h_units = L.hidden;
    const std::size_t t_steps = x.size();
    const double* wh = p + L.wh;
    double* gwx = grad + L.wx;
    double* gwh = grad + L.wh;
    double* gb = grad + L.b;

    std::vector<double> dh(dh_final.begin(), dh_final.end());
    std::vector<double> dc(h_units, 0.0);
    std::vector<double> dpre(4 * h_units);
    std::vector<double> dh_prev(h_units);

    for (std::size_t t = t_steps; t-- > 0;) {
        const double xt = reversed ? x[t_steps - 1 - t] : x[t];
        const double* gates = cache.gates.data() + t * 4 * h_units;
        const double* tct = cache.tanh_c.data() + t * h_units;
        const double* h_prev = t > 0 ? cache.h.data() + (t - 1) * h_units : nullptr;
        const double* c_prev = t > 0 ? cache.c.data() + (t - 1) * h_units : nullptr;

        for (std::size_t u = 0; u < h_units; ++u) {
            const double i = gates[u];
            const double f = gates[h_units + u];
            const double o = gates[2 * h_units + u];
            const double g = gates[3 * h_units + u];
            const double d_out = dh[u] * tct[u];                       // gate o
            const double dct = dc[u] + dh[u] * o * (1.0 - tct[u] * tct[u]);
            const double cp = c_prev != nullptr ? c_prev[u] : 0.0;
            dpre[u] = dct * g * i * (1.0 - i);                         // gate i
            dpre[h_units + u] = dct * cp * f * (1.0 - f);              // gate f
            dpre[2 * h_units + u] = d_out * o * (1.0 - o);             // gate o
            dpre[3 * h_units + u] = dct * i * (1.0 - g * g);           // gate g
            dc[u] = dct * f;                                           // flows to c_prev
        }

        for (std::size_t g = 0; g < 4; ++g) {
            const double* dp = dpre.data() + g * h_units;
            double* gwhg = gwh + g * h_units * h_units;
            for (std::size_t u = 0; u < h_units; ++u) {
                gwx[g * h_units + u] += dp[u] * xt;
                gb[g * h_units + u] += dp[u];
                if (h_prev != nullptr) {
                    double* row = gwhg + u * h_units;
                    const double d = dp[u];
                    for (std::size_t j = 0; j < h_units; ++j) row[j] += d * h_prev[j];
                }
            }
        }

        if (t > 0) {
            std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
            for (std::size_t g = 0; g < 4; ++g) {
                const double* dp = dpre.data() + g * h_units;
                const double* whg = wh + g * h_units * h_units;
                for (std::size_t u = 0; u < h_units; ++u) {
                    const double d = dp[u];
                    const double* row = whg + u * h_units;
                    for (std::size_t j = 0; j < h_units; ++j) dh_prev[j] += d * row[j];
                }
            }
            dh = dh_prev;
        }
    }
}

// ---------------------------------------------------------------------------
// GRU sequence kernels.
// ---------------------------------------------------------------------------

struct GruCaches {
    std::vector<double> z, r, n, gated, h;  // T * H each; gated = r . h_prev

    void resize(std::size_t t_steps, std::size_t h_units) {
        z.resize(t_steps * h_units);
        r.resize(t_steps * h_units);
        n.resize(t_steps * h_units);
        gated.resize(t_steps * h_units);
        h.resize(t_steps * h_units);
    }
};

void gru_forward_seq(const double* p, const CellLayout& L, std::span<const double> x,
                     GruCaches& cache) {
    const std::size_t h_units = L.hidden;
    const std::size_t t_steps = x.size();
    const double* wx = p + L.wx;
    const double* wh = p + L.wh;
    const double* b = p + L.b;

    for (std::size_t t = 0; t < t_steps; ++t) {
        const double xt = x[t];
        const double* h_prev = t > 0 ? cache.h.data() + (t - 1) * h_units : nullptr;
        double* zt = cache.z.data() + t * h_units;
        double* rt = cache.r.data() + t * h_units;
        double* nt = cache.n.data() + t * h_units;
        double* gated = cache.gated.data() + t * h_units;
        double* ht = cache.h.data() + t * h_units;

        auto pre_gate = [&](std::size_t g, const double* recur, std::size_t u) {
            double pre = b[g * h_units + u] + wx[g * h_units + u] * xt;
            if (recur != nullptr) {
                const double* row = wh + (g * h_units + u) * h_units;
                double acc = 0.0;
                for (std::size_t j = 0; j < h_units; ++j) acc += row[j] * recur[j];
                pre += acc;
            }
            return pre;
        };

        for (std::size_t u = 0; u < h_units; ++u) zt[u] = sigmoid(pre_gate(0, h_prev, u));
        for (std::size_t u = 0; u < h_units; ++u) rt[u] = sigmoid(pre_gate(1, h_prev, u));
        for (std::size_t u = 0; u < h_units; ++u) {
            gated[u] = h_prev != nullptr ? rt[u] * h_prev[u] : 0.0;
        }
        for (std::size_t u = 0; u < h_units; ++u) {
            nt[u] = std::tanh(pre_gate(2, gated, u));
            const double hp = h_prev != nullptr ? h_prev[u] : 0.0;
            ht[u] = (1.0 - zt[u]) * hp + zt[u] * nt[u];
        }
    }
}

void gru_backward_seq(const double* p, const CellLayout& L, std::span<const double> x,
                      const GruCaches& cache, std::span<const double> dh_final, double* grad) {
    const std::size_t h_units = L.hidden;
    const std::size_t t_steps = x.size();
    const double* wh = p + L.wh;
    double* gwx = grad + L.wx;
    double* gwh = grad + L.wh;
    double* gb = grad + L.b;

    std::vector<double> dh(dh_final.begin(), dh_final.end());
    std::vector<double> dh_prev(h_units);
    std::vector<double> dpre_z(h_units), dpre_r(h_units), dpre_n(h_units), dgated(h_units);

    for (std::size_t t = t_steps; t-- > 0;) {
        const double xt = x[t];
        const double* zt = cache.z.data() + t * h_units;
        const double* rt = cache.r.data() + t * h_units;
        const double* nt = cache.n.data() + t * h_units;
        const double* gated = cache.gated.data() + t * h_units;
        const double* h_prev = t > 0 ? cache.h.data() + (t - 1) * h_units : nullptr;

        std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
        for (std::size_t u = 0; u < h_units; ++u) {
            const double hp = h_prev != nullptr ? h_prev[u] : 0.0;
            const double dz = dh[u] * (nt[u] - hp);
            const double dn = dh[u] * zt[u];
            dh_prev[u] += dh[u] * (1.0 - zt[u]);
            dpre_n[u] = dn * (1.0 - nt[u] * nt[u]);
            dpre_z[u] = dz * zt[u] * (1.0 - zt[u]);
        }
        // dgated = Whn^T dpre_n; then dr and the r.h_prev path.
        std::fill(dgated.begin(), dgated.end(), 0.0);
        const double* whn = wh + 2 * h_units * h_units;
        for (std::size_t u = 0; u < h_units; ++u) {
            const double d = dpre_n[u];
            const double* row = whn + u * h_units;
            for (std::size_t j = 0; j < h_units; ++j) dgated[j] += d * row[j];
        }
        for (std::size_t u = 0; u < h_units; ++u) {
            const double hp = h_prev != nullptr ? h_prev[u] : 0.0;
            const double dr = dgated[u] * hp;
            dh_prev[u] += dgated[u] * rt[u];
            dpre_r[u] = dr * rt[u] * (1.0 - rt[u]);
        }

        const double* dpres[3] = {dpre_z.data(), dpre_r.data(), dpre_n.data()};
        const double* recurs[3] = {h_prev, h_prev, gated};
        for (std::size_t g = 0; g < 3; ++g) {
            const double* dp = dpres[g];
            const double* recur = recurs[g];
            double* gwhg = gwh + g * h_units * h_units;
            for (std::size_t u = 0; u < h_units; ++u) {
                gwx[g * h_units + u] += dp[u] * xt;
                gb[g * h_units + u] += dp[u];
                if (recur != nullptr) {
                    double* row = gwhg + u * h_units;
                    const double d = dp[u];
                    for (std::size_t j = 0; j < h_units; ++j) row[j] += d * recur[j];
                }
            }
        }

        if (t > 0) {
            for (std::size_t g = 0; g < 2; ++g) {  // z and r feed on h_prev
                const double* dp = dpres[g];
                const double* whg = wh + g * h_units * h_units;
                for (std::size_t u = 0; u < h_units; ++u) {
                    const double d = dp[u];
                    const double* row = whg + u * h_units;
                    for (std::size_t j = 0; j < h_units; ++j) dh_prev[j] += d * row[j];
                }
            }
            dh = dh_prev;
        }
    }
}

// ---------------------------------------------------------------------------
// CNN kernels (zero-padded same-length 1-D convolutions).
// ---------------------------------------------------------------------------

struct CnnCaches {
    std::vector<double> a1;  // c1 * T (post-relu)
    std::vector<double> a2;  // c2 * T
    std::vector<double> z3;  // dense (post-relu)

    void resize(const ConvSpec& c) {
        a1.resize(c.conv1_channels * c.input_length);
        a2.resize(c.conv2_channels * c.input_length);
        z3.resize(c.dense);
    }
};

double cnn_forward_pass(const double* p, const ModelLayout& lay, const ConvSpec& c,
                        std::span<const double> x, CnnCaches& cache) {
    const std::size_t t_len = c.input_length;
    const std::size_t k = c.kernel;
    const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(k / 2);

    for (std::size_t ch = 0; ch < c.conv1_channels; ++ch) {
        const double* w = p + lay.conv1_w + ch * k;
        const double bias = p[lay.conv1_b + ch];
        for (std::size_t pos = 0; pos < t_len; ++pos) {
            double acc = bias;
            for (std::size_t kk = 0; kk < k; ++kk) {
                const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(pos + kk) - pad;
                if (src >= 0 && src < static_cast<std::ptrdiff_t>(t_len)) {
                    acc += w[kk] * x[static_cast<std::size_t>(src)];
                }
            }
            cache.a1[ch * t_len + pos] = acc > 0.0 ? acc : 0.0;
        }
    }
    for (std::size_t oc = 0; oc < c.conv2_channels; ++oc) {
        const double bias = p[lay.conv2_b + oc];
        for (std::size_t pos = 0; pos < t_len; ++pos) {
            double acc = bias;
            for (std::size_t ic = 0; ic < c.conv1_channels; ++ic) {
                const double* w = p + lay.conv2_w + (oc * c.conv1_channels + ic) * k;
                const double* a = cache.a1.data() + ic * t_len;
                for (std::size_t kk = 0; kk < k; ++kk) {
                    const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(pos + kk) - pad;
                    if (src >= 0 && src < static_cast<std::ptrdiff_t>(t_len)) {
                        acc += w[kk] * a[static_cast<std::size_t>(src)];
                    }
                }
            }
            cache.a2[oc * t_len + pos] = acc > 0.0 ? acc : 0.0;
        }
    }
    const std::size_t flat = c.conv2_channels * t_len;
    for (std::size_t d = 0; d < c.dense; ++d) {
        double acc = p[lay.dense1_b + d];
        const double* w = p + lay.dense1_w + d * flat;
        for (std::size_t j = 0; j < flat; ++j) acc += w[j] * cache.a2[j];
        cache.z3[d] = acc > 0.0 ? acc : 0.0;
    }
    double y = p[lay.out_b];
    for (std::size_t d = 0; d < c.dense; ++d) y += p[lay.out_w + d] * cache.z3[d];
    return y;
}

void cnn_backward_pass(const double* p, const ModelLayout& lay, const ConvSpec& c,
                       std::span<const double> x, const CnnCaches& cache, double dy,
                       double* grad) {
    const std::size_t t_len = c.input_length;
    const std::size_t k = c.kernel;
    const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(k / 2);
    const std::size_t flat = c.conv2_channels * t_len;

    grad[lay.out_b] += dy;
    std::vector<double> dz3(c.dense);
    for (std::size_t d = 0; d < c.dense; ++d) {
        grad[lay.out_w + d] += dy * cache.z3[d];
        dz3[d] = cache.z3[d] > 0.0 ? dy * p[lay.out_w + d] : 0.0;
    }
    std::vector<double> da2(flat, 0.0);
    for (std::size_t d = 0; d < c.dense; ++d) {
        const double dd = dz3[d];
        if (dd == 0.0) continue;
        grad[lay.dense1_b + d] += dd;
        double* gw = grad + lay.dense1_w + d * flat;
        const double* w = p + lay.dense1_w + d * flat;
        for (std::size_t j = 0; j < flat; ++j) {
            gw[j] += dd * cache.a2[j];
            da2[j] += dd * w[j];
        }
    }
    std::vector<double> da1(c.conv1_channels * t_len, 0.0);
    for (std::size_t oc = 0; oc < c.conv2_channels; ++oc) {
        for (std::size_t pos = 0; pos < t_len; ++pos) {
            const std::size_t idx = oc * t_len + pos;
            const double dpre = cache.a2[idx] > 0.0 ? da2[idx] : 0.0;
            if (dpre == 0.0) continue;
            grad[lay.conv2_b + oc] += dpre;
            for (std::size_t ic = 0; ic < c.conv1_channels; ++ic) {
                double* gw = grad + lay.conv2_w + (oc * c.conv1_channels + ic) * k;
                const double* w = p + lay.conv2_w + (oc * c.conv1_channels + ic) * k;
                const double* a = cache.a1.data() + ic * t_len;
                double* da = da1.data() + ic * t_len;
                for (std::size_t kk = 0; kk < k; ++kk) {
                    const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(pos + kk) - pad;
                    if (src >= 0 && src < static_cast<std::ptrdiff_t>(t_len)) {
                        gw[kk] += dpre * a[static_cast<std::size_t>(src)];
                        da[static_cast<std::size_t>(src)] += dpre * w[kk];
                    }
                }
            }
        }
    }
    for (std::size_t ch = 0; ch < c.conv1_channels; ++ch) {
        for (std::size_t pos = 0; pos < t_len; ++pos) {
            const std::size_t idx = ch * t_len + pos;
            const double dpre = cache.a1[idx] > 0.0 ? da1[idx] : 0.0;
            if (dpre == 0.0) continue;
            grad[lay.conv1_b + ch] += dpre;
            double* gw = grad + lay.conv1_w + ch * k;
            for (std::size_t kk = 0; kk < k; ++kk) {
                const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(pos + kk) - pad;
                if (src >= 0 && src < static_cast<std::ptrdiff_t>(t_len)) {
                    gw[kk] += dpre * x[static_cast<std::size_t>(src)];
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Whole-model forward/backward dispatch.
// ---------------------------------------------------------------------------

struct Workspace {
    LstmCaches lstm_fwd;
    LstmCaches lstm_bwd;
    GruCaches gru;
    CnnCaches cnn;
    std::vector<double> fc_hidden;  // fclstm dense activations
    std::vector<double> dh;         // scratch for head gradients
};

double model_forward(const SequenceModelSpec& spec, const ModelLayout& lay, const double* p,
                     std::span<const double> x, Workspace& ws) {
    const std::size_t h_units = spec.hidden;
    switch (spec.arch) {
    case SequenceArch::lstm:
    case SequenceArch::encoder: {
        ws.lstm_fwd.resize(x.size(), h_units);
        lstm_forward_seq(p, lay.cell, x, false, ws.lstm_fwd);
        const double* h_last = ws.lstm_fwd.h.data() + (x.size() - 1) * h_units;
        double y = p[lay.out_b];
        for (std::size_t u = 0; u < h_units; ++u) y += p[lay.out_w + u] * h_last[u];
        return y;
    }
    case SequenceArch::bilstm: {
        ws.lstm_fwd.resize(x.size(), h_units);
        ws.lstm_bwd.resize(x.size(), h_units);
        lstm_forward_seq(p, lay.cell, x, false, ws.lstm_fwd);
        lstm_forward_seq(p, lay.cell_back, x, true, ws.lstm_bwd);
        const double* hf = ws.lstm_fwd.h.data() + (x.size() - 1) * h_units;
        const double* hb = ws.lstm_bwd.h.data() + (x.size() - 1) * h_units;
        double y = p[lay.out_b];
        for (std::size_t u = 0; u < h_units; ++u) y += p[lay.out_w + u] * hf[u];
        for (std::size_t u = 0; u < h_units; ++u) y += p[lay.out_w + h_units + u] * hb[u];
        return y;
    }
    case SequenceArch::fclstm: {
        ws.lstm_fwd.resize(x.size(), h_units);
        lstm_forward_seq(p, lay.cell, x, false, ws.lstm_fwd);
        const double* h_last = ws.lstm_fwd.h.data() + (x.size() - 1) * h_units;
        ws.fc_hidden.resize(spec.fc_width);
        for (std::size_t d = 0; d < spec.fc_width; ++d) {
            double acc = p[lay.dense1_b + d];
            const double* w = p + lay.dense1_w + d * h_units;
            for (std::size_t u = 0; u < h_units; ++u) acc += w[u] * h_last[u];
            ws.fc_hidden[d] = acc > 0.0 ? acc : 0.0;
        }
        double y = p[lay.out_b];
        for (std::size_t d = 0; d < spec.fc_width; ++d) y += p[lay.out_w + d] * ws.fc_hidden[d];
        return y;
    }
    case SequenceArch::gru: {
        ws.gru.resize(x.size(), h_units);
        gru_forward_seq(p, lay.cell, x, ws.gru);
        const double* h_last = ws.gru.h.data() + (x.size() - 1) * h_units;
        double y = p[lay.out_b];
        for (std::size_t u = 0; u < h_units; ++u) y += p[lay.out_w + u] * h_last[u];
        return y;
    }
    case SequenceArch::cnn:
        ws.cnn.resize(spec.conv);
        return cnn_forward_pass(p, lay, spec.conv, x, ws.cnn);
    }
    return 0.0;
}

void model_backward(const SequenceModelSpec& spec, const ModelLayout& lay, const double* p,
                    std::span<const double> x, Workspace& ws, double dy, double* grad) {
    const std::size_t h_units = spec.hidden;
    switch (spec.arch) {
    case SequenceArch::lstm:
    case SequenceArch::encoder: {
        const double* h_last = ws.lstm_fwd.h.data() + (x.size() - 1) * h_units;
        grad[lay.out_b] += dy;
        ws.dh.assign(h_units, 0.0);
        for (std::size_t u = 0; u < h_units; ++u) {
            grad[lay.out_w + u] += dy * h_last[u];
            ws.dh[u] = dy * p[lay.out_w + u];
        }
        lstm_backward_seq(p, lay.cell, x, false, ws.lstm_fwd, ws.dh, grad);
        break;
    }
    case SequenceArch::bilstm: {
        const double* hf = ws.lstm_fwd.h.data() + (x.size() - 1) * h_units;
        const double* hb = ws.lstm_bwd.h.data() + (x.size() - 1) * h_units;
        grad[lay.out_b] += dy;
        ws.dh.assign(2 * h_units, 0.0);
        for (std::size_t u = 0; u < h_units; ++u) {
            grad[lay.out_w + u] += dy * hf[u];
            grad[lay.out_w + h_units + u] += dy * hb[u];
            ws.dh[u] = dy * p[lay.out_w + u];
            ws.dh[h_units + u] = dy * p[lay.out_w + h_units + u];
        }
        lstm_backward_seq(p, lay.cell, x, false, ws.lstm_fwd,
                          {ws.dh.data(), h_units}, grad);
        lstm_backward_seq(p, lay.cell_back, x, true, ws.lstm_bwd,
                          {ws.dh.data() + h_units, h_units}, grad);
        break;
    }
    case SequenceArch::fclstm: {
        const double* h_last = ws.lstm_fwd.h.data() + (x.size() - 1) * h_units;
        grad[lay.out_b] += dy;
        ws.dh.assign(h_units, 0.0);
        for (std::size_t d = 0; d < spec.fc_width; ++d) {
            grad[lay.out_w + d] += dy * ws.fc_hidden[d];
            const double dz = ws.fc_hidden[d] > 0.0 ? dy * p[lay.out_w + d] : 0.0;
            if (dz == 0.0) continue;
            grad[lay.dense1_b + d] += dz;
            double* gw = grad + lay.dense1_w + d * h_units;
            const double* w = p + lay.dense1_w + d * h_units;
            for (std::size_t u = 0; u < h_units; ++u) {
                gw[u] += dz * h_last[u];
                ws.dh[u] += dz * w[u];
            }
        }
        lstm_backward_seq(p, lay.cell, x, false, ws.lstm_fwd, ws.dh, grad);
        break;
    }
    case SequenceArch::gru: {
        const double* h_last = ws.gru.h.data() + (x.size() - 1) * h_units;
        grad[lay.out_b] += dy;
        ws.dh.assign(h_units, 0.0);
        for (std::size_t u = 0; u < h_units; ++u) {
            grad[lay.out_w + u] += dy * h_last[u];
            ws.dh[u] = dy * p[lay.out_w + u];
        }
        gru_backward_seq(p, lay.cell, x, ws.gru, ws.dh, grad);
        break;
    }
    case SequenceArch::cnn:
        cnn_backward_pass(p, lay, spec.conv, x, ws.cnn, dy, grad);
        break;
    }
}

void validate_spec(const SequenceModelSpec& spec) {
    if (spec.arch == SequenceArch::cnn) {
        if (spec.window != spec.conv.input_length) {
            throw InvalidArgument("cnn window must equal the conv input length");
        }
    } else if (spec.hidden == 0) {
        throw InvalidArgument("recurrent architectures need at least one hidden unit");
    }
    if (spec.window == 0) throw InvalidArgument("window must be positive");
    if (spec.minibatch == 0) throw InvalidArgument("minibatch must be positive");
}

} // namespace

SequenceModel::SequenceModel(SequenceModelSpec spec) : spec_(std::move(spec)) {
    validate_spec(spec_);
    const ModelLayout lay = make_layout(spec_);
    params_.assign(lay.total, 0.0);
    init_params(params_, spec_, lay);
}

double SequenceModel::predict(std::span<const double> window) const {
    if (window.size() != spec_.window) {
        throw DimensionMismatch("sequence model expects a window of length " +
                                std::to_string(spec_.window));
    }
    const ModelLayout lay = make_layout(spec_);
    Workspace ws;
    return model_forward(spec_, lay, params_.data(), window, ws);
}

double SequenceModel::batch_loss_and_gradient(const Matrix& inputs,
                                              std::span<const double> targets,
                                              std::span<const std::size_t> rows,
                                              std::vector<double>& grad) const {
    if (rows.empty()) throw EmptyInput("batch gradient on an empty batch");
    if (inputs.cols() != spec_.window) {
        throw DimensionMismatch("batch inputs have width " + std::to_string(inputs.cols()) +
                                ", model window is " + std::to_string(spec_.window));
    }
    const ModelLayout lay = make_layout(spec_);
    grad.assign(lay.total, 0.0);
    Workspace ws;
    double loss = 0.0;
    const double inv = 1.0 / static_cast<double>(rows.size());
    for (const std::size_t r : rows) {
        const auto x = inputs.row(r);
        const double y = model_forward(spec_, lay, params_.data(), x, ws);
        const double residual = y - targets[r];
        loss += residual * residual * inv;
        model_backward(spec_, lay, params_.data(), x, ws, 2.0 * residual * inv, grad.data());
    }
    return loss;
}

double SequenceModel::rmse_on(const SupervisedSet& set) const {
    const ModelLayout lay = make_layout(spec_);
    Workspace ws;
    double sq = 0.0;
    for (std::size_t r = 0; r < set.size(); ++r) {
        const double y = model_forward(spec_, lay, params_.data(), set.inputs.row(r), ws);
        const double d = y - set.targets[r];
        sq += d * d;
    }
    return std::sqrt(sq / static_cast<double>(set.size()));
}

std::vector<double> backprop_through_time(const SequenceModel& model, const Matrix& inputs,
                                          std::span<const double> targets,
                                          std::span<const std::size_t> rows) {
    std::vector<double> grad;
    model.batch_loss_and_gradient(inputs, targets, rows, grad);
    return grad;
}

SequenceModel train_sequence_model(const SequenceModelSpec& spec, const SupervisedSet& train,
                                   const SupervisedSet& validation) {
    if (train.size() == 0) throw EmptyInput("training set is empty");
    SequenceModel model(spec);
    if (spec.epochs == 0) return model;

    AdamState adam = AdamState::for_size(model.param_count(), spec.learning_rate);
    RngStream shuffle_rng(derive_seed(spec.seed, "shuffle-" + to_string(spec.arch)));
    std::vector<std::size_t> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<double> grad;
    std::vector<double> best_params;
    double best_val = std::numeric_limits<double>::infinity();

    for (std::size_t epoch = 1; epoch <= spec.epochs; ++epoch) {
        if (spec.shuffle == Shuffle::every_epoch) shuffle_rng.shuffle(order);
        for (std::size_t begin = 0; begin < order.size(); begin += spec.minibatch) {
            const std::size_t end = std::min(order.size(), begin + spec.minibatch);
            const double loss = model.batch_loss_and_gradient(
                train.inputs, train.targets, {order.data() + begin, end - begin}, grad);
            if (!std::isfinite(loss)) {
                throw Diverged(epoch, "training loss is not finite");
            }
            adam_step(model.params(), grad, adam);
        }
        if (validation.size() > 0) {
            const double val = model.rmse_on(validation);
            if (val < best_val) {
                best_val = val;
                best_params = model.params();
            }
        }
    }
    if (!best_params.empty()) model.params() = best_params;
    return model;
}

// ---------------------------------------------------------------------------
// Checkpoints.
// ---------------------------------------------------------------------------

namespace {

constexpr char kCheckpointMagic[8] = {'T', 'F', 'C', 'S', 'E', 'Q', '0', '1'};

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& in, T& value) {
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
}

} // namespace

void save_checkpoint(const SequenceModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write checkpoint '" + path + "'");
    const auto& spec = model.spec();
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    write_pod(out, static_cast<std::uint32_t>(spec.arch));
    write_pod(out, static_cast<std::uint32_t>(spec.hidden));
    write_pod(out, static_cast<std::uint32_t>(spec.window));
    write_pod(out, static_cast<std::uint32_t>(spec.fc_width));
    write_pod(out, static_cast<std::uint32_t>(spec.conv.conv1_channels));
    write_pod(out, static_cast<std::uint32_t>(spec.conv.conv2_channels));
    write_pod(out, static_cast<std::uint32_t>(spec.conv.kernel));
    write_pod(out, static_cast<std::uint32_t>(spec.conv.dense));
    write_pod(out, static_cast<std::uint64_t>(model.param_count()));
    out.write(reinterpret_cast<const char*>(model.params().data()),
              static_cast<std::streamsize>(model.param_count() * sizeof(double)));
    if (!out) throw Error("short write on checkpoint '" + path + "'");
}

SequenceModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open checkpoint '" + path + "'");
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
        throw Error("'" + path + "' is not a sequence model checkpoint");
    }
    std::uint32_t arch = 0, hidden = 0, window = 0, fc_width = 0;
    std::uint32_t c1 = 0, c2 = 0, kernel = 0, dense = 0;
    std::uint64_t count = 0;
    read_pod(in, arch);
    read_pod(in, hidden);
    read_pod(in, window);
    read_pod(in, fc_width);
    read_pod(in, c1);
    read_pod(in, c2);
    read_pod(in, kernel);
    read_pod(in, dense);
    read_pod(in, count);

    SequenceModelSpec spec;
    spec.arch = static_cast<SequenceArch>(arch);
    spec.hidden = hidden;
    spec.window = window;
    spec.fc_width = fc_width;
    spec.conv = ConvSpec{window, c1, c2, kernel, dense};
    if (spec.arch != SequenceArch::cnn) spec.conv = ConvSpec{};
    SequenceModel model(spec);
    if (count != model.param_count()) {
        throw Error("checkpoint parameter count does not match the architecture");
    }
    in.read(reinterpret_cast<char*>(model.params().data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw Error("checkpoint '" + path + "' is truncated");
    return model;
}

} // namespace trafficast::models
