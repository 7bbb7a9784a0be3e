#include "trafficast/models/anfis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "trafficast/errors.hpp"
#include "trafficast/linalg.hpp"
#include "trafficast/rng.hpp"

namespace trafficast::models {

std::string to_string(AnfisVariant v) {
    switch (v) {
    case AnfisVariant::grid_partition: return "grid_partition";
    case AnfisVariant::subtractive: return "subtractive";
    case AnfisVariant::fcm: return "fcm";
    }
    return "unknown";
}

double gbell_mf(double x, const GbellMf& mf) {
    const double z = (x - mf.c) / mf.a;
    return 1.0 / (1.0 + std::pow(z * z, mf.b));
}

AnfisModel::AnfisModel(std::vector<std::vector<GbellMf>> mfs, std::vector<FuzzyRule> rules,
                       AnfisVariant variant)
    : mfs_(std::move(mfs)), rules_(std::move(rules)), variant_(variant) {
    for (const auto& rule : rules_) {
        if (rule.antecedent.size() != mfs_.size()) {
            throw DimensionMismatch("rule antecedent length != input count");
        }
        if (rule.consequent.size() != mfs_.size() + 1) {
            throw DimensionMismatch("rule consequent length != input count + 1");
        }
    }
}

std::vector<double> AnfisModel::normalized_strengths(std::span<const double> x) const {
    if (x.size() != mfs_.size()) {
        throw DimensionMismatch("anfis input has wrong dimension");
    }
    std::vector<double> strengths(rules_.size());
    double total = 0.0;
    for (std::size_t r = 0; r < rules_.size(); ++r) {
        double w = 1.0;
        for (std::size_t d = 0; d < mfs_.size(); ++d) {
            w *= gbell_mf(x[d], mfs_[d][rules_[r].antecedent[d]]);
        }
        strengths[r] = w;
        total += w;
    }
    if (total < 1e-300) throw AllRulesSilent("total firing strength vanished");
    for (double& w : strengths) w /= total;
    return strengths;
}

double AnfisModel::predict(std::span<const double> x) const {
    const auto weights = normalized_strengths(x);
    double out = 0.0;
    for (std::size_t r = 0; r < rules_.size(); ++r) {
        double f = rules_[r].consequent.back();
        for (std::size_t d = 0; d < x.size(); ++d) f += rules_[r].consequent[d] * x[d];
        out += weights[r] * f;
    }
    return out;
}

double anfis_predict(const AnfisModel& model, std::span<const double> x) {
    return model.predict(x);
}

AnfisModel grid_partition_init(const std::vector<std::pair<double, double>>& input_ranges,
                               std::size_t mfs_per_input) {
    if (input_ranges.empty()) throw EmptyInput("grid partition needs at least one input");
    if (mfs_per_input < 2) throw InvalidArgument("grid partition needs at least 2 MFs per input");

    std::vector<std::vector<GbellMf>> mfs(input_ranges.size());
    for (std::size_t d = 0; d < input_ranges.size(); ++d) {
        const auto [lo, hi] = input_ranges[d];
        if (!(hi > lo)) throw DegenerateRange("input range must have positive width");
        const double spacing = (hi - lo) / static_cast<double>(mfs_per_input - 1);
        for (std::size_t k = 0; k < mfs_per_input; ++k) {
            mfs[d].push_back({spacing / 2.0, 2.0, lo + spacing * static_cast<double>(k)});
        }
    }

    // All antecedent combinations, first input varying slowest.
    std::vector<FuzzyRule> rules;
    std::size_t rule_count = 1;
    for (std::size_t d = 0; d < input_ranges.size(); ++d) rule_count *= mfs_per_input;
    for (std::size_t r = 0; r < rule_count; ++r) {
        FuzzyRule rule;
        rule.antecedent.resize(input_ranges.size());
        std::size_t rest = r;
        for (std::size_t d = input_ranges.size(); d-- > 0;) {
            rule.antecedent[d] = rest % mfs_per_input;
            rest /= mfs_per_input;
        }
        rule.consequent.assign(input_ranges.size() + 1, 0.0);
        rules.push_back(std::move(rule));
    }
    return {std::move(mfs), std::move(rules), AnfisVariant::grid_partition};
}

namespace {

struct RangeInfo {
    std::vector<double> lo, width;  // width 0 for constant dimensions
};

RangeInfo data_ranges(const Matrix& data) {
    RangeInfo info;
    info.lo.assign(data.cols(), std::numeric_limits<double>::infinity());
    std::vector<double> hi(data.cols(), -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < data.rows(); ++i) {
        for (std::size_t d = 0; d < data.cols(); ++d) {
            info.lo[d] = std::min(info.lo[d], data.at(i, d));
            hi[d] = std::max(hi[d], data.at(i, d));
        }
    }
    info.width.resize(data.cols());
    for (std::size_t d = 0; d < data.cols(); ++d) info.width[d] = hi[d] - info.lo[d];
    return info;
}

} // namespace

std::vector<std::vector<double>> subtractive_clustering(const Matrix& data,
                                                        std::span<const double> radii) {
    const std::size_t n = data.rows();
    const std::size_t dims = data.cols();
    if (n == 0) throw EmptyInput("subtractive clustering on empty data");
    if (radii.size() != dims) throw DimensionMismatch("one influence radius per dimension");
    for (const double r : radii) {
        if (r <= 0.0) throw InvalidArgument("influence radii must be positive");
    }

    const RangeInfo range = data_ranges(data);
    Matrix scaled(n, dims);  // range-normalized coordinates divided by radius
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < dims; ++d) {
            const double unit = range.width[d] > 0.0
                                    ? (data.at(i, d) - range.lo[d]) / range.width[d]
                                    : 0.0;
            scaled.at(i, d) = unit / radii[d];
        }
    }

    auto dist2 = [&](std::size_t i, std::span<const double> point) {
        double s = 0.0;
        for (std::size_t d = 0; d < dims; ++d) {
            const double diff = scaled.at(i, d) - point[d];
            s += diff * diff;
        }
        return s;
    };

    std::vector<double> potential(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) potential[i] += std::exp(-4.0 * dist2(i, scaled.row(j)));
    }

    constexpr double kSquash = 1.25;
    constexpr double kAccept = 0.5;
    constexpr double kReject = 0.15;

    std::vector<std::vector<double>> centers;         // original units
    std::vector<std::vector<double>> center_scaled;   // radius-normalized
    double first_potential = 0.0;

    while (true) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < n; ++i) {
            if (potential[i] > potential[best]) best = i;
        }
        const double peak = potential[best];
        if (centers.empty()) {
            first_potential = peak;
            if (first_potential <= 0.0) break;
        } else {
            if (peak < kReject * first_potential) break;
            if (peak <= kAccept * first_potential) {
                // Gray zone: keep the point only when it is far from every
                // accepted center relative to its potential.
                double dmin = std::numeric_limits<double>::infinity();
                for (const auto& c : center_scaled) dmin = std::min(dmin, std::sqrt(dist2(best, c)));
                if (dmin + peak / first_potential < 1.0) {
                    potential[best] = 0.0;
                    continue;
                }
            }
        }

        std::vector<double> center(dims), scaled_center(dims);
        for (std::size_t d = 0; d < dims; ++d) {
            scaled_center[d] = scaled.at(best, d);
            center[d] = data.at(best, d);
        }
        centers.push_back(center);
        center_scaled.push_back(scaled_center);

        for (std::size_t i = 0; i < n; ++i) {
            potential[i] -= peak * std::exp(-4.0 * dist2(i, scaled_center) / (kSquash * kSquash));
            if (potential[i] < 0.0) potential[i] = 0.0;
        }
    }
    return centers;
}

FcmResult fuzzy_c_means(const Matrix& data, std::size_t clusters, double fuzzifier,
                        std::uint64_t seed) {
    const std::size_t n = data.rows();
    const std::size_t dims = data.cols();
    if (n == 0) throw EmptyInput("fuzzy c-means on empty data");
    if (clusters == 0 || n < clusters) {
        throw InvalidArgument("fuzzy c-means needs at least as many rows as clusters");
    }
    if (fuzzifier <= 1.0) throw InvalidArgument("fuzzifier must exceed 1");

    FcmResult result;
    result.centers = Matrix(clusters, dims);
    result.memberships = Matrix(n, clusters);

    // Seeded start: distinct data rows as initial centers.
    RngStream rng(derive_seed(seed, "fcm-init"));
    std::vector<std::size_t> picks;
    while (picks.size() < clusters) {
        const std::size_t candidate = rng.index(n);
        if (std::find(picks.begin(), picks.end(), candidate) == picks.end()) {
            picks.push_back(candidate);
        }
    }
    for (std::size_t k = 0; k < clusters; ++k) {
        for (std::size_t d = 0; d < dims; ++d) result.centers.at(k, d) = data.at(picks[k], d);
    }

    const double exponent = 2.0 / (fuzzifier - 1.0);
    std::vector<double> dist2(clusters);
    Matrix previous(n, clusters);

    for (result.iterations = 0; result.iterations < 200; ++result.iterations) {
        // Membership update.
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t zero_at = clusters;
            for (std::size_t k = 0; k < clusters; ++k) {
                double s = 0.0;
                for (std::size_t d = 0; d < dims; ++d) {
                    const double diff = data.at(i, d) - result.centers.at(k, d);
                    s += diff * diff;
                }
                dist2[k] = s;
                if (s < 1e-24 && zero_at == clusters) zero_at = k;
            }
            if (zero_at != clusters) {
                for (std::size_t k = 0; k < clusters; ++k) {
                    result.memberships.at(i, k) = k == zero_at ? 1.0 : 0.0;
                }
                continue;
            }
            for (std::size_t k = 0; k < clusters; ++k) {
                double denom = 0.0;
                for (std::size_t l = 0; l < clusters; ++l) {
                    denom += std::pow(dist2[k] / dist2[l], exponent / 2.0);
                }
                result.memberships.at(i, k) = 1.0 / denom;
            }
        }

        // Objective (non-increasing across iterations).
        double objective = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < clusters; ++k) {
                double s = 0.0;
                for (std::size_t d = 0; d < dims; ++d) {
                    const double diff = data.at(i, d) - result.centers.at(k, d);
                    s += diff * diff;
                }
                objective += std::pow(result.memberships.at(i, k), fuzzifier) * s;
            }
        }
        result.objective_curve.push_back(objective);

        // Center update.
        for (std::size_t k = 0; k < clusters; ++k) {
            double weight_sum = 0.0;
            std::vector<double> acc(dims, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const double w = std::pow(result.memberships.at(i, k), fuzzifier);
                weight_sum += w;
                for (std::size_t d = 0; d < dims; ++d) acc[d] += w * data.at(i, d);
            }
            if (weight_sum > 0.0) {
                for (std::size_t d = 0; d < dims; ++d) result.centers.at(k, d) = acc[d] / weight_sum;
            }
        }

        if (result.iterations > 0) {
            double max_change = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t k = 0; k < clusters; ++k) {
                    max_change = std::max(
                        max_change, std::abs(result.memberships.at(i, k) - previous.at(i, k)));
                }
            }
            if (max_change < 1e-5) break;
        }
        previous = result.memberships;
    }
    return result;
}

AnfisModel anfis_from_clusters(const std::vector<std::vector<double>>& joint_centers,
                               const Matrix& joint_data, std::span<const double> radii,
                               AnfisVariant variant) {
    if (joint_centers.empty()) throw EmptyInput("no cluster centers");
    const std::size_t dims = joint_data.cols();
    if (dims < 2) throw InvalidArgument("joint data must include at least one input and the target");
    const std::size_t inputs = dims - 1;
    if (radii.size() != dims) throw DimensionMismatch("one radius per joint dimension");

    const RangeInfo range = data_ranges(joint_data);
    std::vector<std::vector<GbellMf>> mfs(inputs);
    std::vector<FuzzyRule> rules;
    for (std::size_t r = 0; r < joint_centers.size(); ++r) {
        FuzzyRule rule;
        for (std::size_t d = 0; d < inputs; ++d) {
            const double width = std::max(radii[d] * std::max(range.width[d], 1e-12) / 2.0, 1e-9);
            mfs[d].push_back({width, 2.0, joint_centers[r][d]});
            rule.antecedent.push_back(r);
        }
        rule.consequent.assign(inputs + 1, 0.0);
        rules.push_back(std::move(rule));
    }
    return {std::move(mfs), std::move(rules), variant};
}

std::vector<double> anfis_premise_gradient(const AnfisModel& model, const Matrix& inputs,
                                           std::span<const double> targets) {
    const std::size_t n = inputs.rows();
    const std::size_t d_in = model.input_count();
    const auto& mfs = model.membership_functions();
    const auto& rules = model.rules();

    std::vector<std::size_t> offsets(d_in + 1, 0);
    for (std::size_t d = 0; d < d_in; ++d) offsets[d + 1] = offsets[d] + mfs[d].size() * 3;
    std::vector<double> grad(offsets[d_in], 0.0);

    std::vector<double> mu(d_in);
    std::vector<double> strengths(rules.size());
    std::vector<double> rule_out(rules.size());
    const double inv = 1.0 / static_cast<double>(n);

    for (std::size_t i = 0; i < n; ++i) {
        const auto x = inputs.row(i);
        double total = 0.0;
        for (std::size_t r = 0; r < rules.size(); ++r) {
            double w = 1.0;
            for (std::size_t d = 0; d < d_in; ++d) {
                w *= gbell_mf(x[d], mfs[d][rules[r].antecedent[d]]);
            }
            strengths[r] = w;
            total += w;
            double f = rules[r].consequent.back();
            for (std::size_t d = 0; d < d_in; ++d) f += rules[r].consequent[d] * x[d];
            rule_out[r] = f;
        }
        if (total < 1e-300) continue;
        double out = 0.0;
        for (std::size_t r = 0; r < rules.size(); ++r) out += strengths[r] / total * rule_out[r];
        const double dy = 2.0 * (out - targets[i]) * inv;

        for (std::size_t r = 0; r < rules.size(); ++r) {
            const double dw = dy * (rule_out[r] - out) / total;
            if (dw == 0.0 || strengths[r] == 0.0) continue;
            for (std::size_t d = 0; d < d_in; ++d) {
                const std::size_t mf_index = rules[r].antecedent[d];
                const GbellMf& mf = mfs[d][mf_index];
                const double m = gbell_mf(x[d], mf);
                if (m < 1e-300) continue;
                const double dmu = dw * strengths[r] / m;

                const double z = ((x[d] - mf.c) / mf.a) * ((x[d] - mf.c) / mf.a);
                const double t = std::pow(z, mf.b);
                const double m2 = m * m;
                double da = 0.0, db = 0.0, dc = 0.0;
                if (z > 1e-300) {
                    da = 2.0 * mf.b * t * m2 / mf.a;
                    db = -m2 * t * std::log(z);
                    dc = 2.0 * mf.b * std::pow(z, mf.b - 1.0) * (x[d] - mf.c) * m2 / (mf.a * mf.a);
                }
                const std::size_t base = offsets[d] + mf_index * 3;
                grad[base] += dmu * da;
                grad[base + 1] += dmu * db;
                grad[base + 2] += dmu * dc;
            }
        }
    }
    return grad;
}

namespace {

double solve_consequents(AnfisModel& model, const Matrix& inputs,
                         std::span<const double> targets) {
    const std::size_t n = inputs.rows();
    const std::size_t d_in = model.input_count();
    const std::size_t rules = model.rule_count();
    const std::size_t width = rules * (d_in + 1);

    Matrix design(n, width);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = inputs.row(i);
        const auto weights = model.normalized_strengths(x);
        for (std::size_t r = 0; r < rules; ++r) {
            const std::size_t base = r * (d_in + 1);
            for (std::size_t d = 0; d < d_in; ++d) design.at(i, base + d) = weights[r] * x[d];
            design.at(i, base + d_in) = weights[r];
        }
    }
    const auto solution = ols_fit(design, targets);
    for (std::size_t r = 0; r < rules; ++r) {
        auto& consequent = model.rules()[r].consequent;
        const std::size_t base = r * (d_in + 1);
        for (std::size_t d = 0; d <= d_in; ++d) consequent[d] = solution[base + d];
    }

    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = model.predict(inputs.row(i)) - targets[i];
        sq += e * e;
    }
    return std::sqrt(sq / static_cast<double>(n));
}

} // namespace

AnfisModel fit_anfis(AnfisModel model, const SupervisedSet& train, std::size_t epochs,
                     const AnfisFitOptions& options) {
    if (train.size() == 0) throw EmptyInput("anfis training set is empty");
    if (train.lag != model.input_count()) {
        throw DimensionMismatch("supervised set lag != anfis input count");
    }

    double rmse = solve_consequents(model, train.inputs, train.targets);
    if (!std::isfinite(rmse)) throw Diverged(0, "anfis loss not finite after least squares");

    double step = options.premise_step;
    double previous_rmse = rmse;
    for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
        const auto grad = anfis_premise_gradient(model, train.inputs, train.targets);
        std::size_t cursor = 0;
        for (auto& input_mfs : model.membership_functions()) {
            for (auto& mf : input_mfs) {
                mf.a = std::max(mf.a - step * grad[cursor], 1e-8);
                mf.b = std::clamp(mf.b - step * grad[cursor + 1], 1e-8, 50.0);
                mf.c -= step * grad[cursor + 2];
                cursor += 3;
            }
        }

        rmse = solve_consequents(model, train.inputs, train.targets);
        if (!std::isfinite(rmse)) throw Diverged(epoch, "anfis loss not finite");
        if (rmse > previous_rmse) step *= options.step_decay;
        previous_rmse = rmse;
    }
    return model;
}

} // namespace trafficast::models
