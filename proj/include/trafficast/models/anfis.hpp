#pragma once

#include <cstdint>
#include <utility>

#include "trafficast/matrix.hpp"
#include "trafficast/models/forecaster.hpp"
#include "trafficast/supervised.hpp"

namespace trafficast::models {

/// Generalized bell membership function 1 / (1 + |(x-c)/a|^(2b)).
struct GbellMf {
    double a = 1.0;  // width > 0
    double b = 2.0;  // shape > 0
    double c = 0.0;  // center
};

double gbell_mf(double x, const GbellMf& mf);

struct FuzzyRule {
    std::vector<std::size_t> antecedent;  // one MF index per input
    std::vector<double> consequent;       // affine: one per input + constant
};

enum class AnfisVariant { grid_partition, subtractive, fcm };

std::string to_string(AnfisVariant v);

/// First-order Takagi-Sugeno system: rule firing strengths are products of
/// bell memberships; the output is the strength-weighted mix of affine rule
/// consequents.
class AnfisModel final : public Forecaster {
public:
    AnfisModel(std::vector<std::vector<GbellMf>> mfs, std::vector<FuzzyRule> rules,
               AnfisVariant variant);

    std::size_t lag() const override { return mfs_.size(); }
    double predict(std::span<const double> x) const override;

    std::size_t input_count() const { return mfs_.size(); }
    std::size_t rule_count() const { return rules_.size(); }
    const std::vector<std::vector<GbellMf>>& membership_functions() const { return mfs_; }
    std::vector<std::vector<GbellMf>>& membership_functions() { return mfs_; }
    const std::vector<FuzzyRule>& rules() const { return rules_; }
    std::vector<FuzzyRule>& rules() { return rules_; }
    AnfisVariant variant() const { return variant_; }

    /// Normalized firing strengths at x (sums to 1).
    std::vector<double> normalized_strengths(std::span<const double> x) const;

private:
    std::vector<std::vector<GbellMf>> mfs_;  // per input
    std::vector<FuzzyRule> rules_;
    AnfisVariant variant_;
};

double anfis_predict(const AnfisModel& model, std::span<const double> x);

/// Uniform grid over the input ranges: `mfs_per_input` bells per input with
/// centers spanning the range, widths at half the center spacing, and one
/// rule per antecedent combination (consequents start at zero).
AnfisModel grid_partition_init(const std::vector<std::pair<double, double>>& input_ranges,
                               std::size_t mfs_per_input = 3);

/// Chiu-style subtractive clustering on range-normalized data with one
/// influence radius per dimension. Returns cluster centers in original units.
std::vector<std::vector<double>> subtractive_clustering(const Matrix& data,
                                                        std::span<const double> radii);

struct FcmResult {
    Matrix centers;      // clusters x dims
    Matrix memberships;  // rows x clusters, each row sums to 1
    std::vector<double> objective_curve;
    std::size_t iterations = 0;
};

FcmResult fuzzy_c_means(const Matrix& data, std::size_t clusters, double fuzzifier,
                        std::uint64_t seed);

/// One rule per cluster of the joint input+target space; bell widths derive
/// from the per-dimension influence radius and data range.
AnfisModel anfis_from_clusters(const std::vector<std::vector<double>>& joint_centers,
                               const Matrix& joint_data, std::span<const double> radii,
                               AnfisVariant variant);

/// Gradient of the training MSE with respect to the premise parameters,
/// flattened as (a, b, c) per membership function in input-major order.
std::vector<double> anfis_premise_gradient(const AnfisModel& model, const Matrix& inputs,
                                           std::span<const double> targets);

struct AnfisFitOptions {
    double premise_step = 0.01;
    double step_decay = 0.9;
};

/// Hybrid learning: per epoch, consequents are solved globally by least
/// squares on the strength-weighted design, then one gradient pass adjusts
/// the premise parameters (step decayed when the epoch RMSE rises).
AnfisModel fit_anfis(AnfisModel model, const SupervisedSet& train, std::size_t epochs,
                     const AnfisFitOptions& options = {});

} // namespace trafficast::models
