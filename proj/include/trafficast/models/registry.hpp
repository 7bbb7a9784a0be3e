#pragma once

#include <functional>
#include <memory>

#include "trafficast/models/forecaster.hpp"
#include "trafficast/supervised.hpp"

namespace trafficast::models {

enum class ModelFamily { baseline, parametric, machine_learning, deep_learning };
enum class DataUnits { raw, normalized };
enum class ModelKind { windowed, sequential };

std::string to_string(ModelFamily f);

struct FitInputs {
    // Windowed models train on lagged supervised sets.
    const SupervisedSet* train = nullptr;
    const SupervisedSet* validation = nullptr;
    // Sequential models consume the raw training segment.
    std::span<const double> train_series;
    std::uint64_t seed = 0;
    Profile profile = Profile::reduced;
};

struct FittedModel {
    std::unique_ptr<Forecaster> window_model;
    std::unique_ptr<SequentialForecaster> sequential_model;
    std::string warning;
};

struct ModelInfo {
    std::string id;
    ModelFamily family = ModelFamily::parametric;
    DataUnits units = DataUnits::raw;
    ModelKind kind = ModelKind::windowed;
    std::size_t lag = 1;  // window length consumed (unused for sequential)
    std::function<FittedModel(const FitInputs&)> fit;
};

/// Every model in the study plus the persistence baseline.
const std::vector<ModelInfo>& model_registry();
const ModelInfo* find_model(const std::string& id);
std::vector<std::string> all_model_ids();

/// Resolved hyperparameters per model at a given profile (for the run
/// manifest), as "key=value" strings.
std::vector<std::string> model_hyperparameters(const std::string& id, Profile profile);

} // namespace trafficast::models
