#include "trafficast/models/registry.hpp"

#include <cmath>

#include "trafficast/errors.hpp"
#include "trafficast/models/anfis.hpp"
#include "trafficast/models/arima.hpp"
#include "trafficast/models/boosting.hpp"
#include "trafficast/models/filters.hpp"
#include "trafficast/models/forest.hpp"
#include "trafficast/models/knn.hpp"
#include "trafficast/models/linear_ar.hpp"
#include "trafficast/models/mlp.hpp"
#include "trafficast/models/sequence.hpp"
#include "trafficast/models/svr.hpp"
#include "trafficast/models/tree.hpp"

namespace trafficast::models {

std::string to_string(ModelFamily f) {
    switch (f) {
    case ModelFamily::baseline: return "baseline";
    case ModelFamily::parametric: return "parametric";
    case ModelFamily::machine_learning: return "machine_learning";
    case ModelFamily::deep_learning: return "deep_learning";
    }
    return "unknown";
}

namespace {

// Predicts the last observed value, whatever the horizon.
class PersistenceModel final : public Forecaster {
public:
    std::size_t lag() const override { return 1; }
    double predict(std::span<const double> window) const override { return window.back(); }
};

constexpr double kSvrCost = 10.0;
constexpr double kSvrEpsilon = 0.01;
constexpr std::size_t kSvrLag = 5;
constexpr std::size_t kAnfisLag = 2;
constexpr std::size_t kAnfisEpochsPaper = 50;
constexpr std::size_t kAnfisEpochsReduced = 12;
constexpr double kSubtractiveRadii[3] = {0.5, 0.25, 0.3};
constexpr double kFcmRadius = 0.5;

std::size_t anfis_epochs(Profile profile) {
    return profile == Profile::paper ? kAnfisEpochsPaper : kAnfisEpochsReduced;
}

FittedModel wrap(std::unique_ptr<Forecaster> model, std::string warning = {}) {
    FittedModel out;
    out.window_model = std::move(model);
    out.warning = std::move(warning);
    return out;
}

Matrix joint_input_target(const SupervisedSet& set) {
    Matrix joint(set.size(), set.lag + 1);
    for (std::size_t i = 0; i < set.size(); ++i) {
        for (std::size_t d = 0; d < set.lag; ++d) joint.at(i, d) = set.inputs.at(i, d);
        joint.at(i, set.lag) = set.targets[i];
    }
    return joint;
}

FittedModel fit_anfis_variant(const FitInputs& in, AnfisVariant variant) {
    const SupervisedSet& train = *in.train;
    AnfisModel initial = [&] {
        switch (variant) {
        case AnfisVariant::grid_partition: {
            std::vector<std::pair<double, double>> ranges(train.lag);
            for (std::size_t d = 0; d < train.lag; ++d) {
                double lo = train.inputs.at(0, d);
                double hi = lo;
                for (std::size_t i = 1; i < train.size(); ++i) {
                    lo = std::min(lo, train.inputs.at(i, d));
                    hi = std::max(hi, train.inputs.at(i, d));
                }
                ranges[d] = {lo, hi};
            }
            return grid_partition_init(ranges, 3);
        }
        case AnfisVariant::subtractive: {
            const Matrix joint = joint_input_target(train);
            std::vector<double> radii(kSubtractiveRadii, kSubtractiveRadii + 3);
            radii.resize(joint.cols(), kSubtractiveRadii[2]);
            const auto centers = subtractive_clustering(joint, radii);
            return anfis_from_clusters(centers, joint, radii, AnfisVariant::subtractive);
        }
        case AnfisVariant::fcm: {
            const Matrix joint = joint_input_target(train);
            const auto fcm = fuzzy_c_means(joint, 3, 2.0, in.seed);
            std::vector<std::vector<double>> centers;
            for (std::size_t k = 0; k < fcm.centers.rows(); ++k) {
                centers.emplace_back(fcm.centers.row(k).begin(), fcm.centers.row(k).end());
            }
            const std::vector<double> radii(joint.cols(), kFcmRadius);
            return anfis_from_clusters(centers, joint, radii, AnfisVariant::fcm);
        }
        }
        throw InvalidArgument("unknown anfis variant");
    }();
    auto fitted = fit_anfis(std::move(initial), train, anfis_epochs(in.profile));
    return wrap(std::make_unique<AnfisModel>(std::move(fitted)));
}

FittedModel fit_sequence(const FitInputs& in, SequenceArch arch) {
    auto spec = SequenceModelSpec::paper_defaults(arch, in.profile, in.seed);
    static const SupervisedSet kEmpty;
    const SupervisedSet& validation = in.validation != nullptr ? *in.validation : kEmpty;
    auto model = train_sequence_model(spec, *in.train, validation);
    return wrap(std::make_unique<SequenceModel>(std::move(model)));
}

std::vector<ModelInfo> build_registry() {
    std::vector<ModelInfo> reg;

    reg.push_back({"persistence", ModelFamily::baseline, DataUnits::raw, ModelKind::windowed, 1,
                   [](const FitInputs&) { return wrap(std::make_unique<PersistenceModel>()); }});

    reg.push_back({"linear_regression", ModelFamily::parametric, DataUnits::raw,
                   ModelKind::windowed, 2, [](const FitInputs& in) {
                       return wrap(std::make_unique<LinearArModel>(
                           fit_linear_regression(*in.train)));
                   }});

    reg.push_back({"arima", ModelFamily::parametric, DataUnits::raw, ModelKind::sequential, 0,
                   [](const FitInputs& in) {
                       auto model = fit_arima(in.train_series);
                       FittedModel out;
                       out.warning = model.warning();
                       out.sequential_model = std::make_unique<ArimaModel>(std::move(model));
                       return out;
                   }});

    reg.push_back({"kalman", ModelFamily::parametric, DataUnits::raw, ModelKind::sequential, 0,
                   [](const FitInputs&) {
                       FittedModel out;
                       out.sequential_model = std::make_unique<KalmanFilterModel>();
                       return out;
                   }});

    reg.push_back({"alpha_beta", ModelFamily::parametric, DataUnits::raw, ModelKind::sequential, 0,
                   [](const FitInputs&) {
                       FittedModel out;
                       out.sequential_model = std::make_unique<AlphaBetaModel>();
                       return out;
                   }});

    reg.push_back({"decision_tree", ModelFamily::machine_learning, DataUnits::normalized,
                   ModelKind::windowed, 10, [](const FitInputs& in) {
                       return wrap(std::make_unique<RegressionTree>(fit_regression_tree(
                           in.train->inputs, in.train->targets, std::nullopt, 5)));
                   }});

    reg.push_back({"lsboost", ModelFamily::machine_learning, DataUnits::normalized,
                   ModelKind::windowed, 10, [](const FitInputs& in) {
                       return wrap(std::make_unique<BoostedEnsemble>(
                           fit_gradient_boost(in.train->inputs, in.train->targets, 0.1)));
                   }});

    reg.push_back({"random_forest", ModelFamily::machine_learning, DataUnits::normalized,
                   ModelKind::windowed, 10, [](const FitInputs& in) {
                       return wrap(std::make_unique<RandomForestModel>(
                           fit_random_forest(in.train->inputs, in.train->targets, in.seed)));
                   }});

    reg.push_back({"knn", ModelFamily::machine_learning, DataUnits::normalized,
                   ModelKind::windowed, 5, [](const FitInputs& in) {
                       return wrap(std::make_unique<KnnForecaster>(
                           in.train->inputs, in.train->targets, 5));
                   }});

    reg.push_back({"svr", ModelFamily::machine_learning, DataUnits::normalized,
                   ModelKind::windowed, kSvrLag, [](const FitInputs& in) {
                       auto model = SvrModel::fit(in.train->inputs, in.train->targets, kSvrCost,
                                                  kSvrEpsilon,
                                                  1.0 / static_cast<double>(in.train->lag));
                       std::string warning = model.warning();
                       return wrap(std::make_unique<SvrModel>(std::move(model)),
                                   std::move(warning));
                   }});

    reg.push_back({"mlp", ModelFamily::machine_learning, DataUnits::normalized,
                   ModelKind::windowed, 10, [](const FitInputs& in) {
                       MlpFitOptions options;
                       options.max_epochs = in.profile == Profile::paper ? 100 : 25;
                       return wrap(std::make_unique<MlpModel>(MlpModel::fit(
                           in.train->inputs, in.train->targets, in.seed, options)));
                   }});

    const std::pair<const char*, SequenceArch> sequence_models[] = {
        {"cnn", SequenceArch::cnn},       {"encoder", SequenceArch::encoder},
        {"lstm", SequenceArch::lstm},     {"bilstm", SequenceArch::bilstm},
        {"fclstm", SequenceArch::fclstm}, {"gru", SequenceArch::gru},
    };
    for (const auto& [id, arch] : sequence_models) {
        const std::size_t lag = arch == SequenceArch::cnn ? 5 : 10;
        reg.push_back({id, ModelFamily::deep_learning, DataUnits::normalized,
                       ModelKind::windowed, lag, [arch](const FitInputs& in) {
                           return fit_sequence(in, arch);
                       }});
    }

    const std::pair<const char*, AnfisVariant> anfis_models[] = {
        {"anfis_gp", AnfisVariant::grid_partition},
        {"anfis_sc", AnfisVariant::subtractive},
        {"anfis_fcm", AnfisVariant::fcm},
    };
    for (const auto& [id, variant] : anfis_models) {
        reg.push_back({id, ModelFamily::deep_learning, DataUnits::normalized,
                       ModelKind::windowed, kAnfisLag, [variant](const FitInputs& in) {
                           return fit_anfis_variant(in, variant);
                       }});
    }
    return reg;
}

} // namespace

const std::vector<ModelInfo>& model_registry() {
    static const std::vector<ModelInfo> registry = build_registry();
    return registry;
}

const ModelInfo* find_model(const std::string& id) {
    for (const auto& info : model_registry()) {
        if (info.id == id) return &info;
    }
    return nullptr;
}

std::vector<std::string> all_model_ids() {
    std::vector<std::string> ids;
    for (const auto& info : model_registry()) ids.push_back(info.id);
    return ids;
}

std::vector<std::string> model_hyperparameters(const std::string& id, Profile profile) {
    const bool paper = profile == Profile::paper;
    auto epochs = [&](std::size_t full) { return std::to_string(paper ? full : full / 4); };
    auto hidden = [&](std::size_t full) { return std::to_string(paper ? full : full / 4); };

    if (id == "persistence") return {"lag=1"};
    if (id == "linear_regression") return {"lag=2", "intercept=true"};
    if (id == "arima") return {"p=2", "d=1", "q=2", "estimation=css", "iterations=500"};
    if (id == "kalman") return {"Q=0.001", "R=0.01", "state=random_walk"};
    if (id == "alpha_beta") return {"alpha=0.85", "beta=0.005", "dt=1"};
    if (id == "decision_tree") return {"lag=10", "split_criterion=mse", "min_leaf=5"};
    if (id == "lsboost")
        return {"lag=10", "method=lsboost", "cycles=100", "max_splits=10", "learning_rate=0.1"};
    if (id == "random_forest")
        return {"lag=10", "trees=100", "min_leaf=5", "features_per_split=ceil(p/3)", "oob=on"};
    if (id == "knn") return {"k=5", "sequence_length=5"};
    if (id == "svr") return {"lag=5", "kernel=rbf", "C=10", "epsilon=0.01", "gamma=1/lag"};
    if (id == "mlp") return {"lag=10", "hidden=10", "training=levenberg_marquardt",
                             "epochs=" + std::string(paper ? "100" : "25")};
    if (id == "cnn")
        return {"lag=5", "conv1=16", "conv2=32", "kernel=3", "dense=64", "optimizer=adam",
                "minibatch=32", "epochs=" + epochs(100)};
    if (id == "encoder")
        return {"lag=10", "hidden=" + hidden(100), "optimizer=adam", "minibatch=32",
                "epochs=" + epochs(100)};
    if (id == "lstm")
        return {"lag=10", "hidden=" + hidden(100), "optimizer=adam", "minibatch=32",
                "shuffle=every_epoch", "epochs=" + epochs(100)};
    if (id == "bilstm")
        return {"lag=10", "hidden=" + hidden(128), "optimizer=adam", "minibatch=32",
                "shuffle=every_epoch", "epochs=" + epochs(200)};
    if (id == "fclstm")
        return {"lag=10", "hidden=" + hidden(100), "fc=64", "optimizer=adam", "minibatch=32",
                "shuffle=never", "epochs=" + epochs(100)};
    if (id == "gru")
        return {"lag=10", "hidden=" + hidden(128), "optimizer=adam", "minibatch=32",
                "shuffle=every_epoch", "epochs=" + epochs(200)};
    if (id == "anfis_gp")
        return {"inputs=2", "mfs_per_input=3", "mf=gbellmf", "fis=sugeno",
                "epochs=" + std::string(paper ? "50" : "12")};
    if (id == "anfis_sc")
        return {"inputs=2", "cluster_radii=[0.5,0.25,0.3]", "fis=sugeno",
                "epochs=" + std::string(paper ? "50" : "12")};
    if (id == "anfis_fcm")
        return {"inputs=2", "clusters=3", "fuzzifier=2", "fis=sugeno",
                "epochs=" + std::string(paper ? "50" : "12")};
    return {};
}

} // namespace trafficast::models
