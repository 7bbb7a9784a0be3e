#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace trafficast::models {

/// Hyperparameter profile: `paper` uses the study configuration verbatim,
/// `reduced` shrinks the expensive trainers (epochs/4, recurrent hidden/4)
/// for desk-scale runs and acceptance tests.
enum class Profile { paper, reduced };

std::string to_string(Profile p);
Profile profile_from_string(const std::string& name);

/// Uniform one-shot prediction contract for window-based models: consume the
/// trailing `lag()` observations, emit the value `horizon()` steps ahead.
class Forecaster {
public:
    virtual ~Forecaster() = default;
    virtual std::size_t lag() const = 0;
    virtual std::size_t horizon() const { return 1; }
    virtual double predict(std::span<const double> window) const = 0;
};

/// Contract for models that consume the series in time order (filters,
/// ARIMA). out[t] forecasts series[t] from series[0 .. t-horizon]; entries
/// without enough history are NaN.
class SequentialForecaster {
public:
    virtual ~SequentialForecaster() = default;
    virtual std::size_t min_history() const { return 1; }
    virtual std::vector<double> rolling_forecast(std::span<const double> series,
                                                 std::size_t horizon) const = 0;
};

} // namespace trafficast::models
