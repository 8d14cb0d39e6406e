#pragma once

#include <stdexcept>
#include <string>

namespace prognosis {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input files or mismatched column schemas.
struct SchemaError : Error {
    using Error::Error;
};

// Invalid configuration detected before any computation starts.
struct ConfigError : Error {
    using Error::Error;
};

// Metric preconditions violated (e.g. single-class labels for AUC).
struct MetricError : Error {
    using Error::Error;
};

// Learner preconditions violated or fit/predict contract broken.
struct ModelError : Error {
    using Error::Error;
};

// Label derivation failures (e.g. survivor with absent mGCS).
struct LabelError : Error {
    using Error::Error;
};

}  // namespace prognosis
