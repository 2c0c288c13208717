#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace mtl {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using IndexMatrix = Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic>;

enum class Errc {
    BadSpec,
    ParseError,
    SchemaError,
    IoError,
    DimensionMismatch,
    ZeroVariance,
    SingularSystem,
    SingularMatrix,
    NoConvergence,
    NonPositive,
    ModelMismatch,
    DenseLimitExceeded,
    CriticalRegime,
    InsufficientSamples,
    DegenerateShift,
    NonPSD,
};

const char* errc_name(Errc code) noexcept;

/// Categorized failure; `module` names the component that raised it.
class Error : public std::runtime_error {
public:
    Error(Errc code, std::string module, const std::string& what)
        : std::runtime_error(what), code_(code), module_(std::move(module)) {}

    Errc code() const noexcept { return code_; }
    const std::string& module() const noexcept { return module_; }

private:
    Errc code_;
    std::string module_;
};

}  // namespace mtl
