#pragma once

#include "mtl/core.hpp"

#include <random>
#include <vector>

namespace testing {

inline mtl::Matrix<double> gaussian(mtl::Index rows, mtl::Index cols, std::mt19937_64& rng, double sd = 1.0) {
    std::normal_distribution<double> nd(0.0, sd);
    mtl::Matrix<double> out(rows, cols);
    for (mtl::Index c = 0; c < cols; ++c)
        for (mtl::Index r = 0; r < rows; ++r) out(r, c) = nd(rng);
    return out;
}

/// Random dataset with class means drawn at scale `spread`.
inline mtl::Dataset<double> random_dataset(const mtl::IndexMatrix& counts, mtl::Index p, std::mt19937_64& rng,
                                           double spread = 1.0) {
    std::vector<mtl::Matrix<double>> blocks;
    for (mtl::Index i = 0; i < counts.rows(); ++i)
        for (mtl::Index j = 0; j < counts.cols(); ++j) {
            const mtl::Vector<double> mu = gaussian(p, 1, rng, spread);
            blocks.push_back(gaussian(p, counts(i, j), rng).colwise() + mu);
        }
    return mtl::Dataset<double>(counts.rows(), counts.cols(), std::move(blocks));
}

inline mtl::IndexMatrix counts(std::initializer_list<std::initializer_list<mtl::Index>> rows) {
    mtl::IndexMatrix c(static_cast<mtl::Index>(rows.size()), static_cast<mtl::Index>(rows.begin()->size()));
    mtl::Index i = 0;
    for (const auto& r : rows) {
        mtl::Index j = 0;
        for (auto v : r) c(i, j++) = v;
        ++i;
    }
    return c;
}

inline mtl::Dataset<double> preprocess(const mtl::Dataset<double>& ds) {
    return mtl::normalize_tasks(mtl::center_tasks(ds), mtl::NormMode::sqrt_trace);
}

}  // namespace testing
