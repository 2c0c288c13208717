#pragma once

#include "mtl/core.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace mtl {

/// CSV dataset: header `task,class,f1,...,fp`, one sample per row, 1-based task and class.
/// Rows may come in any order; samples keep their file order within a block.
Dataset<double> read_dataset(std::istream& in, const std::string& source = "<stream>");
Dataset<double> load_dataset(const std::string& path);

/// Task-major, class-minor rows; numbers in shortest round-trip form.
void write_dataset(std::ostream& out, const Dataset<double>& ds);
void save_dataset(const std::string& path, const Dataset<double>& ds);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double x);

/// Plain CSV table with a header line.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row);
    void write(std::ostream& out) const;
    void save(const std::string& path) const;
};

}  // namespace mtl
