#include "mtl/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

namespace mtl {

namespace {

[[noreturn]] void fail(Errc code, const std::string& what) { throw Error(code, "cli-io", what); }

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && end == s.data() + s.size() && !s.empty();
}

std::string where(const std::string& source, long line) { return source + ":" + std::to_string(line) + ": "; }

}  // namespace

std::string format_double(double x) {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, end);
}

Dataset<double> read_dataset(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) fail(Errc::SchemaError, where(source, 1) + "missing header");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    const auto header = split(line);
    if (header.size() < 3) fail(Errc::SchemaError, where(source, 1) + "header needs task, class and at least one feature");
    if (trim(header[0]) != "task") fail(Errc::SchemaError, where(source, 1) + "column 1 must be 'task'");
    if (trim(header[1]) != "class") fail(Errc::SchemaError, where(source, 1) + "column 2 must be 'class'");
    const Index p = static_cast<Index>(header.size()) - 2;
    for (Index f = 0; f < p; ++f) {
        const std::string want = "f" + std::to_string(f + 1);
        if (trim(header[static_cast<std::size_t>(f + 2)]) != want)
            fail(Errc::SchemaError, where(source, 1) + "column " + std::to_string(f + 3) + " must be '" + want + "'");
    }

    struct Row {
        Index task, cls;
        std::vector<double> x;
    };
    std::vector<Row> rows;
    Index k = 0, m = 0;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto fields = split(line);
        if (static_cast<Index>(fields.size()) != p + 2)
            fail(Errc::ParseError, where(source, lineno) + "expected " + std::to_string(p + 2) + " fields, found " +
                                       std::to_string(fields.size()));
        Row r;
        if (!parse_number(fields[0], r.task) || r.task < 1)
            fail(Errc::ParseError, where(source, lineno) + "task must be a positive integer");
        if (!parse_number(fields[1], r.cls) || r.cls < 1)
            fail(Errc::ParseError, where(source, lineno) + "class must be a positive integer");
        r.x.resize(static_cast<std::size_t>(p));
        for (Index f = 0; f < p; ++f)
            if (!parse_number(fields[static_cast<std::size_t>(f + 2)], r.x[static_cast<std::size_t>(f)]) ||
                !std::isfinite(r.x[static_cast<std::size_t>(f)]))
                fail(Errc::ParseError, where(source, lineno) + "feature f" + std::to_string(f + 1) + " is not a finite number");
        k = std::max(k, r.task);
        m = std::max(m, r.cls);
        rows.push_back(std::move(r));
    }
    if (rows.empty()) fail(Errc::ParseError, where(source, lineno) + "no data rows");

    IndexMatrix counts = IndexMatrix::Zero(k, m);
    for (const auto& r : rows) ++counts(r.task - 1, r.cls - 1);
    std::vector<Matrix<double>> blocks;
    for (Index i = 0; i < k; ++i)
        for (Index j = 0; j < m; ++j) {
            if (counts(i, j) == 0)
                fail(Errc::SchemaError, source + ": class " + std::to_string(j + 1) + " of task " + std::to_string(i + 1) +
                                            " has no rows");
            blocks.emplace_back(p, counts(i, j));
        }
    IndexMatrix fill = IndexMatrix::Zero(k, m);
    for (const auto& r : rows) {
        auto& b = blocks[static_cast<std::size_t>((r.task - 1) * m + r.cls - 1)];
        b.col(fill(r.task - 1, r.cls - 1)++) = Eigen::Map<const Vector<double>>(r.x.data(), p);
    }
    return Dataset<double>(k, m, std::move(blocks));
}

Dataset<double> load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::IoError, "cannot open " + path);
    return read_dataset(in, path);
}

void write_dataset(std::ostream& out, const Dataset<double>& ds) {
    out << "task,class";
    for (Index f = 0; f < ds.dim(); ++f) out << ",f" << f + 1;
    out << '\n';
    for (Index i = 0; i < ds.tasks(); ++i)
        for (Index j = 0; j < ds.classes(); ++j) {
            const auto& b = ds.block(i, j);
            for (Index c = 0; c < b.cols(); ++c) {
                out << i + 1 << ',' << j + 1;
                for (Index f = 0; f < b.rows(); ++f) out << ',' << format_double(b(f, c));
                out << '\n';
            }
        }
}

void save_dataset(const std::string& path, const Dataset<double>& ds) {
    std::ofstream out(path);
    if (!out) fail(Errc::IoError, "cannot write " + path);
    write_dataset(out, ds);
    if (!out) fail(Errc::IoError, "write failed for " + path);
}

void Table::add(std::vector<std::string> row) {
    if (row.size() != columns.size()) fail(Errc::DimensionMismatch, "table row width differs from the header");
    rows.push_back(std::move(row));
}

void Table::write(std::ostream& out) const {
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
    out << '\n';
    for (const auto& r : rows) {
        for (std::size_t c = 0; c < r.size(); ++c) out << (c ? "," : "") << r[c];
        out << '\n';
    }
}

void Table::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) fail(Errc::IoError, "cannot write " + path);
    write(out);
}

}  // namespace mtl
