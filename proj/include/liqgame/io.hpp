#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace liqgame {

// 17 significant digits: doubles round-trip exactly, so reruns are
// byte-identical.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

// Writes through a temporary file in the same directory and renames over the
// target, so readers never observe partial output.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out) throw std::runtime_error("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

// Column-ordered CSV accumulator.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : cols_(header.size()) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) oss_ << ',';
            oss_ << header[i];
        }
        oss_ << '\n';
    }

    void row(const std::vector<double>& values) {
        if (values.size() != cols_) throw std::invalid_argument("csv row width mismatch");
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) oss_ << ',';
            oss_ << format_double(values[i]);
        }
        oss_ << '\n';
    }

    void raw_row(const std::vector<std::string>& values) {
        if (values.size() != cols_) throw std::invalid_argument("csv row width mismatch");
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) oss_ << ',';
            oss_ << values[i];
        }
        oss_ << '\n';
    }

    void save(const std::filesystem::path& path) const { write_file_atomic(path, oss_.str()); }
    std::string str() const { return oss_.str(); }

private:
    std::size_t cols_;
    std::ostringstream oss_;
};

inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream oss;
    oss << in.rdbuf();
    return oss.str();
}

}  // namespace liqgame
