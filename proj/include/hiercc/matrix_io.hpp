#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "hiercc/matrix.hpp"

namespace hiercc {

// Flat binary layout: 8-byte magic, rows and cols as little-endian u64,
// then row-major IEEE doubles (little-endian).
inline constexpr std::array<char, 8> kMatrixMagic = {'H', 'C', 'M', 'A', 'T', 'R', 'X', '1'};

namespace detail {

inline void write_u64_le(std::ostream& os, std::uint64_t v) {
    std::array<unsigned char, 8> b{};
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b.data()), 8);
}

inline std::uint64_t read_u64_le(std::istream& is) {
    std::array<unsigned char, 8> b{};
    is.read(reinterpret_cast<char*>(b.data()), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

static_assert(std::endian::native == std::endian::little,
              "binary matrix IO assumes a little-endian host");

}  // namespace detail

inline void save_matrix(const Matrix& m, std::ostream& os) {
    os.write(kMatrixMagic.data(), kMatrixMagic.size());
    detail::write_u64_le(os, m.rows());
    detail::write_u64_le(os, m.cols());
    os.write(reinterpret_cast<const char*>(m.data()),
             static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!os) throw std::runtime_error("matrix write failed");
}

inline void save_matrix(const Matrix& m, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    save_matrix(m, os);
}

inline Matrix load_matrix(std::istream& is) {
    std::array<char, 8> magic{};
    is.read(magic.data(), magic.size());
    if (!is || magic != kMatrixMagic)
        throw std::invalid_argument("not a matrix file (bad magic)");
    const std::uint64_t rows = detail::read_u64_le(is);
    const std::uint64_t cols = detail::read_u64_le(is);
    if (rows == 0 || cols == 0)
        throw std::invalid_argument("matrix file has zero dimension");
    std::vector<double> data(rows * cols);
    is.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (!is) throw std::invalid_argument("matrix file truncated");
    Matrix m(rows, cols, std::move(data));
    m.require_finite();
    return m;
}

inline Matrix load_matrix(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    return load_matrix(is);
}

// CSV import for small test fixtures: one row per line, comma separated.
inline Matrix load_matrix_csv(std::istream& is) {
    std::vector<double> data;
    std::size_t rows = 0, cols = 0;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t c = 0;
        while (std::getline(ss, cell, ',')) {
            data.push_back(std::stod(cell));
            ++c;
        }
        if (rows == 0) cols = c;
        else if (c != cols)
            throw std::invalid_argument("csv: ragged row " + std::to_string(rows));
        ++rows;
    }
    if (rows == 0) throw std::invalid_argument("csv: no rows");
    Matrix m(rows, cols, std::move(data));
    m.require_finite();
    return m;
}

inline Matrix load_matrix_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    return load_matrix_csv(is);
}

}  // namespace hiercc
