#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "qngrc/quantum_dynamics.hpp"
#include "qngrc/types.hpp"

namespace qngrc::io {

// Little-endian binary layouts; field tables live in docs/formats.md.
void write_series(const std::string& path, const TimeSeries& ts);
TimeSeries read_series(const std::string& path);

void write_series_json(const std::string& path, const TimeSeries& ts);
TimeSeries read_series_json(const std::string& path);

void write_matrix(std::ostream& os, const Matrix& A);
Matrix read_matrix(std::istream& is);
void write_matrix(const std::string& path, const Matrix& A);
Matrix read_matrix(const std::string& path);

// Low-level helpers shared by the model format.
void put_u64(std::ostream& os, std::uint64_t v);
std::uint64_t get_u64(std::istream& is);
void put_f64(std::ostream& os, double v);
double get_f64(std::istream& is);
void put_complex_block(std::ostream& os, const Matrix& A);          // row-major
void get_complex_block(std::istream& is, Matrix& A);                // A pre-sized

void write_text_atomically(const std::string& path, const std::string& text);

}  // namespace qngrc::io
