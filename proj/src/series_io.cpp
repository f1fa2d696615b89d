#include <algorithm>
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qngrc/errors.hpp"
#include "qngrc/io.hpp"

namespace qngrc::io {

namespace {

constexpr char kSeriesMagic[8] = {'Q', 'N', 'G', 'R', 'C', 'T', 'S', '1'};
constexpr char kMatrixMagic[8] = {'Q', 'N', 'G', 'R', 'C', 'M', 'X', '1'};

template <class T>
void put_le(std::ostream& os, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
  unsigned char buf[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) throw IoError("unexpected end of file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path + " for writing");
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  return is;
}

void expect_magic(std::istream& is, const char (&magic)[8], const std::string& what) {
  char buf[8];
  if (!is.read(buf, 8) || std::memcmp(buf, magic, 8) != 0) throw IoError(what + ": bad magic");
}

}  // namespace

void put_u64(std::ostream& os, std::uint64_t v) { put_le(os, v); }
std::uint64_t get_u64(std::istream& is) { return get_le<std::uint64_t>(is); }
void put_f64(std::ostream& os, double v) { put_le(os, v); }
double get_f64(std::istream& is) { return get_le<double>(is); }

void put_complex_block(std::ostream& os, const Matrix& A) {
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      put_le(os, A(i, j).real());
      put_le(os, A(i, j).imag());
    }
}

void get_complex_block(std::istream& is, Matrix& A) {
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      double re = get_le<double>(is);
      double im = get_le<double>(is);
      A(i, j) = cplx(re, im);
    }
}

void write_series(const std::string& path, const TimeSeries& ts) {
  auto os = open_out(path);
  os.write(kSeriesMagic, 8);
  put_le<std::uint32_t>(os, 1);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(ts.n_qubits));
  put_le(os, ts.J);
  put_le(os, ts.h);
  put_le(os, ts.dt);
  put_le<std::uint64_t>(os, ts.burn_in);
  put_le<std::int64_t>(os, ts.first_index);
  put_le<std::uint64_t>(os, ts.size());
  put_le<std::uint64_t>(os, static_cast<std::uint64_t>(ts.dim()));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(ts.origin.size()));
  os.write(ts.origin.data(), static_cast<std::streamsize>(ts.origin.size()));
  for (const auto& s : ts.states)
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      put_le(os, s(i).real());
      put_le(os, s(i).imag());
    }
  if (!os) throw IoError("write failed: " + path);
}

TimeSeries read_series(const std::string& path) {
  auto is = open_in(path);
  expect_magic(is, kSeriesMagic, path);
  if (get_le<std::uint32_t>(is) != 1) throw IoError(path + ": unsupported series version");
  TimeSeries ts;
  ts.n_qubits = static_cast<int>(get_le<std::uint32_t>(is));
  ts.J = get_le<double>(is);
  ts.h = get_le<double>(is);
  ts.dt = get_le<double>(is);
  ts.burn_in = get_le<std::uint64_t>(is);
  ts.first_index = get_le<std::int64_t>(is);
  const auto count = get_le<std::uint64_t>(is);
  const auto dim = get_le<std::uint64_t>(is);
  const auto olen = get_le<std::uint32_t>(is);
  if (dim > (std::uint64_t{1} << 20) || olen > (1u << 20)) throw IoError(path + ": corrupt header");
  ts.origin.resize(olen);
  if (olen && !is.read(ts.origin.data(), olen)) throw IoError(path + ": truncated origin");
  ts.states.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    StateVector s(static_cast<Eigen::Index>(dim));
    for (std::uint64_t i = 0; i < dim; ++i) {
      double re = get_le<double>(is);
      double im = get_le<double>(is);
      s(static_cast<Eigen::Index>(i)) = cplx(re, im);
    }
    ts.states.push_back(std::move(s));
  }
  return ts;
}

void write_series_json(const std::string& path, const TimeSeries& ts) {
  nlohmann::json j;
  j["format"] = "qngrc.series";
  j["version"] = 1;
  j["n_qubits"] = ts.n_qubits;
  j["J"] = ts.J;
  j["h"] = ts.h;
  j["dt"] = ts.dt;
  j["burn_in"] = ts.burn_in;
  j["first_index"] = ts.first_index;
  j["origin"] = ts.origin;
  j["count"] = ts.size();
  nlohmann::json states = nlohmann::json::array();
  for (const auto& s : ts.states) {
    nlohmann::json amps = nlohmann::json::array();
    for (Eigen::Index i = 0; i < s.size(); ++i) amps.push_back({s(i).real(), s(i).imag()});
    states.push_back(std::move(amps));
  }
  j["states"] = std::move(states);
  write_text_atomically(path, j.dump(1) + "\n");
}

TimeSeries read_series_json(const std::string& path) {
  auto is = open_in(path);
  nlohmann::json j;
  try {
    is >> j;
    TimeSeries ts;
    ts.n_qubits = j.at("n_qubits").get<int>();
    ts.J = j.at("J").get<double>();
    ts.h = j.at("h").get<double>();
    ts.dt = j.at("dt").get<double>();
    ts.burn_in = j.at("burn_in").get<std::uint64_t>();
    ts.first_index = j.at("first_index").get<std::int64_t>();
    ts.origin = j.at("origin").get<std::string>();
    for (const auto& amps : j.at("states")) {
      StateVector s(static_cast<Eigen::Index>(amps.size()));
      for (std::size_t i = 0; i < amps.size(); ++i)
        s(static_cast<Eigen::Index>(i)) = cplx(amps[i].at(0).get<double>(), amps[i].at(1).get<double>());
      ts.states.push_back(std::move(s));
    }
    return ts;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

void write_matrix(std::ostream& os, const Matrix& A) {
  os.write(kMatrixMagic, 8);
  put_u64(os, static_cast<std::uint64_t>(A.rows()));
  put_u64(os, static_cast<std::uint64_t>(A.cols()));
  put_complex_block(os, A);
}

Matrix read_matrix(std::istream& is) {
  expect_magic(is, kMatrixMagic, "matrix");
  auto r = get_u64(is), c = get_u64(is);
  if (r > (1u << 20) || c > (1u << 26)) throw IoError("matrix: corrupt header");
  Matrix A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  get_complex_block(is, A);
  return A;
}

void write_matrix(const std::string& path, const Matrix& A) {
  auto os = open_out(path);
  write_matrix(os, A);
  if (!os) throw IoError("write failed: " + path);
}

Matrix read_matrix(const std::string& path) {
  auto is = open_in(path);
  return read_matrix(is);
}

void write_text_atomically(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + tmp + " for writing");
    os << text;
    if (!os) throw IoError("write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp + " to " + path + ": " + ec.message());
}

}  // namespace qngrc::io
