#pragma once

// Text helpers shared by the parameter snapshot readers and writers. Values
// are written with 17 significant digits so a save/load cycle is exact.

#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

#include "actmeas/errors.hpp"
#include "actmeas/nn/tensor.hpp"

namespace actmeas::nn::detail {

inline void write_values(std::ostream& out, const double* data, Eigen::Index n) {
  char buf[32];
  for (Eigen::Index i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", data[i]);
    if (i > 0) out << ' ';
    out << buf;
  }
  out << '\n';
}

// Row-major, one row per line.
inline void write_matrix(std::ostream& out, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Eigen::RowVectorXd row = m.row(r);
    write_values(out, row.data(), row.size());
  }
}

inline double read_double(std::istream& in) {
  std::string token;
  if (!(in >> token)) throw CheckpointError("snapshot truncated: expected a number");
  try {
    std::size_t used = 0;
    double v = std::stod(token, &used);
    if (used != token.size()) throw CheckpointError("snapshot: bad number '" + token + "'");
    return v;
  } catch (const std::logic_error&) {
    throw CheckpointError("snapshot: bad number '" + token + "'");
  }
}

inline void read_matrix(std::istream& in, Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = read_double(in);
}

inline void expect_token(std::istream& in, const std::string& expected) {
  std::string token;
  if (!(in >> token) || token != expected)
    throw CheckpointError("snapshot: expected '" + expected + "', got '" + token + "'");
}

template <typename T>
T read_value(std::istream& in, const std::string& what) {
  T v{};
  if (!(in >> v)) throw CheckpointError("snapshot: could not read " + what);
  return v;
}

}  // namespace actmeas::nn::detail
