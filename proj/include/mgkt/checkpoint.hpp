#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "mgkt/error.hpp"
#include "mgkt/matrix.hpp"

// Little-endian binary helpers shared by every checkpoint format.
namespace mgkt {

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw Error(ErrorCode::BadCheckpoint, "truncated binary stream");
  return v;
}

void write_string(std::ostream& out, const std::string& s);
std::string read_string(std::istream& in);

void write_matrix(std::ostream& out, const Matrix& m);
Matrix read_matrix(std::istream& in);

}  // namespace mgkt
