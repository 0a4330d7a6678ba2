#pragma once

#include "aseries/classifier.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace aseries::cli {

/// Dense symmetric tensors S^(1) ... S^(K) of a functional on R^m.
///
///   dimension 2
///   order 1
///   0 0
///   order 2
///   0 0
///   0 1
///
/// Each "order k" block holds m^k values in row-major multi-index order,
/// spread over any number of lines. Orders run 1, 2, ..., K. '#' starts a
/// comment. Errors carry "<name>:<line>:".
struct TensorFile {
  int dimension = 0;
  std::vector<std::vector<double>> tensors;
};

TensorFile read_tensor_file(std::istream& is, const std::string& name);
TensorFile read_tensor_file(const std::string& path);

void write_tensor_file(std::ostream& os, const TensorFile& t);

}  // namespace aseries::cli
