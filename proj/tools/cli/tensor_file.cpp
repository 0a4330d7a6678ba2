#include "tensor_file.hpp"

#include "config.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace aseries::cli {

namespace {

std::size_t power(int m, int k) {
  std::size_t r = 1;
  for (int i = 0; i < k; ++i) r *= static_cast<std::size_t>(m);
  return r;
}

}  // namespace

TensorFile read_tensor_file(std::istream& is, const std::string& name) {
  TensorFile t;
  std::string line;
  int lineno = 0;
  int block_line = 0;
  std::size_t expected = 0;
  auto where = [&](int l) { return name + ":" + std::to_string(l) + ": "; };
  auto close_block = [&](int l) {
    if (!t.tensors.empty() && t.tensors.back().size() != expected)
      throw UsageError(where(l) + "order " + std::to_string(t.tensors.size()) + " block started on line " +
                       std::to_string(block_line) + " has " + std::to_string(t.tensors.back().size()) +
                       " values, expected " + std::to_string(expected));
  };
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    if (word == "dimension") {
      if (t.dimension != 0) throw UsageError(where(lineno) + "dimension given twice");
      int m = 0;
      if (!(ls >> m) || m < 1) throw UsageError(where(lineno) + "dimension must be a positive integer");
      t.dimension = m;
    } else if (word == "order") {
      if (t.dimension == 0) throw UsageError(where(lineno) + "order block before dimension");
      close_block(lineno);
      int k = 0;
      if (!(ls >> k)) throw UsageError(where(lineno) + "order needs an integer");
      if (k != static_cast<int>(t.tensors.size()) + 1)
        throw UsageError(where(lineno) + "expected order " + std::to_string(t.tensors.size() + 1) + ", got " +
                         std::to_string(k));
      if (k > 12) throw UsageError(where(lineno) + "orders above 12 are not supported");
      t.tensors.emplace_back();
      expected = power(t.dimension, k);
      t.tensors.back().reserve(expected);
      block_line = lineno;
    } else {
      if (t.tensors.empty()) throw UsageError(where(lineno) + "values outside an order block");
      do {
        double v = 0.0;
        const auto [p, ec] = std::from_chars(word.data(), word.data() + word.size(), v);
        if (ec != std::errc() || p != word.data() + word.size())
          throw UsageError(where(lineno) + "not a number: '" + word + "'");
        if (t.tensors.back().size() == expected)
          throw UsageError(where(lineno) + "too many values for order " + std::to_string(t.tensors.size()));
        t.tensors.back().push_back(v);
      } while (ls >> word);
    }
  }
  close_block(lineno);
  if (t.tensors.empty()) throw UsageError(name + ": no tensors");
  return t;
}

TensorFile read_tensor_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("cannot open tensor file " + path);
  return read_tensor_file(is, path);
}

void write_tensor_file(std::ostream& os, const TensorFile& t) {
  os << std::setprecision(17) << "dimension " << t.dimension << '\n';
  for (std::size_t k = 0; k < t.tensors.size(); ++k) {
    os << "order " << k + 1 << '\n';
    const auto& v = t.tensors[k];
    const std::size_t row = static_cast<std::size_t>(t.dimension);
    for (std::size_t i = 0; i < v.size(); ++i) os << v[i] << ((i + 1) % row == 0 ? '\n' : ' ');
  }
}

}  // namespace aseries::cli
