#include "cmcf/snapshot.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cmcf {

static_assert(std::endian::native == std::endian::little,
              "snapshot payload is little endian");

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T>
std::string join(const T& v) {
  std::ostringstream os;
  for (int i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    if constexpr (std::is_same_v<typename T::Scalar, int>)
      os << v[i];
    else
      os << fmt(v[i]);
  }
  return os.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (std::getline(is, tok, sep)) out.push_back(tok);
  return out;
}

std::string expect_kv(const std::string& token, const std::string& key) {
  const std::string prefix = key + "=";
  if (token.rfind(prefix, 0) != 0)
    throw std::runtime_error("snapshot header: expected " + key + "=...");
  return token.substr(prefix.size());
}

}  // namespace

void write_snapshot(const std::string& path, const ScalarField& field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "CMCF1 n=" << field.grid.dims() << " dims=" << join(field.grid.counts)
      << " h=" << join(field.grid.spacing)
      << " origin=" << join(field.grid.origin) << " t=" << fmt(field.time)
      << " far=" << fmt(field.far_field) << "\n";
  out.write(reinterpret_cast<const char*>(field.values.data()),
            static_cast<std::streamsize>(field.values.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write failed for " + path);
}

ScalarField read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string magic, tok;
  hs >> magic;
  if (magic != "CMCF1") throw std::runtime_error(path + ": bad magic");
  hs >> tok;
  const int n = std::stoi(expect_kv(tok, "n"));
  hs >> tok;
  auto dims = split(expect_kv(tok, "dims"), ',');
  hs >> tok;
  auto hs_ = split(expect_kv(tok, "h"), ',');
  hs >> tok;
  auto os_ = split(expect_kv(tok, "origin"), ',');
  if (static_cast<int>(dims.size()) != n || static_cast<int>(hs_.size()) != n ||
      static_cast<int>(os_.size()) != n)
    throw std::runtime_error(path + ": header arity mismatch");
  Eigen::VectorXi counts(n);
  Eigen::VectorXd spacing(n), origin(n);
  for (int k = 0; k < n; ++k) {
    counts[k] = std::stoi(dims[k]);
    spacing[k] = std::stod(hs_[k]);
    origin[k] = std::stod(os_[k]);
  }
  hs >> tok;
  const double t = std::stod(expect_kv(tok, "t"));
  hs >> tok;
  const double far = std::stod(expect_kv(tok, "far"));
  ScalarField field(Grid(counts, spacing, origin), far, t);
  in.read(reinterpret_cast<char*>(field.values.data()),
          static_cast<std::streamsize>(field.values.size() * sizeof(double)));
  if (in.gcount() !=
      static_cast<std::streamsize>(field.values.size() * sizeof(double)))
    throw std::runtime_error(path + ": truncated payload");
  return field;
}

}  // namespace cmcf
