#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "choquard/grid.hpp"

namespace choquard {

namespace {

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  return __builtin_bswap64(v);
}

}  // namespace

void write_field(std::ostream& os, const Field& f) {
  const Grid& g = f.grid();
  nlohmann::json header = {{"dim", g.dim()}, {"M", g.points_per_axis()}, {"L", g.half_width()}, {"count", f.size()}};
  os << header.dump() << '\n';
  for (double v : f.values()) {
    std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
    os.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
  if (!os) throw std::runtime_error("write_field: stream error");
}

Field read_field(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("read_field: missing header");
  const auto header = nlohmann::json::parse(line);
  Grid g(header.at("dim").get<int>(), header.at("M").get<int>(), header.at("L").get<double>());
  if (header.at("count").get<std::size_t>() != g.size()) throw std::runtime_error("read_field: count mismatch");
  std::vector<double> v(g.size());
  for (double& x : v) {
    std::uint64_t bits = 0;
    if (!is.read(reinterpret_cast<char*>(&bits), sizeof bits)) throw std::runtime_error("read_field: truncated data");
    x = std::bit_cast<double>(to_little_endian(bits));
  }
  return Field(g, std::move(v));
}

void save_field(const std::filesystem::path& path, const Field& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_field: cannot open " + path.string());
  write_field(os, f);
}

Field load_field(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_field: cannot open " + path.string());
  return read_field(is);
}

void write_csv_slice(std::ostream& os, const Field& f) {
  const Grid& g = f.grid();
  const long m = g.points_per_axis();
  os << "x,u\n" << std::setprecision(17);
  for (long i = 0; i < m; ++i) {
    // Cell-centred grids have no sample at 0; M/2 is the first positive one.
    std::array<long, 3> idx{i, m / 2, m / 2};
    os << g.coordinate(i) << ',' << f[g.ravel(idx)] << '\n';
  }
}

}  // namespace choquard
