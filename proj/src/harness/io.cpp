#include "crowdscale/harness/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace crowdscale::harness {

std::string format_double(double v) {
  if (v == 0.0) return "0";  // folds -0 so mirrored runs print alike
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

int CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::out_of_range("CSV column '" + name + "' not found");
  return static_cast<int>(it - header.begin());
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::invalid_argument("bad number '" + s + "'");
  return v;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split(line);
    if (row.size() != t.header.size()) throw std::runtime_error(path.string() + ": ragged row");
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_snapshot(std::ostream& out, const MomentField& m) {
  const std::string ts = format_double(m.t);
  for (int b = 0; b < m.n_bins; ++b) {
    for (int c = 0; c < m.grid.cells(); ++c) {
      const Vec2 x = m.grid.center(c);
      const std::size_t k = m.index(b, c);
      out << ts << ',' << format_double(x.x) << ',' << format_double(x.y) << ',' << b << ','
          << format_double(m.rho[k]) << ',' << format_double(m.velocity[k].x) << ','
          << format_double(m.velocity[k].y) << '\n';
    }
  }
}

namespace {

// Cell count and spacing from sorted distinct centers (h/2, 3h/2, ...).
void axis_from_centers(const std::set<double>& centers, int* n, double* length) {
  *n = static_cast<int>(centers.size());
  const double first = *centers.begin();
  *length = 2.0 * first * *n;
}

}  // namespace

std::vector<MomentField> read_snapshots(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const int ct = t.column("t"), cx = t.column("x"), cy = t.column("y"), cb = t.column("a_bin");
  const int cr = t.column("rho"), cu = t.column("Ux"), cv = t.column("Uy");
  std::set<double> xs, ys;
  std::map<double, std::size_t> times;
  int bins = 0;
  for (const auto& r : t.rows) {
    xs.insert(parse_double(r[cx]));
    ys.insert(parse_double(r[cy]));
    times.emplace(parse_double(r[ct]), times.size());
    bins = std::max(bins, std::stoi(r[cb]) + 1);
  }
  std::vector<MomentField> out;
  if (t.rows.empty()) return out;
  int nx = 0, ny = 0;
  double lx = 0.0, ly = 0.0;
  axis_from_centers(xs, &nx, &lx);
  axis_from_centers(ys, &ny, &ly);
  const Grid2D grid(nx, ny, lx, ly);
  std::map<double, MomentField> fields;
  for (const auto& [time, order] : times) fields.emplace(time, MomentField(time, grid, bins));
  for (const auto& r : t.rows) {
    MomentField& m = fields.at(parse_double(r[ct]));
    const int i = static_cast<int>(std::floor(parse_double(r[cx]) / grid.dx()));
    const int j = static_cast<int>(std::floor(parse_double(r[cy]) / grid.dy()));
    const std::size_t k = m.index(std::stoi(r[cb]), grid.index(i, j));
    m.rho[k] = parse_double(r[cr]);
    m.velocity[k] = {parse_double(r[cu]), parse_double(r[cv])};
  }
  for (auto& [time, m] : fields) out.push_back(std::move(m));
  return out;
}

}  // namespace crowdscale::harness
