#include "malab/field_io.hpp"

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "malab/error.hpp"

namespace malab {

namespace {

constexpr char kMagic[8] = {'M', 'A', 'L', 'A', 'B', 'F', 'L', 'D'};

template <class T>
void put(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& is, const std::filesystem::path& path) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) fail(ErrorKind::Io, "truncated field file " + path.string());
  return v;
}

}  // namespace

void write_field(const std::filesystem::path& path, const ScalarField& field, const std::string& metadata_json) {
  const Grid& g = field.grid();
  nlohmann::json meta = nlohmann::json::parse(metadata_json.empty() ? "{}" : metadata_json);
  meta["domain"] = g.domain().spec();
  std::string text = meta.dump();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorKind::Io, "cannot write " + path.string());
  os.write(kMagic, 8);
  put<std::uint32_t>(os, 1);
  put<std::uint32_t>(os, std::uint32_t(g.dim()));
  for (int k = 0; k < 3; ++k) put<std::uint32_t>(os, std::uint32_t(g.extents()[k]));
  put<double>(os, g.h());
  for (double v : g.bbox_lo()) put<double>(os, v);
  for (double v : g.bbox_hi()) put<double>(os, v);
  put<std::uint32_t>(os, std::uint32_t(text.size()));
  os.write(text.data(), std::streamsize(text.size()));
  auto vals = field.values();
  os.write(reinterpret_cast<const char*>(vals.data()), std::streamsize(vals.size() * sizeof(double)));
  if (!os) fail(ErrorKind::Io, "write failed for " + path.string());
}

FieldFile read_field(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::Io, "cannot open " + path.string());
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0) fail(ErrorKind::Io, path.string() + " is not a field file");
  auto version = get<std::uint32_t>(is, path);
  if (version != 1) fail(ErrorKind::Io, "unsupported field file version " + std::to_string(version));
  auto dim = get<std::uint32_t>(is, path);
  std::array<std::uint32_t, 3> ext{};
  for (auto& e : ext) e = get<std::uint32_t>(is, path);
  double h = get<double>(is, path);
  for (int k = 0; k < 6; ++k) get<double>(is, path);
  auto len = get<std::uint32_t>(is, path);
  std::string text(len, '\0');
  is.read(text.data(), len);
  if (!is) fail(ErrorKind::Io, "truncated metadata in " + path.string());

  nlohmann::json meta = nlohmann::json::parse(text, nullptr, false);
  if (meta.is_discarded() || !meta.contains("domain")) fail(ErrorKind::Io, "bad metadata in " + path.string());
  ConvexDomain domain = ConvexDomain::parse(meta["domain"].get<std::string>());
  if (std::uint32_t(domain.dim()) != dim) fail(ErrorKind::Io, "dimension mismatch in " + path.string());
  auto grid = std::make_shared<const Grid>(domain, h);
  for (int k = 0; k < 3; ++k)
    if (std::uint32_t(grid->extents()[k]) != ext[k]) fail(ErrorKind::Io, "grid extents mismatch in " + path.string());

  std::vector<double> vals(grid->size());
  is.read(reinterpret_cast<char*>(vals.data()), std::streamsize(vals.size() * sizeof(double)));
  if (!is) fail(ErrorKind::Io, "truncated payload in " + path.string());
  return {grid, ScalarField(grid, std::move(vals)), text};
}

void write_field_csv(const std::filesystem::path& path, const ScalarField& field) {
  const Grid& g = field.grid();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) fail(ErrorKind::Io, "cannot write " + path.string());
  os.precision(12);
  os << (g.dim() == 2 ? "x,y,value\n" : "x,y,z,value\n");
  for (Index n : g.inside_nodes()) {
    if (!field.defined(n)) continue;
    Point p = g.position(n);
    os << p[0] << ',' << p[1];
    if (g.dim() == 3) os << ',' << p[2];
    os << ',' << field[n] << '\n';
  }
}

void write_state(const std::filesystem::path& path, const PotentialState& state) {
  nlohmann::json meta;
  meta["kind"] = "potential";
  meta["density"] = state.density.label();
  meta["lambda"] = state.density.lambda();
  meta["Lambda"] = state.density.Lambda();
  meta["residual"] = state.residual;
  meta["newton_iters"] = state.newton_iters;
  write_field(path, state.u, meta.dump());
}

PotentialState read_state(const std::filesystem::path& path) {
  FieldFile file = read_field(path);
  nlohmann::json meta = nlohmann::json::parse(file.metadata);
  if (meta.value("kind", "") != "potential") fail(ErrorKind::Io, path.string() + " does not hold a potential");
  DensitySpec density = DensitySpec::parse(meta.at("density").get<std::string>(), meta.at("lambda").get<double>(),
                                           meta.at("Lambda").get<double>());
  PotentialState s = potential_from_field(std::move(file.values), density);
  s.newton_iters = meta.value("newton_iters", 0);
  return s;
}

}  // namespace malab
