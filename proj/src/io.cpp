#include "coanda/io.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "coanda/error.hpp"

namespace coanda {

namespace {

static_assert(std::endian::native == std::endian::little, "state blobs are written in native little-endian order");

constexpr char kStateMagic[8] = {'C', 'O', 'A', 'N', 'D', 'A', 'S', 'T'};
constexpr std::uint32_t kStateVersion = 1;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw IoError("truncated state file");
  return v;
}

void put_string(std::ostream& os, const std::string& s) {
  put<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& is) {
  std::string s(get<std::uint32_t>(is), '\0');
  is.read(s.data(), static_cast<std::streamsize>(s.size()));
  if (!is) throw IoError("truncated state file");
  return s;
}

double output_or(const Outputs& o, const char* key, double fallback = 0.0) {
  const auto it = o.find(key);
  return it == o.end() ? fallback : it->second;
}

}  // namespace

std::string read_text(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw IoError("cannot read " + file.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& file, const std::string& content) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  auto tmp = file;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot write " + file.string());
    os << content;
    if (!os) throw IoError("failed writing " + file.string());
  }
  std::filesystem::rename(tmp, file);
}

// ---------------------------------------------------------------------------

void write_branch_csv(const std::filesystem::path& file, const Branch& branch) {
  std::vector<std::string> keys;
  for (const auto& r : branch.records)
    for (const auto& [k, v] : r.outputs)
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  std::ostringstream os;
  os << "mu,iterations";
  for (const auto& k : keys) os << ',' << k;
  os << '\n';
  for (const auto& r : branch.records) {
    os << fmt(r.mu) << ',' << r.iterations;
    for (const auto& k : keys) {
      const auto it = r.outputs.find(k);
      os << ',' << (it == r.outputs.end() ? std::string() : fmt(it->second));
    }
    os << '\n';
  }
  write_text(file, os.str());
}

void save_branch(const std::filesystem::path& dir, const Branch& branch) {
  std::filesystem::create_directories(dir);
  write_branch_csv(dir / "branch.csv", branch);
  std::ostringstream os(std::ios::binary);
  os.write(kStateMagic, sizeof kStateMagic);
  put<std::uint32_t>(os, kStateVersion);
  put_string(os, branch.label);
  put_string(os, branch.model);
  put<std::uint64_t>(os, branch.records.size());
  for (const auto& r : branch.records) {
    put<double>(os, r.mu);
    put<std::int32_t>(os, r.iterations);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(r.outputs.size()));
    for (const auto& [k, v] : r.outputs) {
      put_string(os, k);
      put<double>(os, v);
    }
    put<std::uint64_t>(os, static_cast<std::uint64_t>(r.state.size()));
    os.write(reinterpret_cast<const char*>(r.state.data()),
             static_cast<std::streamsize>(static_cast<std::size_t>(r.state.size()) * sizeof(double)));
  }
  write_text(dir / "states.bin", os.str());
}

Branch load_branch(const std::filesystem::path& dir) {
  const auto file = dir / "states.bin";
  std::ifstream is(file, std::ios::binary);
  if (!is) throw IoError("cannot read " + file.string());
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kStateMagic, sizeof magic) != 0) throw IoError(file.string() + " is not a state file");
  if (get<std::uint32_t>(is) != kStateVersion) throw IoError(file.string() + ": unsupported version");
  Branch b;
  b.label = get_string(is);
  b.model = get_string(is);
  const auto n = get<std::uint64_t>(is);
  for (std::uint64_t i = 0; i < n; ++i) {
    BranchRecord r;
    r.mu = get<double>(is);
    r.iterations = get<std::int32_t>(is);
    const auto no = get<std::uint32_t>(is);
    for (std::uint32_t k = 0; k < no; ++k) {
      auto key = get_string(is);
      r.outputs[key] = get<double>(is);
    }
    r.state.resize(static_cast<Eigen::Index>(get<std::uint64_t>(is)));
    is.read(reinterpret_cast<char*>(r.state.data()),
            static_cast<std::streamsize>(static_cast<std::size_t>(r.state.size()) * sizeof(double)));
    if (!is) throw IoError("truncated state file " + file.string());
    b.records.push_back(std::move(r));
  }
  return b;
}

// ---------------------------------------------------------------------------

std::vector<DiagramRecord> diagram(const Branch& branch) {
  std::vector<DiagramRecord> rows;
  double dmax = 0.0;
  for (const auto& r : branch.records) {
    DiagramRecord d;
    d.mu = r.mu;
    d.re = output_or(r.outputs, "Re");
    d.uy = output_or(r.outputs, "uy");
    d.u_mean = output_or(r.outputs, "U");
    d.dmax_up = output_or(r.outputs, "dmax_up");
    d.dmax_down = output_or(r.outputs, "dmax_down");
    d.delta_d = output_or(r.outputs, "delta_d");
    d.dp_up = output_or(r.outputs, "dp_up");
    d.dp_down = output_or(r.outputs, "dp_down");
    d.branch = branch.label;
    d.model = branch.model;
    dmax = std::max(dmax, d.delta_d);
    rows.push_back(d);
  }
  for (auto& d : rows) d.delta_d_hat = dmax > 0.0 ? d.delta_d / dmax : 0.0;
  return rows;
}

void write_diagram_csv(const std::filesystem::path& file, const std::vector<DiagramRecord>& rows, bool solid) {
  std::ostringstream os;
  os << "# coanda-diagram " << kDiagramSchema << '\n';
  os << "mu,Re,uy,U";
  if (solid) os << ",dmax_up,dmax_down,delta_d,delta_d_hat";
  os << ",dp_up,dp_down,branch,model\n";
  for (const auto& d : rows) {
    os << fmt(d.mu) << ',' << fmt(d.re) << ',' << fmt(d.uy) << ',' << fmt(d.u_mean);
    if (solid)
      os << ',' << fmt(d.dmax_up) << ',' << fmt(d.dmax_down) << ',' << fmt(d.delta_d) << ',' << fmt(d.delta_d_hat);
    os << ',' << fmt(d.dp_up) << ',' << fmt(d.dp_down) << ',' << d.branch << ',' << d.model << '\n';
  }
  write_text(file, os.str());
}

// ---------------------------------------------------------------------------

namespace {

struct VtkPiece {
  const FeSpace* space;
  std::size_t point_offset;
};

// P1 values interpolated to the P2 nodes of `space` (edge nodes take the mean).
std::vector<double> p1_on_p2(const FeSpace& p2, const FeSpace& p1, const Vector& p) {
  std::vector<double> out(p2.n_nodes(), 0.0);
  for (const auto c : p2.cells()) {
    const auto n2 = p2.cell_nodes(c);
    const auto n1 = p1.cell_nodes(c);
    double v[3];
    for (int i = 0; i < 3; ++i) v[i] = p[static_cast<Eigen::Index>(n1[static_cast<std::size_t>(i)])];
    for (int i = 0; i < 3; ++i) out[n2[static_cast<std::size_t>(i)]] = v[i];
    for (int i = 0; i < 3; ++i) out[n2[static_cast<std::size_t>(3 + i)]] = 0.5 * (v[i] + v[(i + 1) % 3]);
  }
  return out;
}

void write_cells(std::ostream& os, const std::vector<VtkPiece>& pieces) {
  std::size_t n_cells = 0;
  for (const auto& pc : pieces) n_cells += pc.space->cells().size();
  os << "CELLS " << n_cells << ' ' << n_cells * 7 << '\n';
  for (const auto& pc : pieces)
    for (const auto c : pc.space->cells()) {
      os << 6;
      for (const auto n : pc.space->cell_nodes(c)) os << ' ' << pc.point_offset + n;
      os << '\n';
    }
  os << "CELL_TYPES " << n_cells << '\n';
  for (std::size_t i = 0; i < n_cells; ++i) os << "22\n";  // VTK_QUADRATIC_TRIANGLE
  os << "CELL_DATA " << n_cells << "\nSCALARS region int 1\nLOOKUP_TABLE default\n";
  for (std::size_t k = 0; k < pieces.size(); ++k)
    for (std::size_t i = 0; i < pieces[k].space->cells().size(); ++i) os << k << '\n';
}

void write_header(std::ostream& os, const std::string& title, std::size_t n_points) {
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << n_points << " double\n";
}

void write_vectors(std::ostream& os, const char* name, const std::vector<double>& v) {
  os << "VECTORS " << name << " double\n";
  for (std::size_t i = 0; i + 1 < v.size(); i += 2) os << fmt(v[i]) << ' ' << fmt(v[i + 1]) << " 0\n";
}

void write_scalars(std::ostream& os, const char* name, const std::vector<double>& v) {
  os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (const double x : v) os << fmt(x) << '\n';
}

std::vector<double> copy_of(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

void write_vtk(const std::filesystem::path& file, const NsModel& model, const Vector& x) {
  const auto& us = model.velocity_space();
  const auto nu = static_cast<Eigen::Index>(us.n_dofs());
  std::ostringstream os;
  write_header(os, "coanda " + model.label(), us.n_nodes());
  for (std::size_t n = 0; n < us.n_nodes(); ++n)
    os << fmt(us.node_point(n).x) << ' ' << fmt(us.node_point(n).y) << " 0\n";
  write_cells(os, {{&us, 0}});
  os << "POINT_DATA " << us.n_nodes() << '\n';
  write_vectors(os, "u", copy_of(x.head(nu)));
  write_scalars(os, "p", p1_on_p2(us, model.pressure_space(), x.segment(nu, x.size() - nu)));
  write_text(file, os.str());
}

void write_vtk(const std::filesystem::path& file, const FsiModel& model, const Vector& x, bool deformed) {
  const auto& vf = model.fluid_space();
  const auto& ds = model.solid_space();
  const std::size_t nf = vf.n_nodes();
  const std::size_t n = nf + ds.n_nodes();
  const Vector u = model.block(x, FsiModel::kU);
  const Vector df = model.block(x, FsiModel::kDf);
  const Vector dsol = model.block(x, FsiModel::kDs);

  std::vector<double> uu(2 * n, 0.0), pp(n, 0.0), dd(2 * n, 0.0);
  std::copy(u.data(), u.data() + u.size(), uu.begin());
  const auto pf = p1_on_p2(vf, model.pressure_space(), model.block(x, FsiModel::kP));
  std::copy(pf.begin(), pf.end(), pp.begin());
  std::copy(df.data(), df.data() + df.size(), dd.begin());
  std::copy(dsol.data(), dsol.data() + dsol.size(), dd.begin() + static_cast<std::ptrdiff_t>(2 * nf));

  std::ostringstream os;
  write_header(os, "coanda " + model.label() + (deformed ? " deformed" : " reference"), n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point& q = i < nf ? vf.node_point(i) : ds.node_point(i - nf);
    const double ox = deformed ? dd[2 * i] : 0.0;
    const double oy = deformed ? dd[2 * i + 1] : 0.0;
    os << fmt(q.x + ox) << ' ' << fmt(q.y + oy) << " 0\n";
  }
  write_cells(os, {{&vf, 0}, {&ds, nf}});
  os << "POINT_DATA " << n << '\n';
  write_vectors(os, "u", uu);
  write_scalars(os, "p", pp);
  write_vectors(os, "d", dd);
  write_text(file, os.str());
}

std::vector<Point> read_vtk_points(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw IoError("cannot read " + file.string());
  std::string tok;
  while (is >> tok)
    if (tok == "POINTS") break;
  std::size_t n = 0;
  std::string type;
  if (!(is >> n >> type)) throw IoError(file.string() + ": no POINTS section");
  std::vector<Point> pts(n);
  for (auto& p : pts) {
    double z;
    if (!(is >> p.x >> p.y >> z)) throw IoError(file.string() + ": truncated POINTS section");
  }
  return pts;
}

// ---------------------------------------------------------------------------

std::string git_blob_hash(const std::string& content) {
  const std::string head = "blob " + std::to_string(content.size()) + std::string(1, '\0');
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw Error("cannot allocate a hash context");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, head.data(), head.size()) == 1 &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, md, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw Error("SHA-1 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string git_blob_hash_file(const std::filesystem::path& file) { return git_blob_hash(read_text(file)); }

}  // namespace coanda
