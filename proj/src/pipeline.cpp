#include "coanda/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "coanda/assembly.hpp"
#include "coanda/error.hpp"
#include "coanda/io.hpp"
#include "coanda/mesh_io.hpp"

namespace coanda {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
      throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

template <class T>
void read(const json& j, const std::string& where, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

Point read_point(const json& j, const std::string& where, const char* key, Point p) {
  if (!j.contains(key)) return p;
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
    throw ConfigError(where + "." + key + ": expected [x, y]");
  return {a[0].get<double>(), a[1].get<double>()};
}

json point_json(const Point& p) { return json::array({p.x, p.y}); }

const char* side_name(const std::optional<Side>& s) {
  if (!s) return "none";
  return *s == Side::Upper ? "upper" : "lower";
}

std::vector<BranchConfig> default_branches() {
  return {{"a", Side::Upper, false, false}, {"b", Side::Lower, false, false}, {"c", std::nullopt, true, true}};
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

// Hash of the configuration blocks that determine the mesh.
std::string mesh_key(const RunConfig& c) {
  const json all = json::parse(c.to_json());
  json k;
  k["geometry"] = all["geometry"];
  k["mesh"] = all["mesh"];
  return git_blob_hash(k.dump());
}

json read_json(const fs::path& file) {
  try {
    return json::parse(read_text(file));
  } catch (const json::exception& e) {
    throw IoError(file.string() + ": " + e.what());
  }
}

void write_manifest(const fs::path& dir, const std::string& stage, const RunConfig& c,
                    const std::vector<fs::path>& inputs, const std::vector<fs::path>& outputs, json extra,
                    double wall) {
  json m;
  m["stage"] = stage;
  m["config_hash"] = git_blob_hash(c.to_json());
  json in = json::object(), out = json::object();
  for (const auto& f : inputs) in[f.lexically_relative(dir.parent_path()).generic_string()] = git_blob_hash_file(f);
  for (const auto& f : outputs) out[f.lexically_relative(dir.parent_path()).generic_string()] = git_blob_hash_file(f);
  m["inputs"] = in;
  m["outputs"] = out;
  m["wall_clock_s"] = wall;
  for (auto& [k, v] : extra.items()) m[k] = v;
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

void progress(const std::string& tag, const BranchRecord& r) {
  const auto it = r.outputs.find("uy");
  std::clog << tag << " mu=" << r.mu << " iterations=" << r.iterations
            << " uy=" << (it == r.outputs.end() ? 0.0 : it->second) << '\n';
}

bool is_fsi(const RunConfig& c) { return c.model == "fsi"; }

}  // namespace

// ---------------------------------------------------------------------------

RunConfig RunConfig::parse(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  check_keys(j, "config",
             {"geometry", "mesh", "physics", "probes", "sweep", "newton", "rom", "solve", "output", "threads"});
  if (j.contains("geometry")) {
    const auto& g = j["geometry"];
    check_keys(g, "geometry", {"length", "height", "throat_lo", "throat_hi", "expansion_x", "leaflet_thickness",
                               "leaflet_upstream_x"});
    read(g, "geometry", "length", c.geometry.length);
    read(g, "geometry", "height", c.geometry.height);
    read(g, "geometry", "throat_lo", c.geometry.throat_lo);
    read(g, "geometry", "throat_hi", c.geometry.throat_hi);
    read(g, "geometry", "expansion_x", c.geometry.expansion_x);
    read(g, "geometry", "leaflet_thickness", c.geometry.leaflet_thickness);
    read(g, "geometry", "leaflet_upstream_x", c.geometry.leaflet_upstream_x);
  }
  c.probes = FlowProbes::from(c.geometry);
  if (j.contains("mesh")) {
    const auto& m = j["mesh"];
    check_keys(m, "mesh", {"h_target", "symmetric", "variant", "file"});
    read(m, "mesh", "h_target", c.h_target);
    read(m, "mesh", "symmetric", c.symmetric);
    std::string v = to_string(c.variant);
    read(m, "mesh", "variant", v);
    c.variant = parse_mesh_variant(v);
    read(m, "mesh", "file", c.mesh_file);
  }
  if (j.contains("physics")) {
    const auto& p = j["physics"];
    check_keys(p, "physics", {"model", "rho", "p_in", "p_out", "quad_order", "multiplier_degree", "solid"});
    read(p, "physics", "model", c.model);
    read(p, "physics", "rho", c.fluid.rho);
    read(p, "physics", "p_in", c.fluid.p_in);
    read(p, "physics", "p_out", c.fluid.p_out);
    read(p, "physics", "quad_order", c.fluid.quad_order);
    read(p, "physics", "multiplier_degree", c.multiplier_degree);
    if (p.contains("solid")) {
      const auto& s = p["solid"];
      check_keys(s, "physics.solid", {"law", "lambda", "mu", "E", "nu"});
      std::string law = to_string(c.solid.law);
      read(s, "physics.solid", "law", law);
      c.solid.law = parse_solid_law(law);
      const bool lame = s.contains("lambda") || s.contains("mu");
      const bool young = s.contains("E") || s.contains("nu");
      if (lame && young) throw ConfigError("physics.solid: give either (lambda, mu) or (E, nu)");
      if (young) {
        if (!s.contains("E") || !s.contains("nu")) throw ConfigError("physics.solid: E and nu go together");
        double e = 0, nu = 0;
        read(s, "physics.solid", "E", e);
        read(s, "physics.solid", "nu", nu);
        std::tie(c.solid.mu, c.solid.lambda) = lame_from_E_nu(e, nu);
      } else {
        read(s, "physics.solid", "lambda", c.solid.lambda);
        read(s, "physics.solid", "mu", c.solid.mu);
      }
    }
  }
  if (j.contains("probes")) {
    const auto& p = j["probes"];
    check_keys(p, "probes", {"uy_point", "section_x", "section_lo", "section_hi", "section_samples", "char_length",
                             "p_up_in", "p_up_out", "p_down_in", "p_down_out"});
    c.probes.uy_point = read_point(p, "probes", "uy_point", c.probes.uy_point);
    read(p, "probes", "section_x", c.probes.section_x);
    read(p, "probes", "section_lo", c.probes.section_lo);
    read(p, "probes", "section_hi", c.probes.section_hi);
    read(p, "probes", "section_samples", c.probes.section_samples);
    read(p, "probes", "char_length", c.probes.char_length);
    c.probes.p_up_in = read_point(p, "probes", "p_up_in", c.probes.p_up_in);
    c.probes.p_up_out = read_point(p, "probes", "p_up_out", c.probes.p_up_out);
    c.probes.p_down_in = read_point(p, "probes", "p_down_in", c.probes.p_down_in);
    c.probes.p_down_out = read_point(p, "probes", "p_down_out", c.probes.p_down_out);
  }
  c.branches = default_branches();
  if (j.contains("sweep")) {
    const auto& s = j["sweep"];
    check_keys(s, "sweep",
               {"mu_min", "mu_max", "n_points", "amplitude", "seed_until", "max_bisections", "branches"});
    read(s, "sweep", "mu_min", c.mu_min);
    read(s, "sweep", "mu_max", c.mu_max);
    read(s, "sweep", "n_points", c.n_points);
    read(s, "sweep", "amplitude", c.amplitude);
    read(s, "sweep", "seed_until", c.seed_until);
    read(s, "sweep", "max_bisections", c.max_bisections);
    if (s.contains("branches")) {
      if (!s["branches"].is_array()) throw ConfigError("sweep.branches: expected an array");
      c.branches.clear();
      for (const auto& b : s["branches"]) {
        check_keys(b, "sweep.branches[]", {"label", "side", "direction", "symmetrize"});
        BranchConfig bc;
        read(b, "sweep.branches[]", "label", bc.label);
        std::string side = "none", dir = "decreasing";
        read(b, "sweep.branches[]", "side", side);
        read(b, "sweep.branches[]", "direction", dir);
        read(b, "sweep.branches[]", "symmetrize", bc.symmetrize);
        if (side == "upper") bc.side = Side::Upper;
        else if (side == "lower") bc.side = Side::Lower;
        else if (side != "none") throw ConfigError("sweep.branches[].side: expected upper, lower or none");
        if (dir != "increasing" && dir != "decreasing")
          throw ConfigError("sweep.branches[].direction: expected increasing or decreasing");
        bc.increasing = dir == "increasing";
        c.branches.push_back(bc);
      }
    }
  }
  if (j.contains("newton")) {
    const auto& n = j["newton"];
    check_keys(n, "newton", {"tol_residual", "tol_step", "max_iter", "line_search", "admissibility_guard"});
    read(n, "newton", "tol_residual", c.newton.tol_residual);
    read(n, "newton", "tol_step", c.newton.tol_step);
    read(n, "newton", "max_iter", c.newton.max_iter);
    read(n, "newton", "line_search", c.newton.line_search);
    read(n, "newton", "admissibility_guard", c.newton.admissibility_guard);
  }
  if (j.contains("rom")) {
    const auto& r = j["rom"];
    check_keys(r, "rom", {"n_rb", "n_rb_field", "supremizers", "train_branch", "online_points"});
    read(r, "rom", "n_rb", c.offline.n_rb);
    read(r, "rom", "n_rb_field", c.offline.n_rb_field);
    read(r, "rom", "supremizers", c.offline.supremizers);
    read(r, "rom", "train_branch", c.train_branch);
    read(r, "rom", "online_points", c.online_points);
  }
  if (j.contains("solve")) {
    check_keys(j["solve"], "solve", {"mu"});
    read(j["solve"], "solve", "mu", c.solve_mu);
  }
  if (j.contains("output")) {
    check_keys(j["output"], "output", {"vtk", "deformed"});
    read(j["output"], "output", "vtk", c.vtk);
    read(j["output"], "output", "deformed", c.deformed);
  }
  read(j, "config", "threads", c.threads);
  c.validate();
  return c;
}

RunConfig RunConfig::load(const fs::path& file) {
  if (!fs::exists(file)) throw ConfigError("config file not found: " + file.string());
  auto c = parse(read_text(file));
  if (!c.mesh_file.empty()) {
    fs::path m = c.mesh_file;
    if (m.is_relative()) m = file.parent_path() / m;
    if (!fs::exists(m)) throw ConfigError("mesh.file not found: " + m.string());
    c.mesh_file = m.string();
  }
  return c;
}

void RunConfig::validate() const {
  geometry.validate();
  if (!(h_target > 0.0)) throw ConfigError("mesh.h_target must be positive");
  if (model != "ns" && model != "fsi") throw ConfigError("physics.model must be ns or fsi");
  fluid.validate();
  if (model == "fsi") {
    solid.validate();
    if (multiplier_degree != 1 && multiplier_degree != 2)
      throw ConfigError("physics.multiplier_degree must be 1 or 2");
    if (variant != MeshVariant::Fsi && mesh_file.empty())
      throw ConfigError("physics.model fsi needs mesh.variant fsi");
  }
  if (!(mu_min > 0.0) || !(mu_max > mu_min)) throw ConfigError("sweep: need 0 < mu_min < mu_max");
  if (n_points < 2 || online_points < 2) throw ConfigError("sweep: grids need at least two points");
  if (!(seed_until > 0.0)) throw ConfigError("sweep.seed_until must be positive");
  if (max_bisections < 0) throw ConfigError("sweep.max_bisections must be non-negative");
  std::set<std::string> labels;
  for (const auto& b : branches) {
    if (b.label.empty()) throw ConfigError("sweep.branches[]: label is required");
    if (b.label.find_first_of("/\\,. ") != std::string::npos)
      throw ConfigError("sweep.branches[]: label '" + b.label + "' must be a plain name");
    if (!labels.insert(b.label).second) throw ConfigError("sweep.branches[]: duplicate label " + b.label);
  }
  newton.validate();
  if (offline.n_rb < 1) throw ConfigError("rom.n_rb must be at least 1");
  for (const auto& [f, n] : offline.n_rb_field)
    if (n < 1) throw ConfigError("rom.n_rb_field." + f + " must be at least 1");
  if (!(solve_mu > 0.0)) throw ConfigError("solve.mu must be positive");
  if (threads < 1) throw ConfigError("threads must be at least 1");
}

std::string RunConfig::to_json() const {
  json j;
  j["geometry"] = {{"length", geometry.length},
                   {"height", geometry.height},
                   {"throat_lo", geometry.throat_lo},
                   {"throat_hi", geometry.throat_hi},
                   {"expansion_x", geometry.expansion_x},
                   {"leaflet_thickness", geometry.leaflet_thickness},
                   {"leaflet_upstream_x", geometry.leaflet_upstream_x}};
  j["mesh"] = {{"h_target", h_target}, {"symmetric", symmetric}, {"variant", to_string(variant)}, {"file", mesh_file}};
  j["physics"] = {{"model", model},
                  {"rho", fluid.rho},
                  {"p_in", fluid.p_in},
                  {"p_out", fluid.p_out},
                  {"quad_order", fluid.quad_order},
                  {"multiplier_degree", multiplier_degree},
                  {"solid", {{"law", to_string(solid.law)}, {"lambda", solid.lambda}, {"mu", solid.mu}}}};
  j["probes"] = {{"uy_point", point_json(probes.uy_point)},
                 {"section_x", probes.section_x},
                 {"section_lo", probes.section_lo},
                 {"section_hi", probes.section_hi},
                 {"section_samples", probes.section_samples},
                 {"char_length", probes.char_length},
                 {"p_up_in", point_json(probes.p_up_in)},
                 {"p_up_out", point_json(probes.p_up_out)},
                 {"p_down_in", point_json(probes.p_down_in)},
                 {"p_down_out", point_json(probes.p_down_out)}};
  json br = json::array();
  for (const auto& b : branches)
    br.push_back({{"label", b.label},
                  {"side", side_name(b.side)},
                  {"direction", b.increasing ? "increasing" : "decreasing"},
                  {"symmetrize", b.symmetrize}});
  j["sweep"] = {{"mu_min", mu_min},         {"mu_max", mu_max},         {"n_points", n_points},
                {"amplitude", amplitude},   {"seed_until", seed_until}, {"max_bisections", max_bisections},
                {"branches", br}};
  j["newton"] = {{"tol_residual", newton.tol_residual},
                 {"tol_step", newton.tol_step},
                 {"max_iter", newton.max_iter},
                 {"line_search", newton.line_search},
                 {"admissibility_guard", newton.admissibility_guard}};
  json nf = json::object();
  for (const auto& [f, n] : offline.n_rb_field) nf[f] = n;
  j["rom"] = {{"n_rb", offline.n_rb},
              {"n_rb_field", nf},
              {"supremizers", offline.supremizers},
              {"train_branch", train_branch},
              {"online_points", online_points}};
  j["solve"] = {{"mu", solve_mu}};
  j["output"] = {{"vtk", vtk}, {"deformed", deformed}};
  j["threads"] = threads;
  return j.dump(2) + "\n";
}

const BranchConfig& RunConfig::branch(const std::string& label) const {
  for (const auto& b : branches)
    if (b.label == label) return b;
  throw ConfigError("no branch labelled '" + label + "' in the configuration");
}

std::vector<double> RunConfig::grid(int n, bool increasing) const {
  return increasing ? linspace(mu_min, mu_max, n) : linspace(mu_max, mu_min, n);
}

BranchSpec RunConfig::branch_spec(const BranchConfig& b, int n) const {
  BranchSpec s;
  s.mu = grid(n, b.increasing);
  s.label = b.label;
  s.symmetrize = b.symmetrize;
  s.seed_until = seed_until;
  s.max_bisections = max_bisections;
  if (b.side) s = select_branch_side(std::move(s), *b.side, amplitude);
  return s;
}

// ---------------------------------------------------------------------------

Mesh build_mesh(const RunConfig& c) {
  if (!c.mesh_file.empty()) {
    const fs::path f = c.mesh_file;
    return f.extension() == ".msh" ? read_gmsh(f.string()) : read_mesh(f.string());
  }
  return build_channel_mesh(c.geometry, c.h_target, c.variant, c.symmetric);
}

std::unique_ptr<Model> build_model(const RunConfig& c, const Mesh& mesh) {
  if (c.model == "fsi") {
    if (!mesh.has_solid()) throw ConfigError("fsi physics needs a mesh with solid cells (mesh.variant fsi)");
    FsiParams p;
    p.fluid = c.fluid;
    p.solid = c.solid;
    p.multiplier_degree = c.multiplier_degree;
    return std::make_unique<FsiModel>(mesh, p, c.probes);
  }
  return std::make_unique<NsModel>(mesh, c.fluid, c.probes);
}

// ---------------------------------------------------------------------------

Pipeline::Pipeline(RunConfig config, fs::path stage_dir) : config_(std::move(config)), dir_(std::move(stage_dir)) {
  config_.validate();
  set_num_threads(config_.threads);
}

Pipeline::~Pipeline() = default;

void Pipeline::require(const fs::path& artifact, const std::string& stage) const {
  if (!fs::exists(artifact))
    throw ConfigError("missing " + artifact.string() + ": run stage '" + stage + "' first");
}

const Mesh& Pipeline::loaded_mesh() {
  if (!mesh_) {
    const auto file = dir_ / "mesh" / "mesh.txt";
    require(file, "mesh");
    const json m = read_json(dir_ / "mesh" / "manifest.json");
    if (m.value("mesh_key", std::string()) != mesh_key(config_))
      throw ConfigError("the mesh stage was run with a different geometry or mesh block; run stage 'mesh' again");
    mesh_ = std::make_unique<Mesh>(read_mesh(file.string()));
  }
  return *mesh_;
}

const Model& Pipeline::model() {
  if (!model_) model_ = build_model(config_, loaded_mesh());
  return *model_;
}

void Pipeline::mesh() {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path out = dir_ / "mesh";
  fs::create_directories(out);
  Mesh m = build_mesh(config_);
  if (config_.model == "fsi" && !m.has_solid())
    throw ConfigError("fsi physics needs a mesh with solid cells (mesh.variant fsi)");
  std::ostringstream os;
  write_mesh(m, os);
  write_text(out / "mesh.txt", os.str());
  std::vector<fs::path> inputs;
  if (!config_.mesh_file.empty()) inputs.push_back(config_.mesh_file);
  json extra;
  extra["mesh_key"] = mesh_key(config_);
  extra["vertices"] = m.n_vertices();
  extra["cells"] = m.n_cells();
  extra["mirror_symmetric"] = m.is_mirror_symmetric();
  write_manifest(out, "mesh", config_, inputs, {out / "mesh.txt"}, extra, seconds_since(t0));
  mesh_ = std::make_unique<Mesh>(std::move(m));
  model_.reset();
}

void Pipeline::solve(std::optional<double> mu_opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const double mu = mu_opt.value_or(config_.solve_mu);
  if (!(mu > 0.0)) throw ConfigError("solve: mu must be positive");
  const Model& m = model();
  // Continue down from mu_max on the sweep spacing so low-viscosity solves start close.
  BranchSpec spec;
  spec.label = "solve";
  spec.max_bisections = config_.max_bisections;
  const double step = (config_.mu_max - config_.mu_min) / (config_.n_points - 1);
  for (double v = config_.mu_max; v > mu + 0.5 * step; v -= step) spec.mu.push_back(v);
  spec.mu.push_back(mu);
  if (spec.mu.size() > 1 && spec.mu.front() < spec.mu.back()) spec.mu = {mu};
  const Branch b = continuation_sweep(m, spec, config_.newton);
  const auto& rec = b.records.back();

  const fs::path out = dir_ / "solve";
  fs::create_directories(out);
  json o;
  o["mu"] = rec.mu;
  o["iterations"] = rec.iterations;
  o["model"] = m.label();
  json outs = json::object();
  for (const auto& [k, v] : rec.outputs) outs[k] = v;
  o["outputs"] = outs;
  write_text(out / "outputs.json", o.dump(2) + "\n");
  std::vector<fs::path> written{out / "outputs.json"};
  if (config_.vtk) {
    if (const auto* f = dynamic_cast<const FsiModel*>(&m)) write_vtk(out / "solution.vtk", *f, rec.state, config_.deformed);
    else write_vtk(out / "solution.vtk", dynamic_cast<const NsModel&>(m), rec.state);
    written.push_back(out / "solution.vtk");
  }
  write_manifest(out, "solve", config_, {dir_ / "mesh" / "mesh.txt"}, written, json::object(), seconds_since(t0));
}

void Pipeline::sweep(const std::optional<std::string>& only) {
  const Model& m = model();
  const fs::path out = dir_ / "fom";
  fs::create_directories(out);
  json timings = json::object();
  if (fs::exists(out / "manifest.json")) {
    const json old = read_json(out / "manifest.json");
    if (old.contains("branches") && old.value("config_hash", std::string()) == git_blob_hash(config_.to_json()))
      timings = old["branches"];
  }
  const auto t_all = std::chrono::steady_clock::now();
  for (const auto& bc : config_.branches) {
    if (only && bc.label != *only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    const BranchSpec spec = config_.branch_spec(bc, config_.n_points);
    const fs::path bdir = out / bc.label;
    try {
      const Branch b = continuation_sweep(m, spec, config_.newton,
                                          [&](const BranchRecord& r) { progress("fom " + bc.label, r); });
      save_branch(bdir, b);
      write_diagram_csv(bdir / "diagram.csv", diagram(b), is_fsi(config_));
      timings[bc.label] = {{"wall_clock_s", seconds_since(t0)}, {"points", b.records.size()}, {"complete", true}};
    } catch (const PartialBranch& e) {
      save_branch(bdir, e.branch());
      timings[bc.label] = {{"wall_clock_s", seconds_since(t0)}, {"points", e.branch().records.size()}, {"complete", false}};
      write_manifest(out, "fom", config_, {dir_ / "mesh" / "mesh.txt"}, {}, {{"branches", timings}},
                     seconds_since(t_all));
      throw;
    }
  }
  if (only && !timings.contains(*only)) (void)config_.branch(*only);
  std::vector<fs::path> outputs;
  for (const auto& [label, t] : timings.items()) {
    outputs.push_back(out / label / "states.bin");
    outputs.push_back(out / label / "diagram.csv");
  }
  write_manifest(out, "fom", config_, {dir_ / "mesh" / "mesh.txt"}, outputs, {{"branches", timings}},
                 seconds_since(t_all));
}

void Pipeline::offline() {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path train_dir = dir_ / "fom" / config_.train_branch;
  require(train_dir / "states.bin", "sweep");
  const Model& m = model();
  const Branch train = load_branch(train_dir);
  if (train.records.empty()) throw ConfigError("training branch is empty");
  if (!train.records.empty() && static_cast<std::size_t>(train.records.front().state.size()) != m.size())
    throw ConfigError("training branch does not match the model; rerun stage 'sweep'");
  const auto& l = m.layout();
  const auto norms = block_norms(m.block_spaces(), l, *m.constrained());
  const auto bases = build_bases(m, train.records, norms, config_.offline, config_.mu_max);

  const fs::path out = dir_ / "offline";
  fs::create_directories(out);
  std::vector<fs::path> written;
  json fields = json::array();
  for (std::size_t b = 0; b < l.n_blocks(); ++b) {
    const auto f = out / (l.name(b) + ".basis");
    write_basis(f, bases[b]);
    written.push_back(f);
    fields.push_back({{"name", l.name(b)},
                      {"file", f.filename().string()},
                      {"norm", to_string(bases[b].norm)},
                      {"n_dofs", l.size(b)},
                      {"n_pod", bases[b].n_pod},
                      {"n_supremizer", bases[b].n_supremizer}});
  }

  // Normalized singular values and projection error against N, one column per field.
  std::ostringstream sv, pe;
  sv << "n";
  pe << "n";
  for (std::size_t b = 0; b < l.n_blocks(); ++b) {
    sv << ',' << l.name(b);
    pe << ',' << l.name(b);
  }
  sv << '\n';
  pe << '\n';
  std::vector<std::vector<double>> curves;
  for (std::size_t b = 0; b < l.n_blocks(); ++b)
    curves.push_back(projection_errors(bases[b], norms[b], collect_snapshots(m, train.records, l.name(b)),
                                       bases[b].n_pod));
  char buf[32];
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(train.records.size()); ++k) {
    sv << k + 1;
    for (std::size_t b = 0; b < l.n_blocks(); ++b) {
      std::snprintf(buf, sizeof buf, "%.17g", bases[b].sigma_hat[k]);
      sv << ',' << buf;
    }
    sv << '\n';
  }
  int n_max = 0;
  for (const auto& c : curves) n_max = std::max(n_max, static_cast<int>(c.size()));
  for (int n = 0; n < n_max; ++n) {
    pe << n + 1;
    for (const auto& c : curves) {
      if (n < static_cast<int>(c.size())) {
        std::snprintf(buf, sizeof buf, "%.17g", c[static_cast<std::size_t>(n)]);
        pe << ',' << buf;
      } else {
        pe << ',';
      }
    }
    pe << '\n';
  }
  write_text(out / "singular_values.csv", sv.str());
  write_text(out / "projection_errors.csv", pe.str());
  written.push_back(out / "singular_values.csv");
  written.push_back(out / "projection_errors.csv");

  json grid = json::array();
  for (const auto& r : train.records) grid.push_back(r.mu);
  write_manifest(out, "offline", config_, {train_dir / "states.bin"}, written,
                 {{"model", m.label()}, {"train_branch", config_.train_branch}, {"fields", fields}, {"training_grid", grid}},
                 seconds_since(t0));
}

void Pipeline::online(const std::optional<std::string>& only) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path in = dir_ / "offline";
  require(in / "manifest.json", "offline");
  const Model& m = model();
  const auto& l = m.layout();
  const json man = read_json(in / "manifest.json");
  std::vector<PodBasis> bases;
  std::vector<fs::path> inputs;
  for (std::size_t b = 0; b < l.n_blocks(); ++b) {
    const auto f = in / (l.name(b) + ".basis");
    require(f, "offline");
    bases.push_back(read_basis(f));
    inputs.push_back(f);
    if (bases.back().field != l.name(b) || static_cast<std::size_t>(bases.back().v.rows()) != l.size(b))
      throw ConfigError("basis " + f.string() + " does not match the model; rerun stage 'offline'");
  }
  const auto norms = block_norms(m.block_spaces(), l, *m.constrained());
  const ReducedModel rom(m, std::move(bases), norms);

  const fs::path out = dir_ / "online";
  fs::create_directories(out);
  std::vector<fs::path> written;
  const std::string label = only.value_or(config_.train_branch);
  const BranchConfig& bc = config_.branch(label);

  // Reduced sweep on the online grid.
  const auto t_online = std::chrono::steady_clock::now();
  const Branch online = continuation_sweep(rom, config_.branch_spec(bc, config_.online_points), config_.newton,
                                           [&](const BranchRecord& r) { progress("rb " + label, r); });
  const double online_s = seconds_since(t_online);
  fs::create_directories(out / label);
  write_diagram_csv(out / label / "diagram.csv", diagram(online), is_fsi(config_));
  written.push_back(out / label / "diagram.csv");

  // Errors on the training grid against the full-order branch of the same label.
  json extra = {{"branch", label}, {"n_rb_total", rom.size()}, {"online_points", online.records.size()},
                {"online_sweep_s", online_s}};
  const fs::path fom_dir = dir_ / "fom" / label;
  if (fs::exists(fom_dir / "states.bin")) {
    const Branch full = load_branch(fom_dir);
    BranchSpec spec = config_.branch_spec(bc, static_cast<int>(full.records.size()));
    spec.mu.clear();
    for (const auto& r : full.records) spec.mu.push_back(r.mu);
    const auto t_train = std::chrono::steady_clock::now();
    const Branch reduced = continuation_sweep(rom, spec, config_.newton);
    const double train_s = seconds_since(t_train);
    const RomErrors e = rom_errors(rom, full.records, reduced.records);
    std::ostringstream os;
    os << "field,err_proj,err_rb\n";
    char buf[64];
    for (std::size_t b = 0; b < l.n_blocks(); ++b) {
      const auto& fe = e.at(l.name(b));
      std::snprintf(buf, sizeof buf, "%.17g,%.17g", fe.proj, fe.rb);
      os << l.name(b) << ',' << buf << '\n';
    }
    write_text(out / "rom_errors.csv", os.str());
    written.push_back(out / "rom_errors.csv");
    inputs.push_back(fom_dir / "states.bin");
    extra["training_sweep_s"] = train_s;
    const json fm = read_json(dir_ / "fom" / "manifest.json");
    if (fm.contains("branches") && fm["branches"].contains(label)) {
      const double full_s = fm["branches"][label].value("wall_clock_s", 0.0);
      extra["full_sweep_s"] = full_s;
      extra["speedup"] = train_s > 0.0 ? full_s / train_s : 0.0;
    }
  }
  write_manifest(out, "online", config_, inputs, written, extra, seconds_since(t0));
}

void Pipeline::report() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<DiagramRecord> rows;
  std::vector<fs::path> inputs;
  json onsets = json::object();
  for (const auto& bc : config_.branches) {
    const fs::path bdir = dir_ / "fom" / bc.label;
    if (!fs::exists(bdir / "states.bin")) continue;
    const Branch b = load_branch(bdir);
    inputs.push_back(bdir / "states.bin");
    const auto d = diagram(b);
    rows.insert(rows.end(), d.begin(), d.end());
    if (bc.side) {
      const auto mu_star = estimate_onset(b, config_.seed_until);
      json o = json::object();
      if (mu_star) {
        o["mu_star"] = *mu_star;
        // U is continuous through the onset; interpolate it between the records around mu*.
        double u_star = std::nan("");
        for (std::size_t i = 1; i < b.records.size(); ++i) {
          const auto& r0 = b.records[i - 1];
          const auto& r1 = b.records[i];
          if ((r0.mu - *mu_star) * (r1.mu - *mu_star) <= 0.0) {
            const double t = (*mu_star - r0.mu) / (r1.mu - r0.mu);
            u_star = (1.0 - t) * r0.outputs.at("U") + t * r1.outputs.at("U");
            break;
          }
        }
        if (std::isfinite(u_star)) o["re_star"] = reynolds(u_star, config_.probes.char_length, *mu_star);
      }
      onsets[bc.label] = o;
    }
  }
  if (inputs.empty()) throw ConfigError("no full-order branches found: run stage 'sweep' first");
  const fs::path out = dir_ / "report";
  fs::create_directories(out);
  write_diagram_csv(out / "diagram.csv", rows, is_fsi(config_));
  std::vector<fs::path> written{out / "diagram.csv"};
  for (const auto& bc : config_.branches) {
    const fs::path od = dir_ / "online" / bc.label / "diagram.csv";
    if (fs::exists(od)) {
      const auto target = out / ("online_" + bc.label + ".csv");
      write_text(target, read_text(od));
      inputs.push_back(od);
      written.push_back(target);
    }
  }
  json summary = {{"model", model().label()}, {"onsets", onsets}};
  write_text(out / "summary.json", summary.dump(2) + "\n");
  written.push_back(out / "summary.json");
  write_manifest(out, "report", config_, inputs, written, json::object(), seconds_since(t0));
}

}  // namespace coanda
