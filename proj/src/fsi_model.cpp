#include "coanda/fsi_model.hpp"

#include <algorithm>
#include <cmath>

#include "coanda/assembly.hpp"
#include "coanda/error.hpp"
#include "fluid_kernel.hpp"

namespace coanda {

const char* to_string(SolidLaw law) { return law == SolidLaw::Linear ? "linear" : "svk"; }

SolidLaw parse_solid_law(const std::string& name) {
  if (name == "linear") return SolidLaw::Linear;
  if (name == "svk") return SolidLaw::Svk;
  throw ConfigError("unknown solid law '" + name + "' (expected linear or svk)");
}

void MaterialParams::validate() const {
  if (!(mu > 0.0)) throw ConfigError("solid shear modulus must be positive");
  if (!(lambda > -mu)) throw ConfigError("solid Lame parameter must exceed -mu");
}

std::pair<double, double> lame_from_E_nu(double young, double poisson) {
  if (!(young > 0.0)) throw ConfigError("Young's modulus must be positive");
  if (poisson >= 0.5) throw ConfigError("Poisson's ratio >= 0.5 is the incompressible limit");
  if (!(poisson > -1.0)) throw ConfigError("Poisson's ratio must exceed -1");
  const double mu = young / (2.0 * (1.0 + poisson));
  const double lambda = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
  return {mu, lambda};
}

std::pair<double, double> E_nu_from_lame(double mu, double lambda) {
  const double young = mu * (3.0 * lambda + 2.0 * mu) / (lambda + mu);
  const double poisson = lambda / (2.0 * (lambda + mu));
  return {young, poisson};
}

Eigen::Matrix2d piola(const Eigen::Matrix2d& h, const MaterialParams& m) {
  const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
  if (m.law == SolidLaw::Linear) {
    const Eigen::Matrix2d eps = 0.5 * (h + h.transpose());
    return m.lambda * eps.trace() * id + 2.0 * m.mu * eps;
  }
  const Eigen::Matrix2d f = id + h;
  const Eigen::Matrix2d e = 0.5 * (f.transpose() * f - id);
  return f * (m.lambda * e.trace() * id + 2.0 * m.mu * e);
}

Eigen::Matrix2d piola_derivative(const Eigen::Matrix2d& h, const Eigen::Matrix2d& dh, const MaterialParams& m) {
  const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
  if (m.law == SolidLaw::Linear) {
    const Eigen::Matrix2d deps = 0.5 * (dh + dh.transpose());
    return m.lambda * deps.trace() * id + 2.0 * m.mu * deps;
  }
  const Eigen::Matrix2d f = id + h;
  const Eigen::Matrix2d e = 0.5 * (f.transpose() * f - id);
  const Eigen::Matrix2d s = m.lambda * e.trace() * id + 2.0 * m.mu * e;
  const Eigen::Matrix2d de = 0.5 * (dh.transpose() * f + f.transpose() * dh);
  const Eigen::Matrix2d ds = m.lambda * de.trace() * id + 2.0 * m.mu * de;
  return dh * s + f * ds;
}

Kinematics kinematics(const FeSpace& dspace, const Vector& d, std::size_t cell, const std::array<double, 3>& bary) {
  if (dspace.components() != 2) throw Error("kinematics: displacement space must be vector valued");
  if (!dspace.active(cell)) throw Error("kinematics: cell is not in the displacement space");
  const CellMap map(dspace.mesh(), cell);
  double v[6];
  double g[6][2];
  reference_basis(dspace.degree(), bary, v, g);
  Kinematics k;
  k.f.setIdentity();
  const auto nodes = dspace.cell_nodes(cell);
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    const Eigen::Vector2d gp = map.inv_t * Eigen::Vector2d(g[a][0], g[a][1]);
    for (int c = 0; c < 2; ++c) {
      const double da = d[static_cast<Eigen::Index>(dspace.dof(nodes[a], c))];
      k.f(c, 0) += da * gp[0];
      k.f(c, 1) += da * gp[1];
    }
  }
  k.j = k.f.determinant();
  if (!(k.j > 0.0)) throw MeshInversion(cell, k.j);
  k.f_inv = k.f.inverse();
  return k;
}

void FsiParams::validate() const {
  fluid.validate();
  solid.validate();
  if (multiplier_degree != 1 && multiplier_degree != 2) throw ConfigError("multiplier degree must be 1 or 2");
}

double FsiModel::SolidOutputs::delta() const { return std::abs(max_up - max_down); }

namespace {

// Local Jacobian entries per fluid cell: juu, jup, jpu, jud, jpd.
constexpr std::size_t kFluidSlots = 144 + 36 + 36 + 144 + 36;

// Segment basis of degree `deg` evaluated at t, padded to 3 entries.
std::array<double, 3> trace_basis(int deg, double t) {
  std::array<double, 3> v{0.0, 0.0, 0.0};
  segment_basis(deg, t, v.data());
  return v;
}

}  // namespace

FsiModel::FsiModel(const Mesh& mesh, FsiParams params, FlowProbes probes)
    : mesh_(&mesh),
      params_(std::move(params)),
      probes_(probes),
      vf_(mesh, 2, 2, Restriction::Fluid),
      p_(mesh, 1, 1, Restriction::Fluid),
      ds_(mesh, 2, 2, Restriction::Solid),
      lm_(mesh, params_.multiplier_degree, 2, Restriction::Interface),
      locator_(mesh) {
  params_.validate();
  layout_.add("u", vf_.n_dofs());
  layout_.add("p", p_.n_dofs());
  layout_.add("d_f", vf_.n_dofs());
  layout_.add("d_s", ds_.n_dofs());
  layout_.add("l_u", lm_.n_dofs());
  layout_.add("l_d", lm_.n_dofs());
  const std::size_t ou = layout_.offset(kU), op = layout_.offset(kP), odf = layout_.offset(kDf),
                    ods = layout_.offset(kDs), olu = layout_.offset(kLu), old = layout_.offset(kLd);

  dirichlet_.assign(layout_.total(), 0);
  for (auto n : vf_.boundary_nodes(BoundaryTag::Wall))
    for (int c = 0; c < 2; ++c) dirichlet_[ou + vf_.dof(n, c)] = 1;
  for (auto tag : {BoundaryTag::Wall, BoundaryTag::Inlet, BoundaryTag::Outlet})
    for (auto n : vf_.boundary_nodes(tag))
      for (int c = 0; c < 2; ++c) dirichlet_[odf + vf_.dof(n, c)] = 1;
  for (auto n : ds_.boundary_nodes(BoundaryTag::SolidDirichlet))
    for (int c = 0; c < 2; ++c) dirichlet_[ods + ds_.dof(n, c)] = 1;
  // With matched (P2) traces a multiplier node whose constrained values are
  // already fixed strongly would give an empty constraint: eliminate it.
  if (params_.multiplier_degree == 2) {
    for (auto e : lm_.facet_edges()) {
      const auto ln = lm_.edge_nodes(e);
      const auto fn = vf_.edge_nodes(e);
      const auto sn = ds_.edge_nodes(e);
      for (int i = 0; i < 3; ++i)
        for (int c = 0; c < 2; ++c) {
          if (dirichlet_[ou + vf_.dof(fn[i], c)]) dirichlet_[olu + lm_.dof(ln[i], c)] = 1;
          if (dirichlet_[odf + vf_.dof(fn[i], c)] && dirichlet_[ods + ds_.dof(sn[i], c)])
            dirichlet_[old + lm_.dof(ln[i], c)] = 1;
        }
    }
  }

  // Constant operator: harmonic extension and interface coupling.
  std::vector<Eigen::Triplet<double, int>> trip;
  const SparseMatrix ext = stiffness_matrix(vf_);
  for (int k = 0; k < ext.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(ext, k); it; ++it)
      trip.emplace_back(static_cast<int>(odf + it.row()), static_cast<int>(odf + it.col()), it.value());

  const int ml = params_.multiplier_degree + 1;
  const auto& lr = line_rule(params_.multiplier_degree + 2);
  for (auto e : lm_.facet_edges()) {
    const double len = mesh.edge_length(e);
    Eigen::Matrix<double, 3, 3> b = Eigen::Matrix<double, 3, 3>::Zero();  // (eta_i, phi_j)
    for (std::size_t q = 0; q < lr.size(); ++q) {
      const auto eta = trace_basis(params_.multiplier_degree, lr.points[q]);
      const auto phi = trace_basis(2, lr.points[q]);
      for (int i = 0; i < ml; ++i)
        for (int j = 0; j < 3; ++j) b(i, j) += lr.weights[q] * len * eta[i] * phi[j];
    }
    const auto ln = lm_.edge_nodes(e);
    const auto fn = vf_.edge_nodes(e);
    const auto sn = ds_.edge_nodes(e);
    for (int i = 0; i < ml; ++i)
      for (int j = 0; j < 3; ++j)
        for (int c = 0; c < 2; ++c) {
          const int lu = static_cast<int>(olu + lm_.dof(ln[i], c));
          const int ld = static_cast<int>(old + lm_.dof(ln[i], c));
          const int uf = static_cast<int>(ou + vf_.dof(fn[j], c));
          const int df = static_cast<int>(odf + vf_.dof(fn[j], c));
          const int dsj = static_cast<int>(ods + ds_.dof(sn[j], c));
          const double v = b(i, j);
          trip.emplace_back(uf, lu, v);
          trip.emplace_back(lu, uf, v);
          trip.emplace_back(dsj, lu, -v);
          trip.emplace_back(df, ld, v);
          trip.emplace_back(ld, df, v);
          trip.emplace_back(ld, dsj, -v);
        }
  }
  linear_.resize(static_cast<Eigen::Index>(layout_.total()), static_cast<Eigen::Index>(layout_.total()));
  linear_.setFromTriplets(trip.begin(), trip.end());
  linear_.makeCompressed();

  PatternBuilder pb(layout_.total(), layout_.total());
  std::vector<std::size_t> ud, pd, dd, sd;
  for (auto c : vf_.cells()) {
    cell_dofs(vf_, c, ou, ud);
    cell_dofs(p_, c, op, pd);
    cell_dofs(vf_, c, odf, dd);
    pb.add(ud, ud);
    pb.add(ud, pd);
    pb.add(pd, ud);
    pb.add(ud, dd);
    pb.add(pd, dd);
  }
  for (auto c : ds_.cells()) {
    cell_dofs(ds_, c, ods, sd);
    pb.add(sd, sd);
  }
  for (int k = 0; k < linear_.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(linear_, k); it; ++it) {
      const std::size_t r = static_cast<std::size_t>(it.row());
      const std::size_t cc = static_cast<std::size_t>(it.col());
      pb.add(std::span<const std::size_t>(&r, 1), std::span<const std::size_t>(&cc, 1));
    }
  pb.add_diagonal();
  pattern_ = pb.build();
  linear_slots_.reserve(static_cast<std::size_t>(linear_.nonZeros()));
  for (int k = 0; k < linear_.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(linear_, k); it; ++it)
      linear_slots_.push_back(
          pattern_index(pattern_, static_cast<std::size_t>(it.row()), static_cast<std::size_t>(it.col())));

  for (auto c : vf_.cells()) {
    cell_dofs(vf_, c, ou, ud);
    cell_dofs(p_, c, op, pd);
    cell_dofs(vf_, c, odf, dd);
    scatter_slots(pattern_, ud, ud, fluid_slots_);
    scatter_slots(pattern_, ud, pd, fluid_slots_);
    scatter_slots(pattern_, pd, ud, fluid_slots_);
    scatter_slots(pattern_, ud, dd, fluid_slots_);
    scatter_slots(pattern_, pd, dd, fluid_slots_);
  }
  for (auto c : ds_.cells()) {
    cell_dofs(ds_, c, ods, sd);
    scatter_slots(pattern_, sd, sd, solid_slots_);
  }

  for (const auto& f : mesh.facets())
    if (f.tag == BoundaryTag::Inlet || f.tag == BoundaryTag::Outlet) neumann_edges_.push_back(f.edge);

  const double ymid = 0.5 * (mesh.ymin() + mesh.ymax());
  upper_solid_.resize(ds_.n_nodes());
  for (std::size_t n = 0; n < ds_.n_nodes(); ++n) upper_solid_[n] = ds_.node_point(n).y > ymid ? 1 : 0;

  if (mesh.is_mirror_symmetric()) {
    symmetric_ = true;
    vf_mirror_ = mirror_nodes(vf_);
    p_mirror_ = mirror_nodes(p_);
    ds_mirror_ = mirror_nodes(ds_);
    lm_mirror_ = mirror_nodes(lm_);
  }
}

FsiModel::~FsiModel() = default;

std::string FsiModel::label() const { return std::string("fsi-") + to_string(params_.solid.law); }

Vector FsiModel::block(const Vector& x, std::size_t b) const {
  return x.segment(static_cast<Eigen::Index>(layout_.offset(b)), static_cast<Eigen::Index>(layout_.size(b)));
}

void FsiModel::evaluate(const Vector& x_in, double mu, Vector* residual, Jacobian* jacobian) const {
  if (!(mu > 0.0)) throw Error("FsiModel: viscosity must be positive");
  if (static_cast<std::size_t>(x_in.size()) != layout_.total()) throw Error("FsiModel: state has wrong length");
  Vector x = x_in;
  for (std::size_t i = 0; i < dirichlet_.size(); ++i)
    if (dirichlet_[i]) x[static_cast<Eigen::Index>(i)] = 0.0;

  const std::size_t ou = layout_.offset(kU), op = layout_.offset(kP), odf = layout_.offset(kDf),
                    ods = layout_.offset(kDs);
  const auto& rule = triangle_rule(params_.fluid.quad_order);
  const Tabulation t2(2, rule);
  const Tabulation t1(1, rule);
  const detail::FluidCoeffs k{params_.fluid.rho, mu, params_.fluid.convection};
  const bool want_j = jacobian != nullptr;

  Vector f = linear_ * x;
  SparseMatrix j;
  if (want_j) {
    j = pattern_;
    double* val = j.valuePtr();
    std::fill(val, val + j.nonZeros(), 0.0);
    const double* lv = linear_.valuePtr();
    for (std::size_t i = 0; i < linear_slots_.size(); ++i) val[linear_slots_[i]] += lv[i];
  }

  // Fluid cells.
  const auto& cells = vf_.cells();
  constexpr std::size_t chunk = 2048;
  std::vector<detail::FluidLocal> local(std::min(chunk, cells.size()));
  static_assert(sizeof(detail::FluidLocal::juu) + sizeof(detail::FluidLocal::jup) + sizeof(detail::FluidLocal::jpu) +
                    sizeof(detail::FluidLocal::jud) + sizeof(detail::FluidLocal::jpd) ==
                kFluidSlots * sizeof(double));
  std::vector<std::size_t> ud, pd, dd;
  for (std::size_t start = 0; start < cells.size(); start += chunk) {
    const std::size_t n = std::min(chunk, cells.size() - start);
    parallel_for(n, [&](std::size_t i) {
      const std::size_t c = cells[start + i];
      double uc[12];
      double dc[12];
      double pc[3];
      const auto un = vf_.cell_nodes(c);
      const auto pn = p_.cell_nodes(c);
      for (int a = 0; a < 6; ++a)
        for (int cc = 0; cc < 2; ++cc) {
          const std::size_t dof = vf_.dof(un[a], cc);
          uc[2 * a + cc] = x[static_cast<Eigen::Index>(ou + dof)];
          dc[2 * a + cc] = x[static_cast<Eigen::Index>(odf + dof)];
        }
      for (int a = 0; a < 3; ++a) pc[a] = x[static_cast<Eigen::Index>(op + pn[a])];
      detail::fluid_cell(c, rule, t2, t1, CellMap(*mesh_, c), uc, pc, dc, k, want_j, local[i]);
    });
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = cells[start + i];
      cell_dofs(vf_, c, ou, ud);
      cell_dofs(p_, c, op, pd);
      cell_dofs(vf_, c, odf, dd);
      for (int a = 0; a < 12; ++a) f[static_cast<Eigen::Index>(ud[a])] += local[i].ru[a];
      for (int a = 0; a < 3; ++a) f[static_cast<Eigen::Index>(pd[a])] += local[i].rp[a];
      if (want_j) {
        const int* slot = fluid_slots_.data() + (start + i) * kFluidSlots;
        slot = scatter_add_at(j.valuePtr(), slot, local[i].juu);
        slot = scatter_add_at(j.valuePtr(), slot, local[i].jup);
        slot = scatter_add_at(j.valuePtr(), slot, local[i].jpu);
        slot = scatter_add_at(j.valuePtr(), slot, local[i].jud);
        scatter_add_at(j.valuePtr(), slot, local[i].jpd);
      }
    }
  }

  // Solid cells: int P(grad d_s) : grad w.
  const auto& srule = triangle_rule(params_.solid_quad_order);
  const Tabulation ts(2, srule);
  const MaterialParams& mat = params_.solid;
  std::vector<std::size_t> sd;
  BasisAt b;
  Eigen::Matrix<double, 12, 1> rs;
  Eigen::Matrix<double, 12, 12> js;
  const int* solid_slot = solid_slots_.data();
  for (auto c : ds_.cells()) {
    const CellMap map(*mesh_, c);
    cell_dofs(ds_, c, ods, sd);
    rs.setZero();
    if (want_j) js.setZero();
    for (std::size_t q = 0; q < srule.size(); ++q) {
      physical_basis(ts, q, map, b);
      const double w = srule.weights[q] * std::abs(map.det);
      Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
      for (int a = 0; a < 6; ++a)
        for (int cc = 0; cc < 2; ++cc) {
          const double da = x[static_cast<Eigen::Index>(sd[2 * a + cc])];
          h(cc, 0) += da * b.g[a][0];
          h(cc, 1) += da * b.g[a][1];
        }
      const Eigen::Matrix2d pk = piola(h, mat);
      for (int i = 0; i < 6; ++i)
        for (int cc = 0; cc < 2; ++cc) rs[2 * i + cc] += w * (pk(cc, 0) * b.g[i][0] + pk(cc, 1) * b.g[i][1]);
      if (!want_j) continue;
      for (int jj = 0; jj < 6; ++jj)
        for (int g = 0; g < 2; ++g) {
          Eigen::Matrix2d dh = Eigen::Matrix2d::Zero();
          dh(g, 0) = b.g[jj][0];
          dh(g, 1) = b.g[jj][1];
          const Eigen::Matrix2d dp = piola_derivative(h, dh, mat);
          for (int i = 0; i < 6; ++i)
            for (int cc = 0; cc < 2; ++cc)
              js(2 * i + cc, 2 * jj + g) += w * (dp(cc, 0) * b.g[i][0] + dp(cc, 1) * b.g[i][1]);
        }
    }
    for (int a = 0; a < 12; ++a) f[static_cast<Eigen::Index>(sd[a])] += rs[a];
    if (want_j) solid_slot = scatter_add_at(j.valuePtr(), solid_slot, js);
  }

  // Inlet and outlet stress data on the reference boundary (d_f = 0 there).
  const auto& lr = line_rule(6);
  for (auto e : neumann_edges_) {
    const auto [c, le] = vf_.side_of_edge(e);
    const BoundaryTag tag = mesh_->facets()[mesh_->facet_of_edge(e)].tag;
    const Point nrm = mesh_->facet_normal(e, c);
    const double len = mesh_->edge_length(e);
    const CellMap map(*mesh_, c);
    cell_dofs(vf_, c, ou, ud);
    for (std::size_t q = 0; q < lr.size(); ++q) {
      std::array<double, 3> bary{0.0, 0.0, 0.0};
      bary[static_cast<std::size_t>(le)] = 1.0 - lr.points[q];
      bary[static_cast<std::size_t>((le + 1) % 3)] = lr.points[q];
      double t[2];
      if (params_.fluid.traction) {
        params_.fluid.traction(map.map(bary), nrm, tag, t);
      } else {
        const double pb = tag == BoundaryTag::Inlet ? params_.fluid.p_in : params_.fluid.p_out;
        t[0] = -pb * nrm.x;
        t[1] = -pb * nrm.y;
      }
      double v[6];
      reference_basis(2, bary, v, nullptr);
      const double w = lr.weights[q] * len;
      for (int a = 0; a < 6; ++a)
        for (int cc = 0; cc < 2; ++cc) f[static_cast<Eigen::Index>(ud[2 * a + cc])] -= w * t[cc] * v[a];
    }
  }

  for (std::size_t i = 0; i < dirichlet_.size(); ++i)
    if (dirichlet_[i]) f[static_cast<Eigen::Index>(i)] = x_in[static_cast<Eigen::Index>(i)];
  if (residual) *residual = std::move(f);
  if (want_j) {
    apply_dirichlet(j, dirichlet_);
    *jacobian = std::move(j);
  }
}

void FsiModel::check_admissible(const Vector& x) const {
  const std::size_t odf = layout_.offset(kDf);
  const auto& rule = triangle_rule(params_.fluid.quad_order);
  const Tabulation t2(2, rule);
  for (auto c : vf_.cells()) {
    const CellMap map(*mesh_, c);
    const auto nodes = vf_.cell_nodes(c);
    BasisAt b;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      physical_basis(t2, q, map, b);
      Eigen::Matrix2d f = Eigen::Matrix2d::Identity();
      for (int a = 0; a < 6; ++a)
        for (int cc = 0; cc < 2; ++cc) {
          const std::size_t i = odf + vf_.dof(nodes[a], cc);
          const double da = dirichlet_[i] ? 0.0 : x[static_cast<Eigen::Index>(i)];
          f(cc, 0) += da * b.g[a][0];
          f(cc, 1) += da * b.g[a][1];
        }
      const double jac = f.determinant();
      if (!(jac > 0.0)) throw MeshInversion(c, jac);
    }
  }
}

std::optional<Vector> FsiModel::reflect(const Vector& x) const {
  if (!symmetric_) return std::nullopt;
  Vector out(x.size());
  auto put = [&](std::size_t b, const FeSpace& s, const std::vector<std::size_t>& m) {
    out.segment(static_cast<Eigen::Index>(layout_.offset(b)), static_cast<Eigen::Index>(layout_.size(b))) =
        reflect_field(s, m, block(x, b));
  };
  put(kU, vf_, vf_mirror_);
  put(kP, p_, p_mirror_);
  put(kDf, vf_, vf_mirror_);
  put(kDs, ds_, ds_mirror_);
  put(kLu, lm_, lm_mirror_);
  put(kLd, lm_, lm_mirror_);
  return out;
}

std::optional<Vector> FsiModel::antisymmetric_seed() const {
  Vector s = Vector::Zero(static_cast<Eigen::Index>(layout_.total()));
  s.segment(static_cast<Eigen::Index>(layout_.offset(kU)), static_cast<Eigen::Index>(vf_.n_dofs())) =
      antisymmetric_velocity(vf_, probes_);
  for (std::size_t i = 0; i < dirichlet_.size(); ++i)
    if (dirichlet_[i]) s[static_cast<Eigen::Index>(i)] = 0.0;
  return s;
}

FsiModel::SolidOutputs FsiModel::solid_outputs(const Vector& x) const {
  SolidOutputs o;
  const std::size_t ods = layout_.offset(kDs);
  for (std::size_t n = 0; n < ds_.n_nodes(); ++n) {
    const double m = std::hypot(x[static_cast<Eigen::Index>(ods + ds_.dof(n, 0))],
                                x[static_cast<Eigen::Index>(ods + ds_.dof(n, 1))]);
    double& target = upper_solid_[n] ? o.max_up : o.max_down;
    target = std::max(target, m);
  }
  return o;
}

std::pair<double, double> FsiModel::pressure_drops(const Vector& x) const {
  return probe_pressure_drops(p_, locator_, block(x, kP), probes_);
}

std::pair<double, double> FsiModel::interface_defects(const Vector& x) const {
  const auto& lr = line_rule(4);
  const std::size_t ou = layout_.offset(kU), odf = layout_.offset(kDf), ods = layout_.offset(kDs);
  double eu = 0.0;
  double ed = 0.0;
  for (auto e : lm_.facet_edges()) {
    const double len = mesh_->edge_length(e);
    const auto fn = vf_.edge_nodes(e);
    const auto sn = ds_.edge_nodes(e);
    for (std::size_t q = 0; q < lr.size(); ++q) {
      const auto phi = trace_basis(2, lr.points[q]);
      for (int c = 0; c < 2; ++c) {
        double u = 0.0;
        double jump = 0.0;
        for (int a = 0; a < 3; ++a) {
          u += phi[a] * x[static_cast<Eigen::Index>(ou + vf_.dof(fn[a], c))];
          jump += phi[a] * (x[static_cast<Eigen::Index>(odf + vf_.dof(fn[a], c))] -
                            x[static_cast<Eigen::Index>(ods + ds_.dof(sn[a], c))]);
        }
        eu += lr.weights[q] * len * u * u;
        ed += lr.weights[q] * len * jump * jump;
      }
    }
  }
  return {std::sqrt(eu), std::sqrt(ed)};
}

Outputs FsiModel::outputs(const Vector& x, double mu) const {
  Outputs o = flow_outputs(vf_, p_, locator_, block(x, kU), block(x, kP), probes_, mu);
  const SolidOutputs s = solid_outputs(x);
  o["dmax_up"] = s.max_up;
  o["dmax_down"] = s.max_down;
  o["delta_d"] = s.delta();
  return o;
}

}  // namespace coanda
