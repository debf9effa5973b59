#include "coanda/ns_model.hpp"

#include <algorithm>
#include <cmath>

#include "coanda/assembly.hpp"
#include "coanda/error.hpp"
#include "fluid_kernel.hpp"

namespace coanda {

void NsParams::validate() const {
  if (!(rho > 0.0)) throw ConfigError("fluid density must be positive");
}

FlowProbes FlowProbes::from(const ChannelGeometry& g) {
  FlowProbes p;
  p.uy_point = {14.0, 0.5 * g.height};
  p.section_x = g.expansion_x;
  p.section_lo = g.throat_lo;
  p.section_hi = g.throat_hi;
  p.char_length = g.throat_width();
  return p;
}

double reynolds(double speed, double length, double mu) {
  if (!(mu > 0.0)) throw Error("reynolds: viscosity must be positive");
  return speed * length / mu;
}

NsModel::NsModel(const Mesh& mesh, NsParams params, FlowProbes probes)
    : mesh_(&mesh),
      params_(std::move(params)),
      probes_(probes),
      u_(mesh, 2, 2, Restriction::Fluid),
      p_(mesh, 1, 1, Restriction::Fluid),
      locator_(mesh) {
  params_.validate();
  layout_.add("u", u_.n_dofs());
  layout_.add("p", p_.n_dofs());
  const std::size_t off_p = layout_.offset(1);

  dirichlet_.assign(layout_.total(), 0);
  for (auto tag : {BoundaryTag::Wall, BoundaryTag::FsiInterface})
    for (auto n : u_.boundary_nodes(tag))
      for (int c = 0; c < 2; ++c) dirichlet_[u_.dof(n, c)] = 1;

  PatternBuilder pb(layout_.total(), layout_.total());
  std::vector<std::size_t> ud;
  std::vector<std::size_t> pd;
  for (auto c : u_.cells()) {
    cell_dofs(u_, c, 0, ud);
    cell_dofs(p_, c, off_p, pd);
    pb.add(ud, ud);
    pb.add(ud, pd);
    pb.add(pd, ud);
  }
  pb.add_diagonal();
  pattern_ = pb.build();

  for (const auto& f : mesh.facets())
    if (f.tag == BoundaryTag::Inlet || f.tag == BoundaryTag::Outlet) neumann_edges_.push_back(f.edge);

  if (mesh.is_mirror_symmetric()) {
    symmetric_ = true;
    u_mirror_ = mirror_nodes(u_);
    p_mirror_ = mirror_nodes(p_);
  }
}

NsModel::~NsModel() = default;

void NsModel::evaluate(const Vector& x_in, double mu, Vector* residual, Jacobian* jacobian) const {
  if (!(mu > 0.0)) throw Error("NsModel: viscosity must be positive");
  if (static_cast<std::size_t>(x_in.size()) != layout_.total()) throw Error("NsModel: state has wrong length");
  Vector x = x_in;
  for (std::size_t i = 0; i < dirichlet_.size(); ++i)
    if (dirichlet_[i]) x[static_cast<Eigen::Index>(i)] = 0.0;

  const std::size_t off_p = layout_.offset(1);
  const auto& rule = triangle_rule(params_.quad_order);
  const Tabulation t2(2, rule);
  const Tabulation t1(1, rule);
  const detail::FluidCoeffs k{params_.rho, mu, params_.convection};
  const bool want_j = jacobian != nullptr;

  Vector f = Vector::Zero(static_cast<Eigen::Index>(layout_.total()));
  SparseMatrix j;
  if (want_j) {
    j = pattern_;
    std::fill(j.valuePtr(), j.valuePtr() + j.nonZeros(), 0.0);
  }

  const auto& cells = u_.cells();
  constexpr std::size_t chunk = 2048;
  std::vector<detail::FluidLocal> local(std::min(chunk, cells.size()));
  std::vector<std::size_t> ud;
  std::vector<std::size_t> pd;
  for (std::size_t start = 0; start < cells.size(); start += chunk) {
    const std::size_t n = std::min(chunk, cells.size() - start);
    parallel_for(n, [&](std::size_t i) {
      const std::size_t c = cells[start + i];
      double uc[12];
      double pc[3];
      const auto un = u_.cell_nodes(c);
      const auto pn = p_.cell_nodes(c);
      for (int a = 0; a < 6; ++a)
        for (int cc = 0; cc < 2; ++cc) uc[2 * a + cc] = x[static_cast<Eigen::Index>(u_.dof(un[a], cc))];
      for (int a = 0; a < 3; ++a) pc[a] = x[static_cast<Eigen::Index>(off_p + pn[a])];
      detail::fluid_cell(c, rule, t2, t1, CellMap(*mesh_, c), uc, pc, nullptr, k, want_j, local[i]);
    });
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = cells[start + i];
      cell_dofs(u_, c, 0, ud);
      cell_dofs(p_, c, off_p, pd);
      for (int a = 0; a < 12; ++a) f[static_cast<Eigen::Index>(ud[a])] += local[i].ru[a];
      for (int a = 0; a < 3; ++a) f[static_cast<Eigen::Index>(pd[a])] += local[i].rp[a];
      if (want_j) {
        scatter_add(j, ud, ud, local[i].juu);
        scatter_add(j, ud, pd, local[i].jup);
        scatter_add(j, pd, ud, local[i].jpu);
      }
    }
  }

  if (params_.body_force) {
    const auto& br = triangle_rule(6);
    const Tabulation tb(2, br);
    for (auto c : cells) {
      const CellMap map(*mesh_, c);
      cell_dofs(u_, c, 0, ud);
      for (std::size_t q = 0; q < br.size(); ++q) {
        double fv[2] = {0.0, 0.0};
        params_.body_force(map.map(br.points[q]), fv);
        const double w = br.weights[q] * std::abs(map.det);
        for (int a = 0; a < 6; ++a)
          for (int cc = 0; cc < 2; ++cc) f[static_cast<Eigen::Index>(ud[2 * a + cc])] -= w * fv[cc] * tb.values[q][a];
      }
    }
  }

  const auto& lr = line_rule(6);
  for (auto e : neumann_edges_) {
    const auto [c, le] = u_.side_of_edge(e);
    const BoundaryTag tag = mesh_->facets()[mesh_->facet_of_edge(e)].tag;
    const Point n = mesh_->facet_normal(e, c);
    const double len = mesh_->edge_length(e);
    const CellMap map(*mesh_, c);
    cell_dofs(u_, c, 0, ud);
    for (std::size_t q = 0; q < lr.size(); ++q) {
      std::array<double, 3> bary{0.0, 0.0, 0.0};
      bary[static_cast<std::size_t>(le)] = 1.0 - lr.points[q];
      bary[static_cast<std::size_t>((le + 1) % 3)] = lr.points[q];
      double t[2];
      if (params_.traction) {
        params_.traction(map.map(bary), n, tag, t);
      } else {
        const double pb = tag == BoundaryTag::Inlet ? params_.p_in : params_.p_out;
        t[0] = -pb * n.x;
        t[1] = -pb * n.y;
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

std::optional<Vector> NsModel::reflect(const Vector& x) const {
  if (!symmetric_) return std::nullopt;
  Vector out(x.size());
  const auto& l = layout_;
  out.segment(0, static_cast<Eigen::Index>(l.size(0))) =
      reflect_field(u_, u_mirror_, x.segment(0, static_cast<Eigen::Index>(l.size(0))));
  out.segment(static_cast<Eigen::Index>(l.offset(1)), static_cast<Eigen::Index>(l.size(1))) =
      reflect_field(p_, p_mirror_, x.segment(static_cast<Eigen::Index>(l.offset(1)), static_cast<Eigen::Index>(l.size(1))));
  return out;
}

std::optional<Vector> NsModel::antisymmetric_seed() const {
  Vector s = Vector::Zero(static_cast<Eigen::Index>(layout_.total()));
  s.head(static_cast<Eigen::Index>(u_.n_dofs())) = antisymmetric_velocity(u_, probes_);
  for (std::size_t i = 0; i < dirichlet_.size(); ++i)
    if (dirichlet_[i]) s[static_cast<Eigen::Index>(i)] = 0.0;
  return s;
}

double NsModel::output_uy(const Vector& x) const {
  return probe_uy(u_, locator_, x.head(static_cast<Eigen::Index>(u_.n_dofs())), probes_);
}

Profile NsModel::expansion_profile(const Vector& x, int n_samples) const {
  return section_profile(u_, locator_, x.head(static_cast<Eigen::Index>(u_.n_dofs())), probes_, n_samples);
}

std::pair<double, double> NsModel::pressure_drops(const Vector& x) const {
  return probe_pressure_drops(p_, locator_, x.segment(static_cast<Eigen::Index>(layout_.offset(1)),
                                                      static_cast<Eigen::Index>(p_.n_dofs())),
                              probes_);
}

double NsModel::boundary_flux(const Vector& x, BoundaryTag tag) const {
  const auto& lr = line_rule(4);
  double flux = 0.0;
  for (const auto& f : mesh_->facets()) {
    if (f.tag != tag) continue;
    const auto [c, le] = u_.side_of_edge(f.edge);
    if (c == npos) continue;
    const Point n = mesh_->facet_normal(f.edge, c);
    const double len = mesh_->edge_length(f.edge);
    const auto nodes = u_.cell_nodes(c);
    for (std::size_t q = 0; q < lr.size(); ++q) {
      std::array<double, 3> bary{0.0, 0.0, 0.0};
      bary[static_cast<std::size_t>(le)] = 1.0 - lr.points[q];
      bary[static_cast<std::size_t>((le + 1) % 3)] = lr.points[q];
      double v[6];
      reference_basis(2, bary, v, nullptr);
      double un = 0.0;
      for (int a = 0; a < 6; ++a)
        un += v[a] * (x[static_cast<Eigen::Index>(u_.dof(nodes[a], 0))] * n.x +
                      x[static_cast<Eigen::Index>(u_.dof(nodes[a], 1))] * n.y);
      flux += lr.weights[q] * len * un;
    }
  }
  return flux;
}

Outputs NsModel::outputs(const Vector& x, double mu) const {
  return flow_outputs(u_, p_, locator_, x.head(static_cast<Eigen::Index>(u_.n_dofs())),
                      x.segment(static_cast<Eigen::Index>(layout_.offset(1)), static_cast<Eigen::Index>(p_.n_dofs())),
                      probes_, mu);
}

double probe_uy(const FeSpace& uspace, const PointLocator& locator, const Vector& u, const FlowProbes& probes) {
  return evaluate_field(uspace, locator, u, probes.uy_point, 1);
}

Profile section_profile(const FeSpace& uspace, const PointLocator& locator, const Vector& u,
                        const FlowProbes& probes, int n_samples) {
  if (n_samples < 2) throw Error("expansion_profile: need at least two samples");
  Profile out;
  for (int i = 0; i < n_samples; ++i) {
    const double y = probes.section_lo + (probes.section_hi - probes.section_lo) * i / (n_samples - 1);
    const Point p{probes.section_x, y};
    const double s = std::hypot(evaluate_field(uspace, locator, u, p, 0), evaluate_field(uspace, locator, u, p, 1));
    out.samples.push_back({y, s});
    out.max_speed = std::max(out.max_speed, s);
  }
  return out;
}

std::pair<double, double> probe_pressure_drops(const FeSpace& pspace, const PointLocator& locator,
                                               const Vector& p, const FlowProbes& probes) {
  auto at = [&](const Point& q) { return evaluate_field(pspace, locator, p, q); };
  return {at(probes.p_up_in) - at(probes.p_up_out), at(probes.p_down_in) - at(probes.p_down_out)};
}

Outputs flow_outputs(const FeSpace& uspace, const FeSpace& pspace, const PointLocator& locator,
                     const Vector& u, const Vector& p, const FlowProbes& probes, double mu) {
  Outputs o;
  o["uy"] = probe_uy(uspace, locator, u, probes);
  const Profile prof = section_profile(uspace, locator, u, probes, probes.section_samples);
  o["U"] = prof.max_speed;
  o["Re"] = reynolds(prof.max_speed, probes.char_length, mu);
  const auto [up, down] = probe_pressure_drops(pspace, locator, p, probes);
  o["dp_up"] = up;
  o["dp_down"] = down;
  return o;
}

Vector antisymmetric_velocity(const FeSpace& uspace, const FlowProbes& probes) {
  const double y0 = uspace.mesh().ymin();
  const double h = uspace.mesh().ymax() - y0;
  const double xc = probes.uy_point.x - 4.0;
  return interpolate(uspace, [&](const Point& p, double* v) {
    v[0] = 0.0;
    v[1] = std::exp(-(p.x - xc) * (p.x - xc) / 32.0) * std::sin(M_PI * (p.y - y0) / h);
  });
}

}  // namespace coanda
