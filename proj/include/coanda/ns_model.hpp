#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "coanda/fe_space.hpp"
#include "coanda/model.hpp"

namespace coanda {

struct NsParams {
  double rho = 1.0;     ///< g/cm^3
  double p_in = 450.0;  ///< Ba
  double p_out = 0.0;   ///< Ba
  bool convection = true;
  int quad_order = 4;
  /// Body force density f (momentum residual gets -f . v); unset means zero.
  std::function<void(const Point&, double*)> body_force;
  /// Prescribed traction sigma n on inlet/outlet facets; unset means -p_in n / -p_out n.
  std::function<void(const Point&, const Point& normal, BoundaryTag, double*)> traction;

  void validate() const;
};

/// Probe locations of the scalar outputs.
struct FlowProbes {
  Point uy_point{14.0, 3.75};
  double section_x = 6.0;
  double section_lo = 2.5;
  double section_hi = 5.0;
  int section_samples = 101;
  double char_length = 2.5;
  Point p_up_in{4.5, 6.0};
  Point p_up_out{6.5, 6.0};
  Point p_down_in{4.5, 1.0};
  Point p_down_out{6.5, 1.0};

  static FlowProbes from(const ChannelGeometry& g);
};

struct ProfileSample {
  double y = 0.0;
  double speed = 0.0;
};

struct Profile {
  std::vector<ProfileSample> samples;
  double max_speed = 0.0;  ///< U
};

/// Re = U L / mu.
double reynolds(double speed, double length, double mu);

/// Output helpers on a velocity field u (P2, 2 components) and pressure p.
double probe_uy(const FeSpace& uspace, const PointLocator& locator, const Vector& u, const FlowProbes& probes);
Profile section_profile(const FeSpace& uspace, const PointLocator& locator, const Vector& u,
                        const FlowProbes& probes, int n_samples);
std::pair<double, double> probe_pressure_drops(const FeSpace& pspace, const PointLocator& locator,
                                               const Vector& p, const FlowProbes& probes);
/// uy, U, Re, dp_up, dp_down.
Outputs flow_outputs(const FeSpace& uspace, const FeSpace& pspace, const PointLocator& locator,
                     const Vector& u, const Vector& p, const FlowProbes& probes, double mu);

/// Antisymmetric vertical-velocity bump centred upstream of the u_y probe.
Vector antisymmetric_velocity(const FeSpace& uspace, const FlowProbes& probes);

/// Steady incompressible Navier-Stokes on the fluid cells with Taylor-Hood
/// elements. Blocks: u (P2, 2 components), p (P1). No-slip on walls (and on
/// the FSI interface when the mesh has solid cells), stress data on inlet
/// and outlet. The continuation parameter is the kinematic viscosity.
class NsModel : public Model {
 public:
  NsModel(const Mesh& mesh, NsParams params, FlowProbes probes = {});
  ~NsModel() override;

  const BlockLayout& layout() const override { return layout_; }
  void evaluate(const Vector& x, double mu, Vector* residual, Jacobian* jacobian) const override;
  std::optional<Vector> reflect(const Vector& x) const override;
  std::optional<Vector> antisymmetric_seed() const override;
  Outputs outputs(const Vector& x, double mu) const override;
  std::string label() const override { return "ns"; }
  std::vector<const FeSpace*> block_spaces() const override { return {&u_, &p_}; }
  const std::vector<char>* constrained() const override { return &dirichlet_; }

  const Mesh& mesh() const { return *mesh_; }
  const FeSpace& velocity_space() const { return u_; }
  const FeSpace& pressure_space() const { return p_; }
  const NsParams& params() const { return params_; }
  const FlowProbes& probes() const { return probes_; }
  const PointLocator& locator() const { return locator_; }
  const std::vector<char>& dirichlet_mask() const { return dirichlet_; }

  double output_uy(const Vector& x) const;
  Profile expansion_profile(const Vector& x, int n_samples) const;
  std::pair<double, double> pressure_drops(const Vector& x) const;
  /// Integral of u . n over the facets carrying `tag`.
  double boundary_flux(const Vector& x, BoundaryTag tag) const;

 private:
  const Mesh* mesh_;
  NsParams params_;
  FlowProbes probes_;
  FeSpace u_;
  FeSpace p_;
  BlockLayout layout_;
  PointLocator locator_;
  std::vector<char> dirichlet_;
  SparseMatrix pattern_;
  std::vector<std::size_t> neumann_edges_;
  std::vector<std::size_t> u_mirror_;
  std::vector<std::size_t> p_mirror_;
  bool symmetric_ = false;
};

}  // namespace coanda
