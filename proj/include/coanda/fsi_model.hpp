#pragma once

#include <array>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "coanda/fe_space.hpp"
#include "coanda/model.hpp"
#include "coanda/ns_model.hpp"

namespace coanda {

enum class SolidLaw { Linear, Svk };

const char* to_string(SolidLaw law);
SolidLaw parse_solid_law(const std::string& name);

/// Lame parameters of the leaflets (Ba).
struct MaterialParams {
  double lambda = 8e5;
  double mu = 1e5;
  SolidLaw law = SolidLaw::Linear;

  /// mu > 0 and lambda > -mu.
  void validate() const;
};

/// (mu, lambda) from Young's modulus and Poisson's ratio.
std::pair<double, double> lame_from_E_nu(double young, double poisson);
/// (E, nu) from (mu, lambda).
std::pair<double, double> E_nu_from_lame(double mu, double lambda);

/// First Piola stress for displacement gradient H = grad d_s.
/// Linear: lambda tr(eps) I + 2 mu eps, eps = sym H. SVK: F S with F = I + H.
Eigen::Matrix2d piola(const Eigen::Matrix2d& grad_d, const MaterialParams& m);
/// Directional derivative of piola() at grad_d along dgrad.
Eigen::Matrix2d piola_derivative(const Eigen::Matrix2d& grad_d, const Eigen::Matrix2d& dgrad,
                                 const MaterialParams& m);

struct Kinematics {
  Eigen::Matrix2d f;
  Eigen::Matrix2d f_inv;
  double j = 1.0;
};

/// F = I + grad d_f at barycentric point `bary` of `cell`. Throws MeshInversion when J <= 0.
Kinematics kinematics(const FeSpace& dspace, const Vector& d, std::size_t cell,
                      const std::array<double, 3>& bary);

struct FsiParams {
  NsParams fluid;
  MaterialParams solid;
  int solid_quad_order = 4;
  int multiplier_degree = 2;

  void validate() const;
};

/// Steady monolithic ALE fluid-structure system on an fsi mesh.
///
/// Blocks: u (P2 fluid), p (P1 fluid), d_f (P2 fluid), d_s (P2 solid),
/// l_u and l_d (interface multipliers). The interface terms are
///   u rows   + int l_u . v        l_u rows  int u . eta
///   d_s rows - int l_u . w        l_d rows  int (d_f - d_s) . eta
///   d_f rows + int l_d . e
/// so the multiplier l_u carries the traction exchanged by fluid and solid.
class FsiModel : public Model {
 public:
  FsiModel(const Mesh& mesh, FsiParams params, FlowProbes probes = {});
  ~FsiModel() override;

  const BlockLayout& layout() const override { return layout_; }
  void evaluate(const Vector& x, double mu, Vector* residual, Jacobian* jacobian) const override;
  void check_admissible(const Vector& x) const override;
  std::optional<Vector> reflect(const Vector& x) const override;
  std::optional<Vector> antisymmetric_seed() const override;
  /// Flow outputs plus dmax_up, dmax_down and delta_d.
  Outputs outputs(const Vector& x, double mu) const override;
  std::string label() const override;
  std::vector<const FeSpace*> block_spaces() const override { return {&vf_, &p_, &vf_, &ds_, &lm_, &lm_}; }
  const std::vector<char>* constrained() const override { return &dirichlet_; }

  const Mesh& mesh() const { return *mesh_; }
  const FsiParams& params() const { return params_; }
  /// Space shared by u and d_f.
  const FeSpace& fluid_space() const { return vf_; }
  const FeSpace& pressure_space() const { return p_; }
  const FeSpace& solid_space() const { return ds_; }
  const FeSpace& multiplier_space() const { return lm_; }
  const std::vector<char>& dirichlet_mask() const { return dirichlet_; }

  Vector block(const Vector& x, std::size_t b) const;

  struct SolidOutputs {
    double max_up = 0.0;
    double max_down = 0.0;
    double delta() const;
  };
  SolidOutputs solid_outputs(const Vector& x) const;
  std::pair<double, double> pressure_drops(const Vector& x) const;
  /// L2(Gamma) norms of u and of d_f - d_s on the interface.
  std::pair<double, double> interface_defects(const Vector& x) const;

  static constexpr std::size_t kU = 0, kP = 1, kDf = 2, kDs = 3, kLu = 4, kLd = 5;

 private:
  const Mesh* mesh_;
  FsiParams params_;
  FlowProbes probes_;
  FeSpace vf_;
  FeSpace p_;
  FeSpace ds_;
  FeSpace lm_;
  BlockLayout layout_;
  PointLocator locator_;
  std::vector<char> dirichlet_;
  SparseMatrix pattern_;
  SparseMatrix linear_;                      ///< constant part: extension and interface coupling
  std::vector<std::size_t> linear_slots_;    ///< pattern index of each entry of linear_
  std::vector<int> fluid_slots_;             ///< per fluid cell: juu, jup, jpu, jud, jpd
  std::vector<int> solid_slots_;             ///< per solid cell
  std::vector<std::size_t> neumann_edges_;
  std::vector<char> upper_solid_;           ///< per solid node
  bool symmetric_ = false;
  std::vector<std::size_t> vf_mirror_, p_mirror_, ds_mirror_, lm_mirror_;
};

}  // namespace coanda
