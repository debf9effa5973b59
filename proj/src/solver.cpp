#include "coanda/solver.hpp"

#include <cmath>
#include <limits>
#include <optional>

namespace coanda {

void NewtonSettings::validate() const {
  if (!(tol_residual > 0.0)) throw ConfigError("newton tolerance must be positive");
  if (max_iter < 1) throw ConfigError("newton max_iter must be at least 1");
  if (tol_step < 0.0) throw ConfigError("newton step tolerance must be non-negative");
}

NewtonWorkspace::NewtonWorkspace() = default;
NewtonWorkspace::~NewtonWorkspace() = default;

Vector NewtonWorkspace::solve(const Jacobian& j, const Vector& rhs) {
  if (const auto* s = std::get_if<SparseMatrix>(&j)) {
    lu_.factorize(*s);
    return lu_.solve(rhs);
  }
  const auto& d = std::get<DenseMatrix>(j);
  Eigen::FullPivLU<DenseMatrix> lu(d);
  if (!lu.isInvertible()) throw SingularMatrix(static_cast<std::ptrdiff_t>(lu.rank()), "reduced Jacobian is singular");
  Vector x = lu.solve(rhs);
  if (!x.allFinite()) throw SingularMatrix(-1, "reduced Jacobian solve is not finite");
  return x;
}

namespace {

Vector symmetric_part(const Model& model, const Vector& x) {
  const auto r = model.reflect(x);
  if (!r) throw Error("symmetrization requested but the model has no reflection");
  return 0.5 * (x + *r);
}

}  // namespace

NewtonResult newton_solve(const Model& model, const Vector& x0, double mu, const NewtonSettings& settings,
                          NewtonWorkspace* workspace) {
  settings.validate();
  NewtonWorkspace local;
  NewtonWorkspace& ws = workspace ? *workspace : local;
  NewtonResult res;
  res.x = settings.symmetrize ? symmetric_part(model, x0) : x0;
  model.check_admissible(res.x);

  Vector f;
  Jacobian j;
  model.evaluate(res.x, mu, &f, &j);
  double r = f.norm();
  res.history.push_back(r);
  bool have_j = true;
  double last_step = std::numeric_limits<double>::infinity();
  auto converged = [&] {
    if (r <= settings.tol_residual) return true;
    return settings.tol_step > 0.0 && res.iterations > 0 && last_step <= settings.tol_step * (1.0 + res.x.norm());
  };

  while (!converged()) {
    if (res.iterations >= settings.max_iter)
      throw NonConvergence("newton: no convergence in " + std::to_string(settings.max_iter) +
                               " iterations (residual " + std::to_string(r) + ")",
                           res.history);
    if (!std::isfinite(r)) throw NonConvergence("newton: residual is not finite", res.history);
    if (!have_j) model.evaluate(res.x, mu, nullptr, &j);
    const Vector dx = ws.solve(j, -f);

    double t = 1.0;
    bool accepted = false;
    Vector best_x;
    Vector best_f;
    Jacobian best_j;
    bool best_has_j = false;
    double best_r = std::numeric_limits<double>::infinity();
    double best_t = 0.0;
    for (int halving = 0; halving <= 10; ++halving, t *= 0.5) {
      Vector xn = res.x + t * dx;
      if (settings.symmetrize) xn = symmetric_part(model, xn);
      Vector fn;
      Jacobian jn;
      try {
        if (settings.admissibility_guard) model.check_admissible(xn);
        // The full step is usually accepted, so assemble its Jacobian along.
        model.evaluate(xn, mu, &fn, halving == 0 ? &jn : nullptr);
      } catch (const MeshInversion&) {
        if (!settings.admissibility_guard && !settings.line_search) throw;
        continue;
      }
      const double rn = fn.norm();
      if (!std::isfinite(rn)) continue;
      const bool ok = !settings.line_search || rn < r || rn <= settings.tol_residual;
      if (ok || rn < best_r) {
        best_x = std::move(xn);
        best_f = std::move(fn);
        best_has_j = halving == 0;
        if (best_has_j) best_j = std::move(jn);
        best_r = rn;
        best_t = t;
      }
      if (ok) {
        accepted = true;
        break;
      }
      if (!settings.line_search) break;
    }
    if (!accepted && best_x.size() == 0)
      throw NonConvergence("newton: no admissible step after 10 halvings", res.history);
    last_step = best_t * dx.norm();
    res.x = std::move(best_x);
    f = std::move(best_f);
    have_j = best_has_j;
    if (have_j) j = std::move(best_j);
    r = best_r;
    ++res.iterations;
    res.history.push_back(r);
  }
  return res;
}

double observed_order(const std::vector<double>& history, double floor) {
  std::vector<double> h;
  for (double r : history)
    if (r > floor) h.push_back(r);
  if (h.size() < 3) return std::numeric_limits<double>::quiet_NaN();
  const double r0 = h[h.size() - 3];
  const double r1 = h[h.size() - 2];
  const double r2 = h[h.size() - 1];
  return std::log(r2 / r1) / std::log(r1 / r0);
}

void BranchSpec::validate() const {
  if (mu.empty()) throw ConfigError("branch: empty parameter list");
  for (double m : mu)
    if (!(m > 0.0)) throw ConfigError("branch: parameter values must be positive");
  if (mu.size() > 1) {
    const bool inc = mu[1] > mu[0];
    for (std::size_t i = 1; i < mu.size(); ++i)
      if ((mu[i] > mu[i - 1]) != inc || mu[i] == mu[i - 1])
        throw ConfigError("branch: parameter list must be strictly monotone");
  }
  if (max_bisections < 0) throw ConfigError("branch: max_bisections must be non-negative");
}

BranchSpec select_branch_side(BranchSpec spec, Side side, double amplitude) {
  spec.guess = InitialGuess::PerturbedZero;
  spec.amplitude = side == Side::Upper ? std::abs(amplitude) : -std::abs(amplitude);
  return spec;
}

std::optional<double> estimate_onset(const Branch& branch, double ratio, int n_fit) {
  std::vector<double> mu, y2;
  for (const auto& r : branch.records) {
    const auto uy = r.outputs.find("uy");
    const auto u = r.outputs.find("U");
    if (uy == r.outputs.end() || u == r.outputs.end()) continue;
    if (std::abs(uy->second) <= ratio * u->second) continue;
    mu.push_back(r.mu);
    y2.push_back(uy->second * uy->second);
    if (static_cast<int>(mu.size()) == n_fit) break;
  }
  if (mu.size() < 2) return std::nullopt;
  const double n = static_cast<double>(mu.size());
  double sm = 0, sy = 0, smm = 0, smy = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    sm += mu[i];
    sy += y2[i];
    smm += mu[i] * mu[i];
    smy += mu[i] * y2[i];
  }
  const double slope = (n * smy - sm * sy) / (n * smm - sm * sm);
  if (slope == 0.0) return std::nullopt;
  const double icpt = (sy - slope * sm) / n;
  return -icpt / slope;
}

std::vector<double> linspace(double from, double to, int n) {
  std::vector<double> out;
  if (n == 1) return {from};
  for (int i = 0; i < n; ++i) out.push_back(from + (to - from) * i / (n - 1));
  out.back() = to;
  return out;
}

namespace {

struct Stepper {
  Stepper(const Model& m, const NewtonSettings& s, int depth)
      : model(m), settings(s), max_depth(depth) {}

  const Model& model;
  const NewtonSettings& settings;
  NewtonWorkspace ws;
  int max_depth;

  NewtonResult advance(const Vector& x_prev, double mu_prev, double mu, int depth, const Vector* first_guess) {
    try {
      return newton_solve(model, first_guess ? *first_guess : x_prev, mu, settings, &ws);
    } catch (const NonConvergence&) {
      if (depth >= max_depth) throw;
    } catch (const SingularMatrix&) {
      if (depth >= max_depth) throw;
    } catch (const MeshInversion&) {
      if (depth >= max_depth) throw;
    }
    const double mid = 0.5 * (mu_prev + mu);
    const NewtonResult half = advance(x_prev, mu_prev, mid, depth + 1, nullptr);
    return advance(half.x, mid, mu, depth + 1, nullptr);
  }
};

// F(x; mu) - g for a fixed antisymmetric forcing g.
class Imperfect : public Model {
 public:
  Imperfect(const Model& m, Vector g) : m_(m), g_(std::move(g)) {}
  const BlockLayout& layout() const override { return m_.layout(); }
  void evaluate(const Vector& x, double mu, Vector* residual, Jacobian* jacobian) const override {
    m_.evaluate(x, mu, residual, jacobian);
    if (residual) *residual -= g_;
  }
  void check_admissible(const Vector& x) const override { m_.check_admissible(x); }
  Outputs outputs(const Vector& x, double mu) const override { return m_.outputs(x, mu); }
  std::string label() const override { return m_.label() + "-forced"; }

 private:
  const Model& m_;
  Vector g_;
};

}  // namespace

Branch continuation_sweep(const Model& model, const BranchSpec& spec, const NewtonSettings& settings,
                          const SweepObserver& observer) {
  spec.validate();
  NewtonSettings ns = settings;
  ns.symmetrize = settings.symmetrize || spec.symmetrize;
  Branch branch;
  branch.label = spec.label;
  branch.model = model.label();

  Vector seed;
  if (spec.guess == InitialGuess::PerturbedZero && spec.amplitude != 0.0) {
    const auto s = model.antisymmetric_seed();
    if (!s) throw Error("branch selection: the model provides no antisymmetric seed");
    seed = spec.amplitude * *s;
  }
  Vector x;
  switch (spec.guess) {
    case InitialGuess::Zero:
    case InitialGuess::PerturbedZero: x = Vector::Zero(static_cast<Eigen::Index>(model.size())); break;
    case InitialGuess::Provided:
      if (static_cast<std::size_t>(spec.provided.size()) != model.size())
        throw Error("branch: provided guess has the wrong length");
      x = spec.provided;
      break;
  }

  Stepper stepper(model, ns, spec.max_bisections);
  std::optional<Imperfect> imperfect;
  std::optional<Stepper> imperfect_stepper;
  Vector xi;
  if (seed.size() > 0) {
    imperfect.emplace(model, std::move(seed));
    imperfect_stepper.emplace(*imperfect, ns, spec.max_bisections);
    xi = x;
  }
  bool seeding = imperfect.has_value();
  double mu_prev = spec.mu.front();
  for (std::size_t i = 0; i < spec.mu.size(); ++i) {
    const double mu = spec.mu[i];
    const int depth = i == 0 ? spec.max_bisections : 0;
    const double from = i == 0 ? mu : mu_prev;
    try {
      NewtonResult res;
      if (seeding) {
        // Follow the forced problem, then drop the forcing: past the onset the
        // unforced Newton solve lands on the asymmetric branch of the forced side.
        xi = imperfect_stepper->advance(xi, from, mu, depth, nullptr).x;
        try {
          res = stepper.advance(xi, mu, mu, spec.max_bisections, nullptr);
        } catch (const Error&) {
          res = stepper.advance(x, from, mu, depth, nullptr);
        }
      } else {
        res = stepper.advance(x, from, mu, depth, nullptr);
      }
      x = std::move(res.x);
      BranchRecord rec{mu, x, res.iterations, model.outputs(x, mu)};
      if (seeding) {
        const auto it_uy = rec.outputs.find("uy");
        const auto it_u = rec.outputs.find("U");
        if (it_uy != rec.outputs.end() && it_u != rec.outputs.end() &&
            std::abs(it_uy->second) > spec.seed_until * it_u->second)
          seeding = false;
      }
      if (observer) observer(rec);
      branch.records.push_back(std::move(rec));
      mu_prev = mu;
    } catch (const Error& e) {
      throw PartialBranch("branch '" + spec.label + "' stopped at mu = " + std::to_string(mu) + ": " + e.what(),
                          branch, std::current_exception());
    }
  }
  return branch;
}

}  // namespace coanda
