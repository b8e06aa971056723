#include "softreach/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "softreach/error.hpp"

namespace softreach {

ControlSpec::ControlSpec(std::vector<Channel> channels) : channels_(std::move(channels)) {
  for (const auto& c : channels_) {
    if (c.kind == Kind::interval) {
      require(std::isfinite(c.lo) && std::isfinite(c.hi) && c.lo <= c.hi,
              "input channel '" + c.name + "': need finite lo <= hi");
    } else {
      require(!c.samples.empty(), "input channel '" + c.name + "': empty sample list");
      for (double v : c.samples) require(std::isfinite(v), "input channel '" + c.name + "': non-finite sample");
    }
  }
}

ControlSpec::Channel ControlSpec::interval(std::string name, double lo, double hi) {
  Channel c;
  c.name = std::move(name);
  c.kind = Kind::interval;
  c.lo = lo;
  c.hi = hi;
  return c;
}

ControlSpec::Channel ControlSpec::sample_list(std::string name, std::vector<double> values) {
  Channel c;
  c.name = std::move(name);
  c.kind = Kind::samples;
  c.samples = std::move(values);
  if (!c.samples.empty()) {
    c.lo = *std::min_element(c.samples.begin(), c.samples.end());
    c.hi = *std::max_element(c.samples.begin(), c.samples.end());
  }
  return c;
}

ControlSpec::Channel ControlSpec::uniform_samples(std::string name, double lo, double hi, std::size_t count) {
  require(count >= 2 && lo < hi, "uniform samples need count >= 2 and lo < hi");
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i)
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  v.back() = hi;
  return sample_list(std::move(name), std::move(v));
}

std::vector<std::vector<double>> ControlSpec::candidates() const {
  std::vector<std::vector<double>> out;
  for (const auto& c : channels_) {
    if (c.kind == Kind::interval) {
      std::vector<double> v{c.lo, c.hi};
      const double mid = std::clamp(0.0, c.lo, c.hi);
      if (mid != c.lo && mid != c.hi) v.push_back(mid);
      out.push_back(std::move(v));
    } else {
      out.push_back(c.samples);
    }
  }
  return out;
}

std::vector<std::vector<double>> ControlSpec::candidate_grid() const {
  const auto per = candidates();
  std::vector<std::vector<double>> combos{{}};
  for (const auto& vals : per) {
    std::vector<std::vector<double>> next;
    for (const auto& prefix : combos) {
      for (double v : vals) {
        auto c = prefix;
        c.push_back(v);
        next.push_back(std::move(c));
      }
    }
    combos = std::move(next);
  }
  return combos;
}

bool ControlSpec::admissible(std::span<const double> u, double tol) const {
  if (u.size() != channels_.size()) return false;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto& c = channels_[i];
    if (c.kind == Kind::interval) {
      if (u[i] < c.lo - tol || u[i] > c.hi + tol) return false;
    } else if (std::none_of(c.samples.begin(), c.samples.end(),
                            [&](double s) { return std::abs(s - u[i]) <= tol; })) {
      return false;
    }
  }
  return true;
}

double channel_min(const ControlSpec::Channel& c, double coef) {
  if (c.kind == ControlSpec::Kind::interval) return std::min(coef * c.lo, coef * c.hi);
  double best = std::numeric_limits<double>::infinity();
  for (double s : c.samples) best = std::min(best, coef * s);
  return best;
}

double channel_max(const ControlSpec::Channel& c, double coef) {
  if (c.kind == ControlSpec::Kind::interval) return std::max(coef * c.lo, coef * c.hi);
  double best = -std::numeric_limits<double>::infinity();
  for (double s : c.samples) best = std::max(best, coef * s);
  return best;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double magnitude(const std::vector<double>& u) {
  double s = 0.0;
  for (double v : u) s += std::abs(v);
  return s;
}

bool ties(double a, double b) { return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a) + std::abs(b)); }

}  // namespace

double SystemModel::hamiltonian(double t, std::span<const double> x, std::span<const double> p) const {
  const auto as = control_.candidate_grid();
  const auto bs = disturbance_.candidate_grid();
  const std::size_t n = static_cast<std::size_t>(state_dim());
  std::vector<double> f(n);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& a : as) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& b : bs) {
      flow(t, x, a, b, f);
      worst = std::max(worst, dot(p, f, n));
    }
    best = std::min(best, worst);
  }
  return best;
}

void SystemModel::hamiltonian_batch(double t, std::span<const double> x, std::span<const double> p,
                                    std::size_t p_stride, std::size_t rows, std::span<double> out) const {
  const std::size_t n = static_cast<std::size_t>(state_dim());
  for (std::size_t r = 0; r < rows; ++r) out[r] = hamiltonian(t, x, p.subspan(r * p_stride, n));
}

InputPair SystemModel::optimal_inputs(double t, std::span<const double> x, std::span<const double> p) const {
  const auto as = control_.candidate_grid();
  const auto bs = disturbance_.candidate_grid();
  const std::size_t n = static_cast<std::size_t>(state_dim());
  std::vector<double> f(n);
  InputPair best;
  double best_value = std::numeric_limits<double>::infinity();
  for (const auto& a : as) {
    double worst = -std::numeric_limits<double>::infinity();
    const std::vector<double>* worst_b = nullptr;
    for (const auto& b : bs) {
      flow(t, x, a, b, f);
      const double v = dot(p, f, n);
      if (worst_b == nullptr || (v > worst && !ties(v, worst)) ||
          (ties(v, worst) && magnitude(b) < magnitude(*worst_b))) {
        if (worst_b == nullptr || !ties(v, worst)) worst = v;
        worst_b = &b;
      }
    }
    if (best.control.empty() || (worst < best_value && !ties(worst, best_value)) ||
        (ties(worst, best_value) && magnitude(a) < magnitude(best.control))) {
      if (best.control.empty() || !ties(worst, best_value)) best_value = worst;
      best.control = a;
      best.disturbance = *worst_b;
    }
  }
  return best;
}

PointMass::PointMass(ControlSpec control, ControlSpec disturbance, double gravity)
    : SystemModel(std::move(control), std::move(disturbance)), gravity_(gravity) {
  require(this->control().size() == 1 && this->disturbance().size() == 1,
          "point-mass model takes one control and one disturbance channel");
}

void PointMass::flow(double, std::span<const double> x, std::span<const double> a, std::span<const double> b,
                     std::span<double> out) const {
  out[0] = a[0] - gravity_ + b[0];
  out[1] = x[0];
}

double PointMass::hamiltonian(double, std::span<const double> x, std::span<const double> p) const {
  return p[0] * -gravity_ + p[1] * x[0] + channel_min(control().channels()[0], p[0]) +
         channel_max(disturbance().channels()[0], p[0]);
}

void AeroTable::validate() const {
  require(alpha.size() >= 2, "aero table needs at least two rows");
  require(cl.size() == alpha.size() && cd.size() == alpha.size(), "aero table columns differ in length");
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    require(std::isfinite(alpha[i]) && std::isfinite(cl[i]) && std::isfinite(cd[i]), "aero table: non-finite entry");
    require(cd[i] > 0.0, "aero table: drag coefficient must be positive");
    if (i) require(alpha[i] > alpha[i - 1], "aero table: angles must be ascending");
  }
}

namespace {

double table_lookup(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
  const std::size_t lo = hi - 1;
  const double w = (x - xs[lo]) / (xs[hi] - xs[lo]);
  return (1.0 - w) * ys[lo] + w * ys[hi];
}

constexpr double kDeg = std::numbers::pi / 180.0;

}  // namespace

double AeroTable::lift_coefficient(double a) const { return table_lookup(alpha, cl, a); }
double AeroTable::drag_coefficient(double a) const { return table_lookup(alpha, cd, a); }

AeroTable AeroTable::surrogate(std::span<const double> alphas, double cl0, double cl_alpha, double cd0, double k) {
  AeroTable t;
  for (double a : alphas) {
    const double c = cl0 + cl_alpha * a;
    t.alpha.push_back(a);
    t.cl.push_back(c);
    t.cd.push_back(cd0 + k * c * c);
  }
  t.validate();
  return t;
}

AeroTable AeroTable::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open aero table '" + path + "'");
  std::string line;
  int lineno = 0;
  bool header = false;
  AeroTable t;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) {
      c.erase(0, c.find_first_not_of(" \t\r"));
      c.erase(c.find_last_not_of(" \t\r") + 1);
      cols.push_back(c);
    }
    if (!header) {
      if (cols != std::vector<std::string>{"alpha_deg", "C_L", "C_D"})
        fail(ErrorKind::validation, path + ":" + std::to_string(lineno) + ": expected header alpha_deg,C_L,C_D");
      header = true;
      continue;
    }
    if (cols.size() != 3) fail(ErrorKind::validation, path + ":" + std::to_string(lineno) + ": expected 3 columns");
    try {
      t.alpha.push_back(std::stod(cols[0]) * kDeg);
      t.cl.push_back(std::stod(cols[1]));
      t.cd.push_back(std::stod(cols[2]));
    } catch (const std::exception&) {
      fail(ErrorKind::validation, path + ":" + std::to_string(lineno) + ": malformed number");
    }
  }
  if (!header) fail(ErrorKind::validation, path + ": missing header alpha_deg,C_L,C_D");
  t.validate();
  return t;
}

void AeroTable::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write '" + path + "'");
  out << "alpha_deg,C_L,C_D\n";
  for (std::size_t i = 0; i < alpha.size(); ++i)
    out << format_double(alpha[i] / kDeg) << ',' << format_double(cl[i]) << ',' << format_double(cd[i]) << '\n';
}

FixedWing::FixedWing(ControlSpec control, ControlSpec disturbance, AeroTable aero, FixedWingParams params)
    : SystemModel(std::move(control), std::move(disturbance)), aero_(std::move(aero)), params_(params) {
  aero_.validate();
  require(this->control().size() == 1 && this->disturbance().size() == 1,
          "fixed-wing model takes one control (angle of attack) and one disturbance (wind force)");
  require(params_.mass > 0 && params_.air_density > 0 && params_.wing_area > 0, "fixed-wing: non-positive parameter");
  const auto& ch = this->control().channels()[0];
  const auto cands = ch.kind == ControlSpec::Kind::samples
                         ? ch.samples
                         : ControlSpec::uniform_samples(ch.name, ch.lo, ch.hi, 27).samples;
  for (double a : cands) {
    cl_samples_.push_back(aero_.lift_coefficient(a));
    cd_samples_.push_back(aero_.drag_coefficient(a));
  }
}

void FixedWing::flow(double, std::span<const double> x, std::span<const double> a, std::span<const double> b,
                     std::span<double> out) const {
  const double v = x[1];
  const double gamma = x[2];
  if (!(v > 0.0)) fail(ErrorKind::numerical, "fixed-wing flow: airspeed must be positive, got " + format_double(v));
  const double q = 0.5 * params_.air_density * params_.wing_area * v * v;
  const double lift = q * aero_.lift_coefficient(a[0]);
  const double drag = q * aero_.drag_coefficient(a[0]);
  const double m = params_.mass;
  const double g = params_.gravity;
  out[0] = v * std::sin(gamma);
  out[1] = (-drag - m * g * std::sin(gamma) + b[0]) / m;
  out[2] = lift / (m * v) - g / v * std::cos(gamma);
}

double FixedWing::hamiltonian(double t, std::span<const double> x, std::span<const double> p) const {
  double out = 0.0;
  hamiltonian_batch(t, x, p, 3, 1, std::span<double>(&out, 1));
  return out;
}

void FixedWing::hamiltonian_batch(double, std::span<const double> x, std::span<const double> p,
                                  std::size_t p_stride, std::size_t rows, std::span<double> out) const {
  const double v = x[1];
  if (!(v > 0.0)) fail(ErrorKind::numerical, "fixed-wing flow: airspeed must be positive, got " + format_double(v));
  const double s = std::sin(x[2]);
  const double c = std::cos(x[2]);
  const double m = params_.mass;
  const double g = params_.gravity;
  const double k = 0.5 * params_.air_density * params_.wing_area * v * v / m;
  const auto& wind = disturbance().channels()[0];
  const std::size_t n = cl_samples_.size();
  for (std::size_t r = 0; r < rows; ++r) {
    const double ph = p[r * p_stride];
    const double pv = p[r * p_stride + 1];
    const double pg = p[r * p_stride + 2];
    // Input-free part, then the wind (affine) and angle-of-attack (sampled) extrema.
    double h = ph * v * s - pv * g * s - pg * g * c / v + channel_max(wind, pv) / m;
    const double wl = k * pg / v;
    const double wd = -k * pv;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) best = std::min(best, wl * cl_samples_[i] + wd * cd_samples_[i]);
    out[r] = h + best;
  }
}

double h_epsilon(double c2_value, double epsilon) {
  require(epsilon > 0.0, "h_epsilon: epsilon must be positive");
  return std::clamp(c2_value / epsilon, 0.0, 1.0);
}

std::vector<double> augmented_flow(const SystemModel& model, const ImplicitSet& soft_set, double epsilon, double t,
                                   std::span<const double> x, double z, std::span<const double> a,
                                   std::span<const double> b, BudgetRate mode) {
  (void)z;
  const std::size_t n = static_cast<std::size_t>(model.state_dim());
  std::vector<double> out(n + 1);
  model.flow(t, x, a, b, std::span<double>(out.data(), n));
  const double c2 = soft_set.eval(t, x.first(n));
  out[n] = mode == BudgetRate::regularized ? -h_epsilon(c2, epsilon) : (c2 > 0.0 ? -1.0 : 0.0);
  return out;
}

double extremal_hamiltonian(const SystemModel& model, const ImplicitSet& soft_set, double epsilon, double t,
                            std::span<const double> x, double z, std::span<const double> p) {
  (void)z;
  const std::size_t n = static_cast<std::size_t>(model.state_dim());
  require(p.size() == n || p.size() == n + 1, "extremal_hamiltonian: costate size mismatch");
  for (double v : p) require(std::isfinite(v), "extremal_hamiltonian: non-finite costate");
  double h = model.hamiltonian(t, x.first(n), p.first(n));
  if (p.size() == n + 1) h += p[n] * -h_epsilon(soft_set.eval(t, x.first(n)), epsilon);
  return h;
}

std::vector<double> speed_bounds(const SystemModel& model, const Grid& grid) {
  const int n = model.state_dim();
  require(grid.dim() >= n, "speed_bounds: grid has fewer axes than the state");
  std::vector<double> bounds(static_cast<std::size_t>(grid.dim()), 0.0);
  const auto as = model.control().candidate_grid();
  const auto bs = model.disturbance().candidate_grid();
  std::size_t lattice = 1;
  for (int i = 0; i < n; ++i) lattice *= 3;
  std::vector<double> x(static_cast<std::size_t>(n)), f(static_cast<std::size_t>(n));
  for (std::size_t c = 0; c < lattice; ++c) {
    std::size_t code = c;
    for (int i = 0; i < n; ++i) {
      const int k = static_cast<int>(code % 3);
      code /= 3;
      x[i] = k == 0 ? grid.min(i) : (k == 1 ? 0.5 * (grid.min(i) + grid.max(i)) : grid.max(i));
    }
    for (const auto& a : as) {
      for (const auto& b : bs) {
        model.flow(0.0, x, a, b, f);
        for (int i = 0; i < n; ++i) bounds[i] = std::max(bounds[i], std::abs(f[i]));
      }
    }
  }
  for (int i = n; i < grid.dim(); ++i) bounds[i] = 1.0;
  return bounds;
}

}  // namespace softreach
