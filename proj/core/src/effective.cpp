#include "mmmc/effective.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace mmmc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

const LevelSetParameterization& require_level_set(const SystemModel& model) {
  const LevelSetParameterization* ls = model.level_set();
  if (ls == nullptr) {
    throw std::invalid_argument(std::string(model.name()) + ": no level-set parameterization");
  }
  return *ls;
}

/// Quadrature nodes and log weights for one parameter at level z.
struct Axis {
  Vector points;
  Vector log_weights;
};

Axis make_axis(const LevelSetParameterization& ls, double z, std::size_t param,
               const GaussLegendre& rule, double half_width) {
  const double c = ls.center(z, param);
  const double h = half_width * ls.scale(param);
  Axis axis;
  axis.points.resize(rule.nodes.size());
  axis.log_weights.resize(rule.nodes.size());
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    axis.points[k] = c + h * rule.nodes[k];
    axis.log_weights[k] = std::log(rule.weights[k] * h);
  }
  return axis;
}

/// -beta V(x(z, u)) + log weight(z, u); -inf where the integrand vanishes.
double log_integrand(const SystemModel& model, const LevelSetParameterization& ls, double z,
                     std::span<const double> u, std::span<double> x) {
  const double w = ls.weight(z, u);
  if (!(w > 0.0)) return kNegInf;
  ls.embed(z, u, x);
  if (!model.in_domain(x)) return kNegInf;
  try {
    return -model.beta() * model.potential(x) + std::log(w);
  } catch (const DomainError&) {
    return kNegInf;
  }
}

/// log sum exp over a sequence fed one term at a time.
class LogSumExp {
 public:
  void add(double v) {
    if (v == kNegInf || std::isnan(v)) return;
    if (v <= max_) {
      sum_ += std::exp(v - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - v) + 1.0;
      max_ = v;
    }
  }
  double value() const { return max_ == kNegInf ? kNegInf : max_ + std::log(sum_); }

 private:
  double max_ = kNegInf;
  double sum_ = 0.0;
};

std::string describe_subdomain(const LevelSetParameterization& ls, double z, double half_width) {
  std::ostringstream msg;
  msg << "z = " << z << ", parameters";
  for (std::size_t i = 0; i < ls.n_params(); ++i) {
    const double c = ls.center(z, i);
    const double h = half_width * ls.scale(i);
    msg << " u" << i << " in [" << c - h << ", " << c + h << "]";
  }
  return msg.str();
}

std::size_t tensor_nodes(std::size_t requested, std::size_t dims, std::size_t budget) {
  std::size_t n = 1;
  auto fits = [&](std::size_t m) {
    double total = 1.0;
    for (std::size_t i = 0; i < dims; ++i) total *= static_cast<double>(m);
    return total <= static_cast<double>(budget);
  };
  while (n < requested && fits(n + 1)) ++n;
  return std::max<std::size_t>(n, 2);
}

/// Visits every point of the tensor grid with its summed log weight.
template <class F>
void for_each_tensor_point(const std::vector<Axis>& axes, Vector& u, F&& visit) {
  const std::size_t p = axes.size();
  std::vector<std::size_t> idx(p, 0);
  while (true) {
    double lw = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      u[i] = axes[i].points[idx[i]];
      lw += axes[i].log_weights[idx[i]];
    }
    visit(lw);
    std::size_t i = 0;
    while (i < p && ++idx[i] == axes[i].points.size()) idx[i++] = 0;
    if (i == p) break;
  }
}

}  // namespace

double free_energy_quadrature(const SystemModel& model, double z, const QuadratureSpec& quad) {
  const LevelSetParameterization& ls = require_level_set(model);
  const std::size_t p = ls.n_params();
  Vector u(p), x(model.dim());
  double log_integral = kNegInf;

  if (ls.separable()) {
    const GaussLegendre& rule = gauss_legendre(quad.nodes);
    for (std::size_t i = 0; i < p; ++i) u[i] = ls.center(z, i);
    const double ref = log_integrand(model, ls, z, u, x);
    if (std::isfinite(ref)) {
      log_integral = ref;
      for (std::size_t i = 0; i < p; ++i) {
        const Axis axis = make_axis(ls, z, i, rule, quad.half_width);
        const double keep = u[i];
        LogSumExp acc;
        for (std::size_t k = 0; k < axis.points.size(); ++k) {
          u[i] = axis.points[k];
          acc.add(log_integrand(model, ls, z, u, x) - ref + axis.log_weights[k]);
        }
        u[i] = keep;
        log_integral += acc.value();
      }
    }
  } else {
    const GaussLegendre& rule = gauss_legendre(tensor_nodes(quad.nodes, p, quad.max_tensor_points));
    std::vector<Axis> axes;
    for (std::size_t i = 0; i < p; ++i) axes.push_back(make_axis(ls, z, i, rule, quad.half_width));
    LogSumExp acc;
    for_each_tensor_point(axes, u, [&](double lw) { acc.add(log_integrand(model, ls, z, u, x) + lw); });
    log_integral = acc.value();
  }

  if (!std::isfinite(log_integral)) {
    throw std::runtime_error("free energy quadrature: integral is not finite on " +
                             describe_subdomain(ls, z, quad.half_width));
  }
  return -log_integral / model.beta();
}

namespace {

CoefficientSample coefficients_at(const SystemModel& model, double z, const QuadratureSpec& quad) {
  const LevelSetParameterization& ls = require_level_set(model);
  const ReactionCoordinateMap& rc = model.reaction_coordinate();
  const std::size_t p = ls.n_params();
  const std::size_t d = model.dim();
  const GaussLegendre& rule = gauss_legendre(tensor_nodes(quad.nodes, p, quad.max_tensor_points));
  std::vector<Axis> axes;
  for (std::size_t i = 0; i < p; ++i) axes.push_back(make_axis(ls, z, i, rule, quad.half_width));

  Vector u(p), x(d), grad(d), jac(d);
  double lap = 0.0;
  // Two passes: the maximum log weight first, then the weighted sums.
  double max_log = kNegInf;
  for_each_tensor_point(axes, u, [&](double lw) {
    max_log = std::max(max_log, log_integrand(model, ls, z, u, x) + lw);
  });
  if (!std::isfinite(max_log)) {
    throw std::runtime_error("effective coefficients: integral is not finite on " +
                             describe_subdomain(ls, z, quad.half_width));
  }
  double mass = 0.0, b_sum = 0.0, s_sum = 0.0;
  for_each_tensor_point(axes, u, [&](double lw) {
    const double l = log_integrand(model, ls, z, u, x) + lw;
    if (l == kNegInf) return;
    const double w = std::exp(l - max_log);
    model.gradient(x, grad);
    rc.jacobian(x, jac);
    rc.laplacian(x, std::span<double>(&lap, 1));
    double drift = 0.0, norm2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      drift -= grad[k] * jac[k];
      norm2 += jac[k] * jac[k];
    }
    drift += lap / model.beta();
    mass += w;
    b_sum += w * drift;
    s_sum += w * norm2;
  });
  CoefficientSample c;
  c.b = b_sum / mass;
  c.sigma2 = s_sum / mass;
  c.a = free_energy_quadrature(model, z, quad);
  return c;
}

}  // namespace

CoefficientTable effective_coefficients(const SystemModel& model, const Vector& grid,
                                        const QuadratureSpec& quad, unsigned threads) {
  require_level_set(model);
  const std::size_t n = grid.size();
  Vector b(n), s(n), a(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        const CoefficientSample c = coefficients_at(model, grid[i], quad);
        b[i] = c.b;
        s[i] = c.sigma2;
        a[i] = c.a;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  const double a_min = *std::min_element(a.begin(), a.end());
  for (double& v : a) v -= a_min;
  return CoefficientTable(grid, std::move(b), std::move(s), std::move(a));
}

Vector uniform_grid(Interval h, std::size_t n) {
  if (n < 2) throw std::invalid_argument("uniform_grid: need at least two nodes");
  if (!(h.hi > h.lo)) throw std::invalid_argument("uniform_grid: empty interval");
  Vector grid(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = h.lo + h.width() * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  grid.back() = h.hi;
  return grid;
}

CoefficientTable::CoefficientTable(Vector grid, Vector b, Vector sigma2, Vector a)
    : grid_(std::move(grid)), b_(std::move(b)), sigma2_(std::move(sigma2)), a_(std::move(a)) {
  const std::size_t n = grid_.size();
  if (n < 2) throw std::invalid_argument("coefficient table: need at least two nodes");
  if (b_.size() != n || sigma2_.size() != n || a_.size() != n) {
    throw std::invalid_argument("coefficient table: channel lengths differ");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(grid_[i]) || !std::isfinite(b_[i]) || !std::isfinite(sigma2_[i]) ||
        !std::isfinite(a_[i])) {
      throw std::invalid_argument("coefficient table: non-finite entry at node " + std::to_string(i));
    }
    if (!(sigma2_[i] > 0.0)) {
      throw std::invalid_argument("coefficient table: sigma2 not positive at node " +
                                  std::to_string(i));
    }
    if (i > 0 && !(grid_[i] > grid_[i - 1])) {
      throw std::invalid_argument("coefficient table: grid not strictly increasing at node " +
                                  std::to_string(i));
    }
  }
}

std::size_t CoefficientTable::segment(double z) const {
  if (!(z >= grid_.front() && z <= grid_.back())) {
    std::ostringstream msg;
    msg << "coefficient table: z = " << z << " outside [" << grid_.front() << ", " << grid_.back()
        << "]";
    throw std::out_of_range(msg.str());
  }
  const auto it = std::upper_bound(grid_.begin(), grid_.end(), z);
  const std::size_t k = static_cast<std::size_t>(it - grid_.begin());
  return std::min(k == 0 ? 0 : k - 1, grid_.size() - 2);
}

CoefficientSample CoefficientTable::interpolate(double z) const {
  const std::size_t k = segment(z);
  if (z == grid_[k]) return {b_[k], sigma2_[k], a_[k]};
  if (z == grid_[k + 1]) return {b_[k + 1], sigma2_[k + 1], a_[k + 1]};
  const double t = (z - grid_[k]) / (grid_[k + 1] - grid_[k]);
  auto lerp = [t](double lo, double hi) { return (1.0 - t) * lo + t * hi; };
  return {lerp(b_[k], b_[k + 1]), lerp(sigma2_[k], sigma2_[k + 1]), lerp(a_[k], a_[k + 1])};
}

double CoefficientTable::free_energy_slope(double z) const {
  const std::size_t k = segment(z);
  return (a_[k + 1] - a_[k]) / (grid_[k + 1] - grid_[k]);
}

void CoefficientTable::write(std::ostream& out) const {
  out << "z b sigma2 a\n";
  char line[128];
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    std::snprintf(line, sizeof line, "%.17g %.17g %.17g %.17g\n", grid_[i], b_[i], sigma2_[i],
                  a_[i]);
    out << line;
  }
}

void CoefficientTable::write_file(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write(out);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

CoefficientTable CoefficientTable::read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("coefficient table: empty input");
  {
    std::istringstream header(line);
    std::string z, b, s, a, extra;
    header >> z >> b >> s >> a;
    if (z != "z" || b != "b" || s != "sigma2" || a != "a" || (header >> extra)) {
      throw std::runtime_error("coefficient table: expected header 'z b sigma2 a'");
    }
  }
  Vector grid, b, s, a;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream row(line);
    double v[4];
    std::string extra;
    if (!(row >> v[0] >> v[1] >> v[2] >> v[3]) || (row >> extra)) {
      throw std::runtime_error("coefficient table: malformed row at line " + std::to_string(line_no));
    }
    grid.push_back(v[0]);
    b.push_back(v[1]);
    s.push_back(v[2]);
    a.push_back(v[3]);
  }
  return CoefficientTable(std::move(grid), std::move(b), std::move(s), std::move(a));
}

CoefficientTable CoefficientTable::read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open coefficient table " + path.string());
  return read(in);
}

CoefficientSample interpolate_table(const CoefficientTable& table, double z) {
  return table.interpolate(z);
}

TableMacroModel::TableMacroModel(CoefficientTable table, double beta, Interval domain)
    : MacroModel(beta, domain), table_(std::move(table)) {
  if (domain.lo < table_.range().lo || domain.hi > table_.range().hi) {
    throw std::invalid_argument("table macro model: domain exceeds the table grid");
  }
}

}  // namespace mmmc
