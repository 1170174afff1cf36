#pragma once

#include <filesystem>
#include <iosfwd>
#include <string_view>

#include "mmmc/macro.hpp"
#include "mmmc/system.hpp"

namespace mmmc {

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
  Vector nodes;
  Vector weights;
};

/// Cached n-point rule; thread-safe.
const GaussLegendre& gauss_legendre(std::size_t n);

/// Tensor-product quadrature over a level-set parameterization. Each
/// parameter is integrated over center +- half_width * scale.
struct QuadratureSpec {
  std::size_t nodes = 64;
  double half_width = 8.0;
  /// Node budget for non-factorizing integrals; the per-dimension count is
  /// reduced to keep nodes^dim below this.
  std::size_t max_tensor_points = std::size_t{1} << 16;
};

/// A(z) = -beta^-1 log of the level-set integral of exp(-beta V), up to a
/// z-independent constant. Requires `model.level_set()`.
double free_energy_quadrature(const SystemModel& model, double z, const QuadratureSpec& quad = {});

struct CoefficientSample {
  double b = 0.0;
  double sigma2 = 0.0;
  double a = 0.0;
};

/// Effective drift b(z), squared diffusion sigma2(z) and free energy a(z) on
/// a strictly increasing grid, linearly interpolated between nodes.
class CoefficientTable {
 public:
  CoefficientTable(Vector grid, Vector b, Vector sigma2, Vector a);

  std::size_t size() const noexcept { return grid_.size(); }
  const Vector& grid() const noexcept { return grid_; }
  const Vector& b() const noexcept { return b_; }
  const Vector& sigma2() const noexcept { return sigma2_; }
  const Vector& a() const noexcept { return a_; }
  Interval range() const noexcept { return {grid_.front(), grid_.back()}; }

  /// Throws std::out_of_range outside [grid.front(), grid.back()].
  CoefficientSample interpolate(double z) const;
  /// Slope of the interpolated free energy; the right segment at interior nodes.
  double free_energy_slope(double z) const;

  /// Header `z b sigma2 a`, then one row per node with 17 significant digits.
  void write(std::ostream& out) const;
  void write_file(const std::filesystem::path& path) const;
  static CoefficientTable read(std::istream& in);
  static CoefficientTable read_file(const std::filesystem::path& path);

 private:
  std::size_t segment(double z) const;

  Vector grid_;
  Vector b_;
  Vector sigma2_;
  Vector a_;
};

CoefficientSample interpolate_table(const CoefficientTable& table, double z);

/// n equispaced nodes including both ends of h.
Vector uniform_grid(Interval h, std::size_t n);

/// b(z) = E[-grad V . grad xi + beta^-1 lap xi | xi = z] and
/// sigma2(z) = E[|grad xi|^2 | xi = z] by level-set quadrature, plus the
/// quadrature free energy shifted so that its minimum over the grid is 0.
/// Grid nodes are processed on up to `threads` workers (0: hardware).
CoefficientTable effective_coefficients(const SystemModel& model, const Vector& grid,
                                        const QuadratureSpec& quad = {}, unsigned threads = 1);

/// Macro model whose free energy is the table's a channel.
class TableMacroModel final : public MacroModel {
 public:
  TableMacroModel(CoefficientTable table, double beta, Interval domain);

  std::string_view name() const override { return "table"; }
  double free_energy(double z) const override { return table_.interpolate(z).a; }
  double free_energy_grad(double z) const override { return table_.free_energy_slope(z); }
  const CoefficientTable& table() const noexcept { return table_; }

 private:
  CoefficientTable table_;
};

}  // namespace mmmc
