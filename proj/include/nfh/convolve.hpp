#pragma once
// Periodic, quadrature-weighted convolutions in function space:
//
//   macro:      (u * v)(x_i)       = h^N          sum_j   u(x_j)   v(x_i - x_j)
//   two-scale:  (u ** v)(x_i, y_j) = h^N (1/M_y)^N sum_{k,l} u(x_k, y_l) v(x_i - x_k, y_j - y_l)
//
// with the second factor extended periodically over the box. Macro nodes
// start at x = -L, so the function-space convolution is the index-space
// circular convolution shifted by half the box per macro axis; spectrally
// that is a (-1)^k phase per macro axis, which spectrum() folds into the
// transform. Cell nodes start at y = 0 and need no correction. Plans are
// computed as conv = measure * IFFT(spectrum(u) .* FFT(v)) and own their FFT
// engines and scratch, so a kernel spectrum can be computed once and reused
// for every right-hand side evaluation. Direct O(n^2) summations of the same
// quadratures are provided as oracles for small grids.

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "nfh/common.hpp"
#include "nfh/fft.hpp"
#include "nfh/grid.hpp"

namespace nfh {

namespace detail {

// Sign (-1)^(sum of frequency indices over the first `centered_axes` axes)
// laid out over the half-complex spectrum of a real transform of `shape`.
// Multiplying a spectrum by this sign re-centers those axes so index 0 maps
// to coordinate -L instead of 0. All axis lengths are even here, so the sign
// is the same for a row index and the negative frequency it aliases.
inline std::vector<double> centering_signs(const std::vector<int>& shape, int centered_axes) {
  std::vector<int> spec_shape = shape;
  spec_shape.back() = shape.back() / 2 + 1;
  std::size_t total = 1;
  for (int d : spec_shape) total *= static_cast<std::size_t>(d);
  std::vector<double> sign(total, 1.0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    int parity = 0;
    for (std::size_t a = spec_shape.size(); a-- > 0;) {
      const int k = static_cast<int>(rest % static_cast<std::size_t>(spec_shape[a]));
      rest /= static_cast<std::size_t>(spec_shape[a]);
      if (a < static_cast<std::size_t>(centered_axes)) parity += k;
    }
    if (parity % 2 != 0) sign[flat] = -1.0;
  }
  return sign;
}

}  // namespace detail

// ---- macro-grid convolution -------------------------------------------------

class ConvPlan {
 public:
  explicit ConvPlan(const MacroGrid& g)
      : grid_(g), engine_(shape_of(g)), sign_(detail::centering_signs(shape_of(g), g.dim)) {}

  const MacroGrid& grid() const { return grid_; }

  // Centered forward transform; feed the result to convolve_spectrum.
  // h^N * spectrum(u)[k] is the Fourier coefficient of u with the physical
  // phase e^{-i k x} evaluated at the true node coordinates.
  std::vector<std::complex<double>> spectrum(const MacroField& u) {
    require_grid(u);
    std::vector<std::complex<double>> s = engine_.forward(u.values);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] *= sign_[i];
    return s;
  }

  void convolve_spectrum(std::span<const std::complex<double>> ku, std::span<const double> v,
                         std::span<double> result) {
    engine_.multiply_inverse(ku, v, scale(), result);
  }

  MacroField convolve_spectrum(std::span<const std::complex<double>> ku, const MacroField& v) {
    require_grid(v);
    MacroField out = MacroField::zeros(grid_);
    convolve_spectrum(ku, v.values, out.values);
    return out;
  }

  MacroField convolve(const MacroField& u, const MacroField& v) {
    require_grid(u);
    return convolve_spectrum(spectrum(u), v);
  }

 private:
  static std::vector<int> shape_of(const MacroGrid& g) {
    g.validate();
    return std::vector<int>(static_cast<std::size_t>(g.dim), g.points);
  }

  void require_grid(const MacroField& u) const {
    if (!(u.grid == grid_) || u.values.size() != grid_.size())
      throw std::invalid_argument("convolve: field does not match the plan's grid");
  }

  // Quadrature weight of one node divided by the FFT length (the inverse
  // transform is unnormalized).
  double scale() const { return grid_.cell_measure() / static_cast<double>(engine_.real_size()); }

  MacroGrid grid_;
  RealFftEngine engine_;
  std::vector<double> sign_;
};

// ---- joint macro x cell convolution -----------------------------------------

class TwoScaleConvPlan {
 public:
  TwoScaleConvPlan(const MacroGrid& g, const CellGrid& c)
      : macro_(g),
        cell_(c),
        engine_(shape_of(g, c)),
        sign_(detail::centering_signs(shape_of(g, c), g.dim)) {}

  const MacroGrid& macro() const { return macro_; }
  const CellGrid& cell() const { return cell_; }

  // Centered forward transform (macro axes re-centered, cell axes plain).
  std::vector<std::complex<double>> spectrum(const TwoScaleField& u) {
    require_grid(u);
    std::vector<std::complex<double>> s = engine_.forward(u.values);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] *= sign_[i];
    return s;
  }

  void convolve_spectrum(std::span<const std::complex<double>> ku, std::span<const double> v,
                         std::span<double> result) {
    engine_.multiply_inverse(ku, v, scale(), result);
  }

  TwoScaleField convolve_spectrum(std::span<const std::complex<double>> ku, const TwoScaleField& v) {
    require_grid(v);
    TwoScaleField out = TwoScaleField::zeros(macro_, cell_);
    convolve_spectrum(ku, v.values, out.values);
    return out;
  }

  TwoScaleField convolve(const TwoScaleField& u, const TwoScaleField& v) {
    require_grid(u);
    return convolve_spectrum(spectrum(u), v);
  }

 private:
  static std::vector<int> shape_of(const MacroGrid& g, const CellGrid& c) {
    g.validate();
    c.validate();
    if (g.dim != c.dim) throw std::invalid_argument("convolve: macro/cell dim mismatch");
    std::vector<int> shape;
    for (int a = 0; a < g.dim; ++a) shape.push_back(g.points);
    for (int a = 0; a < c.dim; ++a) shape.push_back(c.points);
    return shape;
  }

  void require_grid(const TwoScaleField& u) const {
    if (!(u.macro == macro_) || !(u.cell == cell_) ||
        u.values.size() != macro_.size() * cell_.size())
      throw std::invalid_argument("convolve: field does not match the plan's grids");
  }

  double scale() const {
    return macro_.cell_measure() * cell_.cell_measure() / static_cast<double>(engine_.real_size());
  }

  MacroGrid macro_;
  CellGrid cell_;
  RealFftEngine engine_;
  std::vector<double> sign_;
};

// ---- one-shot helpers -------------------------------------------------------

inline MacroField conv_macro(const MacroField& u, const MacroField& v) {
  ConvPlan plan(u.grid);
  return plan.convolve(u, v);
}

inline TwoScaleField double_conv(const TwoScaleField& u, const TwoScaleField& v) {
  TwoScaleConvPlan plan(u.macro, u.cell);
  return plan.convolve(u, v);
}

// ---- direct-summation oracles ----------------------------------------------

namespace detail {

inline void require_direct_size(std::size_t n) {
  if (n > 4096)
    throw std::invalid_argument("direct convolution oracle is capped at 4096 total points");
}

}  // namespace detail

inline MacroField conv_direct(const MacroField& u, const MacroField& v) {
  if (!(u.grid == v.grid)) throw std::invalid_argument("convolve: grid mismatch");
  u.grid.validate();
  detail::require_direct_size(u.grid.size());
  const long long m = u.grid.points;
  const long long half = m / 2;  // node index of coordinate x = 0
  const double w = u.grid.cell_measure();
  MacroField out = MacroField::zeros(u.grid);
  if (u.grid.dim == 1) {
    for (long long i = 0; i < m; ++i) {
      out.values[static_cast<std::size_t>(i)] =
          w * pairwise_map_sum(static_cast<std::size_t>(m), [&](std::size_t j) {
            const long long jj = static_cast<long long>(j);
            return u.values[j] * v.values[static_cast<std::size_t>(((i - jj + half) % m + m) % m)];
          });
    }
  } else {
    for (long long i0 = 0; i0 < m; ++i0) {
      for (long long i1 = 0; i1 < m; ++i1) {
        out.values[static_cast<std::size_t>(i0 * m + i1)] =
            w * pairwise_map_sum(u.grid.size(), [&](std::size_t j) {
              const long long j0 = static_cast<long long>(j) / m;
              const long long j1 = static_cast<long long>(j) % m;
              const long long k0 = ((i0 - j0 + half) % m + m) % m;
              const long long k1 = ((i1 - j1 + half) % m + m) % m;
              return u.values[j] * v.values[static_cast<std::size_t>(k0 * m + k1)];
            });
      }
    }
  }
  return out;
}

inline TwoScaleField double_conv_direct(const TwoScaleField& u, const TwoScaleField& v) {
  if (!(u.macro == v.macro) || !(u.cell == v.cell))
    throw std::invalid_argument("convolve: grid mismatch");
  u.macro.validate();
  u.cell.validate();
  const std::size_t total = u.macro.size() * u.cell.size();
  detail::require_direct_size(total);
  const double w = u.macro.cell_measure() * u.cell.cell_measure();
  TwoScaleField out = TwoScaleField::zeros(u.macro, u.cell);

  // Flattened multi-index arithmetic over all 2N circular axes. Macro axes
  // carry the half-box offset (node index of x = 0); cell axes start at 0.
  std::vector<long long> extents;
  std::vector<long long> offsets;
  for (int a = 0; a < u.macro.dim; ++a) {
    extents.push_back(u.macro.points);
    offsets.push_back(u.macro.points / 2);
  }
  for (int a = 0; a < u.cell.dim; ++a) {
    extents.push_back(u.cell.points);
    offsets.push_back(0);
  }
  const std::size_t rank = extents.size();
  auto unflatten = [&](std::size_t flat, std::vector<long long>& idx) {
    for (std::size_t a = rank; a-- > 0;) {
      idx[a] = static_cast<long long>(flat) % extents[a];
      flat /= static_cast<std::size_t>(extents[a]);
    }
  };
  auto flatten = [&](const std::vector<long long>& idx) {
    std::size_t flat = 0;
    for (std::size_t a = 0; a < rank; ++a)
      flat = flat * static_cast<std::size_t>(extents[a]) + static_cast<std::size_t>(idx[a]);
    return flat;
  };

  std::vector<long long> iv(rank), jv(rank), kv(rank);
  for (std::size_t i = 0; i < total; ++i) {
    unflatten(i, iv);
    out.values[i] = w * pairwise_map_sum(total, [&](std::size_t j) {
      unflatten(j, jv);
      for (std::size_t a = 0; a < rank; ++a)
        kv[a] = ((iv[a] - jv[a] + offsets[a]) % extents[a] + extents[a]) % extents[a];
      return u.values[j] * v.values[flatten(kv)];
    });
  }
  return out;
}

// ---- norm inequality check --------------------------------------------------

struct NormProductCheck {
  double lhs = 0.0;  // ||u ** v||_p
  double rhs = 0.0;  // ||u||_p * ||v||_1
  bool pass = false;
};

// Checks ||u ** v||_p <= ||u||_p ||v||_1 on the product grid (exact equality
// for p = 1 and nonnegative data).
inline NormProductCheck young_check(const TwoScaleField& u, const TwoScaleField& v, double p) {
  NormProductCheck c;
  c.lhs = lp_norm(double_conv(u, v), p);
  c.rhs = lp_norm(u, p) * lp_norm(v, 1.0);
  c.pass = c.lhs <= c.rhs + 1e-12 * std::max(1.0, c.rhs);
  return c;
}

inline NormProductCheck young_check(const MacroField& u, const MacroField& v, double p) {
  NormProductCheck c;
  c.lhs = lp_norm(conv_macro(u, v), p);
  c.rhs = lp_norm(u, p) * lp_norm(v, 1.0);
  c.pass = c.lhs <= c.rhs + 1e-12 * std::max(1.0, c.rhs);
  return c;
}

}  // namespace nfh
