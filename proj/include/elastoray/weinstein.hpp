#pragma once

#include <unsupported/Eigen/FFT>

#include <Eigen/Eigenvalues>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "quadrature.hpp"

// Grid-based realization of tau-scaled wave-packet pairings for
// distributions on R^n, n in {1, 2}.
namespace elastoray::weinstein {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

constexpr double kPi = std::numbers::pi;

/// Deviations below this count as exact (no rate is fitted).
constexpr double kExactFloor = 1e-9;
/// Pairings below this fraction of the integrand's L1 mass are numerically
/// indistinguishable from zero.
constexpr double kNoiseFloor = 1e-12;
/// Ratios and relative differences are only formed for pairings above this
/// fraction of the L1 mass (rounding then stays below the exact floor).
constexpr double kConditionFloor = 1e-6;

// ---------------------------------------------------------------------------
// Gauss-Hermite rule for the weight exp(-w^2) (Golub-Welsch).

struct GaussHermite {
  std::vector<double> nodes, weights;
};

inline const GaussHermite& gauss_hermite(int m) {
  static std::mutex mtx;
  static std::map<int, GaussHermite> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(m);
  if (it != cache.end()) return it->second;
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(m), sub(std::max(m - 1, 1));
  for (int k = 1; k < m; ++k) sub(k - 1) = std::sqrt(0.5 * k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub.head(m - 1));
  GaussHermite gh;
  for (int k = 0; k < m; ++k) {
    gh.nodes.push_back(es.eigenvalues()(k));
    const double v = es.eigenvectors()(0, k);
    gh.weights.push_back(std::sqrt(kPi) * v * v);
  }
  return cache.emplace(m, gh).first->second;
}

// ---------------------------------------------------------------------------
// Grids

struct Grid {
  int n = 1;
  Vec2 origin = Vec2::Zero();
  Vec2 spacing = Vec2::Constant(1.0);
  std::array<int, 2> count{1, 1};

  /// Grid of `points` nodes per axis over [center - length/2, center + length/2).
  static Grid centered(int n, const Vec2& center, double length, int points) {
    if (n != 1 && n != 2) throw Error(ErrorKind::InvalidArgument, "dimension must be 1 or 2");
    Grid g;
    g.n = n;
    const double h = length / points;
    g.origin = center - Vec2::Constant(0.5 * length);
    g.spacing = Vec2::Constant(h);
    g.count = {points, n == 2 ? points : 1};
    if (n == 1) g.origin(1) = 0.0;
    return g;
  }
  std::size_t size() const { return static_cast<std::size_t>(count[0]) * count[1]; }
  Vec2 point(int i, int j = 0) const {
    return Vec2(origin(0) + i * spacing(0), n == 2 ? origin(1) + j * spacing(1) : 0.0);
  }
  std::size_t index(int i, int j = 0) const { return static_cast<std::size_t>(i) * count[1] + static_cast<std::size_t>(j); }
  double cell_volume() const { return n == 2 ? spacing(0) * spacing(1) : spacing(0); }
  double length(int axis) const { return count[static_cast<std::size_t>(axis)] * spacing(axis); }
  /// Angular frequency of DFT index k on an axis.
  double frequency(int axis, int k) const {
    const int N = count[static_cast<std::size_t>(axis)];
    const int kk = k < N / 2 ? k : k - N;
    return 2.0 * kPi * kk / (N * spacing(axis));
  }
};

// ---------------------------------------------------------------------------
// Analytic descriptors

enum class DescriptorKind { PointMass, PointMassDerivative, Gaussian, PlaneWave, JumpProfile };

inline const char* to_string(DescriptorKind k) {
  switch (k) {
    case DescriptorKind::PointMass: return "point_mass";
    case DescriptorKind::PointMassDerivative: return "point_mass_derivative";
    case DescriptorKind::Gaussian: return "gaussian";
    case DescriptorKind::PlaneWave: return "plane_wave";
    case DescriptorKind::JumpProfile: return "jump";
  }
  return "?";
}

/// point_mass:            A delta_a
/// point_mass_derivative: A d_axis delta_a
/// gaussian:              A exp(i zeta . x) exp(-|x - a|^2 / (2 width^2))
/// plane_wave:            A exp(i zeta . x)
/// jump (n = 1):          A exp(i zeta x) H(side (x - a))
struct Descriptor {
  DescriptorKind kind = DescriptorKind::PointMass;
  cplx amplitude = 1.0;
  Vec2 position = Vec2::Zero();
  Vec2 zeta = Vec2::Zero();
  double width = 1.0;
  int axis = 0;
  int side = +1;

  bool samplable() const { return kind == DescriptorKind::Gaussian || kind == DescriptorKind::PlaneWave || kind == DescriptorKind::JumpProfile; }

  cplx value(const Vec2& x) const {
    switch (kind) {
      case DescriptorKind::Gaussian:
        return amplitude * std::exp(I_unit * zeta.dot(x)) * std::exp(-(x - position).squaredNorm() / (2 * width * width));
      case DescriptorKind::PlaneWave: return amplitude * std::exp(I_unit * zeta.dot(x));
      case DescriptorKind::JumpProfile: {
        const double d = side * (x(0) - position(0));
        const double H = d > 0 ? 1.0 : (d == 0 ? 0.5 : 0.0);
        return amplitude * std::exp(I_unit * zeta(0) * x(0)) * H;
      }
      default: throw Error(ErrorKind::InvalidArgument, std::string("cannot sample a ") + to_string(kind));
    }
  }
};

// ---------------------------------------------------------------------------
// Fourier multipliers (x-independent symbols, d <-> i xi)

struct Multiplier {
  std::string name = "identity";
  double order = 0.0;
  std::function<cplx(const Vec2&)> symbol = [](const Vec2&) { return cplx(1.0); };
  /// Principal part (homogeneous of degree `order`); defaults to the symbol.
  std::function<cplx(const Vec2&)> principal;
  /// Largest spatial translation the operator induces.
  double reach = 0.0;

  cplx operator()(const Vec2& xi) const { return symbol(xi); }
  cplx principal_at(const Vec2& xi) const { return principal ? principal(xi) : symbol(xi); }

  static Multiplier identity() { return Multiplier{}; }
  /// |xi|^a
  static Multiplier abs_power(double a) {
    return Multiplier{"|D|^" + std::to_string(a), a, [a](const Vec2& x) { return cplx(std::pow(x.norm(), a)); }, {}};
  }
  /// i xi_axis (the derivative d_axis)
  static Multiplier derivative(int axis) {
    return Multiplier{"iD" + std::to_string(axis), 1.0, [axis](const Vec2& x) { return I_unit * x(axis); }, {}};
  }
  /// -|xi|^2 (the Laplacian)
  static Multiplier laplacian() {
    return Multiplier{"laplacian", 2.0, [](const Vec2& x) { return cplx(-x.squaredNorm()); }, {}};
  }
  struct Monomial {
    cplx coefficient;
    int p = 0, q = 0;  // xi_1^p xi_2^q
  };
  static Multiplier polynomial(std::vector<Monomial> terms) {
    int deg = 0;
    for (const auto& t : terms) deg = std::max(deg, t.p + t.q);
    auto eval = [terms](const Vec2& x, int only_degree) {
      cplx acc = 0.0;
      for (const auto& t : terms)
        if (only_degree < 0 || t.p + t.q == only_degree) acc += t.coefficient * std::pow(x(0), t.p) * std::pow(x(1), t.q);
      return acc;
    };
    return Multiplier{"polynomial", static_cast<double>(deg), [eval](const Vec2& x) { return eval(x, -1); },
                      [eval, deg](const Vec2& x) { return eval(x, deg); }};
  }
  /// Smooth low-pass cutoff: 1 for |xi| <= R, 0 for |xi| >= R + w, C-infinity in between.
  static Multiplier smoothed_cutoff(double R, double w) {
    auto bump = [](double t) { return t <= 0 ? 0.0 : std::exp(-1.0 / t); };
    return Multiplier{"cutoff", 0.0, [=](const Vec2& x) {
                        const double t = (x.norm() - R) / w;
                        if (t <= 0) return cplx(1.0);
                        if (t >= 1) return cplx(0.0);
                        return cplx(bump(1 - t) / (bump(1 - t) + bump(t)));
                      },
                      [](const Vec2&) { return cplx(0.0); }};
  }
  /// exp(-i sign t c |xi|): the half-wave propagator.
  static Multiplier half_wave(double t, double c, int sign) {
    return Multiplier{"half_wave", 0.0, [=](const Vec2& x) { return std::exp(-I_unit * double(sign) * t * c * x.norm()); }, {},
                      std::abs(t * c)};
  }
  friend Multiplier compose(const Multiplier& a, const Multiplier& b) {
    return Multiplier{a.name + "*" + b.name, a.order + b.order, [a, b](const Vec2& x) { return a(x) * b(x); },
                      [a, b](const Vec2& x) { return a.principal_at(x) * b.principal_at(x); }, a.reach + b.reach};
  }
};

// ---------------------------------------------------------------------------
// Distributions

struct SampledDistribution {
  int n = 1;
  std::optional<Grid> grid;
  std::vector<cplx> values;
  std::optional<Descriptor> descriptor;
  /// Multipliers applied to a descriptor, evaluated through the transpose at
  /// pairing time (singular distributions cannot be sampled).
  std::vector<Multiplier> pending;

  static SampledDistribution from_descriptor(int n, const Descriptor& d, std::optional<Grid> grid = std::nullopt) {
    if (n != 1 && n != 2) throw Error(ErrorKind::InvalidArgument, "dimension must be 1 or 2");
    if (d.kind == DescriptorKind::JumpProfile && n != 1) throw Error(ErrorKind::InvalidArgument, "jump profiles are one-dimensional");
    if (d.kind == DescriptorKind::PointMassDerivative && (d.axis < 0 || d.axis >= n))
      throw Error(ErrorKind::InvalidArgument, "derivative axis out of range");
    SampledDistribution g;
    g.n = n;
    g.descriptor = d;
    if (grid) {
      if (grid->n != n) throw Error(ErrorKind::InvalidArgument, "grid dimension mismatch");
      g.grid = grid;
      if (d.samplable()) {
        g.values.resize(grid->size());
        for (int i = 0; i < grid->count[0]; ++i)
          for (int j = 0; j < grid->count[1]; ++j) g.values[grid->index(i, j)] = d.value(grid->point(i, j));
      }
    }
    return g;
  }

  static SampledDistribution from_samples(const Grid& grid, std::vector<cplx> values) {
    if (values.size() != grid.size()) throw Error(ErrorKind::InvalidArgument, "sample count does not match the grid");
    SampledDistribution g;
    g.n = grid.n;
    g.grid = grid;
    g.values = std::move(values);
    return g;
  }

  /// Grid samples take precedence over the descriptor unless multipliers are pending.
  bool uses_samples() const { return !values.empty() && pending.empty(); }

  SampledDistribution scaled(cplx a) const {
    SampledDistribution g = *this;
    for (auto& v : g.values) v *= a;
    if (g.descriptor) g.descriptor->amplitude *= a;
    return g;
  }
};

// ---------------------------------------------------------------------------
// Wave packets

struct WavePacket {
  int n = 1;
  Vec2 x0 = Vec2::Zero();
  Vec2 xi0 = Vec2(1.0, 0.0);
  double sigma = 1.0;
  double truncation = 6.0;          // envelope support radius in units of sigma
  Vec2 shift = Vec2::Zero();        // envelope centre in scaled coordinates z
  std::optional<Vec2> phase_ref;    // defaults to x0
  std::vector<double> ladder{64.0, 128.0, 256.0, 512.0, 1024.0};

  Vec2 reference() const { return phase_ref ? *phase_ref : x0; }

  /// u(z) = exp(-|z - shift|^2 / (2 sigma^2)), truncated at `truncation` sigma.
  double envelope(const Vec2& z) const {
    const double r2 = (z - shift).squaredNorm();
    if (r2 > truncation * truncation * sigma * sigma) return 0.0;
    return std::exp(-r2 / (2 * sigma * sigma));
  }
  Vec2 envelope_gradient(const Vec2& z) const { return -(z - shift) / (sigma * sigma) * envelope(z); }

  /// u_tau(x) = tau^{n/2} exp(-i tau (x - r) . xi0) u(sqrt(tau) (x - x0)).
  cplx value(const Vec2& x, double tau) const {
    const Vec2 z = std::sqrt(tau) * (x - x0);
    return std::pow(tau, 0.5 * n) * std::exp(-I_unit * tau * (x - reference()).dot(xi0)) * envelope(z);
  }

  /// Axis-aligned box containing the envelope support at scale tau.
  std::pair<Vec2, Vec2> support(double tau) const {
    const double r = truncation * sigma / std::sqrt(tau);
    const Vec2 c = x0 + shift / std::sqrt(tau);
    return {c - Vec2::Constant(r), c + Vec2::Constant(r)};
  }

  void validate() const {
    if (n != 1 && n != 2) throw Error(ErrorKind::InvalidArgument, "packet dimension must be 1 or 2");
    if (xi0.head(n).norm() == 0.0) throw Error(ErrorKind::InvalidArgument, "packet covector must be nonzero");
    if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "envelope width must be positive");
  }
};

struct Pairing {
  cplx value{0.0, 0.0};
  double scale = 0.0;  // L1 mass of the quadrature terms
  bool exact = false;  // closed form, no quadrature
  bool resolved() const { return exact ? std::abs(value) > 1e-300 : std::abs(value) > std::max(1e-300, kNoiseFloor * scale); }
  bool conditioned() const { return exact ? std::abs(value) > 1e-300 : std::abs(value) > std::max(1e-300, kConditionFloor * scale); }
};

namespace detail {

inline void check_resolution(const Grid& g, const WavePacket& p, double tau) {
  for (int a = 0; a < g.n; ++a)
    if (g.spacing(a) * tau * std::abs(p.xi0(a)) > 2 * kPi / 8)
      throw Error(ErrorKind::UnderResolved, "grid spacing " + std::to_string(g.spacing(a)) +
                                                " gives fewer than 8 samples per oscillation at tau = " + std::to_string(tau));
}

inline void check_inside(const Grid& g, const WavePacket& p, double tau) {
  const auto [lo, hi] = p.support(tau);
  for (int a = 0; a < g.n; ++a)
    if (lo(a) < g.origin(a) || hi(a) > g.origin(a) + g.length(a) - g.spacing(a))
      throw Error(ErrorKind::WraparoundRisk, "packet support leaves the sampling window");
}

/// Transposed composite symbol prod m_i(-xi).
inline cplx transposed_symbol(const std::vector<Multiplier>& ops, const Vec2& xi) {
  cplx m = 1.0;
  for (const auto& op : ops) m *= op(Vec2(-xi));
  return m;
}

/// (2 pi)^{-n} int K(xi) G(xi) phi_hat(xi) dxi by Gauss-Hermite quadrature, where
/// G(xi) = exp(-g_prec |xi - nu|^2 / 2) is an optional Gaussian factor of the kernel.
/// The nodes follow the combined Gaussian of G and the packet envelope; K
/// must include the exp(i xi . (. - x0)) phases, whose spatial extent is
/// bounded by `reach` (the rule is refined until it resolves them).
template <class Kernel>
Pairing fourier_pairing(const WavePacket& p, double tau, int nodes, const Kernel& K, double reach, double g_prec = 0.0,
                        Vec2 nu = Vec2::Zero()) {
  const int n = p.n;
  const double st = std::sqrt(tau);
  const double pk = p.sigma * p.sigma / tau;
  const double a = pk + g_prec;
  Vec2 mu = (-pk * tau * p.xi0 + g_prec * nu) / a;
  if (n == 1) mu(1) = 0.0;
  const double E0 = -0.5 * pk * (mu + tau * p.xi0).squaredNorm() - 0.5 * g_prec * (mu - nu).squaredNorm();
  const double s = std::sqrt(2.0 / a);
  const double omega = s * (reach + p.shift.norm() / st);
  nodes = std::max(nodes, std::min(n == 1 ? 1500 : 400, static_cast<int>(std::ceil(0.5 * omega * omega + 40))));
  const auto& gh = gauss_hermite(nodes);
  const double jac = std::pow(s, n) * std::pow(2 * kPi * p.sigma * p.sigma, 0.5 * n) / std::pow(2 * kPi, n) * std::exp(E0);
  const cplx ref_phase = std::exp(-I_unit * tau * (p.x0 - p.reference()).dot(p.xi0));
  Pairing out;
  const int m2 = n == 2 ? nodes : 1;
  for (int i = 0; i < nodes; ++i)
    for (int j = 0; j < m2; ++j) {
      const Vec2 w(gh.nodes[static_cast<std::size_t>(i)], n == 2 ? gh.nodes[static_cast<std::size_t>(j)] : 0.0);
      const double W = gh.weights[static_cast<std::size_t>(i)] * (n == 2 ? gh.weights[static_cast<std::size_t>(j)] : 1.0);
      const Vec2 xi = mu + s * w;
      const Vec2 k = (xi + tau * p.xi0) / st;
      const cplx term = W * K(xi) * std::exp(-I_unit * k.dot(p.shift));
      out.value += term;
      out.scale += std::abs(term);
    }
  out.value *= jac * ref_phase;
  out.scale *= jac;
  return out;
}

/// phi_hat(xi) for the packet (untruncated Gaussian envelope).
inline cplx packet_hat(const WavePacket& p, double tau, const Vec2& xi) {
  const Vec2 k = (xi + tau * p.xi0) / std::sqrt(tau);
  return std::exp(-I_unit * tau * (p.x0 - p.reference()).dot(p.xi0)) * std::exp(-I_unit * xi.dot(p.x0)) *
         std::pow(2 * kPi * p.sigma * p.sigma, 0.5 * p.n) * std::exp(-I_unit * k.dot(p.shift)) *
         std::exp(-0.5 * p.sigma * p.sigma * k.squaredNorm());
}

inline void fft_nd(const Grid& g, std::vector<cplx>& data, bool inverse) {
  Eigen::FFT<double> fft;
  const int N0 = g.count[0], N1 = g.count[1];
  std::vector<cplx> in, out;
  if (N1 > 1) {
    in.resize(static_cast<std::size_t>(N1));
    for (int i = 0; i < N0; ++i) {
      for (int j = 0; j < N1; ++j) in[static_cast<std::size_t>(j)] = data[g.index(i, j)];
      if (inverse) fft.inv(out, in);
      else fft.fwd(out, in);
      for (int j = 0; j < N1; ++j) data[g.index(i, j)] = out[static_cast<std::size_t>(j)];
    }
  }
  in.resize(static_cast<std::size_t>(N0));
  for (int j = 0; j < N1; ++j) {
    for (int i = 0; i < N0; ++i) in[static_cast<std::size_t>(i)] = data[g.index(i, j)];
    if (inverse) fft.inv(out, in);
    else fft.fwd(out, in);
    for (int i = 0; i < N0; ++i) data[g.index(i, j)] = out[static_cast<std::size_t>(i)];
  }
}

/// Fraction of the maximum modulus found in the outer quarter band of the window.
inline double band_fraction(const Grid& g, const std::vector<cplx>& v) {
  double mx = 0.0, band = 0.0;
  for (int i = 0; i < g.count[0]; ++i)
    for (int j = 0; j < g.count[1]; ++j) {
      const double a = std::abs(v[g.index(i, j)]);
      mx = std::max(mx, a);
      auto outer = [](int k, int N) { return N > 1 && (k < N / 4 || k >= N - N / 4); };
      if (outer(i, g.count[0]) || outer(j, g.count[1])) band = std::max(band, a);
    }
  return mx > 0 ? band / mx : 0.0;
}

}  // namespace detail

/// <g, u_tau>: trapezoid quadrature on the sample grid, or closed forms /
/// Fourier-side Gauss-Hermite quadrature for analytic descriptors.
inline Pairing pair_packet_detailed(const SampledDistribution& g, const WavePacket& p, double tau, int nodes = 0) {
  p.validate();
  if (p.n != g.n) throw Error(ErrorKind::InvalidArgument, "packet and distribution dimensions differ");
  if (!(tau > 0.0)) throw Error(ErrorKind::InvalidArgument, "tau must be positive");
  if (nodes <= 0) nodes = g.n == 1 ? 96 : 64;
  if (g.uses_samples()) {
    const Grid& G = *g.grid;
    detail::check_resolution(G, p, tau);
    detail::check_inside(G, p, tau);
    Pairing out;
    for (int i = 0; i < G.count[0]; ++i)
      for (int j = 0; j < G.count[1]; ++j) {
        const cplx term = g.values[G.index(i, j)] * p.value(G.point(i, j), tau);
        out.value += term;
        out.scale += std::abs(term);
      }
    out.value *= G.cell_volume();
    out.scale *= G.cell_volume();
    return out;
  }
  if (!g.descriptor) throw Error(ErrorKind::InvalidArgument, "distribution has neither samples nor a descriptor");
  const Descriptor& d = *g.descriptor;
  const auto& ops = g.pending;
  const Vec2 x0 = p.x0;
  double reach = (d.position - x0).head(p.n).norm();
  for (const auto& op : ops) reach += op.reach;
  switch (d.kind) {
    case DescriptorKind::PointMass:
      if (ops.empty()) {
        Pairing out;
        out.value = d.amplitude * p.value(d.position, tau);
        out.scale = std::abs(out.value);
        out.exact = true;
        return out;
      }
      return detail::fourier_pairing(p, tau, nodes, [&](const Vec2& xi) {
        return d.amplitude * detail::transposed_symbol(ops, xi) * std::exp(I_unit * xi.dot(d.position - x0));
      }, reach);
    case DescriptorKind::PointMassDerivative:
      if (ops.empty()) {
        // <d_k delta_a, u_tau> = -d_k u_tau(a)
        const Vec2 z = std::sqrt(tau) * (d.position - x0);
        const cplx phase = std::pow(tau, 0.5 * p.n) * std::exp(-I_unit * tau * (d.position - p.reference()).dot(p.xi0));
        const cplx du = phase * (-I_unit * tau * p.xi0(d.axis) * p.envelope(z) + std::sqrt(tau) * p.envelope_gradient(z)(d.axis));
        Pairing out;
        out.value = -d.amplitude * du;
        out.scale = std::abs(out.value);
        out.exact = true;
        return out;
      }
      return detail::fourier_pairing(p, tau, nodes, [&](const Vec2& xi) {
        return -d.amplitude * I_unit * xi(d.axis) * detail::transposed_symbol(ops, xi) *
               std::exp(I_unit * xi.dot(d.position - x0));
      }, reach);
    case DescriptorKind::Gaussian:
      // g_hat(-xi) = A (2 pi w^2)^{n/2} e^{i (xi + zeta) . a} e^{-w^2 |xi + zeta|^2 / 2}
      return detail::fourier_pairing(p, tau, nodes, [&](const Vec2& xi) {
        return d.amplitude * std::pow(2 * kPi * d.width * d.width, 0.5 * p.n) * std::exp(I_unit * d.zeta.dot(d.position)) *
               std::exp(I_unit * xi.dot(d.position - x0)) * detail::transposed_symbol(ops, xi);
      }, reach, d.width * d.width, Vec2(-d.zeta));
    case DescriptorKind::PlaneWave: {
      // int e^{i zeta x} psi = psi_hat(-zeta)
      Vec2 z = d.zeta;
      if (p.n == 1) z(1) = 0.0;
      Pairing out;
      out.value = d.amplitude * detail::transposed_symbol(ops, Vec2(-z)) * detail::packet_hat(p, tau, Vec2(-z));
      out.scale = std::abs(out.value);
      out.exact = true;
      return out;
    }
    case DescriptorKind::JumpProfile: {
      // int_{side (x - b) > 0} e^{i zeta x} psi = 1/2 psi_hat(-zeta) + PV (1/2pi) int psi_hat(xi) side i e^{i(zeta+xi)b}/(zeta+xi)
      const double zeta = d.zeta(0), b = d.position(0);
      const double pole = (tau * p.xi0(0) - zeta) / std::sqrt(tau) * p.sigma;
      if (std::abs(pole) < 8.0)
        throw Error(ErrorKind::InvalidArgument, "jump modulation resonates with the packet frequency");
      Pairing out = detail::fourier_pairing(p, tau, nodes, [&](const Vec2& xi) {
        return d.amplitude * detail::transposed_symbol(ops, xi) * double(d.side) * I_unit *
               std::exp(I_unit * (zeta * b + xi(0) * (b - x0(0)))) / (zeta + xi(0));
      }, reach);
      const Vec2 mz(-zeta, 0.0);
      out.value += d.amplitude * 0.5 * detail::transposed_symbol(ops, mz) * detail::packet_hat(p, tau, mz);
      return out;
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown descriptor");
}

inline cplx pair_packet(const SampledDistribution& g, const WavePacket& p, double tau) {
  return pair_packet_detailed(g, p, tau).value;
}

// ---------------------------------------------------------------------------
// Order estimation

struct LadderFit {
  double slope = 0.0, intercept = 0.0, half_width = 0.0;
  std::vector<double> residuals;
  int used = 0;
};

/// Least-squares line through (log tau, log y); half_width is twice the
/// standard error of the slope.
inline LadderFit fit_log_log(const std::vector<double>& tau, const std::vector<double>& y) {
  LadderFit f;
  const std::size_t m = tau.size();
  f.used = static_cast<int>(m);
  if (m < 2) throw Error(ErrorKind::InvalidArgument, "a rate fit needs at least two rungs");
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < m; ++k) {
    mx += std::log(tau[k]);
    my += std::log(y[k]);
  }
  mx /= m;
  my /= m;
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < m; ++k) {
    const double dx = std::log(tau[k]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[k]) - my);
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (std::size_t k = 0; k < m; ++k) {
    const double r = std::log(y[k]) - (f.intercept + f.slope * std::log(tau[k]));
    f.residuals.push_back(r);
    ss += r * r;
  }
  f.half_width = m > 2 ? 2.0 * std::sqrt(ss / (m - 2) / sxx) : 0.0;
  return f;
}

struct OrderEstimate {
  std::vector<double> tau;
  std::vector<cplx> pairings;
  std::vector<bool> resolved;
  double order = 0.0;       // fitted N
  double half_width = 0.0;
  std::vector<double> residuals;
  int rungs_used = 0;
  /// Trailing rungs fell below the quadrature noise floor: the pairing
  /// decays faster than the fit can follow.
  bool decays_to_floor = false;
};

inline OrderEstimate estimate_order(const SampledDistribution& g, const WavePacket& p) {
  if (p.ladder.size() < 4) throw Error(ErrorKind::InvalidArgument, "the tau ladder needs at least 4 rungs");
  OrderEstimate est;
  std::vector<double> tt, yy;
  bool any = false;
  for (double tau : p.ladder) {
    const Pairing pr = pair_packet_detailed(g, p, tau);
    est.tau.push_back(tau);
    est.pairings.push_back(pr.value);
    est.resolved.push_back(pr.resolved());
    if (std::abs(pr.value) > 1e-300) any = true;
    if (pr.resolved()) {
      tt.push_back(tau);
      yy.push_back(std::abs(pr.value));
    }
  }
  if (!any) throw Error(ErrorKind::ZeroPairing, "all pairings vanish on the ladder");
  est.decays_to_floor = !est.resolved.back();
  if (tt.size() >= 2) {
    const LadderFit f = fit_log_log(tt, yy);
    est.order = f.slope;
    est.half_width = f.half_width;
    est.residuals = f.residuals;
    est.rungs_used = f.used;
  } else {
    est.order = -std::numeric_limits<double>::infinity();
    est.rungs_used = static_cast<int>(tt.size());
  }
  return est;
}

// ---------------------------------------------------------------------------
// Operators on distributions

/// Spectral application of a multiplier. Sampled data are transformed on the
/// grid; analytic descriptors keep the multiplier for transposed pairing.
inline SampledDistribution psido_apply(const SampledDistribution& g, const Multiplier& m) {
  SampledDistribution out = g;
  if (!g.uses_samples()) {
    if (!g.descriptor) throw Error(ErrorKind::InvalidArgument, "nothing to apply the multiplier to");
    out.values.clear();
    out.pending.push_back(m);
    return out;
  }
  const Grid& G = *g.grid;
  const double band = detail::band_fraction(G, g.values);
  if (band > 1e-10)
    throw Error(ErrorKind::WraparoundRisk, "support margin below 25% of the window (band fraction " + std::to_string(band) + ")");
  std::vector<cplx> data = g.values;
  detail::fft_nd(G, data, false);
  for (int i = 0; i < G.count[0]; ++i)
    for (int j = 0; j < G.count[1]; ++j) {
      const Vec2 xi(G.frequency(0, i), G.n == 2 ? G.frequency(1, j) : 0.0);
      data[G.index(i, j)] *= m(xi);
    }
  detail::fft_nd(G, data, true);
  out.values = std::move(data);
  out.descriptor.reset();
  return out;
}

inline SampledDistribution fio_propagate_constant_speed(const SampledDistribution& g, double t, double c, int sign) {
  if (sign != 1 && sign != -1) throw Error(ErrorKind::InvalidArgument, "sign must be +1 or -1");
  SampledDistribution out = psido_apply(g, Multiplier::half_wave(t, c, sign));
  if (out.uses_samples() && detail::band_fraction(*out.grid, out.values) > 1e-8)
    throw Error(ErrorKind::WraparoundRisk, "propagated distribution reaches the window margin");
  return out;
}

// ---------------------------------------------------------------------------
// Symbol-law verification

struct LawReport {
  std::string law;
  std::vector<double> tau;
  std::vector<cplx> lhs, rhs, ratio;
  std::vector<double> deviation;
  std::vector<bool> resolved;  // rungs above the conditioning floor
  double slope = 0.0, slope_threshold = -0.4;
  double order = 0.0;  // order of the reference pairings
  bool exact = false;  // every deviation below the exact floor
  bool pass = false;
  std::string note;
};

namespace detail {

inline void finish_rate(LawReport& r, const std::vector<double>& tau, const std::vector<double>& dev,
                        const std::vector<bool>& mask = {}) {
  auto used = [&](std::size_t k) { return mask.empty() || mask[k]; };
  double mx = 0.0;
  for (std::size_t k = 0; k < dev.size(); ++k)
    if (used(k)) mx = std::max(mx, dev[k]);
  if (mx < kExactFloor) {
    r.exact = true;
    r.pass = true;
    r.slope = -std::numeric_limits<double>::infinity();
    return;
  }
  std::vector<double> tt, dd;
  for (std::size_t k = 0; k < tau.size(); ++k)
    if (used(k) && dev[k] > 0.0) {
      tt.push_back(tau[k]);
      dd.push_back(dev[k]);
    }
  r.slope = tt.size() >= 2 ? fit_log_log(tt, dd).slope : -std::numeric_limits<double>::infinity();
  r.pass = r.slope <= r.slope_threshold;
}

}  // namespace detail

/// ratio_tau = <(P g)^tau, u> / (p_m(tau xi0) <g^tau, u>) -> 1.
inline LawReport verify_psido_symbol_law(const SampledDistribution& g, const WavePacket& p, const Multiplier& P) {
  LawReport r;
  r.law = "psido:" + P.name;
  const SampledDistribution Pg = psido_apply(g, P);
  std::vector<double> tt, ref;
  for (double tau : p.ladder) {
    const Pairing base = pair_packet_detailed(g, p, tau);
    const Pairing lhs = pair_packet_detailed(Pg, p, tau);
    Vec2 xi = tau * p.xi0;
    if (p.n == 1) xi(1) = 0.0;
    const cplx rhs = P.principal_at(xi) * base.value;
    const bool ok = base.conditioned() && lhs.conditioned();
    r.tau.push_back(tau);
    r.lhs.push_back(lhs.value);
    r.rhs.push_back(rhs);
    r.ratio.push_back(lhs.value / rhs);
    r.resolved.push_back(ok);
    r.deviation.push_back(ok ? std::abs(lhs.value / rhs - 1.0) : 0.0);
    if (ok) {
      tt.push_back(tau);
      ref.push_back(std::abs(base.value));
    }
  }
  if (tt.empty()) throw Error(ErrorKind::ZeroPairing, "pairings vanish on the ladder");
  r.order = tt.size() >= 2 ? fit_log_log(tt, ref).slope : -std::numeric_limits<double>::infinity();
  detail::finish_rate(r, r.tau, r.deviation, r.resolved);
  return r;
}

/// One-dimensional diffeomorphism theta(x) = sum_k c_k x^k.
struct Diffeo1 {
  std::vector<double> coeffs{0.0, 1.0};

  static Diffeo1 affine(double a, double b) { return Diffeo1{{b, a}}; }
  static Diffeo1 perturbed_identity(std::vector<double> higher) {
    Diffeo1 d;
    d.coeffs = {0.0, 1.0};
    for (double c : higher) d.coeffs.push_back(c);
    return d;
  }
  bool is_affine() const {
    for (std::size_t k = 2; k < coeffs.size(); ++k)
      if (coeffs[k] != 0.0) return false;
    return true;
  }
  double operator()(double x) const {
    double acc = 0.0;
    for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * x + coeffs[k];
    return acc;
  }
  double derivative(double x) const {
    double acc = 0.0;
    for (std::size_t k = coeffs.size(); k-- > 1;) acc = acc * x + k * coeffs[k];
    return acc;
  }
  double inverse(double y, double guess) const {
    double x = guess;
    for (int it = 0; it < 100; ++it) {
      const double step = ((*this)(x) - y) / derivative(x);
      x -= step;
      if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(x))) break;
    }
    return x;
  }
};

/// Compares <(g o theta)^tau_{phi o theta}, u> with <g^tau_phi o d_{x0}theta, u>
/// (n = 1). The packet's x0 lives in the source coordinates; its covector is
/// the phase gradient at y0 = theta(x0).
inline LawReport verify_pullback_law(const SampledDistribution& g, const Diffeo1& theta, const WavePacket& p) {
  if (p.n != 1 || g.n != 1) throw Error(ErrorKind::InvalidArgument, "pullback verification is one-dimensional");
  if (!g.descriptor || !g.pending.empty()) throw Error(ErrorKind::InvalidArgument, "pullback needs an analytic descriptor");
  const Descriptor& d = *g.descriptor;
  if (d.kind == DescriptorKind::PointMassDerivative)
    throw Error(ErrorKind::InvalidArgument, "pullback of point-mass derivatives is not supported");
  LawReport r;
  r.law = "pullback";
  const double x0 = p.x0(0), y0 = theta(x0), J = theta.derivative(x0), xi0 = p.xi0(0);
  if (!(J > 0.0)) throw Error(ErrorKind::InvalidArgument, "theta must be orientation preserving at x0");
  auto lin = [&](double x) { return y0 + J * (x - x0); };
  std::vector<double> ref;
  for (double tau : p.ladder) {
    const double st = std::sqrt(tau);
    const auto [lo2, hi2] = p.support(tau);
    const double lo = lo2(0), hi = hi2(0);
    for (double x : {lo, hi})
      if (!(theta.derivative(x) > 0.0)) throw Error(ErrorKind::InvalidArgument, "theta is not monotone on the packet support");
    auto envelope = [&](double x) { return st * p.envelope(Vec2(st * (x - x0), 0.0)); };
    // integral over [a, b] of g(map(x)) e^{-i tau (map(x) - y0) xi0} u_tau, with its L1 mass
    auto integral = [&](const std::function<double(double)>& map, double a, double b) -> Pairing {
      Pairing out;
      if (b <= a) return out;
      auto f = [&](double x) {
        const double y = map(x);
        const cplx gv = d.kind == DescriptorKind::JumpProfile ? d.amplitude * std::exp(I_unit * d.zeta(0) * y) : d.value(Vec2(y, 0.0));
        return gv * std::exp(-I_unit * tau * (y - y0) * xi0) * envelope(x);
      };
      out.scale = quad::adaptive_simpson<double>([&](double x) { return std::abs(f(x)); }, a, b, 1e-10 * st * (b - a), 16);
      out.value = quad::adaptive_simpson<cplx>(f, a, b, 1e-14 * std::max(out.scale, 1e-300), 64);
      return out;
    };
    Pairing L, R;
    if (d.kind == DescriptorKind::PointMass) {
      const double c = d.position(0);
      const double xl = theta.inverse(c, x0), xr = x0 + (c - y0) / J;
      L.value = d.amplitude * std::exp(-I_unit * tau * (c - y0) * xi0) * envelope(xl) / theta.derivative(xl);
      R.value = d.amplitude * std::exp(-I_unit * tau * (c - y0) * xi0) * envelope(xr) / J;
      L.exact = R.exact = true;
    } else if (d.kind == DescriptorKind::JumpProfile) {
      // split at the preimage of the jump and keep the supported side
      const double c = d.position(0);
      const double xl = theta.inverse(c, x0), xr = x0 + (c - y0) / J;
      L = d.side > 0 ? integral([&](double x) { return theta(x); }, std::max(lo, xl), hi)
                     : integral([&](double x) { return theta(x); }, lo, std::min(hi, xl));
      R = d.side > 0 ? integral(lin, std::max(lo, xr), hi) : integral(lin, lo, std::min(hi, xr));
    } else {
      L = integral([&](double x) { return theta(x); }, lo, hi);
      R = integral(lin, lo, hi);
    }
    r.tau.push_back(tau);
    r.lhs.push_back(L.value);
    r.rhs.push_back(R.value);
    r.ratio.push_back(L.value / R.value);
    r.resolved.push_back(R.conditioned());
    r.deviation.push_back(r.resolved.back() ? std::abs(L.value - R.value) / std::abs(R.value) : 0.0);
    ref.push_back(std::abs(R.value));
  }
  std::vector<double> tt, rr;
  for (std::size_t k = 0; k < r.tau.size(); ++k)
    if (r.resolved[k]) {
      tt.push_back(r.tau[k]);
      rr.push_back(ref[k]);
    }
  if (tt.empty()) throw Error(ErrorKind::ZeroPairing, "pullback pairings vanish on the ladder");
  r.order = tt.size() >= 2 ? fit_log_log(tt, rr).slope : -std::numeric_limits<double>::infinity();
  detail::finish_rate(r, r.tau, r.deviation, r.resolved);
  return r;
}

struct FIOReport {
  LawReport law;                 // ratio and convergence of the extracted constant
  cplx constant{1.0, 0.0};       // tau-independent limit estimate
  double J_fitted = 1.0;         // |constant|
  std::vector<double> phase_error;  // per rung |ratio e^{+-i t c tau |xi0|} / constant - 1|
  double max_phase_error = 0.0;
  bool phase_pass = false;
};

/// Half-wave propagator A = exp(-i sign t c |D|) applied to g; the packet p
/// sits at the source point y0 = p.x0. The extraction packet is centred at
/// the canonical-graph image x0 = y0 + sign t c xi0/|xi0| with phase
/// referenced at y0, so that ratio_tau = <A g, u_tau^{x0}> / <g, u_tau^{y0}>
/// carries the phase exp(-i sign t c tau |xi0|).
inline FIOReport verify_fio_symbol_extraction(const SampledDistribution& g, double t, double c, int sign,
                                              const WavePacket& p) {
  FIOReport rep;
  rep.law.law = "fio";
  const SampledDistribution Ag = fio_propagate_constant_speed(g, t, c, sign);
  const Vec2 xi_hat = p.xi0.normalized();
  WavePacket q = p;
  q.x0 = p.x0 + sign * t * c * xi_hat;
  q.phase_ref = p.reference();
  const double k0 = p.xi0.head(p.n).norm();
  std::vector<double> ref;
  for (double tau : p.ladder) {
    const cplx base = pair_packet(g, p, tau);
    const cplx lhs = pair_packet(Ag, q, tau);
    rep.law.tau.push_back(tau);
    rep.law.lhs.push_back(lhs);
    rep.law.rhs.push_back(base);
    rep.law.ratio.push_back(lhs / base * std::exp(I_unit * double(sign) * t * c * tau * k0));
    ref.push_back(std::abs(base));
  }
  rep.law.order = fit_log_log(rep.law.tau, ref).slope;
  rep.constant = rep.law.ratio.back();
  rep.J_fitted = std::abs(rep.constant);
  // convergence of the ratio: successive differences along the ladder
  std::vector<double> tt, dd;
  for (std::size_t k = 0; k + 1 < rep.law.ratio.size(); ++k) {
    const double diff = std::abs(rep.law.ratio[k + 1] - rep.law.ratio[k]) / rep.J_fitted;
    rep.law.deviation.push_back(diff);
    tt.push_back(rep.law.tau[k]);
    dd.push_back(diff);
  }
  detail::finish_rate(rep.law, tt, dd);
  for (const auto& r : rep.law.ratio) {
    const double e = std::abs(r / rep.constant - 1.0);
    rep.phase_error.push_back(e);
    rep.max_phase_error = std::max(rep.max_phase_error, e);
  }
  rep.phase_pass = rep.max_phase_error < 1e-3;
  return rep;
}

/// Pairings of A g with packets centred at y0 + offset (off the canonical
/// graph when offset is not along sign t c xi0/|xi0|).
inline OrderEstimate fio_offgraph_decay(const SampledDistribution& g, double t, double c, int sign, const WavePacket& p,
                                        const Vec2& offset) {
  const SampledDistribution Ag = fio_propagate_constant_speed(g, t, c, sign);
  WavePacket q = p;
  q.x0 = p.x0 + offset;
  return estimate_order(Ag, q);
}

}  // namespace elastoray::weinstein
