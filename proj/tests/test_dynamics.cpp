#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "visco2d/constitutive.hpp"
#include "visco2d/dynamics.hpp"
#include "visco2d/harness.hpp"

using namespace visco2d;
using F = ScalarField<double>;
using T = SymTensorField<double>;
using V = VelocityField<double>;

namespace {
constexpr double pi = std::numbers::pi;
const VectorField2<double>* const kNoForce = nullptr;

double maxabs(const F& f) { return f.values().abs().maxCoeff(); }
double maxabs(const V& v) { return std::max(maxabs(v.x), maxabs(v.y)); }
double maxabs(const T& b) { return std::max({maxabs(b.b11), maxabs(b.b12), maxabs(b.b22)}); }

T d(const T& b, int axis) { return {derivative(b.b11, axis), derivative(b.b12, axis), derivative(b.b22, axis)}; }

V sub(const V& a, const V& b) {
  auto gp = a.x.grid_ptr();
  return {F::from_values(gp, a.x.values() - b.x.values()), F::from_values(gp, a.y.values() - b.y.values())};
}
T sub(const T& a, const T& b) {
  auto gp = a.b11.grid_ptr();
  return {F::from_values(gp, a.b11.values() - b.b11.values()), F::from_values(gp, a.b12.values() - b.b12.values()),
          F::from_values(gp, a.b22.values() - b.b22.values())};
}

ModelParams params(double a, double beta, double d1, double d2, double eps = 0) {
  ModelParams p;
  p.a = a;
  p.beta = beta;
  p.delta1 = d1;
  p.delta2 = d2;
  p.epsilon = eps;
  return p;
}
}  // namespace

TEST_CASE("Taylor-Green with a = 0 decays at rate 8 pi^2") {
  auto g = make_grid<double>(32);
  const auto s = taylor_green_state(g);
  const auto t = rhs(s, kNoForce, params(0, 0.5, 1, 0.5));
  CHECK(maxabs(sub(t.dv, V{F::from_values(g, -8 * pi * pi * s.v.x.values()),
                             F::from_values(g, -8 * pi * pi * s.v.y.values())})) < 1e-10);
  // B = I is an equilibrium of the tensor equation, also under the flow
  CHECK(maxabs(t.dB) < 1e-10);
}

TEST_CASE("tensor equation: relaxation and diffusion") {
  auto g = make_grid<double>(16);
  const State<double> rest(0.0, V(g), T::constant(g, 2, 0, 1));
  const auto r = tensor_rhs(rest, params(1, 0.5, 1, 0));
  CHECK(r.b11.values().maxCoeff() == doctest::Approx(-1).epsilon(1e-14));
  CHECK(r.b11.values().minCoeff() == doctest::Approx(-1).epsilon(1e-14));
  CHECK(maxabs(r.b12) < 1e-14);
  CHECK(maxabs(r.b22) < 1e-14);

  const auto wave = F::sample(g, [](double x, double) { return 0.1 * std::sin(2 * pi * x); });
  const State<double> diff(0.0, V(g), T{F::from_values(g, 1 + wave.values()), F(g), F::from_values(g, 1 - wave.values())});
  const auto q = tensor_rhs(diff, params(1, 0.5, 0, 0));
  CHECK(maxabs(sub(q, T{F::from_values(g, -4 * pi * pi * wave.values()), F(g),
                         F::from_values(g, 4 * pi * pi * wave.values())})) < 1e-11);
}

TEST_CASE("trace equation at rest: d(tr B) = Lap(tr B) - tr R") {
  auto g = make_grid<double>(32);
  auto s = random_smooth_state(g, 3);
  s.v = V(g);
  const auto p = params(1, 0.4, 0.7, 0.3);
  const auto efg = to_efg(tensor_rhs(s, p));
  const auto tr = to_efg(s.B).g;
  const auto r = relax_R(s.B, p);
  const RealArray<double> expect = laplacian(tr).values() - (r.b11.values() + r.b22.values());
  CHECK((efg.g.values() - expect).abs().maxCoeff() < 1e-9);
}

TEST_CASE("momentum with a = 0 does not see B") {
  auto g = make_grid<double>(32);
  auto s = random_smooth_state(g, 11);
  const auto p = params(0, 0.5, 1, 0.5);
  auto s2 = s;
  s2.B = T::constant(g, 3, 1, 1);
  CHECK(maxabs(sub(momentum_rhs(s, kNoForce, p), momentum_rhs(s2, kNoForce, p))) == 0);
}

TEST_CASE("regularized assembly") {
  auto g = make_grid<double>(32);
  const auto s = random_smooth_state(g, 4);
  const auto p = params(1, 0.5, 1, 0.5);
  CHECK(maxabs(sub(momentum_rhs_regularized(s, kNoForce, p), momentum_rhs(s, kNoForce, p))) == 0);
  CHECK(maxabs(sub(tensor_rhs_regularized(s, p), tensor_rhs(s, p))) == 0);

  // eps above every eigenvalue switches off the coupling and the sources
  const double big = 1e3;
  const auto pe = params(1, 0.5, 1, 0.5, big);
  auto s0 = s;
  s0.B = T::identity(g);
  CHECK(maxabs(sub(momentum_rhs_regularized(s, kNoForce, pe), momentum_rhs(s0, kNoForce, p))) < 1e-12);
  // with rho = 0 only diffusion and transport remain
  const auto db = tensor_rhs_regularized(s, pe);
  const auto transport = [&](const F& c) {
    return F::from_values(g, laplacian(c).values() - s.v.x.values() * derivative(c, 0).values() -
                                 s.v.y.values() * derivative(c, 1).values());
  };
  CHECK(maxabs(sub(db, T{transport(s.B.b11), transport(s.B.b12), transport(s.B.b22)})) < 1e-9);
}

TEST_CASE("energy pairing identity on band-limited states") {
  auto g = make_grid<double>(64);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    CAPTURE(seed);
    const auto s = random_smooth_state(g, seed, 0.8, 0.5);
    for (const auto& p : {params(1, 0.5, 1, 0.5), params(0.3, 0.9, 0.2, 1.5), params(-0.5, 0.1, 2, 0)}) {
      const auto t = rhs(s, kNoForce, p);
      const auto J = conjugate_J(s.B, p);
      const auto R = relax_R(s.B, p);
      const auto D = velocity_gradient_parts(s.v).D;
      const double lhs = inner(t.dv, s.v) + inner(t.dB, J);
      const double diss =
          2 * norm_squared(D) + inner(d(s.B, 0), d(J, 0)) + inner(d(s.B, 1), d(J, 1)) + inner(R, J);
      CHECK(std::abs(lhs + diss) <= 1e-8 * std::max(1.0, diss));
    }
  }
}

TEST_CASE("pressure: Taylor-Green closed form and momentum balance") {
  auto g = make_grid<double>(32);
  const auto s = taylor_green_state(g);
  const auto p = params(1, 0.5, 1, 0.5);
  const auto pr = pressure_recover(s, kNoForce, p);
  const auto expect = F::sample(g, [](double x, double y) { return 0.25 * (std::cos(4 * pi * x) + std::cos(4 * pi * y)); });
  CHECK(maxabs(F::from_values(g, pr.values() - expect.values())) < 1e-12);
  CHECK(std::abs(pr.mean()) < 1e-14);

  // -(v.grad)v + Lap v + 2a div S - grad p equals the projected tendency
  const auto r = random_smooth_state(g, 8, 0.7);
  const auto q = pressure_recover(r, kNoForce, p);
  const auto S = stress_S(r.B, p);
  const auto& U = r.v.x.values();
  const auto& W = r.v.y.values();
  const RealArray<double> adv_x = U * derivative(r.v.x, 0).values() + W * derivative(r.v.x, 1).values();
  const RealArray<double> adv_y = U * derivative(r.v.y, 0).values() + W * derivative(r.v.y, 1).values();
  const RealArray<double> fx = -adv_x + laplacian(r.v.x).values() +
                               2 * p.a * (derivative(S.b11, 0).values() + derivative(S.b12, 1).values()) -
                               derivative(q, 0).values();
  const RealArray<double> fy = -adv_y + laplacian(r.v.y).values() +
                               2 * p.a * (derivative(S.b12, 0).values() + derivative(S.b22, 1).values()) -
                               derivative(q, 1).values();
  const auto m = momentum_rhs(r, kNoForce, p);
  const double scale = std::max(fx.abs().maxCoeff(), 1.0);
  CHECK((m.x.values() - fx).abs().maxCoeff() < 1e-9 * scale);
  CHECK((m.y.values() - fy).abs().maxCoeff() < 1e-9 * scale);
}

TEST_CASE("Galerkin truncation keeps only low modes") {
  auto g = make_grid<double>(32);
  const auto s = random_smooth_state(g, 6);
  const auto t = galerkin_truncate_rhs(rhs(s, kNoForce, params(1, 0.5, 1, 0.5)), 3);
  const auto& spec = t.dB.b11.spectrum();
  double outside = 0;
  for (int j = 0; j < 32; ++j)
    for (int i = 0; i < 32; ++i) {
      const int kx = i <= 16 ? i : i - 32, ky = j <= 16 ? j : j - 32;
      if (kx * kx + ky * ky > 9) outside = std::max(outside, std::abs(spec(i, j)));
    }
  CHECK(outside == 0);
  CHECK(divergence(t.dv).values().abs().maxCoeff() < 1e-10);
}

TEST_CASE("regularized initial tensor") {
  auto g = make_grid<double>(8);
  const auto b = regularize_initial_tensor(T::constant(g, 3, 1, 1), 0.5);
  CHECK(b.b11.values()(0, 0) == 3);
  const auto c = regularize_initial_tensor(T::constant(g, 3, 1, 1), 0.6);
  CHECK(c.b11.values()(0, 0) == 1);
  CHECK(c.b12.values()(0, 0) == 0);
}
