#include <doctest.h>

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "spreadfft/fft_pricer.hpp"

using namespace spreadfft;

namespace {

constexpr double kPi = std::numbers::pi;

Model gbm() { return Model{GbmParams{}}; }

Model sv() { return Model{SvParams{}}; }

Model vg_raw() {
  VgParams p;
  p.drift_correction = false;
  return Model{p};
}

}  // namespace

TEST_CASE("lattice invariants") {
  const Lattice lat = Lattice::from_ubar(256, 40.0);
  CHECK(lat.u_bar() == doctest::Approx(40.0).epsilon(1e-15));
  CHECK(lat.eta_star() * lat.eta * lat.N == doctest::Approx(2.0 * kPi));
  CHECK(lat.u(lat.N / 2) == 0.0);
  CHECK(lat.x(lat.N / 2) == 0.0);
  CHECK(lat.x_bar() == doctest::Approx(kPi / lat.eta));

  const Lattice le = Lattice::from_eta(64, 0.25);
  CHECK(le.u_bar() == doctest::Approx(8.0));

  CHECK_THROWS_AS(Lattice::from_ubar(100, 40.0), DomainError);
  CHECK_THROWS_AS(Lattice::from_ubar(0, 40.0), DomainError);
  CHECK_THROWS_AS(Lattice::from_ubar(1, 40.0), DomainError);
  CHECK_THROWS_AS(Lattice::from_eta(64, 0.0), DomainError);
  CHECK_THROWS_AS(Lattice::from_eta(64, -1.0), DomainError);
  CHECK_NOTHROW(Lattice::from_ubar(2, 40.0));
}

TEST_CASE("lattice phase identity behind the parity trick") {
  // u(k) x(l) = N pi / 2 - pi l - pi k + 2 pi k l / N per axis; the inverse
  // DFT phase plus alternating signs therefore lands exactly on x(l).
  const Lattice lat = Lattice::from_ubar(16, 5.0);
  for (int k = 0; k < lat.N; ++k) {
    for (int l = 0; l < lat.N; ++l) {
      const cplx lhs = std::exp(cplx(0.0, lat.u(k) * lat.x(l)));
      const double rhs_arg =
          lat.N * kPi / 2.0 - kPi * l - kPi * k + 2.0 * kPi * k * l / lat.N;
      const cplx rhs = std::exp(cplx(0.0, rhs_arg));
      CAPTURE(k);
      CAPTURE(l);
      CHECK(std::abs(lhs - rhs) <= 1e-12);
    }
  }
}

TEST_CASE("H grid corner value composes the model and transform factors") {
  // N=4, eta=1: u(0) = -2, so H(0,0) = (+1) phi(-2-3i, -2+i) phat(-2-3i, -2+i).
  const Lattice lat = Lattice::from_eta(4, 1.0);
  const std::vector<cplx> H = build_H(gbm(), lat, EpsilonShift2{}, {0.0, 0.0});
  const cplx ref(0.00043584804129207606, 8.7809371883291936e-6);
  CHECK(std::abs(H[0] - ref) <= 1e-12 * std::abs(ref));
}

TEST_CASE("H grid equals the signed pointwise product") {
  const Lattice lat = Lattice::from_eta(8, 0.5);
  const std::array<double, 2> shift = {0.1, -0.3};
  const EpsilonShift2 eps;
  const std::vector<cplx> H = build_H(gbm(), lat, eps, shift);
  const GbmParams p;
  for (int k1 = 0; k1 < lat.N; ++k1) {
    for (int k2 = 0; k2 < lat.N; ++k2) {
      const cplx u1(lat.u(k1), eps.eps1);
      const cplx u2(lat.u(k2), eps.eps2);
      const double sign = ((k1 + k2) % 2 == 0) ? 1.0 : -1.0;
      const cplx want = sign * phi_gbm(p, u1, u2) * phat2(u1, u2) *
                        std::exp(cplx(0.0, 1.0) * (u1 * shift[0] + u2 * shift[1]));
      const cplx got = H[k1 * lat.N + k2];
      CAPTURE(k1);
      CAPTURE(k2);
      CHECK(std::abs(got - want) <= 1e-13 * (1.0 + std::abs(want)));
    }
  }
}

TEST_CASE("H grid mirror symmetry makes the panel real") {
  const Lattice lat = Lattice::from_ubar(32, 20.0);
  const std::vector<cplx> H =
      build_H(gbm(), lat, EpsilonShift2{}, {0.2, -0.1});
  for (int k1 = 1; k1 < lat.N; ++k1) {
    for (int k2 = 1; k2 < lat.N; ++k2) {
      const cplx a = H[(lat.N - k1) * lat.N + (lat.N - k2)];
      const cplx b = std::conj(H[k1 * lat.N + k2]);
      CHECK(std::abs(a - b) <= 1e-13 * (1.0 + std::abs(b)));
    }
  }
}

TEST_CASE("recursive lognormal H fill equals direct evaluation") {
  for (int n : {256, 1024}) {
    const Lattice lat = Lattice::from_ubar(n, 40.0);
    const std::array<double, 2> shift = {3.2188758248682006, 3.1780538303479458};
    const std::vector<cplx> a =
        build_H(gbm(), lat, EpsilonShift2{}, shift, HFill::direct);
    const std::vector<cplx> b =
        build_H(gbm(), lat, EpsilonShift2{}, shift, HFill::recursive);
    double worst = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
      const double d = std::abs(a[i] - b[i]) / (1.0 + std::abs(a[i]));
      worst = std::max(worst, d);
    }
    CAPTURE(n);
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("automatic H fill picks the recursive lognormal path") {
  const Lattice lat = Lattice::from_ubar(64, 40.0);
  const std::vector<cplx> a = build_H(gbm(), lat, EpsilonShift2{}, {0.0, 0.0});
  const std::vector<cplx> b =
      build_H(gbm(), lat, EpsilonShift2{}, {0.0, 0.0}, HFill::recursive);
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].real() == b[i].real());
    CHECK(a[i].imag() == b[i].imag());
  }
}

TEST_CASE("stochastic-volatility H grid equals the pointwise product") {
  const Lattice lat = Lattice::from_ubar(64, 40.0);
  const EpsilonShift2 eps;
  const std::vector<cplx> H = build_H(sv(), lat, eps, {0.0, 0.0});
  const SvParams p;
  for (int k1 = 0; k1 < lat.N; k1 += 7) {
    for (int k2 = 0; k2 < lat.N; k2 += 5) {
      const cplx u1(lat.u(k1), eps.eps1);
      const cplx u2(lat.u(k2), eps.eps2);
      const double sign = ((k1 + k2) % 2 == 0) ? 1.0 : -1.0;
      const cplx want = sign * phi_sv(p, u1, u2) * phat2(u1, u2);
      CHECK(std::abs(H[k1 * lat.N + k2] - want) <=
            1e-13 * (1.0 + std::abs(want)));
    }
  }
}

TEST_CASE("inadmissible contours are rejected") {
  const Lattice lat = Lattice::from_ubar(64, 40.0);
  EpsilonShift2 eps;
  eps.eps1 = 0.0;
  eps.eps2 = 0.5;  // eps1 + eps2 >= -1
  CHECK_THROWS_AS(build_H(gbm(), lat, eps, {0.0, 0.0}), ContourError);
  eps.eps1 = -3.0;
  eps.eps2 = -1.0;  // eps2 <= 0
  CHECK_THROWS_AS(price_panel(gbm(), lat, eps), ContourError);
}

TEST_CASE("price panels are real to round-off for all models") {
  const Lattice lat = Lattice::from_ubar(256, 40.0);
  for (const Model& m : {gbm(), sv(), vg_raw()}) {
    const PricePanel panel = price_panel(m, lat, EpsilonShift2{});
    CAPTURE(panel.model);
    CHECK(panel.max_imag_residue < 1e-8);
  }
}

TEST_CASE("re-anchored price reproduces the fine-grid reference") {
  // S = (100, 96), K = 0.4 sits outside the default trusted half-span, so
  // the trust fraction is widened for this read.
  const Lattice lat = Lattice::from_ubar(256, 40.0);
  PricerOptions opt;
  opt.trust_c = 0.6;
  const PriceResult res = price_at(gbm(), 100.0, 96.0, 0.4, lat,
                                   EpsilonShift2{}, opt);
  CHECK(res.method == "re-anchor");
  CHECK(std::abs(res.price - 8.312461) <= 5e-6);
}

TEST_CASE("stochastic-volatility price matches the stored reference value") {
  const Lattice lat = Lattice::from_ubar(256, 40.0);
  const PriceResult res = price_at(sv(), 100.0, 96.0, 2.0, lat);
  CHECK(std::abs(res.price - 7.548502) <= 2e-5);
}

TEST_CASE("variance-gamma price matches the stored reference value") {
  const Lattice lat = Lattice::from_ubar(256, 40.0);
  const PriceResult res = price_at(vg_raw(), 100.0, 96.0, 2.0, lat);
  CHECK(std::abs(res.price - 9.727458) <= 5e-6);
}

TEST_CASE("strike scaling is exact by construction") {
  const Lattice lat = Lattice::from_ubar(128, 40.0);
  const double k = std::exp(lat.eta_star());
  const double a = price_at(gbm(), 1.2, 0.9, k, lat).price;
  const double b = k * price_at(gbm(), 1.2 / k, 0.9 / k, 1.0, lat).price;
  CHECK(a == b);
}

TEST_CASE("prices decrease in strike") {
  const Lattice lat = Lattice::from_ubar(256, 40.0);
  PricerOptions opt;
  opt.trust_c = 0.6;
  double prev = 1e300;
  for (double k = 0.4; k <= 4.01; k += 0.4) {
    const double p = price_at(gbm(), 100.0, 96.0, k, lat, EpsilonShift2{}, opt).price;
    CAPTURE(k);
    CHECK(p < prev);
    prev = p;
  }
}

TEST_CASE("prices converge as the lattice refines at fixed truncation") {
  double prev = 0.0;
  std::vector<double> p;
  for (int n : {64, 128, 256, 512}) {
    const Lattice lat = Lattice::from_ubar(n, 40.0);
    p.push_back(price_at(gbm(), 1.0, 1.0, 1.0, lat).price);
  }
  const double d1 = std::abs(p[0] - p[1]);
  const double d2 = std::abs(p[1] - p[2]);
  const double d3 = std::abs(p[2] - p[3]);
  CHECK(d1 > d2);
  CHECK(d2 > d3);
  (void)prev;
}

TEST_CASE("deep out-of-the-money prices vanish") {
  // Low volatility concentrates the characteristic function, so the
  // truncation bound must grow to keep the integrand decayed at the edge.
  const Lattice lat = Lattice::from_ubar(2048, 320.0);
  GbmParams p;
  p.sigma1 = 0.01;
  p.sigma2 = 0.01;
  const double v = price_at(Model{p}, 50.0, 100.0, 1.0, lat).price;
  CHECK(v >= 0.0);
  CHECK(v < 1e-3);
}

TEST_CASE("spots and strikes must be positive and inside the span") {
  const Lattice coarse = Lattice::from_ubar(64, 40.0);  // x_bar = 2.51
  CHECK_THROWS_AS(price_at(gbm(), 100.0, 96.0, 1.0, coarse), RangeError);

  const Lattice lat = Lattice::from_ubar(256, 40.0);  // x_bar = 10.05
  CHECK_THROWS_WITH_AS(price_at(gbm(), 100.0, 96.0, 0.4, lat),
                       doctest::Contains("trusted"), RangeError);
  CHECK_THROWS_AS(price_at(gbm(), -1.0, 96.0, 1.0, lat), DomainError);
  CHECK_THROWS_AS(price_at(gbm(), 100.0, 0.0, 1.0, lat), DomainError);
  CHECK_THROWS_AS(price_at(gbm(), 100.0, 96.0, -2.0, lat), DomainError);
}

TEST_CASE("greek panels exist only for the lognormal model") {
  const Lattice lat = Lattice::from_ubar(64, 40.0);
  CHECK_THROWS_AS(greek_panel(sv(), Greek::delta1, lat, EpsilonShift2{}),
                  UnsupportedGreek);
  CHECK_THROWS_AS(
      greek_at(vg_raw(), Greek::vega1, 100.0, 96.0, 2.0, lat),
      UnsupportedGreek);
}

TEST_CASE("transform greeks agree with finite differences") {
  const Lattice lat = Lattice::from_ubar(256, 40.0);
  const double a = greek_at(gbm(), Greek::delta1, 100.0, 96.0, 4.0, lat);
  const double b = greek_fd(gbm(), Greek::delta1, 100.0, 96.0, 4.0, lat);
  CHECK(std::abs(a - b) <= 1e-3);
  const double va = greek_at(gbm(), Greek::vega1, 100.0, 96.0, 4.0, lat);
  const double vb = greek_fd(gbm(), Greek::vega1, 100.0, 96.0, 4.0, lat);
  CHECK(std::abs(va - vb) <= 5e-3);
}

TEST_CASE("finite differences need a displacement") {
  const Lattice lat = Lattice::from_ubar(64, 40.0);
  CHECK_THROWS_AS(greek_fd(gbm(), Greek::delta1, 10.0, 9.6, 4.0, lat,
                           EpsilonShift2{}, PricerOptions{}, 0.0),
                  DomainError);
}

TEST_CASE("strike interpolation off one panel matches direct pricing") {
  const Lattice lat = Lattice::from_ubar(256, 40.0);
  const std::vector<double> strikes = {2.0, 2.3, 2.9, 3.0};
  for (const Model& m : {sv(), vg_raw()}) {
    const std::vector<double> interp =
        price_strikes(m, 100.0, 96.0, strikes, lat);
    for (size_t i = 0; i < strikes.size(); ++i) {
      const double direct = price_at(m, 100.0, 96.0, strikes[i], lat).price;
      CAPTURE(strikes[i]);
      CHECK(std::abs(interp[i] - direct) <= 1e-5);
    }
  }
  // Against the stored reference value, variance-gamma at K = 3.0.
  const std::vector<double> v = price_strikes(vg_raw(), 100.0, 96.0, strikes, lat);
  CHECK(std::abs(v[3] - 9.246662) <= 1e-5);
}

TEST_CASE("strike interpolation rejects bad inputs") {
  const Lattice lat = Lattice::from_ubar(256, 40.0);
  const PricePanel panel = price_panel(gbm(), lat, EpsilonShift2{});
  // Spots whose log difference is not a whole number of lattice steps.
  const std::vector<double> strikes = {1.0};
  CHECK_THROWS_AS(interpolate_strikes(panel, 100.0, 96.0, strikes),
                  DomainError);
  // Strike far outside the sampled diagonal.
  const std::vector<double> generous = {4.0, 4.0e-4};
  CHECK_THROWS_AS(price_strikes(gbm(), 100.0, 96.0, generous, lat),
                  ExtrapolationError);
}

TEST_CASE("panel interpolation modes") {
  const Lattice lat = Lattice::from_ubar(256, 40.0);
  const PricePanel panel = price_panel(gbm(), lat, EpsilonShift2{});

  // Node hit: exact read back.
  const double s1 = std::exp(lat.x(lat.N / 2 + 3));
  const double s2 = std::exp(lat.x(lat.N / 2 - 2));
  const PriceResult node = price_at_from_panel(panel, s1, s2, 1.0);
  CHECK(node.method == "node");
  CHECK(node.price == panel.value_at(lat.N / 2 + 3, lat.N / 2 - 2));

  // Off-node: local interpolation against a re-anchored read.
  PricerOptions opt;
  opt.bicubic = true;
  const PriceResult interp = price_at(gbm(), 1.2, 0.9, 1.0, lat,
                                      EpsilonShift2{}, opt);
  CHECK(interp.method == "bicubic");
  const double direct = price_at(gbm(), 1.2, 0.9, 1.0, lat).price;
  CHECK(std::abs(interp.price - direct) <= 1e-4);
}

TEST_CASE("basket displacement admissibility") {
  EpsilonShiftM e = EpsilonShiftM::defaults(2);
  CHECK(e.eps.size() == 2);
  CHECK(e.eps[0] == 2.0);
  CHECK(e.eps_tilde == -6.0);
  CHECK(e.admissible());
  e.eps_tilde = -4.9;  // needs <= -1 - sum = -5
  CHECK(!e.admissible());
  e = EpsilonShiftM::defaults(1);
  e.eps[0] = -1.0;
  CHECK(!e.admissible());
  e = EpsilonShiftM{{1.0}, -2.0};  // exactly on the boundary
  CHECK(e.admissible());
}

TEST_CASE("one-leg basket reduces to the two-asset pipeline") {
  const Lattice lat = Lattice::from_ubar(256, 40.0);
  const PricePanel two = price_panel(gbm(), lat, EpsilonShift2{});
  const GbmBasketParams p =
      GbmBasketParams::uniform(0.1, 1.0, {0.2, 0.1}, {0.05, 0.05}, 0.5);
  EpsilonShiftM eps;
  eps.eps = {1.0};
  eps.eps_tilde = -3.0;
  const std::array<double, 2> shift = {0.0, 0.0};
  const BasketPanel one = price_basket_panel(p, lat, eps, shift);
  CHECK(one.rank == 2);
  CHECK(one.max_imag_residue < 1e-8);

  const int lo = lat.N / 4 + 1;  // trusted window
  const int hi = 3 * lat.N / 4 - 1;
  double worst = 0.0;
  for (int l1 = lo; l1 <= hi; l1 += 3) {
    for (int l2 = lo; l2 <= hi; l2 += 3) {
      const double a = two.value_at(l1, l2);
      const double b = one.values[static_cast<size_t>(l1) * lat.N + l2];
      worst = std::max(worst, std::abs(a - b) / (1.0 + std::abs(a)));
    }
  }
  CHECK(worst <= 1e-10);

  // Spot-level agreement of the two front ends.
  const std::array<double, 1> s0 = {96.0};
  const double pb = price_basket_at(p, 100.0, s0, 1.0, lat, eps);
  const double pa = price_at(gbm(), 100.0, 96.0, 1.0, lat).price;
  CHECK(std::abs(pb - pa) <= 1e-8);
}

TEST_CASE("a weightless basket leg does not change the price") {
  const Lattice lat = Lattice::from_ubar(256, 40.0);
  const GbmBasketParams one =
      GbmBasketParams::uniform(0.1, 1.0, {0.2, 0.1}, {0.05, 0.05}, 0.5);
  EpsilonShiftM e1;
  e1.eps = {1.0};
  e1.eps_tilde = -3.0;
  const std::array<double, 1> s1 = {96.0};
  const double p1 = price_basket_at(one, 100.0, s1, 1.0, lat, e1);

  GbmBasketParams two =
      GbmBasketParams::uniform(0.1, 1.0, {0.2, 0.1, 1e-6}, {0.05, 0.05, 0.05},
                               0.5);
  const EpsilonShiftM e2 = EpsilonShiftM::defaults(2);
  const std::array<double, 2> s2 = {96.0, std::exp(-lat.x_bar())};
  // A vanishing volatility leaves that axis of the integrand undecayed at the
  // truncation edge, which shows up as a slightly larger imaginary residue.
  PricerOptions opt;
  opt.residue_tol = 1e-5;
  const double p2 = price_basket_at(two, 100.0, s2, 1.0, lat, e2, opt);
  CHECK(std::abs(p2 - p1) <= 1e-3);
}

TEST_CASE("basket panels refuse to outgrow memory") {
  const Lattice lat = Lattice::from_ubar(1024, 40.0);  // 2^30 cells at M=2
  const GbmBasketParams p =
      GbmBasketParams::uniform(0.1, 1.0, {0.2, 0.1, 0.1}, {0.0, 0.0, 0.0}, 0.5);
  const std::array<double, 3> shift = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(
      price_basket_panel(p, lat, EpsilonShiftM::defaults(2), shift),
      MemoryBudgetError);
}
