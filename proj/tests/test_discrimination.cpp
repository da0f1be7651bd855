#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "nlqubit/discrimination.hpp"
#include "oracles.hpp"

using namespace nlqubit;

namespace {

DiscriminationOptions quiet() {
  DiscriminationOptions o;
  o.store_trajectories = false;
  return o;
}

}  // namespace

TEST(Scheme, ParseAndPrint) {
  EXPECT_EQ(parse_scheme("simple"), Scheme::Simple);
  EXPECT_EQ(parse_scheme("cy"), Scheme::ChildsYoung);
  EXPECT_EQ(parse_scheme(to_string(Scheme::ChildsYoung)), Scheme::ChildsYoung);
  EXPECT_THROW(parse_scheme("helstrom"), InvalidArgument);
}

TEST(PrepareInputs, SimpleCoordinates) {
  oracle::Gen gen(51);
  for (int i = 0; i < 100; ++i) {
    const double th = gen.uniform(0.0, std::numbers::pi);
    const auto [a, b] = prepare_inputs_simple(th);
    const auto ra = to_bloch(a), rb = to_bloch(b);
    EXPECT_NEAR(ra.x(), std::abs(std::cos(0.5 * th)), 1e-12);
    EXPECT_NEAR(rb.x(), std::abs(std::cos(0.5 * th)), 1e-12);
    EXPECT_NEAR(ra.y(), 0.0, 1e-15);
    EXPECT_NEAR(ra.z(), std::sin(0.5 * th), 1e-12);
    EXPECT_NEAR(rb.z(), -std::sin(0.5 * th), 1e-12);
    EXPECT_NEAR(bloch_angle(a, b), th, 1e-7);
  }
  const auto [a0, b0] = prepare_inputs_simple(0.0);
  EXPECT_NEAR(std::abs(overlap(a0, b0)), 1.0, 1e-15);
  const auto [api, bpi] = prepare_inputs_simple(std::numbers::pi);
  EXPECT_LT(std::abs(overlap(api, bpi)), 1e-15);
  EXPECT_THROW(prepare_inputs_simple(-0.1), InvalidArgument);
  EXPECT_THROW(prepare_inputs_simple(4.0), InvalidArgument);
}

TEST(PrepareInputs, CyCoordinates) {
  oracle::Gen gen(52);
  for (int i = 0; i < 100; ++i) {
    const double th = gen.uniform(0.0, std::numbers::pi);
    const auto [a, b] = prepare_inputs_cy(th);
    const auto ra = to_bloch(a), rb = to_bloch(b);
    const double w = std::sin(0.5 * th) / std::numbers::sqrt2;
    EXPECT_NEAR(ra.y(), ra.z(), 1e-12);
    EXPECT_NEAR(rb.y(), rb.z(), 1e-12);
    EXPECT_NEAR(ra.z(), w, 1e-12);
    EXPECT_NEAR(rb.z(), -w, 1e-12);
    EXPECT_NEAR(ra.x(), std::abs(std::cos(0.5 * th)), 1e-12);
    EXPECT_NEAR(ra.norm(), 1.0, 1e-12);
  }
}

TEST(CyControl, Examples) {
  EXPECT_DOUBLE_EQ(cy_control(Vec3{1, 0, 0}, 2.0).v01, 1.0);
  EXPECT_DOUBLE_EQ(cy_control(Vec3{0, 0.7, 0.7}, 2.0).v01, 0.0);
  const auto p = cy_control(from_bloch(BlochVector(1, 0, 0)), 3.0);
  EXPECT_NEAR(p.v01, 1.5, 1e-15);
  EXPECT_EQ(p.bz, 0.0);
  EXPECT_EQ(p.g, 3.0);
}

TEST(CyControl, PropertyHoldsYEqualsZOnTheManifold) {
  // On y = z the Bloch velocity under the control has vy = vz.
  oracle::Gen gen(53);
  for (int i = 0; i < 200; ++i) {
    const double x = gen.uniform(-1, 1);
    const double w = std::sqrt(0.5 * (1 - x * x)) * (gen.uniform(0, 1) < 0.5 ? -1 : 1);
    const BlochVector r(x, w, w);
    const double g = gen.uniform(-3, 3);
    const auto v = flow_velocity(r, cy_control(r.vec(), g), true);
    EXPECT_NEAR(v.y, v.z, 1e-12);
    EXPECT_NEAR(v.x, -g * (1 - x * x), 1e-12);
  }
}

TEST(RunDiscrimination, SimpleConservesZ) {
  const auto run = run_discrimination({0.2, Scheme::Simple}, 1.0);
  ASSERT_TRUE(run.conclusive());
  const double za = to_bloch(run.a_initial).z(), zb = to_bloch(run.b_initial).z();
  for (std::size_t i = 0; i < run.trajectory_a.size(); ++i) {
    EXPECT_NEAR(to_bloch(run.trajectory_a[i].state).z(), za, 1e-10);
    EXPECT_NEAR(to_bloch(run.trajectory_b[i].state).z(), zb, 1e-10);
  }
}

TEST(RunDiscrimination, PropertyAntipodalAtStop) {
  oracle::Gen gen(54);
  for (int i = 0; i < 8; ++i) {
    const double th = gen.uniform(0.05, 2.5);
    const double g = gen.uniform(0.5, 2.0);
    for (auto scheme : {Scheme::Simple, Scheme::ChildsYoung}) {
      const auto run = run_discrimination({th, scheme}, g, quiet());
      ASSERT_TRUE(run.conclusive());
      const double d = dot(to_bloch(run.a_final).vec(), to_bloch(run.b_final).vec());
      EXPECT_LE(d, -1.0 + 4.0 * kDefaultOrthEps + 1e-12);
    }
  }
}

TEST(RunDiscrimination, PropertySimpleMatchesClosedForm) {
  oracle::Gen gen(55);
  for (int i = 0; i < 10; ++i) {
    const double th = gen.uniform(0.02, 2.0);
    const double g = gen.uniform(0.3, 3.0);
    const auto run = run_discrimination({th, Scheme::Simple}, g, quiet());
    ASSERT_EQ(run.status, DiscriminationStatus::Orthogonalized);
    EXPECT_NEAR(*run.t_orth, oracle::simple_t_orth(th, g, kDefaultOrthEps), 1e-8 * *run.t_orth);
    EXPECT_NEAR(run.residual_overlap, kDefaultOrthEps, 1e-9);
  }
}

TEST(RunDiscrimination, PropertyCyMatchesClosedForm) {
  oracle::Gen gen(56);
  for (int i = 0; i < 10; ++i) {
    const double th = std::pow(10.0, gen.uniform(-3.0, 0.0));
    const double g = gen.uniform(0.3, 3.0);
    const auto run = run_discrimination({th, Scheme::ChildsYoung}, g, quiet());
    ASSERT_EQ(run.status, DiscriminationStatus::Orthogonalized);
    EXPECT_NEAR(*run.t_orth, oracle::cy_t_orth(th, g, kDefaultOrthEps), 1e-7 * *run.t_orth);
  }
}

TEST(RunDiscrimination, NegativeCouplingAlsoSeparates) {
  const auto run = run_discrimination({0.3, Scheme::Simple}, -1.0, quiet());
  ASSERT_TRUE(run.conclusive());
  EXPECT_NEAR(*run.t_orth, oracle::simple_t_orth(0.3, 1.0, kDefaultOrthEps), 1e-7);
}

TEST(RunDiscrimination, AlreadyOrthogonalStopsAtZero) {
  for (auto scheme : {Scheme::Simple, Scheme::ChildsYoung}) {
    const auto run = run_discrimination({std::numbers::pi, scheme}, 1.0);
    EXPECT_EQ(run.status, DiscriminationStatus::Orthogonalized);
    EXPECT_EQ(*run.t_orth, 0.0);
  }
}

TEST(RunDiscrimination, NoCouplingIsInconclusive) {
  DiscriminationOptions o = quiet();
  o.t_max = 2.0;
  const auto run = run_discrimination({0.1, Scheme::Simple}, 0.0, o);
  EXPECT_EQ(run.status, DiscriminationStatus::Inconclusive);
  EXPECT_FALSE(run.t_orth.has_value());
  EXPECT_DOUBLE_EQ(run.t_stop, 2.0);
}

TEST(RunDiscrimination, CyResidualMinimumWhenThresholdUnreachable) {
  // A coarse threshold bisected away leaves the CY pair near, not at, the
  // antipode; a tiny orth_eps exposes the saturation branch.
  DiscriminationOptions o = quiet();
  o.orth_eps = 1e-30;
  const auto run = run_discrimination({0.5, Scheme::ChildsYoung}, 1.0, o);
  EXPECT_TRUE(run.conclusive());
  EXPECT_EQ(run.status, DiscriminationStatus::ResidualMinimum);
  EXPECT_LT(run.residual_overlap, 1e-12);
}

TEST(RunDiscrimination, RejectsBadArguments) {
  EXPECT_THROW(run_discrimination({-1.0, Scheme::Simple}, 1.0), InvalidArgument);
  EXPECT_THROW(run_discrimination({0.1, Scheme::Simple}, std::nan("")), InvalidArgument);
  DiscriminationOptions o;
  o.orth_eps = 0.0;
  EXPECT_THROW(run_discrimination({0.1, Scheme::Simple}, 1.0, o), InvalidArgument);
  o = {};
  o.dt = 1.0;
  EXPECT_THROW(run_discrimination({0.1, Scheme::Simple}, 1.0, o), StepSizeError);
}

TEST(ReadoutUnitary, Examples) {
  const auto id = readout_unitary(QubitAmplitudes::zero(), QubitAmplitudes::one());
  EXPECT_LT((id - Matrix2c::Identity()).cwiseAbs().maxCoeff(), 1e-15);

  const double h = 1.0 / std::numbers::sqrt2;
  const QubitAmplitudes plus(h, h), minus(h, -h);
  const auto u = readout_unitary(plus, minus);
  EXPECT_NEAR(std::abs(apply_unitary(u, plus).psi0()), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(apply_unitary(u, minus).psi1()), 1.0, 1e-15);

  EXPECT_THROW(readout_unitary(plus, QubitAmplitudes::zero()), NotOrthogonal);
}

TEST(ReadoutUnitary, PropertyNearOrthogonalPairs) {
  oracle::Gen gen(57);
  for (int i = 0; i < 100; ++i) {
    const auto r = gen.sphere();
    const auto a = from_bloch(BlochVector(r.x, r.y, r.z));
    // b slightly off the antipode of a.
    const double tilt = gen.uniform(0.0, 0.06);
    const auto b = rotate_x(rotate_y(from_bloch(BlochVector(-r.x, -r.y, -r.z)), tilt), 0.3 * tilt);
    if (std::norm(overlap(a, b)) > kDefaultOrthTol) continue;
    const auto u = readout_unitary(a, b);
    EXPECT_LT((u * u.adjoint() - Matrix2c::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(std::norm(apply_unitary(u, a).psi0()), 1.0, 1e-12);
    EXPECT_GE(std::norm(apply_unitary(u, b).psi1()), 1.0 - kDefaultOrthTol);
    // Linearity: (a + b) / |a + b| maps to an equal-weight superposition up to the overlap.
    const Eigen::Vector2cd s = (a.vector() + b.vector()).normalized();
    const QubitAmplitudes sup(s[0], s[1], 1e-12);
    EXPECT_NEAR(std::norm(apply_unitary(u, sup).psi0()), 0.5, 0.05);
  }
}

TEST(SampleMeasurement, BasisStatesAreDeterministic) {
  for (std::uint64_t s = 0; s < 200; ++s) {
    EXPECT_EQ(sample_measurement(QubitAmplitudes::zero(), s), 0);
    EXPECT_EQ(sample_measurement(QubitAmplitudes::one(), s), 1);
  }
}

TEST(SampleMeasurement, EquatorFrequencyWithinBinomialBound) {
  const double h = 1.0 / std::numbers::sqrt2;
  const QubitAmplitudes q(h, h);
  ShotRng rng(2024);
  const int shots = 100000;
  int zeros = 0;
  for (int i = 0; i < shots; ++i) zeros += sample_measurement(q, rng) == 0;
  const double sigma = std::sqrt(0.25 / shots);
  EXPECT_NEAR(static_cast<double>(zeros) / shots, 0.5, 3 * sigma);
}

TEST(ShotRng, SameSeedSameStream) {
  ShotRng a(7, 3), b(7, 3), c(7, 4);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
    differs |= x != c.uniform();
  }
  EXPECT_TRUE(differs);
}

TEST(RunTrials, OrthogonalInputsAlwaysSucceed) {
  const auto st = run_trials({std::numbers::pi, Scheme::Simple}, 1.0, 100, 5);
  EXPECT_EQ(st.aa + st.bb, 100);
  EXPECT_DOUBLE_EQ(st.success_rate, 1.0);
}

TEST(RunTrials, NoCouplingIsInconclusiveEveryShot) {
  TrialOptions o;
  o.discrimination.t_max = 1.0;
  const auto st = run_trials({0.1, Scheme::Simple}, 0.0, 50, 5, o);
  EXPECT_EQ(st.inconclusive, 50);
  EXPECT_DOUBLE_EQ(st.inconclusive_rate, 1.0);
  EXPECT_DOUBLE_EQ(st.success_rate, 0.0);
  EXPECT_TRUE(to_json(st)["t_orth_mean"].is_null());
}

TEST(RunTrials, ResidualOverlapInUnitInterval) {
  const auto st = run_trials({0.4, Scheme::ChildsYoung}, 1.0, 200, 9);
  for (const auto& r : st.results) {
    EXPECT_GE(r.residual_overlap, 0.0);
    EXPECT_LE(r.residual_overlap, 1.0);
    EXPECT_LT(r.residual_overlap, 2 * kDefaultOrthEps);
  }
  EXPECT_EQ(st.aa + st.ab + st.ba + st.bb + st.inconclusive, 200);
}

TEST(RunTrials, SeededDeterminismAcrossThreadCounts) {
  TrialOptions one, four;
  four.threads = 4;
  const auto a = run_trials({0.3, Scheme::Simple}, 1.0, 500, 42, one);
  const auto b = run_trials({0.3, Scheme::Simple}, 1.0, 500, 42, four);
  ASSERT_EQ(a.results.size(), b.results.size());
  for (std::size_t i = 0; i < a.results.size(); ++i) {
    EXPECT_EQ(a.results[i].truth, b.results[i].truth);
    EXPECT_EQ(a.results[i].outcome, b.results[i].outcome);
    EXPECT_EQ(a.results[i].residual_overlap, b.results[i].residual_overlap);
  }
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}

TEST(RunTrials, JsonShape) {
  const auto j = to_json(run_trials({0.5, Scheme::Simple}, 1.0, 20, 1));
  const std::vector<std::string> keys{"scheme",       "theta_ab",          "g",        "shots",
                                      "t_orth_mean",  "success_rate", "inconclusive_rate", "confusion"};
  std::vector<std::string> got;
  for (auto it = j.begin(); it != j.end(); ++it) got.push_back(it.key());
  EXPECT_EQ(got, keys);
  for (const char* k : {"AA", "AB", "BA", "BB"}) EXPECT_TRUE(j["confusion"].contains(k));
}
