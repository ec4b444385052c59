#include <gtest/gtest.h>

#include <cmath>

#include "nlkg/errors.hpp"
#include "nlkg/experiments.hpp"
#include "nlkg/functionals.hpp"

using namespace nlkg;

namespace {

class Experiments : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { bundle_ = make_bundle(make_grid(5, 1024, 50.0)); }
  static void TearDownTestSuite() { bundle_.reset(); }
  static BundlePtr bundle_;
};

BundlePtr Experiments::bundle_;

// Soliton-frame samples with lambda1 = a e^{k tau} + b e^{-k tau} + c and
// K of the given sign once tau passes tau_flip.
Trajectory synthetic_ejection(double k, double a, double b, double c, double tau_flip, int m, double dtau) {
  Trajectory tr;
  for (int j = 0; j < m; ++j) {
    ModulationSample s;
    s.t = s.tau = j * dtau;
    s.decomposed = true;
    s.lambda1 = a * std::exp(k * s.tau) + b * std::exp(-k * s.tau) + c;
    s.lambda_plus = s.lambda1;
    s.d_tilde = std::abs(s.lambda1);
    s.K = (s.tau >= tau_flip ? -1.0 : 1.0) * (s.lambda1 > 0 ? 1.0 : -1.0);
    tr.modulation.push_back(s);
  }
  return tr;
}

Trajectory distance_series(const std::vector<double>& d) {
  Trajectory tr;
  for (std::size_t j = 0; j < d.size(); ++j) {
    ModulationSample s;
    s.t = static_cast<double>(j);
    s.d_tilde = d[j];
    tr.modulation.push_back(s);
  }
  return tr;
}

}  // namespace

TEST(Section9, KindNamesRoundTrip) {
  for (auto k : kAllSection9Kinds) EXPECT_EQ(section9_kind_from_string(to_string(k)), k);
  EXPECT_THROW(section9_kind_from_string("Sideways"), InvalidArgument);
  EXPECT_EQ(to_string(EnergyClass::BelowThreshold), "below");
}

TEST_F(Experiments, AutoScaleMeetsMassBound) {
  for (double beta : {1e-3, 1e-2, 0.1}) {
    const double s0 = auto_sigma0(*bundle_, beta);
    EXPECT_NEAR(std::exp(-2.0 * s0) * inner(bundle_->W, bundle_->W), beta * beta / 10.0, 1e-12 * beta * beta);
  }
  EXPECT_GT(auto_sigma0(*bundle_, 1e-3), auto_sigma0(*bundle_, 1e-2));
}

TEST_F(Experiments, DataGuards) {
  Section9Spec spec;
  spec.beta = 0.0;
  EXPECT_THROW(build_section9_data(spec, *bundle_), InvalidArgument);
  spec.beta = 1.5;
  EXPECT_THROW(build_section9_data(spec, *bundle_), InvalidArgument);
  spec.beta = 1e-2;
  spec.sigma0 = 0.0;
  EXPECT_THROW(build_section9_data(spec, *bundle_), ScaleBoundViolated);

  auto b3 = make_bundle(make_grid(3, 1024, 100.0));
  Section9Spec s3;
  s3.beta = 1e-2;
  EXPECT_THROW(build_section9_data(s3, *b3), InvalidArgument);  // R_cut missing
  s3.R_cut = 2.0;
  EXPECT_THROW(build_section9_data(s3, *b3), TailBoundViolated);
  s3.R_cut = 1e6;
  // a cutoff past the grid leaves W untouched
  try {
    EXPECT_EQ(build_section9_data(s3, *b3).tail_energy, 0.0);
  } catch (const std::exception& e) {
    ADD_FAILURE() << e.what();
  }
}

TEST_F(Experiments, DataHasPrescribedModulationParameters) {
  const double beta = 1e-2;
  for (auto kind : kAllSection9Kinds) {
    Section9Spec spec;
    spec.kind = kind;
    spec.beta = beta;
    const auto data = build_section9_data(spec, *bundle_);
    const double l1 = kind == Section9Kind::PlusUnstable ? beta : kind == Section9Kind::MinusUnstable ? -beta : 0.0;
    const double l2 = kind == Section9Kind::PlusVelocity ? beta : kind == Section9Kind::MinusVelocity ? -beta : 0.0;
    EXPECT_NEAR(data.check.lambda1, l1, 1e-8) << to_string(kind);
    EXPECT_NEAR(data.check.lambda2, l2, 1e-12) << to_string(kind);
    EXPECT_NEAR(data.check.sigma, 0.0, 1e-6);
    EXPECT_NEAR(data.mass_sq, std::exp(-2.0 * data.sigma0), 1e-15);
    EXPECT_EQ(data.tail_energy, 0.0);
  }
}

TEST_F(Experiments, EjectionFitRecoversRate) {
  const double k = bundle_->k;
  const auto tr = synthetic_ejection(k, 1e-4, 3e-5, -2e-5, 2.0, 60, 0.1);
  ThresholdConfig th;
  th.delta_f = 10.0;  // keep every sample inside the band
  const auto rep = analyze_ejection(tr, *bundle_, th, 1e-4);
  EXPECT_NEAR(rep.fitted_rate, k, 1e-6 * k);
  EXPECT_LT(rep.rate_rel_err, 1e-6);
  EXPECT_NEAR(rep.fit_a, 1e-4, 1e-9);
  EXPECT_NEAR(rep.fit_b, 3e-5, 1e-9);
  EXPECT_NEAR(rep.fit_c, -2e-5, 1e-9);
  EXPECT_GT(rep.growth_r2, 0.999999);
  EXPECT_TRUE(rep.sign_constant);
  EXPECT_NEAR(rep.K_sign_flip_tau, 2.0, 1e-9);
  EXPECT_EQ(rep.samples, 60u);

  // the band ends where d_tilde passes delta_f / 2
  th.delta_f = 2.0 * std::abs(tr.modulation[40].lambda1) * 1.0000001;
  EXPECT_EQ(analyze_ejection(tr, *bundle_, th, 1e-4).last, 40u);
}

TEST_F(Experiments, EjectionWindowGuards) {
  ThresholdConfig th;
  th.delta_f = 10.0;
  EXPECT_THROW(analyze_ejection(Trajectory{}, *bundle_, th, 1e-3), WindowTooShort);
  const double k = bundle_->k;
  // fewer than one e-folding
  const auto short_run = synthetic_ejection(k, 1e-4, 0.0, 0.0, 0.0, 20, 0.2 / (20 * k));
  EXPECT_THROW(analyze_ejection(short_run, *bundle_, th, 1e-4), WindowTooShort);
  // too few samples
  EXPECT_THROW(analyze_ejection(synthetic_ejection(k, 1e-4, 0, 0, 0, 5, 1.0), *bundle_, th, 1e-4), WindowTooShort);
}

TEST(OnePass, CrossingAndMinimum) {
  ThresholdConfig th;  // delta_b = 0.005
  const auto ok = one_pass_probe(distance_series({0.001, 0.002, 0.004, 0.006, 0.01, 0.008, 0.02}), th);
  EXPECT_EQ(ok.t_cross, 3.0);
  EXPECT_EQ(ok.min_after, 0.006);
  EXPECT_EQ(ok.samples_after, 4u);
  EXPECT_TRUE(ok.passed);

  const auto back = one_pass_probe(distance_series({0.001, 0.006, 0.004, 0.01}), th);
  EXPECT_EQ(back.min_after, 0.004);
  EXPECT_FALSE(back.passed);

  EXPECT_THROW(one_pass_probe(distance_series({0.001, 0.002}), th), NoCrossingFound);
  EXPECT_THROW(one_pass_probe(distance_series({0.01, 0.02}), th), NoCrossingFound);
}

TEST(FateTableRows, LookupThrowsForMissingRow) {
  FateTable t;
  FateRow r;
  r.kind = Section9Kind::MinusVelocity;
  t.rows.push_back(r);
  EXPECT_EQ(t.row(Section9Kind::MinusVelocity).kind, Section9Kind::MinusVelocity);
  EXPECT_THROW(t.row(Section9Kind::PlusUnstable), InvalidArgument);
}

TEST(Sweep, GridOrder) {
  const auto pts = sweep_grid({Section9Kind::PlusUnstable, Section9Kind::MinusVelocity}, {1e-2, 2e-2}, {}, {5},
                              {512, 1024});
  ASSERT_EQ(pts.size(), 8u);
  EXPECT_EQ(pts[0].kind, Section9Kind::PlusUnstable);
  EXPECT_EQ(pts[1].n, 1024);
  EXPECT_EQ(pts[2].beta, 2e-2);
  EXPECT_EQ(pts[4].kind, Section9Kind::MinusVelocity);
  EXPECT_TRUE(std::isnan(pts[0].sigma0));
  EXPECT_TRUE(sweep({}, default_sweep_config()).empty());
}

TEST(Sweep, DeterministicAcrossWorkersAndIsolatesErrors) {
  SweepConfig cfg = default_sweep_config();
  cfg.r_max = 30.0;
  cfg.t_final = 4.0;
  auto pts = sweep_grid({Section9Kind::PlusUnstable, Section9Kind::MinusUnstable}, {2e-2}, {}, {5}, {512});
  pts.push_back({Section9Kind::PlusUnstable, 2.0, NAN, 5, 512});  // beta out of range
  cfg.workers = 1;
  const auto one = sweep(pts, cfg);
  cfg.workers = 3;
  const auto three = sweep(pts, cfg);
  ASSERT_EQ(one.size(), pts.size());
  ASSERT_EQ(three.size(), pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_EQ(one[i].index, i);
    EXPECT_EQ(three[i].index, i);
    EXPECT_EQ(one[i].fate, three[i].fate);
    EXPECT_EQ(one[i].error, three[i].error);
    EXPECT_EQ(one[i].k, three[i].k);
    if (std::isfinite(one[i].fitted_rate)) {
      EXPECT_EQ(one[i].fitted_rate, three[i].fitted_rate);
    }
  }
  EXPECT_TRUE(one[0].error.empty() || one[0].error.find("beta") == std::string::npos);
  EXPECT_NE(one[2].error.find("beta"), std::string::npos);
  EXPECT_TRUE(std::isfinite(one[0].k));
}
