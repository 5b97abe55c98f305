#include <cmath>
#include <random>

#include "doctest.h"
#include "qfb/error.hpp"
#include "qfb/metrics.hpp"
#include "qfb/sde.hpp"
#include "test_util.hpp"

using namespace qfb;
using qfb::test::max_diff;

namespace {

ModelParams fig_params(int channels = 2, BellLabel target = BellLabel::PsiPlus) {
  ModelParams p;
  p.n_channels = channels;
  p.target = target;
  return p;
}

Mat4 pure(BellLabel b) { return bell(b).projector.matrix(); }

}  // namespace

TEST_SUITE("sde") {
  TEST_CASE("configuration bounds") {
    SdeConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(c.n_steps() == 10000);
    for (double dt : {0.0, -1e-3, 2e-2}) {
      SdeConfig d;
      d.dt = dt;
      CHECK_THROWS_AS(d.validate(), Error);
    }
    SdeConfig t;
    t.t_final = 0.0;
    CHECK_THROWS_AS(t.validate(), Error);
    for (double tol : {1e-13, 1e-5}) {
      SdeConfig p;
      p.projection_tol = tol;
      CHECK_THROWS_AS(p.validate(), Error);
    }
  }

  TEST_CASE("projection leaves valid states unchanged") {
    std::mt19937_64 rng(1);
    for (int rep = 0; rep < 200; ++rep) {
      const Mat4 rho = random_density_matrix(rng);
      const ProjectionResult p = project_to_physical(rho);
      CHECK(max_diff(p.rho.matrix(), rho) <= 1e-14);
      CHECK(p.clipped_mass == 0.0);
    }
    const ProjectionResult b = project_to_physical(pure(BellLabel::PhiPlus));
    CHECK(max_diff(b.rho.matrix(), pure(BellLabel::PhiPlus)) <= 1e-14);
  }

  TEST_CASE("projection clips and renormalizes") {
    const ProjectionResult p = project_to_physical(Mat4::diag(0.5, 0.6, -0.1, 0.0));
    CHECK(max_diff(p.rho.matrix(), Mat4::diag(5.0 / 11.0, 6.0 / 11.0, 0, 0)) <= 1e-14);
    CHECK(p.clipped_mass == doctest::Approx(0.1));
    CHECK(p.used_eigensolver);
    // Rounding-level negatives are clipped but not counted.
    const ProjectionResult q = project_to_physical(Mat4::diag(0.5, 0.5, -1e-15, 0.0), 1e-12);
    CHECK(q.clipped_mass == 0.0);
    CHECK(herm_eig(q.rho.matrix()).eigenvalues[0] >= 0.0);
  }

  TEST_CASE("projection failures") {
    auto kind_of = [](auto&& f) {
      try {
        f();
      } catch (const Error& e) {
        return e.kind();
      }
      return ErrorKind::IoError;  // sentinel: nothing thrown
    };
    CHECK(kind_of([] { project_to_physical(Mat4::diag(0.5, 0.6, -0.1, 0.0), 1e-12, 1e-3); }) ==
          ErrorKind::ProjectionFailure);
    CHECK(kind_of([] { project_to_physical(Mat4::diag(0.1, 0.1, 0.1, 0.1)); }) ==
          ErrorKind::ProjectionFailure);
    Mat4 m = Mat4::diag(0.25, 0.25, 0.25, 0.25);
    m(0, 1) = 1e-3;
    CHECK(kind_of([&] { project_to_physical(m); }) == ErrorKind::NonHermitianInput);
    m(0, 1) = std::nan("");
    CHECK(kind_of([&] { project_to_physical(m); }) == ErrorKind::NonFinite);
  }

  TEST_CASE("em_step fixed points") {
    const OperatorSet ops = operators(fig_params());
    const ControlVector zero{{0, 0}, 1};
    const double no_noise[2] = {0.0, 0.0};
    const DensityMatrix target = DensityMatrix::from(pure(BellLabel::PsiPlus));
    const StepResult s = em_step(target, zero, ops, no_noise, 1e-3);
    CHECK(max_diff(s.rho.matrix(), target.matrix()) <= 1e-14);

    std::mt19937_64 rng(2);
    const DensityMatrix rho = DensityMatrix::from(random_density_matrix(rng));
    const FeedbackLaw law(Controller::two_channel(BellLabel::PsiPlus), ops);
    CHECK(em_step(rho, law, ops, no_noise, 0.0).rho == rho);
  }

  TEST_CASE("em_step follows the Euler-Maruyama update") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, std::sqrt(1e-3));
    const OperatorSet ops = operators(fig_params());
    const FeedbackLaw law(Controller::two_channel(BellLabel::PsiPlus), ops);
    for (int rep = 0; rep < 500; ++rep) {
      // Interior states far from the boundary so that no clipping occurs.
      const Mat4 rho = 0.5 * random_density_matrix(rng) + 0.125 * Mat4::identity();
      const DensityMatrix d = DensityMatrix::from(rho);
      const double dw[2] = {n(rng), n(rng)};
      const ControlVector u = law(rho);
      Mat4 expected = rho + 1e-3 * drift_F0(rho, u.span(), ops);
      for (int k = 0; k < 2; ++k)
        expected = expected + 1e-3 * drift_Fk(rho, ops.L[k]) +
                   (ops.sqrt_eta[k] * dw[k]) * diffusion_Gk(rho, ops.L[k]);
      CHECK(std::abs(trace(expected) - 1.0) <= 1e-12);
      const StepResult s = em_step(d, law, ops, dw, 1e-3);
      CHECK(max_diff(s.rho.matrix(), expected) <= 1e-13);
      CHECK(s.clipped_mass == 0.0);
    }
    const double one[1] = {0.0};
    CHECK_THROWS_AS(em_step(DensityMatrix(), law, ops, one, 1e-3), Error);
  }

  TEST_CASE("em_step reports a projection failure for an oversized step") {
    const OperatorSet ops = operators(fig_params());
    const ControlVector big{{10.0, 0}, 1};
    const double no_noise[2] = {0.0, 0.0};
    // From a pure state the explicit unitary part leaves a negative eigenvalue
    // of about (u dt)^2 Var(H1) = 1e-2 at dt = 1e-2.
    const DensityMatrix start = DensityMatrix::from(pure(BellLabel::PhiMinus));
    try {
      em_step(start, big, ops, no_noise, 1e-2);
      FAIL("expected ProjectionFailure");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ProjectionFailure);
    }
    // A tenth of the step stays within the limit.
    CHECK(em_step(start, big, ops, no_noise, 1e-4).clipped_mass ==
          doctest::Approx(1e-6 * 10.0).epsilon(0.05));
  }

  TEST_CASE("trajectory at an equilibrium stays put") {
    const OperatorSet ops = operators(fig_params());
    SdeConfig cfg;
    cfg.t_final = 1.0;
    const TrajectoryRecord rec =
        integrate_trajectory(DensityMatrix::from(pure(BellLabel::PsiPlus)), Controller::zero(), ops,
                             cfg, 0, true);
    CHECK(rec.times.size() == 101);
    CHECK(rec.times.back() == doctest::Approx(1.0));
    CHECK(rec.noise_path.size() == 1000);
    for (const auto& s : rec.states) CHECK(max_diff(s.matrix(), pure(BellLabel::PsiPlus)) <= 1e-12);
  }

  TEST_CASE("trajectory layout, determinism and recorded noise") {
    const OperatorSet ops = operators(fig_params());
    SdeConfig cfg;
    cfg.t_final = 0.5;
    cfg.log_stride = 7;
    const DensityMatrix rho0 = DensityMatrix::from(Mat4::diag(0.2, 0.3, 0.1, 0.4));
    const auto a = integrate_trajectory(rho0, Controller::zero(), ops, cfg, 5, true);
    const auto b = integrate_trajectory(rho0, Controller::zero(), ops, cfg, 5, true);
    const auto c = integrate_trajectory(rho0, Controller::zero(), ops, cfg, 6, false);
    // steps 0, 7, ..., 497 plus the final step 500
    CHECK(a.times.size() == 73);
    CHECK(a.times.back() == doctest::Approx(0.5));
    CHECK(a.states.size() == a.times.size());
    CHECK(a.controls.size() == a.times.size());
    CHECK(a.steps == 500);
    for (std::size_t i = 0; i < a.states.size(); ++i) CHECK(a.states[i] == b.states[i]);
    CHECK_FALSE(a.states.back() == c.states.back());
    CHECK(c.noise_path.empty());
    const WienerStream w(cfg.seed, 5, cfg.dt);
    for (std::uint64_t s = 0; s < 500; ++s) CHECK(a.noise_path[s] == w.increments(s));
    for (const auto& s : a.states) CHECK_NOTHROW(check_density_invariants(s.matrix()));
  }

  TEST_CASE("trajectory errors carry the failing time") {
    const OperatorSet ops = operators(fig_params());
    SdeConfig cfg;
    cfg.dt = 1e-2;
    cfg.t_final = 1.0;
    try {
      integrate_trajectory(DensityMatrix::from(pure(BellLabel::PhiMinus)),
                           Controller::two_channel(BellLabel::PsiPlus), ops, cfg, 0);
      FAIL("expected a step failure");
    } catch (const StepFailure& e) {
      CHECK(e.kind() == ErrorKind::ProjectionFailure);
      CHECK(e.time() == 0.0);
    }
  }

  TEST_CASE("uncontrolled trajectories from the mixed diagonal state reduce to a Bell state") {
    const OperatorSet ops = operators(fig_params());
    SdeConfig cfg;
    cfg.t_final = 30.0;
    cfg.log_stride = 1000;
    const DensityMatrix rho0 = DensityMatrix::from(Mat4::diag(0.2, 0.3, 0.1, 0.4));
    int converged = 0;
    const int n = 100;
    double clipped = 0.0;
    std::int64_t steps = 0;
    for (int i = 0; i < n; ++i) {
      const auto rec = integrate_trajectory(rho0, Controller::zero(), ops, cfg, i);
      if (bures_to_bell_set(rec.states.back().matrix()) < 0.05) ++converged;
      clipped += rec.total_clipped_mass;
      steps += rec.steps;
    }
    CHECK(converged >= 99);
    CHECK(clipped / static_cast<double>(steps) < 10.0 * cfg.dt);
  }

  TEST_CASE("the Lambda2 = 0 face is invariant up to the step size") {
    const OperatorSet ops = operators(fig_params());
    SdeConfig cfg;
    cfg.t_final = 10.0;
    cfg.log_stride = 1;
    Mat4 start = Mat4::diag(0.5, 0.0, 0.0, 0.5);
    start(0, 3) = 0.2;
    start(3, 0) = 0.2;
    for (int i = 0; i < 5; ++i) {
      const auto rec =
          integrate_trajectory(DensityMatrix::from(start), Controller::zero(), ops, cfg, i);
      double worst = 0.0;
      for (const auto& s : rec.states) worst = std::max(worst, coordinates(s.matrix()).lambda2);
      CHECK(worst <= 5.0 * cfg.dt);
    }
  }

  TEST_CASE("support equation: equilibrium, trace and reachability") {
    const OperatorSet ops = operators(fig_params());
    const FeedbackLaw zero_law(Controller::zero(), ops);
    const SupportInput none = [](double, const DensityMatrix&) { return std::array<double, 2>{}; };
    const auto eq = integrate_support_ode(DensityMatrix::from(pure(BellLabel::PsiPlus)), none,
                                          zero_law, ops, 1e-2, 1.0);
    for (const auto& s : eq.states) CHECK(max_diff(s.matrix(), pure(BellLabel::PsiPlus)) <= 1e-12);

    std::mt19937_64 rng(4);
    const auto drift = integrate_support_ode(DensityMatrix::from(random_density_matrix(rng)), none,
                                             zero_law, ops, 1e-3, 2.0, 10);
    for (const auto& s : drift.states) CHECK(std::abs(trace(s.matrix()) - 1.0) <= 1e-9);

    const FeedbackLaw law(Controller::two_channel(BellLabel::PsiPlus), ops);
    const auto reach = integrate_support_ode(DensityMatrix::maximally_mixed(),
                                             reachability_input(BellLabel::PsiPlus, 5.0), law, ops,
                                             1e-3, 5.0, 10);
    ScalarSeries d;
    for (std::size_t i = 0; i < reach.states.size(); ++i) {
      d.times.push_back(reach.times[i]);
      d.values.push_back(bures_to_bell(reach.states[i].matrix(), BellLabel::PsiPlus));
    }
    const auto hit = first_hit_time(d, 0.1);
    REQUIRE(hit.has_value());
    CHECK(*hit < 5.0);
  }

  TEST_CASE("reachability input is capped at the maximally mixed start") {
    const SupportInput v = reachability_input(BellLabel::PsiPlus, 5.0, 1e3);
    // At 1/4: X = 1/4, P_1 = 1, P_2 = 1, so v = 5 * 1 / 0.25 = 20 on both channels.
    const auto a = v(0.0, DensityMatrix::maximally_mixed());
    CHECK(a[0] == doctest::Approx(20.0));
    CHECK(a[1] == doctest::Approx(20.0));
    // At an orthogonal Bell state X = 0: the input saturates at the cap.
    const auto b = v(0.0, DensityMatrix::from(pure(BellLabel::PhiMinus)));
    CHECK(std::abs(b[0]) == doctest::Approx(1e3));
    // At the target both proportional terms vanish.
    const auto c = v(0.0, DensityMatrix::from(pure(BellLabel::PsiPlus)));
    CHECK(c[0] == doctest::Approx(0.0));
    CHECK(c[1] == doctest::Approx(0.0));
  }
}
