#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "qfb/config.hpp"
#include "qfb/ensemble.hpp"
#include "qfb/error.hpp"

using namespace qfb;
namespace fs = std::filesystem;

namespace {

CampaignConfig small(const std::string& preset, int n, double t_final) {
  CampaignConfig c = expand_preset(preset);
  c.n_traj = n;
  c.sde.t_final = t_final;
  return c;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string validation_message(const CampaignConfig& c) {
  try {
    c.validate();
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ValidationError);
    return e.detail();
  }
  FAIL("expected a validation error");
  return {};
}

}  // namespace

TEST_SUITE("ensemble") {
  TEST_CASE("initial states") {
    CHECK(InitialState::named("fig1_diag").rho.matrix() == Mat4::diag(0.2, 0.3, 0.1, 0.4));
    CHECK(InitialState::named("mixed").rho == DensityMatrix::maximally_mixed());
    CHECK(InitialState::named("phi-").rho == bell(BellLabel::PhiMinus).projector);
    CHECK_THROWS_AS(InitialState::named("bogus"), Error);
    CHECK_THROWS_AS(InitialState::explicit_matrix(Mat4::diag(1, 1, 0, 0)), Error);
  }

  TEST_CASE("reference curves") {
    const ModelParams p;  // rate constant min(0.3 * 1, 0.4 * 0.9) = 0.3
    const std::vector<double> times = {0.0, std::log(2.0) / 0.3, 10.0};
    const DensityMatrix diag = DensityMatrix::from(Mat4::diag(0.2, 0.3, 0.1, 0.4));
    const ScalarSeries q = reference_curve(diag, p, ReferenceKind::Qsr, BellLabel::PsiPlus, times);
    const double d0 = bures_to_bell_set(diag.matrix());
    CHECK(q.values[0] == doctest::Approx(4.0 * std::sqrt(3.0) * d0));
    CHECK(q.values[1] == doctest::Approx(0.5 * q.values[0]));
    CHECK(q.values[2] == doctest::Approx(q.values[0] * std::exp(-3.0)));
    const DensityMatrix phi = bell(BellLabel::PhiMinus).projector;
    const ScalarSeries f =
        reference_curve(phi, p, ReferenceKind::Feedback, BellLabel::PsiPlus, times);
    CHECK(f.values[0] == doctest::Approx(2.0));  // sqrt 2 * sqrt 2
    CHECK(f.values[1] == doctest::Approx(1.0));
  }

  TEST_CASE("starting at a Bell state the ensemble stays there") {
    CampaignConfig c = small("fig1_qsr", 20, 1.0);
    c.rho0 = InitialState::named("psi+");
    const EnsembleSummary s = run_campaign(c);
    CHECK(s.frequencies.at(BellLabel::PsiPlus) == 1.0);
    CHECK(s.counts.at(BellLabel::PsiPlus) == 20);
    CHECK(s.unconverged_frequency == 0.0);
    for (double v : s.mean_bures.values) CHECK(v <= 1e-6);
  }

  TEST_CASE("counts are integers summing with the unconverged count to n_traj") {
    const EnsembleSummary s = run_campaign(small("fig1_qsr", 37, 3.0));
    int total = 0;
    double freq = s.unconverged_frequency;
    for (BellLabel b : kAllBell) {
      total += s.counts.at(b);
      CHECK(s.frequencies.at(b) == doctest::Approx(s.counts.at(b) / 37.0));
      freq += s.frequencies.at(b);
    }
    CHECK(total <= 37);
    CHECK(total + std::lround(s.unconverged_frequency * 37) == 37);
    CHECK(freq == doctest::Approx(1.0));
    CHECK(s.trajectory_exponents.size() == 37);
    CHECK(s.final_distance.size() == 37);
    CHECK(s.reference_exponent == doctest::Approx(-0.3));
    CHECK(s.mean_bures.size() == 301);
  }

  TEST_CASE("results do not depend on the worker count") {
    CampaignConfig c = small("fig2_stab2_psi+", 12, 0.5);
    c.workers = 1;
    const CampaignResult a = run_campaign_detailed(c);
    c.workers = 4;
    const CampaignResult b = run_campaign_detailed(c);
    REQUIRE(a.trajectories.size() == b.trajectories.size());
    for (std::size_t i = 0; i < a.trajectories.size(); ++i) {
      CHECK(a.trajectories[i].distance == b.trajectories[i].distance);
      CHECK(a.trajectories[i].lyapunov == b.trajectories[i].lyapunov);
    }
    CHECK(a.summary.mean_V.values == b.summary.mean_V.values);
  }

  TEST_CASE("aggregation averages trajectories in index order") {
    const CampaignConfig c = small("fig1_qsr", 3, 1.0);
    const std::vector<double> times = {0.0, 0.5, 1.0};
    std::vector<TrajectoryResult> rs(3);
    for (int k = 0; k < 3; ++k) {
      rs[k].distance = {1.0 + k, 0.5 + k, 0.25 + k};
      rs[k].lyapunov = {2.0 * (k + 1), 1.0 * (k + 1), 0.5 * (k + 1)};
      rs[k].limit = k == 0 ? std::optional(BellLabel::PhiPlus) : std::nullopt;
      rs[k].steps = 1000;
      rs[k].clipped_mass = 1e-3;
    }
    rs[2].failed = true;
    const EnsembleSummary s = aggregate(c, times, rs);
    CHECK(s.n_failed == 1);
    CHECK(s.mean_bures.values[0] == doctest::Approx(1.5));
    CHECK(s.mean_V.values[2] == doctest::Approx(0.75));
    CHECK(s.counts.at(BellLabel::PhiPlus) == 1);
    CHECK(s.frequencies.at(BellLabel::PhiPlus) == doctest::Approx(1.0 / 3.0));
    CHECK(s.mean_clipped_per_step == doctest::Approx(1e-6));
    CHECK(std::isnan(s.trajectory_exponents[2]));
    // window [0.2, 0.8] holds only t = 0.5: the per-trajectory fit fails cleanly
    CHECK(std::isnan(s.trajectory_exponents[0]));
  }

  TEST_CASE("validation names the offending key") {
    CampaignConfig c = expand_preset("fig2_stab2_psi+");
    c.n_traj = 0;
    CHECK(validation_message(c).rfind("campaign.n_traj", 0) == 0);
    c = expand_preset("fig2_stab2_psi+");
    c.model.n_channels = 1;
    CHECK(validation_message(c).rfind("controller.kind", 0) == 0);
    c = expand_preset("fig2_stab2_psi+");
    c.controller.target = BellLabel::PhiPlus;
    CHECK(validation_message(c).rfind("controller.target", 0) == 0);
    c = expand_preset("fig2_stab2_psi+");
    c.sde.dt = -1.0;
    CHECK(validation_message(c).rfind("sde", 0) == 0);
    c = expand_preset("fig2_stab2_psi+");
    c.model.eta1 = 2.0;
    CHECK(validation_message(c).rfind("model", 0) == 0);
    c = expand_preset("fig2_stab2_psi+");
    c.controller.beta = 0.5;
    CHECK(validation_message(c).rfind("controller", 0) == 0);
    c = expand_preset("fig2_stab2_psi+");
    c.fit_t_hi = 20.0;
    CHECK(validation_message(c).rfind("campaign.fit_t_lo", 0) == 0);
  }

  TEST_CASE("too many failed trajectories abort the campaign") {
    CampaignConfig c = small("fig2_stab2_psi+", 20, 0.05);
    c.sde.dt = 1e-3;
    try {
      run_campaign(c);
      FAIL("expected CampaignFailure");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::CampaignFailure);
      CHECK(std::string(e.what()).find("ProjectionFailure") != std::string::npos);
    }
  }

  TEST_CASE("output files") {
    CampaignConfig c = small("fig4_stab1_psi+", 3, 0.2);
    c.write_trajectories = true;
    const CampaignResult r = run_campaign_detailed(c);
    const fs::path dir = fs::temp_directory_path() / "qfb_ensemble_outputs";
    fs::remove_all(dir);
    write_outputs(c, r, dir.string());

    const auto j = nlohmann::json::parse(read_file(dir / "summary.json"));
    CHECK(j["n_traj"] == 3);
    CHECK(j["n_failed"] == 0);
    CHECK(j["config"]["sde"]["dt"] == 5e-4);
    CHECK(j["frequencies"].contains("psi+"));
    CHECK(j["frequencies"].contains("unconverged"));
    CHECK(j["reference_exponent"].get<double>() == doctest::Approx(-0.3));

    std::istringstream series(read_file(dir / "series.csv"));
    std::string line;
    std::getline(series, line);
    CHECK(line == "t,mean_bures,mean_V,reference");
    int rows = 0;
    while (std::getline(series, line)) ++rows;
    CHECK(rows == static_cast<int>(r.times.size()));

    for (int k = 0; k < 3; ++k) {
      char name[64];
      std::snprintf(name, sizeof name, "trajectory_%05d.csv", k);
      std::istringstream t(read_file(dir / name));
      std::getline(t, line);
      CHECK(line == "t,d_B,V,X,u1,u2");
      std::getline(t, line);
      CHECK(line.rfind("0,", 0) == 0);
    }
    fs::remove_all(dir);
  }
}
